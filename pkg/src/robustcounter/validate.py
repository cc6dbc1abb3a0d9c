"""Independent verification of robustness claims.

Three checks, all operating on a *nominal* model, an uncertain set, and a
candidate solution:

* :func:`corner_check` -- exhaustive worst-case certification for bounded
  uncertainty.  Every realization with each uncertain value at an interval
  endpoint is evaluated; certification requires every violation to stay
  within the ``delta * max(1, |rhs|)`` allowance.
* :func:`monte_carlo_check` -- violation-probability estimation for random
  uncertainty, with splittable per-entry random streams so adding an entry
  never perturbs the draws of the others.
* :func:`sweep` -- solve a builder across an (epsilon, delta, kappa) grid and
  tabulate objectives against the nominal solve.

Sweep grid points are embarrassingly parallel; the estimator is sequential
per seed to keep reproducibility.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import FEASIBILITY_TOL, Model
from .solver import SolverOptions, solve
from .uncertainty import (
    Bounded,
    BoundedRange,
    Binomial,
    Discrete,
    Normal,
    Poisson,
    Uniform,
    UncertainSet,
    bounded_interval,
)

_CORNER_CAP = 20
_CERT_TOL = 1e-9


@dataclass
class CornerReport:
    """Worst-case certification over all interval corners."""

    corners_checked: int
    worst_violation: dict[int, float]
    certified: bool
    allowance: dict[int, float] = field(default_factory=dict)


@dataclass
class ViolationEstimate:
    """Monte Carlo estimate of the worst per-constraint violation probability."""

    samples: int
    violations: int
    frequency: float
    ci_half_width: float
    seed: int
    per_constraint: dict[int, float] = field(default_factory=dict)


def _nominal_coefficient(model: Model, entry) -> float:
    con = model.constraints[entry.constraint_id]
    if entry.is_rhs:
        return con.rhs
    return dict(con.lhs.terms)[entry.target]


def corner_check(model: Model, uncertain_set: UncertainSet, solution_values,
                 epsilon: float, delta: float) -> CornerReport:
    """Certify a solution against every corner of the uncertainty box.

    Coefficient and right-hand-side uncertainties are flipped jointly; the
    corner set factorizes across constraints (an entry belongs to exactly one
    row), so per-row enumeration covers the full product of intervals.
    Constraints without uncertain entries are checked for plain feasibility.

    Only bounded interval distributions are supported, and at most 20
    uncertain entries (use :func:`monte_carlo_check` beyond that).
    """
    uncertain_set.validate(model)
    for entry in uncertain_set:
        if not isinstance(entry.distribution, (Bounded, BoundedRange)):
            raise ValueError(
                f"corner_check supports bounded distributions only, got "
                f"{type(entry.distribution).__name__}; use monte_carlo_check"
            )
    if len(uncertain_set) > _CORNER_CAP:
        raise ValueError(
            f"{len(uncertain_set)} uncertain entries exceed the 2^{_CORNER_CAP} "
            "corner cap; use monte_carlo_check"
        )

    def interval(entry):
        nominal = _nominal_coefficient(model, entry)
        dist = entry.distribution
        if isinstance(dist, Bounded) and dist.epsilon is None:
            return bounded_interval(nominal, epsilon)
        return bounded_interval(nominal, dist)

    grouped = uncertain_set.by_constraint()
    worst: dict[int, float] = {}
    allowance: dict[int, float] = {}
    for con in model.constraints:
        entries = grouped.get(con.id, [])
        base_lhs = con.lhs.value(solution_values)
        if con.cone is not None:
            base_lhs += con.cone.value(solution_values)
        if not entries:
            resid = model.evaluate_constraint(solution_values, con.id)
            worst[con.id] = max(0.0, resid)
            allowance[con.id] = FEASIBILITY_TOL
            continue
        allowance[con.id] = delta * max(1.0, abs(con.rhs))
        lows, highs, weights = [], [], []
        rhs_entry_bounds = None
        for entry in entries:
            low, high = interval(entry)
            nominal = _nominal_coefficient(model, entry)
            if entry.is_rhs:
                rhs_entry_bounds = (low, high)
            else:
                lows.append(low - nominal)
                highs.append(high - nominal)
                weights.append(solution_values[entry.target])
        lows = np.asarray(lows)
        highs = np.asarray(highs)
        weights = np.asarray(weights)
        k = lows.shape[0]
        if k:
            bits = np.array(list(itertools.product((0.0, 1.0), repeat=k)))
            lhs_shift = bits @ (highs * weights) + (1.0 - bits) @ (lows * weights)
        else:
            lhs_shift = np.zeros(1)
        if rhs_entry_bounds is not None:
            rhs_options = np.array(rhs_entry_bounds)
        else:
            rhs_options = np.array([con.rhs])
        diff = (base_lhs + lhs_shift)[:, None] - rhs_options[None, :]
        if con.sense == "<=":
            viol = diff
        elif con.sense == ">=":
            viol = -diff
        else:
            viol = np.abs(diff)
        worst[con.id] = max(0.0, float(viol.max()))
    certified = all(
        worst[cid] <= allowance[cid] + _CERT_TOL for cid in worst
    )
    corners = 2 ** len(uncertain_set)
    return CornerReport(corners, worst, certified, allowance)


# -- Monte Carlo ----------------------------------------------------------------


def _entry_stream(seed: int, entry_index: int) -> np.random.Generator:
    """Philox counter-based stream keyed by (seed, entry index).

    The 128-bit key places the seed in the low word and the entry index in
    the high word, so streams are independent per entry and adding an entry
    leaves the others' draws untouched.
    """
    key = (int(seed) & (2 ** 64 - 1)) | (int(entry_index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _sample_perturbed(nominal: float, dist, epsilon: float, rng, n: int
                      ) -> np.ndarray:
    """N realizations of one uncertain value.

    Bounded/Uniform draw a symmetric perturbation xi ~ U[-1, 1] and realize
    ``nominal * (1 + eps * xi)`` (per-entry half-widths override the global
    level); BoundedRange draws uniformly over its explicit interval; other
    tags draw xi from the tagged distribution and realize the same relative
    form, normals truncated to six standard deviations.
    """
    if isinstance(dist, BoundedRange):
        return rng.uniform(dist.low, dist.high, size=n)
    if isinstance(dist, Bounded):
        eps = dist.epsilon if dist.epsilon is not None else epsilon
        xi = rng.uniform(-1.0, 1.0, size=n)
        return nominal * (1.0 + eps * xi)
    if isinstance(dist, Uniform):
        xi = rng.uniform(-1.0, 1.0, size=n)
        return nominal * (1.0 + epsilon * xi)
    if isinstance(dist, Normal):
        xi = rng.normal(dist.mean, dist.std, size=n)
        xi = np.clip(xi, dist.mean - 6.0 * dist.std, dist.mean + 6.0 * dist.std)
        return nominal * (1.0 + epsilon * xi)
    if isinstance(dist, Poisson):
        xi = rng.poisson(dist.mean, size=n)
        return nominal * (1.0 + epsilon * xi)
    if isinstance(dist, Binomial):
        xi = rng.binomial(dist.n, dist.p, size=n)
        return nominal * (1.0 + epsilon * xi)
    if isinstance(dist, Discrete):
        xi = rng.choice(np.asarray(dist.values), size=n, p=np.asarray(dist.probs))
        return nominal * (1.0 + epsilon * xi)
    raise ValueError(f"unsupported distribution {dist!r}")


def monte_carlo_check(model: Model, uncertain_set: UncertainSet, solution_values,
                      epsilon: float, delta: float, n_samples: int, seed: int
                      ) -> ViolationEstimate:
    """Estimate the violation probability of a solution under random data.

    A realization violates row i when its realized left-hand side exceeds the
    realized right-hand side by more than ``delta * max(1, |rhs|)`` (plus a
    1e-9 guard for solver noise).  The reported frequency is the worst row's
    frequency, matching the per-row form of the reliability guarantee;
    per-row frequencies ride along.  Identical seeds give identical
    estimates bit for bit.
    """
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples for a meaningful estimate")
    uncertain_set.validate(model)
    realizations: dict[int, np.ndarray] = {}
    for idx, entry in enumerate(uncertain_set):
        nominal = _nominal_coefficient(model, entry)
        rng = _entry_stream(seed, idx)
        realizations[idx] = _sample_perturbed(
            nominal, entry.distribution, epsilon, rng, n_samples
        )

    grouped: dict[int, list[int]] = {}
    for idx, entry in enumerate(uncertain_set):
        grouped.setdefault(entry.constraint_id, []).append(idx)

    per_constraint: dict[int, float] = {}
    worst_count = 0
    entries = list(uncertain_set)
    for con_id, idxs in grouped.items():
        con = model.constraints[con_id]
        lhs = np.full(n_samples, con.lhs.value(solution_values))
        if con.cone is not None:
            lhs += con.cone.value(solution_values)
        rhs = np.full(n_samples, con.rhs)
        for idx in idxs:
            entry = entries[idx]
            nominal = _nominal_coefficient(model, entry)
            if entry.is_rhs:
                rhs += realizations[idx] - nominal
            else:
                lhs += (realizations[idx] - nominal) * solution_values[entry.target]
        allowance = delta * max(1.0, abs(con.rhs))
        if con.sense == "<=":
            resid = lhs - rhs
        elif con.sense == ">=":
            resid = rhs - lhs
        else:
            resid = np.abs(lhs - rhs)
        count = int(np.sum(resid > allowance + _CERT_TOL))
        per_constraint[con_id] = count / n_samples
        worst_count = max(worst_count, count)

    frequency = worst_count / n_samples
    ci = 3.0 * math.sqrt(frequency * (1.0 - frequency) / n_samples)
    return ViolationEstimate(
        samples=n_samples,
        violations=worst_count,
        frequency=frequency,
        ci_half_width=ci,
        seed=seed,
        per_constraint=per_constraint,
    )


# -- parameter sweeps -------------------------------------------------------------


@dataclass
class SweepRow:
    epsilon: float
    delta: float
    kappa: float
    status: str
    objective: float
    nominal_objective: float
    relative_gap: float


def sweep(builder, grid, options: SolverOptions | None = None) -> list[SweepRow]:
    """Solve ``builder(eps, delta, kappa)`` at every grid point.

    The nominal point (0, 0, 1) is prepended when the grid does not contain
    it.  Individual failures are recorded as status ``error`` and the sweep
    continues.  ``relative_gap`` is the objective shortfall relative to the
    nominal optimum.
    """
    points = [tuple(map(float, p)) for p in grid]
    if not points:
        raise ValueError("sweep grid is empty")
    nominal_point = (0.0, 0.0, 1.0)
    if nominal_point not in points:
        points = [nominal_point] + points

    rows: list[SweepRow] = []
    nominal_objective = math.nan
    for eps, delta, kappa in points:
        try:
            sol = solve(builder(eps, delta, kappa), options)
            status, objective = sol.status, sol.objective
        except Exception:  # individual failures must not kill the sweep
            status, objective = "error", math.nan
        if (eps, delta, kappa) == nominal_point and status == "optimal":
            nominal_objective = objective
        rows.append(SweepRow(eps, delta, kappa, status, objective,
                             math.nan, math.nan))
    for row in rows:
        row.nominal_objective = nominal_objective
        if row.status == "optimal" and math.isfinite(nominal_objective):
            denom = abs(nominal_objective) if nominal_objective != 0 else 1.0
            row.relative_gap = (nominal_objective - row.objective) / denom
    return rows


def write_sweep_csv(rows, fh) -> None:
    """Write sweep rows as CSV at full precision (repr of each float)."""
    writer = csv.writer(fh)
    writer.writerow(["epsilon", "delta", "kappa", "status", "objective",
                     "nominal_objective", "relative_gap"])
    for row in rows:
        writer.writerow([
            repr(row.epsilon), repr(row.delta), repr(row.kappa), row.status,
            repr(row.objective), repr(row.nominal_objective),
            repr(row.relative_gap),
        ])
