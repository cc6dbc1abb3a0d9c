"""Mechanical derivation of deterministic robust counterparts.

Two transformations on a nominal model plus an uncertain set:

* :func:`interval_robust_counterpart` -- bounded (interval) uncertainty with
  level ``epsilon`` and infeasibility tolerance ``delta``.  Per uncertain
  ``<=`` row it adds the worst-case row with absolute-value auxiliaries and
  sandwich links, keeping every nominal row verbatim.
* :func:`symmetric_robust_counterpart` -- symmetric random uncertainty with
  reliability level ``kappa``.  The worst-case row gains a square-root cone
  term weighted by ``epsilon * omega`` where ``kappa = exp(-omega^2/2)``.

Both are pure transformations: the input model is read-only and a fresh model
is returned, so many transformations may run in parallel.

The module also derives the robust timing rows used for sequencing
constraints, where the slack budget is split between the main constraints
(``delta``) and the emitted auxiliary rows (``delta2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import ConeTerm, LinExpr, Model, ModelError
from .uncertainty import UncertainSet, normal_lambda, omega_from_kappa

IRC_SUFFIX = "__irc"
RC_SUFFIX = "__rc"


@dataclass
class CounterpartArtifacts:
    """A robust counterpart model plus the bookkeeping produced with it.

    ``aux_u`` maps (constraint id, variable id) to the absolute-value
    auxiliary; ``aux_v`` (symmetric counterparts only) maps the same key to
    the cone-splitting auxiliary.  ``provenance`` maps every added constraint
    back to the nominal row it protects.
    """

    model: Model
    aux_u: dict[tuple[int, int], int] = field(default_factory=dict)
    aux_v: dict[tuple[int, int], int] = field(default_factory=dict)
    provenance: dict[int, int] = field(default_factory=dict)


def _slack_allowance(rhs: float, delta: float) -> float:
    return delta * max(1.0, abs(rhs))


def _prepare(model: Model, uncertain_set: UncertainSet, epsilon: float,
             delta: float, suffix: str):
    if model.has_cones():
        raise ModelError("input model must be cone-free")
    if epsilon < 0 or delta < 0:
        raise ModelError("epsilon and delta must be nonnegative")
    uncertain_set.validate(model)
    grouped = uncertain_set.by_constraint()
    for con_id in grouped:
        con = model.constraints[con_id]
        if con.sense != "<=":
            raise ModelError(
                f"uncertain constraint {con.label!r} has sense {con.sense!r}; "
                "normalize to <= before robustifying"
            )
    out = model.copy(name=model.name + suffix)
    return out, grouped


def interval_robust_counterpart(model: Model, uncertain_set: UncertainSet,
                                epsilon: float, delta: float
                                ) -> CounterpartArtifacts:
    """Bounded-uncertainty counterpart.

    Per uncertain row ``sum(a_j x_j) <= b`` the output carries

        sum(a_j x_j) + eps * sum_{j in M} |a_j| u_j
            <= b - eps*|b|*[RHS uncertain] + delta * max(1, |b|)

    with links ``-u_j <= x_j <= u_j`` and ``u_j >= 0``, alongside all nominal
    rows and the unchanged objective.  Any feasible point of the counterpart
    is feasible for the nominal model.
    """
    out, grouped = _prepare(model, uncertain_set, epsilon, delta, IRC_SUFFIX)
    art = CounterpartArtifacts(model=out)
    for con_id in sorted(grouped):
        con = model.constraints[con_id]
        coeffs = dict(con.lhs.terms)
        rhs_uncertain = any(e.is_rhs for e in grouped[con_id])
        robust_terms = list(con.lhs.terms)
        for entry in grouped[con_id]:
            if entry.is_rhs:
                continue
            var = model.variables[entry.target]
            u = out.add_variable(f"u_{con.label}_{var.name}", "continuous", 0.0)
            art.aux_u[(con_id, var.id)] = u
            robust_terms.append((u, epsilon * abs(coeffs[var.id])))
            up = out.add_constraint(
                [(var.id, 1.0), (u, -1.0)], "<=", 0.0,
                label=f"{con.label}{IRC_SUFFIX}_lnk_{var.name}_up",
            )
            lo = out.add_constraint(
                [(var.id, -1.0), (u, -1.0)], "<=", 0.0,
                label=f"{con.label}{IRC_SUFFIX}_lnk_{var.name}_lo",
            )
            art.provenance[up] = con_id
            art.provenance[lo] = con_id
        rhs = con.rhs
        if rhs_uncertain:
            rhs -= epsilon * abs(con.rhs)
        rhs += _slack_allowance(con.rhs, delta)
        robust = out.add_constraint(
            LinExpr.from_terms(robust_terms, con.lhs.constant), "<=", rhs,
            label=f"{con.label}{IRC_SUFFIX}",
        )
        art.provenance[robust] = con_id
    art.model = out.finalize()
    return art


def symmetric_robust_counterpart(model: Model, uncertain_set: UncertainSet,
                                 epsilon: float, delta: float, kappa: float
                                 ) -> CounterpartArtifacts:
    """Symmetric-uncertainty counterpart with reliability level ``kappa``.

    Per uncertain row the output carries

        sum(a_j x_j) + eps * sum_{j in M} |a_j| u_j
            + CONE(eps * omega; {a_j v_j}; b^2 * [RHS uncertain])
            <= b + delta * max(1, |b|)

    with links ``-u_j <= x_j - v_j <= u_j``, ``u_j >= 0`` and ``v_j`` free.
    The solver trades the linear protection (u) against the cone protection
    (v); at ``kappa = 1`` the cone weight vanishes and the row admits the
    nominal point with ``v = x, u = 0``.
    """
    omega = omega_from_kappa(kappa)
    out, grouped = _prepare(model, uncertain_set, epsilon, delta, RC_SUFFIX)
    art = CounterpartArtifacts(model=out)
    for con_id in sorted(grouped):
        con = model.constraints[con_id]
        coeffs = dict(con.lhs.terms)
        rhs_uncertain = any(e.is_rhs for e in grouped[con_id])
        robust_terms = list(con.lhs.terms)
        cone_components = []
        for entry in grouped[con_id]:
            if entry.is_rhs:
                continue
            var = model.variables[entry.target]
            u = out.add_variable(f"u_{con.label}_{var.name}", "continuous", 0.0)
            v = out.add_variable(
                f"v_{con.label}_{var.name}", "continuous", -math.inf, math.inf
            )
            art.aux_u[(con_id, var.id)] = u
            art.aux_v[(con_id, var.id)] = v
            robust_terms.append((u, epsilon * abs(coeffs[var.id])))
            cone_components.append((v, coeffs[var.id]))
            up = out.add_constraint(
                [(var.id, 1.0), (v, -1.0), (u, -1.0)], "<=", 0.0,
                label=f"{con.label}{RC_SUFFIX}_lnk_{var.name}_up",
            )
            lo = out.add_constraint(
                [(var.id, -1.0), (v, 1.0), (u, -1.0)], "<=", 0.0,
                label=f"{con.label}{RC_SUFFIX}_lnk_{var.name}_lo",
            )
            art.provenance[up] = con_id
            art.provenance[lo] = con_id
        cone = ConeTerm.from_components(
            epsilon * omega,
            cone_components,
            con.rhs ** 2 if rhs_uncertain else 0.0,
        )
        robust = out.add_constraint(
            LinExpr.from_terms(robust_terms, con.lhs.constant), "<=",
            con.rhs + _slack_allowance(con.rhs, delta),
            label=f"{con.label}{RC_SUFFIX}",
            cone=cone,
        )
        art.provenance[robust] = con_id
    art.model = out.finalize()
    return art


# -- robust timing rows --------------------------------------------------------


@dataclass(frozen=True)
class TimingConstraintTemplate:
    """Data for one pair of sequencing rows of a scheduling model.

    ``alpha`` is the fixed processing-time coefficient (hours), ``beta`` the
    batch-size-proportional coefficient (hours per unit), ``horizon_H`` the
    big-M horizon and ``changeover_tcl`` the clean-up time.  The variable ids
    reference the caller's model: successor start, predecessor timing,
    the pair of assignment binaries, and the batch size.
    """

    alpha: float
    beta: float
    horizon_H: float
    changeover_tcl: float
    start_var: int
    finish_var: int
    assign_vars: tuple[int, int]
    batch_var: int

    def __post_init__(self):
        for name in ("alpha", "beta", "horizon_H", "changeover_tcl"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class TimingRow:
    label: str
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    note: str = ""

    def add_to(self, model: Model, prefix: str = "") -> int:
        return model.add_constraint(
            list(self.terms), self.sense, self.rhs, label=prefix + self.label
        )


def _timing_rows(template: TimingConstraintTemplate, alpha_eff: float,
                 beta_eff: float, delta2: float, suffix: str
                 ) -> list[TimingRow]:
    wv1, wv2 = template.assign_vars
    h = template.horizon_H
    base = (
        (template.start_var, 1.0),
        (template.finish_var, -1.0),
        (wv1, h - alpha_eff),
        (wv2, h),
        (template.batch_var, -beta_eff),
    )
    note = f"delta2={delta2:.12g}" + (" (negative: tightens)" if delta2 < 0 else "")
    return [
        TimingRow(f"timing_seq{suffix}", base, "<=", 2.0 * h + delta2, note),
        TimingRow(
            f"timing_changeover{suffix}", base, "<=",
            2.0 * h + template.changeover_tcl + delta2, note,
        ),
    ]


def robust_timing_bounded(template: TimingConstraintTemplate, epsilon: float,
                          delta: float, target: str = "alpha",
                          alpha_range: tuple[float, float] | None = None
                          ) -> tuple[list[TimingRow], float]:
    """Bounded-uncertainty timing rows and the emitted slack split.

    Both coefficients are lowered to their interval floor ((1 - eps) times
    nominal, or the explicit range floor for the targeted coefficient when
    ``alpha_range`` is given).  The auxiliary slack satisfies the identity

        delta + delta2 == upper - lower   (== 2 * eps * coefficient)

    with the ``target`` argument selecting the fixed-time ("alpha") or rate
    ("beta") branch.  A negative delta2 (delta exceeding the interval width)
    is emitted as-is with a note on the rows: the identity is an identity,
    not an inequality.
    """
    if epsilon < 0 or delta < 0:
        raise ValueError("epsilon and delta must be nonnegative")
    if target not in ("alpha", "beta"):
        raise ValueError("target must be 'alpha' or 'beta'")
    alpha_eff = (1.0 - epsilon) * template.alpha
    beta_eff = (1.0 - epsilon) * template.beta
    if alpha_range is not None:
        low, high = alpha_range
        if low > high:
            raise ValueError(f"empty range [{low}, {high}]")
        width = high - low
        if target == "alpha":
            alpha_eff = low
        else:
            beta_eff = low
    else:
        width = 2.0 * epsilon * (template.alpha if target == "alpha" else template.beta)
    delta2 = width - delta
    return _timing_rows(template, alpha_eff, beta_eff, delta2, IRC_SUFFIX), delta2


def robust_timing_normal(template: TimingConstraintTemplate, mu: float,
                         sigma: float, epsilon: float, delta: float,
                         kappa: float, delta2_reading: str = "sigma"
                         ) -> tuple[list[TimingRow], float]:
    """Normal-uncertainty timing rows and the emitted slack split.

    Both coefficients are scaled by ``1 - eps * (lambda * sqrt(sigma) - mu)``
    with ``lambda`` the standard-normal quantile at ``1 - kappa``.  The slack
    split follows the same quantile shift:

        delta + delta2 == 2 * eps * (lambda * sqrt(sigma) - mu)

    ``delta2_reading`` selects which scalar sits under the square root in the
    split: the default "sigma" keeps the split consistent with the
    coefficient multipliers; "delta" reproduces the alternative published
    reading ``2 * eps * (lambda * sqrt(delta) - mu)``.  The multipliers are
    unaffected by the switch.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if epsilon < 0 or delta < 0:
        raise ValueError("epsilon and delta must be nonnegative")
    if delta2_reading not in ("sigma", "delta"):
        raise ValueError("delta2_reading must be 'sigma' or 'delta'")
    lam = normal_lambda(kappa)
    multiplier = 1.0 - epsilon * (lam * math.sqrt(sigma) - mu)
    alpha_eff = multiplier * template.alpha
    beta_eff = multiplier * template.beta
    inner = sigma if delta2_reading == "sigma" else delta
    delta2 = 2.0 * epsilon * (lam * math.sqrt(inner) - mu) - delta
    return _timing_rows(template, alpha_eff, beta_eff, delta2, RC_SUFFIX), delta2
