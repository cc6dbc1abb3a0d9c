"""Embedded optimizer: two-phase simplex, branch-and-bound, cone cuts.

Everything here is deterministic: identical inputs and options produce
identical Solutions, including node counts.  The simplex uses Bland's rule
throughout (termination over speed), branching picks the most fractional
variable with lowest-index tie-breaks, and the node queue is ordered by best
bound with FIFO tie-breaks.  Square-root cone terms are handled by lazy outer
approximation: supporting hyperplanes of the convex radical are added at
violated incumbents until the exact rows hold.

One solve runs on one thread; distinct solves on distinct models may run
concurrently (no shared mutable state).
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    FEASIBILITY_TOL,
    INF,
    INTEGRALITY_TOL,
    ConeTerm,
    LinExpr,
    Model,
    ModelError,
    Solution,
    SolverStats,
    StandardFormLP,
    to_standard_form,
)

_PIVOT_TOL = 1e-9
_BOUND_CAP = 1e9  # branching cap for unbounded integer variables
_PRUNE_TOL = 1e-9


class SolverError(ValueError):
    """Raised for malformed solver input (dimension mismatch etc.)."""


@dataclass
class SolverOptions:
    feasibility_tol: float = FEASIBILITY_TOL
    integrality_tol: float = INTEGRALITY_TOL
    cone_cut_tol: float = 1e-6
    max_nodes: int = 200_000
    max_cone_rounds: int = 200
    time_limit_seconds: float = INF
    branching: str = "most_fractional"
    node_order: str = "best_bound"

    def __post_init__(self):
        for name in ("feasibility_tol", "integrality_tol", "cone_cut_tol"):
            if getattr(self, name) <= 0:
                raise SolverError(f"{name} must be positive")


@dataclass
class NodeRecord:
    """One branch-and-bound subproblem: bound tightenings relative to the model."""

    bounds: dict[int, tuple[float, float]]
    parent_bound: float
    depth: int


# -- simplex ----------------------------------------------------------------


class _SimplexResult:
    __slots__ = ("status", "x", "objective", "iterations", "duals_ub", "duals_eq")

    def __init__(self, status, x=None, objective=math.nan, iterations=0,
                 duals_ub=None, duals_eq=None):
        self.status = status
        self.x = x
        self.objective = objective
        self.iterations = iterations
        self.duals_ub = duals_ub
        self.duals_eq = duals_eq


def _pivot(tab, basis, row, col):
    tab[row] /= tab[row, col]
    piv_row = tab[row]
    for r in range(tab.shape[0]):
        if r != row and abs(tab[r, col]) > _PIVOT_TOL:
            tab[r] -= tab[r, col] * piv_row
    basis[row] = col


def _run_simplex(tab, basis, n_cols, max_iter=1_000_000):
    """Minimize over the tableau in place with Bland's rule.

    ``tab`` rows are [A | b] plus a final reduced-cost row [cbar | -obj].
    Returns (status, iterations); status is 'optimal' or 'unbounded'.
    """
    m = tab.shape[0] - 1
    iters = 0
    while iters < max_iter:
        cbar = tab[-1, :n_cols]
        enter = -1
        for j in range(n_cols):
            if cbar[j] < -_PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal", iters
        leave = -1
        best_ratio = INF
        for r in range(m):
            a = tab[r, enter]
            if a > _PIVOT_TOL:
                ratio = tab[r, -1] / a
                if (ratio < best_ratio - _PIVOT_TOL
                        or (abs(ratio - best_ratio) <= _PIVOT_TOL
                            and (leave < 0 or basis[r] < basis[leave]))):
                    best_ratio = ratio
                    leave = r
        if leave < 0:
            return "unbounded", iters
        _pivot(tab, basis, leave, enter)
        iters += 1
    return "limit", iters


def solve_lp(sf: StandardFormLP, options: SolverOptions | None = None) -> Solution:
    """Solve a standard-form LP by two-phase primal simplex.

    Status ``optimal`` certifies primal feasibility within the feasibility
    tolerance and no improving reduced cost; ``infeasible`` certifies a
    positive phase-1 optimum; ``unbounded`` certifies an improving ray.
    The returned values are restored to model-variable space and the duals of
    the final basis are stashed in ``stats.extra['duals']``.
    """
    options = options or SolverOptions()
    res = _solve_standard(sf, options)
    stats = SolverStats(iterations=res.iterations)
    if res.status == "optimal":
        values = sf.restore(res.x)
        stats.extra["duals"] = (res.duals_ub, res.duals_eq)
        return Solution("optimal", values, sf.model_objective(res.objective), stats)
    if res.status == "infeasible":
        return Solution("infeasible", {}, math.nan, stats)
    if res.status == "unbounded":
        obj = INF if sf.sense == "max" else -INF
        return Solution("unbounded", {}, obj, stats)
    return Solution("limit_reached", {}, math.nan, stats)


def _solve_standard(sf: StandardFormLP, options: SolverOptions) -> _SimplexResult:
    """Two-phase simplex on the canonical maximization; internal min convention."""
    n = sf.n_cols
    m_ub, m_eq = sf.a_ub.shape[0], sf.a_eq.shape[0]
    if sf.a_ub.shape[1] != n or (m_eq and sf.a_eq.shape[1] != n):
        raise SolverError("constraint matrix width does not match objective length")
    if sf.b_ub.shape[0] != m_ub or sf.b_eq.shape[0] != m_eq:
        raise SolverError("right-hand side length does not match matrix rows")
    m = m_ub + m_eq

    # rows: [A_ub | I_slack] and [A_eq | 0], signs flipped to keep rhs >= 0
    a = np.zeros((m, n + m_ub))
    b = np.zeros(m)
    row_sign = np.ones(m)
    a[:m_ub, :n] = sf.a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    b[:m_ub] = sf.b_ub
    if m_eq:
        a[m_ub:, :n] = sf.a_eq
        b[m_ub:] = sf.b_eq
    for r in range(m):
        if b[r] < 0:
            a[r] *= -1.0
            b[r] *= -1.0
            row_sign[r] = -1.0

    # initial basis: clean slacks where available, artificials elsewhere
    need_art = [r for r in range(m) if r >= m_ub or row_sign[r] < 0]
    n_work = n + m_ub
    n_total = n_work + len(need_art)
    tab = np.zeros((m + 1, n_total + 1))
    tab[:m, :n_work] = a
    tab[:m, -1] = b
    basis = [-1] * m
    for r in range(m_ub):
        if row_sign[r] > 0:
            basis[r] = n + r
    for k, r in enumerate(need_art):
        col = n_work + k
        tab[r, col] = 1.0
        basis[r] = col

    total_iters = 0
    if need_art:
        # phase 1: minimize the artificial sum
        tab[-1, n_work:n_total] = 1.0
        for r in need_art:
            tab[-1] -= tab[r]
        status, iters = _run_simplex(tab, basis, n_total)
        total_iters += iters
        phase1 = -tab[-1, -1]
        if phase1 > options.feasibility_tol:
            return _SimplexResult("infeasible", iterations=total_iters)
        # drive leftover zero-level artificials out of the basis
        keep_rows = []
        for r in range(m):
            if basis[r] >= n_work:
                pivot_col = -1
                for j in range(n_work):
                    if abs(tab[r, j]) > 1e-7:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(tab, basis, r, pivot_col)
                    keep_rows.append(r)
                # else: redundant row, dropped below
            else:
                keep_rows.append(r)
        if len(keep_rows) < m:
            rows = keep_rows + [m]
            tab = tab[rows]
            basis = [basis[r] for r in keep_rows]
            m = len(keep_rows)
        tab = np.delete(tab, np.s_[n_work:n_total], axis=1)

    # phase 2: minimize -c over the feasible tableau
    c_min = np.zeros(n_work)
    c_min[:n] = -sf.c
    tab[-1, :n_work] = c_min
    tab[-1, -1] = 0.0
    for r in range(m):
        coeff = tab[-1, basis[r]]
        if abs(coeff) > _PIVOT_TOL:
            tab[-1] -= coeff * tab[r]
    status, iters = _run_simplex(tab, basis, n_work)
    total_iters += iters
    if status == "unbounded":
        return _SimplexResult("unbounded", iterations=total_iters)
    if status == "limit":
        return _SimplexResult("limit", iterations=total_iters)

    x = np.zeros(n_work)
    for r in range(m):
        x[basis[r]] = tab[r, -1]
    x = np.maximum(x, 0.0)
    objective = float(sf.c @ x[:n] + sf.c0)

    # simplex multipliers from the final basis, mapped to max-convention duals
    cols = np.zeros((m, m))
    cb = np.zeros(m)
    a_full = np.zeros((m_ub + m_eq, n_work))
    a_full[:m_ub, :n] = sf.a_ub
    a_full[:m_ub, n:] = np.eye(m_ub)
    if m_eq:
        a_full[m_ub:, :n] = sf.a_eq
    row_ids = keep_rows if need_art and len(basis) < m_ub + m_eq else list(range(m_ub + m_eq))
    signed = a_full[row_ids] * row_sign[row_ids, None]
    for k, col in enumerate(basis):
        cols[:, k] = signed[:, col]
        cb[k] = c_min[col]
    try:
        y_int = np.linalg.solve(cols.T, cb)
    except np.linalg.LinAlgError:
        y_int = np.zeros(m)
    y_max = np.zeros(m_ub + m_eq)
    for k, r in enumerate(row_ids):
        y_max[r] = -row_sign[r] * y_int[k]
    return _SimplexResult("optimal", x[:n], objective, total_iters,
                          duals_ub=y_max[:m_ub], duals_eq=y_max[m_ub:])


# -- branch and bound --------------------------------------------------------


def _root_bounds(model: Model) -> tuple[dict[int, tuple[float, float]], bool]:
    """Model bounds with unbounded integer variables capped for branching."""
    bounds = {}
    capped = False
    for v in model.variables:
        lo, hi = v.lower, v.upper
        if v.is_integer:
            if lo == -INF:
                lo, capped = -_BOUND_CAP, True
            if hi == INF:
                hi, capped = _BOUND_CAP, True
        bounds[v.id] = (lo, hi)
    return bounds, capped


def _fractional_vars(model: Model, values, tol: float):
    out = []
    for v in model.variables:
        if v.is_integer:
            val = values[v.id]
            frac = abs(val - round(val))
            if frac > tol:
                out.append((v.id, val, frac))
    return out


def solve_milp(model: Model, options: SolverOptions | None = None) -> Solution:
    """Branch-and-bound over LP relaxations.

    Branching variable: most fractional, ties broken by lowest id.  Node
    order: best bound, ties FIFO.  An exhausted tree certifies the incumbent
    optimal (within the LP tolerances); hitting ``max_nodes`` or the time
    limit yields ``limit_reached`` carrying the incumbent if one exists.
    """
    options = options or SolverOptions()
    if model.has_cones():
        raise ModelError("cone terms present; use solve_cone")
    deadline = (time.monotonic() + options.time_limit_seconds
                if options.time_limit_seconds != INF else INF)
    root_bounds, capped = _root_bounds(model)
    stats = SolverStats()
    if capped:
        stats.extra["integer_bounds_capped"] = True

    best_values = None
    best_cano = -INF
    counter = 0
    heap = [(-INF, counter, NodeRecord(root_bounds, INF, 0))]
    status = "optimal"
    bound_sequence: list[float] = []
    stats.extra["bound_sequence"] = bound_sequence
    while heap:
        neg_bound, _, node = heapq.heappop(heap)
        bound_sequence.append(-neg_bound)
        if -neg_bound <= best_cano + _PRUNE_TOL and best_values is not None:
            break  # best-bound order: nothing left can improve
        if stats.nodes >= options.max_nodes or time.monotonic() > deadline:
            status = "limit_reached"
            break
        try:
            sf = to_standard_form(model, bounds=node.bounds)
        except ModelError:
            continue  # inverted node bounds: empty subproblem
        res = _solve_standard(sf, options)
        stats.nodes += 1
        stats.iterations += res.iterations
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            obj = INF if model.objective_sense == "max" else -INF
            return Solution("unbounded", {}, obj, stats)
        cano = res.objective  # canonical max value from _solve_standard
        if cano <= best_cano + _PRUNE_TOL and best_values is not None:
            continue
        values = sf.restore(res.x)
        fractional = _fractional_vars(model, values, options.integrality_tol)
        if not fractional:
            if cano > best_cano:
                best_cano = cano
                best_values = values
            continue
        # most fractional: distance to nearest integer closest to 0.5
        var_id, val, _ = min(
            fractional, key=lambda t: (abs(t[2] - 0.5), t[0])
        )
        lo, hi = node.bounds[var_id]
        down = dict(node.bounds)
        down[var_id] = (lo, math.floor(val))
        up = dict(node.bounds)
        up[var_id] = (math.ceil(val), hi)
        for child in (down, up):
            clo, chi = child[var_id]
            if clo <= chi:
                counter += 1
                heapq.heappush(
                    heap, (-cano, counter, NodeRecord(child, cano, node.depth + 1))
                )

    if best_values is None:
        if status == "limit_reached":
            return Solution("limit_reached", {}, math.nan, stats)
        return Solution("infeasible", {}, math.nan, stats)
    objective = best_cano if model.objective_sense == "max" else -best_cano
    return Solution(status, best_values, objective, stats)


# -- cone cuts ----------------------------------------------------------------


def _cone_support_cut(cone: ConeTerm, values):
    """Linear under-estimator of the cone value, tight at ``values``.

    Returns a (terms, constant) pair.  The gradient of the radical is defined
    whenever the radical is positive at the incumbent; the zero-radical case
    (possible only with a zero inside constant) falls back to a
    single-coordinate subgradient pointed toward the incumbent.
    """
    g2 = cone.constant_inside
    for var_id, coeff in cone.components:
        g2 += (coeff * values[var_id]) ** 2
    g = math.sqrt(g2)
    if g > 1e-12:
        terms = [
            (var_id, cone.scale * coeff * coeff * values[var_id] / g)
            for var_id, coeff in cone.components
        ]
        constant = cone.scale * cone.constant_inside / g
        return terms, constant
    if not cone.components:
        return [], 0.0
    var_id, coeff = max(cone.components, key=lambda t: (abs(t[1]), -t[0]))
    direction = 1.0 if values[var_id] >= 0 else -1.0
    return [(var_id, cone.scale * coeff * direction)], 0.0


def solve_cone(model: Model, options: SolverOptions | None = None) -> Solution:
    """Outer-approximation loop for models with square-root cone rows.

    Each round solves the current linearized MILP, evaluates every cone row
    exactly at the incumbent, and adds supporting-hyperplane cuts for rows
    violated by more than ``cone_cut_tol``.  Supporting hyperplanes of a
    convex radical never cut off exactly-feasible points, so the final
    incumbent is optimal for the original model.
    """
    options = options or SolverOptions()
    cone_rows = [c for c in model.constraints if c.cone is not None]
    if not cone_rows:
        return solve_milp(model, options)

    work = model.copy(name=f"{model.name}__oa")
    # replace each cone row by its value at the radical floor (valid relaxation:
    # the radical never falls below sqrt(constant_inside))
    originals = {}
    for con in cone_rows:
        originals[con.id] = con
        floor_const = con.cone.scale * math.sqrt(con.cone.constant_inside)
        relaxed = LinExpr.from_terms(con.lhs.terms, con.lhs.constant + floor_const)
        work.constraints[con.id] = replace(con, lhs=relaxed, cone=None)

    total = SolverStats()
    last = None
    worst = 0.0
    for _ in range(options.max_cone_rounds):
        sol = solve_milp(work.finalize(), options)
        total.nodes += sol.stats.nodes
        total.iterations += sol.stats.iterations
        total.extra.update(sol.stats.extra)
        if sol.status != "optimal":
            sol.stats = total
            return sol
        worst = 0.0
        violated = []
        for con in originals.values():
            lhs_val = con.lhs.value(sol.values) + con.cone.value(sol.values)
            viol = lhs_val - con.rhs
            if viol > options.cone_cut_tol:
                violated.append(con)
                worst = max(worst, viol)
        if not violated:
            sol.stats = total
            return sol
        work = work.copy()
        for con in violated:
            terms, constant = _cone_support_cut(con.cone, sol.values)
            cut_terms = list(con.lhs.terms) + list(terms)
            cut = LinExpr.from_terms(cut_terms, con.lhs.constant + constant)
            total.cone_cuts += 1
            work.add_constraint(
                cut, "<=", con.rhs,
                label=f"{con.label}__cut{total.cone_cuts}",
            )
        last = sol

    total.extra["cone_violation"] = worst
    out = last or Solution("limit_reached", {}, math.nan, total)
    out.status = "limit_reached"
    out.stats = total
    return out


def solve(model: Model, options: SolverOptions | None = None) -> Solution:
    """Dispatch on model features: cone rows, integrality, or plain LP."""
    options = options or SolverOptions()
    if model.has_cones():
        return solve_cone(model, options)
    if model.has_integers():
        return solve_milp(model, options)
    return solve_lp(to_standard_form(model), options)
