"""Hospital site-selection model family.

Builds the nominal expected-utilization maximization (open at most S sites
under a budget, an enrollment floor per open site, and full assignment of
population units) plus its two robust variants:

* interval robust budget row with absolute-value auxiliaries on the uncertain
  fixed costs, inflated uncertain variable costs, and the worst-case budget
  ``(1 - eps + delta) * C``;
* reliability-level robust budget row carrying a square-root cone over the
  uncertain fixed/variable cost blocks with the squared budget inside the
  radical and right-hand side ``(1 + delta) * C``.

Expected utilizations come from populations and per-person site-choice
probabilities.  All builders are pure functions over immutable instances.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ConeTerm, Model
from .uncertainty import RHS, Bounded, UncertainSet, omega_from_kappa

_ID_OK = str.isidentifier


class InstanceError(ValueError):
    """Raised when instance data violates its invariants; names the culprit."""


@dataclass(frozen=True)
class PopulationUnit:
    id: str
    name: str
    population: float

    def __post_init__(self):
        if self.population < 0:
            raise InstanceError(f"unit {self.id!r}: population must be nonnegative")


@dataclass(frozen=True)
class SiteCandidate:
    id: str
    name: str
    fixed_cost: float
    variable_cost: float

    def __post_init__(self):
        if self.fixed_cost < 0:
            raise InstanceError(f"site {self.id!r}: fixed cost must be nonnegative")
        if self.variable_cost < 0:
            raise InstanceError(f"site {self.id!r}: variable cost must be nonnegative")


@dataclass(frozen=True)
class UtilizationMatrix:
    """Expected utilizations u[i, j] = population_i * probability_ij."""

    u: np.ndarray
    column_totals: np.ndarray

    def __post_init__(self):
        if np.any(self.u < 0):
            raise InstanceError("utilization entries must be nonnegative")
        if not np.allclose(self.column_totals, self.u.sum(axis=0), atol=1e-9):
            raise InstanceError("column totals do not match the utilization matrix")


def build_utilization(units, probabilities) -> UtilizationMatrix:
    """Expected utilization matrix from populations and choice probabilities."""
    p = np.asarray(probabilities, dtype=float)
    n = np.asarray([u.population for u in units], dtype=float)
    if p.ndim != 2 or p.shape[0] != n.shape[0]:
        raise InstanceError(
            f"probability matrix has {p.shape[0] if p.ndim == 2 else '?'} rows "
            f"for {n.shape[0]} units"
        )
    bad = np.argwhere((p < 0) | (p > 1))
    if bad.size:
        i, j = bad[0]
        raise InstanceError(
            f"probability p[{units[i].id},{j}] = {p[i, j]} outside [0, 1]"
        )
    u = n[:, None] * p
    return UtilizationMatrix(u=u, column_totals=u.sum(axis=0))


@dataclass(frozen=True)
class SiteSelectionInstance:
    units: tuple[PopulationUnit, ...]
    sites: tuple[SiteCandidate, ...]
    probabilities: np.ndarray
    budget: float
    min_enrollment: float
    max_sites: int
    uncertain_fixed: tuple[int, ...] = ()     # site indices with uncertain f
    uncertain_variable: tuple[int, ...] = ()  # site indices with uncertain v

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        m, n = len(self.units), len(self.sites)
        if p.shape != (m, n):
            raise InstanceError(
                f"probability matrix shape {p.shape} does not match "
                f"{m} units x {n} sites"
            )
        bad = np.argwhere((p < 0) | (p > 1))
        if bad.size:
            i, j = bad[0]
            raise InstanceError(
                f"probability p[{self.units[i].id},{self.sites[j].id}] = "
                f"{p[i, j]} outside [0, 1]"
            )
        rowsum = p.sum(axis=1)
        over = np.argwhere(rowsum > 1.0 + 1e-9)
        if over.size:
            i = over[0][0]
            raise InstanceError(
                f"unit {self.units[i].id!r}: site probabilities sum to "
                f"{rowsum[i]:.6g} > 1 (a person picks at most one site)"
            )
        if self.max_sites < 1:
            raise InstanceError("max_sites must be at least 1")
        if self.budget <= 1.0:
            raise InstanceError(
                "budget must exceed 1 (the slack allowance max{1, C} must equal C)"
            )
        if self.min_enrollment < 0:
            raise InstanceError("min_enrollment must be nonnegative")
        for idx in (*self.uncertain_fixed, *self.uncertain_variable):
            if not 0 <= idx < n:
                raise InstanceError(f"uncertain site index {idx} out of range")
        for u in self.units:
            if not _ID_OK(u.id):
                raise InstanceError(f"unit id {u.id!r} is not an identifier")
        for s in self.sites:
            if not _ID_OK(s.id):
                raise InstanceError(f"site id {s.id!r} is not an identifier")

    @property
    def utilization(self) -> UtilizationMatrix:
        return build_utilization(self.units, self.probabilities)

    @staticmethod
    def with_all_uncertain(units, sites, probabilities, budget, min_enrollment,
                           max_sites) -> "SiteSelectionInstance":
        """Default uncertain sets: all fixed and variable costs (plus budget)."""
        n = len(sites)
        return SiteSelectionInstance(
            tuple(units), tuple(sites), probabilities, budget, min_enrollment,
            max_sites, tuple(range(n)), tuple(range(n)),
        )


# -- model builders -------------------------------------------------------------


def _base_model(instance: SiteSelectionInstance, name: str,
                exact_assignment: bool):
    util = instance.utilization
    u = util.u
    m = Model(name)
    x_ids = {}
    y_ids = {}
    for j, site in enumerate(instance.sites):
        y_ids[j] = m.add_variable(f"y_{site.id}", "binary")
    for i, unit in enumerate(instance.units):
        for j, site in enumerate(instance.sites):
            x_ids[(i, j)] = m.add_variable(f"x_{unit.id}_{site.id}", "binary")
    m.set_objective(
        "max",
        [(x_ids[(i, j)], u[i, j])
         for i in range(len(instance.units))
         for j in range(len(instance.sites))],
    )
    budget_terms = [(y_ids[j], site.fixed_cost)
                    for j, site in enumerate(instance.sites)]
    budget_terms += [
        (x_ids[(i, j)], site.variable_cost * u[i, j])
        for i in range(len(instance.units))
        for j, site in enumerate(instance.sites)
    ]
    m.add_constraint(budget_terms, "<=", instance.budget, label="budget")
    for j, site in enumerate(instance.sites):
        terms = [(x_ids[(i, j)], u[i, j]) for i in range(len(instance.units))]
        terms.append((y_ids[j], -instance.min_enrollment))
        m.add_constraint(terms, ">=", 0.0, label=f"enroll_{site.id}")
    sense = "=" if exact_assignment else ">="
    for i, unit in enumerate(instance.units):
        m.add_constraint(
            [(x_ids[(i, j)], 1.0) for j in range(len(instance.sites))],
            sense, 1.0, label=f"assign_{unit.id}",
        )
    m.add_constraint(
        [(y_ids[j], 1.0) for j in range(len(instance.sites))],
        "<=", float(instance.max_sites), label="cardinality",
    )
    # linking keeps the enrollment floor honest: without it an assignment to a
    # closed site would dodge the floor entirely
    for i, unit in enumerate(instance.units):
        for j, site in enumerate(instance.sites):
            m.add_constraint(
                [(x_ids[(i, j)], 1.0), (y_ids[j], -1.0)], "<=", 0.0,
                label=f"link_{unit.id}_{site.id}",
            )
    return m, x_ids, y_ids, u


def build_nominal(instance: SiteSelectionInstance,
                  exact_assignment: bool = False) -> Model:
    """Nominal site-selection model: maximize total expected utilization.

    ``exact_assignment`` switches the per-unit cover rows from ``>= 1`` (as
    printed) to ``== 1`` (one and only one site per unit).
    """
    m, _, _, _ = _base_model(instance, "sitesel_nominal", exact_assignment)
    return m.finalize()


def build_irc(instance: SiteSelectionInstance, epsilon: float, delta: float,
              exact_assignment: bool = False) -> Model:
    """Nominal model plus the bounded-uncertainty robust budget row.

    The robust row keeps the nominal fixed-cost terms, adds
    ``eps * f_j * s_j`` for sites with uncertain fixed cost (with sandwich
    links ``-s_j <= y_j <= s_j``), inflates uncertain variable costs to
    ``(1 + eps) * v_j`` and uses the worst-case budget
    ``(1 - eps + delta) * C``.
    """
    if epsilon < 0 or delta < 0:
        raise InstanceError("epsilon and delta must be nonnegative")
    m, x_ids, y_ids, u = _base_model(instance, "sitesel_irc", exact_assignment)
    in_k = set(instance.uncertain_variable)
    terms = [(y_ids[j], site.fixed_cost) for j, site in enumerate(instance.sites)]
    for j, site in enumerate(instance.sites):
        inflate = (1.0 + epsilon) if j in in_k else 1.0
        for i in range(len(instance.units)):
            terms.append((x_ids[(i, j)], inflate * site.variable_cost * u[i, j]))
    for j in instance.uncertain_fixed:
        site = instance.sites[j]
        s = m.add_variable(f"s_{site.id}", "continuous", 0.0)
        terms.append((s, epsilon * abs(site.fixed_cost)))
        m.add_constraint([(y_ids[j], 1.0), (s, -1.0)], "<=", 0.0,
                         label=f"budget__irc_lnk_{site.id}_up")
        m.add_constraint([(y_ids[j], -1.0), (s, -1.0)], "<=", 0.0,
                         label=f"budget__irc_lnk_{site.id}_lo")
    m.add_constraint(terms, "<=", (1.0 - epsilon + delta) * instance.budget,
                     label="budget__irc")
    return m.finalize()


def build_rc(instance: SiteSelectionInstance, epsilon: float, delta: float,
             kappa: float, exact_assignment: bool = False) -> Model:
    """Nominal model plus the reliability-level robust budget row.

    Uncertain fixed costs get the linear protection ``eps * f_j * l_j`` and a
    free cone auxiliary ``z_j`` linked by ``-l_j <= y_j - z_j <= l_j``;
    uncertain variable costs enter the radical through one per-site auxiliary
    pinned to the site's expected enrollment (scaled by the column total), as
    the formulation carries no linear protection for that block.  The radical
    constant is the squared budget and the right-hand side is
    ``(1 + delta) * C`` with the cone weighted by ``eps * omega``.
    """
    if epsilon < 0 or delta < 0:
        raise InstanceError("epsilon and delta must be nonnegative")
    omega = omega_from_kappa(kappa)
    m, x_ids, y_ids, u = _base_model(instance, "sitesel_rc", exact_assignment)
    terms = [(y_ids[j], site.fixed_cost) for j, site in enumerate(instance.sites)]
    terms += [
        (x_ids[(i, j)], site.variable_cost * u[i, j])
        for i in range(len(instance.units))
        for j, site in enumerate(instance.sites)
    ]
    cone_components = []
    for j in instance.uncertain_fixed:
        site = instance.sites[j]
        l = m.add_variable(f"l_{site.id}", "continuous", 0.0)
        z = m.add_variable(f"z_{site.id}", "continuous", -math.inf, math.inf)
        terms.append((l, epsilon * abs(site.fixed_cost)))
        cone_components.append((z, site.fixed_cost))
        m.add_constraint([(y_ids[j], 1.0), (z, -1.0), (l, -1.0)], "<=", 0.0,
                         label=f"budget__rc_lnk_{site.id}_up")
        m.add_constraint([(y_ids[j], -1.0), (z, 1.0), (l, -1.0)], "<=", 0.0,
                         label=f"budget__rc_lnk_{site.id}_lo")
    col_totals = u.sum(axis=0)
    for j in instance.uncertain_variable:
        site = instance.sites[j]
        if col_totals[j] <= 0.0:
            continue  # zero expected enrollment: the block contributes nothing
        zx = m.add_variable(f"zv_{site.id}", "continuous", -math.inf, math.inf)
        cone_components.append((zx, site.variable_cost * col_totals[j]))
        link = [(x_ids[(i, j)], u[i, j]) for i in range(len(instance.units))]
        link.append((zx, -col_totals[j]))
        m.add_constraint(link, "=", 0.0, label=f"budget__rc_lnk_{site.id}_v")
    cone = ConeTerm.from_components(
        epsilon * omega, cone_components, instance.budget ** 2
    )
    m.add_constraint(terms, "<=", (1.0 + delta) * instance.budget,
                     label="budget__rc", cone=cone)
    return m.finalize()


def budget_uncertain_set(instance: SiteSelectionInstance, model: Model
                         ) -> UncertainSet:
    """Uncertain entries on the budget row of a built model.

    Gives the mechanical counterpart transformations the same uncertainty the
    dedicated builders encode: fixed costs for sites in the uncertain-fixed
    set, per-assignment variable-cost coefficients for the uncertain-variable
    set, and the budget itself on the right-hand side.
    """
    budget = model.constraint_by_label("budget")
    uset = UncertainSet()
    for j in instance.uncertain_fixed:
        var = model.variable_by_name(f"y_{instance.sites[j].id}")
        uset.add(budget.id, var.id, Bounded())
    u = instance.utilization.u
    for j in instance.uncertain_variable:
        for i, unit in enumerate(instance.units):
            if u[i, j] == 0.0:
                continue  # zero coefficient carries no deviation
            var = model.variable_by_name(f"x_{unit.id}_{instance.sites[j].id}")
            uset.add(budget.id, var.id, Bounded())
    uset.add(budget.id, RHS, Bounded())
    return uset


# -- instance files ---------------------------------------------------------------
#
# A directory with:
#   units.csv   id,name,population
#   sites.csv   id,name,fixed_cost,variable_cost
#   prob.csv    header `id,<site ids...>`; one row per unit
#   config.txt  budget= / min_enrollment= / max_sites= /
#               uncertain_fixed= / uncertain_variable=  (site-id lists or `all`)


def _read_csv(path: Path, expected: list[str]):
    if not path.exists():
        raise InstanceError(f"missing instance file {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InstanceError(f"{path.name}: empty file") from None
        header = [h.strip() for h in header]
        if header != expected:
            raise InstanceError(
                f"{path.name}: expected header {','.join(expected)}, "
                f"got {','.join(header)}"
            )
        return [row for row in reader if any(cell.strip() for cell in row)]


def _float(path_name: str, row_id: str, field_name: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise InstanceError(
            f"{path_name}: {field_name} for {row_id!r} is not a number: {raw!r}"
        ) from None


def load_instance(path) -> SiteSelectionInstance:
    """Load and validate a site-selection instance directory."""
    root = Path(path)
    if not root.is_dir():
        raise InstanceError(f"instance directory {root} does not exist")

    units = []
    for row in _read_csv(root / "units.csv", ["id", "name", "population"]):
        if len(row) != 3:
            raise InstanceError(f"units.csv: malformed row {row}")
        uid, name, pop = (c.strip() for c in row)
        units.append(PopulationUnit(uid, name, _float("units.csv", uid, "population", pop)))

    sites = []
    for row in _read_csv(root / "sites.csv", ["id", "name", "fixed_cost", "variable_cost"]):
        if len(row) != 4:
            raise InstanceError(f"sites.csv: malformed row {row}")
        sid, name, f, v = (c.strip() for c in row)
        sites.append(SiteCandidate(
            sid, name,
            _float("sites.csv", sid, "fixed_cost", f),
            _float("sites.csv", sid, "variable_cost", v),
        ))
    site_index = {s.id: j for j, s in enumerate(sites)}
    unit_index = {u.id: i for i, u in enumerate(units)}

    prob_path = root / "prob.csv"
    if not prob_path.exists():
        raise InstanceError(f"missing instance file {prob_path}")
    with prob_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if not header or header[0] != "id" or header[1:] != [s.id for s in sites]:
            raise InstanceError(
                "prob.csv: header must be 'id' followed by the site ids in order"
            )
        p = np.zeros((len(units), len(sites)))
        seen = set()
        for row in reader:
            if not any(cell.strip() for cell in row):
                continue
            uid = row[0].strip()
            if uid not in unit_index:
                raise InstanceError(f"prob.csv: unknown unit id {uid!r}")
            if uid in seen:
                raise InstanceError(f"prob.csv: duplicate row for unit {uid!r}")
            seen.add(uid)
            if len(row) != len(sites) + 1:
                raise InstanceError(f"prob.csv: row for {uid!r} has {len(row) - 1} "
                                    f"probabilities for {len(sites)} sites")
            for j, cell in enumerate(row[1:]):
                p[unit_index[uid], j] = _float("prob.csv", uid, f"p[{uid},{sites[j].id}]", cell)
        missing = [u.id for u in units if u.id not in seen]
        if missing:
            raise InstanceError(f"prob.csv: missing rows for units {missing}")

    config_path = root / "config.txt"
    if not config_path.exists():
        config_path = root / "config"
    if not config_path.exists():
        raise InstanceError(f"missing instance file {root / 'config.txt'}")
    settings = {}
    for line_no, raw in enumerate(config_path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InstanceError(f"{config_path.name}:{line_no}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key] = value

    def scalar(key, convert):
        if key not in settings:
            raise InstanceError(f"{config_path.name}: missing {key}=")
        try:
            return convert(settings[key])
        except ValueError:
            raise InstanceError(
                f"{config_path.name}: {key}={settings[key]!r} is not a number"
            ) from None

    def site_list(key):
        raw = settings.get(key, "all").strip()
        if raw == "all":
            return tuple(range(len(sites)))
        if not raw:
            return ()
        out = []
        for token in raw.split(","):
            token = token.strip()
            if token not in site_index:
                raise InstanceError(
                    f"{config_path.name}: {key} names unknown site {token!r}"
                )
            out.append(site_index[token])
        return tuple(out)

    return SiteSelectionInstance(
        units=tuple(units),
        sites=tuple(sites),
        probabilities=p,
        budget=scalar("budget", float),
        min_enrollment=scalar("min_enrollment", float),
        max_sites=scalar("max_sites", int),
        uncertain_fixed=site_list("uncertain_fixed"),
        uncertain_variable=site_list("uncertain_variable"),
    )


def write_instance(instance: SiteSelectionInstance, path) -> None:
    """Write an instance directory in the load_instance format."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "units.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "name", "population"])
        for u in instance.units:
            w.writerow([u.id, u.name, f"{u.population:g}"])
    with (root / "sites.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "name", "fixed_cost", "variable_cost"])
        for s in instance.sites:
            w.writerow([s.id, s.name, f"{s.fixed_cost:g}", f"{s.variable_cost:g}"])
    with (root / "prob.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [s.id for s in instance.sites])
        for i, u in enumerate(instance.units):
            w.writerow([u.id] + [f"{p:g}" for p in instance.probabilities[i]])
    names = [instance.sites[j].id for j in instance.uncertain_fixed]
    knames = [instance.sites[j].id for j in instance.uncertain_variable]
    (root / "config.txt").write_text(
        f"budget={instance.budget:g}\n"
        f"min_enrollment={instance.min_enrollment:g}\n"
        f"max_sites={instance.max_sites}\n"
        f"uncertain_fixed={','.join(names) if len(names) < len(instance.sites) else 'all'}\n"
        f"uncertain_variable={','.join(knames) if len(knames) < len(instance.sites) else 'all'}\n"
    )
