"""Distribution tags for uncertain coefficients and scalar deviation machinery.

Uncertain data enters a model as per-constraint entries: a coefficient (or
the right-hand side) of one constraint is tagged with a distribution.  This
module holds those tags plus the scalar conversions used by the robust
counterparts:

* ``omega_from_kappa`` -- the reliability weight from ``kappa = exp(-omega^2/2)``
* ``normal_lambda``    -- the standard-normal quantile at ``1 - kappa``
* ``discrete_deviation`` -- smallest ``t`` with ``P(X > t) <= kappa`` for
  Poisson / binomial / general discrete tags

All operations are pure functions and safe to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtri

from .model import Model, ModelError

__all__ = [
    "RHS",
    "Bounded",
    "BoundedRange",
    "Normal",
    "Uniform",
    "Poisson",
    "Binomial",
    "Discrete",
    "RobustConfig",
    "UncertainEntry",
    "UncertainSet",
    "omega_from_kappa",
    "normal_lambda",
    "discrete_deviation",
    "bounded_interval",
    "deviation_radius",
    "parse_annotations",
    "format_annotations",
]


class _RhsMarker:
    """Singleton target marking an uncertain right-hand side."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "RHS"


RHS = _RhsMarker()


# -- distribution tags --------------------------------------------------------


@dataclass(frozen=True)
class Bounded:
    """Interval of relative half-width epsilon around the nominal value.

    ``epsilon=None`` defers to the global uncertainty level of the run.
    """

    epsilon: float | None = None

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("bounded half-width must be nonnegative")


@dataclass(frozen=True)
class BoundedRange:
    """Explicit interval [low, high] for the realized value."""

    low: float
    high: float

    def __post_init__(self):
        if self.low > self.high:
            raise ValueError(f"empty range [{self.low}, {self.high}]")


@dataclass(frozen=True)
class Normal:
    mean: float
    std: float

    def __post_init__(self):
        if self.std <= 0:
            raise ValueError("normal std must be positive")


@dataclass(frozen=True)
class Uniform:
    """Symmetric perturbation uniform on [-1, 1], scaled by the global level."""


@dataclass(frozen=True)
class Poisson:
    mean: float

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("poisson mean must be positive")


@dataclass(frozen=True)
class Binomial:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("binomial n must be nonnegative")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("binomial p must lie in [0, 1]")


@dataclass(frozen=True)
class Discrete:
    """Finite support with probabilities summing to 1 (within 1e-9)."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("discrete support and probabilities must match")
        if any(p < 0 for p in self.probs):
            raise ValueError("discrete probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("discrete probabilities must sum to 1")


Distribution = (Bounded, BoundedRange, Normal, Uniform, Poisson, Binomial, Discrete)


@dataclass(frozen=True)
class RobustConfig:
    """The (epsilon, delta, kappa) triple shared by the robust counterparts.

    epsilon: level of uncertainty (relative deviation bound)
    delta:   infeasibility tolerance, scaled by max{1, |rhs|} per row
    kappa:   reliability level in (0, 1]; kappa = 1 degenerates gracefully
             (zero reliability weight), kappa = 0 is rejected.
    """

    epsilon: float = 0.0
    delta: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")

    @property
    def omega(self) -> float:
        return omega_from_kappa(self.kappa)


@dataclass(frozen=True)
class UncertainEntry:
    constraint_id: int
    target: object  # variable id or RHS
    distribution: object

    @property
    def is_rhs(self) -> bool:
        return self.target is RHS


class UncertainSet:
    """Per-constraint index sets of uncertain coefficients plus uncertain RHS.

    Entries are (constraint id, variable id or RHS, distribution) triples;
    duplicates are rejected.  ``validate`` checks every reference against a
    companion model.
    """

    def __init__(self, entries=()):
        self.entries: list[UncertainEntry] = []
        self._seen: set[tuple[int, object]] = set()
        for entry in entries:
            if isinstance(entry, UncertainEntry):
                self._append(entry)
            else:
                self.add(*entry)

    def _append(self, entry: UncertainEntry):
        key = (entry.constraint_id, entry.target)
        if key in self._seen:
            raise ValueError(
                f"duplicate uncertain entry for constraint {entry.constraint_id}, "
                f"target {entry.target!r}"
            )
        self._seen.add(key)
        self.entries.append(entry)

    def add(self, constraint_id: int, target, distribution) -> "UncertainSet":
        if not isinstance(distribution, Distribution):
            raise ValueError(f"unsupported distribution {distribution!r}")
        self._append(UncertainEntry(constraint_id, target, distribution))
        return self

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_constraint(self) -> dict[int, list[UncertainEntry]]:
        grouped: dict[int, list[UncertainEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.constraint_id, []).append(entry)
        return grouped

    def validate(self, model: Model) -> None:
        for entry in self.entries:
            if not 0 <= entry.constraint_id < len(model.constraints):
                raise ValueError(f"unknown constraint id {entry.constraint_id}")
            if entry.is_rhs:
                continue
            con = model.constraints[entry.constraint_id]
            coeffs = dict(con.lhs.terms)
            if entry.target not in coeffs:
                name = (model.variables[entry.target].name
                        if 0 <= entry.target < len(model.variables)
                        else repr(entry.target))
                raise ValueError(
                    f"constraint {con.label!r} has no term for variable {name}"
                )


# -- scalar deviation machinery ------------------------------------------------


def omega_from_kappa(kappa: float) -> float:
    """Reliability weight: inverts kappa = exp(-omega^2 / 2).

    Strictly decreasing in kappa; omega_from_kappa(1) == 0.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    return math.sqrt(-2.0 * math.log(kappa))


def normal_lambda(kappa: float) -> float:
    """Standard-normal quantile at 1 - kappa (the deviation factor).

    Antisymmetric around kappa = 1/2: normal_lambda(k) == -normal_lambda(1-k).
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    return float(ndtri(1.0 - kappa))


def _poisson_tail_iter(mean: float):
    """Yields (t, P(X > t)) for t = 0, 1, ... via the multiplicative recurrence."""
    term = math.exp(-mean)
    cdf = term
    t = 0
    while True:
        yield t, 1.0 - cdf
        t += 1
        term *= mean / t
        cdf += term


def _binomial_tail_iter(n: int, p: float):
    if p == 0.0:
        yield 0, 0.0
        return
    if p == 1.0:
        for t in range(n):
            yield t, 1.0
        yield n, 0.0
        return
    q = 1.0 - p
    term = q ** n
    cdf = term
    for t in range(n + 1):
        if t > 0:
            term *= (n - t + 1) / t * (p / q)
            cdf += term
        yield t, 1.0 - cdf


def discrete_deviation(distribution, kappa: float):
    """Smallest value t with P(X > t) <= kappa under the tagged distribution.

    The tail convention is strict: the returned t satisfies P(X > t) <= kappa
    while P(X > t - 1) > kappa (t integer for Poisson/binomial; a support
    value for Discrete).  This is the convention that puts the deviation of a
    mean-5 Poisson at 6 for a 24% reliability level.  Tail sums use a stable
    multiplicative term recurrence rather than factorials.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    if isinstance(distribution, Poisson):
        for t, tail in _poisson_tail_iter(distribution.mean):
            if tail <= kappa:
                return t
            if t > distribution.mean + 50 * math.sqrt(distribution.mean) + 50:
                raise ValueError("poisson tail search failed to converge")
    if isinstance(distribution, Binomial):
        for t, tail in _binomial_tail_iter(distribution.n, distribution.p):
            if tail <= kappa:
                return t
        return distribution.n
    if isinstance(distribution, Discrete):
        order = sorted(range(len(distribution.values)),
                       key=lambda i: distribution.values[i])
        cdf = 0.0
        for i in order:
            cdf += distribution.probs[i]
            if 1.0 - cdf <= kappa + 1e-15:
                return distribution.values[i]
        return distribution.values[order[-1]]
    raise ValueError(
        f"discrete deviation undefined for {type(distribution).__name__}"
    )


def bounded_interval(nominal: float, distribution_or_epsilon) -> tuple[float, float]:
    """Realization interval for a bounded uncertain value.

    A relative level eps maps nominal a to [a - eps|a|, a + eps|a|]; an
    explicit BoundedRange is returned as given.
    """
    if not math.isfinite(nominal):
        raise ValueError("nominal value must be finite")
    if isinstance(distribution_or_epsilon, BoundedRange):
        return distribution_or_epsilon.low, distribution_or_epsilon.high
    if isinstance(distribution_or_epsilon, Bounded):
        eps = distribution_or_epsilon.epsilon
        if eps is None:
            raise ValueError("Bounded tag without epsilon needs the global level")
    else:
        eps = float(distribution_or_epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    spread = eps * abs(nominal)
    return nominal - spread, nominal + spread


def deviation_radius(nominal: float, distribution, epsilon: float,
                     kappa: float = 1.0) -> float:
    """Worst-case single-coefficient deviation radius used for conservatism
    comparisons across distribution families.

    Bounded/Uniform: epsilon * |nominal| (half the realization interval for an
    explicit range).  Normal: epsilon * normal_lambda(kappa) * std * |nominal|.
    Poisson/Binomial/Discrete: epsilon * |nominal| * discrete_deviation.
    """
    if isinstance(distribution, BoundedRange):
        return (distribution.high - distribution.low) / 2.0
    if isinstance(distribution, Bounded):
        eps = distribution.epsilon if distribution.epsilon is not None else epsilon
        return eps * abs(nominal)
    if isinstance(distribution, Uniform):
        return epsilon * abs(nominal)
    if isinstance(distribution, Normal):
        return epsilon * normal_lambda(kappa) * distribution.std * abs(nominal)
    return epsilon * abs(nominal) * discrete_deviation(distribution, kappa)


# -- annotation file format ----------------------------------------------------
#
# One entry per line: `constraint_label target(dist args)` where target is a
# variable name or `RHS`, e.g.
#
#   cost1 f_2(bounded 0.05)
#   cost1 RHS(normal 100 5)


def _parse_distribution(tag: str, args: list[str]):
    try:
        if tag == "bounded":
            return Bounded(float(args[0])) if args else Bounded()
        if tag == "range":
            return BoundedRange(float(args[0]), float(args[1]))
        if tag == "normal":
            return Normal(float(args[0]), float(args[1]))
        if tag == "uniform":
            return Uniform()
        if tag == "poisson":
            return Poisson(float(args[0]))
        if tag == "binomial":
            return Binomial(int(args[0]), float(args[1]))
        if tag == "discrete":
            vals = tuple(float(a) for a in args[0::2])
            probs = tuple(float(a) for a in args[1::2])
            return Discrete(vals, probs)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed {tag} arguments {args}: {exc}") from None
    raise ValueError(f"unknown distribution tag {tag!r}")


def parse_annotations(text: str, model: Model) -> UncertainSet:
    """Parse an annotation document against a model.

    Unknown constraint labels or variable names are rejected by name.
    """
    uset = UncertainSet()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            label, rest = line.split(None, 1)
        except ValueError:
            raise ValueError(f"annotation line {line_no}: expected 'label target(dist ...)'")
        if "(" not in rest or not rest.rstrip().endswith(")"):
            raise ValueError(f"annotation line {line_no}: expected 'target(dist args)'")
        target_name, payload = rest.split("(", 1)
        target_name = target_name.strip()
        payload = payload.rstrip().rstrip(")")
        parts = payload.split()
        if not parts:
            raise ValueError(f"annotation line {line_no}: empty distribution")
        dist = _parse_distribution(parts[0], parts[1:])
        try:
            con = model.constraint_by_label(label)
        except ModelError:
            raise ValueError(
                f"annotation line {line_no}: unknown constraint label {label!r}"
            ) from None
        if target_name == "RHS":
            target = RHS
        else:
            try:
                target = model.variable_by_name(target_name).id
            except ModelError:
                raise ValueError(
                    f"annotation line {line_no}: unknown variable {target_name!r}"
                ) from None
        uset.add(con.id, target, dist)
    uset.validate(model)
    return uset


def _format_distribution(dist) -> str:
    if isinstance(dist, Bounded):
        return "bounded" if dist.epsilon is None else f"bounded {dist.epsilon:g}"
    if isinstance(dist, BoundedRange):
        return f"range {dist.low:g} {dist.high:g}"
    if isinstance(dist, Normal):
        return f"normal {dist.mean:g} {dist.std:g}"
    if isinstance(dist, Uniform):
        return "uniform"
    if isinstance(dist, Poisson):
        return f"poisson {dist.mean:g}"
    if isinstance(dist, Binomial):
        return f"binomial {dist.n} {dist.p:g}"
    if isinstance(dist, Discrete):
        pairs = " ".join(f"{v:g} {p:g}" for v, p in zip(dist.values, dist.probs))
        return f"discrete {pairs}"
    raise ValueError(f"unsupported distribution {dist!r}")


def format_annotations(uset: UncertainSet, model: Model) -> str:
    lines = []
    for entry in uset:
        label = model.constraints[entry.constraint_id].label
        target = "RHS" if entry.is_rhs else model.variables[entry.target].name
        lines.append(f"{label} {target}({_format_distribution(entry.distribution)})")
    return "\n".join(lines) + ("\n" if lines else "")
