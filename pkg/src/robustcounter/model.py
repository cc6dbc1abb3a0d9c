"""Algebraic carrier for (mixed-integer) linear programs.

A :class:`Model` holds an ordered list of variables, an ordered list of
linear constraints (optionally augmented with a square-root cone term on
``<=`` rows), and a single linear objective.  The same carrier is used for
nominal problems and for their robust counterparts, so downstream code never
has to distinguish the two.

The module also provides evaluation of constraint residuals, conversion to a
nonnegative standard form consumed by the simplex solver, and a line-oriented
text format for persisting models.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

#: Absolute residual below which a constraint counts as satisfied.
FEASIBILITY_TOL = 1e-7
#: Distance to the nearest integer below which an integer variable is integral.
INTEGRALITY_TOL = 1e-6

VARIABLE_KINDS = ("continuous", "binary", "integer")
SENSES = ("<=", ">=", "=")

_SIG_DIGITS = 12  # significant digits preserved by the text format


class ModelError(ValueError):
    """Raised for malformed model construction or misuse of a model."""


class ParseError(ValueError):
    """Raised for malformed model text; carries 1-based line/column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Variable:
    """A decision variable; ``id`` is its stable index within the model."""

    id: int
    name: str
    kind: str
    lower: float
    upper: float

    @property
    def is_integer(self) -> bool:
        return self.kind in ("binary", "integer")


@dataclass(frozen=True)
class LinExpr:
    """A linear expression ``sum(coeff * var) + constant``.

    Terms are merged and sorted by variable id on construction, so two
    expressions built from shuffled term lists compare equal.
    """

    terms: tuple[tuple[int, float], ...]
    constant: float = 0.0

    @staticmethod
    def from_terms(terms, constant: float = 0.0) -> "LinExpr":
        merged: dict[int, float] = {}
        for var_id, coeff in terms:
            merged[var_id] = merged.get(var_id, 0.0) + float(coeff)
        ordered = tuple(sorted(merged.items()))
        return LinExpr(ordered, float(constant))

    def value(self, values) -> float:
        return self.constant + sum(c * values[v] for v, c in self.terms)

    def variables(self):
        return [v for v, _ in self.terms]


@dataclass(frozen=True)
class ConeTerm:
    """``scale * sqrt(sum((coeff*var)^2) + constant_inside)``.

    ``scale`` carries the product of the uncertainty level and the
    reliability weight; ``constant_inside`` carries the squared nominal
    right-hand side when that side is uncertain.
    """

    scale: float
    components: tuple[tuple[int, float], ...]
    constant_inside: float = 0.0

    def __post_init__(self):
        if self.scale < 0:
            raise ModelError(f"cone scale must be nonnegative, got {self.scale}")
        if self.constant_inside < 0:
            raise ModelError(
                f"cone constant must be nonnegative, got {self.constant_inside}"
            )

    @staticmethod
    def from_components(scale, components, constant_inside=0.0) -> "ConeTerm":
        merged: dict[int, float] = {}
        for var_id, coeff in components:
            merged[var_id] = merged.get(var_id, 0.0) + float(coeff)
        return ConeTerm(float(scale), tuple(sorted(merged.items())), float(constant_inside))

    def value(self, values) -> float:
        s = self.constant_inside + sum((c * values[v]) ** 2 for v, c in self.components)
        return self.scale * math.sqrt(s)


@dataclass(frozen=True)
class Constraint:
    """A single row ``lhs [+ cone] (<=|>=|=) rhs``."""

    id: int
    lhs: LinExpr
    sense: str
    rhs: float
    label: str
    cone: ConeTerm | None = None


@dataclass
class SolverStats:
    """Work counters attached to a Solution."""

    iterations: int = 0
    nodes: int = 0
    cone_cuts: int = 0
    extra: dict = field(default_factory=dict)


@dataclass
class Solution:
    """Result of a solve: certified status, variable values, objective."""

    status: str  # optimal | infeasible | unbounded | limit_reached
    values: dict[int, float]
    objective: float
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class Model:
    """Mutable builder that freezes into a shareable read-only carrier.

    Construction is single-threaded; after :meth:`finalize` the model rejects
    further mutation and may be read concurrently.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective_sense: str = "max"
        self.objective: LinExpr = LinExpr((), 0.0)
        self._by_name: dict[str, int] = {}
        self._labels: dict[str, int] = {}
        self._frozen = False

    # -- construction -----------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise ModelError("model is finalized; copy() it to modify")

    def add_variable(self, name: str, kind: str = "continuous",
                     lower: float = 0.0, upper: float = INF) -> int:
        """Append a variable and return its id (stable for the model's life).

        Binary variables have their bounds forced to [0, 1] regardless of the
        arguments.  Bound inversion (lower > upper) is rejected.
        """
        self._check_mutable()
        if not name:
            raise ModelError("variable name must be nonempty")
        if name in self._by_name:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind not in VARIABLE_KINDS:
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lower, upper = 0.0, 1.0
        lower, upper = float(lower), float(upper)
        if lower > upper:
            raise ModelError(
                f"inverted bounds for {name!r}: lower {lower} > upper {upper}"
            )
        vid = len(self.variables)
        self.variables.append(Variable(vid, name, kind, lower, upper))
        self._by_name[name] = vid
        return vid

    def _check_expr(self, expr: LinExpr):
        for var_id, _ in expr.terms:
            if not (0 <= var_id < len(self.variables)):
                raise ModelError(f"unknown variable id {var_id}")

    def add_constraint(self, lhs, sense: str, rhs: float, label: str = "",
                       cone: ConeTerm | None = None) -> int:
        """Append a constraint; duplicate terms in ``lhs`` are merged.

        ``lhs`` may be a LinExpr or an iterable of (var_id, coeff) pairs.
        A cone term is only permitted on ``<=`` rows.
        """
        self._check_mutable()
        if not isinstance(lhs, LinExpr):
            lhs = LinExpr.from_terms(lhs)
        else:
            lhs = LinExpr.from_terms(lhs.terms, lhs.constant)
        self._check_expr(lhs)
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        if cone is not None:
            if sense != "<=":
                raise ModelError("cone terms are only permitted on <= constraints")
            for var_id, _ in cone.components:
                if not (0 <= var_id < len(self.variables)):
                    raise ModelError(f"unknown variable id {var_id} in cone term")
        cid = len(self.constraints)
        if not label:
            label = f"c{cid}"
        if label in self._labels:
            raise ModelError(f"duplicate constraint label {label!r}")
        self.constraints.append(Constraint(cid, lhs, sense, float(rhs), label, cone))
        self._labels[label] = cid
        return cid

    def set_objective(self, sense: str, expr) -> None:
        self._check_mutable()
        if sense not in ("max", "min"):
            raise ModelError(f"objective sense must be max or min, got {sense!r}")
        if not isinstance(expr, LinExpr):
            expr = LinExpr.from_terms(expr)
        else:
            expr = LinExpr.from_terms(expr.terms, expr.constant)
        self._check_expr(expr)
        self.objective_sense = sense
        self.objective = expr

    def finalize(self) -> "Model":
        self._frozen = True
        return self

    def copy(self, name: str | None = None) -> "Model":
        """Unfrozen structural copy, preserving variable and constraint ids."""
        out = Model(name or self.name)
        out.variables = list(self.variables)
        out.constraints = list(self.constraints)
        out.objective_sense = self.objective_sense
        out.objective = self.objective
        out._by_name = dict(self._by_name)
        out._labels = dict(self._labels)
        return out

    # -- lookups ----------------------------------------------------------

    def variable(self, var_id: int) -> Variable:
        return self.variables[var_id]

    def variable_by_name(self, name: str) -> Variable:
        try:
            return self.variables[self._by_name[name]]
        except KeyError:
            raise ModelError(f"no variable named {name!r}") from None

    def constraint(self, con_id: int) -> Constraint:
        return self.constraints[con_id]

    def constraint_by_label(self, label: str) -> Constraint:
        try:
            return self.constraints[self._labels[label]]
        except KeyError:
            raise ModelError(f"no constraint labelled {label!r}") from None

    def has_cones(self) -> bool:
        return any(c.cone is not None for c in self.constraints)

    def has_integers(self) -> bool:
        return any(v.is_integer for v in self.variables)

    # -- evaluation -------------------------------------------------------

    def evaluate_constraint(self, values, con_id: int) -> float:
        """Signed residual of one constraint at a point.

        Returns ``lhs - rhs`` for ``<=`` rows, ``rhs - lhs`` for ``>=`` rows
        and ``|lhs - rhs|`` for equalities, where ``lhs`` includes the cone
        term.  Nonpositive means satisfied for inequalities.
        """
        con = self.constraints[con_id]
        for var_id, _ in con.lhs.terms:
            if var_id not in values:
                raise ModelError(
                    f"missing value for variable {self.variables[var_id].name!r}"
                )
        lhs = con.lhs.value(values)
        if con.cone is not None:
            for var_id, _ in con.cone.components:
                if var_id not in values:
                    raise ModelError(
                        f"missing value for variable {self.variables[var_id].name!r}"
                    )
            lhs += con.cone.value(values)
        if con.sense == "<=":
            return lhs - con.rhs
        if con.sense == ">=":
            return con.rhs - lhs
        return abs(lhs - con.rhs)

    def max_violation(self, values) -> float:
        """Largest residual over all constraints (0 when fully feasible)."""
        worst = 0.0
        for con in self.constraints:
            worst = max(worst, self.evaluate_constraint(values, con.id))
        return worst

    def objective_value(self, values) -> float:
        return self.objective.value(values)


# -- standard form ---------------------------------------------------------


@dataclass
class StandardFormLP:
    """Canonical maximization over nonnegative variables.

        maximize  c @ x + c0
        s.t.      a_ub @ x <= b_ub
                  a_eq @ x == b_eq
                  x >= 0

    ``sense`` records the source model's objective sense: for ``min`` models
    the canonical optimum is the negated model optimum.  ``restore`` maps a
    standard-form point back to model-variable values.
    """

    c: np.ndarray
    c0: float
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    integer_mask: np.ndarray
    col_var: np.ndarray
    col_scale: np.ndarray
    var_offset: np.ndarray
    sense: str

    @property
    def n_cols(self) -> int:
        return self.c.shape[0]

    def restore(self, x: np.ndarray) -> dict[int, float]:
        values = self.var_offset.copy()
        for col in range(self.n_cols):
            values[self.col_var[col]] += self.col_scale[col] * x[col]
        return {i: float(values[i]) for i in range(values.shape[0])}

    def model_objective(self, canonical: float) -> float:
        return canonical if self.sense == "max" else -canonical


def to_standard_form(model: Model, bounds: dict[int, tuple[float, float]] | None = None
                     ) -> StandardFormLP:
    """Convert a cone-free model to :class:`StandardFormLP`.

    Finite lower bounds become affine shifts, upper-bounded-only variables are
    mirrored, and doubly-free variables are split into positive and negative
    parts; finite upper bounds become extra ``<=`` rows.  ``bounds`` optionally
    overrides per-variable bounds (used by branch-and-bound nodes).

    Any feasible point of the original maps to a feasible point of the
    standard form with equal objective value, and vice versa.
    """
    if model.has_cones():
        raise ModelError("model has cone terms; standard form is cone-free")
    n_vars = len(model.variables)
    var_offset = np.zeros(n_vars)
    col_var: list[int] = []
    col_scale: list[float] = []
    ub_rows: list[tuple[dict[int, float], float]] = []  # over columns
    var_cols: list[list[int]] = [[] for _ in range(n_vars)]

    for v in model.variables:
        lo, hi = v.lower, v.upper
        if bounds is not None and v.id in bounds:
            lo, hi = bounds[v.id]
        if lo > hi:
            raise ModelError(f"inverted bounds for {v.name!r}: [{lo}, {hi}]")
        if math.isfinite(lo):
            col = len(col_var)
            col_var.append(v.id)
            col_scale.append(1.0)
            var_cols[v.id].append(col)
            var_offset[v.id] = lo
            if math.isfinite(hi):
                ub_rows.append(({col: 1.0}, hi - lo))
        elif math.isfinite(hi):
            col = len(col_var)
            col_var.append(v.id)
            col_scale.append(-1.0)
            var_cols[v.id].append(col)
            var_offset[v.id] = hi
        else:
            for scale in (1.0, -1.0):
                col = len(col_var)
                col_var.append(v.id)
                col_scale.append(scale)
                var_cols[v.id].append(col)

    n_cols = len(col_var)

    def expand(expr: LinExpr) -> tuple[np.ndarray, float]:
        row = np.zeros(n_cols)
        const = expr.constant
        for var_id, coeff in expr.terms:
            const += coeff * var_offset[var_id]
            for col in var_cols[var_id]:
                row[col] += coeff * col_scale[col]
        return row, const

    a_ub_rows, b_ub_vals = [], []
    a_eq_rows, b_eq_vals = [], []
    for cols, rhs in ub_rows:
        row = np.zeros(n_cols)
        for col, coeff in cols.items():
            row[col] = coeff
        a_ub_rows.append(row)
        b_ub_vals.append(rhs)
    for con in model.constraints:
        row, const = expand(con.lhs)
        rhs = con.rhs - const
        if con.sense == "<=":
            a_ub_rows.append(row)
            b_ub_vals.append(rhs)
        elif con.sense == ">=":
            a_ub_rows.append(-row)
            b_ub_vals.append(-rhs)
        else:
            a_eq_rows.append(row)
            b_eq_vals.append(rhs)

    obj_row, obj_const = expand(model.objective)
    if model.objective_sense == "min":
        obj_row, obj_const = -obj_row, -obj_const

    integer_mask = np.array(
        [model.variables[v].is_integer for v in col_var], dtype=bool
    )
    return StandardFormLP(
        c=obj_row,
        c0=obj_const,
        a_ub=np.array(a_ub_rows) if a_ub_rows else np.zeros((0, n_cols)),
        b_ub=np.array(b_ub_vals),
        a_eq=np.array(a_eq_rows) if a_eq_rows else np.zeros((0, n_cols)),
        b_eq=np.array(b_eq_vals),
        integer_mask=integer_mask,
        col_var=np.array(col_var, dtype=int),
        col_scale=np.array(col_scale),
        var_offset=var_offset,
        sense=model.objective_sense,
    )


# -- text format -------------------------------------------------------------
#
# UTF-8, line oriented, three sections:
#
#   #vars
#   name kind lower upper
#   #obj
#   max|min coeff*name [+ coeff*name ...] [+ constant]
#   #cons
#   label: coeff*name [+ ...] [+ CONE(scale; coeff*name,...; const)] <=|>=|= rhs
#
# Numbers are decimal or scientific; infinities are spelled inf / -inf.


def _fmt(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return f"{x:.{_SIG_DIGITS}g}"


def _fmt_expr(model: Model, expr: LinExpr) -> str:
    parts = [f"{_fmt(c)}*{model.variables[v].name}" for v, c in expr.terms]
    if expr.constant != 0.0 or not parts:
        parts.append(_fmt(expr.constant))
    return " + ".join(parts)


def _fmt_cone(model: Model, cone: ConeTerm) -> str:
    comps = ", ".join(
        f"{_fmt(c)}*{model.variables[v].name}" for v, c in cone.components
    )
    return f"CONE({_fmt(cone.scale)}; {comps}; {_fmt(cone.constant_inside)})"


def export_text(model: Model) -> str:
    """Serialize a model; :func:`import_text` inverts this to 12 significant digits."""
    lines = ["#vars"]
    for v in model.variables:
        lines.append(f"{v.name} {v.kind} {_fmt(v.lower)} {_fmt(v.upper)}")
    lines.append("#obj")
    lines.append(f"{model.objective_sense} {_fmt_expr(model, model.objective)}")
    lines.append("#cons")
    for con in model.constraints:
        body = _fmt_expr(model, con.lhs)
        if con.cone is not None:
            body += " + " + _fmt_cone(model, con.cone)
        lines.append(f"{con.label}: {body} {con.sense} {_fmt(con.rhs)}")
    return "\n".join(lines) + "\n"


_NUMBER_RE = re.compile(
    r"[+-]?(?:inf\b|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
)
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _LineScanner:
    """Tokenizer for one expression line, tracking 1-based columns."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str):
        raise ParseError(message, self.line_no, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self, literal: str) -> bool:
        self.skip_ws()
        return self.text.startswith(literal, self.pos)

    def accept(self, literal: str) -> bool:
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.accept(literal):
            self.error(f"expected {literal!r}")

    def number(self) -> float:
        self.skip_ws()
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return float(m.group(0))

    def name(self) -> str:
        self.skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            self.error("expected a name")
        self.pos = m.end()
        return m.group(0)


def _parse_term(sc: _LineScanner, model: Model):
    """One `coeff*name` or bare-constant term -> (var_id | None, value)."""
    coeff = sc.number()
    if sc.accept("*"):
        name = sc.name()
        try:
            var = model.variable_by_name(name)
        except ModelError:
            sc.error(f"unknown variable {name!r}")
        return var.id, coeff
    return None, coeff


def _parse_expr(sc: _LineScanner, model: Model, allow_cone: bool):
    terms: list[tuple[int, float]] = []
    constant = 0.0
    cone = None
    while True:
        if allow_cone and sc.peek("CONE("):
            if cone is not None:
                sc.error("multiple CONE terms in one constraint")
            sc.expect("CONE(")
            scale = sc.number()
            sc.expect(";")
            comps = []
            while not sc.peek(";"):
                var_id, coeff = _parse_term(sc, model)
                if var_id is None:
                    sc.error("cone components must be coeff*name")
                comps.append((var_id, coeff))
                if not sc.accept(","):
                    break
            sc.expect(";")
            const_inside = sc.number()
            sc.expect(")")
            try:
                cone = ConeTerm.from_components(scale, comps, const_inside)
            except ModelError as exc:
                sc.error(str(exc))
        else:
            var_id, value = _parse_term(sc, model)
            if var_id is None:
                constant += value
            else:
                terms.append((var_id, value))
        if not sc.accept("+"):
            break
    return LinExpr.from_terms(terms, constant), cone


def import_text(text: str) -> Model:
    """Parse the text format back into a finalized model.

    Raises :class:`ParseError` with line/column on malformed input.
    """
    model = Model()
    section = None
    saw = {"#vars": False, "#obj": False, "#cons": False}
    have_objective = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if line in saw:
            section = line
            saw[line] = True
            continue
        if section == "#vars":
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("expected 'name kind lower upper'", line_no, 1)
            name, kind, lo_s, hi_s = parts
            try:
                lo, hi = float(lo_s), float(hi_s)
            except ValueError:
                raise ParseError("malformed bound", line_no, len(name) + len(kind) + 3)
            try:
                model.add_variable(name, kind, lo, hi)
            except ModelError as exc:
                raise ParseError(str(exc), line_no, 1)
        elif section == "#obj":
            sc = _LineScanner(raw, line_no)
            sc.skip_ws()
            if sc.accept("max"):
                sense = "max"
            elif sc.accept("min"):
                sense = "min"
            else:
                sc.error("objective must start with max or min")
            expr, _ = _parse_expr(sc, model, allow_cone=False)
            if not sc.at_end():
                sc.error("trailing content after objective")
            model.set_objective(sense, expr)
            have_objective = True
        elif section == "#cons":
            sc = _LineScanner(raw, line_no)
            label = sc.name()
            sc.expect(":")
            expr, cone = _parse_expr(sc, model, allow_cone=True)
            for sense in ("<=", ">=", "="):
                if sc.accept(sense):
                    break
            else:
                sc.error("expected <=, >= or =")
            rhs = sc.number()
            if not sc.at_end():
                sc.error("trailing content after constraint")
            try:
                model.add_constraint(expr, sense, rhs, label=label, cone=cone)
            except ModelError as exc:
                raise ParseError(str(exc), line_no, 1)
        else:
            raise ParseError("content before any section header", line_no, 1)
    missing = [k for k, present in saw.items() if not present]
    if missing:
        raise ParseError(
            f"truncated document: missing section(s) {', '.join(missing)}",
            len(text.splitlines()) + 1, 1,
        )
    if not have_objective:
        raise ParseError("missing objective line", len(text.splitlines()) + 1, 1)
    return model.finalize()
