"""Constraint generation for (function class, algorithm, metric) scenarios.

For each supported algorithm this module produces the exact polynomial
inequalities/equalities that one step of the algorithm on a member
function necessarily satisfies, applies the variable eliminations that
shrink the problem (optimal gradient is zero, constant-step updates),
and bundles everything into a solver-ready `RateProblem`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .polyform import (
    StructuredPolynomial,
    VarCatalog,
    as_fraction,
    combine,
    substitute_vector,
)


class ScenarioError(ValueError):
    """Raised for inadmissible parameters or incompatible scenario pieces."""


GD_KINDS = ("gd_constant", "gd_els", "gd_armijo", "gd_goldstein", "gd_wolfe")
PGM_KINDS = ("pgm_constant", "pgm_els")
ALL_KINDS = GD_KINDS + PGM_KINDS

METRICS = ("objective_accuracy", "distance_squared", "gradient_norm_squared")

# Table of (kind -> the single compatible performance metric).
METRIC_FOR_KIND = {
    "gd_constant": "distance_squared",
    "gd_els": "objective_accuracy",
    "gd_armijo": "objective_accuracy",
    "gd_goldstein": "objective_accuracy",
    "gd_wolfe": "objective_accuracy",
    "pgm_constant": "gradient_norm_squared",
    "pgm_els": "objective_accuracy",
}


@dataclass(frozen=True)
class FunctionClass:
    """Smoothness/strong-convexity parameters, optionally composite.

    `composite` switches to objectives of the form a + b with a smooth
    and strongly convex and b closed proper convex.
    """

    mu: Fraction
    L: Fraction
    composite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", as_fraction(self.mu))
        object.__setattr__(self, "L", as_fraction(self.L))
        if not (0 <= self.mu < self.L):
            raise ScenarioError(f"need 0 <= mu < L, got mu={self.mu}, L={self.L}")

    @property
    def alpha(self) -> Fraction:
        """Interpolation weight 1 / (2 (1 - mu/L))."""
        return 1 / (2 * (1 - self.mu / self.L))

    @property
    def kappa(self) -> Fraction:
        if self.mu == 0:
            raise ScenarioError("condition number is undefined for mu = 0")
        return self.L / self.mu


@dataclass(frozen=True)
class AlgorithmSpec:
    """One algorithm kind plus its parameters (exact rationals).

    Parameter admissibility is checked against the hypotheses under
    which the corresponding contraction factor is known to hold; the
    checks are strict, boundary values are rejected.
    """

    kind: str
    gamma: Fraction | None = None
    epsilon: Fraction | None = None
    eta: Fraction | None = None
    delta: Fraction = Fraction(0)
    c1: Fraction | None = None
    c2: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ScenarioError(f"unknown algorithm kind {self.kind!r}; choose from {ALL_KINDS}")
        for name in ("gamma", "epsilon", "eta", "c1", "c2"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, as_fraction(val))
        object.__setattr__(self, "delta", as_fraction(self.delta))

    def validate(self, fclass: FunctionClass) -> None:
        """Check the hypotheses under which the scenario's contraction
        factor holds; raise ScenarioError naming the violated one."""
        mu, L = fclass.mu, fclass.L
        if mu == 0:
            raise ScenarioError(
                f"{self.kind}: contraction factor degenerates to 1 at mu = 0; need mu > 0"
            )
        if self.kind in ("gd_constant", "pgm_constant"):
            if self.gamma is None or not (0 < self.gamma < 2 / L):
                raise ScenarioError(f"{self.kind}: need step size 0 < gamma < 2/L, got {self.gamma}")
        elif self.kind == "gd_armijo":
            if not (0 <= self.delta < 1):
                raise ScenarioError(f"gd_armijo: need noise level delta in [0, 1), got {self.delta}")
            bound = (1 - self.delta) / (1 + self.delta) ** 2
            if self.epsilon is None or not (0 < self.epsilon < bound):
                raise ScenarioError(
                    f"gd_armijo: need epsilon in (0, (1-delta)/(1+delta)^2) = (0, {bound}), got {self.epsilon}"
                )
            if self.eta is None or not self.eta > 1:
                raise ScenarioError(f"gd_armijo: need backtracking factor eta > 1, got {self.eta}")
        elif self.kind == "gd_goldstein":
            # delta < sqrt(5) - 2, checked exactly as (delta+2)^2 < 5
            if not (0 <= self.delta and (self.delta + 2) ** 2 < 5):
                raise ScenarioError(
                    f"gd_goldstein: need noise level delta in [0, sqrt(5)-2), got {self.delta}"
                )
            lo = 1 - (1 - self.delta) / (1 + self.delta) ** 2
            if self.epsilon is None or not (lo < self.epsilon < Fraction(1, 2)):
                raise ScenarioError(
                    f"gd_goldstein: need epsilon in (1-(1-delta)/(1+delta)^2, 1/2) = ({lo}, 1/2), got {self.epsilon}"
                )
        elif self.kind == "gd_wolfe":
            if self.c1 is None or self.c2 is None or not (0 < self.c1 < self.c2 < 1):
                raise ScenarioError(f"gd_wolfe: need 0 < c1 < c2 < 1, got c1={self.c1}, c2={self.c2}")
        # gd_els and pgm_els have no parameters beyond the class

    def suff_decrease_coefficient(self, fclass: FunctionClass) -> Fraction:
        """Coefficient c in the derived inequality f_k - f_{k+1} - c*||g_k||^2 >= 0
        for the inexact line-search rules."""
        L, d = fclass.L, self.delta
        if self.kind == "gd_armijo":
            eps, eta = self.epsilon, self.eta
            return 2 * eps * (1 - d) ** 2 / (eta * L) * ((1 - d) / (1 + d) ** 2 - eps)
        if self.kind == "gd_goldstein":
            eps = self.epsilon
            return 2 * eps * (1 - d) ** 2 / L * ((1 - d) / (1 + d) ** 2 - (1 - eps))
        if self.kind == "gd_wolfe":
            return self.c1 * (1 - self.c2) / L
        raise ScenarioError(f"{self.kind} has no sufficient-decrease inequality")


@dataclass(frozen=True)
class Metric:
    kind: str

    def __post_init__(self):
        if self.kind not in METRICS:
            raise ScenarioError(f"unknown metric {self.kind!r}; choose from {METRICS}")


@dataclass(frozen=True)
class RateProblem:
    """Everything a certificate search needs for one scenario.

    metric_pair = (m_k, m_{k+1}); the target polynomial for factor t is
    t*m_k - m_{k+1}.  Inequalities h_i are nonnegative and equalities
    v_j vanish on every run of the algorithm on a member function.
    """

    scenario_key: str
    catalog: VarCatalog
    metric_pair: tuple[StructuredPolynomial, StructuredPolynomial]
    inequalities: tuple[tuple[str, StructuredPolynomial], ...]
    equalities: tuple[tuple[str, StructuredPolynomial], ...]
    fclass: FunctionClass
    alg: AlgorithmSpec
    metric: Metric

    def target(self, t) -> StructuredPolynomial:
        """t*m_k - m_{k+1} for a concrete rational factor t."""
        m_k, m_k1 = self.metric_pair
        return combine([(as_fraction(t), m_k), (Fraction(-1), m_k1)])


# -- interpolability constraint builders ---------------------------------------

PAIR_ORDER = (("k", "k1"), ("k", "star"), ("k1", "k"), ("k1", "star"), ("star", "k"), ("star", "k1"))


def interpolability(
    fclass: FunctionClass,
    point_labels: Sequence[str] = ("k", "k1", "star"),
    *,
    catalog: VarCatalog | None = None,
    value_prefix: str = "f",
    grad_prefix: str = "g",
) -> list[StructuredPolynomial]:
    """Necessary-and-sufficient data constraints for the smooth strongly
    convex class, one polynomial per ordered label pair (i, j):

        f_i - f_j - <g_j, x_i - x_j>
          - alpha*( (1/L)||g_i - g_j||^2 + mu*||x_i - x_j||^2
                    - 2*(mu/L)*<g_j - g_i, x_j - x_i> )  >=  0

    For three labels this is exactly six constraints, ordered row-major
    in (i, j).
    """
    if len(point_labels) < 2:
        raise ScenarioError("interpolability needs at least two point labels")
    if fclass.mu >= fclass.L:
        raise ScenarioError("interpolability requires mu < L")
    if catalog is None:
        catalog = VarCatalog(
            tuple(f"{value_prefix}_{a}" for a in point_labels),
            tuple(f"x_{a}" for a in point_labels) + tuple(f"{grad_prefix}_{a}" for a in point_labels),
        )
    alpha, mu, L = fclass.alpha, fclass.mu, fclass.L
    out = []
    for i in point_labels:
        for j in point_labels:
            if i == j:
                continue
            f_i, f_j = f"{value_prefix}_{i}", f"{value_prefix}_{j}"
            dx = {f"x_{i}": 1, f"x_{j}": -1}
            dg = {f"{grad_prefix}_{i}": 1, f"{grad_prefix}_{j}": -1}
            g_j = {f"{grad_prefix}_{j}": 1}
            poly = combine(
                [
                    (1, StructuredPolynomial.scalar(catalog, f_i)),
                    (-1, StructuredPolynomial.scalar(catalog, f_j)),
                    (-1, StructuredPolynomial.inner(catalog, g_j, dx)),
                    (-alpha / L, StructuredPolynomial.sq_norm(catalog, dg)),
                    (-alpha * mu, StructuredPolynomial.sq_norm(catalog, dx)),
                    # <g_j - g_i, x_j - x_i> == <g_i - g_j, x_i - x_j>
                    (2 * alpha * mu / L, StructuredPolynomial.inner(catalog, dg, dx)),
                ]
            )
            out.append(poly)
    return out


def convex_interpolability(
    point_labels: Sequence[str],
    subgradient_symbols: Mapping[str, str],
    *,
    catalog: VarCatalog,
    value_prefix: str = "b",
) -> list[StructuredPolynomial]:
    """Subgradient inequalities b_i - b_j - <s_j, x_i - x_j> >= 0 for all
    ordered pairs, where `subgradient_symbols` picks the symbol playing
    s at each label (this is how the prox-induced subgradient gets
    attached to the k+1 point)."""
    if set(subgradient_symbols) != set(point_labels):
        raise ScenarioError("need exactly one subgradient symbol per label")
    out = []
    for i in point_labels:
        for j in point_labels:
            if i == j:
                continue
            dx = {f"x_{i}": 1, f"x_{j}": -1}
            s_j = {subgradient_symbols[j]: 1}
            poly = combine(
                [
                    (1, StructuredPolynomial.scalar(catalog, f"{value_prefix}_{i}")),
                    (-1, StructuredPolynomial.scalar(catalog, f"{value_prefix}_{j}")),
                    (-1, StructuredPolynomial.inner(catalog, s_j, dx)),
                ]
            )
            out.append(poly)
    return out


# -- algorithm constraints ------------------------------------------------------

GD_FULL_CATALOG = VarCatalog(
    ("f_star", "f_k", "f_k1"),
    ("x_star", "x_k", "x_k1", "g_star", "g_k", "g_k1"),
)

PGM_FULL_CATALOG = VarCatalog(
    ("a_star", "a_k", "a_k1", "b_star", "b_k", "b_k1"),
    ("x_star", "x_k", "x_k1", "r_star", "r_k", "r_k1", "s_star", "s_k", "sbar_k1"),
)


@dataclass(frozen=True)
class Elimination:
    """Substitute `target` := affine combination of remaining vector symbols."""

    target: str
    replacement: tuple[tuple[str, Fraction], ...]

    def as_mapping(self) -> dict[str, Fraction]:
        return dict(self.replacement)


def algorithm_constraints(
    alg: AlgorithmSpec, fclass: FunctionClass
) -> tuple[list[StructuredPolynomial], list[StructuredPolynomial], list[Elimination]]:
    """(equalities, extra inequalities, eliminations) on the full catalog.

    Eliminations are the substitutions applied before the SDP is built:
    the optimal (sub)gradient vanishing always, plus the constant-step
    update where the step size is a known constant.
    """
    alg.validate(fclass)
    kind = alg.kind
    if kind in GD_KINDS:
        cat = GD_FULL_CATALOG
        elims = [Elimination("g_star", ())]
        if kind == "gd_constant":
            elims.append(Elimination("x_k1", (("x_k", Fraction(1)), ("g_k", -alg.gamma))))
            return [], [], elims
        if kind == "gd_els":
            v1 = StructuredPolynomial.inner(cat, {"g_k1": 1}, {"x_k1": 1, "x_k": -1})
            v2 = StructuredPolynomial.inner(cat, {"g_k1": 1}, {"g_k": 1})
            return [v1, v2], [], elims
        # inexact line-search rules: one derived sufficient-decrease inequality
        coef = alg.suff_decrease_coefficient(fclass)
        h7 = combine(
            [
                (1, StructuredPolynomial.scalar(cat, "f_k")),
                (-1, StructuredPolynomial.scalar(cat, "f_k1")),
                (-coef, StructuredPolynomial.sq_norm(cat, {"g_k": 1})),
            ]
        )
        return [], [h7], elims
    # composite kinds
    cat = PGM_FULL_CATALOG
    if kind == "pgm_constant":
        elims = [
            Elimination("x_k1", (("x_k", Fraction(1)), ("r_k", -alg.gamma), ("sbar_k1", -alg.gamma))),
            Elimination("s_star", (("r_star", Fraction(-1)),)),
        ]
        return [], [], elims
    # pgm_els: keep every symbol; three equality constraints
    full_grad_k1 = {"r_k1": 1, "sbar_k1": 1}
    search_dir = {"r_k": 1, "sbar_k1": 1}
    v1 = StructuredPolynomial.inner(cat, full_grad_k1, search_dir)
    v2 = StructuredPolynomial.inner(cat, full_grad_k1, {"x_k1": 1, "x_k": -1})
    v3 = StructuredPolynomial.sq_norm(cat, {"r_star": 1, "s_star": 1})
    return [v1, v2, v3], [], []


def _metric_pair(
    metric: Metric, alg: AlgorithmSpec, catalog_full: VarCatalog
) -> tuple[StructuredPolynomial, StructuredPolynomial]:
    cat = catalog_full
    if metric.kind == "objective_accuracy":
        if alg.kind in PGM_KINDS:
            m_k = combine(
                [
                    (1, StructuredPolynomial.scalar(cat, "a_k")),
                    (1, StructuredPolynomial.scalar(cat, "b_k")),
                    (-1, StructuredPolynomial.scalar(cat, "a_star")),
                    (-1, StructuredPolynomial.scalar(cat, "b_star")),
                ]
            )
            m_k1 = combine(
                [
                    (1, StructuredPolynomial.scalar(cat, "a_k1")),
                    (1, StructuredPolynomial.scalar(cat, "b_k1")),
                    (-1, StructuredPolynomial.scalar(cat, "a_star")),
                    (-1, StructuredPolynomial.scalar(cat, "b_star")),
                ]
            )
        else:
            m_k = combine(
                [
                    (1, StructuredPolynomial.scalar(cat, "f_k")),
                    (-1, StructuredPolynomial.scalar(cat, "f_star")),
                ]
            )
            m_k1 = combine(
                [
                    (1, StructuredPolynomial.scalar(cat, "f_k1")),
                    (-1, StructuredPolynomial.scalar(cat, "f_star")),
                ]
            )
        return m_k, m_k1
    if metric.kind == "distance_squared":
        m_k = StructuredPolynomial.sq_norm(cat, {"x_k": 1, "x_star": -1})
        m_k1 = StructuredPolynomial.sq_norm(cat, {"x_k1": 1, "x_star": -1})
        return m_k, m_k1
    # gradient_norm_squared: full composite gradient r + s at each point
    m_k = StructuredPolynomial.sq_norm(cat, {"r_k": 1, "s_k": 1})
    m_k1 = StructuredPolynomial.sq_norm(cat, {"r_k1": 1, "sbar_k1": 1})
    return m_k, m_k1


def build_scenario(fclass: FunctionClass, alg: AlgorithmSpec, metric: Metric | str | None = None) -> RateProblem:
    """Assemble the RateProblem for one (class, algorithm, metric) triple.

    The metric defaults to the one compatible with the algorithm; any
    other pairing is rejected.
    """
    if metric is None:
        metric = Metric(METRIC_FOR_KIND[alg.kind])
    elif isinstance(metric, str):
        metric = Metric(metric)
    if metric.kind != METRIC_FOR_KIND[alg.kind]:
        raise ScenarioError(
            f"metric {metric.kind!r} is not compatible with {alg.kind!r}; expected {METRIC_FOR_KIND[alg.kind]!r}"
        )
    if alg.kind in PGM_KINDS and not fclass.composite:
        fclass = FunctionClass(fclass.mu, fclass.L, composite=True)
    if alg.kind in GD_KINDS and fclass.composite:
        raise ScenarioError(f"{alg.kind} applies to plain (non-composite) objectives")

    equalities, extra_ineqs, elims = algorithm_constraints(alg, fclass)

    if alg.kind in GD_KINDS:
        cat = GD_FULL_CATALOG
        ineqs = interpolability(fclass, ("k", "k1", "star"), catalog=cat)
    else:
        cat = PGM_FULL_CATALOG
        ineqs = interpolability(fclass, ("k", "k1", "star"), catalog=cat, value_prefix="a", grad_prefix="r")
        ineqs += convex_interpolability(
            ("k", "k1", "star"),
            {"k": "s_k", "k1": "sbar_k1", "star": "s_star"},
            catalog=cat,
            value_prefix="b",
        )
    ineqs += extra_ineqs
    m_k, m_k1 = _metric_pair(metric, alg, cat)

    for e in elims:
        repl = e.as_mapping()
        ineqs = [substitute_vector(p, e.target, repl) for p in ineqs]
        equalities = [substitute_vector(p, e.target, repl) for p in equalities]
        m_k = substitute_vector(m_k, e.target, repl)
        m_k1 = substitute_vector(m_k1, e.target, repl)

    catalog = m_k.catalog
    for poly in ineqs + equalities + [m_k, m_k1]:
        if poly.constant:
            raise ScenarioError("scenario generated a polynomial with a constant term")

    return RateProblem(
        scenario_key=alg.kind,
        catalog=catalog,
        metric_pair=(m_k, m_k1),
        inequalities=tuple((f"h{i+1}", p) for i, p in enumerate(ineqs)),
        equalities=tuple((f"v{j+1}", p) for j, p in enumerate(equalities)),
        fclass=fclass,
        alg=alg,
        metric=metric,
    )
