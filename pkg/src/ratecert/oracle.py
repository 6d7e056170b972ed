"""Empirical validation: run the real algorithms and measure ratios.

Certificates bound the per-step worst case; this module provides the
other side of the argument by actually running each algorithm on
concrete member functions (diagonal quadratics, optionally plus an
ell-1 term), recording everything a scenario's constraints mention, and
checking that no measured ratio ever exceeds a certified factor and
that specific witness instances attain it.

Constant-step runs on quadratics stay in rational arithmetic end to
end; line-search runs use floats (noise directions need norms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polyform import evaluate
from .scenarios import AlgorithmSpec, RateProblem


class OracleError(RuntimeError):
    """A line search failed to terminate or a run request is malformed."""


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _axpy(x, a, d):
    return tuple(xi + a * di for xi, di in zip(x, d))


@dataclass(frozen=True)
class TestFunction:
    """Member function used by the oracle.

    kind "quadratic": f(x) = 1/2 sum_i spectrum[i]*(x_i - shift_i)^2.
    kind "composite": that quadratic as the smooth part a, plus
    b(x) = lam*||x||_1.  The spectrum must lie in the class's [mu, L];
    witnesses attain both endpoints.
    """

    __test__ = False  # not a pytest class, despite the name

    kind: str
    spectrum: tuple
    shift: tuple
    lam: object = 0

    def __post_init__(self):
        if self.kind not in ("quadratic", "composite"):
            raise OracleError(f"unknown test function kind {self.kind!r}")
        if len(self.spectrum) != len(self.shift):
            raise OracleError("spectrum and shift must have the same length")
        if self.kind == "quadratic" and self.lam:
            raise OracleError("plain quadratics have no ell-1 term")

    @property
    def dim(self) -> int:
        return len(self.spectrum)

    def a_value(self, x):
        half = Fraction(1, 2) if _is_rational(x) else 0.5
        return half * sum(l * (xi - ci) ** 2 for l, xi, ci in zip(self.spectrum, x, self.shift))

    def a_grad(self, x):
        return tuple(l * (xi - ci) for l, xi, ci in zip(self.spectrum, x, self.shift))

    def hess_quad(self, d):
        """d^T H d for the smooth part."""
        return sum(l * di * di for l, di in zip(self.spectrum, d))

    def b_value(self, x):
        return self.lam * sum(abs(xi) for xi in x) if self.kind == "composite" else 0 * x[0]

    def b_subgrad(self, x):
        """A valid ell-1 subgradient: lam*sign on nonzeros, 0 at zeros."""
        if self.kind != "composite":
            return tuple(0 * xi for xi in x)
        return tuple(self.lam * (1 if xi > 0 else -1 if xi < 0 else 0) for xi in x)

    def value(self, x):
        return self.a_value(x) + self.b_value(x)

    def prox_b(self, v, gamma):
        """prox of gamma*b: soft-thresholding at gamma*lam."""
        if self.kind != "composite" or not self.lam:
            return tuple(v)
        th = gamma * self.lam
        return tuple(vi - th if vi > th else vi + th if vi < -th else 0 * vi for vi in v)

    def minimizer(self):
        if self.kind == "quadratic" or not self.lam:
            return tuple(self.shift)
        out = []
        for l, c in zip(self.spectrum, self.shift):
            # min over scalar x of 1/2 l (x-c)^2 + lam|x|
            t = self.lam / l
            out.append(c - t if c > t else c + t if c < -t else 0 * c)
        return tuple(out)


def _is_rational(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


@dataclass
class RunTrace:
    """Iterate history with everything the constraints mention.

    For composite runs, `subgrads[k]` is the recorded subgradient of the
    nonsmooth part at x_k (the prox-induced one once k >= 1) and
    `sbars[k]` is the prox-induced subgradient at x_{k+1} for the step
    k -> k+1.
    """

    alg: AlgorithmSpec
    func: TestFunction
    xs: list = field(default_factory=list)
    fvals: list = field(default_factory=list)
    grads: list = field(default_factory=list)  # gradient of f, or of the smooth part
    gammas: list = field(default_factory=list)
    dirs: list = field(default_factory=list)
    avals: list = field(default_factory=list)
    bvals: list = field(default_factory=list)
    subgrads: list = field(default_factory=list)
    sbars: list = field(default_factory=list)
    x_star: tuple = ()
    f_star: object = 0
    a_star: object = 0
    b_star: object = 0
    r_star: tuple = ()
    exact: bool = False

    @property
    def steps(self) -> int:
        return len(self.xs) - 1

    def metric_series(self, metric_kind: str) -> list:
        """Value of the performance metric at each recorded point."""
        if metric_kind == "objective_accuracy":
            return [f - self.f_star for f in self.fvals]
        if metric_kind == "distance_squared":
            return [_dot(_axpy(x, -1, self.x_star), _axpy(x, -1, self.x_star)) for x in self.xs]
        if metric_kind == "gradient_norm_squared":
            out = []
            for k, x in enumerate(self.xs):
                r = self.grads[k]
                s = self.subgrads[k] if self.subgrads else tuple(0 * ri for ri in r)
                full = _axpy(r, 1, s)
                out.append(_dot(full, full))
            return out
        raise OracleError(f"unknown metric {metric_kind!r}")

    def ratios(self, metric_kind: str) -> tuple[list, list[int]]:
        """Per-step metric ratios; steps with a zero denominator are
        excluded and their indices reported separately."""
        series = self.metric_series(metric_kind)
        ratios, excluded = [], []
        for k in range(len(series) - 1):
            if series[k] == 0:
                excluded.append(k)
            else:
                ratios.append(series[k + 1] / series[k])
        return ratios, excluded


# -- line searches ----------------------------------------------------------------


def _noise_direction(g, delta: float, rng, mode: str):
    """d = -g + delta*||g||*u with u a unit vector (random or the worst
    axis-aligned choice)."""
    if not delta:
        return tuple(-gi for gi in g)
    gnorm = math.sqrt(sum(float(gi) ** 2 for gi in g))
    if mode == "axis":
        i = max(range(len(g)), key=lambda j: abs(float(g[j])))
        u = [0.0] * len(g)
        u[i] = 1.0 if float(g[i]) > 0 else -1.0
    elif mode == "random":
        raw = rng.standard_normal(len(g))
        u = raw / np.linalg.norm(raw)
    else:
        raise OracleError(f"unknown noise mode {mode!r}")
    return tuple(-float(gi) + delta * gnorm * ui for gi, ui in zip(g, u))


def _search_exponent(ok, hi_side: bool, cap: int = 200) -> int:
    """Largest j >= 0 with ok(j) when hi_side (ok downward-closed), else
    smallest j >= 1 with ok(j) (ok upward-closed).  Exponential bracket
    plus binary search keeps this fast even for eta barely above 1."""
    if hi_side:
        if not ok(0):
            return -1
        j = 1
        while ok(j):
            j *= 2
            if j > 2**cap:
                raise OracleError("line search failed to bracket a growing step")
        lo, hi = j // 2, j  # ok(lo), not ok(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
        return lo
    j = 1
    while not ok(j):
        j *= 2
        if j > 2**cap:
            raise OracleError("backtracking line search failed to find an acceptable step")
    lo, hi = j // 2, j  # not ok(lo) [or lo==0], ok(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def _armijo_step(func: TestFunction, x, g, d, eps: float, eta: float, L):
    """Largest step gamma_init*eta^k (k integer) passing the sufficient
    decrease test, so the next multiple certifies the rejection bound."""
    fx = float(func.value(x))
    dd = _dot(d, d)
    g0 = 10.0 / float(L)

    def ok_at(gamma: float) -> bool:
        return float(func.value(_axpy(x, gamma, d))) <= fx - eps * gamma * dd

    if ok_at(g0):
        j = _search_exponent(lambda k: ok_at(g0 * eta**k), hi_side=True)
        return g0 * eta**j
    j = _search_exponent(lambda k: ok_at(g0 * eta**-k), hi_side=False)
    return g0 * eta**-j


def _goldstein_step(func: TestFunction, x, d, eps: float, max_iter: int = 300):
    fx = float(func.value(x))
    dd = _dot(d, d)

    def conditions(gamma: float) -> tuple[bool, bool]:
        drop = float(func.value(_axpy(x, gamma, d))) - fx
        return drop <= -eps * gamma * dd, drop >= -(1 - eps) * gamma * dd

    lo, hi = 0.0, math.inf
    gamma = 1.0
    for _ in range(max_iter):
        sufficient, not_too_small = conditions(gamma)
        if sufficient and not_too_small:
            return gamma
        if not sufficient:
            hi = gamma
        else:
            lo = gamma
        gamma = 2 * gamma if math.isinf(hi) else 0.5 * (lo + hi)
    raise OracleError("Goldstein search did not terminate; window too narrow?")


def _wolfe_step(func: TestFunction, x, g, c1: float, c2: float, max_iter: int = 300):
    fx = float(func.value(x))
    gg = _dot(g, g)
    lo, hi = 0.0, math.inf
    gamma = 1.0 / float(max(func.spectrum))
    for _ in range(max_iter):
        x_new = _axpy(x, -gamma, g)
        sufficient = float(func.value(x_new)) <= fx - c1 * gamma * gg
        curvature = _dot(func.a_grad(x_new), g) <= c2 * gg
        if sufficient and curvature:
            return gamma
        if not sufficient:
            hi = gamma
        else:  # step too short
            lo = gamma
        gamma = 2 * gamma if math.isinf(hi) else 0.5 * (lo + hi)
    raise OracleError("Wolfe search did not terminate")


def _golden_section(phi, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    inv = (math.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = phi(d)
    return 0.5 * (a + b)


def _pgm_els_gamma(func: TestFunction, x, r, hi: float):
    """Exact-line-search step for the proximal path.

    The step size must make the full gradient at the new point
    orthogonal to the search direction,
        eta(t) = <grad a(x(t)) + sbar(t), r + sbar(t)> = 0,
    with x(t) = prox_{t b}(x - t*r).  Minimizing
    phi(t) = f(x(t)) directly is not equivalent: soft-thresholding puts
    kinks in phi, and when the minimum sits on a kink the prox-induced
    subgradient there is not the orthogonal one.  eta is continuous and
    positive as t -> 0+, so the step is the first sign change of eta
    (bracketed by golden section on phi, refined by bisection); on
    instances with no active-set change this is exactly the phi
    minimizer.
    """

    def phi(t: float) -> float:
        return float(func.value(func.prox_b(_axpy(x, -t, r), t)))

    def eta(t: float) -> float:
        xn = func.prox_b(_axpy(x, -t, r), t)
        sbar = tuple((xi - yi) / t - ri for xi, yi, ri in zip(x, xn, r))
        return _dot(_axpy(func.a_grad(xn), 1, sbar), _axpy(r, 1, sbar))

    g0 = _golden_section(phi, 0.0, hi)
    lo_ = 1e-12 * hi
    e_lo = eta(lo_)
    if e_lo <= 0:
        return lo_
    hi_, e_hi = None, None
    if eta(g0) <= 0:
        hi_, e_hi = g0, eta(g0)
    else:
        # minimizer is interior-smooth or beyond; scan past it for a crossing
        t = max(g0, lo_)
        for _ in range(200):
            t_next = min(t * 1.05 + 1e-12, hi)
            e = eta(t_next)
            if e <= 0:
                lo_, e_lo = t, eta(t)
                hi_, e_hi = t_next, e
                break
            if t_next >= hi:
                break
            t = t_next
        if hi_ is None:
            return g0  # no stationary point found below the bracket cap
    for _ in range(200):
        mid = 0.5 * (lo_ + hi_)
        e_mid = eta(mid)
        if e_mid == 0 or hi_ - lo_ < 1e-300:
            return mid
        if e_mid > 0:
            lo_ = mid
        else:
            hi_ = mid
    return 0.5 * (lo_ + hi_)


# -- the driver --------------------------------------------------------------------


def run(
    alg: AlgorithmSpec,
    func: TestFunction,
    x0: Sequence,
    steps: int,
    *,
    seed: int | None = None,
    noise: str = "random",
) -> RunTrace:
    """Run `steps` iterations of the algorithm on `func` from x0.

    Stops early at an exact optimum.  Rational inputs with a rational
    constant step (or closed-form exact line search on quadratics) give
    an exact rational trace.
    """
    if steps < 1:
        raise OracleError("need at least one step")
    if alg.kind.startswith("pgm") and func.kind != "composite":
        raise OracleError("proximal runs need a composite test function")
    if alg.kind.startswith("gd") and func.kind != "quadratic":
        raise OracleError("gradient-descent runs use plain quadratics")

    line_search = alg.kind in ("gd_armijo", "gd_goldstein", "gd_wolfe")
    exact = _is_rational(x0) and _is_rational(func.spectrum) and _is_rational(func.shift) and not line_search
    if alg.kind == "pgm_els" and func.lam:
        exact = False
    if exact:
        x = tuple(Fraction(v) for v in x0)
    else:
        x = tuple(float(v) for v in x0)

    rng = np.random.default_rng(seed)
    xstar = func.minimizer()
    if not exact:
        xstar = tuple(float(v) for v in xstar)
    trace = RunTrace(
        alg=alg,
        func=func,
        x_star=xstar,
        a_star=func.a_value(xstar),
        b_star=func.b_value(xstar),
        f_star=func.value(xstar),
        r_star=func.a_grad(xstar),
        exact=exact,
    )

    def record_point(x, subgrad=None):
        trace.xs.append(x)
        trace.grads.append(func.a_grad(x))
        trace.avals.append(func.a_value(x))
        trace.bvals.append(func.b_value(x))
        trace.fvals.append(func.value(x))
        if func.kind == "composite":
            trace.subgrads.append(subgrad if subgrad is not None else func.b_subgrad(x))

    record_point(x)
    mu = min(func.spectrum)
    L = max(func.spectrum)
    if func.kind == "composite":
        stationary = func.prox_b(_axpy(x, -1, trace.grads[0]), 1) == x
    else:
        stationary = all(gi == 0 for gi in trace.grads[0])
    if stationary:
        raise OracleError("x0 is already optimal; a trace needs at least one step")

    for _ in range(steps):
        g = trace.grads[-1]
        if alg.kind.startswith("gd"):
            if all(gi == 0 for gi in g):
                break
            if alg.kind == "gd_constant":
                gamma = alg.gamma if exact else float(alg.gamma)
                d = tuple(-gi for gi in g)
            elif alg.kind == "gd_els":
                gamma = _dot(g, g) / func.hess_quad(g)
                d = tuple(-gi for gi in g)
            else:
                d = _noise_direction(g, float(alg.delta), rng, noise)
                if alg.kind == "gd_armijo":
                    gamma = _armijo_step(func, x, g, d, float(alg.epsilon), float(alg.eta), L)
                elif alg.kind == "gd_goldstein":
                    gamma = _goldstein_step(func, x, d, float(alg.epsilon))
                else:
                    gamma = _wolfe_step(func, x, g, float(alg.c1), float(alg.c2))
            x = _axpy(x, gamma, d)
            trace.gammas.append(gamma)
            trace.dirs.append(d)
            record_point(x)
        else:
            r = g
            s = trace.subgrads[-1]
            full = _axpy(r, 1, s)
            if all(v == 0 for v in full):
                break
            if alg.kind == "pgm_constant":
                gamma = alg.gamma if exact else float(alg.gamma)
            else:  # pgm_els
                if not func.lam:
                    gamma = _dot(g, g) / func.hess_quad(g)
                else:
                    gamma = _pgm_els_gamma(func, x, r, 4.0 / float(mu))
            x_next = func.prox_b(_axpy(x, -gamma, r), gamma)
            if x_next == x and alg.kind == "pgm_els":
                break  # prox fixed point: already optimal
            sbar = tuple((xi - yi) / gamma - ri for xi, yi, ri in zip(x, x_next, r))
            trace.gammas.append(gamma)
            trace.sbars.append(sbar)
            x = x_next
            record_point(x, subgrad=sbar)
    return trace


# -- reports -----------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    metric: str
    t_bound: float
    ratios: tuple
    excluded_steps: tuple
    max_ratio: float | None
    passed: bool


def check_against_bound(trace: RunTrace, t_bound, metric_kind: str, tol: float = 1e-9) -> BoundReport:
    """Do all measured per-step ratios stay below the certified factor?

    Steps that land exactly on the optimum are excluded (the ratio is
    undefined there) and reported.
    """
    ratios, excluded = trace.ratios(metric_kind)
    max_ratio = max((float(r) for r in ratios), default=None)
    passed = max_ratio is None or max_ratio <= float(t_bound) + tol
    return BoundReport(
        metric=metric_kind,
        t_bound=float(t_bound),
        ratios=tuple(ratios),
        excluded_steps=tuple(excluded),
        max_ratio=max_ratio,
        passed=passed,
    )


@dataclass(frozen=True)
class AuditReport:
    n_pairs: int
    violations: tuple
    min_inequality_value: float | None
    max_equality_residual: float | None

    @property
    def clean(self) -> bool:
        return not self.violations


def _assignment(trace: RunTrace, problem: RateProblem, k: int) -> tuple[dict, dict]:
    zero_vec = tuple(0 * v for v in trace.xs[0])
    if problem.alg.kind.startswith("gd"):
        scalars = {"f_star": trace.f_star, "f_k": trace.fvals[k], "f_k1": trace.fvals[k + 1]}
        vectors = {
            "x_star": trace.x_star,
            "x_k": trace.xs[k],
            "x_k1": trace.xs[k + 1],
            "g_star": zero_vec,
            "g_k": trace.grads[k],
            "g_k1": trace.grads[k + 1],
        }
    else:
        scalars = {
            "a_star": trace.a_star,
            "a_k": trace.avals[k],
            "a_k1": trace.avals[k + 1],
            "b_star": trace.b_star,
            "b_k": trace.bvals[k],
            "b_k1": trace.bvals[k + 1],
        }
        vectors = {
            "x_star": trace.x_star,
            "x_k": trace.xs[k],
            "x_k1": trace.xs[k + 1],
            "r_star": trace.r_star,
            "r_k": trace.grads[k],
            "r_k1": trace.grads[k + 1],
            "s_star": tuple(-v for v in trace.r_star),
            "s_k": trace.subgrads[k],
            "sbar_k1": trace.sbars[k],
        }
    scalars = {n: v for n, v in scalars.items() if n in problem.catalog.scalars}
    vectors = {n: v for n, v in vectors.items() if n in problem.catalog.vectors}
    return scalars, vectors


def constraint_audit(trace: RunTrace, problem: RateProblem, tol: float = 1e-9) -> AuditReport:
    """Evaluate every scenario constraint on every consecutive iterate
    pair of the trace (with the optimizer data attached): inequalities
    must be >= -tol and equalities within tol of zero.  Exact traces are
    audited with tol as given but typically hold exactly."""
    if trace.alg.kind != problem.alg.kind:
        raise OracleError(
            f"trace ran {trace.alg.kind!r} but the problem encodes {problem.alg.kind!r}"
        )
    violations = []
    min_h: float | None = None
    max_v: float | None = None
    for k in range(trace.steps):
        scalars, vectors = _assignment(trace, problem, k)
        for name, poly in problem.inequalities:
            val = float(evaluate(poly, scalars, vectors))
            min_h = val if min_h is None else min(min_h, val)
            if val < -tol:
                violations.append((k, name, val))
        for name, poly in problem.equalities:
            val = abs(float(evaluate(poly, scalars, vectors)))
            max_v = val if max_v is None else max(max_v, val)
            if val > tol:
                violations.append((k, name, val))
    return AuditReport(
        n_pairs=trace.steps,
        violations=tuple(violations),
        min_inequality_value=min_h,
        max_equality_residual=max_v,
    )


# -- witness instances --------------------------------------------------------------


def zigzag_quadratic(mu, L) -> tuple[TestFunction, tuple]:
    """Two-eigenvalue quadratic and start point on which exact line
    search attains ((L-mu)/(L+mu))^2 at every step."""
    mu, L = Fraction(mu), Fraction(L)
    f = TestFunction("quadratic", (mu, L), (Fraction(0), Fraction(0)))
    return f, (1 / mu, 1 / L)


def worst_curvature_quadratic(mu, L, gamma) -> tuple[TestFunction, tuple]:
    """One-dimensional quadratic whose curvature maximizes |1 - gamma*l|
    over {mu, L}: constant-step GD contracts squared distance at exactly
    rho_gamma^2 on it."""
    mu, L, gamma = Fraction(mu), Fraction(L), Fraction(gamma)
    lam = mu if abs(1 - gamma * mu) >= abs(1 - gamma * L) else L
    return TestFunction("quadratic", (lam,), (Fraction(0),)), (Fraction(1),)


def trace_to_csv(trace: RunTrace, metric_kind: str) -> str:
    """CSV export: step, f, ||x - x*||^2, ||g||^2, gamma, ratio."""
    series = trace.metric_series(metric_kind)
    lines = ["step,f,dist2,grad2,gamma,ratio"]
    for k, x in enumerate(trace.xs):
        dx = _axpy(x, -1, trace.x_star)
        g = trace.grads[k]
        gamma_str = repr(float(trace.gammas[k])) if k < len(trace.gammas) else ""
        ratio = ""
        if k > 0 and series[k - 1] != 0:
            ratio = repr(float(series[k] / series[k - 1]))
        lines.append(
            f"{k},{float(trace.fvals[k])!r},{float(_dot(dx, dx))!r},{float(_dot(g, g))!r},"
            f"{gamma_str},{ratio}"
        )
    return "\n".join(lines)
