"""Analytic contraction certificates and their exact verification.

The certificate for a scenario consists of a rational contraction
factor t, nonnegative multipliers for the inequality constraints, free
multipliers for the equality constraints, and a PSD Gram block over the
vector symbols.  `verify_identity` recomputes the defining identity

    t*m_k - m_{k+1}  =  Gram(Q) + sum_i sigma_i h_i + sum_j theta_j v_j

coefficient by coefficient in rational arithmetic, and `verify_psd`
decides positive semidefiniteness of Q exactly, either by pivoted LDL
factorization or through the sign pattern of the characteristic
polynomial (Descartes' rule of signs).  No floating point is involved
anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .polyform import (
    CoefficientKey,
    StructuredPolynomial,
    combine,
    from_gram_matrix,
)
from .scenarios import (
    AlgorithmSpec,
    FunctionClass,
    RateProblem,
    build_scenario,
)

SCENARIO_KEYS = (
    "gd_constant",
    "gd_els",
    "gd_armijo",
    "gd_goldstein",
    "gd_wolfe",
    "pgm_constant",
    "pgm_els",
)


class CertificateError(ValueError):
    """Unknown scenario key or inadmissible certificate request."""


def rho_gamma(mu: Fraction, L: Fraction, gamma: Fraction) -> Fraction:
    """Linear-rate factor max(|1 - gamma*mu|, |1 - gamma*L|)."""
    return max(abs(1 - gamma * mu), abs(1 - gamma * L))


def rate_formula(scenario_key: str, fclass: FunctionClass, alg: AlgorithmSpec) -> Fraction:
    """Closed-form contraction factor for a catalogued scenario."""
    if scenario_key not in SCENARIO_KEYS:
        raise CertificateError(f"unknown scenario {scenario_key!r}; available: {SCENARIO_KEYS}")
    if alg.kind != scenario_key:
        raise CertificateError(f"algorithm kind {alg.kind!r} does not match scenario {scenario_key!r}")
    alg.validate(fclass)
    mu, L = fclass.mu, fclass.L
    if scenario_key in ("gd_constant", "pgm_constant"):
        return rho_gamma(mu, L, alg.gamma) ** 2
    if scenario_key in ("gd_els", "pgm_els"):
        return ((L - mu) / (L + mu)) ** 2
    # inexact line-search rules share t = 1 - 2*mu*c with c the
    # coefficient of ||g_k||^2 in the sufficient-decrease inequality
    return 1 - 2 * mu * alg.suff_decrease_coefficient(fclass)


@dataclass(frozen=True)
class SosSquare:
    """One square weight*||combo||^2 of an explicit SOS decomposition."""

    weight: Fraction
    combo: tuple[tuple[str, Fraction], ...]


@dataclass(frozen=True)
class AnalyticCertificate:
    """Evaluators for one scenario's analytic certificate.

    `multipliers` returns ({h-name: sigma}, {v-name: theta}); entries
    not listed are zero.  `gram` returns the symmetric rational Gram
    block indexed by the scenario catalog's vector symbols.  `sos_form`,
    where available, gives an explicit sum-of-squares decomposition of
    the Gram block (it may require square roots, so it is only defined
    at parameter values where those are rational).
    """

    scenario_key: str
    rate: Callable[[FunctionClass, AlgorithmSpec], Fraction]
    multipliers: Callable[[FunctionClass, AlgorithmSpec], tuple[dict, dict]]
    gram: Callable[[FunctionClass, AlgorithmSpec], list]
    sos_form: Callable[[FunctionClass, AlgorithmSpec], list[SosSquare]] | None = None


def _sqrt_exact(x: Fraction) -> Fraction | None:
    """sqrt(x) when it is rational, else None."""
    import math

    if x < 0:
        return None
    pn = math.isqrt(x.numerator)
    pd = math.isqrt(x.denominator)
    if pn * pn == x.numerator and pd * pd == x.denominator:
        return Fraction(pn, pd)
    return None


def _gd_els_gram(fclass: FunctionClass, alg: AlgorithmSpec) -> list:
    mu, L = fclass.mu, fclass.L
    s, d = L + mu, L - mu
    upper = [
        [2 * L**2 * mu**2 / (s**2 * d), -L * mu**2 / s**2, -L * mu**2 / (s * d), L * mu / s**2, L * mu / (s * d)],
        [0, L * mu * (L + 3 * mu) / (2 * s**2), -L * mu / (2 * s), -mu * (3 * L + mu) / (2 * s**2), -mu / (2 * s)],
        [0, 0, L * mu / (2 * d), mu / (2 * s), -mu / (2 * d)],
        [0, 0, 0, (L + 3 * mu) / (2 * s**2), 1 / (2 * s)],
        [0, 0, 0, 0, 1 / (2 * d)],
    ]
    return _symmetrize(upper)


def _symmetrize(upper: Sequence[Sequence]) -> list:
    n = len(upper)
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = Fraction(upper[i][j])
    return m


def _gd_els_sos(fclass: FunctionClass, alg: AlgorithmSpec) -> list[SosSquare]:
    mu, L = fclass.mu, fclass.L
    kappa = L / mu
    rk = _sqrt_exact(kappa)
    rlm = _sqrt_exact(L * mu)
    if rk is None or rlm is None:
        raise CertificateError(
            "explicit two-square form needs rational sqrt(L/mu) and sqrt(L*mu); "
            "use the Gram block at other parameter values"
        )
    c1 = (rk + 1) ** 2 / (kappa + 1)
    c2 = (rk - 1) ** 2 / (kappa + 1)
    q1 = (("x_k", -c1), ("x_star", c1 - 1), ("g_k", c1 / rlm), ("x_k1", Fraction(1)), ("g_k1", 1 / rlm))
    q2 = (("x_k", c2), ("x_star", 1 - c2), ("g_k", c2 / rlm), ("x_k1", Fraction(-1)), ("g_k1", 1 / rlm))
    return [
        SosSquare(mu * rk / (4 * (rk + 1)), q1),
        SosSquare(mu * rk / (4 * (rk - 1)), q2),
    ]


def _pgm_els_gram(fclass: FunctionClass, alg: AlgorithmSpec) -> list:
    mu, L = fclass.mu, fclass.L
    s, d = L + mu, L - mu
    upper = [
        [2 * L**2 * mu**2 / (s**2 * d), -L * mu**2 / s**2, -L * mu**2 / (d * s), -2 * L * mu**2 / (s**2 * d),
         L * mu / s**2, L * mu / (d * s), 0, 0, 2 * L * mu / s**2],
        [0, L * mu * (L + 3 * mu) / (2 * s**2), -L * mu / (2 * s), mu**2 / s**2,
         -mu * (3 * L + mu) / (2 * s**2), -mu / (2 * s), 0, 0, -2 * L * mu / s**2],
        [0, 0, L * mu / (2 * d), mu**2 / (d * s), mu / (2 * s), -mu / (2 * d), 0, 0, 0],
        [0, 0, 0, 2 * L * mu / (s**2 * d), -mu / s**2, -mu / (d * s), 0, 0, 0],
        [0, 0, 0, 0, (L + 3 * mu) / (2 * s**2), 1 / (2 * s), 0, 0, 1 / s],
        [0, 0, 0, 0, 0, 1 / (2 * d), 0, 0, 1 / s],
        [0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 2 / s],
    ]
    return _symmetrize(upper)


def _rank_one(catalog_vectors: Sequence[str], weight: Fraction, combo: Mapping[str, Fraction]) -> list:
    n = len(catalog_vectors)
    vec = [Fraction(combo.get(v, 0)) for v in catalog_vectors]
    return [[weight * vec[i] * vec[j] for j in range(n)] for i in range(n)]


def _matrix_sum(*mats: list) -> list:
    n = len(mats[0])
    return [[sum(m[i][j] for m in mats) for j in range(n)] for i in range(n)]


def _gd_constant_gram(fclass: FunctionClass, alg: AlgorithmSpec) -> list:
    mu, L, gamma = fclass.mu, fclass.L, alg.gamma
    vectors = ("x_star", "x_k", "g_k", "g_k1")
    if gamma <= 2 / (L + mu):
        c = gamma * (2 - gamma * (L + mu)) / (L - mu)
        w = {"g_k": Fraction(1), "x_k": -mu, "x_star": mu}
    else:
        c = gamma * (gamma * (L + mu) - 2) / (L - mu)
        w = {"g_k": Fraction(1), "x_k": -L, "x_star": L}
    return _rank_one(vectors, c, w)


def _line_search_gram(fclass: FunctionClass, alg: AlgorithmSpec) -> list:
    mu, L = fclass.mu, fclass.L
    vectors = ("x_star", "x_k", "x_k1", "g_k", "g_k1")
    c = alg.suff_decrease_coefficient(fclass) * L / (L - mu)
    return _rank_one(vectors, c, {"g_k": Fraction(1), "x_star": mu, "x_k": -mu})


def _pgm_constant_gram(fclass: FunctionClass, alg: AlgorithmSpec) -> list:
    mu, L, gamma = fclass.mu, fclass.L, alg.gamma
    vectors = ("x_star", "x_k", "r_star", "r_k", "r_k1", "s_k", "sbar_k1")
    if gamma <= 2 / (L + mu):
        lam, c = mu, (2 - gamma * (L + mu)) / (gamma * (L - mu))
    else:
        lam, c = L, (gamma * (L + mu) - 2) / (gamma * (L - mu))
    sub_gap = _rank_one(vectors, (1 - gamma * lam) ** 2, {"s_k": Fraction(1), "sbar_k1": Fraction(-1)})
    grad_gap = _rank_one(
        vectors, c, {"r_k": 1 - lam * gamma, "r_k1": Fraction(-1), "sbar_k1": -lam * gamma}
    )
    return _matrix_sum(sub_gap, grad_gap)


def _simple_rate(key: str):
    def _rate(fclass: FunctionClass, alg: AlgorithmSpec) -> Fraction:
        return rate_formula(key, fclass, alg)

    return _rate


def _gd_els_multipliers(fclass: FunctionClass, alg: AlgorithmSpec):
    mu, L = fclass.mu, fclass.L
    s, d = L + mu, L - mu
    sigma = {"h1": d / s, "h5": 2 * mu * d / s**2, "h6": 2 * mu / s}
    theta = {"v1": Fraction(-1), "v2": -2 / s}
    return sigma, theta


def _gd_constant_multipliers(fclass: FunctionClass, alg: AlgorithmSpec):
    rho = rho_gamma(fclass.mu, fclass.L, alg.gamma)
    return {"h2": 2 * alg.gamma * rho, "h5": 2 * alg.gamma * rho}, {}


def _line_search_multipliers(fclass: FunctionClass, alg: AlgorithmSpec):
    c = alg.suff_decrease_coefficient(fclass)
    return {"h5": 2 * fclass.mu * c, "h7": Fraction(1)}, {}


def _pgm_constant_multipliers(fclass: FunctionClass, alg: AlgorithmSpec):
    rho = rho_gamma(fclass.mu, fclass.L, alg.gamma)
    g = alg.gamma
    return {"h1": 2 * rho / g, "h3": 2 * rho / g, "h7": 2 * rho**2 / g, "h9": 2 * rho**2 / g}, {}


def _pgm_els_multipliers(fclass: FunctionClass, alg: AlgorithmSpec):
    mu, L = fclass.mu, fclass.L
    s, d = L + mu, L - mu
    sigma = {
        "h1": d / s,
        "h5": 2 * mu * d / s**2,
        "h6": 2 * mu / s,
        "h7": (d / s) ** 2,
        "h12": 4 * L * mu / s**2,
    }
    theta = {"v1": -2 / s, "v2": Fraction(-1), "v3": Fraction(0)}
    return sigma, theta


_CATALOG: dict[str, AnalyticCertificate] = {
    "gd_els": AnalyticCertificate(
        "gd_els", _simple_rate("gd_els"), _gd_els_multipliers, _gd_els_gram, _gd_els_sos
    ),
    "gd_constant": AnalyticCertificate(
        "gd_constant", _simple_rate("gd_constant"), _gd_constant_multipliers, _gd_constant_gram
    ),
    "gd_armijo": AnalyticCertificate(
        "gd_armijo", _simple_rate("gd_armijo"), _line_search_multipliers, _line_search_gram
    ),
    "gd_goldstein": AnalyticCertificate(
        "gd_goldstein", _simple_rate("gd_goldstein"), _line_search_multipliers, _line_search_gram
    ),
    "gd_wolfe": AnalyticCertificate(
        "gd_wolfe", _simple_rate("gd_wolfe"), _line_search_multipliers, _line_search_gram
    ),
    "pgm_constant": AnalyticCertificate(
        "pgm_constant", _simple_rate("pgm_constant"), _pgm_constant_multipliers, _pgm_constant_gram
    ),
    "pgm_els": AnalyticCertificate(
        "pgm_els", _simple_rate("pgm_els"), _pgm_els_multipliers, _pgm_els_gram
    ),
}


def catalog(scenario_key: str) -> AnalyticCertificate:
    try:
        return _CATALOG[scenario_key]
    except KeyError:
        raise CertificateError(
            f"no analytic certificate for {scenario_key!r}; available: {sorted(_CATALOG)}"
        ) from None


# -- identity verification ------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    ok: bool
    t: Fraction
    discrepancies: dict[CoefficientKey, Fraction]
    sigma: dict[str, Fraction]
    theta: dict[str, Fraction]

    def __bool__(self) -> bool:
        return self.ok


def verify_identity(cert: AnalyticCertificate, problem: RateProblem) -> IdentityReport:
    """Exact rational check of the certificate identity on `problem`.

    Returns every nonzero discrepancy coefficient on failure; also
    raises if any inequality multiplier comes out negative, since that
    would invalidate the certificate regardless of the identity.
    """
    if cert.scenario_key != problem.scenario_key:
        raise CertificateError(
            f"certificate {cert.scenario_key!r} does not match problem {problem.scenario_key!r}"
        )
    fclass, alg = problem.fclass, problem.alg
    t = cert.rate(fclass, alg)
    sigma, theta = cert.multipliers(fclass, alg)
    for name, val in sigma.items():
        if val < 0:
            raise CertificateError(f"negative inequality multiplier {name} = {val}")
    gram = cert.gram(fclass, alg)
    terms = [(Fraction(1), problem.target(t))]
    for name, h in problem.inequalities:
        w = sigma.get(name, Fraction(0))
        if w:
            terms.append((-w, h))
    for name, v in problem.equalities:
        w = theta.get(name, Fraction(0))
        if w:
            terms.append((-w, v))
    residual = combine(terms) - from_gram_matrix(problem.catalog, gram)
    return IdentityReport(
        ok=residual.is_zero(),
        t=t,
        discrepancies=residual.coefficients(),
        sigma=sigma,
        theta=theta,
    )


def verify_sos_form(cert: AnalyticCertificate, problem: RateProblem) -> bool:
    """Check that the explicit SOS squares expand to exactly the Gram block."""
    if cert.sos_form is None:
        raise CertificateError(f"{cert.scenario_key!r} has no explicit SOS form")
    squares = cert.sos_form(problem.fclass, problem.alg)
    cat = problem.catalog
    expanded = combine(
        [(sq.weight, StructuredPolynomial.sq_norm(cat, dict(sq.combo))) for sq in squares]
    )
    target = from_gram_matrix(cat, cert.gram(problem.fclass, problem.alg))
    return (expanded - target).is_zero()


# -- exact PSD checks -------------------------------------------------------------


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    method: str  # "rational_ldl" | "charpoly_descartes"
    witness: tuple

    def __bool__(self) -> bool:
        return self.is_psd


def _check_symmetric(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    if any(len(row) != n for row in a):
        raise CertificateError("matrix must be square")
    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] != a[j][i]:
                raise CertificateError(f"matrix not symmetric at ({i},{j})")
    return a


def verify_psd(matrix: Sequence[Sequence], method: str = "rational_ldl") -> PsdVerdict:
    """Exact PSD verdict for a symmetric rational matrix.

    rational_ldl: greedy-pivot LDL^T; PSD iff every pivot is >= 0 and a
    zero diagonal never hides a nonzero row.  charpoly_descartes: the
    coefficients of det(xI - M), computed exactly, must weakly alternate
    in sign, which for a symmetric matrix rules out negative eigenvalues.
    """
    if method == "rational_ldl":
        return _psd_ldl(matrix)
    if method == "charpoly_descartes":
        return _psd_descartes(matrix)
    raise CertificateError(f"unknown PSD method {method!r}")


def _psd_ldl(matrix: Sequence[Sequence]) -> PsdVerdict:
    a = _check_symmetric(matrix)
    n = len(a)
    active = list(range(n))
    pivots: list[Fraction] = []
    while active:
        piv = max(active, key=lambda i: a[i][i])
        d = a[piv][piv]
        if any(a[i][i] < 0 for i in active):
            bad = next(i for i in active if a[i][i] < 0)
            return PsdVerdict(False, "rational_ldl", (("negative_diagonal", bad, a[bad][bad]),))
        if d == 0:
            # remaining diagonal is all zero; PSD forces the block to vanish
            for i in active:
                for j in active:
                    if a[i][j]:
                        return PsdVerdict(
                            False, "rational_ldl", (("nonzero_row_with_zero_diagonal", i, j, a[i][j]),)
                        )
            pivots.extend(Fraction(0) for _ in active)
            return PsdVerdict(True, "rational_ldl", tuple(pivots))
        pivots.append(d)
        active.remove(piv)
        col = {i: a[i][piv] for i in active}
        for i in active:
            if not col[i]:
                continue
            fi = col[i] / d
            for j in active:
                if col[j]:
                    a[i][j] -= fi * col[j]
    return PsdVerdict(True, "rational_ldl", tuple(pivots))


def charpoly(matrix: Sequence[Sequence]) -> list[Fraction]:
    """Coefficients [1, c1, ..., cn] of det(xI - M), exactly
    (Faddeev-LeVerrier recursion over Fractions)."""
    a = _check_symmetric(matrix)
    n = len(a)
    coeffs = [Fraction(1)]
    mk = [row[:] for row in a]
    for k in range(1, n + 1):
        ck = -sum(mk[i][i] for i in range(n)) / k
        coeffs.append(ck)
        if k == n:
            break
        for i in range(n):
            mk[i][i] += ck
        mk = [
            [sum(a[i][l] * mk[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
    return coeffs


def _psd_descartes(matrix: Sequence[Sequence]) -> PsdVerdict:
    coeffs = charpoly(matrix)
    signs = tuple(0 if c == 0 else (1 if c > 0 else -1) for c in coeffs)
    ok = all(((-1) ** k) * c >= 0 for k, c in enumerate(coeffs))
    return PsdVerdict(ok, "charpoly_descartes", signs)


# -- Armijo contraction-factor comparison ----------------------------------------


@dataclass(frozen=True)
class ArmijoComparison:
    t_new: Fraction
    t_ly: Fraction | None
    t_nemi: Fraction | None
    new_beats_ly: bool | None
    new_beats_nemi: bool | None


def compare_armijo(epsilon, eta, kappa) -> ArmijoComparison:
    """Armijo-rule contraction factors at condition number kappa.

    Compares the certified factor t_new = 1 - 4*eps*(1-eps)/(eta*kappa)
    against two classical bounds: t_ly = 1 - 2*eps/(eta*kappa) (defined
    for eps < 1/2) and the t_nemi ratio
    (kappa - (2 - 1/eps)(1-eps)/eta) / (kappa + (1/eps - 1)/eta)
    (defined for eps >= 1/2).  The ordering flags report t_new < t_ly
    resp. t_new <= t_nemi wherever both are defined.
    """
    eps, eta, kap = Fraction(epsilon), Fraction(eta), Fraction(kappa)
    if not (kap > 1 and eta > 1 and 0 < eps < 1):
        raise CertificateError(f"need kappa > 1, eta > 1, eps in (0,1); got {kap}, {eta}, {eps}")
    t_new = 1 - 4 * eps * (1 - eps) / (eta * kap)
    t_ly = 1 - 2 * eps / (eta * kap) if eps < Fraction(1, 2) else None
    t_nemi = None
    if eps >= Fraction(1, 2):
        t_nemi = (kap - (2 - 1 / eps) * (1 - eps) / eta) / (kap + (1 / eps - 1) / eta)
    return ArmijoComparison(
        t_new=t_new,
        t_ly=t_ly,
        t_nemi=t_nemi,
        new_beats_ly=None if t_ly is None else t_new < t_ly,
        new_beats_nemi=None if t_nemi is None else t_new <= t_nemi,
    )


# -- structured verification report -----------------------------------------------


def verification_report(problem: RateProblem) -> str:
    """Deterministic text report: identity check, PSD checks, rate.

    Rationals are rendered as num/den so golden files stay exact.
    """
    cert = catalog(problem.scenario_key)
    rep = verify_identity(cert, problem)
    gram = cert.gram(problem.fclass, problem.alg)
    ldl = verify_psd(gram, "rational_ldl")
    desc = verify_psd(gram, "charpoly_descartes")

    def frac(x: Fraction) -> str:
        return f"{x.numerator}/{x.denominator}"

    lines = [
        f"scenario {problem.scenario_key}",
        f"mu {frac(problem.fclass.mu)}",
        f"L {frac(problem.fclass.L)}",
    ]
    for field in ("gamma", "epsilon", "eta", "delta", "c1", "c2"):
        val = getattr(problem.alg, field)
        if val is not None and not (field == "delta" and val == 0):
            lines.append(f"{field} {frac(val)}")
    lines.append(f"rate {frac(rep.t)}")
    for name in sorted(rep.sigma):
        lines.append(f"sigma {name} {frac(rep.sigma[name])}")
    for name in sorted(rep.theta):
        lines.append(f"theta {name} {frac(rep.theta[name])}")
    lines.append(f"identity {'PASS' if rep.ok else 'FAIL'}")
    if not rep.ok:
        for key in sorted(rep.discrepancies, key=str):
            lines.append(f"residual {key} {frac(rep.discrepancies[key])}")
    lines.append(f"psd rational_ldl {'PASS' if ldl.is_psd else 'FAIL'}")
    lines.append(f"psd charpoly_descartes {'PASS' if desc.is_psd else 'FAIL'}")
    return "\n".join(lines)


def verified_problem(scenario_key: str, fclass: FunctionClass, alg: AlgorithmSpec) -> RateProblem:
    """Convenience: build the scenario matching a catalogued certificate."""
    if scenario_key not in SCENARIO_KEYS:
        raise CertificateError(f"unknown scenario {scenario_key!r}")
    return build_scenario(fclass, alg)
