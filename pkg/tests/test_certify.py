"""Exact certificate verification, PSD checks, rate formulas."""

import random
import zlib
from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratecert.certify import (
    CertificateError,
    catalog,
    charpoly,
    compare_armijo,
    rate_formula,
    rho_gamma,
    verification_report,
    verify_identity,
    verify_psd,
    verify_sos_form,
)
from ratecert.polyform import CoefficientKey
from ratecert.scenarios import AlgorithmSpec, FunctionClass, build_scenario

MU_L = FunctionClass(F(1), F(10))


# -- rate formulas -------------------------------------------------------------


def test_rate_formula_els():
    assert rate_formula("gd_els", MU_L, AlgorithmSpec("gd_els")) == F(81, 121)


def test_rate_formula_constant_step():
    alg = AlgorithmSpec("gd_constant", gamma=F(2, 11))
    assert rho_gamma(F(1), F(10), F(2, 11)) == F(9, 11)
    assert rate_formula("gd_constant", MU_L, alg) == F(81, 121)


def test_rate_formula_armijo_noiseless():
    alg = AlgorithmSpec("gd_armijo", epsilon=F(1, 4), eta=F(2), delta=F(0))
    # 1 - 4*mu*eps*(1-eps)/(eta*L)
    assert rate_formula("gd_armijo", MU_L, alg) == 1 - F(4 * 1, 2 * 10) * F(1, 4) * F(3, 4)
    assert rate_formula("gd_armijo", MU_L, alg) == F(77, 80)


def test_rate_formula_goldstein_noiseless():
    alg = AlgorithmSpec("gd_goldstein", epsilon=F(9, 20), delta=F(0))
    # 1 - 4*mu*eps^2/L
    assert rate_formula("gd_goldstein", MU_L, alg) == 1 - 4 * F(9, 20) ** 2 / 10


def test_rate_formula_wolfe():
    alg = AlgorithmSpec("gd_wolfe", c1=F(1, 4), c2=F(1, 2))
    assert rate_formula("gd_wolfe", FunctionClass(F(1), F(4)), alg) == F(15, 16)


def test_rate_formula_rejects_bad_params():
    with pytest.raises(Exception, match="gamma"):
        rate_formula("gd_constant", MU_L, AlgorithmSpec("gd_constant", gamma=F(1, 5)))
    with pytest.raises(CertificateError, match="unknown scenario"):
        rate_formula("newton", MU_L, AlgorithmSpec("gd_els"))


# -- catalog values ------------------------------------------------------------


def test_gd_els_catalog_values():
    cert = catalog("gd_els")
    assert cert.rate(MU_L, AlgorithmSpec("gd_els")) == F(81, 121)
    sigma, theta = cert.multipliers(MU_L, AlgorithmSpec("gd_els"))
    assert theta == {"v1": -1, "v2": F(-2, 11)}
    assert sigma["h1"] == F(9, 11)
    assert sigma["h5"] == F(18, 121)
    assert sigma["h6"] == F(2, 11)


def test_pgm_els_catalog_values():
    fc = FunctionClass(F(1), F(3), composite=True)
    sigma, theta = catalog("pgm_els").multipliers(fc, AlgorithmSpec("pgm_els"))
    assert sigma["h12"] == F(3, 4)
    assert theta == {"v1": F(-1, 2), "v2": -1, "v3": 0}


def test_catalog_unknown_key():
    with pytest.raises(CertificateError, match="available"):
        catalog("nesterov")


# -- identity verification -----------------------------------------------------

CANONICAL = {
    "gd_els": AlgorithmSpec("gd_els"),
    "gd_constant": AlgorithmSpec("gd_constant", gamma=F(19, 100)),
    "gd_armijo": AlgorithmSpec("gd_armijo", epsilon=F(2, 5), eta=F(3, 2), delta=F(1, 10)),
    "gd_goldstein": AlgorithmSpec("gd_goldstein", epsilon=F(12, 25), delta=F(1, 10)),
    "gd_wolfe": AlgorithmSpec("gd_wolfe", c1=F(1, 10), c2=F(9, 10)),
    "pgm_constant": AlgorithmSpec("pgm_constant", gamma=F(19, 100)),
    "pgm_els": AlgorithmSpec("pgm_els"),
}


@pytest.mark.parametrize("key", sorted(CANONICAL))
def test_identity_exact_at_canonical_params(key):
    prob = build_scenario(MU_L, CANONICAL[key])
    report = verify_identity(catalog(key), prob)
    assert report.ok, report.discrepancies
    assert all(s >= 0 for s in report.sigma.values())


def _random_params(key: str, rng: random.Random) -> tuple[FunctionClass, AlgorithmSpec]:
    mu = F(rng.randint(1, 8), rng.randint(1, 4))
    L = mu * (1 + F(rng.randint(1, 40), rng.randint(1, 6)))
    fc = FunctionClass(mu, L)
    if key in ("gd_constant", "pgm_constant"):
        gamma = F(rng.randint(1, 19), 10) / L  # strictly inside (0, 2/L)
        return fc, AlgorithmSpec(key, gamma=gamma)
    if key == "gd_armijo":
        delta = F(rng.randint(0, 8), 10)
        bound = (1 - delta) / (1 + delta) ** 2
        eps = bound * F(rng.randint(1, 9), 10)
        eta = 1 + F(rng.randint(1, 30), 10)
        return fc, AlgorithmSpec(key, epsilon=eps, eta=eta, delta=delta)
    if key == "gd_goldstein":
        delta = F(rng.randint(0, 23), 100)
        lo = 1 - (1 - delta) / (1 + delta) ** 2
        eps = lo + (F(1, 2) - lo) * F(rng.randint(1, 9), 10)
        return fc, AlgorithmSpec(key, epsilon=eps, delta=delta)
    if key == "gd_wolfe":
        c1 = F(rng.randint(1, 8), 10)
        c2 = c1 + (1 - c1) * F(rng.randint(1, 9), 10)
        return fc, AlgorithmSpec(key, c1=c1, c2=c2)
    return fc, AlgorithmSpec(key)


@pytest.mark.parametrize("key", sorted(CANONICAL))
def test_identity_exact_at_twenty_random_params(key):
    rng = random.Random(zlib.crc32(key.encode()))
    cert = catalog(key)
    for _ in range(20):
        fc, alg = _random_params(key, rng)
        prob = build_scenario(fc, alg)
        report = verify_identity(cert, prob)
        assert report.ok, (fc, alg, report.discrepancies)
        assert all(s >= 0 for s in report.sigma.values())
        gram = cert.gram(fc, alg)
        assert verify_psd(gram, "rational_ldl").is_psd
        assert verify_psd(gram, "charpoly_descartes").is_psd


def test_perturbed_multiplier_localizes_discrepancy():
    cert = catalog("gd_els")

    def perturbed(fclass, alg):
        sigma, theta = cert.multipliers(fclass, alg)
        theta = dict(theta, v2=theta["v2"] + F(1, 1000))
        return sigma, theta

    broken = replace(cert, multipliers=perturbed)
    report = verify_identity(broken, build_scenario(MU_L, AlgorithmSpec("gd_els")))
    assert not report.ok
    assert set(report.discrepancies) == {CoefficientKey.pair("g_k", "g_k1")}
    assert report.discrepancies[CoefficientKey.pair("g_k", "g_k1")] == F(-1, 1000)


def test_wolfe_identity_spec_point():
    fc = FunctionClass(F(1), F(4))
    alg = AlgorithmSpec("gd_wolfe", c1=F(1, 4), c2=F(1, 2))
    report = verify_identity(catalog("gd_wolfe"), build_scenario(fc, alg))
    assert report.ok and report.t == F(15, 16)


def test_pgm_constant_both_branches():
    for gamma in (F(1, 20), F(2, 11), F(19, 100)):
        prob = build_scenario(MU_L, AlgorithmSpec("pgm_constant", gamma=gamma))
        assert verify_identity(catalog("pgm_constant"), prob).ok


# -- explicit SOS form ----------------------------------------------------------


def test_gd_els_sos_form_at_square_kappa():
    for L in (F(4), F(9)):
        prob = build_scenario(FunctionClass(F(1), L), AlgorithmSpec("gd_els"))
        assert verify_sos_form(catalog("gd_els"), prob)


def test_gd_els_sos_form_needs_rational_radicals():
    with pytest.raises(CertificateError, match="sqrt"):
        verify_sos_form(catalog("gd_els"), build_scenario(MU_L, AlgorithmSpec("gd_els")))


# -- exact PSD checks -------------------------------------------------------------


def test_psd_identity_and_indefinite():
    eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert verify_psd(eye, "rational_ldl").is_psd
    assert verify_psd(eye, "charpoly_descartes").is_psd
    bad = [[1, 2], [2, 1]]
    assert not verify_psd(bad, "rational_ldl").is_psd
    assert not verify_psd(bad, "charpoly_descartes").is_psd


def test_psd_zero_pivot_handling():
    assert verify_psd([[0, 0], [0, 1]], "rational_ldl").is_psd
    assert not verify_psd([[0, 1], [1, 0]], "rational_ldl").is_psd
    assert not verify_psd([[0, 1], [1, 0]], "charpoly_descartes").is_psd
    zero = [[0, 0], [0, 0]]
    assert verify_psd(zero, "rational_ldl").is_psd
    assert verify_psd(zero, "charpoly_descartes").is_psd


def test_psd_rejects_asymmetric():
    with pytest.raises(CertificateError, match="symmetric"):
        verify_psd([[1, 2], [0, 1]])


def test_q5_block_is_psd_both_ways():
    gram = catalog("gd_els").gram(FunctionClass(F(1), F(3)), AlgorithmSpec("gd_els"))
    assert verify_psd(gram, "rational_ldl").is_psd
    assert verify_psd(gram, "charpoly_descartes").is_psd


def test_charpoly_known_matrix():
    # det(xI - diag(1,2,3)) = x^3 - 6x^2 + 11x - 6
    assert charpoly([[1, 0, 0], [0, 2, 0], [0, 0, 3]]) == [1, -6, 11, -6]


entries = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@st.composite
def symmetric_matrices(draw):
    n = draw(st.integers(1, 6))
    vals = draw(st.lists(entries, min_size=n * (n + 1) // 2, max_size=n * (n + 1) // 2))
    m = [[F(0)] * n for _ in range(n)]
    it = iter(vals)
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = next(it)
    return m


@st.composite
def psd_matrices(draw):
    """Gram matrices B^T B, possibly rank deficient."""
    n = draw(st.integers(1, 6))
    r = draw(st.integers(0, n))
    rows = draw(st.lists(st.lists(entries, min_size=n, max_size=n), min_size=r, max_size=r))
    m = [[sum(row[i] * row[j] for row in rows) for j in range(n)] for i in range(n)]
    return m


@given(symmetric_matrices())
@settings(max_examples=80, deadline=None)
def test_ldl_and_descartes_agree(m):
    assert verify_psd(m, "rational_ldl").is_psd == verify_psd(m, "charpoly_descartes").is_psd


@given(psd_matrices())
@settings(max_examples=80, deadline=None)
def test_gram_matrices_verify_psd(m):
    assert verify_psd(m, "rational_ldl").is_psd
    assert verify_psd(m, "charpoly_descartes").is_psd


# -- Armijo comparison -----------------------------------------------------------


def test_compare_armijo_spec_point():
    comp = compare_armijo(F(1, 4), F(2), F(10))
    assert comp.t_new == F(1) - 4 * F(1, 4) * F(3, 4) / 20
    assert comp.t_ly == F(1) - 2 * F(1, 4) / 20
    assert comp.t_new < comp.t_ly and comp.new_beats_ly
    assert comp.t_nemi is None


def test_compare_armijo_nemirovski_range():
    comp = compare_armijo(F(1, 2), F(2), F(10))
    assert comp.t_ly is None
    assert comp.t_nemi is not None and comp.new_beats_nemi


def test_compare_armijo_limit():
    eps = F(1, 2)
    tiny = F(1, 10**6)
    comp = compare_armijo(eps, 1 + tiny, 1 + tiny)
    assert abs(float(comp.t_new)) <= 1e-4
    assert abs(float(comp.t_nemi) - 0.5) <= 1e-4


def test_compare_armijo_domain():
    with pytest.raises(CertificateError):
        compare_armijo(F(1, 4), F(1), F(10))


# -- report ----------------------------------------------------------------------


def test_verification_report_golden():
    prob = build_scenario(FunctionClass(F(1), F(3), composite=True), AlgorithmSpec("pgm_els"))
    report = verification_report(prob)
    assert "scenario pgm_els" in report
    assert "rate 1/4" in report
    assert "sigma h12 3/4" in report
    assert "identity PASS" in report
    assert "psd rational_ldl PASS" in report
    assert "psd charpoly_descartes PASS" in report
