"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Numeric SDP optima are compared at 1e-5, duality gaps at 1e-6;
certificate identities and PSD checks are exact rational computations.
"""

import random
import zlib
from contextlib import contextmanager
from fractions import Fraction as F

from ratecert.certify import (
    catalog,
    compare_armijo,
    rate_formula,
    rho_gamma,
    verify_identity,
    verify_psd,
)
from ratecert.certsearch import build_pep_dual, build_sos_sdp, solve_rate, sparsify_multipliers
from ratecert.oracle import TestFunction, check_against_bound, constraint_audit, run, zigzag_quadratic
from ratecert.scenarios import AlgorithmSpec, FunctionClass, build_scenario

RATE_TOL = 1e-5
GAP_TOL = 1e-6


@contextmanager
def criterion(number: int, name: str):
    ok = False
    try:
        yield
        ok = True
    finally:
        print(f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'}")


def _solved_rate(fclass, alg):
    res = solve_rate(build_sos_sdp(build_scenario(fclass, alg)))
    assert res.ok, res.solver_status
    return res


def test_criterion_1_gd_exact_line_search():
    with criterion(1, "GD exact line search"):
        for mu, L in ((F(1), F(10)), (F(1), F(100)), (F(2), F(3))):
            fclass = FunctionClass(mu, L)
            alg = AlgorithmSpec("gd_els")
            t_star = ((L - mu) / (L + mu)) ** 2
            assert abs(_solved_rate(fclass, alg).t - float(t_star)) <= RATE_TOL
            report = verify_identity(catalog("gd_els"), build_scenario(fclass, alg))
            assert report.ok and report.t == t_star
            func, x0 = zigzag_quadratic(mu, L)
            trace = run(alg, func, x0, 6)
            ratios, excluded = trace.ratios("objective_accuracy")
            assert not excluded and len(ratios) == 6
            assert all(abs(float(r) - float(t_star)) <= 1e-10 for r in ratios)


def test_criterion_2_gd_constant_step():
    with criterion(2, "GD constant step + multiplier sparsification"):
        fclass = FunctionClass(F(1), F(10))
        for gamma in (F(1, 20), F(2, 11), F(19, 100)):
            alg = AlgorithmSpec("gd_constant", gamma=gamma)
            rho = rho_gamma(F(1), F(10), gamma)
            assert abs(_solved_rate(fclass, alg).t - float(rho**2)) <= RATE_TOL
            sdp = build_sos_sdp(build_scenario(fclass, alg))
            sparse = sparsify_multipliers(sdp, float(rho**2))
            assert sparse.ok
            by_name = dict(zip(sdp.sigma_names, sparse.sigma))
            for name in ("h1", "h3", "h4", "h6"):
                assert by_name[name] <= 1e-6
            assert abs(by_name["h2"] - float(2 * gamma * rho)) <= RATE_TOL
            assert abs(by_name["h5"] - float(2 * gamma * rho)) <= RATE_TOL


ARMIJO_GRID = [
    (delta, eps, eta)
    for delta in (F(0), F(1, 10), F(1, 4))
    for eps in (F(1, 10), F(1, 5), F(2, 5))
    for eta in (F(3, 2), F(2), F(3))
]


def test_criterion_3_armijo():
    with criterion(3, "noisy Armijo rule (3x3x3 grid)"):
        fclass = FunctionClass(F(1), F(10))
        cert = catalog("gd_armijo")
        for delta, eps, eta in ARMIJO_GRID:
            alg = AlgorithmSpec("gd_armijo", epsilon=eps, eta=eta, delta=delta)
            t_formula = 1 - (4 * eps * (1 - delta) ** 2 / (eta * 10)) * (
                (1 - delta) / (1 + delta) ** 2 - eps
            )
            assert rate_formula("gd_armijo", fclass, alg) == t_formula
            assert abs(_solved_rate(fclass, alg).t - float(t_formula)) <= RATE_TOL
            assert verify_identity(cert, build_scenario(fclass, alg)).ok


def test_criterion_4_goldstein_and_wolfe():
    with criterion(4, "Goldstein and Wolfe rules"):
        fclass = FunctionClass(F(1), F(10))
        for delta in (F(0), F(1, 10), F(1, 5)):
            for eps in (F(9, 20), F(23, 50), F(12, 25)):
                alg = AlgorithmSpec("gd_goldstein", epsilon=eps, delta=delta)
                t_formula = 1 - (4 * eps * (1 - delta) ** 2 / 10) * (
                    (1 - delta) / (1 + delta) ** 2 - (1 - eps)
                )
                assert rate_formula("gd_goldstein", fclass, alg) == t_formula
                assert abs(_solved_rate(fclass, alg).t - float(t_formula)) <= RATE_TOL
                assert verify_identity(catalog("gd_goldstein"), build_scenario(fclass, alg)).ok
        for c1 in (F(1, 10), F(1, 4), F(2, 5)):
            for c2 in (F(1, 2), F(7, 10), F(9, 10)):
                alg = AlgorithmSpec("gd_wolfe", c1=c1, c2=c2)
                t_formula = 1 - 2 * c1 * (1 - c2) / 10
                assert rate_formula("gd_wolfe", fclass, alg) == t_formula
                assert abs(_solved_rate(fclass, alg).t - float(t_formula)) <= RATE_TOL
                assert verify_identity(catalog("gd_wolfe"), build_scenario(fclass, alg)).ok


def test_criterion_5_pgm_constant_step():
    with criterion(5, "PGM constant step (gradient-norm metric)"):
        fclass = FunctionClass(F(1), F(10), composite=True)
        for gamma in (F(1, 20), F(2, 11), F(19, 100)):
            alg = AlgorithmSpec("pgm_constant", gamma=gamma)
            rho2 = rho_gamma(F(1), F(10), gamma) ** 2
            assert abs(_solved_rate(fclass, alg).t - float(rho2)) <= RATE_TOL
            report = verify_identity(catalog("pgm_constant"), build_scenario(fclass, alg))
            assert report.ok and report.t == rho2


def test_criterion_6_pgm_exact_line_search():
    with criterion(6, "PGM exact line search + 9x9 PSD block"):
        alg = AlgorithmSpec("pgm_els")
        fclass = FunctionClass(F(1), F(10), composite=True)
        assert abs(_solved_rate(fclass, alg).t - float(F(81, 121))) <= RATE_TOL
        for mu, L in ((F(1), F(3)), (F(1), F(10))):
            fc = FunctionClass(mu, L, composite=True)
            report = verify_identity(catalog("pgm_els"), build_scenario(fc, alg))
            assert report.ok and report.t == ((L - mu) / (L + mu)) ** 2
            gram = catalog("pgm_els").gram(fc, alg)
            assert len(gram) == 9
            assert verify_psd(gram, "rational_ldl").is_psd
            assert verify_psd(gram, "charpoly_descartes").is_psd


CANONICAL = [
    AlgorithmSpec("gd_els"),
    AlgorithmSpec("gd_constant", gamma=F(19, 100)),
    AlgorithmSpec("gd_armijo", epsilon=F(1, 4), eta=F(2), delta=F(1, 10)),
    AlgorithmSpec("gd_goldstein", epsilon=F(12, 25), delta=F(1, 10)),
    AlgorithmSpec("gd_wolfe", c1=F(1, 4), c2=F(1, 2)),
    AlgorithmSpec("pgm_constant", gamma=F(19, 100)),
    AlgorithmSpec("pgm_els"),
]


def test_criterion_7_sos_pep_duality():
    with criterion(7, "SOS / estimation-dual equivalence"):
        fclass = FunctionClass(F(1), F(10))
        for alg in CANONICAL:
            prob = build_scenario(fclass, alg)
            t_sos = solve_rate(build_sos_sdp(prob))
            t_dual = solve_rate(build_pep_dual(prob))
            assert t_sos.ok and t_dual.ok, alg.kind
            assert abs(t_sos.t - t_dual.t) <= GAP_TOL, (alg.kind, t_sos.t, t_dual.t)


def test_criterion_8_armijo_comparisons():
    with criterion(8, "Armijo contraction-factor orderings"):
        rng = random.Random(20240811)
        violations = 0
        for _ in range(1000):
            eps = F(rng.randint(1, 999), 1000)
            eta = 1 + F(rng.randint(1, 400), 100)
            kappa = 1 + F(rng.randint(1, 9900), 100)
            comp = compare_armijo(eps, eta, kappa)
            if eps < F(1, 2):
                if not (comp.t_nemi is None and comp.t_new < comp.t_ly):
                    violations += 1
            else:
                if not (comp.t_ly is None and comp.t_new <= comp.t_nemi):
                    violations += 1
        assert violations == 0
        tiny = F(1, 10**6)
        limit = compare_armijo(F(1, 2), 1 + tiny, 1 + tiny)
        assert abs(float(limit.t_new)) <= 1e-4
        assert abs(float(limit.t_nemi) - 0.5) <= 1e-4


def _member_battery(key: str, rng: random.Random):
    """Admissible (fclass, alg, func, x0) draws for one scenario."""
    mu, L = F(1), F(rng.choice([4, 10, 25]))
    fclass = FunctionClass(mu, L)
    if key == "gd_constant":
        alg = AlgorithmSpec(key, gamma=F(rng.randint(1, 19), 10) / L)
    elif key == "pgm_constant":
        alg = AlgorithmSpec(key, gamma=F(rng.randint(1, 19), 10) / L)
    elif key == "gd_armijo":
        delta = rng.choice([F(0), F(1, 10), F(1, 4)])
        alg = AlgorithmSpec(key, epsilon=F(2, 5), eta=F(rng.randint(12, 30), 10), delta=delta)
    elif key == "gd_goldstein":
        delta = rng.choice([F(0), F(1, 10)])
        alg = AlgorithmSpec(key, epsilon=F(12, 25), delta=delta)
    elif key == "gd_wolfe":
        alg = AlgorithmSpec(key, c1=F(rng.randint(1, 4), 10), c2=F(rng.randint(6, 9), 10))
    else:
        alg = AlgorithmSpec(key)
    dim = rng.choice([2, 3])
    spectrum = tuple(sorted(mu + (L - mu) * F(rng.randint(0, 8), 8) for _ in range(dim)))
    shift = tuple(F(rng.randint(-3, 3)) for _ in range(dim))
    if key.startswith("pgm"):
        lam = rng.choice([F(0), F(1, 3), F(1, 2)]) if key == "pgm_els" else F(rng.randint(0, 2), 3)
        func = TestFunction("composite", spectrum, shift, lam=lam)
    else:
        func = TestFunction("quadratic", spectrum, shift)
    rational = alg.kind in ("gd_constant", "gd_els") or (
        alg.kind == "pgm_constant" or (alg.kind == "pgm_els" and not func.lam)
    )
    if rational:
        x0 = tuple(F(rng.randint(-40, 40), 8) for _ in range(dim))
    else:
        x0 = tuple(rng.uniform(-5.0, 5.0) for _ in range(dim))
    return fclass, alg, func, x0


def test_criterion_9a_lifting_dimensions():
    with criterion(9, "property suites (lifting, audits, PSD agreement)"):
        # (a) a certificate solved once is valid on runs in n = 1, 2, 3
        fclass = FunctionClass(F(1), F(10))
        for alg, metric in (
            (AlgorithmSpec("gd_els"), "objective_accuracy"),
            (AlgorithmSpec("gd_constant", gamma=F(19, 100)), "distance_squared"),
            (AlgorithmSpec("pgm_constant", gamma=F(19, 100)), "gradient_norm_squared"),
        ):
            prob = build_scenario(fclass, alg)
            res = solve_rate(build_sos_sdp(prob))
            assert res.ok
            for n in (1, 2, 3):
                spectrum = tuple([F(1), F(10), F(5)][:n])
                shift = (F(0),) * n
                if alg.kind.startswith("pgm"):
                    func = TestFunction("composite", spectrum, shift, lam=F(1, 3))
                else:
                    func = TestFunction("quadratic", spectrum, shift)
                x0 = tuple(F(i + 2) for i in range(n))
                trace = run(alg, func, x0, 4)
                audit = constraint_audit(trace, prob, tol=1e-9)
                assert audit.clean, (alg.kind, n, audit.violations)
                bound = check_against_bound(trace, res.t, metric, tol=10 * 1e-8)
                assert bound.passed, (alg.kind, n, bound.max_ratio)

        # (b) >= 100 randomized runs per scenario, zero constraint violations
        for key in (
            "gd_constant",
            "gd_els",
            "gd_armijo",
            "gd_goldstein",
            "gd_wolfe",
            "pgm_constant",
            "pgm_els",
        ):
            rng = random.Random(zlib.crc32(key.encode()))
            clean_runs = 0
            for i in range(100):
                fclass, alg, func, x0 = _member_battery(key, rng)
                prob = build_scenario(fclass, alg)
                trace = run(alg, func, x0, 3, seed=i, noise=("axis" if i % 2 else "random"))
                tol = 0 if trace.exact else 1e-9
                audit = constraint_audit(trace, prob, tol=tol)
                assert audit.clean, (key, i, audit.violations)
                clean_runs += 1
                t_bound = rate_formula(key, fclass, alg)
                rep = check_against_bound(trace, float(t_bound), prob.metric.kind, tol=1e-8)
                assert rep.passed, (key, i, rep.max_ratio, float(t_bound))
            assert clean_runs == 100

        # (c) the two exact PSD checks agree on random symmetric matrices,
        # including rank-deficient Gram constructions
        rng = random.Random(7)
        agreements = 0
        for _ in range(150):
            n = rng.randint(2, 9)
            m = [[F(0)] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    m[i][j] = m[j][i] = F(rng.randint(-6, 6), rng.randint(1, 4))
            assert verify_psd(m, "rational_ldl").is_psd == verify_psd(m, "charpoly_descartes").is_psd
            agreements += 1
        for _ in range(50):
            n = rng.randint(2, 9)
            r = rng.randint(0, n - 1)  # deliberately rank deficient
            rows = [[F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)] for _ in range(r)]
            gram = [[sum(row[i] * row[j] for row in rows) for j in range(n)] for i in range(n)]
            assert verify_psd(gram, "rational_ldl").is_psd
            assert verify_psd(gram, "charpoly_descartes").is_psd
            agreements += 1
        assert agreements == 200
