"""Contraction-rate certificates for first-order convex optimization.

The package computes worst-case per-step contraction factors of
gradient and proximal-gradient methods on smooth strongly convex
(optionally composite) problems by searching for degree-1
sum-of-squares certificates as small structured SDPs, and verifies the
known closed-form certificates exactly in rational arithmetic.

Modules:
    polyform    exact algebra for the structured polynomials
    scenarios   constraint generation per (class, algorithm, metric)
    certsearch  SOS -> SDP reduction, solve, sparsify, estimation dual
    certify     analytic certificates, exact identity and PSD checks
    oracle      run the real algorithms, audit constraints, check bounds
    cli         batch interface (rate / verify / sweep / simulate)
"""

from .polyform import (
    CatalogError,
    CoefficientKey,
    StructuredPolynomial,
    VarCatalog,
    as_fraction,
    combine,
    evaluate,
    expand_univariate,
    from_gram_matrix,
    from_text,
    substitute_vector,
    to_text,
)
from .scenarios import (
    AlgorithmSpec,
    FunctionClass,
    Metric,
    RateProblem,
    ScenarioError,
    algorithm_constraints,
    build_scenario,
    convex_interpolability,
    interpolability,
)
from .certsearch import (
    RateResult,
    SdpProblem,
    build_pep_dual,
    build_sos_sdp,
    certificate_residual,
    dump_sdp,
    solve_rate,
    sparsify_multipliers,
)
from .certify import (
    AnalyticCertificate,
    CertificateError,
    PsdVerdict,
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
from .oracle import (
    AuditReport,
    BoundReport,
    OracleError,
    RunTrace,
    TestFunction,
    check_against_bound,
    constraint_audit,
    run,
    trace_to_csv,
    worst_curvature_quadratic,
    zigzag_quadratic,
)

__version__ = "0.1.0"
