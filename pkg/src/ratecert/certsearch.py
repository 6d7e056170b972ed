"""Search for the smallest certifiable contraction factor via SDP.

`build_sos_sdp` turns a `RateProblem` into the small structured SDP:
one linear coefficient-matching row per scalar symbol, and one PSD
block indexed by the vector symbols (the certificate's Gram matrix).
`build_pep_dual` constructs the equivalent worst-case-estimation dual
SDP from the same constraint data; the two optima agreeing is a strong
end-to-end check of the reduction.

Everything upstream of this module is exact rational arithmetic; the
float conversion happens here, at the solver boundary.  Solves use
CLARABEL with an SCS fallback.  Infeasibility and numerical failure are
reported as such, never papered over with a fabricated rate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .polyform import StructuredPolynomial
from .scenarios import RateProblem


class SdpBuildError(ValueError):
    """Raised when a RateProblem cannot be reduced to the structured SDP."""


@dataclass(frozen=True)
class SdpProblem:
    """Structured SDP data, affine in the decision vector (t, sigma, theta).

    Linear rows (one per scalar symbol s):
        t*a_t[s] + a_sigma[s]@sigma + a_theta[s]@theta == rhs[s]
    PSD block (indexed by vector symbols):
        G(t, sigma, theta) = p_0 + t*p_t + sum_i sigma_i*p_sigma[i]
                                          + sum_j theta_j*p_theta[j]
    For psd_sense=+1 the constraint is G >= 0 and G is the certificate's
    Gram block; for psd_sense=-1 (the estimation dual) it is G <= 0 and
    -G is the Gram block.  `t_nonneg` adds the dual's explicit t >= 0.
    """

    scenario_key: str
    scalar_names: tuple[str, ...]
    vector_names: tuple[str, ...]
    sigma_names: tuple[str, ...]
    theta_names: tuple[str, ...]
    a_t: np.ndarray
    a_sigma: np.ndarray
    a_theta: np.ndarray
    rhs: np.ndarray
    p_t: np.ndarray
    p_0: np.ndarray
    p_sigma: np.ndarray
    p_theta: np.ndarray
    psd_sense: int = 1
    t_nonneg: bool = False
    objective_scale: float = 1.0  # dual minimizes t*R; R = 1 by default

    @property
    def psd_block_dim(self) -> int:
        return len(self.vector_names)

    @property
    def num_sigma(self) -> int:
        return len(self.sigma_names)

    @property
    def num_theta(self) -> int:
        return len(self.theta_names)


@dataclass
class RateResult:
    """Outcome of one SDP solve.

    residuals carries max_equality_violation and min_gram_eigenvalue of
    the recovered certificate; both are ~0 for a clean optimal solve.
    """

    solver_status: str  # "optimal" | "infeasible" | "numerical_trouble"
    t: float | None = None
    sigma: np.ndarray | None = None
    theta: np.ndarray | None = None
    gram_block: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)
    solver_name: str = ""

    @property
    def ok(self) -> bool:
        return self.solver_status == "optimal"


def _lin_vector(poly: StructuredPolynomial, scalars: tuple[str, ...]) -> np.ndarray:
    return np.array([float(poly.linear.get(s, 0)) for s in scalars])


def _gram_array(poly: StructuredPolynomial) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in poly.gram_matrix()])


def build_sos_sdp(problem: RateProblem) -> SdpProblem:
    """Reduce the certificate identity to coefficient-matching form.

    The identity  t*m_k - m_{k+1} = Gram(Q) + sum sigma_i h_i + sum theta_j v_j
    splits (by the separable shape of every polynomial) into one linear
    row per scalar symbol and one matrix equation defining Q, which must
    be PSD.  Constraints with nonzero constant terms are rejected.
    """
    scalars = problem.catalog.scalars
    m_k, m_k1 = problem.metric_pair
    for name, poly in list(problem.inequalities) + list(problem.equalities):
        if poly.constant:
            raise SdpBuildError(f"constraint {name} has a nonzero constant term")
    if m_k.constant or m_k1.constant:
        raise SdpBuildError("metric polynomials must have zero constant term")

    h_polys = [p for _, p in problem.inequalities]
    v_polys = [p for _, p in problem.equalities]
    m, mp = len(h_polys), len(v_polys)
    dim = len(problem.catalog.vectors)

    a_t = _lin_vector(m_k, scalars)
    rhs = _lin_vector(m_k1, scalars)
    a_sigma = np.column_stack([-_lin_vector(p, scalars) for p in h_polys]) if m else np.zeros((len(scalars), 0))
    a_theta = np.column_stack([-_lin_vector(p, scalars) for p in v_polys]) if mp else np.zeros((len(scalars), 0))

    p_t = _gram_array(m_k)
    p_0 = -_gram_array(m_k1)
    p_sigma = np.array([-_gram_array(p) for p in h_polys]).reshape(m, dim, dim)
    p_theta = np.array([-_gram_array(p) for p in v_polys]).reshape(mp, dim, dim)

    return SdpProblem(
        scenario_key=problem.scenario_key,
        scalar_names=scalars,
        vector_names=problem.catalog.vectors,
        sigma_names=tuple(n for n, _ in problem.inequalities),
        theta_names=tuple(n for n, _ in problem.equalities),
        a_t=a_t,
        a_sigma=a_sigma,
        a_theta=a_theta,
        rhs=rhs,
        p_t=p_t,
        p_0=p_0,
        p_sigma=p_sigma,
        p_theta=p_theta,
        psd_sense=1,
        t_nonneg=False,
    )


def build_pep_dual(problem: RateProblem, R: float = 1.0) -> SdpProblem:
    """Dual of the one-step worst-case estimation SDP, normalized at R.

    Built directly from the <c_i, f> + <C_i, G> representation of each
    constraint: the multiplier aggregate must cancel the metric's linear
    part and push its Gram part negative semidefinite.  Its feasible set
    coincides with `build_sos_sdp`'s up to the sign of the PSD map.
    """
    scalars = problem.catalog.scalars
    m_k, m_k1 = problem.metric_pair
    h_polys = [p for _, p in problem.inequalities]
    v_polys = [p for _, p in problem.equalities]
    m, mp = len(h_polys), len(v_polys)
    dim = len(problem.catalog.vectors)

    # linear rows: lin(m_k1) - t*lin(m_k) + sum sigma_i c_i + sum theta_j d_j = 0
    a_t = -_lin_vector(m_k, scalars)
    rhs = -_lin_vector(m_k1, scalars)
    a_sigma = np.column_stack([_lin_vector(p, scalars) for p in h_polys]) if m else np.zeros((len(scalars), 0))
    a_theta = np.column_stack([_lin_vector(p, scalars) for p in v_polys]) if mp else np.zeros((len(scalars), 0))

    # PSD map: C(m_k1) - t*C(m_k) + sum sigma_i C_i + sum theta_j D_j <= 0
    p_t = -_gram_array(m_k)
    p_0 = _gram_array(m_k1)
    p_sigma = np.array([_gram_array(p) for p in h_polys]).reshape(m, dim, dim)
    p_theta = np.array([_gram_array(p) for p in v_polys]).reshape(mp, dim, dim)

    return SdpProblem(
        scenario_key=problem.scenario_key,
        scalar_names=scalars,
        vector_names=problem.catalog.vectors,
        sigma_names=tuple(n for n, _ in problem.inequalities),
        theta_names=tuple(n for n, _ in problem.equalities),
        a_t=a_t,
        a_sigma=a_sigma,
        a_theta=a_theta,
        rhs=rhs,
        p_t=p_t,
        p_0=p_0,
        p_sigma=p_sigma,
        p_theta=p_theta,
        psd_sense=-1,
        t_nonneg=True,
        objective_scale=float(R),
    )


_STATUS_MAP = {
    "optimal": "optimal",
    "infeasible": "infeasible",
    "unbounded": "numerical_trouble",
    "optimal_inaccurate": "numerical_trouble",
    "infeasible_inaccurate": "numerical_trouble",
    "unbounded_inaccurate": "numerical_trouble",
}


def _solve_conic(sdp: SdpProblem, objective: str, t_fixed: float | None, tol: float) -> RateResult:
    import cvxpy as cp

    m, mp = sdp.num_sigma, sdp.num_theta
    t = cp.Variable(name="t")
    sigma = cp.Variable(m, nonneg=True, name="sigma") if m else None
    theta = cp.Variable(mp, name="theta") if mp else None

    expr = cp.Constant(sdp.p_0) + t * sdp.p_t
    for i in range(m):
        expr = expr + sigma[i] * sdp.p_sigma[i]
    for j in range(mp):
        expr = expr + theta[j] * sdp.p_theta[j]

    rows = sdp.a_t * t
    if m:
        rows = rows + sdp.a_sigma @ sigma
    if mp:
        rows = rows + sdp.a_theta @ theta
    constraints = [rows == sdp.rhs]
    constraints.append(expr >> 0 if sdp.psd_sense > 0 else expr << 0)
    if sdp.t_nonneg:
        constraints.append(t >= 0)

    if objective == "rate":
        goal = cp.Minimize(sdp.objective_scale * t)
    elif objective == "sparsify":
        if t_fixed is None:
            raise SdpBuildError("sparsify needs a fixed contraction factor")
        if sigma is None:
            raise SdpBuildError("sparsify needs at least one inequality multiplier")
        constraints.append(t == t_fixed)
        goal = cp.Minimize(cp.sum(sigma))
    else:
        raise SdpBuildError(f"unknown objective {objective!r}")

    prob = cp.Problem(goal, constraints)
    solver_name = ""
    for solver, opts in (
        (cp.CLARABEL, dict(tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol)),
        (cp.SCS, dict(eps=tol, max_iters=200_000)),
    ):
        try:
            with warnings.catch_warnings():
                # inaccurate-solution warnings are expected on the first
                # attempt; the status check below retries with the next solver
                warnings.simplefilter("ignore", UserWarning)
                prob.solve(solver=solver, **opts)
            solver_name = str(solver)
        except Exception:
            continue
        if prob.status in ("optimal", "infeasible"):
            break

    status = _STATUS_MAP.get(prob.status, "numerical_trouble")
    if status != "optimal":
        return RateResult(solver_status=status, solver_name=solver_name)

    sig_val = np.asarray(sigma.value).reshape(m) if m else np.zeros(0)
    th_val = np.asarray(theta.value).reshape(mp) if mp else np.zeros(0)
    gram = np.asarray(expr.value)
    gram = 0.5 * (gram + gram.T)
    if sdp.psd_sense < 0:
        gram = -gram
    row_val = sdp.a_t * float(t.value) + sdp.a_sigma @ sig_val
    if mp:
        row_val = row_val + sdp.a_theta @ th_val
    residuals = {
        "max_equality_violation": float(np.max(np.abs(row_val - sdp.rhs))) if len(sdp.rhs) else 0.0,
        "min_gram_eigenvalue": float(np.min(np.linalg.eigvalsh(gram))),
    }
    # an "optimal" flag only counts if the recovered certificate actually
    # closes to tolerance
    if residuals["max_equality_violation"] > 100 * tol or residuals["min_gram_eigenvalue"] < -100 * tol:
        return RateResult(solver_status="numerical_trouble", residuals=residuals, solver_name=solver_name)
    return RateResult(
        solver_status="optimal",
        t=float(t.value),
        sigma=sig_val,
        theta=th_val,
        gram_block=gram,
        residuals=residuals,
        solver_name=solver_name,
    )


def solve_rate(sdp: SdpProblem, tol: float = 1e-8) -> RateResult:
    """Minimize the contraction factor t.

    t enters every constraint affinely, so a single conic solve
    suffices; no bisection.  An infeasible status means no degree-1
    certificate exists for these constraints.
    """
    return _solve_conic(sdp, "rate", None, tol)


def sparsify_multipliers(sdp: SdpProblem, t_fixed: float, tol: float = 1e-8) -> RateResult:
    """Minimize sum(sigma) at a fixed contraction factor.

    Used to recover the sparse analytic multiplier patterns once the
    optimal t is known; t_fixed must be feasible (the solve_rate optimum
    plus a little slack, or the exact analytic value).
    """
    return _solve_conic(sdp, "sparsify", float(t_fixed), tol)


def certificate_residual(sdp: SdpProblem, result: RateResult) -> float:
    """Reassemble the certificate identity from a numeric result and
    report the worst coefficient mismatch (linear rows and Gram block)."""
    if not result.ok:
        raise SdpBuildError("no certificate to check: solve was not optimal")
    row_val = sdp.a_t * result.t + sdp.a_sigma @ result.sigma
    if sdp.num_theta:
        row_val = row_val + sdp.a_theta @ result.theta
    lin_res = np.max(np.abs(row_val - sdp.rhs)) if len(sdp.rhs) else 0.0
    g = sdp.p_0 + result.t * sdp.p_t
    for i in range(sdp.num_sigma):
        g = g + result.sigma[i] * sdp.p_sigma[i]
    for j in range(sdp.num_theta):
        g = g + result.theta[j] * sdp.p_theta[j]
    if sdp.psd_sense < 0:
        g = -g
    gram_res = np.max(np.abs(g - result.gram_block))
    return float(max(lin_res, gram_res))


def dump_sdp(sdp: SdpProblem) -> str:
    """Sparse text dump (objective, equality rows, PSD block) for
    cross-solver debugging."""
    lines = [
        f"sdp {sdp.scenario_key}",
        f"sense {'psd' if sdp.psd_sense > 0 else 'nsd'}",
        f"vars t sigma {sdp.num_sigma} theta {sdp.num_theta}",
        f"objective min t scale {sdp.objective_scale!r}",
        f"rows {len(sdp.scalar_names)}",
    ]
    for r, name in enumerate(sdp.scalar_names):
        entries = [f"t {sdp.a_t[r]!r}"]
        entries += [f"sigma{i} {sdp.a_sigma[r, i]!r}" for i in range(sdp.num_sigma) if sdp.a_sigma[r, i]]
        entries += [f"theta{j} {sdp.a_theta[r, j]!r}" for j in range(sdp.num_theta) if sdp.a_theta[r, j]]
        lines.append(f"row {name} " + " ".join(entries) + f" == {sdp.rhs[r]!r}")
    lines.append(f"psd dim {sdp.psd_block_dim}")

    def emit(tag: str, mat: np.ndarray):
        for i in range(mat.shape[0]):
            for j in range(i, mat.shape[1]):
                if mat[i, j]:
                    lines.append(f"psd {tag} {i} {j} {mat[i, j]!r}")

    emit("const", sdp.p_0)
    emit("t", sdp.p_t)
    for k in range(sdp.num_sigma):
        emit(f"sigma{k}", sdp.p_sigma[k])
    for k in range(sdp.num_theta):
        emit(f"theta{k}", sdp.p_theta[k])
    return "\n".join(lines)
