import logging
from time import perf_counter

import cvxpy as cp
import numpy as np
from scipy.linalg import block_diag

from ..environment import Cell
from ..trajectory import ReferenceSystem, hull_bounds
from .combined import build_combined, convergence_constraint, relative_degree_ok
from .safety import barrier_faces, face_primal_max, require_bounded, safety_constraints
from .types import (
    AgentSystem,
    CombinedSystem,
    GainMatrix,
    RelativeDegreeError,
    SolverFailureError,
    SynthesisCertificate,
    SynthesisConfig,
    SynthesisInfeasibleError,
)
from .verify import verify

__all__ = ["assemble_axis_gains", "diagnose_infeasibility", "synthesize", "synthesize_decomposed"]

logger = logging.getLogger(__name__)

_SOLVED = ("optimal", "optimal_inaccurate")
_INFEASIBLE = ("infeasible", "infeasible_inaccurate")


def _check_inputs(cell: Cell, agent: AgentSystem, ref: ReferenceSystem):
    if cell.polytope.dimension != agent.d:
        raise ValueError(f"cell {cell.id!r} has dimension {cell.polytope.dimension}, agent state has {agent.d}")
    if cell.segment.dimension != ref.output_dim or cell.segment.degree != ref.degree:
        raise ValueError(f"cell {cell.id!r} segment does not match the reference system")
    require_bounded(cell)


def diagnose_infeasibility(cell: Cell, agent: AgentSystem, config: SynthesisConfig) -> int | None:
    """First face whose barrier condition fails for the open-loop agent (``K = 0``)."""
    W = agent.A + config.alpha * np.eye(agent.d)
    for face in barrier_faces(cell):
        if face_primal_max(face, cell.polytope, W) > config.alpha * face.b_h - config.delta:
            return face.index
    return None


def _gain_variables(cs: CombinedSystem) -> tuple[cp.Variable, cp.Variable, cp.Expression]:
    d_u, d_y = cs.agent.d_u, cs.agent.d_y
    K_y = cp.Variable((d_u, d_y), name="K_y")
    K_p = cp.Variable((d_u, cs.ref.state_dim), name="K_p")
    return K_y, K_p, cp.hstack([K_y, K_p])


def _convergence_constraints(cs: CombinedSystem, K: cp.Expression, mu: cp.Variable, mode: str) -> list[cp.Constraint]:
    F = cs.Q + cs.Bc @ K @ cs.Cc
    d_y = cs.agent.d_y
    G = cp.Variable((d_y, d_y), name="G")
    # S = E^T (G + G^T) E whenever F keeps ker E invariant, so the exponential LMI
    # S <= 2 mu M reduces to sym(G) <= mu I
    constraints = [cs.E @ F == G @ cs.E, mu <= 0]
    if mode == "exponential":
        N = cp.Variable((d_y, d_y), symmetric=True, name="N")
        constraints += [N == 0.5 * (G + G.T) - mu * np.eye(d_y), N << 0]
    else:
        N = cp.Variable((cs.d_n, cs.d_n), symmetric=True, name="N")
        constraints += [N == cs.M @ F + F.T @ cs.M - mu * np.eye(cs.d_n), N << 0]
    return constraints


def _solver_options(config: SynthesisConfig) -> dict:
    if config.solver == "CLARABEL":
        return {"tol_feas": config.feasibility_tol, "tol_gap_abs": config.gap_tol, "tol_gap_rel": config.gap_tol}
    if config.solver == "SCS":
        return {"eps_abs": config.gap_tol, "eps_rel": config.feasibility_tol}
    return {}


def _solve(problem: cp.Problem, config: SynthesisConfig) -> str:
    try:
        problem.solve(solver=config.solver, **_solver_options(config))
    except cp.error.SolverError as e:
        raise SolverFailureError(f"conic solver {config.solver} failed: {e}") from e
    return problem.status


def synthesize(
    cell: Cell,
    agent: AgentSystem,
    ref: ReferenceSystem,
    config: SynthesisConfig | None = None,
) -> tuple[GainMatrix, SynthesisCertificate]:
    """Solve ``min mu`` over convergence, barrier and gain-bound constraints for one cell.

    The returned certificate is recomputed from ``K`` alone by :func:`verify`.
    """
    config = config or SynthesisConfig()
    _check_inputs(cell, agent, ref)
    cs = build_combined(agent, ref, config.time_scale)
    if not relative_degree_ok(cs):
        raise RelativeDegreeError(f"cell {cell.id!r}: M @ Bc vanishes, the input does not reach V'")

    ref_vertices = hull_bounds(cell.segment).state_vertices()
    K_y, K_p, K = _gain_variables(cs)
    mu = cp.Variable(name="mu")
    constraints = _convergence_constraints(cs, K, mu, config.mode)
    safety, _ = safety_constraints(cell, agent, ref_vertices, K_y, K_p, config)
    constraints += safety
    constraints.append(cp.abs(K) <= config.k_max)

    problem = cp.Problem(cp.Minimize(mu), constraints)
    start = perf_counter()
    status = _solve(problem, config)
    elapsed = perf_counter() - start
    logger.info(f"Cell {cell.id}: {status=} mu={mu.value} mode={config.mode} ({elapsed:.2f}s)")

    if status in _INFEASIBLE:
        face = diagnose_infeasibility(cell, agent, config)
        raise SynthesisInfeasibleError(
            f"cell {cell.id!r}: synthesis infeasible ({status}), first violated face under K=0: {face}",
            cell_id=cell.id,
            face_index=face,
            status=status,
        )
    if status not in _SOLVED or K.value is None:
        raise SolverFailureError(f"cell {cell.id!r}: solver returned {status}")

    gain = GainMatrix(np.array(K.value), agent.d_y)
    certificate = verify(gain, cell, agent, ref, config, ref_vertices=ref_vertices)
    certificate.solver_status = status
    certificate.solver_mu = float(mu.value)
    if not certificate.passed:
        logger.warning(f"Cell {cell.id}: solver gain does not certify: {certificate.summary()}")
    return gain, certificate


def _axis_convergence(
    agent: AgentSystem, ref: ReferenceSystem, config: SynthesisConfig, mu_target: float | None
) -> tuple[np.ndarray, float]:
    cs = build_combined(agent, ref, config.time_scale)
    if not relative_degree_ok(cs):
        raise RelativeDegreeError("axis subsystem has M @ Bc = 0")
    _, _, K = _gain_variables(cs)
    mu = cp.Variable(name="mu")
    constraints = _convergence_constraints(cs, K, mu, config.mode)
    constraints.append(cp.abs(K) <= config.k_max)
    if mu_target is None:
        objective = cp.Minimize(mu)
    else:
        constraints.append(mu <= mu_target)
        objective = cp.Minimize(cp.max(cp.abs(K)))
    problem = cp.Problem(objective, constraints)
    status = _solve(problem, config)
    if status not in _SOLVED or K.value is None:
        raise SynthesisInfeasibleError(f"axis convergence problem {status}", status=status)
    return np.array(K.value), float(mu.value)


def assemble_axis_gains(axis_gains: list[np.ndarray]) -> GainMatrix:
    """``K = [blkdiag(K_y1, ..., K_yk), blkdiag(K_p1, ..., K_pk)]``."""
    K_y = block_diag(*[K[:, :1] for K in axis_gains])
    K_p = block_diag(*[K[:, 1:] for K in axis_gains])
    return GainMatrix.from_parts(K_y, K_p)


def synthesize_decomposed(
    cell: Cell,
    agent: AgentSystem,
    ref: ReferenceSystem,
    config: SynthesisConfig | None = None,
    mu: float | None = None,
) -> tuple[GainMatrix, SynthesisCertificate]:
    """Per-axis convergence synthesis composed block-diagonally.

    With ``mu=None`` the shared rate is the largest (least negative) per-axis optimum; otherwise each
    axis looks for the smallest gain reaching ``mu``. The composed gain is checked against the joint
    convergence LMI and the joint barrier constraints; if either fails the joint problem is solved.
    """
    config = config or SynthesisConfig()
    _check_inputs(cell, agent, ref)
    if not agent.is_axis_decomposed:
        raise ValueError("synthesize_decomposed needs an axis-decomposed agent")

    axes = range(agent.d_y)
    if mu is None:
        solved = [_axis_convergence(agent.axis(k), ref.axis(k), config, None) for k in axes]
        mu = max(m for _, m in solved)
        gains = [K for K, _ in solved]
        logger.info(f"Cell {cell.id}: per-axis rates {[m for _, m in solved]}, shared {mu=}")
    else:
        gains = [_axis_convergence(agent.axis(k), ref.axis(k), config, mu)[0] for k in axes]

    gain = assemble_axis_gains(gains)
    cs = build_combined(agent, ref, config.time_scale)
    lmi = float(np.max(np.linalg.eigvalsh(convergence_constraint(cs, gain, mu, config.mode))))
    certificate = verify(gain, cell, agent, ref, config)
    certificate.solver_status = "decomposed"
    certificate.solver_mu = mu
    if lmi <= config.certificate_tol and certificate.passed:
        return gain, certificate

    logger.warning(f"Cell {cell.id}: composed gain rejected ({lmi=:.3g}, {certificate.violated_faces=}), solving jointly")
    return synthesize(cell, agent, ref, config)
