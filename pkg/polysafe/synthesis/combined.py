import logging

import numpy as np
from scipy.linalg import block_diag

from ..trajectory import ReferenceSystem
from .types import AgentSystem, CombinedSystem, GainMatrix

__all__ = [
    "build_combined",
    "closed_loop_matrix",
    "convergence_constraint",
    "relative_degree_ok",
    "stability_matrix",
    "sym",
    "tracking_gain",
]

logger = logging.getLogger(__name__)

RELATIVE_DEGREE_TOL = 1e-12


def sym(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def build_combined(agent: AgentSystem, ref: ReferenceSystem, time_scale: float = 1.0) -> CombinedSystem:
    """Stack the agent and reference dynamics.

    The reference runs on spline parameter ``s = t / time_scale``, so its block of ``Q`` is
    ``A_p / time_scale``. ``M = E^T E`` with ``E = [C, -C_p]`` makes
    ``V = ||C x - C_p x_p||^2``.
    """
    if agent.d_y != ref.output_dim:
        raise ValueError(f"agent output dimension {agent.d_y} != reference output dimension {ref.output_dim}")
    zero = np.zeros((ref.state_dim, agent.d_u))
    E = np.hstack([agent.C, -ref.C_p])
    return CombinedSystem(
        agent=agent,
        ref=ref,
        Q=block_diag(agent.A, ref.A_p / time_scale),
        Bc=np.vstack([agent.B, zero]),
        Cc=block_diag(agent.C, np.eye(ref.state_dim)),
        E=E,
        M=E.T @ E,
        time_scale=time_scale,
    )


def relative_degree_ok(cs: CombinedSystem) -> bool:
    return bool(np.any(np.abs(cs.M @ cs.Bc) > RELATIVE_DEGREE_TOL))


def closed_loop_matrix(cs: CombinedSystem, K: GainMatrix) -> np.ndarray:
    assert K.K.shape == cs.gain_shape, f"{K.K.shape=} {cs.gain_shape=}"
    return cs.Q + cs.Bc @ K.K @ cs.Cc


def stability_matrix(cs: CombinedSystem, K: GainMatrix) -> np.ndarray:
    """``S = sym((M + M^T)^T F)`` so that ``d/dt z^T M z = z^T S z``."""
    F = closed_loop_matrix(cs, K)
    return sym((cs.M + cs.M.T).T @ F)


def convergence_constraint(cs: CombinedSystem, K: GainMatrix, mu: float, mode: str) -> np.ndarray:
    """LMI residual; the constraint holds iff its largest eigenvalue is <= 0."""
    S = stability_matrix(cs, K)
    if mode == "paper":
        return S - mu * np.eye(cs.d_n)
    if mode == "exponential":
        return S - 2.0 * mu * cs.M
    raise ValueError(f"unknown convergence mode {mode!r}")


def tracking_gain(cs: CombinedSystem, G: np.ndarray, tol: float = 1e-8) -> GainMatrix:
    """Gain whose tracking error obeys ``e' = G e``.

    Solves ``E F(K) = G E`` for ``K`` through the pseudo-inverses of ``C B`` and ``C``.
    """
    agent, ref = cs.agent, cs.ref
    G = np.atleast_2d(np.asarray(G, dtype=float))
    CB_pinv = np.linalg.pinv(agent.C @ agent.B)
    K_y = CB_pinv @ (G @ agent.C - agent.C @ agent.A) @ np.linalg.pinv(agent.C)
    K_p = CB_pinv @ (ref.C_p @ ref.A_p / cs.time_scale - G @ ref.C_p)
    K = GainMatrix.from_parts(K_y, K_p)
    residual = np.linalg.norm(cs.E @ closed_loop_matrix(cs, K) - G @ cs.E)
    if residual > tol:
        raise ValueError(f"no gain realizes the requested error dynamics ({residual=:.3g})")
    return K
