import logging

import numpy as np

from ..environment import Cell
from ..trajectory import ReferenceSystem, hull_bounds
from .combined import build_combined, closed_loop_matrix, convergence_constraint, sym
from .safety import (
    barrier_faces,
    closed_loop_face_matrix,
    face_dual_value,
    face_primal_max,
    reference_term,
    require_bounded,
    state_samples,
)
from .types import AgentSystem, FaceCertificate, GainMatrix, SynthesisCertificate, SynthesisConfig

__all__ = ["verify"]

logger = logging.getLogger(__name__)


def verify(
    K: GainMatrix,
    cell: Cell,
    agent: AgentSystem,
    ref: ReferenceSystem,
    config: SynthesisConfig | None = None,
    ref_vertices: np.ndarray | None = None,
) -> SynthesisCertificate:
    """Recompute convergence and barrier margins from ``K`` alone."""
    config = config or SynthesisConfig()
    require_bounded(cell)
    cs = build_combined(agent, ref, config.time_scale)
    F = closed_loop_matrix(cs, K)

    # error dynamics e' = G_hat e, exact when F keeps ker E invariant
    G_hat = cs.E @ F @ np.linalg.pinv(cs.E)
    invariance_residual = float(np.max(np.abs(cs.E @ F - G_hat @ cs.E)))
    if config.mode == "exponential":
        mu = float(np.max(np.linalg.eigvalsh(sym(G_hat))))
    else:
        mu = float(np.max(np.linalg.eigvalsh(convergence_constraint(cs, K, 0.0, "paper"))))
    lmi_max_eig = float(np.max(np.linalg.eigvalsh(convergence_constraint(cs, K, mu, config.mode))))

    if ref_vertices is None:
        ref_vertices = hull_bounds(cell.segment).state_vertices()
    samples = state_samples(cell.polytope, config.grid_resolution, config.num_samples)
    W = closed_loop_face_matrix(agent, K, config.alpha)

    faces = []
    for face in barrier_faces(cell):
        rhs = config.alpha * face.b_h - config.delta
        x_term = float(np.max(samples @ (-face.A_h @ W)))
        p_term, gamma = reference_term(face, agent, K, ref_vertices)
        dual_value, lam = face_dual_value(face, cell.polytope, W)
        faces.append(
            FaceCertificate(
                index=face.index,
                primal_residual=x_term + p_term - rhs,
                dual_value=dual_value,
                primal_value=face_primal_max(face, cell.polytope, W),
                dual_lambda=lam,
                gamma=gamma,
            )
        )

    certificate = SynthesisCertificate(
        mode=config.mode,
        mu=mu,
        lmi_max_eig=lmi_max_eig,
        invariance_residual=invariance_residual,
        faces=faces,
        k_max_abs=K.max_abs,
        k_bound=config.k_max,
        tol=config.certificate_tol,
    )
    logger.debug(f"Verified cell {cell.id}: {certificate.summary()}")
    return certificate
