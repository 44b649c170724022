"""Dualized control-barrier constraints for one cell.

Each face ``i`` gives ``h_i(x) = A_h x + b_h`` with ``A_h = -a_i`` and ``b_h = b_i``. Requiring
``h' + alpha h >= delta`` over the cell and the reference-state set is

    max_x  -A_h W x  +  max_{x_p}  -A_h B K_p x_p   <=  alpha b_h - delta,   W = A + B K_y C + alpha I.

The ``x`` term is replaced by its LP dual (``lambda >= 0``, ``A_z^T lambda = (-A_h W)^T``, value
``b_z^T lambda``), which is linear in ``K_y``; the ``x_p`` term is a maximum of a linear function
over a polytope and is written as one inequality per reference-state vertex.
"""

import logging

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from ..environment import Cell, Polytope
from .types import AgentSystem, BarrierFace, GainMatrix, SynthesisConfig, UnboundedCellError

__all__ = [
    "barrier_faces",
    "closed_loop_face_matrix",
    "face_dual_value",
    "face_primal_max",
    "reference_term",
    "require_bounded",
    "safety_constraints",
    "state_samples",
]

logger = logging.getLogger(__name__)


def require_bounded(cell: Cell):
    if not cell.polytope.is_bounded():
        lower, upper = cell.polytope.bounding_box()
        raise UnboundedCellError(
            f"cell {cell.id!r} is unbounded (bounding box {lower.tolist()} to {upper.tolist()}), barrier faces cannot certify it",
            cell_id=cell.id,
        )


def barrier_faces(cell: Cell) -> list[BarrierFace]:
    poly = cell.polytope
    return [BarrierFace(A_h=-poly.A[i].copy(), b_h=float(poly.b[i]), index=i) for i in range(poly.num_faces)]


def closed_loop_face_matrix(agent: AgentSystem, K: GainMatrix, alpha: float) -> np.ndarray:
    """``W = A + B K_y C + alpha I``."""
    return agent.A + agent.B @ K.K_y @ agent.C + alpha * np.eye(agent.d)


def face_primal_max(face: BarrierFace, polytope: Polytope, W: np.ndarray) -> float:
    """``max_x -A_h W x`` over the polytope, by enumerating its vertices."""
    vertices = polytope.vertices()
    if vertices.size == 0:
        raise ValueError("cannot maximize over an empty polytope")
    return float(np.max(vertices @ (-face.A_h @ W)))


def face_dual_value(face: BarrierFace, polytope: Polytope, W: np.ndarray) -> tuple[float, np.ndarray]:
    """Optimal value and multiplier of ``min b_z^T lambda  s.t.  A_z^T lambda = (-A_h W)^T, lambda >= 0``."""
    c = -face.A_h @ W
    res = linprog(
        polytope.b,
        A_eq=polytope.A.T,
        b_eq=c,
        bounds=[(0, None)] * polytope.num_faces,
        method="highs",
    )
    if res.status != 0:
        return np.inf, np.full(polytope.num_faces, np.nan)
    return float(res.fun), res.x


def reference_term(face: BarrierFace, agent: AgentSystem, K: GainMatrix, ref_vertices: np.ndarray) -> tuple[float, np.ndarray]:
    """``max_v gamma^T v`` over reference-state vertices with ``gamma = (-A_h B K_p)^T``."""
    gamma = -(face.A_h @ agent.B @ K.K_p)
    return float(np.max(ref_vertices @ gamma)), gamma


def state_samples(polytope: Polytope, resolution: int = 100, num_samples: int = 10_000, seed: int = 0) -> np.ndarray:
    """Sample points of the polytope (rows), vertices included.

    A ``resolution x resolution`` grid in 2-D, ``num_samples`` evenly spaced points in 1-D and a
    scrambled Halton sequence otherwise, all over the bounding box and filtered to the polytope.
    """
    lower, upper = polytope.bounding_box()
    d = polytope.dimension
    if d == 1:
        points = np.linspace(lower[0], upper[0], num_samples).reshape(-1, 1)
    elif d == 2:
        xs = np.linspace(lower[0], upper[0], resolution)
        ys = np.linspace(lower[1], upper[1], resolution)
        points = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    else:
        unit = qmc.Halton(d=d, seed=seed).random(num_samples)
        points = qmc.scale(unit, lower, upper)
    inside = np.all(points @ polytope.A.T <= polytope.b + 1e-12, axis=1)
    return np.vstack([points[inside], polytope.vertices()])


def safety_constraints(
    cell: Cell,
    agent: AgentSystem,
    ref_vertices: np.ndarray,
    K_y: cp.Expression,
    K_p: cp.Expression,
    config: SynthesisConfig,
) -> tuple[list[cp.Constraint], list[cp.Variable]]:
    """Linear constraints in ``(K_y, K_p, lambda)`` certifying every face of ``cell``."""
    poly = cell.polytope
    W = agent.A + agent.B @ K_y @ agent.C + config.alpha * np.eye(agent.d)
    constraints, multipliers = [], []
    for face in barrier_faces(cell):
        lam = cp.Variable(poly.num_faces, nonneg=True, name=f"lambda_{cell.id}_{face.index}")
        multipliers.append(lam)
        rhs = config.alpha * face.b_h - config.delta - config.constraint_margin
        constraints.append(poly.A.T @ lam == -(face.A_h @ W))
        reference_values = -(face.A_h @ agent.B @ K_p @ ref_vertices.T)
        constraints.append(poly.b @ lam + reference_values <= rhs)
    return constraints, multipliers
