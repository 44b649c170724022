import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .bernstein import ControlPoints, derivative_matrix

__all__ = ["HullBounds", "hull_bounds", "in_convex_hull"]


@dataclass(frozen=True, eq=False)
class HullBounds:
    """Vertex sets ``V_q = P @ H_{n,q}``; ``p^(q)(t)`` lies in the convex hull of the columns of ``V_q``."""

    vertex_sets: tuple[np.ndarray, ...]

    @property
    def degree(self) -> int:
        return len(self.vertex_sets) - 1

    @property
    def dimension(self) -> int:
        return self.vertex_sets[0].shape[0]

    def __getitem__(self, q: int) -> np.ndarray:
        return self.vertex_sets[q]

    def state_vertices(self) -> np.ndarray:
        """Vertices of the set bounding the reference state ``x_p``.

        The set is the product over ``q`` of the hulls of ``V_q``, so its vertices are
        drawn from the product of the (deduplicated) columns. Rows are laid out per output
        axis like the reference state: ``[p_0, p_0', ..., p_0^(n), p_1, ..., p_1^(n), ...]``.
        """
        columns = [np.unique(np.round(V, 12), axis=1).T for V in self.vertex_sets]
        vertices = []
        for combo in itertools.product(*columns):
            # combo[q] is a d-vector; state layout is axis-major
            vertices.append(np.stack(combo, axis=1).reshape(-1))
        return np.array(vertices)


def hull_bounds(P: ControlPoints) -> HullBounds:
    n = P.degree
    sets = []
    for q in range(n + 1):
        V = P.points @ derivative_matrix(n, q)
        V.setflags(write=False)
        sets.append(V)
    return HullBounds(tuple(sets))


def in_convex_hull(V: np.ndarray, point: np.ndarray, tol: float = 1e-8) -> bool:
    """LP membership test of ``point`` in the hull of the columns of ``V``.

    Minimizes the infinity-norm slack ``s`` of ``V @ rho = point`` over the simplex.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    point = np.asarray(point, dtype=float).reshape(-1)
    d, m = V.shape
    assert point.shape == (d,), f"{point.shape=} {V.shape=}"

    c = np.zeros(m + 1)
    c[-1] = 1.0
    ones = np.ones((d, 1))
    A_ub = np.block([[V, -ones], [-V, -ones]])
    b_ub = np.concatenate([point, -point])
    A_eq = np.concatenate([np.ones(m), [0.0]]).reshape(1, -1)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * (m + 1), method="highs")
    if res.status != 0:
        return False
    return bool(res.fun <= tol)
