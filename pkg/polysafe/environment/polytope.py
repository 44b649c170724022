import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

__all__ = ["ChebyshevError", "Polytope", "chebyshev_center", "contains"]

logger = logging.getLogger(__name__)


class ChebyshevError(RuntimeError):
    """The Chebyshev-center LP failed for a reason other than infeasibility."""


@dataclass(frozen=True, eq=False)
class Polytope:
    """H-polytope ``{x : A x <= b}`` with outward face normals."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"face matrix and offsets disagree: {A.shape=} {b.shape=}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("polytope data must be finite")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def box(cls, lower, upper) -> "Polytope":
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        eye = np.eye(lower.size)
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    @property
    def num_faces(self) -> int:
        return self.A.shape[0]

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.A, axis=1)

    def normalized(self) -> "Polytope":
        norms = self.row_norms()
        if np.any(norms == 0.0):
            raise ValueError("polytope has a zero face normal")
        return Polytope(self.A / norms[:, None], self.b / norms)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return contains(self, x, tol)

    def values(self, x) -> np.ndarray:
        """Per-face slack ``b - A x`` (nonnegative inside)."""
        return self.b - self.A @ np.asarray(x, dtype=float)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.dimension
        lower, upper = np.empty(d), np.empty(d)
        for k in range(d):
            c = np.zeros(d)
            for sign, out in ((1.0, lower), (-1.0, upper)):
                c[k] = sign
                res = linprog(c, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * d, method="highs")
                out[k] = sign * res.fun if res.status == 0 else -sign * np.inf
        return lower, upper

    def is_bounded(self) -> bool:
        lower, upper = self.bounding_box()
        return bool(np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)))

    def vertices(self) -> np.ndarray:
        """Vertices as rows; 2-D vertices are returned in counter-clockwise order."""
        center, radius = chebyshev_center(self)
        if not radius > 0.0:
            return np.empty((0, self.dimension))
        if not np.isfinite(radius) or not self.is_bounded():
            raise ValueError("vertex enumeration requires a bounded polytope")
        if self.dimension == 1:
            lower, upper = self.bounding_box()
            return np.array([[lower[0]], [upper[0]]])
        halfspaces = np.hstack([self.A, -self.b[:, None]])
        points = HalfspaceIntersection(halfspaces, center).intersections
        hull = ConvexHull(points)
        return points[hull.vertices]


def contains(polytope: Polytope, x, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != polytope.dimension:
        raise ValueError(f"dimension mismatch: {x.shape[0]=} {polytope.dimension=}")
    return bool(np.all(polytope.A @ x <= polytope.b + tol))


def chebyshev_center(polytope: Polytope) -> tuple[np.ndarray, float]:
    """Center and radius of the largest inscribed ball.

    Solves ``max r  s.t.  A c + ||a_i|| r <= b``. A nonpositive radius means an empty
    interior (``-inf`` when the constraints are inconsistent), ``inf`` means unbounded.
    """
    A, b = polytope.A, polytope.b
    d = polytope.dimension
    norms = polytope.row_norms()
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    if res.status == 0:
        return res.x[:d], float(res.x[-1])
    if res.status == 2:
        return np.full(d, np.nan), -np.inf
    if res.status == 3:
        return np.full(d, np.nan), np.inf
    raise ChebyshevError(f"Chebyshev LP failed: {res.status=} {res.message}")
