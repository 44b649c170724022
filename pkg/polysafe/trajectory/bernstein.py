"""Bernstein-basis polynomial machinery.

A trajectory segment is stored by its control points ``P`` (``d x (n+1)``) and
evaluated on the normalized parameter ``t in [0, 1]``:

    p(t) = P @ b_n(t),    b_n(t)[i] = C(n, i) t^i (1 - t)^(n - i)

Derivatives use the difference matrices ``H_{n,q}`` so that
``p^(q)(t) = P @ H_{n,q} @ b_{n-q}(t)``, and ``D`` maps control points to
monomial coefficients (``coeffs = P @ D``).
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import comb

__all__ = [
    "BasisMatrices",
    "ControlPoints",
    "DomainError",
    "PolynomialCoeffs",
    "basis_transform",
    "bernstein_basis",
    "bernstein_basis_many",
    "closest_parameter",
    "coeffs_from_control_points",
    "control_points_from_coeffs",
    "derivative_matrix",
    "evaluate",
]

logger = logging.getLogger(__name__)

MAX_WELL_CONDITIONED_DEGREE = 10


class DomainError(ValueError):
    """Raised when a parameter lies outside the domain of a polynomial operation."""


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ControlPoints:
    """Control points of one polynomial segment, one column per point."""

    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if points.ndim != 2 or points.shape[1] == 0:
            raise DomainError(f"control points must be a d x (n+1) matrix, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise DomainError("control points must be finite")
        if points.shape[1] == 1:
            logger.debug("Degree-0 control points: the segment is a constant reference")
        object.__setattr__(self, "points", _readonly(points))

    @classmethod
    def from_points(cls, points: list[list[float]]) -> "ControlPoints":
        """Build from a list of points (one row per point, as stored in environment files)."""
        return cls(np.array(points, dtype=float).T)

    @property
    def degree(self) -> int:
        return self.points.shape[1] - 1

    @property
    def dimension(self) -> int:
        return self.points.shape[0]

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    @property
    def first(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def last(self) -> np.ndarray:
        return self.points[:, -1]

    def columns(self) -> list[np.ndarray]:
        return [self.points[:, i] for i in range(self.degree + 1)]

    def sample(self, num: int = 200, q: int = 0) -> np.ndarray:
        """Evaluate ``p^(q)`` on ``num`` evenly spaced parameters; returns ``d x num``."""
        ts = np.linspace(0.0, 1.0, num)
        return self.points @ derivative_matrix(self.degree, q) @ bernstein_basis_many(self.degree - q, ts)


@dataclass(frozen=True, eq=False)
class PolynomialCoeffs:
    """Monomial coefficients; column ``i`` multiplies ``t^i``."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs.reshape(1, -1)
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        return self.coeffs @ (float(t) ** np.arange(self.degree + 1))


def _check_degree(n: int):
    if n < 0:
        raise DomainError(f"polynomial degree must be nonnegative, got {n=}")


def _check_parameter(t: float):
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"spline parameter must lie in [0, 1], got {t=}")


def bernstein_basis(n: int, t: float) -> np.ndarray:
    """Return ``[b_{0,n}(t), ..., b_{n,n}(t)]``."""
    _check_degree(n)
    _check_parameter(t)
    return bernstein_basis_many(n, np.array([t], dtype=float))[:, 0]


def bernstein_basis_many(n: int, ts: np.ndarray) -> np.ndarray:
    """Vectorized basis: returns an ``(n+1) x len(ts)`` matrix."""
    _check_degree(n)
    ts = np.asarray(ts, dtype=float).reshape(1, -1)
    i = np.arange(n + 1).reshape(-1, 1)
    return comb(n, i) * ts**i * (1.0 - ts) ** (n - i)


@lru_cache(maxsize=64)
def basis_transform(n: int) -> np.ndarray:
    """Integer matrix ``D`` with ``stack(b_{i,n}(t)) = D @ stack(t^i)``.

    ``D[i, j] = C(n, i) C(n - i, j - i) (-1)^(j - i)`` for ``j >= i`` and zero otherwise,
    so ``coeffs = P @ D``.
    """
    _check_degree(n)
    D = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(n + 1):
        for j in range(i, n + 1):
            D[i, j] = comb(n, i, exact=True) * comb(n - i, j - i, exact=True) * (-1) ** (j - i)
    return _readonly(D)


@lru_cache(maxsize=64)
def _first_difference(n: int) -> np.ndarray:
    # H_n = n * ([-I; 0^T] + [0^T; I]), shape (n+1) x n
    H = np.zeros((n + 1, n), dtype=np.int64)
    H[:n] -= np.eye(n, dtype=np.int64)
    H[1:] += np.eye(n, dtype=np.int64)
    return n * H


@lru_cache(maxsize=256)
def derivative_matrix(n: int, q: int) -> np.ndarray:
    """``H_{n,q} = H_n @ H_{n-1} @ ... @ H_{n-q+1}``; ``H_{n,0}`` is the identity."""
    _check_degree(n)
    if q < 0 or q > n:
        raise DomainError(f"derivative order must satisfy 0 <= q <= n, got {n=} {q=}")
    H = np.eye(n + 1, dtype=np.int64)
    for m in range(n, n - q, -1):
        H = H @ _first_difference(m)
    return _readonly(H)


@dataclass(frozen=True, eq=False)
class BasisMatrices:
    degree: int
    D: np.ndarray
    H: dict[tuple[int, int], np.ndarray] = field(repr=False)

    @classmethod
    def for_degree(cls, n: int) -> "BasisMatrices":
        if n > MAX_WELL_CONDITIONED_DEGREE:
            logger.warning(f"Basis change for {n=} is poorly conditioned")
        return cls(
            degree=n,
            D=basis_transform(n),
            H={(n, q): derivative_matrix(n, q) for q in range(n + 1)},
        )


def coeffs_from_control_points(P: ControlPoints) -> PolynomialCoeffs:
    return PolynomialCoeffs(P.points @ basis_transform(P.degree))


def control_points_from_coeffs(coeffs: PolynomialCoeffs) -> ControlPoints:
    D = basis_transform(coeffs.degree)
    return ControlPoints(np.linalg.solve(D.T.astype(float), coeffs.coeffs.T).T)


def evaluate(P: ControlPoints, t: float, q: int = 0) -> np.ndarray:
    """Return ``p^(q)(t)`` as a ``d``-vector."""
    _check_parameter(t)
    n = P.degree
    H = derivative_matrix(n, q)
    return P.points @ H @ bernstein_basis(n - q, t)


def closest_parameter(
    P: ControlPoints,
    point: np.ndarray,
    resolution: float = 1e-3,
    newton_steps: int = 20,
) -> float:
    """Parameter of the segment point closest to ``point``.

    A grid of spacing ``resolution`` picks the global basin, Newton iterations on
    ``||p(t) - point||^2`` refine it; steps are kept only when they reduce the distance
    and the result is clamped to ``[0, 1]``.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if P.is_constant:
        return 0.0

    num = int(round(1.0 / resolution)) + 1
    ts = np.linspace(0.0, 1.0, num)
    samples = P.points @ bernstein_basis_many(P.degree, ts)
    dist2 = np.sum((samples - point[:, None]) ** 2, axis=0)
    t = float(ts[int(np.argmin(dist2))])
    best = float(dist2.min())

    for _ in range(newton_steps):
        r = evaluate(P, t, 0) - point
        d1 = evaluate(P, t, 1)
        grad = 2.0 * r @ d1
        hess = 2.0 * d1 @ d1
        if P.degree >= 2:
            hess += 2.0 * r @ evaluate(P, t, 2)
        if hess <= 0.0:
            break
        t_new = min(1.0, max(0.0, t - grad / hess))
        r_new = evaluate(P, t_new, 0) - point
        value = float(r_new @ r_new)
        if value >= best or abs(t_new - t) < 1e-15:
            break
        t, best = t_new, value
    return t
