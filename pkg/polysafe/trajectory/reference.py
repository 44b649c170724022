from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.linalg import block_diag

from .bernstein import ControlPoints, PolynomialCoeffs, evaluate

__all__ = ["ReferenceSystem", "build_reference", "reference_state_at", "shift_block"]


def shift_block(n: int) -> np.ndarray:
    """Nilpotent chain ``[[0, I], [0, 0]]`` of side ``n + 1``; ``[[0]]`` for constant references."""
    return np.eye(n + 1, k=1)


@dataclass(frozen=True, eq=False)
class ReferenceSystem:
    """Autonomous system ``x_p' = A_p x_p``, ``y_p = C_p x_p`` whose output traces the polynomial.

    The state is laid out per output axis, each block holding ``[p, p', ..., p^(n)]``.
    """

    A_p: np.ndarray
    C_p: np.ndarray
    x_p0: np.ndarray
    degree: int
    output_dim: int

    def __post_init__(self):
        side = (self.degree + 1) * self.output_dim
        assert self.A_p.shape == (side, side), f"{self.A_p.shape=} {side=}"
        assert self.C_p.shape == (self.output_dim, side), f"{self.C_p.shape=}"
        assert self.x_p0.shape == (side,), f"{self.x_p0.shape=}"
        for array in (self.A_p, self.C_p, self.x_p0):
            array.setflags(write=False)

    @property
    def state_dim(self) -> int:
        return (self.degree + 1) * self.output_dim

    def output(self, x_p: np.ndarray) -> np.ndarray:
        return self.C_p @ x_p

    def axis(self, k: int) -> "ReferenceSystem":
        """The one-dimensional reference system driving output axis ``k``."""
        block = slice(k * (self.degree + 1), (k + 1) * (self.degree + 1))
        return ReferenceSystem(
            A_p=np.array(self.A_p[block, block]),
            C_p=np.array(self.C_p[k : k + 1, block]),
            x_p0=np.array(self.x_p0[block]),
            degree=self.degree,
            output_dim=1,
        )


def build_reference(coeffs: PolynomialCoeffs) -> ReferenceSystem:
    n = coeffs.degree
    d_y = coeffs.dimension
    selector = np.zeros((1, n + 1))
    selector[0, 0] = 1.0
    # [x_p(0)]_i = i! a_i, since the i-th state is the i-th derivative
    scale = np.array([factorial(i) for i in range(n + 1)], dtype=float)
    return ReferenceSystem(
        A_p=block_diag(*[shift_block(n)] * d_y),
        C_p=block_diag(*[selector] * d_y),
        x_p0=(coeffs.coeffs * scale).reshape(-1),
        degree=n,
        output_dim=d_y,
    )


def reference_state_at(R: ReferenceSystem, P: ControlPoints, t: float) -> np.ndarray:
    """State ``x_p`` at parameter ``t``: per axis ``[p(t), p'(t), ..., p^(n)(t)]``."""
    assert P.degree == R.degree and P.dimension == R.output_dim, f"{P.degree=} {R.degree=} {P.dimension=}"
    derivatives = np.stack([evaluate(P, t, q) for q in range(P.degree + 1)], axis=1)
    return derivatives.reshape(-1)
