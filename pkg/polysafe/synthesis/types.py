import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from scipy.linalg import block_diag

from ..trajectory import ReferenceSystem

__all__ = [
    "AgentSystem",
    "BarrierFace",
    "CombinedSystem",
    "FaceCertificate",
    "GainMatrix",
    "RelativeDegreeError",
    "SolverFailureError",
    "SynthesisCertificate",
    "SynthesisConfig",
    "SynthesisInfeasibleError",
    "UnboundedCellError",
]

logger = logging.getLogger(__name__)

SYNTHESIS_MODES = ("exponential", "paper")


class RelativeDegreeError(ValueError):
    """The input does not enter the first derivative of the tracking Lyapunov function."""


class SynthesisInfeasibleError(RuntimeError):
    def __init__(self, message: str, cell_id: str | None = None, face_index: int | None = None, status: str = ""):
        super().__init__(message)
        self.cell_id = cell_id
        self.face_index = face_index
        self.status = status


class SolverFailureError(RuntimeError):
    pass


class UnboundedCellError(ValueError):
    def __init__(self, message: str, cell_id: str | None = None):
        super().__init__(message)
        self.cell_id = cell_id


def _matrix(value, name: str) -> np.ndarray:
    array = np.atleast_2d(np.array(value, dtype=float))
    if array.ndim != 2 or not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must be a finite matrix, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AgentSystem:
    """Linear agent ``x' = A x + B u``, ``y = C x``.

    ``axis_state_dims`` marks an axis-decomposed agent: A, B and C are block diagonal with
    one input and one output per block and the given number of states per block.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    axis_state_dims: tuple[int, ...] | None = None

    def __post_init__(self):
        A, B, C = _matrix(self.A, "A"), _matrix(self.B, "B"), _matrix(self.C, "C")
        d = A.shape[0]
        if A.shape != (d, d) or B.shape[0] != d or C.shape[1] != d:
            raise ValueError(f"agent dimensions do not conform: {A.shape=} {B.shape=} {C.shape=}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        if self.axis_state_dims is not None:
            dims = tuple(int(n) for n in self.axis_state_dims)
            object.__setattr__(self, "axis_state_dims", dims)
            if not self._is_block_diagonal(dims):
                raise ValueError(f"agent is not block diagonal for {dims=}")

    def _is_block_diagonal(self, dims: tuple[int, ...]) -> bool:
        if sum(dims) != self.d or len(dims) != self.d_u or len(dims) != self.d_y:
            return False
        pattern_A = block_diag(*[np.ones((n, n)) for n in dims])
        pattern_B = block_diag(*[np.ones((n, 1)) for n in dims])
        pattern_C = block_diag(*[np.ones((1, n)) for n in dims])
        return all(
            np.all(M[pattern == 0] == 0.0)
            for M, pattern in ((self.A, pattern_A), (self.B, pattern_B), (self.C, pattern_C))
        )

    @classmethod
    def single_integrator(cls, d: int = 2) -> "AgentSystem":
        return cls(np.zeros((d, d)), np.eye(d), np.eye(d), axis_state_dims=(1,) * d)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AgentSystem":
        dims = data.get("axis_state_dims")
        return cls(data["A"], data["B"], data["C"], tuple(dims) if dims is not None else None)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "AgentSystem":
        with open(path) as f:
            return cls.from_dict(yaml.safe_load(f))

    def to_dict(self) -> dict[str, Any]:
        data = {"A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist()}
        if self.axis_state_dims is not None:
            data["axis_state_dims"] = list(self.axis_state_dims)
        return data

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def d_u(self) -> int:
        return self.B.shape[1]

    @property
    def d_y(self) -> int:
        return self.C.shape[0]

    @property
    def is_axis_decomposed(self) -> bool:
        return self.axis_state_dims is not None

    def axis(self, k: int) -> "AgentSystem":
        assert self.axis_state_dims is not None, "agent is not axis-decomposed"
        start = sum(self.axis_state_dims[:k])
        block = slice(start, start + self.axis_state_dims[k])
        return AgentSystem(
            np.array(self.A[block, block]),
            np.array(self.B[block, k : k + 1]),
            np.array(self.C[k : k + 1, block]),
            axis_state_dims=(self.axis_state_dims[k],),
        )


@dataclass(frozen=True, eq=False)
class CombinedSystem:
    """Aggregate state ``z = [x; x_p]`` with ``z' = (Q + Bc K Cc) z`` and ``V = z^T M z``."""

    agent: AgentSystem
    ref: ReferenceSystem
    Q: np.ndarray
    Bc: np.ndarray
    Cc: np.ndarray
    E: np.ndarray
    M: np.ndarray
    time_scale: float = 1.0

    @property
    def d_n(self) -> int:
        return self.Q.shape[0]

    @property
    def gain_shape(self) -> tuple[int, int]:
        return self.agent.d_u, self.agent.d_y + self.ref.state_dim


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """``u = K_y y + K_p x_p`` with ``K = [K_y K_p]``."""

    K: np.ndarray
    d_y: int

    def __post_init__(self):
        K = _matrix(self.K, "K")
        if K.shape[1] <= self.d_y:
            raise ValueError(f"gain has {K.shape[1]} columns, needs more than {self.d_y=}")
        object.__setattr__(self, "K", K)

    @classmethod
    def from_parts(cls, K_y, K_p) -> "GainMatrix":
        K_y = np.atleast_2d(np.asarray(K_y, dtype=float))
        K_p = np.atleast_2d(np.asarray(K_p, dtype=float))
        return cls(np.hstack([K_y, K_p]), K_y.shape[1])

    @property
    def K_y(self) -> np.ndarray:
        return self.K[:, : self.d_y]

    @property
    def K_p(self) -> np.ndarray:
        return self.K[:, self.d_y :]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.K)))

    def control(self, y: np.ndarray, x_p: np.ndarray) -> np.ndarray:
        return self.K_y @ y + self.K_p @ x_p


@dataclass(frozen=True, eq=False)
class BarrierFace:
    """``h(x) = A_h x + b_h``, nonnegative on the cell."""

    A_h: np.ndarray
    b_h: float
    index: int = 0

    def __call__(self, x: np.ndarray) -> float:
        return float(self.A_h @ x + self.b_h)


@dataclass
class SynthesisConfig:
    alpha: float = 10.0
    delta: float = 0.1
    k_max: float = 50.0
    mode: str = "exponential"
    solver: str = "CLARABEL"
    feasibility_tol: float = 1e-8
    gap_tol: float = 1e-8
    certificate_tol: float = 1e-6
    # tightening applied to the solved constraints so that solver round-off stays inside certificate_tol
    constraint_margin: float = 1e-7
    grid_resolution: int = 100
    num_samples: int = 10_000
    time_scale: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if not self.k_max > 0:
            raise ValueError(f"k_max must be positive, got {self.k_max}")
        if self.mode not in SYNTHESIS_MODES:
            raise ValueError(f"mode must be one of {SYNTHESIS_MODES}, got {self.mode!r}")
        if not self.time_scale > 0:
            raise ValueError(f"time_scale must be positive, got {self.time_scale}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SynthesisConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown synthesis config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SynthesisConfig":
        with open(path) as f:
            return cls.from_dict(yaml.safe_load(f) or {})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class FaceCertificate:
    index: int
    # worst case of -A_h (W x + B K_p x_p) - (alpha b_h - delta); <= 0 means satisfied
    primal_residual: float
    dual_value: float
    primal_value: float
    dual_lambda: np.ndarray
    gamma: np.ndarray

    @property
    def duality_gap(self) -> float:
        return self.dual_value - self.primal_value


@dataclass
class SynthesisCertificate:
    mode: str
    mu: float
    lmi_max_eig: float
    invariance_residual: float
    faces: list[FaceCertificate] = field(default_factory=list)
    k_max_abs: float = 0.0
    k_bound: float = float("inf")
    solver_status: str = "external"
    solver_mu: float | None = None
    tol: float = 1e-6

    @property
    def convergence_ok(self) -> bool:
        return self.lmi_max_eig <= self.tol and self.mu <= self.tol

    @property
    def violated_faces(self) -> list[int]:
        return [f.index for f in self.faces if f.primal_residual > self.tol]

    @property
    def safety_ok(self) -> bool:
        return not self.violated_faces

    @property
    def passed(self) -> bool:
        return self.convergence_ok and self.safety_ok and self.k_max_abs <= self.k_bound + self.tol

    @property
    def max_primal_residual(self) -> float:
        return max((f.primal_residual for f in self.faces), default=-np.inf)

    @property
    def max_duality_gap(self) -> float:
        return max((abs(f.duality_gap) for f in self.faces), default=0.0)

    def summary(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "mode": self.mode,
            "mu": self.mu,
            "solver_mu": self.solver_mu,
            "solver_status": self.solver_status,
            "lmi_max_eig": self.lmi_max_eig,
            "invariance_residual": self.invariance_residual,
            "max_cbf_residual": self.max_primal_residual,
            "max_duality_gap": self.max_duality_gap,
            "violated_faces": self.violated_faces,
            "k_max_abs": self.k_max_abs,
            "k_bound": self.k_bound,
        }
