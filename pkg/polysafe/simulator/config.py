from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import yaml

__all__ = ["SimConfig"]

INTEGRATORS = ("rk4", "euler")


@dataclass
class SimConfig:
    dt: float = 1e-3
    # seconds per unit of spline parameter
    time_scale: float = 1.0
    # defaults to 10 * time_scale
    max_segment_time: float | None = None
    switch_tol: float = 1e-2
    noise_var: float = 0.0
    seed: int = 0
    integrator: str = "rk4"
    closest_resolution: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.time_scale > 0:
            raise ValueError(f"time_scale must be positive, got {self.time_scale}")
        if not self.noise_var >= 0:
            raise ValueError(f"noise_var must be nonnegative, got {self.noise_var}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.max_segment_time is None:
            self.max_segment_time = 10.0 * self.time_scale
        if not self.max_segment_time > 0:
            raise ValueError(f"max_segment_time must be positive, got {self.max_segment_time}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown simulation config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SimConfig":
        with open(path) as f:
            return cls.from_dict(yaml.safe_load(f) or {})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
