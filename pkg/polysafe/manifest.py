import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from omegaconf import MISSING, OmegaConf

from .simulator import SimConfig
from .synthesis import SynthesisConfig
from .utils.misc import atomic_write_text

__all__ = ["RunManifest"]

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    environment: str = MISSING
    output_dir: str = "runs"
    agent: Optional[str] = None
    seeds: List[int] = field(default_factory=lambda: [0])
    inits: int = 0
    noise_vars: List[float] = field(default_factory=lambda: [0.0])
    per_axis: bool = False
    synthesis: Dict[str, Any] = field(default_factory=dict)
    simulation: Dict[str, Any] = field(default_factory=dict)

    def validate(self):
        missing = [p for p in (self.environment, self.agent) if p is not None and not Path(p).exists()]
        if missing:
            raise FileNotFoundError(f"manifest references missing files: {missing}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"manifest seeds must be distinct, got {self.seeds}")
        # fail early on bad keys or values
        self.synthesis_config()
        self.sim_config()

    def synthesis_config(self) -> SynthesisConfig:
        return SynthesisConfig.from_dict(dict(self.synthesis))

    def sim_config(self, **overrides) -> SimConfig:
        return SimConfig.from_dict({**self.simulation, **overrides})

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        """Merge a YAML file over the defaults; relative paths resolve against the file's directory."""
        path = Path(path)
        merged = OmegaConf.merge(OmegaConf.structured(cls), OmegaConf.load(path))
        manifest: RunManifest = OmegaConf.to_object(merged)
        base = path.parent
        manifest.environment = str(base / manifest.environment)
        manifest.output_dir = str(base / manifest.output_dir)
        if manifest.agent is not None:
            manifest.agent = str(base / manifest.agent)
        manifest.validate()
        return manifest

    def save(self, path: str | Path) -> Path:
        return atomic_write_text(path, OmegaConf.to_yaml(OmegaConf.structured(self)))
