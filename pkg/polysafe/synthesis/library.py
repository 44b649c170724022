import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..utils.misc import atomic_write_text
from .types import AgentSystem, GainMatrix, SynthesisCertificate, SynthesisConfig

__all__ = ["CellGain", "GainLibrary"]

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class CellGain:
    gain: GainMatrix
    mu: float
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed", False))


@dataclass
class GainLibrary:
    """Per-cell gains with the settings they were synthesized under."""

    agent: AgentSystem
    config: SynthesisConfig
    cells: dict[str, CellGain] = field(default_factory=dict)

    def add(self, cell_id: str, gain: GainMatrix, certificate: SynthesisCertificate):
        self.cells[cell_id] = CellGain(gain=gain, mu=certificate.mu, summary=certificate.summary())

    def gain(self, cell_id: str) -> GainMatrix:
        if cell_id not in self.cells:
            raise KeyError(f"gain library has no gain for cell {cell_id!r}")
        return self.cells[cell_id].gain

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.cells.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": FORMAT_VERSION,
            "agent": self.agent.to_dict(),
            "mode": self.config.mode,
            "alpha": self.config.alpha,
            "delta": self.config.delta,
            "k_max": self.config.k_max,
            "time_scale": self.config.time_scale,
            "cells": {
                cell_id: {
                    "K": entry.gain.K.tolist(),
                    "d_y": entry.gain.d_y,
                    "mu": entry.mu,
                    "certificate": _jsonable(entry.summary),
                }
                for cell_id, entry in self.cells.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GainLibrary":
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported gain library version {data.get('version')!r}")
        config = SynthesisConfig(
            alpha=data["alpha"],
            delta=data["delta"],
            k_max=data["k_max"],
            mode=data["mode"],
            time_scale=data["time_scale"],
        )
        cells = {
            cell_id: CellGain(
                gain=GainMatrix(np.array(entry["K"], dtype=float), int(entry["d_y"])),
                mu=float(entry["mu"]),
                summary=dict(entry.get("certificate", {})),
            )
            for cell_id, entry in data["cells"].items()
        }
        return cls(agent=AgentSystem.from_dict(data["agent"]), config=config, cells=cells)

    def save(self, path: str | Path) -> Path:
        # json writes floats with repr, the shortest string that round-trips
        path = atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")
        logger.info(f"Saved {len(self.cells)} gains to {path}")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "GainLibrary":
        with open(path, encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: invalid gain library at char {e.pos}: {e.msg}") from e
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError) as e:
            raise ValueError(f"{path}: malformed gain library: {e!r}") from e


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)
    return value
