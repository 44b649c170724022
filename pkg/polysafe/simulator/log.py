import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..environment import Environment
from ..utils.misc import atomic_write_text, format_float

__all__ = ["SwitchEvent", "TrajectoryLog", "safety_margin"]


@dataclass(frozen=True)
class SwitchEvent:
    t: float
    from_cell: str
    to_cell: str
    y: tuple[float, ...]


@dataclass
class TrajectoryLog:
    """One record per integration step; ``h`` holds the per-face values against the active cell."""

    t: list[float] = field(default_factory=list)
    x: list[np.ndarray] = field(default_factory=list)
    u: list[np.ndarray] = field(default_factory=list)
    cell: list[str] = field(default_factory=list)
    ref_t: list[float] = field(default_factory=list)
    y_p: list[np.ndarray] = field(default_factory=list)
    h: list[np.ndarray] = field(default_factory=list)
    hmin: list[float] = field(default_factory=list)
    V: list[float] = field(default_factory=list)
    switch_events: list[SwitchEvent] = field(default_factory=list)

    def record(self, t, x, u, cell_id, ref_t, y_p, h, V):
        assert not self.t or t > self.t[-1], f"log time must increase: {t=} last={self.t[-1]}"
        self.t.append(float(t))
        self.x.append(np.array(x, dtype=float))
        self.u.append(np.array(u, dtype=float))
        self.cell.append(cell_id)
        self.ref_t.append(float(ref_t))
        self.y_p.append(np.array(y_p, dtype=float))
        self.h.append(np.array(h, dtype=float))
        self.hmin.append(float(np.min(h)) if len(h) else float("nan"))
        self.V.append(float(V))

    def __len__(self):
        return len(self.t)

    def states(self) -> np.ndarray:
        return np.array(self.x)

    def outputs_p(self) -> np.ndarray:
        return np.array(self.y_p)

    @property
    def final_state(self) -> np.ndarray:
        return self.x[-1]

    def to_csv(self, path: str | Path | None = None) -> str:
        d = len(self.x[0]) if self.x else 0
        d_u = len(self.u[0]) if self.u else 0
        d_p = len(self.y_p[0]) if self.y_p else 0
        header = (
            ["t"]
            + [f"x{i + 1}" for i in range(d)]
            + [f"u{i + 1}" for i in range(d_u)]
            + ["cell", "ref_t"]
            + [f"yp{i + 1}" for i in range(d_p)]
            + ["hmin", "V"]
        )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for k in range(len(self)):
            writer.writerow(
                [format_float(self.t[k])]
                + [format_float(v) for v in self.x[k]]
                + [format_float(v) for v in self.u[k]]
                + [self.cell[k], format_float(self.ref_t[k])]
                + [format_float(v) for v in self.y_p[k]]
                + [format_float(self.hmin[k]), format_float(self.V[k])]
            )
        text = buffer.getvalue()
        if path is not None:
            atomic_write_text(path, text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "TrajectoryLog":
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        if not rows or rows[0][0] != "t":
            raise ValueError(f"{path}: not a trajectory log")
        header = rows[0]
        cols = {name: i for i, name in enumerate(header)}
        xs = [cols[n] for n in header if n.startswith("x")]
        us = [cols[n] for n in header if n.startswith("u")]
        yps = [cols[n] for n in header if n.startswith("yp")]
        log = cls()
        for row in rows[1:]:
            log.t.append(float(row[cols["t"]]))
            log.x.append(np.array([float(row[i]) for i in xs]))
            log.u.append(np.array([float(row[i]) for i in us]))
            log.cell.append(row[cols["cell"]])
            log.ref_t.append(float(row[cols["ref_t"]]))
            log.y_p.append(np.array([float(row[i]) for i in yps]))
            log.hmin.append(float(row[cols["hmin"]]))
            log.V.append(float(row[cols["V"]]))
        return log


def safety_margin(log: TrajectoryLog, env: Environment) -> dict[str, float]:
    """Minimum over time of the smallest face value, per active cell; negative means a wall was crossed."""
    margins: dict[str, float] = {}
    for x, cell_id in zip(log.x, log.cell, strict=True):
        h = float(np.min(env.cell(cell_id).polytope.values(x)))
        margins[cell_id] = min(margins.get(cell_id, np.inf), h)
    return margins
