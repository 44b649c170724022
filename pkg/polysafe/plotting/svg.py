import logging
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from ..environment import Environment
from ..simulator import TrajectoryLog
from ..utils.misc import atomic_write_text

__all__ = ["PALETTE", "REFERENCE_COLOR", "render_svg", "write_svg"]

logger = logging.getLogger(__name__)

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)
REFERENCE_COLOR = "#a0a0a0"
SVG_NS = "http://www.w3.org/2000/svg"


class _Frame:
    """Maps workspace coordinates to pixels with y pointing up."""

    def __init__(self, points: np.ndarray, width: int, margin: int):
        lower, upper = points.min(axis=0), points.max(axis=0)
        span = np.maximum(upper - lower, 1e-9)
        self.scale = (width - 2 * margin) / span[0]
        self.lower, self.margin = lower, margin
        self.width = width
        self.height = int(np.ceil(span[1] * self.scale)) + 2 * margin
        self.top = upper[1]

    def __call__(self, p) -> tuple[float, float]:
        return (
            self.margin + (p[0] - self.lower[0]) * self.scale,
            self.margin + (self.top - p[1]) * self.scale,
        )

    def points(self, pts) -> str:
        return " ".join("{:.3f},{:.3f}".format(*self(p)) for p in pts)


def _cell_colors(env: Environment) -> dict[str, str]:
    return {c.id: PALETTE[i % len(PALETTE)] for i, c in enumerate(env.cells)}


def _asterisk(parent, center: tuple[float, float], size: float, color: str):
    cx, cy = center
    d = []
    for angle in (0.0, np.pi / 3, 2 * np.pi / 3):
        dx, dy = size * np.cos(angle), size * np.sin(angle)
        d.append(f"M{cx - dx:.3f} {cy - dy:.3f}L{cx + dx:.3f} {cy + dy:.3f}")
    ET.SubElement(parent, "path", {"class": "initial", "d": "".join(d), "stroke": color, "stroke-width": "2", "fill": "none"})


def render_svg(env: Environment, logs: list[TrajectoryLog] = (), width: int = 800, margin: int = 20) -> str:
    """Cells with their reference splines and control points, plus one polyline per log.

    Control points take their cell's color except the switching point, drawn in the successor's.
    Agent paths take the color of the cell they start in; initial states are asterisks.
    """
    if env.dimension != 2:
        raise ValueError(f"only planar environments can be plotted, got d={env.dimension}")
    colors = _cell_colors(env)
    vertices = {c.id: c.polytope.vertices() for c in env.cells}
    pts = [v for v in vertices.values()] + [log.states() for log in logs if len(log)]
    frame = _Frame(np.vstack(pts), width, margin)

    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": f"{frame.width}px",
            "height": f"{frame.height}px",
            "viewBox": f"0 0 {frame.width} {frame.height}",
        },
    )
    cells_group = ET.SubElement(root, "g", {"id": "cells"})
    for c in env.cells:
        ET.SubElement(
            cells_group,
            "polygon",
            {"class": "cell", "data-cell": c.id, "points": frame.points(vertices[c.id]), "fill": "none", "stroke": colors[c.id], "stroke-width": "1.5"},
        )

    ref_group = ET.SubElement(root, "g", {"id": "references"})
    for c in env.cells:
        curve = c.segment.sample(200).T
        ET.SubElement(
            ref_group,
            "polyline",
            {"class": "reference", "data-cell": c.id, "points": frame.points(curve), "fill": "none", "stroke": REFERENCE_COLOR, "stroke-width": "2"},
        )
        columns = c.segment.columns()
        for i, p in enumerate(columns):
            last = i == len(columns) - 1
            color = colors[c.successor] if last and c.successor in colors else colors[c.id]
            cx, cy = frame(p)
            ET.SubElement(ref_group, "circle", {"class": "control-point", "cx": f"{cx:.3f}", "cy": f"{cy:.3f}", "r": "3", "fill": color})

    agent_group = ET.SubElement(root, "g", {"id": "agents"})
    for k, log in enumerate(logs):
        if not len(log):
            continue
        color = colors.get(log.cell[0], PALETTE[k % len(PALETTE)])
        states = log.states()[:, :2]
        # thin long logs so that files stay small; endpoints are kept
        stride = max(1, len(states) // 2000)
        idx = np.unique(np.r_[np.arange(0, len(states), stride), len(states) - 1])
        ET.SubElement(
            agent_group,
            "polyline",
            {"class": "agent", "data-run": str(k), "points": frame.points(states[idx]), "fill": "none", "stroke": color, "stroke-width": "1"},
        )
        _asterisk(agent_group, frame(states[0]), 6.0, color)

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_svg(path: str | Path, env: Environment, logs: list[TrajectoryLog] = (), width: int = 800) -> Path:
    path = atomic_write_text(path, render_svg(env, list(logs), width))
    logger.info(f"Wrote {path} with {len(env.cells)} cells and {len(logs)} runs")
    return path
