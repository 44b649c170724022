import logging
from dataclasses import dataclass, field

import numpy as np

from ..trajectory import ControlPoints
from .polytope import Polytope, chebyshev_center

__all__ = [
    "Cell",
    "Environment",
    "ValidationIssue",
    "ValidationReport",
    "overlap",
    "validate",
]

logger = logging.getLogger(__name__)

CONTAINMENT_TOL = 1e-9
SWITCH_POINT_TOL = 1e-9
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Cell:
    id: str
    polytope: Polytope
    segment: ControlPoints
    successor: str | None = None

    @property
    def switching_point(self) -> np.ndarray:
        return self.segment.last


@dataclass(frozen=True, eq=False)
class Environment:
    cells: tuple[Cell, ...]
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        ids = [c.id for c in self.cells]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate cell ids in {ids}")

    @property
    def spline_degree(self) -> int:
        return self.cells[0].segment.degree if self.cells else 0

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(f"no cell with id {cell_id!r}")

    def index(self, cell_id: str) -> int:
        return [c.id for c in self.cells].index(cell_id)

    def chain(self) -> list[Cell]:
        """Cells in successor order starting from the head (the cell nobody points to)."""
        targets = {c.successor for c in self.cells if c.successor is not None}
        heads = [c for c in self.cells if c.id not in targets]
        if len(heads) != 1:
            raise ValueError(f"successor links do not form a single chain: heads={[c.id for c in heads]}")
        order, seen = [], set()
        current = heads[0]
        while current is not None:
            if current.id in seen:
                raise ValueError(f"successor cycle through cell {current.id!r}")
            seen.add(current.id)
            order.append(current)
            current = self.cell(current.successor) if current.successor is not None else None
        return order

    def first_containing(self, x, tol: float = 1e-9) -> Cell | None:
        try:
            ordered = self.chain()
        except (KeyError, ValueError):
            ordered = list(self.cells)
        for c in ordered:
            if c.polytope.contains(x, tol):
                return c
        return None


def overlap(c1: Cell, c2: Cell) -> Polytope:
    """Intersection of two cells, rows in canonical order so that ``overlap`` is symmetric."""
    if c1.polytope.dimension != c2.polytope.dimension:
        raise ValueError(f"cells {c1.id!r} and {c2.id!r} differ in dimension")
    A = np.vstack([c1.polytope.A, c2.polytope.A])
    b = np.concatenate([c1.polytope.b, c2.polytope.b])
    order = np.lexsort(np.hstack([A, b[:, None]]).T[::-1])
    return Polytope(A[order], b[order])


@dataclass(frozen=True)
class ValidationIssue:
    cell_id: str
    check: str
    message: str

    def __str__(self):
        return f"[{self.cell_id}] {self.check}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    def add(self, cell_id: str, check: str, message: str):
        self.issues.append(ValidationIssue(cell_id, check, message))

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self):
        return len(self.issues)

    def for_cell(self, cell_id: str) -> list[ValidationIssue]:
        return [i for i in self.issues if i.cell_id == cell_id]

    def checks(self) -> set[str]:
        return {i.check for i in self.issues}

    def render(self) -> str:
        if self.ok:
            return "environment OK"
        return "\n".join(str(i) for i in self.issues)


def validate(env: Environment) -> ValidationReport:
    report = ValidationReport()
    ids = {c.id for c in env.cells}

    for c in env.cells:
        poly = c.polytope
        if poly.dimension != env.dimension:
            report.add(c.id, "dimension", f"polytope dimension {poly.dimension} != {env.dimension}")
            continue
        norms = poly.row_norms()
        if np.any(np.abs(norms - 1.0) > NORMALIZATION_TOL):
            report.add(c.id, "normalization", f"face norms {np.round(norms, 15).tolist()} are not unit")
        _, radius = chebyshev_center(poly)
        if not radius > 0.0:
            report.add(c.id, "interior", f"cell has empty interior ({radius=})")
        elif not poly.is_bounded():
            lower, upper = poly.bounding_box()
            report.add(c.id, "bounded", f"cell is unbounded, bounding box {lower.tolist()} to {upper.tolist()}")
        if c.segment.dimension != env.dimension:
            report.add(c.id, "segment", f"control points have dimension {c.segment.dimension}")
            continue
        if c.segment.degree != env.spline_degree:
            report.add(c.id, "segment", f"spline degree {c.segment.degree} != {env.spline_degree}")
        for i, point in enumerate(c.segment.columns()):
            if not poly.contains(point, CONTAINMENT_TOL):
                excess = float(np.max(poly.A @ point - poly.b))
                report.add(c.id, "containment", f"control point {i} {point.tolist()} lies outside by {excess:.3g}")
        if c.successor is not None and c.successor not in ids:
            report.add(c.id, "successor", f"successor {c.successor!r} does not exist")

    try:
        env.chain()
        chain_ok = True
    except (KeyError, ValueError) as e:
        report.add(env.cells[0].id if env.cells else "-", "chain", str(e))
        chain_ok = False

    for c in env.cells:
        if c.successor is None or c.successor not in ids:
            continue
        nxt = env.cell(c.successor)
        if nxt.polytope.dimension != c.polytope.dimension or nxt.segment.dimension != c.segment.dimension:
            continue
        both = overlap(c, nxt)
        _, radius = chebyshev_center(both)
        if not radius > 0.0:
            report.add(c.id, "overlap", f"no overlap with successor {nxt.id!r} ({radius=})")
        gap = float(np.linalg.norm(c.switching_point - nxt.segment.first))
        if gap > SWITCH_POINT_TOL:
            report.add(c.id, "switching_point", f"last control point differs from first of {nxt.id!r} by {gap:.3g}")
        if not np.all(both.A @ c.switching_point < both.b):
            report.add(c.id, "switching_point", f"switching point not strictly inside overlap with {nxt.id!r}")

    logger.info(f"Validated {len(env.cells)} cells, {chain_ok=}, issues={len(report)}")
    return report
