import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from ..trajectory import ControlPoints, DomainError
from ..utils.misc import atomic_write_text
from .cells import Cell, Environment
from .polytope import Polytope

__all__ = ["EnvironmentFormatError", "environment_from_dict", "environment_to_dict", "load", "save"]

logger = logging.getLogger(__name__)


class EnvironmentFormatError(ValueError):
    """Malformed environment file; the message names the byte offset or cell and field path."""


def _require(data: dict, key: str, path: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise EnvironmentFormatError(f"{path}: missing field {key!r}")
    return data[key]


def _vector(value, path: str, length: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(v, int | float) and not isinstance(v, bool) for v in value):
        raise EnvironmentFormatError(f"{path}: expected a list of numbers, got {value!r}")
    if length is not None and len(value) != length:
        raise EnvironmentFormatError(f"{path}: expected {length} numbers, got {len(value)}")
    return np.array(value, dtype=float)


def environment_from_dict(data: dict) -> Environment:
    dimension = _require(data, "dimension", "$")
    degree = _require(data, "spline_degree", "$")
    if not isinstance(dimension, int) or dimension < 1:
        raise EnvironmentFormatError(f"$.dimension: expected a positive integer, got {dimension!r}")
    if not isinstance(degree, int) or degree < 0:
        raise EnvironmentFormatError(f"$.spline_degree: expected a nonnegative integer, got {degree!r}")
    raw_cells = _require(data, "cells", "$")
    if not isinstance(raw_cells, list) or not raw_cells:
        raise EnvironmentFormatError("$.cells: expected a nonempty list")

    cells = []
    for idx, raw in enumerate(raw_cells):
        cell_id = raw.get("id") if isinstance(raw, dict) else None
        if not isinstance(cell_id, str):
            raise EnvironmentFormatError(f"cells[{idx}].id: expected a string, got {cell_id!r}")
        where = f"cell {cell_id!r}"

        halfspaces = _require(raw, "halfspaces", where)
        if not isinstance(halfspaces, list) or not halfspaces:
            raise EnvironmentFormatError(f"{where}: halfspaces: expected a nonempty list")
        normals, offsets = [], []
        for j, h in enumerate(halfspaces):
            normals.append(_vector(_require(h, "normal", f"{where}: halfspaces[{j}]"), f"{where}: halfspaces[{j}].normal", dimension))
            offset = _require(h, "offset", f"{where}: halfspaces[{j}]")
            if not isinstance(offset, int | float) or isinstance(offset, bool):
                raise EnvironmentFormatError(f"{where}: halfspaces[{j}].offset: expected a number, got {offset!r}")
            offsets.append(float(offset))
        try:
            polytope = Polytope(np.array(normals), np.array(offsets)).normalized()
        except ValueError as e:
            raise EnvironmentFormatError(f"{where}: halfspaces: {e}") from e

        points = _require(raw, "control_points", where)
        if not isinstance(points, list) or len(points) != degree + 1:
            raise EnvironmentFormatError(f"{where}: control_points: expected {degree + 1} points")
        try:
            segment = ControlPoints(
                np.stack([_vector(p, f"{where}: control_points[{k}]", dimension) for k, p in enumerate(points)], axis=1)
            )
        except DomainError as e:
            raise EnvironmentFormatError(f"{where}: control_points: {e}") from e

        successor = raw.get("successor")
        if successor is not None and not isinstance(successor, str):
            raise EnvironmentFormatError(f"{where}: successor: expected a string or null, got {successor!r}")
        cells.append(Cell(id=cell_id, polytope=polytope, segment=segment, successor=successor))

    try:
        return Environment(cells=tuple(cells), dimension=dimension)
    except ValueError as e:
        raise EnvironmentFormatError(f"$.cells: {e}") from e


def environment_to_dict(env: Environment) -> dict:
    return {
        "dimension": env.dimension,
        "spline_degree": env.spline_degree,
        "cells": [
            {
                "id": c.id,
                "halfspaces": [
                    {"normal": c.polytope.A[i].tolist(), "offset": float(c.polytope.b[i])}
                    for i in range(c.polytope.num_faces)
                ],
                "control_points": c.segment.points.T.tolist(),
                "successor": c.successor,
            }
            for c in env.cells
        ],
    }


def load(path: str | Path) -> Environment:
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EnvironmentFormatError(f"{path}: invalid UTF-8 at byte offset {e.start}: {e.reason}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise EnvironmentFormatError(f"{path}: parse error at byte offset {offset}: {e.msg}") from e
    if not isinstance(data, dict):
        raise EnvironmentFormatError(f"{path}: top level must be an object")
    env = environment_from_dict(data)
    logger.info(f"Loaded environment {path.name}: {len(env.cells)} cells, d={env.dimension}, n_p={env.spline_degree}")
    return env


def save(env: Environment, path: str | Path) -> Path:
    return atomic_write_text(path, json.dumps(environment_to_dict(env), indent=2) + "\n")
