"""Environment-wide synthesis and batched simulation shared by the CLI commands."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .environment import Environment
from .simulator import SimConfig, SimulationTimeoutError, TrajectoryLog, run, safety_margin
from .synthesis import (
    AgentSystem,
    GainLibrary,
    SynthesisConfig,
    SynthesisInfeasibleError,
    UnboundedCellError,
    synthesize,
    synthesize_decomposed,
)
from .trajectory import build_reference, coeffs_from_control_points
from .utils.metric_utils import compute_statistics, dict_add_prefix

__all__ = ["RunResult", "SynthesisFailure", "simulate_runs", "summarize_runs", "synthesize_environment"]

logger = logging.getLogger(__name__)


@dataclass
class SynthesisFailure:
    cell_id: str
    face_index: int | None
    message: str


def synthesize_environment(
    env: Environment,
    agent: AgentSystem,
    config: SynthesisConfig,
    per_axis: bool = False,
    rate: float | None = None,
) -> tuple[GainLibrary, list[SynthesisFailure]]:
    """Synthesize every cell; infeasible cells are collected instead of aborting the sweep."""
    library = GainLibrary(agent=agent, config=config)
    failures = []
    for cell in env.chain():
        ref = build_reference(coeffs_from_control_points(cell.segment))
        try:
            if per_axis:
                gain, certificate = synthesize_decomposed(cell, agent, ref, config, mu=rate)
            else:
                gain, certificate = synthesize(cell, agent, ref, config)
        except SynthesisInfeasibleError as e:
            logger.error(f"Cell {cell.id}: {e}")
            failures.append(SynthesisFailure(cell.id, e.face_index, str(e)))
            continue
        except UnboundedCellError as e:
            logger.error(f"Cell {cell.id}: {e}")
            failures.append(SynthesisFailure(cell.id, None, str(e)))
            continue
        library.add(cell.id, gain, certificate)
        if not certificate.passed:
            failures.append(SynthesisFailure(cell.id, None, f"certificate failed: {certificate.summary()}"))
    return library, failures


@dataclass
class RunResult:
    index: int
    x0: list[float]
    status: str
    final_error: float
    min_h: float
    margins: dict[str, float]
    switch_points: list[dict[str, Any]] = field(default_factory=list)
    log_path: str | None = None
    log: TrajectoryLog | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "x0": self.x0,
            "status": self.status,
            "final_error": self.final_error,
            "min_h": self.min_h,
            "margins": self.margins,
            "switch_points": self.switch_points,
            "log": self.log_path,
        }


def simulate_runs(
    env: Environment,
    library: GainLibrary,
    initial_states: list[np.ndarray],
    config: SimConfig,
    out_dir: str | Path | None = None,
    prefix: str = "run",
) -> list[RunResult]:
    """Run sequentially; run ``i`` uses seed ``config.seed + i`` so that reruns are identical."""
    goal = env.chain()[-1].switching_point
    results = []
    for i, x0 in enumerate(initial_states):
        run_config = SimConfig(**{**config.to_dict(), "seed": config.seed + i})
        try:
            log = run(env, library, x0, run_config)
            status = "ok"
        except SimulationTimeoutError as e:
            log, status = e.log, "timeout"
        y = library.agent.C @ log.final_state
        margins = safety_margin(log, env)
        result = RunResult(
            index=i,
            x0=[float(v) for v in x0],
            status=status,
            final_error=float(np.linalg.norm(y - goal)),
            min_h=float(min(margins.values())),
            margins=margins,
            switch_points=[{"t": ev.t, "from": ev.from_cell, "to": ev.to_cell, "y": list(ev.y)} for ev in log.switch_events],
            log=log,
        )
        if out_dir is not None:
            path = Path(out_dir) / f"{prefix}_{i:03d}.csv"
            log.to_csv(path)
            result.log_path = str(path)
        logger.info(f"Run {i}: {status=} final_error={result.final_error:.3g} min_h={result.min_h:.3g}")
        results.append(result)
    return results


def summarize_runs(results: list[RunResult], noise_var: float) -> dict[str, Any]:
    summary = {
        "noise_var": noise_var,
        "num_runs": len(results),
        "num_timeouts": sum(r.status != "ok" for r in results),
        "all_safe": all(r.min_h >= 0.0 for r in results),
        "min_h": compute_statistics([r.min_h for r in results]),
        "final_error": compute_statistics([r.final_error for r in results]),
        "runs": [r.to_dict() for r in results],
    }
    stats = {**dict_add_prefix(summary["min_h"], "min_h/"), **dict_add_prefix(summary["final_error"], "final_error/")}
    logger.info(f"Batch {noise_var=}: {stats}")
    return summary
