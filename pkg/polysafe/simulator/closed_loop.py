import logging
from collections.abc import Callable, Mapping

import numpy as np

from ..environment import Cell, Environment
from ..synthesis import AgentSystem, GainLibrary, GainMatrix
from ..trajectory import (
    ReferenceSystem,
    build_reference,
    closest_parameter,
    coeffs_from_control_points,
    evaluate,
    reference_state_at,
)
from .config import SimConfig
from .log import SwitchEvent, TrajectoryLog

__all__ = [
    "IntegrationError",
    "OutsideEnvironmentError",
    "SimulationTimeoutError",
    "held_reference_state",
    "run",
    "sample_initial_states",
    "step",
]

logger = logging.getLogger(__name__)

# remaining reference time below which the segment is treated as finished
_MIN_STEP = 1e-9


class IntegrationError(RuntimeError):
    pass


class OutsideEnvironmentError(ValueError):
    pass


class SimulationTimeoutError(TimeoutError):
    def __init__(self, message: str, log: TrajectoryLog, cell_id: str):
        super().__init__(message)
        self.log = log
        self.cell_id = cell_id

    @property
    def last_state(self) -> np.ndarray:
        return self.log.final_state


def step(
    agent: AgentSystem,
    K: GainMatrix,
    ref: ReferenceSystem,
    x: np.ndarray,
    x_p: np.ndarray,
    dt: float,
    noise: np.ndarray | None = None,
    time_scale: float = 1.0,
    integrator: str = "rk4",
    hold: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance ``[x; x_p]`` by ``dt`` under ``u = K_y C x + K_p x_p + w``.

    ``w`` is held constant over the step. With ``hold`` the reference state is frozen.
    Returns ``(x_next, x_p_next, u)`` with ``u`` evaluated at the start of the step.
    """
    w = np.zeros(agent.d_u) if noise is None else np.asarray(noise, dtype=float)
    A_p = np.zeros_like(ref.A_p) if hold else ref.A_p / time_scale

    def rhs(x_, xp_):
        u_ = K.control(agent.C @ x_, xp_) + w
        return agent.A @ x_ + agent.B @ u_, A_p @ xp_

    u = K.control(agent.C @ x, x_p) + w
    if integrator == "euler":
        dx, dxp = rhs(x, x_p)
        x_next, xp_next = x + dt * dx, x_p + dt * dxp
    elif integrator == "rk4":
        k1 = rhs(x, x_p)
        k2 = rhs(x + 0.5 * dt * k1[0], x_p + 0.5 * dt * k1[1])
        k3 = rhs(x + 0.5 * dt * k2[0], x_p + 0.5 * dt * k2[1])
        k4 = rhs(x + dt * k3[0], x_p + dt * k3[1])
        x_next = x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        xp_next = x_p + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    else:
        raise ValueError(f"unknown integrator {integrator!r}")

    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(xp_next))):
        raise IntegrationError(f"non-finite state after step: {x_next=} {xp_next=}")
    return x_next, xp_next, u


def held_reference_state(ref: ReferenceSystem, cell: Cell) -> np.ndarray:
    """Constant reference ``[p(1), 0, ..., 0]`` per axis, a rest point of the reference system."""
    state = np.zeros((ref.output_dim, ref.degree + 1))
    state[:, 0] = evaluate(cell.segment, 1.0, 0)
    return state.reshape(-1)


def _gain_lookup(gains: GainLibrary | Mapping[str, GainMatrix]) -> Callable[[str], GainMatrix]:
    if isinstance(gains, GainLibrary):
        return gains.gain

    def lookup(cell_id: str) -> GainMatrix:
        if cell_id not in gains:
            raise KeyError(f"no gain for cell {cell_id!r}")
        return gains[cell_id]

    return lookup


def run(
    env: Environment,
    gains: GainLibrary | Mapping[str, GainMatrix],
    x0,
    config: SimConfig | None = None,
    agent: AgentSystem | None = None,
) -> TrajectoryLog:
    """Simulate the switched closed loop from ``x0`` until the end of the cell chain.

    Every cell entry re-anchors the reference at the segment point closest to the output. The
    controller hands off as soon as the agent is inside the successor, or once the reference has
    finished and the agent is near the switching point.
    """
    config = config or SimConfig()
    if isinstance(gains, GainLibrary):
        agent = agent or gains.agent
        if gains.config.time_scale != config.time_scale:
            logger.warning(f"Gains were synthesized for time_scale={gains.config.time_scale}, simulating with {config.time_scale}")
    if agent is None:
        raise ValueError("an agent model is required when gains are not a GainLibrary")
    lookup = _gain_lookup(gains)
    rng = np.random.default_rng(config.seed)
    noise_std = float(np.sqrt(config.noise_var))
    T = config.time_scale

    x = np.asarray(x0, dtype=float).reshape(-1)
    cell = env.first_containing(x)
    if cell is None:
        raise OutsideEnvironmentError(f"initial state {x.tolist()} lies in no cell")

    log = TrajectoryLog()
    t = 0.0
    while True:
        K = lookup(cell.id)
        ref = build_reference(coeffs_from_control_points(cell.segment))
        s = closest_parameter(cell.segment, agent.C @ x, config.closest_resolution)
        hold = s >= 1.0
        x_p = held_reference_state(ref, cell) if hold else reference_state_at(ref, cell.segment, s)
        if not log.t:
            _record(log, t, x, K.control(agent.C @ x, x_p), cell, s, ref, x_p, agent)
        segment_start = t
        logger.debug(f"Entered cell {cell.id} at {t=:.3f} anchored at {s=:.4f}")

        successor = env.cell(cell.successor) if cell.successor is not None else None
        while True:
            near = hold and np.linalg.norm(agent.C @ x - cell.switching_point) <= config.switch_tol
            if successor is None:
                if near:
                    logger.info(f"Reached end of chain in cell {cell.id} at {t=:.3f}")
                    return log
            elif near or successor.polytope.contains(x):
                log.switch_events.append(SwitchEvent(t, cell.id, successor.id, tuple((agent.C @ x).tolist())))
                logger.info(f"Switch {cell.id} -> {successor.id} at {t=:.3f} ({near=})")
                cell = successor
                break

            if t - segment_start > config.max_segment_time:
                logger.warning(f"Timeout in cell {cell.id} after {t - segment_start:.2f}s")
                raise SimulationTimeoutError(
                    f"cell {cell.id!r}: no hand-off within {config.max_segment_time}s, last state {x.tolist()}",
                    log=log,
                    cell_id=cell.id,
                )

            dt = config.dt if hold else min(config.dt, (1.0 - s) * T)
            if not hold and dt < _MIN_STEP:
                s, hold = 1.0, True
                x_p = held_reference_state(ref, cell)
                continue
            noise = rng.normal(0.0, noise_std, agent.d_u) if noise_std > 0 else None
            x, x_p, u = step(agent, K, ref, x, x_p, dt, noise, T, config.integrator, hold)
            t += dt
            if not hold:
                s = min(1.0, s + dt / T)
                if s >= 1.0 or (1.0 - s) * T < _MIN_STEP:
                    s, hold = 1.0, True
                    x_p = held_reference_state(ref, cell)
            _record(log, t, x, u, cell, s, ref, x_p, agent)


def _record(log: TrajectoryLog, t, x, u, cell: Cell, s, ref: ReferenceSystem, x_p, agent: AgentSystem):
    y_p = ref.output(x_p)
    e = agent.C @ x - y_p
    log.record(t, x, u, cell.id, s, y_p, cell.polytope.values(x), float(e @ e))


def sample_initial_states(env: Environment, num: int, rng: np.random.Generator, max_tries: int = 10_000) -> list[np.ndarray]:
    """Rejection-sample ``num`` states, cycling over the cells in chain order."""
    cells = env.chain()
    states = []
    for i in range(num):
        cell = cells[i % len(cells)]
        lower, upper = cell.polytope.bounding_box()
        for _ in range(max_tries):
            candidate = rng.uniform(lower, upper)
            if cell.polytope.contains(candidate, 0.0):
                states.append(candidate)
                break
        else:
            raise RuntimeError(f"rejection sampling found no state in cell {cell.id!r}")
    return states
