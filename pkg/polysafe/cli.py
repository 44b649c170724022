import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import typer
import yaml
from omegaconf.errors import OmegaConfBaseException

from . import asset_path
from .environment import EnvironmentFormatError, load, validate
from .manifest import RunManifest
from .pipeline import simulate_runs, summarize_runs, synthesize_environment
from .plotting import write_svg
from .simulator import (
    IntegrationError,
    OutsideEnvironmentError,
    SimConfig,
    SimulationTimeoutError,
    TrajectoryLog,
    sample_initial_states,
)
from .synthesis import (
    AgentSystem,
    GainLibrary,
    RelativeDegreeError,
    SolverFailureError,
    SynthesisConfig,
    SynthesisInfeasibleError,
    UnboundedCellError,
)
from .utils.logging_utils import configure_logger
from .utils.misc import atomic_write_text
from .utils.timer import Timer, timer
from .utils.typer_utils import dataclass_cli

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="Per-cell safe tracking controllers: validate, synthesize, simulate, plot.")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


@app.callback()
def _main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging.")):
    configure_logger(level=logging.DEBUG if verbose else logging.INFO)


@contextmanager
def _exit_codes():
    try:
        yield
    except (SynthesisInfeasibleError, RelativeDegreeError, SolverFailureError, UnboundedCellError) as e:
        typer.echo(f"synthesis failed: {e}", err=True)
        raise typer.Exit(EXIT_DOMAIN) from e
    except (OutsideEnvironmentError, SimulationTimeoutError, IntegrationError, KeyError) as e:
        typer.echo(f"simulation failed: {e}", err=True)
        raise typer.Exit(EXIT_DOMAIN) from e
    except (OSError, EnvironmentFormatError, json.JSONDecodeError, yaml.YAMLError, OmegaConfBaseException, ValueError) as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(EXIT_IO) from e


def _resolve(path: Path) -> Path:
    """Existing path as given, else the bundled asset of the same name."""
    if path.exists():
        return path
    bundled = asset_path(path.name)
    if path.parent.name == "assets" and bundled.exists():
        return bundled
    raise FileNotFoundError(f"no such file: {path}")


def _write_yaml(path: Path, data: dict) -> Path:
    return atomic_write_text(path, yaml.safe_dump(data, sort_keys=False))


@dataclass
class ValidateArgs:
    env: Path = field(metadata={"cli": "argument", "help": "Environment JSON file."})


@app.command("validate")
@dataclass_cli
def cmd_validate(args: ValidateArgs):
    """Check containment, overlaps and switching points of an environment file."""
    with _exit_codes():
        env = load(_resolve(args.env))
        report = validate(env)
    typer.echo(report.render())
    raise typer.Exit(EXIT_OK if report.ok else EXIT_DOMAIN)


@dataclass
class SynthesizeArgs:
    env: Path = field(metadata={"cli": "argument", "help": "Environment JSON file."})
    out: Path = field(default=Path("gains.json"), metadata={"help": "Gain library output."})
    alpha: float | None = field(default=None, metadata={"help": "Barrier gain (default 10)."})
    delta: float | None = field(default=None, metadata={"help": "Safety margin (default 0.1)."})
    kmax: float | None = field(default=None, metadata={"help": "Bound on gain entries (default 50)."})
    mode: str | None = field(default=None, metadata={"help": "exponential (default) | paper"})
    per_axis: bool = field(default=False, metadata={"help": "Compose per-axis gains when the agent allows it."})
    rate: float | None = field(default=None, metadata={"help": "Shared rate for --per-axis."})
    solver: str | None = None
    time_scale: float | None = None
    agent_file: Path | None = field(default=None, metadata={"help": "YAML with A, B, C; default single integrator."})
    config: Path | None = field(default=None, metadata={"help": "YAML synthesis config; flags override it."})

    def __post_init__(self):
        # bad flag values are usage errors, reported before any file is read
        SynthesisConfig(**self._flags())

    def _flags(self) -> dict:
        flags = dict(
            alpha=self.alpha,
            delta=self.delta,
            k_max=self.kmax,
            mode=self.mode,
            solver=self.solver,
            time_scale=self.time_scale,
        )
        return {k: v for k, v in flags.items() if v is not None}

    def synthesis_config(self) -> SynthesisConfig:
        base = SynthesisConfig.from_yaml(self.config).to_dict() if self.config is not None else {}
        return SynthesisConfig(**{**base, **self._flags()})


@app.command("synthesize")
@dataclass_cli
def cmd_synthesize(args: SynthesizeArgs):
    """Synthesize and certify one gain per cell."""
    with _exit_codes():
        env = load(_resolve(args.env))
        agent = AgentSystem.from_yaml(args.agent_file) if args.agent_file else AgentSystem.single_integrator(env.dimension)
        library, failures = synthesize_environment(env, agent, args.synthesis_config(), args.per_axis, args.rate)
    for cell_id, entry in library.cells.items():
        typer.echo(f"{cell_id}: mu={entry.mu:.6g} passed={entry.passed}")
    if failures:
        for failure in failures:
            typer.echo(f"FAILED {failure.cell_id} (face {failure.face_index}): {failure.message}", err=True)
        raise typer.Exit(EXIT_DOMAIN)
    with _exit_codes():
        library.save(args.out)


@dataclass
class SimulateArgs:
    env: Path = field(metadata={"cli": "argument", "help": "Environment JSON file."})
    gains: Path = field(metadata={"cli": "argument", "help": "Gain library from `synthesize`."})
    out_dir: Path = Path("logs")
    inits: int = field(default=1, metadata={"help": "Number of random initial states."})
    seed: int = 0
    noise_var: float = field(default=0.0, metadata={"help": "Variance of the per-step input noise."})
    x0: str | None = field(default=None, metadata={"help": "Initial state 'x,y'; overrides --inits."})
    dt: float = 1e-3
    time_scale: float = 1.0
    switch_tol: float = 1e-2
    integrator: str = "rk4"

    def sim_config(self) -> SimConfig:
        return SimConfig(
            dt=self.dt,
            time_scale=self.time_scale,
            switch_tol=self.switch_tol,
            noise_var=self.noise_var,
            seed=self.seed,
            integrator=self.integrator,
        )

    def __post_init__(self):
        self.sim_config()
        if self.inits < 1:
            raise ValueError(f"--inits must be positive, got {self.inits}")


def _parse_x0(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as e:
        raise ValueError(f"--x0 must be comma separated numbers, got {text!r}") from e


@app.command("simulate")
@dataclass_cli
def cmd_simulate(args: SimulateArgs):
    """Simulate the switched closed loop from given or random initial states."""
    with _exit_codes():
        env = load(_resolve(args.env))
        library = GainLibrary.load(args.gains)
        config = args.sim_config()
        if args.x0 is not None:
            x0 = _parse_x0(args.x0)
            if env.first_containing(x0) is None:
                raise OutsideEnvironmentError(f"--x0 {x0.tolist()} lies in no cell")
            states = [x0]
        else:
            states = sample_initial_states(env, args.inits, np.random.default_rng(args.seed))
        results = simulate_runs(env, library, states, config, args.out_dir)
        summary = summarize_runs(results, args.noise_var)
        _write_yaml(args.out_dir / "summary.yaml", summary)
    typer.echo(
        f"{summary['num_runs']} runs, {summary['num_timeouts']} timeouts, min h={summary['min_h'].get('min')}, "
        f"max final error={summary['final_error'].get('max')}"
    )
    if summary["num_timeouts"] or (args.noise_var == 0.0 and not summary["all_safe"]):
        raise typer.Exit(EXIT_DOMAIN)


@dataclass
class PlotArgs:
    env: Path = field(metadata={"cli": "argument", "help": "Environment JSON file."})
    logs: list[Path] | None = field(default=None, metadata={"cli": "argument", "help": "Trajectory CSV logs."})
    out: Path = Path("plot.svg")


@app.command("plot")
@dataclass_cli
def cmd_plot(args: PlotArgs):
    """Draw cells, reference splines and logged trajectories as SVG."""
    with _exit_codes():
        env = load(_resolve(args.env))
        logs = [TrajectoryLog.from_csv(p) for p in args.logs or []]
        write_svg(args.out, env, logs)
    typer.echo(f"wrote {args.out}")


@dataclass
class DemoArgs:
    out_dir: Path = Path("demo_out")
    env: Path | None = field(default=None, metadata={"help": "Defaults to the bundled figure-8 world."})
    inits: int = 10
    seed: int = 7
    noise_var: float = field(default=0.25, metadata={"help": "Variance of the noisy batch."})


def _pipeline(
    env_path: Path,
    out_dir: Path,
    agent: AgentSystem | None,
    synthesis: SynthesisConfig,
    base_sim: SimConfig,
    seeds: list[int],
    inits: int,
    noise_vars: list[float],
    per_axis: bool = False,
) -> int:
    Timer().reset()
    outputs: dict = {"environment": str(env_path), "batches": []}
    with timer("validate"):
        env = load(env_path)
        report = validate(env)
    if not report.ok:
        typer.echo(report.render(), err=True)
        return EXIT_DOMAIN
    agent = agent or AgentSystem.single_integrator(env.dimension)
    with timer("synthesize"):
        library, failures = synthesize_environment(env, agent, synthesis, per_axis)
    if failures:
        for failure in failures:
            typer.echo(f"FAILED {failure.cell_id}: {failure.message}", err=True)
        return EXIT_DOMAIN
    outputs["gains"] = str(library.save(out_dir / "gains.json"))

    exit_code = EXIT_OK
    for seed in seeds:
        states = sample_initial_states(env, inits, np.random.default_rng(seed))
        for noise_var in noise_vars:
            tag = f"seed{seed}_noise{noise_var:g}"
            config = SimConfig(**{**base_sim.to_dict(), "seed": seed, "noise_var": noise_var})
            with timer(f"simulate_{tag}"):
                results = simulate_runs(env, library, states, config, out_dir / tag)
            summary = summarize_runs(results, noise_var)
            _write_yaml(out_dir / tag / "summary.yaml", summary)
            with timer(f"plot_{tag}"):
                svg = write_svg(out_dir / f"{tag}.svg", env, [r.log for r in results])
            outputs["batches"].append(
                {
                    "seed": seed,
                    "noise_var": noise_var,
                    "summary": str(out_dir / tag / "summary.yaml"),
                    "svg": str(svg),
                    "all_safe": summary["all_safe"],
                    "num_timeouts": summary["num_timeouts"],
                }
            )
            if summary["num_timeouts"] or (noise_var == 0.0 and not summary["all_safe"]):
                exit_code = EXIT_DOMAIN
    # timings are logged, not written, so reruns produce identical files
    logger.info(f"Timings: {Timer().log_dict()}")
    _write_yaml(out_dir / "manifest.yaml", outputs)
    return exit_code


@app.command("demo")
@dataclass_cli
def cmd_demo(args: DemoArgs):
    """Validate, synthesize, simulate (noise-free and noisy) and plot the figure-8 world."""
    with _exit_codes():
        env_path = _resolve(args.env) if args.env is not None else asset_path("figure8_10cells.json")
        code = _pipeline(
            env_path,
            args.out_dir,
            None,
            SynthesisConfig(),
            SimConfig(),
            [args.seed],
            args.inits,
            [0.0, args.noise_var],
        )
    typer.echo(f"demo outputs in {args.out_dir}")
    raise typer.Exit(code)


@dataclass
class RunArgs:
    manifest: Path = field(metadata={"cli": "argument", "help": "YAML run manifest."})


@app.command("run")
@dataclass_cli
def cmd_run(args: RunArgs):
    """Execute a run manifest end to end."""
    with _exit_codes():
        manifest = RunManifest.load(args.manifest)
        out_dir = Path(manifest.output_dir)
        manifest.save(out_dir / "run_manifest.yaml")
        agent = AgentSystem.from_yaml(manifest.agent) if manifest.agent else None
        code = _pipeline(
            Path(manifest.environment),
            out_dir,
            agent,
            manifest.synthesis_config(),
            manifest.sim_config(),
            list(manifest.seeds),
            max(manifest.inits, 1),
            list(manifest.noise_vars),
            manifest.per_axis,
        )
    raise typer.Exit(code)


if __name__ == "__main__":
    app()
