"""Experiment runner: trial batches, metrics tables, trajectory and weight logs.

Output layout for one experiment directory::

    metrics.csv
    summary.json
    trials/<name>/trajectory.csv   step,t,x,y,heading,success_flag
    trials/<name>/fitness.csv      per-step fitness components
    trials/<name>/sensors.csv      per-step controller inputs
    trials/<name>/weights.csv      hebbian mode only
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .network import Genotype, load_genome
from .plasticity import PlasticityConfig
from .trial import FITNESS_COLUMNS, TrialMetrics, TrialOutcome, WeightChangeLog, run_trial
from .world import MazeSpec, SimConfig, load_world, t_maze

METRIC_COLUMNS = ("success", "time_to_goal", "path_length", "average_speed", "final_position_error",
                  "min_position_error", "weight_change_cumulative", "weight_change_per_step")
SENSOR_COLUMNS = tuple(f"light{i}" for i in range(8)) + tuple(f"prox{i}" for i in range(8))
MISSING = "NA"


def fmt(value) -> str:
    if value is None:
        return MISSING
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6f}"


@dataclass(frozen=True)
class TrialSpec:
    """One maze variant: light present means the correct turn is right."""

    light: bool
    luminosity: float = 1.0
    obstacles: int = 0

    @property
    def direction(self) -> str:
        return "right" if self.light else "left"

    @property
    def name(self) -> str:
        return f"lum{self.luminosity:g}_obs{self.obstacles}_{self.direction}"

    def apply(self, maze: MazeSpec) -> MazeSpec:
        return maze.with_light(self.light).with_luminosity(self.luminosity).with_obstacles(self.obstacles)


def both_directions(luminosity: float = 1.0, obstacles: int = 0) -> list[TrialSpec]:
    return [TrialSpec(False, luminosity, obstacles), TrialSpec(True, luminosity, obstacles)]


def experiment_one_trials(dimmed: float = 0.1) -> list[TrialSpec]:
    """Training lighting and dimmed lighting, each turn direction."""
    return both_directions(1.0) + both_directions(dimmed)


def experiment_two_trials(obstacle_counts: Sequence[int] = (0, 2, 4)) -> list[TrialSpec]:
    return [t for n in obstacle_counts for t in both_directions(1.0, n)]


@dataclass
class ExperimentConfig:
    genome: Genotype | str | Path
    mode: str = "ga"
    plasticity: PlasticityConfig = field(default_factory=PlasticityConfig)
    trials: list[TrialSpec] = field(default_factory=both_directions)
    world: MazeSpec | str | Path | None = None
    sim: SimConfig | None = None
    seed: int = 0
    out_dir: str | Path | None = None

    def __post_init__(self):
        if self.mode not in ("ga", "hebbian"):
            raise ValueError(f"mode must be 'ga' or 'hebbian', got {self.mode!r}")
        if self.mode == "ga":
            self.plasticity = replace(self.plasticity, enabled=False)


@dataclass
class TrialResult:
    spec: TrialSpec
    outcome: TrialOutcome
    metrics: TrialMetrics
    log: WeightChangeLog | None

    def row(self, mode: str) -> dict:
        row = {"trial": self.spec.name, "mode": mode, "direction": self.spec.direction,
               "luminosity": self.spec.luminosity, "obstacles": self.spec.obstacles}
        row.update({k: getattr(self.metrics, k) for k in METRIC_COLUMNS})
        return row


@dataclass
class ExperimentResult:
    mode: str
    results: list[TrialResult]

    @property
    def rows(self) -> list[dict]:
        return [r.row(self.mode) for r in self.results]

    def by_name(self) -> dict[str, TrialResult]:
        return {r.spec.name: r for r in self.results}

    def table(self) -> str:
        head = f"{'trial':24s} {'mode':8s} {'succ':>4s} {'t_goal':>8s} {'path':>7s} {'speed':>7s} {'err':>7s} {'dW/step':>9s}"
        lines = [head, "-" * len(head)]
        for row in self.rows:
            lines.append(f"{row['trial']:24s} {row['mode']:8s} {row['success']:>4d} {fmt(row['time_to_goal']):>8s} "
                         f"{row['path_length']:7.4f} {row['average_speed']:7.4f} "
                         f"{row['final_position_error']:7.4f} {fmt(row['weight_change_per_step']):>9s}")
        return "\n".join(lines)


def _resolve_inputs(config: ExperimentConfig) -> tuple[Genotype, MazeSpec, SimConfig, dict]:
    hashes = {}
    genome = config.genome
    if not isinstance(genome, Genotype):
        hashes["genome"] = _sha256(genome)
        genome = load_genome(genome)
    else:
        hashes["genome"] = hashlib.sha256(json.dumps(genome.to_dict()).encode()).hexdigest()
    world, sim = config.world, config.sim
    if world is None:
        world = t_maze()
    elif not isinstance(world, MazeSpec):
        hashes["world"] = _sha256(world)
        world, file_sim = load_world(world)
        sim = sim or file_sim
    return genome, world, sim or SimConfig(), hashes


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_experiment(config: ExperimentConfig, verbose: bool = False) -> ExperimentResult:
    """Run every trial in ``config`` and, if ``out_dir`` is set, write all outputs."""
    genome, world, sim, hashes = _resolve_inputs(config)
    plasticity = config.plasticity if config.mode == "hebbian" else None
    results = []
    for spec in config.trials:
        outcome, metrics, log = run_trial(genome, spec.apply(world), plasticity, config.seed, sim)
        results.append(TrialResult(spec, outcome, metrics, log))
    result = ExperimentResult(config.mode, results)
    if config.out_dir is not None:
        write_experiment(result, config, world, sim, hashes)
    if verbose:
        print(result.table())
    return result


def write_experiment(result: ExperimentResult, config: ExperimentConfig, world: MazeSpec,
                     sim: SimConfig, hashes: dict) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns = ("trial", "mode", "direction", "luminosity", "obstacles") + METRIC_COLUMNS
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in result.rows:
            w.writerow([row[c] if c in ("trial", "mode", "direction") else fmt(row[c]) for c in columns])
    for r in result.results:
        write_trial_files(out / "trials" / r.spec.name, r.outcome, r.log, world, r.spec, sim)
    summary = {
        "mode": config.mode,
        "seed": config.seed,
        "plasticity": asdict(config.plasticity),
        "sim": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(sim).items()},
        "trials": [asdict(t) | {"name": t.name} for t in config.trials],
        "input_sha256": hashes,
        "world": world.to_dict(),
        "metrics": [{k: (None if v is None else v) for k, v in row.items()} for row in result.rows],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return out


def write_trial_files(trial_dir: Path, outcome: TrialOutcome, log: WeightChangeLog | None,
                      world: MazeSpec, spec: TrialSpec, sim: SimConfig) -> None:
    trial_dir.mkdir(parents=True, exist_ok=True)
    goal = spec.apply(world).correct_goal
    with open(trial_dir / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", "x", "y", "heading", "success_flag"])
        for k, ((x, y), h) in enumerate(zip(outcome.trajectory, outcome.headings)):
            at_goal = math.hypot(goal[0] - x, goal[1] - y) <= sim.success_radius
            w.writerow([k, fmt(k * sim.dt), fmt(x), fmt(y), fmt(h), int(at_goal)])
    with open(trial_dir / "fitness.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("step",) + FITNESS_COLUMNS)
        for k, row in enumerate(outcome.fitness):
            w.writerow([k] + [fmt(v) for v in row])
    with open(trial_dir / "sensors.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("step",) + SENSOR_COLUMNS)
        for k, row in enumerate(outcome.sensors):
            w.writerow([k] + [fmt(v) for v in row])
    if log is not None:
        with open(trial_dir / "weights.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "F", "N_e", "sum_abs_delta", "max_abs_weight"])
            for k in range(len(log.fitness)):
                w.writerow([k, fmt(log.fitness[k]), fmt(log.rate[k]), fmt(log.sum_abs_delta[k]),
                            fmt(log.max_abs_weight[k])])


# -- correlation report ----------------------------------------------------------

@dataclass
class CorrelationReport:
    fitness: np.ndarray                # per-step F
    sum_abs_delta: np.ndarray          # per-step sum |dW|
    fitness_change_r: float            # Pearson(F, sum |dW|), nan if undefined
    fitness_change_defined: bool
    sensor_r: dict[str, float]         # Pearson(sum |dW|, channel), nan if undefined
    sensor_defined: dict[str, bool]

    def rows(self) -> list[tuple[str, float, bool]]:
        out = [("F", self.fitness_change_r, self.fitness_change_defined)]
        out += [(k, self.sensor_r[k], self.sensor_defined[k]) for k in self.sensor_r]
        return out


def pearson(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Pearson r, or (nan, False) when either series has zero variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if len(a) < 2 or denom == 0.0:
        return math.nan, False
    return float(np.dot(da, db) / denom), True


def correlation_report(weight_log: WeightChangeLog | np.ndarray, sensor_log: np.ndarray) -> CorrelationReport:
    """Correlate per-step weight change with live fitness and each sensor channel.

    ``weight_log`` is a WeightChangeLog or an (n, >=3) array with columns
    F, N_e, sum_abs_delta; ``sensor_log`` is (n, 16).
    """
    if isinstance(weight_log, WeightChangeLog):
        fit, delta = weight_log.fitness, weight_log.sum_abs_delta
    else:
        arr = np.asarray(weight_log, dtype=np.float64)
        fit, delta = arr[:, 0], arr[:, 2]
    sensors = np.asarray(sensor_log, dtype=np.float64)
    if sensors.ndim != 2 or sensors.shape[1] != len(SENSOR_COLUMNS):
        raise ValueError(f"sensor log must be (n, {len(SENSOR_COLUMNS)})")
    if len(fit) != len(sensors):
        raise ValueError(f"weight log has {len(fit)} steps, sensor log has {len(sensors)}")
    r_f, ok_f = pearson(fit, delta)
    sensor_r, sensor_ok = {}, {}
    for i, name in enumerate(SENSOR_COLUMNS):
        sensor_r[name], sensor_ok[name] = pearson(delta, sensors[:, i])
    return CorrelationReport(np.asarray(fit), np.asarray(delta), r_f, ok_f, sensor_r, sensor_ok)


def _read_csv(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def report_trial_dir(trial_dir: str | Path) -> CorrelationReport:
    """Build a report from a trial directory and write ``correlation.csv`` into it."""
    trial_dir = Path(trial_dir)
    weights = _read_csv(trial_dir / "weights.csv")[:, 1:]
    sensors = _read_csv(trial_dir / "sensors.csv")[:, 1:]
    if len(weights) == 0:
        weights = np.zeros((0, 4))
        sensors = sensors.reshape(0, len(SENSOR_COLUMNS))
    report = correlation_report(weights, sensors)
    with open(trial_dir / "correlation.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["signal", "pearson_r", "defined"])
        for name, r, ok in report.rows():
            w.writerow([name, "nan" if math.isnan(r) else fmt(r), int(ok)])
    return report
