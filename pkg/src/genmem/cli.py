"""Command line entry point: ``genmem evolve | run | report | world``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .evolution import GaConfig, evolve, save_evolution, training_mazes
from .harness import ExperimentConfig, both_directions, report_trial_dir, run_experiment
from .network import TopologyMismatch
from .plasticity import PlasticityConfig
from .world import SimConfig, load_world, save_world, t_maze


def _world(path):
    if path is None:
        return t_maze(), SimConfig()
    return load_world(path)


def cmd_evolve(args) -> int:
    maze, sim = _world(args.world)
    if args.max_steps is not None:
        sim = SimConfig(**{**sim.__dict__, "max_steps": args.max_steps})
    config = GaConfig(population_size=args.population, generations=args.generations,
                      elitism_count=args.elitism, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(gen, record):
        print(f"gen {gen:3d}  best {record.best[-1]:.4f}  mean {record.mean[-1]:.4f}  min {record.min[-1]:.4f}")

    record = evolve(config, training_mazes(maze), sim, workers=args.workers,
                    checkpoint_path=out / "checkpoint.json", checkpoint_every=args.checkpoint_every,
                    resume=args.resume, on_generation=progress)
    path = save_evolution(record, out)
    print(f"champion written to {path}")
    return 0


def cmd_run(args) -> int:
    maze, sim = _world(args.world)
    if args.max_steps is not None:
        sim = SimConfig(**{**sim.__dict__, "max_steps": args.max_steps})
    config = ExperimentConfig(
        genome=args.genome,
        mode=args.mode,
        plasticity=PlasticityConfig(base_rate=args.base_rate),
        trials=both_directions(args.luminosity, args.obstacles),
        world=maze,
        sim=sim,
        seed=args.seed,
        out_dir=args.out,
    )
    run_experiment(config, verbose=True)
    return 0


def cmd_report(args) -> int:
    root = Path(args.out)
    trial_dirs = sorted(p.parent for p in root.glob("**/weights.csv"))
    if not trial_dirs:
        print(f"no weights.csv under {root} (ga-mode runs have no weight log)", file=sys.stderr)
        return 2
    for d in trial_dirs:
        rep = report_trial_dir(d)
        fr = "undefined" if not rep.fitness_change_defined else f"{rep.fitness_change_r:+.3f}"
        strongest = max((k for k in rep.sensor_r if rep.sensor_defined[k]),
                        key=lambda k: abs(rep.sensor_r[k]), default=None)
        extra = "" if strongest is None else f"  strongest sensor {strongest} r={rep.sensor_r[strongest]:+.3f}"
        print(f"{d.relative_to(root)}: r(F, sum|dW|) = {fr}{extra}")
    return 0


def cmd_world(args) -> int:
    save_world(args.out, t_maze(), SimConfig())
    print(f"default T-maze written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genmem", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evolve", help="evolve a controller with the GA")
    e.add_argument("--world", help="world JSON (default: built-in T-maze)")
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--population", type=int, default=50)
    e.add_argument("--generations", type=int, default=30)
    e.add_argument("--elitism", type=int, default=6)
    e.add_argument("--max-steps", type=int, help="trial horizon during training")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--checkpoint-every", type=int, default=5)
    e.add_argument("--resume", action="store_true")
    e.set_defaults(func=cmd_evolve)

    r = sub.add_parser("run", help="run left/right trials of a genome")
    r.add_argument("--world")
    r.add_argument("--genome", required=True)
    r.add_argument("--mode", choices=("ga", "hebbian"), default="ga")
    r.add_argument("--base-rate", type=float, default=0.002)
    r.add_argument("--luminosity", type=float, default=1.0)
    r.add_argument("--obstacles", type=int, default=0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-steps", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("report", help="weight-change correlation tables for an experiment directory")
    c.add_argument("--out", required=True, help="experiment directory written by 'run'")
    c.set_defaults(func=cmd_report)

    w = sub.add_parser("world", help="write the default T-maze world file")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_world)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, TopologyMismatch) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"genmem: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
