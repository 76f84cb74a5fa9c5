"""Generational GA over flat MLP genotypes.

Loop: evaluate -> keep the top ``elitism_count`` unchanged -> fill the rest
with tournament-selected parents, uniform crossover (or a clone of the fitter
parent) and per-gene Gaussian mutation.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .network import Genotype, NetworkTopology, genotype_length, save_genome
from .trial import run_trial
from .world import MazeSpec, SimConfig

GENE_LIMIT = 4.0


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 30
    elitism_count: int = 6
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma: float = 0.2
    init_range: float = 1.0
    trials_per_eval: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if min(self.population_size, self.generations, self.tournament_size, self.trials_per_eval) < 1:
            raise ValueError("sizes must be >= 1")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("need 0 <= elitism_count < population_size")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.mutation_sigma < 0 or self.init_range <= 0:
            raise ValueError("mutation_sigma must be >= 0 and init_range > 0")


@dataclass
class EvolutionRecord:
    best: list[float] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)
    min: list[float] = field(default_factory=list)
    best_genotypes: list[Genotype] = field(default_factory=list)

    @property
    def champion(self) -> Genotype:
        return self.best_genotypes[int(np.argmax(self.best))]

    def same_as(self, other: "EvolutionRecord") -> bool:
        return (self.best == other.best and self.mean == other.mean and self.min == other.min
                and all(a == b for a, b in zip(self.best_genotypes, other.best_genotypes))
                and len(self.best_genotypes) == len(other.best_genotypes))

    def write_stats_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "best", "mean", "min"])
            for g, (b, m, lo) in enumerate(zip(self.best, self.mean, self.min)):
                w.writerow([g, f"{b:.6f}", f"{m:.6f}", f"{lo:.6f}"])

    def to_dict(self) -> dict:
        return {"best": self.best, "mean": self.mean, "min": self.min,
                "best_genotypes": [g.to_dict() for g in self.best_genotypes]}

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionRecord":
        return cls(list(data["best"]), list(data["mean"]), list(data["min"]),
                   [Genotype.from_dict(g) for g in data["best_genotypes"]])


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def training_mazes(base: MazeSpec) -> list[MazeSpec]:
    """Light-present and light-absent variants of ``base``."""
    return [base.with_light(True), base.with_light(False)]


def evaluate(genotype: Genotype, eval_mazes: Sequence[MazeSpec], seed: int = 0,
             config: SimConfig | None = None, trials_per_eval: int = 1) -> float:
    """Mean trial fitness over the maze variants, plasticity off."""
    if not eval_mazes:
        raise ValueError("evaluate needs at least one maze")
    scores = []
    for m, maze in enumerate(eval_mazes):
        for r in range(trials_per_eval):
            _, metrics, _ = run_trial(genotype, maze, None, derive_seed(seed, m, r), config)
            # a zero-length trial (max_steps = 0) scores on end reward alone
            scores.append(metrics.fitness if metrics.fitness is not None else 0.0)
    return math.fsum(scores) / len(scores)


def _evaluate_packed(args):
    weights, mazes, seed, config, trials = args
    return evaluate(Genotype(weights), mazes, seed, config, trials)


def _tournament(rng: np.random.Generator, fitness: np.ndarray, k: int) -> int:
    entrants = rng.choice(len(fitness), size=min(k, len(fitness)), replace=False)
    # ties go to the lower index, which is the better-ranked genotype
    return int(entrants[np.argmax(fitness[entrants])]) if k > 1 else int(entrants[0])


def next_generation(rng: np.random.Generator, population: list[np.ndarray], fitness: np.ndarray,
                    config: GaConfig) -> list[np.ndarray]:
    """Breed a new population; ``population`` must be sorted best-first."""
    children = [population[i].copy() for i in range(config.elitism_count)]
    n_genes = population[0].size
    while len(children) < config.population_size:
        a = _tournament(rng, fitness, config.tournament_size)
        b = _tournament(rng, fitness, config.tournament_size)
        if rng.random() < config.crossover_rate:
            mask = rng.random(n_genes) < 0.5
            child = np.where(mask, population[a], population[b])
        else:
            child = population[a if fitness[a] >= fitness[b] else b].copy()
        mutate = rng.random(n_genes) < config.mutation_rate
        child = child + mutate * rng.normal(0.0, config.mutation_sigma, n_genes)
        children.append(np.clip(child, -GENE_LIMIT, GENE_LIMIT))
    return children


def evolve(config: GaConfig, eval_mazes: Sequence[MazeSpec], sim_config: SimConfig | None = None,
           workers: int = 1, checkpoint_path: str | Path | None = None, checkpoint_every: int = 0,
           resume: bool = False, on_generation: Callable[[int, EvolutionRecord], None] | None = None
           ) -> EvolutionRecord:
    """Run the GA and return the per-generation record.

    Every candidate is scored with the same evaluation seed for the whole
    run, so elites keep their scores and the best-so-far curve cannot drop.
    With ``checkpoint_path`` set, state is saved every ``checkpoint_every``
    generations and ``resume=True`` continues from it bit-identically.
    """
    topology = NetworkTopology()
    n_genes = genotype_length(topology)
    eval_seed = derive_seed(config.master_seed, 0xE7A1)
    rng = np.random.default_rng(config.master_seed)
    population = [rng.uniform(-config.init_range, config.init_range, n_genes)
                  for _ in range(config.population_size)]
    record = EvolutionRecord()
    start = 0
    if resume and checkpoint_path is not None and Path(checkpoint_path).exists():
        state = json.loads(Path(checkpoint_path).read_text())
        if state["config"] != asdict(config):
            raise ValueError("checkpoint was written with a different GaConfig")
        start = state["generation"]
        population = [np.asarray(w, dtype=np.float64) for w in state["population"]]
        rng.bit_generator.state = state["rng_state"]
        record = EvolutionRecord.from_dict(state["record"])

    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for gen in range(start, config.generations):
            jobs = [(w, list(eval_mazes), eval_seed, sim_config, config.trials_per_eval) for w in population]
            scores = list(pool.map(_evaluate_packed, jobs)) if pool else [_evaluate_packed(j) for j in jobs]
            fitness = np.asarray(scores)
            order = np.argsort(-fitness, kind="stable")
            population = [population[i] for i in order]
            fitness = fitness[order]
            record.best.append(float(fitness[0]))
            record.mean.append(float(fitness.mean()))
            record.min.append(float(fitness[-1]))
            record.best_genotypes.append(Genotype(population[0].copy(), topology))
            if on_generation is not None:
                on_generation(gen, record)
            if gen + 1 < config.generations:
                population = next_generation(rng, population, fitness, config)
            if checkpoint_path is not None and checkpoint_every > 0 and (gen + 1) % checkpoint_every == 0:
                _write_checkpoint(checkpoint_path, config, gen + 1, population, rng, record)
    finally:
        if pool is not None:
            pool.shutdown()
    return record


def _write_checkpoint(path, config: GaConfig, generation: int, population, rng, record) -> None:
    state = {
        "config": asdict(config),
        "generation": generation,
        "population": [p.tolist() for p in population],
        "rng_state": rng.bit_generator.state,
        "record": record.to_dict(),
    }
    Path(path).write_text(json.dumps(state))


def save_evolution(record: EvolutionRecord, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record.write_stats_csv(out / "generations.csv")
    save_genome(record.champion, out / "champion.json")
    return out / "champion.json"
