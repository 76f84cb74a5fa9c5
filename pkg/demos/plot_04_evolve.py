"""
Evolving a controller
=====================

A small GA run: each candidate is scored in the lit and unlit maze with
plasticity off.  Elites keep their scores because evaluation is
deterministic, so the best-fitness curve never drops.
"""

from genmem.evolution import GaConfig, evolve, save_evolution, training_mazes
from genmem.trial import run_trial
from genmem.world import SimConfig, t_maze

maze = t_maze()
config = GaConfig(population_size=30, generations=20, master_seed=1)


def report(gen, record):
    print(f"gen {gen:2d}  best {record.best[-1]:.4f}  mean {record.mean[-1]:.4f}")


record = evolve(config, training_mazes(maze), SimConfig(max_steps=2000), on_generation=report)
champion = record.champion

for light in (False, True):
    _, metrics, _ = run_trial(champion, maze.with_light(light))
    side = "right" if light else "left"
    print(f"{side:5s}: success={metrics.success}  time={metrics.time_to_goal}  error={metrics.final_position_error:.3f}")

save_evolution(record, "demo_out/evolve")
