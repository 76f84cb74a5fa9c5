"""
Dimming the light
=================

Evolve a champion, then test it with the room luminosity cut from 1.0 to
0.1, with and without Hebbian learning.  The light-cue is what tells the
robot which way to turn, so dimming it is a novel condition.
"""

from genmem.evolution import GaConfig, evolve, training_mazes
from genmem.harness import ExperimentConfig, experiment_one_trials, run_experiment
from genmem.plasticity import PlasticityConfig
from genmem.world import SimConfig, t_maze

champion = evolve(GaConfig(population_size=30, generations=20, master_seed=2),
                  training_mazes(t_maze()), SimConfig(max_steps=2000)).champion

print("GA only")
run_experiment(ExperimentConfig(champion, "ga", trials=experiment_one_trials()), verbose=True)

for rate in (0.0005, 0.001, 0.002):
    print(f"\nhebbian, base rate {rate}")
    run_experiment(ExperimentConfig(champion, "hebbian", PlasticityConfig(rate), experiment_one_trials(),
                                    out_dir=f"demo_out/dim_{rate}"), verbose=True)
