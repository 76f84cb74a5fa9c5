"""
Obstacles and weight-change correlations
========================================

Narrow the corridor with 2 and then 4 blocks the champion never saw in
training, run it with a very low learning rate, and correlate the per-step
weight change with fitness and each sensor.
"""

from genmem.evolution import GaConfig, evolve, training_mazes
from genmem.harness import ExperimentConfig, TrialSpec, experiment_two_trials, report_trial_dir, run_experiment
from genmem.plasticity import PlasticityConfig
from genmem.world import SimConfig, t_maze

champion = evolve(GaConfig(population_size=30, generations=20, master_seed=3),
                  training_mazes(t_maze()), SimConfig(max_steps=2000)).champion

run_experiment(ExperimentConfig(champion, "ga", trials=experiment_two_trials()), verbose=True)
out = "demo_out/obstacles"
run_experiment(ExperimentConfig(champion, "hebbian", PlasticityConfig(1e-4), experiment_two_trials(), out_dir=out),
               verbose=True)

report = report_trial_dir(f"{out}/trials/{TrialSpec(False, obstacles=2).name}")
print("\nr(F, sum|dW|) =", round(report.fitness_change_r, 3))
for name, r, ok in report.rows()[1:]:
    if ok:
        print(f"  {name:7s} {r:+.3f}")
