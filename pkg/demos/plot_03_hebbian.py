"""
Fitness-modulated Hebbian updates
=================================

Each control step the eligibility trace of every synapse is blended
with the product of post- and pre-synaptic activity, and the weight moves
by rate * trace.  The rate is the base rate scaled by current fitness,
floored at 0.2 so learning never stops entirely.
"""

import numpy as np

from genmem.network import ControllerState, Genotype
from genmem.plasticity import PlasticityConfig, PlasticityState, begin_trial, effective_rate, end_trial, hebbian_step

for f in (0.0, 0.1, 0.5, 0.9, 1.0):
    print(f"F={f:.1f}  N_e={effective_rate(0.002, f):.5f}")

rng = np.random.default_rng(1)
genome = Genotype.random(rng)
ctrl = ControllerState.from_genotype(genome)
state = begin_trial(PlasticityState(), genome)
cfg = PlasticityConfig(base_rate=0.01)

for k in range(500):
    ctrl.forward(rng.uniform(0, 1, 16))
    rate, delta = hebbian_step(state, ctrl, fitness=0.8, config=cfg)
    if k % 100 == 0:
        drift = np.abs(ctrl.effective_weights - genome.weights).max()
        print(f"step {k:3d}  sum|dW| {delta:.5f}  max drift {drift:.5f}")

# the trial ends and the learned changes are dropped
total = end_trial(state, ctrl)
print("cumulative |dW|", round(total, 4), "restored:", np.array_equal(ctrl.effective_weights, genome.weights))
