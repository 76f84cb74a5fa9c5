"""
The controller and its genome
=============================

A controller is a small tanh MLP, 16 inputs -> 7 -> 5 -> 8 -> 4 -> 2 outputs.
Its genome is one flat vector: for each layer, each post-synaptic neuron
contributes its incoming weights followed by its bias.
"""

import numpy as np

from genmem.network import ControllerState, Genotype, NetworkTopology, genotype_length, layer_blocks

topo = NetworkTopology()
print("layers:", topo.layer_sizes, "genes:", genotype_length(topo))

# a random genome, uniform in [-1, 1]
rng = np.random.default_rng(0)
genome = Genotype.random(rng)

# the first block is (7, 17): 16 input weights plus a bias per hidden unit
for k, block in enumerate(layer_blocks(genome.weights, topo)):
    print(f"block {k}: {block.shape}")

# inputs are 8 light readings then 8 proximity readings, all in [0, 1]
ctrl = ControllerState.from_genotype(genome)
x = np.r_[np.full(8, 0.4), np.zeros(8)]
left, right = ctrl.forward(x)
print(f"wheel commands: {left:+.4f} {right:+.4f}")

# every layer's activations are kept for the plasticity rule
for k, a in enumerate(ctrl.layer_activations):
    print(k, np.round(a, 3))
