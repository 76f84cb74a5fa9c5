"""Fixed-topology tanh MLP whose flat weight vector is the evolved genotype.

Weight layout (also the on-disk genome layout) is layer-major. Each layer is
a ``(fan_out, fan_in + 1)`` row-major block: one row per post-synaptic neuron,
columns are the pre-synaptic neurons followed by a single bias column.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

DEFAULT_LAYER_SIZES = (16, 7, 5, 8, 4, 2)
N_LIGHT = 8
N_PROXIMITY = 8


class TopologyMismatch(ValueError):
    pass


@dataclass(frozen=True)
class NetworkTopology:
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ValueError("topology needs at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def sizes_array(self) -> np.ndarray:
        return np.asarray(self.layer_sizes, dtype=np.int64)

    def layer_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))


def genotype_length(topology: NetworkTopology) -> int:
    """Number of genes: synapse weights plus one bias per non-input neuron."""
    return sum((fan_in + 1) * fan_out for fan_in, fan_out in topology.layer_pairs())


def synapse_count(topology: NetworkTopology) -> int:
    return sum(fan_in * fan_out for fan_in, fan_out in topology.layer_pairs())


def layer_blocks(weights: np.ndarray, topology: NetworkTopology) -> list[np.ndarray]:
    """Views of ``weights`` as per-layer ``(fan_out, fan_in + 1)`` matrices."""
    blocks = []
    offset = 0
    for fan_in, fan_out in topology.layer_pairs():
        n = (fan_in + 1) * fan_out
        blocks.append(weights[offset:offset + n].reshape(fan_out, fan_in + 1))
        offset += n
    return blocks


@dataclass
class Genotype:
    weights: np.ndarray
    topology: NetworkTopology = field(default_factory=NetworkTopology)

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64).ravel()
        expected = genotype_length(self.topology)
        if self.weights.size != expected:
            raise TopologyMismatch(
                f"genotype has {self.weights.size} genes, topology {list(self.topology.layer_sizes)} "
                f"needs {expected}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("genotype contains non-finite weights")

    @classmethod
    def zeros(cls, topology: NetworkTopology | None = None) -> "Genotype":
        topology = topology or NetworkTopology()
        return cls(np.zeros(genotype_length(topology)), topology)

    @classmethod
    def random(cls, rng: np.random.Generator, topology: NetworkTopology | None = None,
               init_range: float = 1.0) -> "Genotype":
        topology = topology or NetworkTopology()
        return cls(rng.uniform(-init_range, init_range, genotype_length(topology)), topology)

    def copy(self) -> "Genotype":
        return Genotype(self.weights.copy(), self.topology)

    def to_dict(self) -> dict:
        return {"topology": list(self.topology.layer_sizes), "weights": [float(w) for w in self.weights]}

    @classmethod
    def from_dict(cls, data: dict) -> "Genotype":
        if "topology" not in data or "weights" not in data:
            raise ValueError("genome JSON needs 'topology' and 'weights' keys")
        return cls(np.asarray(data["weights"], dtype=np.float64), NetworkTopology(tuple(data["topology"])))

    def __eq__(self, other):
        if not isinstance(other, Genotype):
            return NotImplemented
        return self.topology == other.topology and np.array_equal(self.weights, other.weights)


def save_genome(genotype: Genotype, path: str | Path) -> None:
    # repr round-trips float64 exactly
    Path(path).write_text(json.dumps(genotype.to_dict()))


def load_genome(path: str | Path) -> Genotype:
    return Genotype.from_dict(json.loads(Path(path).read_text()))


@njit(cache=True)
def forward_kernel(weights, sizes, inputs, acts):
    """Dense tanh forward pass.

    ``acts`` is the flat activation buffer (all layers concatenated); the input
    layer is copied in and every later layer is overwritten. Returns the number
    of weights read, which must equal the genotype length.
    """
    n0 = sizes[0]
    for i in range(n0):
        acts[i] = inputs[i]
    w = 0
    pre = 0
    post = n0
    for layer in range(sizes.shape[0] - 1):
        fan_in = sizes[layer]
        fan_out = sizes[layer + 1]
        for j in range(fan_out):
            s = 0.0
            for i in range(fan_in):
                s += weights[w + i] * acts[pre + i]
            s += weights[w + fan_in]
            acts[post + j] = np.tanh(s)
            w += fan_in + 1
        pre = post
        post += fan_out
    return w


class ControllerState:
    """Running controller: current effective weights and last activations.

    Single-owner mutable state; make one per concurrent trial.
    """

    def __init__(self, topology: NetworkTopology | None = None):
        self.topology = topology or NetworkTopology()
        self._sizes = self.topology.sizes_array
        self.effective_weights = np.zeros(genotype_length(self.topology))
        self.activations = np.zeros(int(self._sizes.sum()))

    @classmethod
    def from_genotype(cls, genotype: Genotype) -> "ControllerState":
        return cls(genotype.topology).load_genotype(genotype)

    @property
    def layer_activations(self) -> list[np.ndarray]:
        bounds = np.cumsum(self._sizes)[:-1]
        return np.split(self.activations, bounds)

    def load_genotype(self, genotype: Genotype) -> "ControllerState":
        if genotype.topology != self.topology:
            raise TopologyMismatch(
                f"genotype topology {genotype.topology.layer_sizes} != controller {self.topology.layer_sizes}")
        self.effective_weights = genotype.weights.copy()
        self.activations[:] = 0.0
        return self

    def forward(self, sensors: Sequence[float]) -> tuple[float, float]:
        x = np.asarray(sensors, dtype=np.float64)
        if x.shape != (self.topology.n_inputs,):
            raise TopologyMismatch(f"expected {self.topology.n_inputs} inputs, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("sensor vector contains non-finite values")
        forward_kernel(self.effective_weights, self._sizes, x, self.activations)
        out = self.activations[-self.topology.n_outputs:]
        if out.size == 2:
            return float(out[0]), float(out[1])
        return tuple(float(v) for v in out)


def forward(state: ControllerState, sensors: Sequence[float]) -> tuple[float, float]:
    return state.forward(sensors)


def load_genotype(state: ControllerState, genotype: Genotype) -> ControllerState:
    return state.load_genotype(genotype)
