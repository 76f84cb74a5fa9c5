"""Fitness-modulated Hebbian plasticity with decaying co-activation traces.

Per control step:

    N_e   = N * max(floor, F)                  F clamped to [0, 1]
    T    <- decay * T + update * (post x pre)   per layer, synapses only
    W    <- clip(W + N_e * T, -W_max, W_max)

The genotype is snapshotted when a trial begins and restored when it ends,
so adaptation never leaks into the next lifetime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .network import ControllerState, Genotype, NetworkTopology, TopologyMismatch, synapse_count


class PlasticityError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlasticityConfig:
    base_rate: float = 0.002
    fitness_floor: float = 0.2
    trace_decay: float = 0.95
    trace_update: float = 0.05
    weight_clip: float = 2.0
    enabled: bool = True

    def __post_init__(self):
        vals = (self.base_rate, self.fitness_floor, self.trace_decay, self.trace_update, self.weight_clip)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("plasticity parameters must be finite")
        if self.base_rate < 0:
            raise ValueError("base_rate must be >= 0")
        if not 0.0 <= self.trace_decay < 1.0:
            raise ValueError("trace_decay must be in [0, 1)")
        if not 0.0 < self.trace_update <= 1.0:
            raise ValueError("trace_update must be in (0, 1]")
        if self.weight_clip <= 0:
            raise ValueError("weight_clip must be > 0")

    @property
    def active(self) -> bool:
        return self.enabled and self.base_rate > 0.0

    @property
    def trace_bound(self) -> float:
        """Steady-state bound on |T| for activations in [-1, 1]."""
        return self.trace_update / (1.0 - self.trace_decay)


@njit(cache=True)
def effective_rate_kernel(base_rate, fitness, floor):
    f = min(max(fitness, 0.0), 1.0)
    return base_rate * max(floor, f)


@njit(cache=True)
def trace_kernel(traces, acts, sizes, decay, update):
    """T <- decay*T + update*outer(post, pre) for every layer, in place.

    ``traces`` is flat, layer-major, row = post neuron; ``acts`` is the flat
    activation buffer of the last forward pass.
    """
    t = 0
    pre = 0
    for layer in range(sizes.shape[0] - 1):
        fan_in = sizes[layer]
        fan_out = sizes[layer + 1]
        post = pre + fan_in
        for j in range(fan_out):
            a_post = acts[post + j]
            for i in range(fan_in):
                traces[t] = decay * traces[t] + update * (a_post * acts[pre + i])
                t += 1
        pre = post


@njit(cache=True)
def apply_kernel(traces, weights, sizes, rate, w_max):
    """Add rate*T to the synapse weights, clip, and return sum |dW| (pre-clip)."""
    if rate == 0.0:
        return 0.0
    total = 0.0
    t = 0
    w = 0
    for layer in range(sizes.shape[0] - 1):
        fan_in = sizes[layer]
        fan_out = sizes[layer + 1]
        for j in range(fan_out):
            for i in range(fan_in):
                dw = rate * traces[t]
                total += abs(dw)
                weights[w + i] = min(max(weights[w + i] + dw, -w_max), w_max)
                t += 1
            w += fan_in + 1  # skip the bias gene
    return total


class PlasticityState:
    """Per-trial traces, genome snapshot and cumulative |dW|; single owner."""

    def __init__(self, topology: NetworkTopology | None = None):
        self.topology = topology or NetworkTopology()
        self._sizes = self.topology.sizes_array
        self.flat_traces = np.zeros(synapse_count(self.topology))
        self.original_genome: Genotype | None = None
        self.cumulative_abs_change = 0.0
        self.n_updates = 0

    @property
    def traces(self) -> list[np.ndarray]:
        """Per-layer trace matrices of shape (fan_out, fan_in), views into the flat buffer."""
        out = []
        offset = 0
        for fan_in, fan_out in self.topology.layer_pairs():
            out.append(self.flat_traces[offset:offset + fan_in * fan_out].reshape(fan_out, fan_in))
            offset += fan_in * fan_out
        return out

    @property
    def mean_abs_change_per_step(self) -> float:
        return self.cumulative_abs_change / self.n_updates if self.n_updates else 0.0


def effective_rate(base_rate: float, fitness: float, floor: float = 0.2) -> float:
    if base_rate < 0 or not math.isfinite(fitness):
        raise ValueError("need base_rate >= 0 and finite fitness")
    return effective_rate_kernel(float(base_rate), float(fitness), float(floor))


def _flat_activations(activations, topology: NetworkTopology) -> np.ndarray:
    if isinstance(activations, np.ndarray) and activations.ndim == 1:
        flat = activations.astype(np.float64, copy=False)
    else:
        layers = list(activations)
        if [len(a) for a in layers] != list(topology.layer_sizes):
            raise TopologyMismatch("activation shapes do not match the topology")
        flat = np.concatenate([np.asarray(a, dtype=np.float64) for a in layers])
    if flat.size != sum(topology.layer_sizes):
        raise TopologyMismatch("activation shapes do not match the topology")
    return flat


def update_traces(state: PlasticityState, activations, config: PlasticityConfig = PlasticityConfig()
                  ) -> list[np.ndarray]:
    """Fold the latest activations into the traces; returns the per-layer views."""
    flat = _flat_activations(activations, state.topology)
    trace_kernel(state.flat_traces, flat, state._sizes, config.trace_decay, config.trace_update)
    return state.traces


def apply_update(state: PlasticityState, controller: ControllerState, rate: float,
                 config: PlasticityConfig = PlasticityConfig()) -> float:
    """Apply ``rate * T`` to the controller's synapse weights; returns sum |dW|."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if controller.topology != state.topology:
        raise TopologyMismatch("controller and plasticity state topologies differ")
    delta = apply_kernel(state.flat_traces, controller.effective_weights, state._sizes,
                         float(rate), config.weight_clip)
    state.cumulative_abs_change += delta
    state.n_updates += 1
    return delta


def begin_trial(state: PlasticityState, genotype: Genotype) -> PlasticityState:
    if genotype.topology != state.topology:
        raise TopologyMismatch("genotype and plasticity state topologies differ")
    state.original_genome = genotype.copy()
    state.flat_traces[:] = 0.0
    state.cumulative_abs_change = 0.0
    state.n_updates = 0
    return state


def end_trial(state: PlasticityState, controller: ControllerState) -> float:
    """Restore the snapshot genome into ``controller``; returns cumulative |dW|."""
    if state.original_genome is None:
        raise PlasticityError("end_trial called without begin_trial")
    controller.load_genotype(state.original_genome)
    state.original_genome = None
    return state.cumulative_abs_change


def hebbian_step(state: PlasticityState, controller: ControllerState, fitness: float,
                 config: PlasticityConfig) -> tuple[float, float]:
    """One full plasticity step after a forward pass; returns (N_e, sum |dW|)."""
    rate = effective_rate(config.base_rate, fitness, config.fitness_floor)
    update_traces(state, controller.activations, config)
    return rate, apply_update(state, controller, rate, config)
