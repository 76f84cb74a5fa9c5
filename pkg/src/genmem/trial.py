"""One robot lifetime: sense -> forward -> move -> score -> (adapt), repeated.

The whole loop runs inside a single compiled kernel built from the same
kernels the step-by-step API uses, so a trial is a pure function of
(genotype, maze, plasticity config, sim config, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .fitness import (CORRECT_ARM, UNDECIDED, WRONG_ARM, behavior_kernel, combined_kernel,
                      final_kernel, junction_latch, reward_kernel, trial_fitness)
from .network import ControllerState, Genotype, NetworkTopology, TopologyMismatch, forward_kernel
from .plasticity import PlasticityConfig, apply_kernel, effective_rate_kernel, trace_kernel
from .world import MazeSpec, SimConfig, _light_args, sense_kernel, step_kernel

FITNESS_COLUMNS = ("forward", "avoid", "spinning", "junction", "combined", "reward", "final")


@dataclass
class TrialOutcome:
    success: bool
    steps_taken: int
    trajectory: np.ndarray        # (steps_taken + 1, 2) positions, start included
    headings: np.ndarray          # (steps_taken + 1,)
    collided: bool                # any wall contact during the trial
    final_position_error: float
    fitness: np.ndarray           # (steps_taken, 7), columns FITNESS_COLUMNS
    sensors: np.ndarray           # (steps_taken, 16) readings fed to the controller
    commands: np.ndarray          # (steps_taken, 2)
    reached_wrong_goal: bool = False

    def same_as(self, other: "TrialOutcome") -> bool:
        """Bit-level equality of every recorded quantity."""
        return (self.success == other.success and self.steps_taken == other.steps_taken
                and self.collided == other.collided
                and self.final_position_error == other.final_position_error
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("trajectory", "headings", "fitness", "sensors", "commands")))


@dataclass
class WeightChangeLog:
    fitness: np.ndarray           # live F per step
    rate: np.ndarray              # N_e per step
    sum_abs_delta: np.ndarray     # sum |dW| per step (pre-clip)
    max_abs_weight: np.ndarray    # max |w| over synapses after the update

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.fitness))


@dataclass
class TrialMetrics:
    success: int
    time_to_goal: float | None
    path_length: float
    average_speed: float
    final_position_error: float
    min_position_error: float
    weight_change_cumulative: float | None = None
    weight_change_per_step: float | None = None
    fitness: float | None = None

    @classmethod
    def from_outcome(cls, outcome: TrialOutcome, goal: np.ndarray, dt: float,
                     log: WeightChangeLog | None = None) -> "TrialMetrics":
        seg = np.diff(outcome.trajectory, axis=0)
        path_length = float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))
        elapsed = outcome.steps_taken * dt
        errors = np.hypot(outcome.trajectory[:, 0] - goal[0], outcome.trajectory[:, 1] - goal[1])
        cumulative = per_step = None
        if log is not None:
            cumulative = float(np.sum(log.sum_abs_delta))
            per_step = cumulative / len(log.sum_abs_delta) if len(log.sum_abs_delta) else 0.0
        fit = None
        if outcome.steps_taken:
            fit = trial_fitness(outcome.fitness[:, 4], outcome.trajectory[-1], goal)
        return cls(
            success=int(outcome.success),
            time_to_goal=elapsed if outcome.success else None,
            path_length=path_length,
            average_speed=path_length / elapsed if elapsed > 0 else 0.0,
            final_position_error=outcome.final_position_error,
            min_position_error=float(errors.min()),
            weight_change_cumulative=cumulative,
            weight_change_per_step=per_step,
            fitness=fit,
        )


@njit(cache=True)
def trial_kernel(weights, sizes, rects, bearings, radius, sensor_range, ambient,
                 has_light, lx, ly, intensity, falloff, junction, goal, wrong_goal,
                 x, y, heading, v_max, axle, dt, max_steps, success_radius, noise,
                 plastic, base_rate, floor, decay, update, w_max,
                 traj, headings, fitness, sensors, commands, wlog):
    acts = np.zeros(sizes.sum())
    traces = np.zeros(np.sum(sizes[:-1] * sizes[1:]))
    inputs = np.empty(2 * bearings.shape[0])
    n_in = sizes[0]
    n_out = sizes[-1]
    traj[0, 0] = x
    traj[0, 1] = y
    headings[0] = heading
    latch = UNDECIDED
    collided_any = False
    success = False
    wrong = False
    steps = 0
    use_noise = noise.shape[0] > 0
    for k in range(max_steps):
        sense_kernel(x, y, heading, rects, bearings, radius, sensor_range, ambient,
                     has_light, lx, ly, intensity, falloff, inputs)
        if use_noise:
            for i in range(inputs.shape[0]):
                inputs[i] = min(max(inputs[i] + noise[k, i], 0.0), 1.0)
        forward_kernel(weights, sizes, inputs, acts)
        cl = acts[acts.shape[0] - n_out]
        cr = acts[acts.shape[0] - 1]
        x, y, heading, hit = step_kernel(x, y, heading, cl, cr, v_max, axle, dt, radius, rects)
        collided_any = collided_any or hit
        latch = junction_latch(latch, x, junction, has_light)
        f_fw, f_av, f_sp, f_jn = behavior_kernel(cl, cr, inputs[n_in // 2:], 1 if latch == CORRECT_ARM else 0)
        comb = combined_kernel(f_fw, f_av, f_sp, f_jn)
        rew = reward_kernel(x, y, goal[0], goal[1])
        fin = final_kernel(comb, rew)
        if plastic:
            rate = effective_rate_kernel(base_rate, fin, floor)
            trace_kernel(traces, acts, sizes, decay, update)
            delta = apply_kernel(traces, weights, sizes, rate, w_max)
            wmax_now = 0.0
            w = 0
            for layer in range(sizes.shape[0] - 1):
                fan_in = sizes[layer]
                for j in range(sizes[layer + 1]):
                    for i in range(fan_in):
                        wmax_now = max(wmax_now, abs(weights[w + i]))
                    w += fan_in + 1
            wlog[k, 0] = fin
            wlog[k, 1] = rate
            wlog[k, 2] = delta
            wlog[k, 3] = wmax_now
        for i in range(inputs.shape[0]):
            sensors[k, i] = inputs[i]
        commands[k, 0] = cl
        commands[k, 1] = cr
        fitness[k, 0] = f_fw
        fitness[k, 1] = f_av
        fitness[k, 2] = f_sp
        fitness[k, 3] = f_jn
        fitness[k, 4] = comb
        fitness[k, 5] = rew
        fitness[k, 6] = fin
        traj[k + 1, 0] = x
        traj[k + 1, 1] = y
        headings[k + 1] = heading
        steps = k + 1
        if math.hypot(goal[0] - x, goal[1] - y) <= success_radius:
            success = True
            break
        if latch == WRONG_ARM and math.hypot(wrong_goal[0] - x, wrong_goal[1] - y) <= success_radius:
            wrong = True
            break
    return steps, success, wrong, collided_any


def run_trial(genotype: Genotype, maze: MazeSpec, plasticity: PlasticityConfig | None = None,
              seed: int = 0, config: SimConfig | None = None
              ) -> tuple[TrialOutcome, TrialMetrics, WeightChangeLog | None]:
    """Run one lifetime of ``genotype`` in ``maze``.

    The controller works on a private copy of the genome; whatever plasticity
    does to it is dropped when the trial ends, and ``genotype`` itself is
    never written to.
    """
    config = config or SimConfig()
    if genotype.topology != NetworkTopology():
        raise TopologyMismatch(f"trials need the default topology, got {genotype.topology.layer_sizes}")
    controller = ControllerState.from_genotype(genotype)
    n = int(config.max_steps)
    plastic = plasticity is not None and plasticity.enabled
    p = plasticity or PlasticityConfig(enabled=False)
    noise = np.zeros((0, 16))
    if config.sensor_noise > 0:
        noise = np.random.default_rng(seed).normal(0.0, config.sensor_noise, size=(n, 16))
    traj = np.zeros((n + 1, 2))
    headings = np.zeros(n + 1)
    fitness = np.zeros((n, 7))
    sensors = np.zeros((n, 16))
    commands = np.zeros((n, 2))
    wlog = np.zeros((n if plastic else 0, 4))
    has_light, lx, ly, li = _light_args(maze)
    goal, wrong_goal = maze.correct_goal, maze.wrong_goal
    x0, y0, h0 = maze.start
    steps, success, wrong, collided = trial_kernel(
        controller.effective_weights, controller.topology.sizes_array, maze.solid_rects,
        config.bearings, config.body_radius, config.sensor_range, maze.effective_ambient,
        has_light, lx, ly, li, config.light_falloff, maze.junction, goal, wrong_goal,
        x0, y0, h0, config.v_max, config.axle_length, config.dt, n, config.success_radius, noise,
        plastic, p.base_rate, p.fitness_floor, p.trace_decay, p.trace_update, p.weight_clip,
        traj, headings, fitness, sensors, commands, wlog)
    traj = traj[:steps + 1]
    outcome = TrialOutcome(
        success=bool(success),
        steps_taken=int(steps),
        trajectory=traj,
        headings=headings[:steps + 1],
        collided=bool(collided),
        final_position_error=float(math.hypot(goal[0] - traj[-1, 0], goal[1] - traj[-1, 1])),
        fitness=fitness[:steps],
        sensors=sensors[:steps],
        commands=commands[:steps],
        reached_wrong_goal=bool(wrong),
    )
    log = None
    if plastic:
        w = wlog[:steps]
        log = WeightChangeLog(fitness=w[:, 0], rate=w[:, 1], sum_abs_delta=w[:, 2], max_abs_weight=w[:, 3])
    return outcome, TrialMetrics.from_outcome(outcome, goal, config.dt, log), log
