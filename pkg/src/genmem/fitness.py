"""Dual fitness: per-step behavior fitness plus a distance-based goal reward.

The same numbers drive GA selection and, live, the Hebbian neuromodulation
signal. The njit kernels are what the simulator calls; the public functions
are thin wrappers over them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

# junction latch states
UNDECIDED = 0
CORRECT_ARM = 1
WRONG_ARM = 2


@dataclass(frozen=True)
class FitnessSample:
    forward: float
    avoid_collision: float
    spinning: float
    junction: int
    combined: float
    reward: float
    final: float

    def as_row(self) -> tuple:
        return (self.forward, self.avoid_collision, self.spinning, self.junction,
                self.combined, self.reward, self.final)


@njit(cache=True)
def behavior_kernel(v_left, v_right, proximity, correct_turn):
    # clamp: the raw ratio spans [-4/3, 4/3]; keep the weighted mean in [0, 1]
    forward = min(max((v_left + v_right) / 1.5, 0.0), 1.0)
    pmax = 0.0
    for p in proximity:
        pmax = max(pmax, p)
    avoid = 1.0 - pmax ** 3
    spinning = 1.0 - abs(v_right - v_left) / 2.0
    return forward, avoid, spinning, float(correct_turn)


@njit(cache=True)
def combined_kernel(forward, avoid, spinning, junction):
    return (forward + 2.0 * avoid + spinning + junction) / 5.0


@njit(cache=True)
def reward_kernel(x, y, gx, gy):
    dist = math.sqrt((gx - x) ** 2 + (gy - y) ** 2)
    return 1.0 - min(1.0, (1.7 * dist) ** 3)


@njit(cache=True)
def final_kernel(combined, reward):
    return (combined + reward) / 2.0


@njit(cache=True)
def junction_latch(state, x, junction, light_present):
    """Update the turn latch once the robot leaves the junction sideways.

    Entering the correct arm first latches CORRECT_ARM; entering the wrong arm
    first latches WRONG_ARM for the rest of the trial.
    """
    if state != UNDECIDED:
        return state
    if x > junction[2]:
        return CORRECT_ARM if light_present else WRONG_ARM
    if x < junction[0]:
        return WRONG_ARM if light_present else CORRECT_ARM
    return UNDECIDED


def behavior_components(v_left: float, v_right: float, proximity: Sequence[float],
                        correct_turn: int) -> tuple[float, float, float, int]:
    f, a, s, j = behavior_kernel(float(v_left), float(v_right),
                                 np.asarray(proximity, dtype=np.float64), int(correct_turn))
    return f, a, s, int(j)


def combined_fitness(components: Sequence[float]) -> float:
    forward, avoid, spinning, junction = components
    return combined_kernel(float(forward), float(avoid), float(spinning), float(junction))


def goal_reward(position: Sequence[float], goal: Sequence[float]) -> float:
    return reward_kernel(float(position[0]), float(position[1]), float(goal[0]), float(goal[1]))


def final_fitness(combined: float, reward: float) -> float:
    return final_kernel(float(combined), float(reward))


def fitness_sample(v_left, v_right, proximity, correct_turn, position, goal) -> FitnessSample:
    comps = behavior_components(v_left, v_right, proximity, correct_turn)
    combined = combined_fitness(comps)
    reward = goal_reward(position, goal)
    return FitnessSample(*comps, combined=combined, reward=reward, final=final_fitness(combined, reward))


def trial_fitness(per_step_combined: Sequence[float] | Sequence[FitnessSample],
                  final_position: Sequence[float], goal: Sequence[float]) -> float:
    """Mean per-step combined fitness averaged with the end-of-trial reward."""
    values = [s.combined if isinstance(s, FitnessSample) else float(s) for s in per_step_combined]
    if not values:
        raise ValueError("trial_fitness needs at least one per-step sample")
    return final_fitness(math.fsum(values) / len(values), goal_reward(final_position, goal))
