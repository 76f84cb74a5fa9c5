import math

import numpy as np
import pytest

from genmem.fitness import CORRECT_ARM, UNDECIDED, fitness_sample, junction_latch
from genmem.network import ControllerState, Genotype
from genmem.plasticity import PlasticityState, begin_trial, end_trial, hebbian_step
from genmem.world import SimConfig, WorldState, sense, step

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def python_trial(genotype, maze, plasticity=None, config=None):
    """Step-by-step trial through the public API; mirrors run_trial.

    Returns (trajectory array, controller weights after end_trial or None).
    """
    config = config or SimConfig()
    world = WorldState.initial(maze, config)
    ctrl = ControllerState.from_genotype(genotype)
    pstate = None
    if plasticity is not None and plasticity.enabled:
        pstate = begin_trial(PlasticityState(genotype.topology), genotype)
    latch = UNDECIDED
    goal, wrong = maze.correct_goal, maze.wrong_goal
    traj = [(world.robot.x, world.robot.y)]
    for _ in range(config.max_steps):
        frame = sense(world)
        cl, cr = ctrl.forward(frame.as_input())
        step(world, (cl, cr))
        x, y = world.robot.x, world.robot.y
        latch = junction_latch(latch, x, maze.junction, maze.light_present)
        sample = fitness_sample(cl, cr, frame.proximity, int(latch == CORRECT_ARM), (x, y), goal)
        if pstate is not None:
            hebbian_step(pstate, ctrl, sample.final, plasticity)
        traj.append((x, y))
        if math.hypot(goal[0] - x, goal[1] - y) <= config.success_radius:
            break
        if latch != UNDECIDED and latch != CORRECT_ARM and math.hypot(wrong[0] - x, wrong[1] - y) <= config.success_radius:
            break
    if pstate is not None:
        end_trial(pstate, ctrl)
    return np.array(traj), ctrl.effective_weights.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_genotype(rng):
    return Genotype.random(rng)
