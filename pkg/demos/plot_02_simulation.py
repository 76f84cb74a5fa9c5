"""
Driving through the T-maze
==========================

The world is a T-shaped corridor with a light at the right arm's end.
Light present means "turn right", no light means "turn left".
Here a hand-written Braitenberg-ish rule drives the robot up the stem.
"""

import numpy as np

from genmem.world import SimConfig, WorldState, sense, step, t_maze

maze = t_maze()
world = WorldState.initial(maze, SimConfig())
print("start", maze.start, "goals", maze.goal_left, maze.goal_right)

path = [(world.robot.x, world.robot.y)]
for k in range(600):
    frame = sense(world)
    # steer away from whichever side sees a wall
    left_side, right_side = frame.proximity[[5, 6]].max(), frame.proximity[[1, 2]].max()
    turn = 2.0 * (right_side - left_side)
    step(world, (0.6 - turn, 0.6 + turn))
    path.append((world.robot.x, world.robot.y))

path = np.array(path)
print("final position", path[-1].round(3), "collided:", world.collided)
print("distance travelled", np.hypot(*np.diff(path, axis=0).T).sum().round(3), "m")

# light readings at the start, bright and dimmed
for lum in (1.0, 0.1):
    w = WorldState.initial(maze.with_luminosity(lum))
    print(f"luminosity {lum}: light sensors", sense(w).light.round(3))
