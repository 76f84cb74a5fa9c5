"""Deterministic 2D differential-drive robot in a T-maze.

Geometry is axis-aligned rectangles ``[xmin, ymin, xmax, ymax]`` in meters.
Heading 0 points along +x and increases counter-clockwise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numba import njit

# e-puck-like sensor bearings (degrees, counter-clockwise from forward),
# ordered ps0..ps7: front-right round the back to front-left
DEFAULT_BEARINGS_DEG = (-17.0, -45.0, -90.0, -150.0, 150.0, 90.0, 45.0, 17.0)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.032
    v_max: float = 0.06
    axle_length: float = 0.053
    body_radius: float = 0.037
    sensor_range: float = 0.07
    bearings_deg: tuple[float, ...] = DEFAULT_BEARINGS_DEG
    light_falloff: float = 10.0
    max_steps: int = 8000
    success_radius: float = 0.05
    # noise hook, off by default; drawn from the per-trial seed when > 0
    sensor_noise: float = 0.0

    @property
    def bearings(self) -> np.ndarray:
        return np.radians(np.asarray(self.bearings_deg, dtype=np.float64))

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        if "bearings_deg" in data:
            data["bearings_deg"] = tuple(float(b) for b in data["bearings_deg"])
        return cls(**data)


@dataclass(frozen=True)
class LightSource:
    position: tuple[float, float]
    intensity: float = 1.0


def _rects(values) -> np.ndarray:
    arr = np.asarray(values if values is not None else [], dtype=np.float64).reshape(-1, 4)
    if np.any(arr[:, 2] < arr[:, 0]) or np.any(arr[:, 3] < arr[:, 1]):
        raise ValueError("rectangles must be [xmin, ymin, xmax, ymax] with min <= max")
    return arr


@dataclass(frozen=True, eq=False)
class MazeSpec:
    """Static world description.

    ``luminosity`` is the background-light dial relative to the training
    lighting (1.0 = as evolved); the ambient term seen by the light sensors is
    ``ambient_luminosity * luminosity``.
    """

    walls: np.ndarray
    junction: np.ndarray
    goal_left: np.ndarray
    goal_right: np.ndarray
    start: tuple[float, float, float]
    light: LightSource | None = None
    ambient_luminosity: float = 0.4
    luminosity: float = 1.0
    obstacles: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    obstacle_catalog: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __post_init__(self):
        object.__setattr__(self, "walls", _rects(self.walls))
        object.__setattr__(self, "obstacles", _rects(self.obstacles))
        object.__setattr__(self, "obstacle_catalog", _rects(self.obstacle_catalog))
        object.__setattr__(self, "junction", np.asarray(self.junction, dtype=np.float64).reshape(4))
        object.__setattr__(self, "goal_left", np.asarray(self.goal_left, dtype=np.float64).reshape(2))
        object.__setattr__(self, "goal_right", np.asarray(self.goal_right, dtype=np.float64).reshape(2))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        if not 0.0 <= self.ambient_luminosity <= 1.0:
            raise ValueError(f"ambient_luminosity must be in [0, 1], got {self.ambient_luminosity}")
        if not 0.0 <= self.luminosity <= 1.0:
            raise ValueError(f"luminosity must be in [0, 1], got {self.luminosity}")
        for name, goal in (("goal_left", self.goal_left), ("goal_right", self.goal_right)):
            if _inside_any(goal[0], goal[1], self.solid_rects):
                raise ValueError(f"{name} lies inside a wall or obstacle")

    @property
    def solid_rects(self) -> np.ndarray:
        return np.vstack([self.walls, self.obstacles])

    @property
    def light_present(self) -> bool:
        return self.light is not None

    @property
    def correct_goal(self) -> np.ndarray:
        # light present -> turn right, absent -> turn left
        return self.goal_right if self.light_present else self.goal_left

    @property
    def wrong_goal(self) -> np.ndarray:
        return self.goal_left if self.light_present else self.goal_right

    @property
    def effective_ambient(self) -> float:
        return self.ambient_luminosity * self.luminosity

    def with_light(self, present: bool, source: LightSource | None = None) -> "MazeSpec":
        if not present:
            return replace(self, light=None)
        source = source or self.light or default_light_source()
        return replace(self, light=source)

    def with_luminosity(self, luminosity: float) -> "MazeSpec":
        return replace(self, luminosity=float(luminosity))

    def with_obstacles(self, n: int) -> "MazeSpec":
        """Activate the first ``n`` rectangles of the obstacle catalog."""
        if n < 0 or n > len(self.obstacle_catalog):
            raise ValueError(f"maze has {len(self.obstacle_catalog)} catalog obstacles, asked for {n}")
        return replace(self, obstacles=self.obstacle_catalog[:n].copy())

    def to_dict(self) -> dict:
        return {
            "walls": self.walls.tolist(),
            "junction": self.junction.tolist(),
            "goal_left": self.goal_left.tolist(),
            "goal_right": self.goal_right.tolist(),
            "start": list(self.start),
            "light": None if self.light is None else {
                "position": list(self.light.position), "intensity": self.light.intensity},
            "ambient_luminosity": self.ambient_luminosity,
            "luminosity": self.luminosity,
            "obstacles": self.obstacles.tolist(),
            "obstacle_catalog": self.obstacle_catalog.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MazeSpec":
        light = data.get("light")
        if light is not None:
            light = LightSource(tuple(float(v) for v in light["position"]), float(light.get("intensity", 1.0)))
        return cls(
            walls=data["walls"],
            junction=data["junction"],
            goal_left=data["goal_left"],
            goal_right=data["goal_right"],
            start=data["start"],
            light=light,
            ambient_luminosity=float(data.get("ambient_luminosity", 0.4)),
            luminosity=float(data.get("luminosity", 1.0)),
            obstacles=data.get("obstacles", []),
            obstacle_catalog=data.get("obstacle_catalog", []),
        )


def default_light_source() -> LightSource:
    return LightSource(position=(0.55, 0.825), intensity=1.0)


def t_maze(corridor_width: float = 0.25, stem_length: float = 0.7, arm_length: float = 0.5,
           wall_thickness: float = 0.02, light: bool = True, ambient_luminosity: float = 0.4,
           goal_inset: float = 0.075) -> MazeSpec:
    """T-maze with the stem along +y, the junction on top, arms along -x and +x.

    The start pose sits near the bottom of the stem facing up; goals sit near
    the closed end of each arm.
    """
    w, s, a, t = corridor_width, stem_length, arm_length, wall_thickness
    h = w / 2
    top = s + w
    walls = [
        [-h - t, -t, -h, s],             # stem, left side
        [h, -t, h + t, s],               # stem, right side
        [-h - t, -t, h + t, 0.0],        # stem bottom
        [-h - a - t, top, h + a + t, top + t],  # top wall over both arms
        [-h - a - t, s - t, -h, s],      # left arm, lower side
        [h, s - t, h + a + t, s],        # right arm, lower side
        [-h - a - t, s - t, -h - a, top + t],  # left arm end
        [h + a, s - t, h + a + t, top + t],    # right arm end
    ]
    mid = s + h
    goal_x = h + a - goal_inset
    # catalog order: two blocks squeezing the top of the stem where the robot
    # sets up its turn (gap 0.12 m), then two blocks pinching the arm entrances
    catalog = [
        [-h, s - 0.1, -h + 0.065, s],
        [h - 0.065, s - 0.1, h, s],
        [-h - 0.12, top - 0.085, -h - 0.04, top],
        [h + 0.04, top - 0.085, h + 0.12, top],
    ]
    return MazeSpec(
        walls=walls,
        junction=[-h, s, h, top],
        goal_left=[-goal_x, mid],
        goal_right=[goal_x, mid],
        start=(0.0, 0.1, math.pi / 2),
        light=default_light_source() if light else None,
        ambient_luminosity=ambient_luminosity,
        obstacle_catalog=catalog,
    )


def load_world(path: str | Path) -> tuple[MazeSpec, SimConfig]:
    """Read a JSON world file; an optional ``"sim"`` object overrides SimConfig fields."""
    data = json.loads(Path(path).read_text())
    return MazeSpec.from_dict(data), SimConfig.from_dict(data.get("sim", {}))


def save_world(path: str | Path, maze: MazeSpec, config: SimConfig | None = None) -> None:
    data = maze.to_dict()
    if config is not None:
        data["sim"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in config.__dict__.items()}
    Path(path).write_text(json.dumps(data, indent=2))


@dataclass
class RobotState:
    x: float
    y: float
    heading: float
    wheel_speeds: tuple[float, float] = (0.0, 0.0)
    body_radius: float = 0.037

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class SensorFrame:
    light: np.ndarray
    proximity: np.ndarray

    def as_input(self) -> np.ndarray:
        """16-vector in controller order: light 0-7 then proximity 8-15."""
        return np.concatenate([self.light, self.proximity])


@dataclass
class WorldState:
    maze: MazeSpec
    robot: RobotState
    config: SimConfig = field(default_factory=SimConfig)
    collided: bool = False

    @classmethod
    def initial(cls, maze: MazeSpec, config: SimConfig | None = None) -> "WorldState":
        config = config or SimConfig()
        x, y, heading = maze.start
        return cls(maze, RobotState(x, y, heading, body_radius=config.body_radius), config)


# -- kernels -----------------------------------------------------------------

@njit(cache=True)
def _inside_any(x, y, rects):
    for r in range(rects.shape[0]):
        if rects[r, 0] < x < rects[r, 2] and rects[r, 1] < y < rects[r, 3]:
            return True
    return False


@njit(cache=True)
def wrap_angle(a):
    """Wrap to (-pi, pi]; in-range values pass through bit-exact."""
    two_pi = 2.0 * math.pi
    while a > math.pi:
        a -= two_pi
    while a <= -math.pi:
        a += two_pi
    return a


@njit(cache=True)
def ray_rect_distance(ox, oy, dx, dy, rect):
    """Distance along unit ray (dx, dy) to an axis-aligned rectangle, inf on miss."""
    t0 = -np.inf
    t1 = np.inf
    if dx != 0.0:
        a = (rect[0] - ox) / dx
        b = (rect[2] - ox) / dx
        t0 = max(t0, min(a, b))
        t1 = min(t1, max(a, b))
    elif ox < rect[0] or ox > rect[2]:
        return np.inf
    if dy != 0.0:
        a = (rect[1] - oy) / dy
        b = (rect[3] - oy) / dy
        t0 = max(t0, min(a, b))
        t1 = min(t1, max(a, b))
    elif oy < rect[1] or oy > rect[3]:
        return np.inf
    if t1 < t0 or t1 < 0.0:
        return np.inf
    return max(t0, 0.0)


@njit(cache=True)
def resolve_penetration(x, y, radius, rects):
    """Push a disk out of every rectangle it overlaps (slide along walls)."""
    collided = False
    for _ in range(16):
        moved = False
        for r in range(rects.shape[0]):
            cx = min(max(x, rects[r, 0]), rects[r, 2])
            cy = min(max(y, rects[r, 1]), rects[r, 3])
            ddx = x - cx
            ddy = y - cy
            d = math.sqrt(ddx * ddx + ddy * ddy)
            if d >= radius:
                continue
            collided = True
            moved = True
            if d > 0.0:
                x = cx + ddx / d * radius
                y = cy + ddy / d * radius
            else:
                # centre inside the rectangle: leave through the nearest face
                left = x - rects[r, 0]
                right = rects[r, 2] - x
                down = y - rects[r, 1]
                up = rects[r, 3] - y
                m = min(left, right, down, up)
                if m == left:
                    x = rects[r, 0] - radius
                elif m == right:
                    x = rects[r, 2] + radius
                elif m == down:
                    y = rects[r, 1] - radius
                else:
                    y = rects[r, 3] + radius
        if not moved:
            break
    return x, y, collided


@njit(cache=True)
def step_kernel(x, y, heading, cmd_left, cmd_right, v_max, axle, dt, radius, rects):
    cl = min(max(cmd_left, -1.0), 1.0)
    cr = min(max(cmd_right, -1.0), 1.0)
    vl = cl * v_max
    vr = cr * v_max
    v = 0.5 * (vl + vr)
    omega = (vr - vl) / axle
    nx = x + v * math.cos(heading) * dt
    ny = y + v * math.sin(heading) * dt
    nh = wrap_angle(heading + omega * dt)
    if nx == x and ny == y:
        return x, y, nh, False
    nx, ny, collided = resolve_penetration(nx, ny, radius, rects)
    return nx, ny, nh, collided


@njit(cache=True)
def sense_kernel(x, y, heading, rects, bearings, radius, sensor_range,
                 ambient, has_light, lx, ly, intensity, falloff, out):
    """Fill ``out`` (16) with light readings 0-7 and proximity readings 8-15."""
    n = bearings.shape[0]
    for i in range(n):
        ang = heading + bearings[i]
        dx = math.cos(ang)
        dy = math.sin(ang)
        sx = x + radius * dx
        sy = y + radius * dy
        value = ambient
        if has_light:
            rx = lx - sx
            ry = ly - sy
            r2 = rx * rx + ry * ry
            r = math.sqrt(r2)
            cos_t = 1.0 if r == 0.0 else (rx * dx + ry * dy) / r
            value += intensity / (1.0 + falloff * r2) * max(0.0, cos_t)
        out[i] = min(max(value, 0.0), 1.0)
        d = np.inf
        for k in range(rects.shape[0]):
            d = min(d, ray_rect_distance(sx, sy, dx, dy, rects[k]))
        out[n + i] = min(max(1.0 - d / sensor_range, 0.0), 1.0)


# -- python API ----------------------------------------------------------------

def _light_args(maze: MazeSpec):
    if maze.light is None:
        return False, 0.0, 0.0, 0.0
    return True, float(maze.light.position[0]), float(maze.light.position[1]), float(maze.light.intensity)


def step(world: WorldState, commands: tuple[float, float]) -> WorldState:
    """Advance one timestep in place and return ``world``."""
    cl, cr = float(commands[0]), float(commands[1])
    if not (math.isfinite(cl) and math.isfinite(cr)):
        raise ValueError("motor commands must be finite")
    cfg, rob = world.config, world.robot
    rob.x, rob.y, rob.heading, world.collided = step_kernel(
        rob.x, rob.y, rob.heading, cl, cr, cfg.v_max, cfg.axle_length, cfg.dt,
        cfg.body_radius, world.maze.solid_rects)
    rob.wheel_speeds = (min(max(cl, -1.0), 1.0), min(max(cr, -1.0), 1.0))
    return world


def sense(world: WorldState) -> SensorFrame:
    cfg, rob, maze = world.config, world.robot, world.maze
    out = np.empty(16)
    has_light, lx, ly, li = _light_args(maze)
    sense_kernel(rob.x, rob.y, rob.heading, maze.solid_rects, cfg.bearings, cfg.body_radius,
                 cfg.sensor_range, maze.effective_ambient, has_light, lx, ly, li,
                 cfg.light_falloff, out)
    return SensorFrame(light=out[:8].copy(), proximity=out[8:].copy())


def penetration_depth(x: float, y: float, radius: float, rects: np.ndarray) -> float:
    """Largest overlap between the robot disk and any rectangle (0 if clear)."""
    worst = 0.0
    for xmin, ymin, xmax, ymax in rects:
        cx = min(max(x, xmin), xmax)
        cy = min(max(y, ymin), ymax)
        d = math.hypot(x - cx, y - cy)
        inside = xmin < x < xmax and ymin < y < ymax
        depth = radius + min(x - xmin, xmax - x, y - ymin, ymax - y) if inside else radius - d
        worst = max(worst, depth)
    return worst
