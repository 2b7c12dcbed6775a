"""Scripted ground truth, observer reports and a synthetic terrain map.

Vehicles follow waypoint polylines at a noisy speed; they are not driven by
the filter's terrain motion model, so the truth is reproducible from a seed.
Step ``s`` stands for time ``s * dt`` seconds.

Scenario file format (``#`` starts a comment)::

    dt = 5
    steps = 169
    p_fn = 0.1
    sigma_r = 50, 50, 1, 0.3926990817
    vehicle 0
    appear = 0
    disappear = 140
    speed_mean = 8.3
    speed_std = 0.1
    waypoints = 1000,5000; 9500,5000
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .sensing import sample_report
from .streams import RandomLike, as_generator
from .terrain import TerrainClass, TerrainMap
from .types import SIGMA_R, NoiseSpec, Report, TargetState, wrap_heading


@dataclass
class VehicleScript:
    appear_step: int
    disappear_step: int
    waypoints: list
    mean_speed: float = 8.3
    speed_std: float = 0.1
    vehicle_id: int = 0

    def __post_init__(self):
        if not self.appear_step < self.disappear_step:
            raise ValueError(f"vehicle {self.vehicle_id}: appear must precede disappear")
        self.waypoints = [(float(x), float(y)) for x, y in self.waypoints]
        if len(self.waypoints) < 2:
            raise ValueError(f"vehicle {self.vehicle_id}: need at least two waypoints")


@dataclass
class Scenario:
    vehicles: list
    dt: float = 5.0
    steps: int = 169
    p_fn: float = 0.1
    sigma_r: NoiseSpec = SIGMA_R


@dataclass
class GroundTruth:
    steps: int
    dt: float
    states: list = field(default_factory=list)   # per step: list of (vehicle_id, TargetState)

    def alive(self, step: int) -> list:
        return self.states[step]

    def vehicle_ids(self) -> list:
        return sorted({vid for step in self.states for vid, _ in step})


def step_count(duration: float, dt: float) -> int:
    """Number of simulated instants 0, dt, 2 dt, ... not exceeding ``duration``."""
    return int(math.floor(duration / dt + 1e-9)) + 1


class _Polyline:
    def __init__(self, pts):
        self.pts = np.asarray(pts, dtype=float)
        seg = np.diff(self.pts, axis=0)
        self.lengths = np.hypot(seg[:, 0], seg[:, 1])
        self.cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        self.headings = np.arctan2(seg[:, 1], seg[:, 0])

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    def at(self, s: float) -> tuple[float, float, float]:
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum, s, side="right") - 1)
        i = min(max(i, 0), len(self.lengths) - 1)
        while self.lengths[i] == 0 and i < len(self.lengths) - 1:
            i += 1
        frac = 0.0 if self.lengths[i] == 0 else (s - self.cum[i]) / self.lengths[i]
        p = self.pts[i] + frac * (self.pts[i + 1] - self.pts[i])
        return float(p[0]), float(p[1]), float(self.headings[i])


def simulate(scripts, dt: float, rng: RandomLike, steps: int | None = None) -> GroundTruth:
    if not scripts:
        raise ValueError("no vehicles to simulate")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    gen = as_generator(rng)
    if steps is None:
        steps = max(s.disappear_step for s in scripts)
    truth = GroundTruth(steps, dt, [[] for _ in range(steps)])
    for script in sorted(scripts, key=lambda s: s.vehicle_id):
        path = _Polyline(script.waypoints)
        # one speed draw per simulated step, so the stream does not depend on liveness
        speeds = np.maximum(gen.normal(script.mean_speed, script.speed_std, steps), 0.0)
        travelled = 0.0
        for step in range(script.appear_step, min(script.disappear_step, steps)):
            x, y, heading = path.at(travelled)
            speed = speeds[step] if travelled < path.length else 0.0
            truth.states[step].append((script.vehicle_id, TargetState(x, y, speed, heading)))
            travelled += speed * dt
    return truth


def generate_reports(truth: GroundTruth, p_fn: float, noise: NoiseSpec, rng: RandomLike) -> list:
    """Per step, each live vehicle is reported with probability ``1 - p_fn``.

    Reports are shuffled within a step, since they carry no identity.
    """
    if not 0.0 <= p_fn < 1.0:
        raise ValueError(f"p_fn must lie in [0, 1), got {p_fn}")
    gen = as_generator(rng)
    out = []
    for step, alive in enumerate(truth.states):
        reports = []
        for _, state in alive:
            if gen.random() >= p_fn:
                reports.append(sample_report(state, noise, step, gen))
        order = gen.permutation(len(reports))
        out.append([reports[i] for i in order])
    return out


# ---------------------------------------------------------------- map generator

def road_geometry(width: int, height: int) -> dict:
    """Road layout in cell units: a horizontal and a vertical road through the
    center and a circular loop around it."""
    side = min(width, height)
    return {
        "center": ((width - 1) / 2.0, (height - 1) / 2.0),
        "loop_radius": 0.25 * side,
        "half_width": max(1, round(0.008 * side)),
        "field_band": max(2, round(0.03 * side)),
    }


def genmap(width: int, height: int, cell_size: float, rng: RandomLike,
           origin_x: float = 0.0, origin_y: float = 0.0) -> TerrainMap:
    """Synthetic terrain: roads, field bands along them, forest elsewhere plus
    random field clearings until at least a quarter of the map is field."""
    if width < 1 or height < 1 or not cell_size > 0:
        raise ValueError("map dimensions must be positive")
    gen = as_generator(rng)
    g = road_geometry(width, height)
    cx, cy = g["center"]
    rows, cols = np.mgrid[0:height, 0:width].astype(float)
    dist = np.minimum(np.abs(rows - cy), np.abs(cols - cx))
    dist = np.minimum(dist, np.abs(np.hypot(rows - cy, cols - cx) - g["loop_radius"]))

    cells = np.full((height, width), TerrainClass.FOREST, dtype=np.int8)
    cells[dist <= g["half_width"] + g["field_band"]] = TerrainClass.FIELD
    cells[dist <= g["half_width"]] = TerrainClass.ROAD

    side = min(width, height)
    for _ in range(10_000):
        if np.mean(cells == TerrainClass.FIELD) >= 0.25:
            break
        r0, c0 = gen.uniform(0, height), gen.uniform(0, width)
        a, b = gen.uniform(0.03, 0.12, 2) * side + 1
        blob = ((rows - r0) / a) ** 2 + ((cols - c0) / b) ** 2 <= 1.0
        cells[blob & (cells == TerrainClass.FOREST)] = TerrainClass.FIELD
    return TerrainMap(cells, cell_size, origin_x, origin_y)


# ---------------------------------------------------------------- scenario files

def _floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def parse_scenario(text: str) -> Scenario:
    glob = {"dt": 5.0, "steps": 169, "p_fn": 0.1, "sigma_r": SIGMA_R}
    vehicles, cur = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.split()[0] == "vehicle" and "=" not in line:
                cur = {"vehicle_id": int(line.split()[1])}
                vehicles.append(cur)
                continue
            key, _, val = (s.strip() for s in line.partition("="))
            if not _:
                raise ValueError(f"expected key=value, got {line!r}")
            if cur is None:
                if key == "sigma_r":
                    glob[key] = NoiseSpec(*_floats(val))
                elif key in ("dt", "p_fn"):
                    glob[key] = float(val)
                elif key == "steps":
                    glob[key] = int(val)
                else:
                    raise ValueError(f"unknown key {key!r}")
            else:
                if key == "appear":
                    cur["appear_step"] = int(val)
                elif key == "disappear":
                    cur["disappear_step"] = int(val)
                elif key == "speed_mean":
                    cur["mean_speed"] = float(val)
                elif key == "speed_std":
                    cur["speed_std"] = float(val)
                elif key == "waypoints":
                    cur["waypoints"] = [tuple(_floats(p)) for p in val.split(";") if p.strip()]
                    if any(len(p) != 2 for p in cur["waypoints"]):
                        raise ValueError("waypoints must be x,y pairs")
                else:
                    raise ValueError(f"unknown vehicle key {key!r}")
        except (ValueError, IndexError, TypeError) as e:
            raise ValueError(f"scenario line {lineno}: {e}") from None
    try:
        scripts = [VehicleScript(**v) for v in vehicles]
    except TypeError as e:
        raise ValueError(f"incomplete vehicle block: {e}") from None
    return Scenario(scripts, glob["dt"], glob["steps"], glob["p_fn"], glob["sigma_r"])


def format_scenario(sc: Scenario) -> str:
    out = [f"dt = {sc.dt:g}", f"steps = {sc.steps}", f"p_fn = {sc.p_fn:g}",
           "sigma_r = " + ", ".join(repr(v) for v in sc.sigma_r.as_tuple())]
    for v in sc.vehicles:
        out += [f"vehicle {v.vehicle_id}", f"appear = {v.appear_step}",
                f"disappear = {v.disappear_step}", f"speed_mean = {v.mean_speed:g}",
                f"speed_std = {v.speed_std:g}",
                "waypoints = " + "; ".join(f"{x:g},{y:g}" for x, y in v.waypoints)]
    return "\n".join(out) + "\n"


def read_scenario(path) -> Scenario:
    if str(path) == "bundled":
        return bundled_scenario()
    with open(path) as fh:
        return parse_scenario(fh.read())


def bundled_scenario() -> Scenario:
    """Three-vehicle reference scenario on the default 10 km map."""
    text = resources.files("phdtrack.data").joinpath("bundled_scenario.txt").read_text()
    return parse_scenario(text)


# Default map for the bundled scenario: 400 x 400 cells of 25 m.
BUNDLED_MAP = dict(width=400, height=400, cell_size=25.0)


def bundled_map(seed: int = 0) -> TerrainMap:
    return genmap(rng=seed, **BUNDLED_MAP)
