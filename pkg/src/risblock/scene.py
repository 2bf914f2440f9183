"""Plan-view scene simulator: geometry, blockage, trajectories, path synthesis.

A scene is a 2-D top-down floor plan (x = width, y = depth, meters) holding a
base station, a reflective surface, and axis-aligned rectangular blockers.
The surface is placed so its link to the station is never obstructed; only
the direct station -> terminal segment can be blocked. A link has one of
three statuses: the terminal is absent, present with clear line of sight, or
present but blocked.

Path synthesis turns the geometry into multipath components for the three
channel blocks. The first path of each list is the geometric line-of-sight
path (delay = distance/c, amplitude = wavelength/(4*pi*distance), elevation
0); the remaining paths are scatterer bounces with delays stretched by
Uniform(1.1, 3), amplitudes scaled by Uniform(0.05, 0.3) with a random phase,
azimuths uniform on [0, 2*pi) and elevations uniform on (-pi/6, pi/6).
A blocked direct link attenuates the line-of-sight amplitude by
10^(-penetration_loss_db/20) before the bounce amplitudes are drawn from it,
so the whole blocked bundle is degraded coherently. Surface-side links are
never attenuated. Every synthesized path uses a single pulse tap and a fixed
1 ms sampling time.

Rendering produces an H x W x 3 float image in [0, 1]: channel 0 holds the
blocker occupancy, channel 1 the station and surface markers, and channel 2
the terminal marker -- drawn only when the status is "unblocked", which makes
absent and blocked scenes byte-identical on purpose.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from risblock.channel import TWO_PI, MultipathComponent


class LinkStatus(IntEnum):
    """Ternary link label: -1 absent, 0 present and clear, 1 present but blocked."""

    ABSENT = -1
    UNBLOCKED = 0
    BLOCKED = 1


@dataclass(frozen=True)
class Blocker:
    """Axis-aligned rectangle given by center and half extents (meters)."""

    center: tuple
    half_extents: tuple

    def __post_init__(self):
        cx, cy = self.center
        hx, hy = self.half_extents
        if not all(math.isfinite(v) for v in (cx, cy, hx, hy)):
            raise ValueError("blocker center/half_extents must be finite")
        if hx <= 0 or hy <= 0:
            raise ValueError("blocker half_extents must be > 0")

    def contains(self, point):
        cx, cy = self.center
        hx, hy = self.half_extents
        return (cx - hx <= point[0] <= cx + hx) and (cy - hy <= point[1] <= cy + hy)


def _segment_hits_box(a, b, blocker):
    """True when the open segment (a, b) meets the closed rectangle (slab test)."""
    t0, t1 = 0.0, 1.0
    for axis in range(2):
        lo = blocker.center[axis] - blocker.half_extents[axis]
        hi = blocker.center[axis] + blocker.half_extents[axis]
        d = b[axis] - a[axis]
        if d == 0.0:
            if a[axis] < lo or a[axis] > hi:
                return False
        else:
            t_enter = (lo - a[axis]) / d
            t_exit = (hi - a[axis]) / d
            if t_enter > t_exit:
                t_enter, t_exit = t_exit, t_enter
            t0 = max(t0, t_enter)
            t1 = min(t1, t_exit)
            if t0 > t1:
                return False
    # exclude contact confined to the segment's endpoints
    return t0 < 1.0 and t1 > 0.0


def los_blocked(a, b, blockers):
    """True when any blocker interrupts the open segment between a and b."""
    return any(_segment_hits_box(a, b, blk) for blk in blockers)


@dataclass(frozen=True)
class Scene:
    """Floor plan with a station, a surface, and rectangular blockers.

    bounds               (width, depth) in meters; the world is [0, w] x [0, d]
    bs_position          station position (x, y)
    ris_position         surface position (x, y); its station link must be clear
    blockers             rectangles that can obstruct the direct link
    penetration_loss_db  amplitude loss applied to a blocked direct path
    ue_zone              optional (xmin, ymin, xmax, ymax) region the terminal
                         walks in; defaults to the full bounds
    """

    bounds: tuple
    bs_position: tuple
    ris_position: tuple
    blockers: tuple = ()
    penetration_loss_db: float = 30.0
    ue_zone: tuple = None

    def __post_init__(self):
        w, d = self.bounds
        if not (math.isfinite(w) and math.isfinite(d) and w > 0 and d > 0):
            raise ValueError("bounds must be finite and > 0")
        for name, pos in (("bs_position", self.bs_position),
                          ("ris_position", self.ris_position)):
            if not (0 <= pos[0] <= w and 0 <= pos[1] <= d):
                raise ValueError(f"{name} must lie inside the bounds")
        if not (math.isfinite(self.penetration_loss_db) and self.penetration_loss_db >= 0):
            raise ValueError("penetration_loss_db must be finite and >= 0")
        object.__setattr__(self, "blockers", tuple(self.blockers))
        if los_blocked(self.bs_position, self.ris_position, self.blockers):
            raise ValueError("blockers must not obstruct the station-surface link")
        if self.ue_zone is not None:
            x0, y0, x1, y1 = self.ue_zone
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= d):
                raise ValueError("ue_zone must be a non-empty region inside bounds")

    @property
    def walk_region(self):
        if self.ue_zone is not None:
            return self.ue_zone
        return (0.0, 0.0, self.bounds[0], self.bounds[1])


def link_status(scene, ue_position):
    """Classify the direct link: absent terminal, clear, or blocked."""
    if ue_position is None:
        return LinkStatus.ABSENT
    w, d = scene.bounds
    if not (0 <= ue_position[0] <= w and 0 <= ue_position[1] <= d):
        raise ValueError(f"ue_position {tuple(ue_position)} outside bounds {scene.bounds}")
    if los_blocked(scene.bs_position, ue_position, scene.blockers):
        return LinkStatus.BLOCKED
    return LinkStatus.UNBLOCKED


@dataclass(frozen=True)
class Trajectory:
    """Walk of a terminal: one entry per step, None where it is absent."""

    positions: tuple
    speed_mps: float
    step_time_s: float

    @property
    def n_steps(self):
        return len(self.positions)


def _random_free_point(scene, rng, max_tries=64):
    x0, y0, x1, y1 = scene.walk_region
    point = None
    for _ in range(max_tries):
        point = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        if not any(blk.contains(point) for blk in scene.blockers):
            return point
    return point


def generate_trajectory(scene, n_steps, speed_mps, step_time_s, absent_probability,
                        rng):
    """Random-waypoint walk with per-step absence.

    Each step first draws an absence coin; absent steps record None and leave
    the walker in place, so any two successive recorded positions differ by
    at most speed * step_time. Waypoints (and stepped positions) avoid
    blocker interiors.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if speed_mps < 0 or step_time_s <= 0:
        raise ValueError("speed_mps must be >= 0 and step_time_s > 0")
    if not 0 <= absent_probability <= 1:
        raise ValueError("absent_probability must lie in [0, 1]")

    max_step = speed_mps * step_time_s
    current = np.array(_random_free_point(scene, rng))
    target = np.array(_random_free_point(scene, rng))
    positions = []
    for _ in range(n_steps):
        if rng.random() < absent_probability:
            positions.append(None)
            continue
        candidate = current
        for _ in range(64):
            offset = target - current
            dist = float(np.hypot(*offset))
            if dist <= max_step:
                candidate = target
                target = np.array(_random_free_point(scene, rng))
            elif max_step > 0:
                candidate = current + offset * (max_step / dist)
            else:
                candidate = current
            if not any(blk.contains(candidate) for blk in scene.blockers):
                break
            target = np.array(_random_free_point(scene, rng))
            candidate = current
        current = candidate
        positions.append((float(current[0]), float(current[1])))
    return Trajectory(positions=tuple(positions), speed_mps=speed_mps,
                      step_time_s=step_time_s)


PATH_SAMPLING_TIME_S = 1e-3

NLOS_DELAY_STRETCH = (1.1, 3.0)
NLOS_AMPLITUDE_SCALE = (0.05, 0.3)
NLOS_ELEVATION_SPAN = math.pi / 6


@dataclass(frozen=True)
class SynthesizedPaths:
    """Multipath components for the three channel blocks of one sample."""

    bs_ue: tuple
    bs_ris: tuple
    ris_ue: tuple
    bs_ris_departures: tuple


def _bearing(src, dst):
    return math.atan2(dst[1] - src[1], dst[0] - src[0]) % TWO_PI


def _los_component(src, dst, wavelength_m, speed_of_light, azimuth,
                   amplitude_scale=1.0):
    dist = math.hypot(dst[0] - src[0], dst[1] - src[1])
    if dist <= 0:
        raise ValueError("endpoints must be distinct")
    return MultipathComponent(
        amplitude=amplitude_scale * wavelength_m / (4.0 * math.pi * dist),
        delay_s=dist / speed_of_light,
        sampling_time_s=PATH_SAMPLING_TIME_S,
        cyclic_prefix_count=1,
        azimuth_rad=azimuth,
        elevation_rad=0.0,
    )


def _bounce_components(los, count, rng):
    paths = []
    for _ in range(count):
        delay = los.delay_s * rng.uniform(*NLOS_DELAY_STRETCH)
        magnitude = abs(los.amplitude) * rng.uniform(*NLOS_AMPLITUDE_SCALE)
        phase = rng.uniform(0.0, TWO_PI)
        azimuth = rng.uniform(0.0, TWO_PI)
        elevation = rng.uniform(-NLOS_ELEVATION_SPAN, NLOS_ELEVATION_SPAN)
        paths.append(MultipathComponent(
            amplitude=magnitude * complex(math.cos(phase), math.sin(phase)),
            delay_s=delay,
            sampling_time_s=PATH_SAMPLING_TIME_S,
            cyclic_prefix_count=1,
            azimuth_rad=azimuth % TWO_PI,
            elevation_rad=elevation,
        ))
    return paths


def synthesize_mpcs(scene, ue_position, status, prop_cfg, n_bs_ue, n_bs_ris,
                    n_ris_ue, rng):
    """Draw the per-sample multipath components for all three links.

    Path counts are per link, line of sight included. An absent terminal
    yields empty station->terminal and surface->terminal lists; the
    station->surface link is always synthesized. Departure angles for the
    station->surface block are drawn here (geometric for the first path,
    random for bounces).
    """
    for name, n in (("n_bs_ue", n_bs_ue), ("n_bs_ris", n_bs_ris),
                    ("n_ris_ue", n_ris_ue)):
        if n < 1:
            raise ValueError(f"{name} must be >= 1")
    wavelength = prop_cfg.wavelength_m
    c = prop_cfg.speed_of_light_mps
    bs, ris = scene.bs_position, scene.ris_position

    if status == LinkStatus.ABSENT or ue_position is None:
        bs_ue = []
        ris_ue = []
    else:
        penetration = 1.0
        if status == LinkStatus.BLOCKED:
            penetration = 10.0 ** (-scene.penetration_loss_db / 20.0)
        los_direct = _los_component(bs, ue_position, wavelength, c,
                                    _bearing(bs, ue_position),
                                    amplitude_scale=penetration)
        bs_ue = [los_direct] + _bounce_components(los_direct, n_bs_ue - 1, rng)
        los_surface = _los_component(ris, ue_position, wavelength, c,
                                     _bearing(ris, ue_position))
        ris_ue = [los_surface] + _bounce_components(los_surface, n_ris_ue - 1, rng)

    los_hop = _los_component(ris, bs, wavelength, c, _bearing(ris, bs))
    bs_ris = [los_hop] + _bounce_components(los_hop, n_bs_ris - 1, rng)
    departures = [(_bearing(bs, ris), 0.0)]
    for _ in range(n_bs_ris - 1):
        departures.append((rng.uniform(0.0, TWO_PI),
                           rng.uniform(-NLOS_ELEVATION_SPAN, NLOS_ELEVATION_SPAN)))

    return SynthesizedPaths(bs_ue=tuple(bs_ue), bs_ris=tuple(bs_ris),
                            ris_ue=tuple(ris_ue),
                            bs_ris_departures=tuple(departures))


def _to_pixel(position, bounds, width, height):
    col = min(max(int(position[0] / bounds[0] * width), 0), width - 1)
    row = min(max(int(position[1] / bounds[1] * height), 0), height - 1)
    return row, col


def _stamp(img, channel, row, col, half):
    h, w = img.shape[:2]
    r0, r1 = max(row - half, 0), min(row + half, h - 1)
    c0, c1 = max(col - half, 0), min(col + half, w - 1)
    img[r0:r1 + 1, c0:c1 + 1, channel] = 1.0


def render_image(scene, ue_position, status, dims=(64, 64, 3)):
    """Top-down raster of the scene, H x W x 3 float32 in [0, 1].

    Channel 0: blocker occupancy. Channel 1: station and surface markers
    (3x3). Channel 2: terminal marker (5x5), drawn only for an unblocked
    link, so absent and blocked renders of the same scene are identical.
    """
    height, width, channels = dims
    if height < 8 or width < 8 or channels != 3:
        raise ValueError("dims must be (H >= 8, W >= 8, 3)")
    img = np.zeros((height, width, 3), dtype=np.float32)
    w, d = scene.bounds

    for blk in scene.blockers:
        cx, cy = blk.center
        hx, hy = blk.half_extents
        r0, c0 = _to_pixel((cx - hx, cy - hy), scene.bounds, width, height)
        r1, c1 = _to_pixel((cx + hx, cy + hy), scene.bounds, width, height)
        img[r0:r1 + 1, c0:c1 + 1, 0] = 1.0

    for pos in (scene.bs_position, scene.ris_position):
        row, col = _to_pixel(pos, scene.bounds, width, height)
        _stamp(img, 1, row, col, 1)

    if status == LinkStatus.UNBLOCKED and ue_position is not None:
        row, col = _to_pixel(ue_position, scene.bounds, width, height)
        _stamp(img, 2, row, col, 2)
    return img


@dataclass(frozen=True)
class SceneLayout:
    """Distribution parameters for randomly drawn scenes.

    Scenes come in two kinds: dense layouts with several wall-like blockers
    (the direct link is usually obstructed when the terminal is present) and
    sparse layouts with at most one small blocker (the link is usually
    clear). The mix makes the rendered blocker pattern an informative prior
    for the otherwise ambiguous absent/blocked pair.
    """

    bounds: tuple = (40.0, 40.0)
    bs_position: tuple = (2.0, 20.0)
    ris_position: tuple = (2.0, 37.0)
    ue_zone: tuple = (12.0, 4.0, 34.0, 36.0)
    penetration_loss_db: float = 30.0
    dense_probability: float = 0.5
    dense_count: tuple = (4, 7)
    dense_half_width: tuple = (0.5, 1.25)
    dense_half_height: tuple = (5.0, 9.0)
    sparse_count: tuple = (0, 1)
    sparse_half_size: tuple = (0.8, 2.0)
    blocker_x_range: tuple = (7.0, 31.0)
    blocker_y_margin: float = 0.5


def random_scene(layout, rng):
    """Draw a scene from the layout's dense/sparse blocker mixture."""
    dense = rng.random() < layout.dense_probability
    if dense:
        count = int(rng.integers(layout.dense_count[0], layout.dense_count[1] + 1))
    else:
        count = int(rng.integers(layout.sparse_count[0], layout.sparse_count[1] + 1))

    depth = layout.bounds[1]
    blockers = []
    for _ in range(count):
        if dense:
            hx = rng.uniform(*layout.dense_half_width)
            hy = rng.uniform(*layout.dense_half_height)
        else:
            hx = rng.uniform(*layout.sparse_half_size)
            hy = rng.uniform(*layout.sparse_half_size)
        cx = rng.uniform(*layout.blocker_x_range)
        cy = rng.uniform(hy + layout.blocker_y_margin,
                         depth - hy - layout.blocker_y_margin)
        blockers.append(Blocker(center=(cx, cy), half_extents=(hx, hy)))

    return Scene(bounds=layout.bounds, bs_position=layout.bs_position,
                 ris_position=layout.ris_position, blockers=tuple(blockers),
                 penetration_loss_db=layout.penetration_loss_db,
                 ue_zone=layout.ue_zone)
