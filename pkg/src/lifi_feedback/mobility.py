"""Random-waypoint mobility inside a circular attocell.

Update-interval analysis uses a single straight leg described by the
initial distance ``r0`` from the cell centre, the angle ``theta`` between
the velocity and the direction towards the centre, and the speed ``v``.
Multi-leg sequences are only needed for long-horizon simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Vec3
from .errors import ConfigError


@dataclass(frozen=True)
class UeState:
    r0: float
    theta: float
    v: float
    cell_radius: float

    def __post_init__(self):
        if not 0.0 <= self.r0 <= self.cell_radius:
            raise ConfigError(f"r0={self.r0} outside [0, {self.cell_radius}]")
        if not 0.0 <= self.theta <= np.pi:
            raise ConfigError(f"theta={self.theta} outside [0, pi]")
        if self.v < 0:
            raise ConfigError("speed must be non-negative")


@dataclass(frozen=True)
class RwpTriple:
    prev_waypoint: Vec3
    next_waypoint: Vec3
    velocity: float

    @property
    def length(self) -> float:
        a, b = np.asarray(self.prev_waypoint), np.asarray(self.next_waypoint)
        return float(np.linalg.norm(b - a))

    @property
    def duration(self) -> float:
        return self.length / self.velocity


def sample_initial(rng: np.random.Generator, r_c: float, size=None):
    """Draw ``(r0, theta)`` with ``r0 ~ 2 r / r_c^2`` on ``[0, r_c]`` and ``theta ~ U[0, pi]``."""
    if r_c <= 0:
        raise ConfigError("cell radius must be positive")
    u = rng.random(size)
    theta = rng.uniform(0.0, np.pi, size)
    return r_c * np.sqrt(u), theta


def radial_distance_at(state: UeState, t):
    """Horizontal distance from the cell centre after ``t`` seconds on the initial leg."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    return _radial(state.r0, state.theta, state.v, t)


def distance_at(state: UeState, t, h: float):
    """Euclidean AP-to-UE distance ``sqrt(r(t)^2 + h^2)``."""
    r = radial_distance_at(state, t)
    return np.sqrt(r * r + h * h)


def _radial(r0, theta, v, t):
    # the squared form can dip below zero by rounding on collinear motion
    sq = r0 * r0 + (v * t) ** 2 - 2.0 * r0 * v * t * np.cos(theta)
    return np.sqrt(np.maximum(sq, 0.0))


def uniform_in_disc(rng: np.random.Generator, r_c: float, size: int) -> np.ndarray:
    """Points uniform on the disc of radius ``r_c``, shape ``(size, 2)``."""
    r = r_c * np.sqrt(rng.random(size))
    phi = rng.uniform(0.0, 2 * np.pi, size)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def rwp_sequence(rng: np.random.Generator, r_c: float, v: float, n_legs: int,
                 start=None) -> list[RwpTriple]:
    """``n_legs`` straight legs between waypoints drawn uniformly on the cell disc."""
    if n_legs < 1:
        raise ValueError("n_legs must be >= 1")
    if v <= 0:
        raise ConfigError("RWP speed must be positive")
    pts = uniform_in_disc(rng, r_c, n_legs + (0 if start is not None else 1))
    if start is not None:
        pts = np.vstack([np.asarray(start, dtype=float)[:2], pts])
    return [RwpTriple(Vec3(*pts[i], 0.0), Vec3(*pts[i + 1], 0.0), v) for i in range(n_legs)]


class RwpTrajectory:
    """Piecewise-linear UE path that draws new waypoints as legs run out.

    The first leg is the analytical single leg: it starts at distance ``r0``
    from the centre and heads at angle ``theta`` from the direction to the centre.
    It ends where the ray leaves the cell disc; later legs go to uniformly
    drawn waypoints.
    """

    def __init__(self, state: UeState, rng: np.random.Generator, phi0: float = 0.0):
        self.state = state
        self.rng = rng
        p0 = state.r0 * np.array([np.cos(phi0), np.sin(phi0)])
        # theta = 0 heads straight for the centre, matching r(t) = |r0 - v t|
        ang = phi0 + np.pi - state.theta
        self._starts = [p0]
        self._dirs = [np.array([np.cos(ang), np.sin(ang)])]
        self._times = [0.0]
        if state.v > 0:
            self._durations = [self._exit_time(p0, self._dirs[0]) / state.v]
        else:
            self._durations = [np.inf]

    def _exit_time(self, p, u) -> float:
        # distance along unit vector u from p to the circle of radius r_c
        b = float(p @ u)
        c = float(p @ p) - self.state.cell_radius ** 2
        return -b + np.sqrt(max(b * b - c, 0.0))

    def _extend(self, t_end: float):
        while self._times[-1] + self._durations[-1] < t_end:
            start = self._starts[-1] + self._dirs[-1] * self.state.v * self._durations[-1]
            nxt = uniform_in_disc(self.rng, self.state.cell_radius, 1)[0]
            leg = nxt - start
            length = float(np.hypot(*leg))
            self._times.append(self._times[-1] + self._durations[-1])
            self._starts.append(start)
            self._dirs.append(leg / length if length > 0 else np.array([1.0, 0.0]))
            self._durations.append(length / self.state.v)

    def position(self, t) -> np.ndarray:
        """Floor coordinates at times ``t`` (array), shape ``(len(t), 2)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.size and np.isfinite(self._durations[0]):
            self._extend(float(t.max()))
        starts = np.array(self._times)
        leg = np.searchsorted(starts, t, side="right") - 1
        p = np.array(self._starts)[leg]
        d = np.array(self._dirs)[leg]
        return p + d * (self.state.v * (t - starts[leg]))[:, None]

    def radial(self, t) -> np.ndarray:
        return np.hypot(*self.position(t).T)


class RwpPaths:
    """Many independent RWP paths evaluated together.

    Path ``i`` starts at distance ``r0[i]`` from the centre, at a uniformly
    random polar angle, heading at ``theta[i]`` from the direction to the
    centre. Its first leg runs to the cell boundary; further legs go to
    uniform waypoints. Enough legs are drawn to cover ``t_end`` seconds.
    """

    def __init__(self, rng: np.random.Generator, r0, theta, v: float, r_c: float, t_end: float):
        r0 = np.asarray(r0, dtype=float)
        theta = np.asarray(theta, dtype=float)
        n = r0.size
        self.v = float(v)
        phi0 = rng.uniform(0.0, 2 * np.pi, n)
        p0 = np.column_stack([r0 * np.cos(phi0), r0 * np.sin(phi0)])
        ang = phi0 + np.pi - theta
        u0 = np.column_stack([np.cos(ang), np.sin(ang)])
        starts, dirs, t0 = [p0], [u0], [np.zeros(n)]
        if self.v == 0:
            self._finish(starts, dirs, t0)
            return
        b = np.sum(p0 * u0, axis=1)
        c = np.sum(p0 * p0, axis=1) - r_c ** 2
        length = -b + np.sqrt(np.maximum(b * b - c, 0.0))
        end_time = length / self.v
        while np.min(end_time) < t_end:
            here = starts[-1] + dirs[-1] * (self.v * (end_time - t0[-1]))[:, None]
            nxt = uniform_in_disc(rng, r_c, n)
            leg = nxt - here
            ll = np.hypot(leg[:, 0], leg[:, 1])
            safe = np.where(ll > 0, ll, 1.0)
            starts.append(here)
            dirs.append(leg / safe[:, None])
            t0.append(end_time)
            end_time = end_time + ll / self.v
        self._finish(starts, dirs, t0)

    def _finish(self, starts, dirs, t0):
        self.starts = np.stack(starts, axis=1)   # (n, L, 2)
        self.dirs = np.stack(dirs, axis=1)
        self.t0 = np.stack(t0, axis=1)           # (n, L)

    def __len__(self) -> int:
        return self.starts.shape[0]

    def position(self, t) -> np.ndarray:
        """Positions at times ``t`` of shape ``(n_t,)`` or ``(n, n_t)``; returns ``(n, n_t, 2)``."""
        t = np.asarray(t, dtype=float)
        n = len(self)
        if t.ndim == 1:
            t = np.broadcast_to(t, (n, t.size))
        leg = np.sum(t[:, :, None] >= self.t0[:, None, :], axis=-1) - 1
        leg = np.maximum(leg, 0)
        rows = np.arange(n)[:, None]
        dt = t - self.t0[rows, leg]
        return self.starts[rows, leg] + self.dirs[rows, leg] * (self.v * dt)[..., None]

    def radial(self, t) -> np.ndarray:
        p = self.position(t)
        return np.hypot(p[..., 0], p[..., 1])
