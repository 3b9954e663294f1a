"""Optical attocell channel: LOS and first-order wall reflections.

Coordinates put the room's floor centre at the origin, with ``z`` pointing
up to the ceiling. APs hang from the ceiling facing straight down and UE
photodiodes face straight up. Walls are diffuse (Lambertian order one)
reflectors, tiled into square-ish patches. The floor and ceiling do not
reflect.

All gain functions broadcast over a trailing ``(..., 3)`` axis of UE
positions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .config import SPEED_OF_LIGHT, NetworkConfig
from .errors import ConfigError, DegenerateGeometryError


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class RoomConfig:
    width_m: float
    depth_m: float
    height_m: float
    reflectivity: float
    patch_m: float = 0.1

    def __post_init__(self):
        if min(self.width_m, self.depth_m, self.height_m) <= 0:
            raise ConfigError("room dimensions must be positive")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ConfigError("reflectivity must lie in [0, 1]")
        if not 0 < self.patch_m <= min(self.width_m, self.depth_m, self.height_m):
            raise ConfigError("patch size must be positive and fit on every wall")


@dataclass(frozen=True)
class TransceiverConfig:
    pd_area: float = 1e-4
    fov: float = math.pi / 2
    filter_gain: float = 1.0
    refractive_index: float = 1.0
    half_intensity: float = math.pi / 3
    responsivity: float = 1.0
    w0: float = 45.3e6
    conversion_factor: float = 3.0

    def __post_init__(self):
        if self.pd_area <= 0:
            raise ConfigError("photodiode area must be positive")
        if not 0 < self.fov <= math.pi / 2:
            raise ConfigError("field of view must lie in (0, pi/2]")
        if self.refractive_index < 1:
            raise ConfigError("refractive index must be >= 1")

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.half_intensity)

    @property
    def concentrator_gain(self) -> float:
        return self.refractive_index ** 2 / math.sin(self.fov) ** 2


@dataclass(frozen=True)
class AccessPoint:
    position: Vec3
    optical_power: float = 8.0
    co_channel: tuple[int, ...] = ()
    index: int = 0

    def __post_init__(self):
        if self.optical_power <= 0:
            raise ConfigError("AP optical power must be positive")
        if self.index in self.co_channel:
            raise ConfigError("an AP cannot be its own co-channel interferer")


def lambertian_order(half_intensity: float) -> float:
    """Lambertian emission order ``m = -1 / log2(cos(half_intensity))``."""
    c = math.cos(half_intensity)
    if not 0.0 < c < 1.0:
        raise ValueError(f"half-intensity angle {half_intensity!r} rad gives cos outside (0, 1)")
    return -1.0 / math.log2(c)


# ----------------------------------------------------------------------
# configuration adapters

def room_from_config(cfg: NetworkConfig) -> RoomConfig:
    return RoomConfig(cfg.room_width_m, cfg.room_depth_m, cfg.room_height_m,
                      cfg.reflectivity, cfg.patch_m)


def transceiver_from_config(cfg: NetworkConfig) -> TransceiverConfig:
    return TransceiverConfig(
        pd_area=cfg.pd_area, fov=cfg.fov, filter_gain=cfg.filter_gain,
        refractive_index=cfg.refractive_index, half_intensity=cfg.half_intensity,
        responsivity=cfg.responsivity_a_w, w0=cfg.w0,
        conversion_factor=cfg.conversion_factor,
    )


def access_points_from_config(cfg: NetworkConfig) -> list[AccessPoint]:
    """APs at the centres of an ``n x n`` partition of the ceiling."""
    n = cfg.ap_per_side
    xs = (np.arange(n) + 0.5) * cfg.room_width_m / n - cfg.room_width_m / 2
    ys = (np.arange(n) + 0.5) * cfg.room_depth_m / n - cfg.room_depth_m / 2
    group_of = {}
    for g in cfg.groups():
        for i in g:
            group_of[i] = g
    aps = []
    for row in range(n):
        for col in range(n):
            idx = row * n + col
            peers = tuple(i for i in group_of.get(idx, [idx]) if i != idx)
            pos = Vec3(float(xs[col]), float(ys[row]), cfg.room_height_m)
            aps.append(AccessPoint(pos, cfg.p_down_w, peers, idx))
    return aps


# ----------------------------------------------------------------------
# LOS

def _in_fov(cos_psi, fov: float):
    # small slack so that psi == fov exactly is still inside
    return (cos_psi > 0) & (cos_psi >= math.cos(fov) - 1e-12)


def los_gain(ap: AccessPoint, ue_pos, cfg: TransceiverConfig) -> np.ndarray | float:
    """DC gain of the direct path from ``ap`` to a photodiode at ``ue_pos``."""
    ue = np.asarray(ue_pos, dtype=float)
    d_vec = ue - np.asarray(ap.position, dtype=float)
    d2 = np.sum(d_vec * d_vec, axis=-1)
    if np.any(d2 == 0.0):
        raise DegenerateGeometryError("AP and UE positions coincide")
    d = np.sqrt(d2)
    # n_tx = [0, 0, -1], n_rx = [0, 0, 1]
    cos_phi = -d_vec[..., 2] / d
    cos_psi = -d_vec[..., 2] / d
    m = cfg.lambertian_order
    gain = ((m + 1) * cfg.pd_area / (2 * math.pi * d2)
            * np.clip(cos_phi, 0.0, None) ** m * cfg.filter_gain
            * cfg.concentrator_gain * cos_psi)
    out = np.where(_in_fov(cos_psi, cfg.fov), gain, 0.0)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------
# first-order reflections

@lru_cache(maxsize=16)
def wall_patches(room: RoomConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centres, inward unit normals and areas of the wall tiling."""
    w, d, H = room.width_m, room.depth_m, room.height_m
    nz = max(1, round(H / room.patch_m))
    zc = (np.arange(nz) + 0.5) * H / nz
    centres, normals, areas = [], [], []

    def tile(length, fixed_axis, fixed_value, normal):
        n = max(1, round(length / room.patch_m))
        sc = (np.arange(n) + 0.5) * length / n - length / 2
        s, z = np.meshgrid(sc, zc, indexing="ij")
        pts = np.empty(s.shape + (3,))
        free = 1 - fixed_axis
        pts[..., fixed_axis] = fixed_value
        pts[..., free] = s
        pts[..., 2] = z
        centres.append(pts.reshape(-1, 3))
        normals.append(np.broadcast_to(normal, (s.size, 3)))
        areas.append(np.full(s.size, (length / n) * (H / nz)))

    tile(d, 0, -w / 2, np.array([1.0, 0.0, 0.0]))
    tile(d, 0, w / 2, np.array([-1.0, 0.0, 0.0]))
    tile(w, 1, -d / 2, np.array([0.0, 1.0, 0.0]))
    tile(w, 1, d / 2, np.array([0.0, -1.0, 0.0]))
    arrays = (np.concatenate(centres), np.concatenate(normals), np.concatenate(areas))
    for a in arrays:
        a.setflags(write=False)
    return arrays


def _illumination(ap_positions: np.ndarray, room: RoomConfig, m: float):
    """LED-to-patch factor cos^m(phi) cos(alpha) dA / d^2, shape (n_ap, P), and path lengths."""
    centres, normals, areas = wall_patches(room)
    v = centres[None, :, :] - ap_positions[:, None, :]
    d = np.linalg.norm(v, axis=-1)
    cos_phi = np.clip(-v[..., 2] / d, 0.0, None)
    cos_alpha = np.clip(-np.sum(v * normals[None], axis=-1) / d, 0.0, None)
    return cos_phi ** m * cos_alpha * areas / d ** 2, d


def _collection(ue_positions: np.ndarray, room: RoomConfig, cfg: TransceiverConfig):
    """Patch-to-PD factor cos(beta) g(psi) cos(psi) / d^2, shape (n_ue, P), and squared lengths.

    Written with matrix products and squared distances only; this is the
    hot loop of every room-scale simulation.
    """
    centres, normals, _ = wall_patches(room)
    d2 = (np.sum(ue_positions ** 2, axis=1)[:, None] + np.sum(centres ** 2, axis=1)[None, :]
          - 2.0 * ue_positions @ centres.T)
    along_normal = ue_positions @ normals.T - np.sum(centres * normals, axis=1)[None, :]
    rise = centres[None, :, 2] - ue_positions[:, None, 2]      # d * cos(psi)
    cos2_fov = math.cos(cfg.fov) ** 2
    visible = (rise > 0) & (along_normal > 0) & (rise * rise >= (cos2_fov - 1e-12) * d2)
    factor = np.where(visible, along_normal * rise * cfg.concentrator_gain / (d2 * d2), 0.0)
    return factor, d2


def _nlos_scale(room: RoomConfig, cfg: TransceiverConfig) -> float:
    m = cfg.lambertian_order
    return room.reflectivity * (m + 1) * cfg.pd_area * cfg.filter_gain / (2 * math.pi ** 2)


def nlos_gain_matrix(ap_positions, ue_positions, room: RoomConfig, cfg: TransceiverConfig,
                     chunk: int = 512) -> np.ndarray:
    """First-order reflection gains for every (UE, AP) pair, shape (n_ue, n_ap)."""
    aps = np.atleast_2d(np.asarray(ap_positions, dtype=float))
    ues = np.atleast_2d(np.asarray(ue_positions, dtype=float))
    if room.reflectivity == 0.0:
        return np.zeros((len(ues), len(aps)))
    illum, _ = _illumination(aps, room, cfg.lambertian_order)
    out = np.empty((len(ues), len(aps)))
    for start in range(0, len(ues), chunk):
        coll, _ = _collection(ues[start:start + chunk], room, cfg)
        out[start:start + chunk] = coll @ illum.T
    return out * _nlos_scale(room, cfg)


def nlos_gain(ap: AccessPoint, ue_pos, room: RoomConfig, cfg: TransceiverConfig):
    """DC gain of first-order wall reflections (Riemann sum over wall patches)."""
    ue = np.asarray(ue_pos, dtype=float)
    flat = ue.reshape(-1, 3)
    g = nlos_gain_matrix(np.asarray(ap.position, dtype=float), flat, room, cfg)[:, 0]
    return float(g[0]) if ue.ndim == 1 else g.reshape(ue.shape[:-1])


def total_gain(ap: AccessPoint, ue_pos, room: RoomConfig, cfg: TransceiverConfig):
    return los_gain(ap, ue_pos, cfg) + nlos_gain(ap, ue_pos, room, cfg)


# ----------------------------------------------------------------------
# frequency behaviour

def led_response(k, K: int, bandwidth: float, w0: float):
    """First-order LED low-pass response on subcarrier ``k``."""
    return np.exp(-2 * np.pi * np.asarray(k, dtype=float) * bandwidth / (K * w0))


def subcarrier_frequencies(K: int, bandwidth: float) -> np.ndarray:
    """Baseband frequencies of subcarriers 0..K/2."""
    return np.arange(K // 2 + 1) * bandwidth / K


def normalized_frequency_response(ap: AccessPoint, ue_pos, room: RoomConfig,
                                  cfg: TransceiverConfig, freq_grid: Sequence[float]) -> np.ndarray:
    """``|H(f)|^2 / |H_LOS(f)|^2`` with per-path propagation delays.

    Each wall patch contributes its DC gain with phase ``exp(-j 2 pi f tau)``
    where ``tau`` is the LED-patch-PD path delay.
    """
    freqs = np.asarray(freq_grid, dtype=float)
    if freqs.size == 0:
        raise ValueError("frequency grid is empty")
    ue = np.asarray(ue_pos, dtype=float).reshape(1, 3)
    apos = np.asarray(ap.position, dtype=float).reshape(1, 3)
    h_los = los_gain(ap, ue[0], cfg)
    if h_los == 0.0:
        raise DegenerateGeometryError("UE sees no direct path, the LOS reference is zero")
    if room.reflectivity == 0.0:
        return np.ones_like(freqs)
    illum, d_in = _illumination(apos, room, cfg.lambertian_order)
    coll, d2_out = _collection(ue, room, cfg)
    d_out = np.sqrt(d2_out)
    amp = (illum[0] * coll[0]) * _nlos_scale(room, cfg)
    keep = amp > 0
    excess = (d_in[0, keep] + d_out[0, keep] - np.linalg.norm(ue[0] - apos[0])) / SPEED_OF_LIGHT
    # delays relative to the LOS arrival; the LOS phase cancels in the ratio
    H = h_los + np.exp(-2j * np.pi * np.outer(freqs, excess)) @ amp[keep]
    return np.abs(H) ** 2 / h_los ** 2


def fluctuation_db(ratio) -> float:
    """Peak-to-trough spread of a power ratio curve in dB."""
    r = np.asarray(ratio, dtype=float)
    return float(10 * np.log10(r.max() / r.min()))


# ----------------------------------------------------------------------
# maps

def gain_map(ap: AccessPoint, room: RoomConfig, cfg: TransceiverConfig,
             resolution: float = 0.1, ue_height: float = 0.0):
    """Total DC gain of ``ap`` over a grid on the UE plane.

    Returns ``(xs, ys, gain)`` with ``gain[ix, iy]``.
    """
    xs, ys = _grid_axes(room, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y, np.full_like(X, ue_height)], axis=-1).reshape(-1, 3)
    g = los_gain(ap, pts, cfg) + nlos_gain_matrix(np.asarray(ap.position), pts, room, cfg)[:, 0]
    return xs, ys, g.reshape(X.shape)


def write_gain_map_csv(path, xs, ys, gain) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "gain"])
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                w.writerow([f"{x:.4f}", f"{y:.4f}", f"{gain[i, j]:.9e}"])


def _grid_axes(room: RoomConfig, resolution: float):
    nx = max(2, round(room.width_m / resolution) + 1)
    ny = max(2, round(room.depth_m / resolution) + 1)
    return (np.linspace(-room.width_m / 2, room.width_m / 2, nx),
            np.linspace(-room.depth_m / 2, room.depth_m / 2, ny))


class RoomChannel:
    """Gains from every AP of a configured room to arbitrary floor points."""

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.room = room_from_config(cfg)
        self.trx = transceiver_from_config(cfg)
        self.aps = access_points_from_config(cfg)
        self.ap_xyz = np.array([ap.position for ap in self.aps], dtype=float)

    def gains(self, xy) -> np.ndarray:
        """Total DC gains, shape ``(n, n_ap)``, for floor points ``xy`` of shape ``(n, 2)``."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        pts = np.column_stack([xy, np.full(len(xy), self.cfg.ue_height_m)])
        los = np.stack([los_gain(ap, pts, self.trx) for ap in self.aps], axis=-1)
        return los + nlos_gain_matrix(self.ap_xyz, pts, self.room, self.trx)

    def sample_positions(self, rng: np.random.Generator, n: int) -> np.ndarray:
        w, d = self.room.width_m, self.room.depth_m
        return np.column_stack([rng.uniform(-w / 2, w / 2, n), rng.uniform(-d / 2, d / 2, n)])
