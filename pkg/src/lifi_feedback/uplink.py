"""Contention uplink: RTS/CTS CSMA/CA with an AP channel-busy tone.

Because the AP echoes a busy tone while it receives, every UE in the cell
freezes its backoff counter during a transmission and no hidden terminals
remain. Collisions then only happen when two counters expire in the same
slot, and the fixed-window saturation model applies:
``tau = 2 / (w + 1)`` per slot and per station.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig
from .errors import ConfigError, IntervalError


@dataclass(frozen=True)
class MacParams:
    contention_window: int = 16
    n_ues: int = 5
    t_slot: float = 8e-6
    sifs: float = 16e-6
    difs: float = 32e-6
    t_delay: float = 1e-6
    rts_bits: float = 288.0
    cts_bits: float = 240.0
    ack_bits: float = 240.0
    payload_bytes: float = 2000.0
    phy_header_bits: float = 128.0
    mac_header_bits: float = 272.0
    bw_up: float = 5e6
    p_up: float = 0.2
    t_frame: float = 1.6e-3

    def __post_init__(self):
        if self.contention_window < 2:
            raise ConfigError("contention window must be >= 2")
        if self.n_ues < 1:
            raise ConfigError("need at least one UE")
        times = (self.t_slot, self.sifs, self.difs, self.t_delay, self.t_frame)
        lengths = (self.rts_bits, self.cts_bits, self.ack_bits, self.payload_bytes,
                   self.phy_header_bits + self.mac_header_bits)
        if min(times) <= 0 or min(lengths) <= 0:
            raise ConfigError("MAC times and frame lengths must be positive")

    @classmethod
    def from_config(cls, cfg: NetworkConfig, n_ues: int | None = None) -> "MacParams":
        return cls(
            contention_window=cfg.contention_window,
            n_ues=cfg.n_ues if n_ues is None else n_ues,
            t_slot=cfg.slot_us * 1e-6, sifs=cfg.sifs_us * 1e-6, difs=cfg.difs_us * 1e-6,
            t_delay=cfg.delay_us * 1e-6, rts_bits=cfg.rts_bits, cts_bits=cfg.cts_bits,
            ack_bits=cfg.ack_bits, payload_bytes=cfg.payload_bytes,
            phy_header_bits=cfg.phy_header_bits, mac_header_bits=cfg.mac_header_bits,
            bw_up=cfg.bw_up, p_up=cfg.p_up_w, t_frame=cfg.t_frame,
        )


@dataclass(frozen=True)
class MacTiming:
    t_rts: float
    t_cts: float
    t_ack: float
    t_hdr: float
    t_data: float
    t_success: float
    t_collision: float


def access_probabilities(w: int, n: int) -> tuple[float, float, float]:
    """``(tau, P_t, P_s)``: per-station attempt, any-attempt and success-given-attempt probabilities."""
    if w < 2 or n < 1:
        raise ConfigError("need w >= 2 and n >= 1")
    tau = 2.0 / (w + 1)
    p_t = -math.expm1(n * math.log1p(-tau))
    # rounding can push the ratio a hair above one for a single station
    p_s = min(n * tau * (1.0 - tau) ** (n - 1) / p_t, 1.0)
    return tau, p_t, p_s


def timing_components(params: MacParams, phy_rate: float) -> MacTiming:
    """Airtimes of one successful exchange and one RTS collision at ``phy_rate`` bit/s."""
    if phy_rate <= 0:
        raise ConfigError("PHY rate must be positive")
    t_rts = params.rts_bits / phy_rate
    t_cts = params.cts_bits / phy_rate
    t_ack = params.ack_bits / phy_rate
    t_hdr = (params.phy_header_bits + params.mac_header_bits) / phy_rate
    t_data = 8.0 * params.payload_bytes / phy_rate
    s, dl = params.sifs, params.t_delay
    t_success = (t_rts + s + dl + t_cts + s + dl + t_hdr + t_data + s + dl + t_ack
                 + params.difs + dl)
    t_collision = t_rts + params.difs + dl
    return MacTiming(t_rts, t_cts, t_ack, t_hdr, t_data, t_success, t_collision)


def normalized_mac_throughput(params: MacParams, timing: MacTiming) -> float:
    """Fraction of airtime spent on payload bits in saturation."""
    _, p_t, p_s = access_probabilities(params.contention_window, params.n_ues)
    num = p_t * p_s * timing.t_data
    den = ((1 - p_t) * params.t_slot + p_t * p_s * timing.t_success
           + p_t * (1 - p_s) * timing.t_collision)
    return num / den


def uplink_sinr(r, cfg: NetworkConfig, simplified: bool = True,
                serving_gain=None, interferer_gains=()):
    """Uplink SINR at the AP for a UE ``r`` metres from the cell centre.

    The simplified form is ``G_u / (r^2 + h^2)^(m+3)``. Otherwise the
    serving gain (LOS from ``r`` when not given) and the gains from
    co-channel UEs of neighbouring cells enter explicitly.
    """
    r = np.asarray(r, dtype=float)
    d2 = r * r + cfg.h ** 2
    if simplified:
        return cfg.link_gain_up / d2 ** (cfg.lambertian_order + 3)
    if serving_gain is None:
        serving_gain = cfg.g0 / d2 ** ((cfg.lambertian_order + 3) / 2)
    amp = cfg.responsivity_a_w * cfg.p_up_w
    noise = cfg.conversion_factor ** 2 * cfg.noise_psd * cfg.bw_up
    interf = sum((amp * g) ** 2 for g in interferer_gains)
    return (amp * serving_gain) ** 2 / (noise + interf)


def uplink_rate(t_norm: float, bw_up: float, n_ues: int, gamma_u, t_fb: float = 0.0,
                t_u: float = math.inf):
    """Per-UE uplink rate with a fraction ``t_fb / t_u`` of airtime lost to feedback."""
    if t_fb < 0:
        raise IntervalError("feedback time must be non-negative")
    if math.isfinite(t_u) and not t_fb < t_u:
        raise IntervalError(f"update interval {t_u} s must exceed the feedback time {t_fb} s")
    keep = 1.0 - t_fb / t_u if math.isfinite(t_u) else 1.0
    return keep * t_norm * bw_up / n_ues * np.log2(1.0 + np.asarray(gamma_u))


def default_control_rate(cfg: NetworkConfig) -> float:
    """Rate for control and data frames: cell-edge Shannon rate, floored at 1 Mbit/s."""
    if cfg.control_rate_mbps is not None:
        return cfg.control_rate_mbps * 1e6
    edge = float(uplink_sinr(cfg.cell_radius_m, cfg))
    return max(cfg.bw_up * math.log2(1.0 + edge), 1e6)


def mac_throughput_for(cfg: NetworkConfig, n_ues: int | None = None) -> float:
    """Normalised MAC throughput for ``cfg`` at its default control rate."""
    params = MacParams.from_config(cfg, n_ues)
    return normalized_mac_throughput(params, timing_components(params, default_control_rate(cfg)))


# ----------------------------------------------------------------------
# slot-level simulator

@dataclass(frozen=True)
class MacSimResult:
    p_t: float
    p_s: float
    t_norm: float
    n_slots: int


def simulate_slotted_mac(rng: np.random.Generator, params: MacParams, n_slots: int,
                         timing: MacTiming | None = None, trace_path=None) -> MacSimResult:
    """Saturated stations contending with uniform backoff on ``[0, w-1]``.

    A virtual slot is either idle or carries one or more RTS frames. While
    the channel is busy the busy tone freezes every other counter; each
    counter then moves down by one for the busy slot once the DIFS after
    it has passed. A station that transmitted redraws its counter.
    ``n_slots`` counts virtual slots (idle and busy).
    """
    if n_slots < 1:
        raise ValueError("n_slots must be positive")
    w, n = params.contention_window, params.n_ues
    counters = rng.integers(0, w, n).tolist()
    block = max(4096, min(n_slots, 1 << 20))
    pool = rng.integers(0, w, block).tolist()
    draw = 0
    slots = busy = success = 0
    trace = [] if trace_path is not None else None
    while slots < n_slots:
        low = min(counters)
        if low > 0:
            skip = min(low, n_slots - slots)
            counters = [c - skip for c in counters]
            if trace is not None:
                trace.extend([(slots + i, "idle") for i in range(skip)])
            slots += skip
            continue
        tx = [i for i, c in enumerate(counters) if c == 0]
        if draw + len(tx) > len(pool):
            pool = rng.integers(0, w, block).tolist()
            draw = 0
        counters = [c - 1 for c in counters]
        for i in tx:
            counters[i] = pool[draw]
            draw += 1
        busy += 1
        ok = len(tx) == 1
        success += ok
        if trace is not None:
            trace.append((slots, "success" if ok else "collision"))
        slots += 1
    idle = slots - busy
    p_t = busy / slots
    p_s = success / busy if busy else 0.0
    if timing is None:
        t_norm = float("nan")
    else:
        total = idle * params.t_slot + success * timing.t_success + (busy - success) * timing.t_collision
        t_norm = success * timing.t_data / total
    if trace is not None:
        with open(trace_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["slot", "event"])
            wr.writerows(trace)
    return MacSimResult(p_t, p_s, t_norm, slots)
