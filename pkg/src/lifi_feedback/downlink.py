"""DCO-OFDM downlink: frame layout, SINR, fair scheduling and rates.

Subcarrier ``k`` of a ``K``-point frame carries data for ``1 <= k < K/2``;
indices 0 and ``K/2`` are null and the upper half mirrors the lower half
(Hermitian symmetry) so the time-domain signal is real. Arrays indexed by
data subcarrier use position ``k - 1``.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .config import NetworkConfig
from .errors import ConfigError, InfeasibleRateError

LOG2E = math.log2(math.e)
IDLE = -1


@dataclass(frozen=True)
class OfdmaConfig:
    K: int = 2048
    bandwidth: float = 10e6
    dc_bias_factor: float = 3.0
    noise_psd: float = 1e-21

    def __post_init__(self):
        if self.K < 4 or self.K % 2:
            raise ConfigError("K must be even and >= 4")
        if self.bandwidth <= 0:
            raise ConfigError("bandwidth must be positive")

    @classmethod
    def from_config(cls, cfg: NetworkConfig) -> "OfdmaConfig":
        return cls(cfg.n_subcarriers, cfg.bw_down, cfg.conversion_factor, cfg.noise_psd)

    @property
    def zeta(self) -> float:
        return math.sqrt(self.K / (self.K - 2))

    @property
    def n_data(self) -> int:
        return self.K // 2 - 1

    @property
    def subcarrier_bandwidth(self) -> float:
        return self.bandwidth / self.K

    @property
    def noise_per_subcarrier(self) -> float:
        return self.noise_psd * self.bandwidth / self.K


@dataclass(frozen=True)
class SinrVector:
    """Per-data-subcarrier SINR of one UE plus its DC reference value."""

    per_subcarrier: np.ndarray
    avg_power_ref: float

    def __post_init__(self):
        arr = np.asarray(self.per_subcarrier, dtype=float)
        if np.any(arr < 0):
            raise ValueError("SINR entries must be non-negative")
        if not self.avg_power_ref > 0:
            raise ValueError("reference SINR must be positive")
        object.__setattr__(self, "per_subcarrier", arr)


@dataclass
class Allocation:
    """Owner of each data subcarrier (``IDLE`` when unassigned)."""

    owner: np.ndarray
    believed_rate: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.owner = np.asarray(self.owner, dtype=int)
        if np.any(self.owner < IDLE):
            raise ValueError("owner indices must be >= -1")
        n = len(self.believed_rate)
        if n and np.any(self.owner >= n):
            raise ValueError(f"owner index beyond the {n} UEs with a believed rate")

    @classmethod
    def empty(cls, n_data: int, n_ues: int = 0) -> "Allocation":
        return cls(np.full(n_data, IDLE), np.zeros(n_ues))

    def mask(self, n_ues: int) -> np.ndarray:
        """Boolean ``s[j, k-1]`` indicator matrix."""
        return self.owner[None, :] == np.arange(n_ues)[:, None]

    def counts(self, n_ues: int) -> np.ndarray:
        return np.bincount(self.owner[self.owner >= 0], minlength=n_ues)


# ----------------------------------------------------------------------
# frame

def build_ofdma_frame(symbols, K: int) -> np.ndarray:
    """Hermitian-symmetric, power-normalised frame from ``K/2 - 1`` data symbols."""
    x = np.asarray(symbols, dtype=complex)
    if x.shape != (K // 2 - 1,):
        raise ValueError(f"expected {K // 2 - 1} symbols, got shape {x.shape}")
    frame = np.zeros(K, dtype=complex)
    frame[1:K // 2] = x
    frame[K // 2 + 1:] = np.conj(x[::-1])
    return math.sqrt(K / (K - 2)) * frame


# ----------------------------------------------------------------------
# SINR

def downlink_sinr(ue_pos, serving_ap, all_aps, k, cfg: NetworkConfig, room=None, trx=None):
    """SINR of a UE at ``ue_pos`` on subcarrier(s) ``k`` served by ``serving_ap``.

    Interference comes from the members of ``all_aps`` listed in the serving
    AP's co-channel set. ``room`` and ``trx`` default to those of ``cfg``.
    """
    from .channel import room_from_config, total_gain, transceiver_from_config

    room = room or room_from_config(cfg)
    trx = trx or transceiver_from_config(cfg)
    own = total_gain(serving_ap, ue_pos, room, trx)
    peers = set(serving_ap.co_channel)
    interf = [total_gain(ap, ue_pos, room, trx) for ap in all_aps if ap.index in peers]
    return sinr_from_gains(own, interf, k, cfg)


def sinr_from_gains(serving_gain: float, interferer_gains: Sequence[float], k, cfg: NetworkConfig):
    """Per-subcarrier SINR from DC channel gains.

    ``serving_gain`` and ``interferer_gains`` are the total DC gains from the
    serving AP and from the APs sharing its band. The LED low-pass response
    scales signal and interference alike. ``k`` may be an array.
    """
    from .channel import led_response

    K = cfg.n_subcarriers
    h_led = led_response(k, K, cfg.bw_down, cfg.w0)
    scale = (cfg.responsivity_a_w * cfg.p_down_w * h_led) ** 2
    noise = (K - 2) * cfg.conversion_factor ** 2 * cfg.noise_psd * cfg.bw_down / K
    interference = float(np.sum(np.square(interferer_gains))) if len(interferer_gains) else 0.0
    return scale * serving_gain ** 2 / (noise + scale * interference)


def downlink_sinr_matrix(gains: np.ndarray, cfg: NetworkConfig, serving=None):
    """SINR on every data subcarrier for UEs with AP gain rows ``gains`` (n, n_ap).

    Returns ``(serving_ap, sinr)`` where ``sinr`` has shape ``(n, K/2 - 1)``.
    UEs attach to the AP with the largest gain unless ``serving`` is given.
    """
    from .channel import led_response

    gains = np.atleast_2d(gains)
    if serving is None:
        serving = np.argmax(gains, axis=1)
    K = cfg.n_subcarriers
    groups = cfg.groups()
    peer = np.zeros((cfg.n_aps, cfg.n_aps))
    for g in groups:
        for i in g:
            for j in g:
                if i != j:
                    peer[i, j] = 1.0
    own = gains[np.arange(len(gains)), serving]
    interf = np.sum(peer[serving] * gains ** 2, axis=1)
    k = np.arange(1, K // 2)
    scale = (cfg.responsivity_a_w * cfg.p_down_w * led_response(k, K, cfg.bw_down, cfg.w0)) ** 2
    noise = (K - 2) * cfg.conversion_factor ** 2 * cfg.noise_psd * cfg.bw_down / K
    sinr = scale[None, :] * (own ** 2)[:, None] / (noise + scale[None, :] * interf[:, None])
    return serving, sinr


def simplified_sinr(r, k, G: float, h: float, m: float, bandwidth: float, K: int, w0: float):
    """LOS-only, interference-free SINR ``G exp(-4 pi k B / K w0) / (r^2 + h^2)^(m+3)``."""
    r = np.asarray(r, dtype=float)
    k = np.asarray(k, dtype=float)
    return G * np.exp(-4 * np.pi * k * bandwidth / (K * w0)) / (r * r + h * h) ** (m + 3)


# ----------------------------------------------------------------------
# scheduling and rates

def fair_schedule(r_req, sinr, subcarrier_bandwidth: float, avg_rate=None,
                  delta: float = 1.0, stop_when_met: bool = True) -> Allocation:
    """Assign data subcarriers in ascending order to ``argmax_j R_req_j / Rbar_j``.

    ``sinr`` holds the SINRs the scheduler believes, shape ``(n, K/2 - 1)``.
    After each assignment the winner's running rate grows by the believed
    subcarrier rate ``B/K log2(1 + sinr)``. With ``stop_when_met`` a UE
    leaves the pool once its believed rate reaches ``R_req``; leftover
    subcarriers stay idle. Ties go to the lowest UE index.
    """
    req = np.asarray(r_req, dtype=float)
    if np.any(req <= 0):
        raise ValueError("requested rates must be positive")
    sinr = np.atleast_2d(np.asarray(sinr, dtype=float))
    n, n_data = sinr.shape
    if len(req) != n:
        raise ValueError("r_req and sinr disagree on the number of UEs")
    inc = (subcarrier_bandwidth * np.log2(1.0 + sinr)).tolist()
    start = (np.full(n, float(delta)) if avg_rate is None
             else np.maximum(np.asarray(avg_rate, dtype=float), delta))
    running = start.tolist()
    req_l = req.tolist()
    gained = [0.0] * n
    # max R_req / Rbar == min Rbar / R_req; the index breaks ties towards the lowest UE
    heap = [(running[j] / req_l[j], j) for j in range(n)]
    heapq.heapify(heap)
    owner = np.full(n_data, IDLE)
    for col in range(n_data):
        if not heap:
            break
        _, j = heapq.heappop(heap)
        owner[col] = j
        step = inc[j][col]
        running[j] += step
        gained[j] += step
        if not (stop_when_met and gained[j] >= req_l[j]):
            heapq.heappush(heap, (running[j] / req_l[j], j))
    return Allocation(owner, np.array(gained))


def downlink_rate(alloc: Allocation, sinr, subcarrier_bandwidth: float,
                  high_snr: bool = False) -> np.ndarray:
    """Achieved rate per UE, scoring ``alloc`` against the SINRs in ``sinr``."""
    sinr = np.atleast_2d(np.asarray(sinr, dtype=float))
    s = alloc.mask(sinr.shape[0])
    if high_snr:
        with np.errstate(divide="ignore"):
            per = np.where(s, np.log2(np.where(s, sinr, 1.0)), 0.0)
    else:
        per = np.log2(1.0 + np.where(s, sinr, 0.0))
    return subcarrier_bandwidth * per.sum(axis=1)


def write_allocation_csv(path, alloc: Allocation, sinr_of_owner) -> None:
    """Columns ``k, owner, sinr_db``; idle subcarriers get owner -1 and an empty SINR."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "owner", "sinr_db"])
        for i, (o, g) in enumerate(zip(alloc.owner, sinr_of_owner)):
            w.writerow([i + 1, int(o), "" if o < 0 else f"{10 * math.log10(g):.4f}"])


# ----------------------------------------------------------------------
# required subcarriers

def _dc_log_snr(r0, params) -> np.ndarray:
    return np.log2(params.G) - (params.m + 3) * np.log2(params.h ** 2 + np.asarray(r0) ** 2)


def k_req(r0, r_req, params, mode: Literal["exact", "approx", "continuous"] = "exact"):
    """Number of lowest data subcarriers needed to carry ``r_req`` at distance ``r0``.

    ``params`` exposes ``G, h, m, B_dn, K, w0``. ``exact`` takes the smaller
    root of the quadratic obtained by summing the high-SNR subcarrier rates
    and rounds up; ``continuous`` returns that root unrounded; ``approx``
    ignores the LED roll-off, giving ``ceil(K R / (B log2(G / d^(2(m+3)))))``.
    """
    B, K = params.B_dn, params.K
    a = _dc_log_snr(r0, params)
    r_req = np.asarray(r_req, dtype=float)
    if np.any(a <= 0):
        raise InfeasibleRateError("SINR below 0 dB at the cell position; rate model undefined")
    if mode == "approx":
        k = np.ceil(K * r_req / (B * a) - 1e-9)
    elif mode in ("exact", "continuous"):
        c = 2 * np.pi * B / (K * params.w0) * LOG2E
        q = 2 * np.pi / params.w0 * (B / K) ** 2 * LOG2E
        disc = (1 - a / c) ** 2 - 4 * r_req / q
        if np.any(disc < 0):
            raise InfeasibleRateError(f"requested rate {r_req} is beyond what the LED band supports")
        k = ((a / c - 1) - np.sqrt(disc)) / 2
        if mode == "exact":
            k = np.ceil(k - 1e-9)
    else:
        raise ValueError(f"unknown k_req mode {mode!r}")
    if np.any(k > K // 2 - 1):
        raise InfeasibleRateError(f"{r_req} bit/s needs more than the {K // 2 - 1} data subcarriers")
    k = np.maximum(k, 0.0)
    if mode == "continuous":
        return k if k.ndim else float(k)
    return k.astype(int) if k.ndim else int(k)


def rate_of_lowest(n_sub: int, r0: float, params) -> float:
    """High-SNR rate of subcarriers ``1..n_sub`` at distance ``r0``, summed term by term."""
    k = np.arange(1, n_sub + 1)
    gamma = simplified_sinr(r0, k, params.G, params.h, params.m, params.B_dn, params.K, params.w0)
    return float(params.B_dn / params.K * np.sum(np.log2(gamma)))
