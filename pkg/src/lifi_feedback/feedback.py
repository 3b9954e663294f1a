"""Feedback schemes and their overhead.

* Full (FF): every UE reports the quantised SINR of every data subcarrier
  at the start of each frame.
* One-bit: every UE reports, per data subcarrier, whether its SINR clears
  a common threshold.
* LCF: the full vector is sent once; afterwards only the DC-reference SINR
  is reported and the AP rescales the stored vector.
* LFF: the full vector is sent only every ``t_u`` seconds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from scipy.optimize import brentq

from .config import NetworkConfig
from .downlink import IDLE, Allocation, SinrVector
from .errors import ConfigError, IntervalError

SchemeKind = Literal["ff", "onebit", "lcf", "lff"]
SCHEMES: tuple[str, ...] = ("ff", "onebit", "lcf", "lff")


@dataclass(frozen=True)
class FeedbackScheme:
    kind: SchemeKind
    bits_per_sinr: int = 10
    threshold: float | None = None
    update_interval: float | None = None

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ConfigError(f"unknown feedback scheme {self.kind!r}")
        if self.bits_per_sinr < 1:
            raise ConfigError("bits_per_sinr must be >= 1")
        if self.kind == "onebit" and self.threshold is not None and not self.threshold > 0:
            raise ConfigError("one-bit threshold must be positive")
        if self.kind == "lff" and self.update_interval is not None and not self.update_interval > 0:
            raise ConfigError("LFF update interval must be positive")


@dataclass(frozen=True)
class FeedbackReport:
    """What one UE sends: ``full`` vector, ``bits``, ``scalar`` reference or ``deferred``."""

    kind: Literal["full", "bits", "scalar", "deferred"]
    payload: Any = None

    def __post_init__(self):
        expected = {"full": SinrVector, "bits": np.ndarray, "scalar": float, "deferred": type(None)}
        if not isinstance(self.payload, expected[self.kind]):
            raise TypeError(f"{self.kind} report carries {type(self.payload).__name__}")


# ----------------------------------------------------------------------
# airtime

def feedback_ratio(t_fb: float, t_u: float) -> float:
    """Share of airtime spent on feedback when reports go out every ``t_u`` seconds."""
    if not 0 < t_fb <= t_u:
        raise IntervalError(f"need 0 < t_fb <= t_u, got t_fb={t_fb}, t_u={t_u}")
    return t_fb / t_u


def feedback_ratio_frames(n_data: int, n_fb: int, t_fb: float, t_frame: float) -> float:
    """Feedback share from frame counts: ``n_fb t_fb / ((n_data + n_fb) t_frame)``."""
    if n_fb < 1 or n_data < 0:
        raise ValueError("need at least one feedback frame")
    return n_fb * t_fb / ((n_data + n_fb) * t_frame)


def overhead_per_frame(scheme: FeedbackScheme | str, K: int, bits_per_sinr: int | None = None,
                       M: int | None = None) -> float:
    """Feedback bits per frame and per UE.

    LFF spreads one full report over ``M`` frames, so its value is a
    fraction in general; the other schemes give integers.
    """
    if isinstance(scheme, str):
        scheme = FeedbackScheme(scheme)
    b = scheme.bits_per_sinr if bits_per_sinr is None else bits_per_sinr
    n = K // 2 - 1
    if scheme.kind == "ff":
        return b * n
    if scheme.kind == "onebit":
        return n
    if scheme.kind == "lcf":
        return b
    if M is None or M < 1:
        raise ValueError("LFF overhead needs M >= 1 frames per update")
    return b * n / M


def frames_per_update(t_u: float, t_frame: float) -> int:
    """Number of frames ``M`` covered by one LFF update (rounded up)."""
    return max(1, math.ceil(t_u / t_frame - 1e-12))


def report_airtime(bits: float, cfg: NetworkConfig) -> float:
    """Uplink time for ``bits`` of feedback; a full report takes ``t_fb``."""
    return cfg.t_fb * bits / (cfg.bits_per_sinr * cfg.n_data_subcarriers)


def write_overhead_csv(path, K_values, bits_per_sinr: int = 10, M: int | None = None) -> None:
    """Rows ``K, scheme, bits_per_frame``; LFF rows only when ``M`` is given."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "scheme", "bits_per_frame"])
        for K in K_values:
            for kind in SCHEMES:
                if kind == "lff" and M is None:
                    continue
                val = overhead_per_frame(kind, K, bits_per_sinr, M)
                w.writerow([K, kind, f"{val:g}"])


# ----------------------------------------------------------------------
# LCF

def lcf_estimate(initial: SinrVector, current_avg_power: float) -> SinrVector:
    """Rescale a stored SINR vector by the change of its DC reference."""
    if not initial.avg_power_ref > 0:
        raise ValueError("stored reference SINR must be positive")
    ratio = current_avg_power / initial.avg_power_ref
    return SinrVector(initial.per_subcarrier * ratio, current_avg_power)


# ----------------------------------------------------------------------
# one-bit

def one_bit_report(sinr, threshold: float):
    """1 where ``sinr >= threshold``, else 0."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    bits = (np.asarray(sinr) >= threshold).astype(np.int8)
    return int(bits) if bits.ndim == 0 else bits


def ap_select(bits, rng: np.random.Generator, fallback: bool = False):
    """Pick uniformly among UEs that sent a 1; ``None`` when nobody did.

    With ``fallback`` an all-zero round picks any UE uniformly instead.
    """
    bits = np.asarray(bits)
    ones = np.flatnonzero(bits)
    if ones.size:
        return int(ones[rng.integers(ones.size)])
    if fallback and bits.size:
        return int(rng.integers(bits.size))
    return None


def one_bit_schedule(bits, r_req, threshold: float, subcarrier_bandwidth: float,
                     rng: np.random.Generator, fallback: bool = True) -> Allocation:
    """Allocate data subcarriers from one-bit reports.

    Each subcarrier goes to a random UE among those still short of their
    request that reported a 1 on it. The AP credits the winner with the
    rate the threshold guarantees, ``B/K log2(1 + threshold)``, and drops
    it from the pool once the request is covered.
    """
    bits = np.atleast_2d(np.asarray(bits, dtype=bool))
    n, n_data = bits.shape
    req = np.broadcast_to(np.asarray(r_req, dtype=float), (n,))
    credit = subcarrier_bandwidth * math.log2(1.0 + threshold)
    need = np.ceil(req / credit - 1e-12).astype(int).tolist()
    columns = bits.T.tolist()
    # one uniform draw per subcarrier keeps the random stream independent of the outcome
    u = rng.random(n_data).tolist()
    owner = np.full(n_data, IDLE)
    got = [0] * n
    open_ = [j for j in range(n) if need[j] > 0]
    for col in range(n_data):
        if not open_:
            break
        said = columns[col]
        cand = [j for j in open_ if said[j]]
        if not cand:
            if not fallback:
                continue
            cand = open_
        pick = cand[int(u[col] * len(cand))]
        owner[col] = pick
        got[pick] += 1
        if got[pick] >= need[pick]:
            open_.remove(pick)
    return Allocation(owner, np.array(got) * credit)


def default_onebit_threshold(cfg: NetworkConfig) -> float:
    """Median of the simplified downlink SINR over the cell and the data band.

    UE positions follow the uniform-in-disc law, so ``r^2`` is uniform on
    ``[0, r_c^2]``; the subcarrier index is uniform over the data band.
    The median is found exactly from that mixture CDF.
    """
    if cfg.onebit_threshold is not None:
        return cfg.onebit_threshold
    m, h2, rc2 = cfg.lambertian_order, cfg.h ** 2, cfg.cell_radius_m ** 2
    k = np.arange(1, cfg.n_subcarriers // 2)
    log_top = (math.log(cfg.link_gain_down)
               - 4 * math.pi * k * cfg.bw_down / (cfg.n_subcarriers * cfg.w0))

    def share_above(log_thr):
        # P(gamma >= thr) = mean_k P(r^2 + h^2 <= (top_k / thr)^(1/(m+3)))
        u = np.exp((log_top - log_thr) / (m + 3))
        return float(np.mean(np.clip((u - h2) / rc2, 0.0, 1.0))) - 0.5

    lo = log_top.min() - (m + 3) * math.log(h2 + rc2) - 1.0
    hi = log_top.max() - (m + 3) * math.log(h2) + 1.0
    return math.exp(brentq(share_above, lo, hi, xtol=1e-12))
