"""Optimal feedback update interval for limited-frequency feedback.

A UE starts a straight leg at distance ``r0`` from the cell centre, moving
at speed ``v`` at angle ``theta`` from the direction to the centre. Its
squared distance to the AP is

    D(t) = (v t - r0 cos(theta))^2 + b^2,   b^2 = h^2 + r0^2 sin^2(theta).

The AP refreshes its channel knowledge every ``t_u`` seconds. Uplink pays
``t_fb / t_u`` of its airtime for the reports; the downlink keeps the
subcarriers it reserved at ``t = 0`` while the UE drifts. Both time-averaged
rates have closed forms built on

    (1/t) int_0^t ln D = ln D(t) - (r0 cos(theta) / (v t)) ln(D(t) / D(0))
                         - 2 + (2 b / (v t)) (atan(s / b) + atan(r0 cos(theta) / b)),

with ``s = v t - r0 cos(theta)``. Expectations over the initial state use
``f(r0) = 2 r0 / r_c^2`` on ``[0, r_c]`` and ``theta`` uniform on ``[0, pi]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from scipy.optimize import brentq

from .config import NetworkConfig
from .downlink import k_req as _k_req
from .errors import ConfigError, IntervalError, NoRootError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class UpdateIntervalParams:
    w_u: float
    w_d: float
    t_fb: float
    v: float
    R_req: float
    N: int
    overload: float
    G: float
    G_u: float
    h: float
    m: float
    B_dn: float
    B_un: float
    K: int
    T_u: float
    r_c: float
    w0: float
    approx_guard: float = 5.0
    k_mode: Literal["continuous", "exact", "approx"] = "continuous"

    def __post_init__(self):
        if self.w_u < 0 or self.w_d < 0 or (self.w_u == 0 and self.w_d == 0):
            raise ConfigError("weights must be non-negative and not both zero")
        if self.t_fb <= 0:
            raise ConfigError("t_fb must be positive")
        if self.v < 0:
            raise ConfigError("speed must be non-negative")
        if not 0 < self.overload <= 1:
            raise ConfigError("overload factor must lie in (0, 1]")

    @classmethod
    def from_config(cls, cfg: NetworkConfig, v: float = 1.0, **overrides) -> "UpdateIntervalParams":
        from .uplink import mac_throughput_for

        base = dict(
            w_u=cfg.w_u, w_d=cfg.w_d, t_fb=cfg.t_fb, v=v, R_req=cfg.r_req, N=cfg.n_ues,
            overload=cfg.overload, G=cfg.link_gain_down, G_u=cfg.link_gain_up, h=cfg.h,
            m=cfg.lambertian_order, B_dn=cfg.bw_down, B_un=cfg.bw_up, K=cfg.n_subcarriers,
            T_u=mac_throughput_for(cfg), r_c=cfg.cell_radius_m, w0=cfg.w0,
        )
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "UpdateIntervalParams":
        return replace(self, **changes)

    @property
    def served_rate(self) -> float:
        """Per-UE rate the scheduler actually delivers, ``overload * R_req``."""
        return self.overload * self.R_req

    @property
    def uplink_scale(self) -> float:
        return self.T_u * self.B_un / self.N

    @property
    def t_max(self) -> float:
        """Upper end ``2 r_c / v`` of the admissible update intervals."""
        return math.inf if self.v == 0 else 2 * self.r_c / self.v


@dataclass(frozen=True)
class ThroughputBreakdown:
    avg_uplink: float
    avg_downlink: float
    weighted_sum: float

    @classmethod
    def combine(cls, up: float, down: float, w_u: float, w_d: float) -> "ThroughputBreakdown":
        return cls(up, down, w_u * up + w_d * down)


# ----------------------------------------------------------------------
# time averages

def _geometry(r0, theta, p: UpdateIntervalParams):
    r0 = np.asarray(r0, dtype=float)
    theta = np.asarray(theta, dtype=float)
    rc = r0 * np.cos(theta)
    b = np.sqrt(p.h ** 2 + (r0 * np.sin(theta)) ** 2)
    d0 = r0 * r0 + p.h ** 2
    return rc, b, d0


def _avg_log2_gain(log2_gain, t, r0, theta, p: UpdateIntervalParams):
    """``(1/t) int_0^t log2(gain / D(s)^(m+3)) ds`` in closed form."""
    rc, b, d0 = _geometry(r0, theta, p)
    t = np.asarray(t, dtype=float)
    vt = p.v * t
    s1 = vt - rc
    d1 = s1 * s1 + b * b
    if p.v == 0:
        return log2_gain - (p.m + 3) * np.log2(d0) + 0.0 * t
    atan_sum = np.arctan2(b * (s1 + rc), b * b - s1 * rc)  # atan(s1/b) + atan(rc/b)
    mean_ln_d = (np.log(d1) - rc / vt * np.log(d1 / d0) - 2.0 + 2.0 * b / vt * atan_sum)
    return log2_gain - (p.m + 3) * mean_ln_d / LN2


def _log2_gain_at(log2_gain, t, r0, theta, p: UpdateIntervalParams):
    """Instantaneous ``log2(gain / D(t)^(m+3))``."""
    rc, b, _ = _geometry(r0, theta, p)
    s = p.v * np.asarray(t, dtype=float) - rc
    return log2_gain - (p.m + 3) * np.log2(s * s + b * b)


def _check_interval(t_u, p: UpdateIntervalParams, need_fb: bool):
    t = np.asarray(t_u, dtype=float)
    if np.any(t <= 0) or np.any(t >= p.t_max):
        raise IntervalError(f"update interval must lie in (0, {p.t_max:.6g}) s")
    if need_fb and np.any(t <= p.t_fb):
        raise IntervalError(f"update interval must exceed t_fb = {p.t_fb} s")


def downlink_subcarriers(r0, p: UpdateIntervalParams):
    """Subcarriers reserved at ``t = 0`` for the delivered rate ``overload * R_req``."""
    return _k_req(r0, p.served_rate, p, mode=p.k_mode)


def avg_uplink_rate(t_u, r0, theta, p: UpdateIntervalParams):
    """Uplink rate averaged over one update interval, feedback airtime deducted."""
    _check_interval(t_u, p, need_fb=True)
    keep = 1.0 - p.t_fb / np.asarray(t_u, dtype=float)
    return keep * p.uplink_scale * _avg_log2_gain(math.log2(p.G_u), t_u, r0, theta, p)


def avg_downlink_rate(t_u, r0, theta, p: UpdateIntervalParams, k=None):
    """Downlink rate averaged over one update interval on the subcarriers reserved at ``t = 0``."""
    _check_interval(t_u, p, need_fb=False)
    k = downlink_subcarriers(r0, p) if k is None else np.asarray(k, dtype=float)
    log2_eff = np.log2(p.G) - 2 * np.pi * (k + 1) * p.B_dn / (p.K * p.w0) / LN2
    return k * p.B_dn / p.K * _avg_log2_gain(log2_eff, t_u, r0, theta, p)


def rate_derivatives(t_u, r0, theta, p: UpdateIntervalParams,
                     mode: Literal["exact", "approx"] = "exact", k=None):
    """``(d Rbar_u / d t_u, d Rbar_d / d t_u)``.

    ``exact`` differentiates the closed forms. ``approx`` keeps the leading
    small-displacement terms and is only meaningful for ``v t_u << h``; a
    ``RuntimeWarning`` flags ``v t_u >= h / approx_guard``.
    """
    t = np.asarray(t_u, dtype=float)
    k = downlink_subcarriers(r0, p) if k is None else np.asarray(k, dtype=float)
    c_up = p.uplink_scale
    c_dn = k * p.B_dn / p.K
    log2_gu = math.log2(p.G_u)
    if mode == "exact":
        _check_interval(t, p, need_fb=True)
        log2_gd = np.log2(p.G) - 2 * np.pi * (k + 1) * p.B_dn / (p.K * p.w0) / LN2
        f_u = _log2_gain_at(log2_gu, t, r0, theta, p)
        l_u = _avg_log2_gain(log2_gu, t, r0, theta, p)
        f_d = _log2_gain_at(log2_gd, t, r0, theta, p)
        l_d = _avg_log2_gain(log2_gd, t, r0, theta, p)
        d_up = c_up * (f_u * (1 - p.t_fb / t) - l_u * (1 - 2 * p.t_fb / t)) / t
        d_dn = c_dn * (f_d - l_d) / t
        return d_up, d_dn
    if mode != "approx":
        raise ValueError(f"unknown derivative mode {mode!r}")
    if np.any(p.v * t >= p.h / p.approx_guard):
        warnings.warn(f"v t_u >= h/{p.approx_guard:g}: small-displacement derivative is unreliable",
                      RuntimeWarning, stacklevel=2)
    _, b, d0 = _geometry(r0, theta, p)
    drift = 2 * (p.m + 3) * p.v ** 2 * b ** 4 * t / (3 * LN2 * d0 ** 3)
    d_up = -c_up * drift + c_up * p.t_fb / t ** 2 * (log2_gu - (p.m + 3) * np.log2(d0))
    d_dn = -c_dn * drift
    return d_up, d_dn


# ----------------------------------------------------------------------
# expectations over the initial state

@lru_cache(maxsize=8)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def expectation_grid(p: UpdateIntervalParams, n: int = 64):
    """Tensor Gauss-Legendre nodes ``(r0, theta)`` and weights for the initial-state law."""
    x, w = _gl_nodes(n)
    r0 = 0.5 * p.r_c * (x + 1)
    w_r = 0.5 * p.r_c * w * 2 * r0 / p.r_c ** 2
    th = 0.5 * np.pi * (x + 1)
    w_t = 0.5 * np.pi * w / np.pi
    R, T = np.meshgrid(r0, th, indexing="ij")
    W = np.outer(w_r, w_t)
    return R, T, W


def expect(func: Callable, p: UpdateIntervalParams, n: int = 64) -> float:
    """``E[func(r0, theta)]`` by tensor Gauss-Legendre quadrature."""
    R, T, W = expectation_grid(p, n)
    return float(np.sum(W * func(R, T)))


def expectation_constants(p: UpdateIntervalParams, n: int = 64) -> tuple[float, float]:
    """Constants ``(C1, C2)`` of the closed-form interval."""
    edge = p.r_c ** 2 + p.h ** 2
    if p.G <= edge ** (p.m + 3) or p.G_u <= edge ** (p.m + 3):
        raise ConfigError("link constants too small: log-SINR turns negative inside the cell")
    log_d = lambda r0, th: np.log2(p.G) - (p.m + 3) * np.log2(r0 ** 2 + p.h ** 2)
    log_u = lambda r0, th: np.log2(p.G_u) - (p.m + 3) * np.log2(r0 ** 2 + p.h ** 2)
    spread = lambda r0, th: ((p.h ** 2 + (r0 * np.sin(th)) ** 2) ** 2
                             / (p.h ** 2 + r0 ** 2) ** 3)
    c2 = expect(log_d, p, n)
    c1 = expect(log_u, p, n) * c2 / expect(spread, p, n)
    return c1, c2


def t_opt_closed_form(p: UpdateIntervalParams, overloaded: bool = False, n: int = 64) -> float:
    """Cube-root approximation of the optimal update interval (``v t << h`` regime).

    With ``overloaded`` the delivered rate ``overload * R_req`` replaces ``R_req``.
    """
    if p.v <= 0:
        raise ConfigError("closed-form interval needs v > 0")
    c1, c2 = expectation_constants(p, n)
    rate = p.served_rate if overloaded else p.R_req
    gain = 3 * LN2 / (2 * (p.m + 3)) * p.w_u * p.t_fb * p.T_u * p.B_un * c1
    cost = p.w_d * p.v ** 2 * p.N * rate + c2 * p.w_u * p.v ** 2 * p.T_u * p.B_un
    return (gain / cost) ** (1.0 / 3.0)


def expected_derivative(t_u: float, p: UpdateIntervalParams, n: int = 64,
                        mode: Literal["exact", "approx"] = "exact") -> float:
    """``E[w_u dRbar_u/dt + w_d dRbar_d/dt]`` at ``t_u``."""
    R, T, W = expectation_grid(p, n)
    k = downlink_subcarriers(R, p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        du, dd = rate_derivatives(t_u, R, T, p, mode=mode, k=k)
    return float(np.sum(W * (p.w_u * du + p.w_d * dd)))


def expected_throughput(t_u: float, p: UpdateIntervalParams, n: int = 64) -> ThroughputBreakdown:
    """Quadrature expectation of the interval-averaged uplink and downlink rates."""
    R, T, W = expectation_grid(p, n)
    up = float(np.sum(W * avg_uplink_rate(t_u, R, T, p)))
    down = float(np.sum(W * avg_downlink_rate(t_u, R, T, p)))
    return ThroughputBreakdown.combine(up, down, p.w_u, p.w_d)


def t_opt_numeric(p: UpdateIntervalParams, n: int = 64, n_scan: int = 20, tol: float = 1e-5) -> float:
    """Root of the expected throughput derivative on ``(t_fb, 2 r_c / v)``.

    The range is scanned on ``n_scan`` log-spaced points for the first
    change of sign, which is then refined by Brent's method.
    """
    if p.v <= 0:
        raise ConfigError("numeric interval search needs v > 0")
    lo, hi = 1.01 * p.t_fb, p.t_max * (1 - 1e-9)
    if not lo < hi:
        raise NoRootError("admissible interval is empty: t_fb exceeds 2 r_c / v")
    R, T, W = expectation_grid(p, n)
    k = downlink_subcarriers(R, p)

    def g(t):
        du, dd = rate_derivatives(t, R, T, p, k=k)
        return float(np.sum(W * (p.w_u * du + p.w_d * dd)))

    grid = np.geomspace(lo, hi, n_scan)
    vals = [g(t) for t in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa > 0 >= fb:
            return brentq(g, a, b, xtol=tol)
    raise NoRootError("expected derivative keeps one sign on the admissible range "
                      f"(from {vals[0]:.4g} to {vals[-1]:.4g})")
