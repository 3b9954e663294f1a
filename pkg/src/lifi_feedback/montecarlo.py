"""Monte-Carlo experiments: scheme comparisons, interval sweeps and scenario runs.

Every experiment is a deterministic function of ``(config, seed, n_runs)``.
Random streams come from :class:`numpy.random.SeedSequence` keyed by the
master seed and an experiment-specific tuple, so two runs with the same
inputs produce identical tables. Runs that loop in Python (anything with a
scheduler) may be spread over processes with ``LIFI_WORKERS``; each run
owns its stream, so the result does not depend on the worker count.

Throughput accounting, per UE:

* uplink: ``(1 - eps) * T_u * B_up / N`` times the time-averaged spectral
  efficiency, with ``eps`` the share of uplink airtime used by feedback;
* downlink: the allocation made at the last report is kept fixed and scored
  against the true SINR along the UE's path, capped at the requested rate.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .channel import RoomChannel
from .config import NetworkConfig
from .downlink import downlink_sinr_matrix, fair_schedule, k_req, simplified_sinr, sinr_from_gains
from .feedback import (default_onebit_threshold, frames_per_update, one_bit_schedule,
                       overhead_per_frame, report_airtime)
from .mobility import RwpPaths, sample_initial
from .update_interval import UpdateIntervalParams, t_opt_closed_form, t_opt_numeric
from .uplink import default_control_rate, mac_throughput_for

LOG2E = math.log2(math.e)

TIERS: dict[str, dict[str, int]] = {
    "smoke": {"topt": 100, "schemes": 200, "compare": 30, "scenarios": 30, "grid": 60},
    "paper": {"topt": 10_000, "schemes": 10_000, "compare": 1_000, "scenarios": 1_000, "grid": 200},
}

REFERENCE_SUM_THROUGHPUT_MBPS = {
    ("ff", 0.0): 6.67, ("onebit", 0.0): 7.64, ("lcf", 0.0): 8.33, ("lff", 0.0): 8.35,
    ("onebit", 1.0): 7.47, ("lff", 1.0): 8.08,
}


@dataclass(frozen=True)
class ExperimentConfig:
    n_runs: int = 10_000
    seed: int = 20180101
    t_u_grid: tuple[float, ...] | None = None
    velocity_grid: tuple[float, ...] = (0.5, 1.0, 1.4, 2.0, 2.5)
    schemes: tuple[str, ...] = ("ff", "onebit", "lcf")
    scenario: str = "adaptive"
    fixed_interval: float = 0.01
    n_time: int = 32
    n_grid: int = 200

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        for grid in (self.t_u_grid, self.velocity_grid):
            if grid is not None and (len(grid) == 0 or list(grid) != sorted(grid)):
                raise ValueError("grids must be non-empty and sorted")
        if self.scenario not in ("none", "fixed", "adaptive"):
            raise ValueError(f"unknown scenario {self.scenario!r}")


@dataclass
class ResultTable:
    name: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def where(self, **match) -> list[dict[str, Any]]:
        out = []
        for r in self.rows:
            d = dict(zip(self.columns, r))
            if all(d[k] == v for k, v in match.items()):
                out.append(d)
        return out

    def to_csv(self, path) -> Path:
        """Write the rows and a ``.json`` sidecar holding the metadata.

        The CSV starts with ``#`` comment lines carrying the seed and the
        resolved configuration so each file stands on its own.
        """
        path = Path(path)
        meta = json.dumps(self.metadata, sort_keys=True, default=_jsonable)
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.name} lifi-feedback {__version__}\n")
            fh.write(f"# seed={self.metadata.get('seed')}\n")
            fh.write(f"# metadata={meta}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(x) for x in r])
        path.with_suffix(".json").write_text(
            json.dumps(self.metadata, sort_keys=True, indent=2, default=_jsonable) + "\n")
        return path


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def experiment_metadata(name: str, cfg: NetworkConfig, seed: int, n_runs: int, **extra) -> dict[str, Any]:
    meta = {"experiment": name, "version": __version__, "seed": seed, "n_runs": n_runs,
            "config": cfg.to_dict(), "control_rate_bps": default_control_rate(cfg)}
    meta.update(extra)
    return meta


# ----------------------------------------------------------------------
# randomness and parallel map

def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-experiment ``key`` of master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LIFI_WORKERS", "1")))
    except ValueError:
        return 1


def _map_runs(fn: Callable, jobs: Sequence, workers: int | None = None) -> list:
    workers = _workers() if workers is None else workers
    if workers <= 1 or len(jobs) < 2 * workers:
        return [fn(j) for j in jobs]
    chunk = max(1, len(jobs) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=chunk))


def _mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    n = v.size
    mean = math.fsum(v.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((v - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def _time_nodes(t_end: float, n: int):
    """Gauss-Legendre nodes on ``[0, t_end]`` and weights that average (sum to one)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * t_end * (x + 1), 0.5 * w


# ----------------------------------------------------------------------
# single-UE interval model (update-interval search)

def _interval_rates(t_u: float, r0, paths, p: UpdateIntervalParams, n_time: int,
                    k=None):
    """Per-run interval averages ``(uplink, downlink)`` along simulated paths (high-SNR rates)."""
    nodes, weights = _time_nodes(t_u, n_time)
    r = paths.radial(nodes)
    log2_d = np.log2(r * r + p.h ** 2)
    up_eff = (math.log2(p.G_u) - (p.m + 3) * log2_d) @ weights
    up = (1.0 - p.t_fb / t_u) * p.uplink_scale * up_eff
    if k is None:
        k = np.asarray(k_req(r0, p.served_rate, p, mode=p.k_mode), dtype=float)
    # sum over subcarriers 1..k of log2(G exp(-4 pi j B / K w0) / D^(m+3))
    roll = 4 * np.pi * p.B_dn / (p.K * p.w0) * LOG2E * k * (k + 1) / 2
    down_eff = (k[:, None] * (math.log2(p.G) - (p.m + 3) * log2_d)) @ weights - roll
    down = p.B_dn / p.K * down_eff
    return up, down


class LinePaths:
    """Straight-line motion from ``r0`` at angle ``theta`` to the centre direction.

    One movement period of the RWP model, extended past the boundary: the
    motion the update-interval analysis assumes within one interval.
    """

    def __init__(self, r0, theta, v: float):
        self.r0 = np.asarray(r0, dtype=float)
        self.cos = np.cos(np.asarray(theta, dtype=float))
        self.v = float(v)

    def __len__(self) -> int:
        return self.r0.size

    def radial(self, t) -> np.ndarray:
        vt = self.v * np.asarray(t, dtype=float)[None, :]
        r0 = self.r0[:, None]
        return np.sqrt(np.maximum(r0 * r0 + vt * vt - 2 * r0 * vt * self.cos[:, None], 0.0))


def _draw_paths(p: UpdateIntervalParams, n_runs: int, seed: int, t_end: float,
                motion: str = "line", key=(1,)):
    rng = stream(seed, *key)
    half = (n_runs + 1) // 2
    r0, theta = sample_initial(rng, p.r_c, half)
    # antithetic directions cancel the term linear in cos(theta)
    r0 = np.concatenate([r0, r0])[:n_runs]
    theta = np.concatenate([theta, np.pi - theta])[:n_runs]
    if motion == "line":
        return r0, LinePaths(r0, theta, p.v)
    if motion == "rwp":
        return r0, RwpPaths(rng, r0, theta, p.v, p.r_c, t_end)
    raise ValueError(f"unknown motion model {motion!r}")


def expected_sum_throughput(t_u: float, p: UpdateIntervalParams, n_runs: int = 10_000,
                            seed: int = 0, n_time: int = 32,
                            motion: str = "line") -> tuple[float, float]:
    """MC estimate (mean, stderr) of ``w_u Rbar_u + w_d Rbar_d`` for one update interval.

    ``motion="line"`` moves each UE on a straight line for the whole
    interval. ``"rwp"`` turns at the cell boundary towards fresh uniform
    waypoints, which pulls UEs back towards the centre on long intervals.
    """
    r0, paths = _draw_paths(p, n_runs, seed, t_u, motion)
    up, down = _interval_rates(t_u, r0, paths, p, n_time)
    return _paired_mean_stderr(p.w_u * up + p.w_d * down)


def _paired_mean_stderr(values) -> tuple[float, float]:
    """Mean and stderr of antithetic samples: the two halves are paired."""
    v = np.asarray(values, dtype=float)
    half = v.size // 2
    if v.size % 2 or half < 2:
        return _mean_stderr(v)
    mean, _ = _mean_stderr(v)
    _, se = _mean_stderr(0.5 * (v[:half] + v[half:]))
    return mean, se


def default_t_u_grid(p: UpdateIntervalParams, n: int = 200) -> np.ndarray:
    """Log-spaced update intervals spanning ``(t_fb, 2 r_c / v)``."""
    return np.geomspace(1.01 * p.t_fb, p.t_max * (1 - 1e-9), n)


def greedy_search_topt(p: UpdateIntervalParams, n_runs: int = 10_000, seed: int = 0,
                       grid=None, n_time: int = 32, motion: str = "line"):
    """Grid argmax of the MC expected sum throughput, common random numbers across the grid.

    Returns ``(t_best, grid, means, stderrs)``.
    """
    grid = default_t_u_grid(p) if grid is None else np.asarray(grid, dtype=float)
    r0, paths = _draw_paths(p, n_runs, seed, float(grid.max()), motion)
    k = np.asarray(k_req(r0, p.served_rate, p, mode=p.k_mode), dtype=float)
    means, errs = np.empty(grid.size), np.empty(grid.size)
    for i, t in enumerate(grid):
        up, down = _interval_rates(float(t), r0, paths, p, n_time, k=k)
        means[i], errs[i] = _paired_mean_stderr(p.w_u * up + p.w_d * down)
    return float(grid[int(np.argmax(means))]), grid, means, errs


# ----------------------------------------------------------------------
# multi-UE single-cell model

@dataclass(frozen=True)
class _CellModel:
    """Everything a worker needs to score allocations in one attocell."""

    G: float
    G_u: float
    h: float
    m: float
    B: float
    K: int
    w0: float
    r_c: float
    r_req: float
    n_ues: int
    uplink_scale: float
    threshold: float
    fallback: bool

    @classmethod
    def from_config(cls, cfg: NetworkConfig, r_req: float | None = None) -> "_CellModel":
        return cls(cfg.link_gain_down, cfg.link_gain_up, cfg.h, cfg.lambertian_order,
                   cfg.bw_down, cfg.n_subcarriers, cfg.w0, cfg.cell_radius_m,
                   cfg.r_req if r_req is None else r_req, cfg.n_ues,
                   mac_throughput_for(cfg) * cfg.bw_up / cfg.n_ues,
                   default_onebit_threshold(cfg), cfg.onebit_fallback)

    @property
    def sub_bw(self) -> float:
        return self.B / self.K

    def sinr(self, r, k):
        return simplified_sinr(r, k, self.G, self.h, self.m, self.B, self.K, self.w0)

    def initial_sinr(self, r0) -> np.ndarray:
        k = np.arange(1, self.K // 2)
        return self.sinr(np.asarray(r0)[:, None], k[None, :])

    def score(self, owner: np.ndarray, radial: np.ndarray, weights: np.ndarray):
        """Per-UE time-averaged (downlink, uplink spectral efficiency).

        ``radial`` has shape ``(n_ues, n_t)``; the downlink is capped at the
        request at every instant.
        """
        n, _ = radial.shape
        down = np.zeros(n)
        for j in range(n):
            ks = np.flatnonzero(owner == j) + 1
            if ks.size:
                g = self.sinr(radial[j][:, None], ks[None, :])
                inst = self.sub_bw * np.log2(1.0 + g).sum(axis=1)
                down[j] = np.minimum(inst, self.r_req) @ weights
        gu = self.G_u / (radial ** 2 + self.h ** 2) ** (self.m + 3)
        up_eff = np.log2(1.0 + gu) @ weights
        return down, up_eff


def _cell_draw(model: _CellModel, rng: np.random.Generator, v: float, t_end: float):
    r0, theta = sample_initial(rng, model.r_c, model.n_ues)
    return r0, RwpPaths(rng, r0, theta, v, model.r_c, t_end)


def _scheme_value(model, owner, paths, t_span, eps, n_time):
    nodes, weights = _time_nodes(t_span, n_time)
    down, up_eff = model.score(owner, paths.radial(nodes), weights)
    return float(np.mean(down + (1.0 - eps) * model.uplink_scale * up_eff))


def _schemes_run(job):
    model, seq, eps, t_lff1, t_frame, n_time = job
    rng = np.random.default_rng(seq)
    r0, paths = _cell_draw(model, rng, 1.0, max(t_lff1, t_frame))
    static = RwpPaths(rng, r0, np.zeros_like(r0), 0.0, model.r_c, 0.0)
    sinr0 = model.initial_sinr(r0)
    req = np.full(model.n_ues, model.r_req)
    ff = fair_schedule(req, sinr0, model.sub_bw).owner
    ob = one_bit_schedule(sinr0 >= model.threshold, req, model.threshold, model.sub_bw,
                          rng, fallback=model.fallback).owner
    # LCF at rest sees the true vector up to a common factor, so it schedules as FF
    return (
        _scheme_value(model, ff, static, t_frame, eps["ff"], 2),
        _scheme_value(model, ob, static, t_frame, eps["onebit"], 2),
        _scheme_value(model, ff, static, t_frame, eps["lcf"], 2),
        _scheme_value(model, ff, static, t_frame, eps["lff0"], 2),
        _scheme_value(model, ob, paths, t_frame, eps["onebit"], n_time),
        _scheme_value(model, ff, paths, t_lff1, eps["lff1"], n_time),
    )


def scheme_sum_throughput(cfg: NetworkConfig, n_runs: int = 10_000, seed: int | None = None,
           n_time: int = 16) -> ResultTable:
    """Expected per-UE sum throughput of each feedback scheme in one attocell.

    FF reports every frame; one-bit reports every frame; LCF reports the DC
    reference every frame; LFF reports every ``t_u``, taken as the
    closed-form optimum at ``v = 1`` m/s and as the observation horizon for
    static UEs.
    """
    seed = cfg.seed if seed is None else seed
    model = _CellModel.from_config(cfg)
    p1 = UpdateIntervalParams.from_config(cfg, v=1.0)
    t_lff1 = min(t_opt_closed_form(p1), cfg.horizon_s)
    t_lff0 = cfg.horizon_s
    eps = {
        "ff": cfg.t_fb / cfg.t_frame,
        "onebit": report_airtime(cfg.n_data_subcarriers, cfg) / cfg.t_frame,
        "lcf": report_airtime(cfg.bits_per_sinr, cfg) / cfg.t_frame,
        "lff0": cfg.t_fb / t_lff0,
        "lff1": cfg.t_fb / t_lff1,
    }
    seqs = np.random.SeedSequence([seed, 4]).spawn(n_runs)
    jobs = [(model, s, eps, t_lff1, cfg.t_frame, n_time) for s in seqs]
    res = np.array(_map_runs(_schemes_run, jobs))
    labels = [("ff", 0.0), ("onebit", 0.0), ("lcf", 0.0), ("lff", 0.0), ("onebit", 1.0), ("lff", 1.0)]
    table = ResultTable("scheme_throughput", ["scheme", "velocity_mps", "mean_mbps", "stderr_mbps",
                                   "target_mbps", "rel_error", "n"])
    for i, (scheme, v) in enumerate(labels):
        mean, se = _mean_stderr(res[:, i] / 1e6)
        target = REFERENCE_SUM_THROUGHPUT_MBPS[(scheme, v)]
        table.rows.append((scheme, v, mean, se, target, mean / target - 1, n_runs))
    table.metadata = experiment_metadata("scheme_throughput", cfg, seed, n_runs, feedback_ratio=eps,
                               lff_interval_s={"0": t_lff0, "1": t_lff1},
                               onebit_threshold=model.threshold)
    return table


def _scenario_run(job):
    model, seq, velocities, t_opts, horizon, t_fixed, eps_fixed, t_fb, n_time = job
    rng = np.random.default_rng(seq)
    r0, theta = sample_initial(rng, model.r_c, model.n_ues)
    path_seed = rng.integers(2 ** 63)
    sinr0 = model.initial_sinr(r0)
    req = np.full(model.n_ues, model.r_req)
    ff = fair_schedule(req, sinr0, model.sub_bw).owner
    ob = one_bit_schedule(sinr0 >= model.threshold, req, model.threshold, model.sub_bw,
                          rng, fallback=model.fallback).owner
    out = []
    for v, t_u in zip(velocities, t_opts):
        paths = RwpPaths(np.random.default_rng(path_seed), r0, theta, v, model.r_c, horizon)
        out.append((
            _scheme_value(model, ff, paths, horizon, t_fb / horizon, n_time),
            _scheme_value(model, ob, paths, t_fixed, eps_fixed, n_time),
            _scheme_value(model, ff, paths, t_u, t_fb / t_u, n_time),
        ))
    return out


def scenario_sweep(velocity_grid: Iterable[float], cfg: NetworkConfig, n_runs: int = 1_000,
                   seed: int | None = None, r_req: float = 20e6, fixed_interval: float = 0.01,
                   n_time: int = 32) -> ResultTable:
    """Expected per-UE sum throughput versus speed for three update policies.

    I    one full report when the connection starts, kept for the whole
         observation horizon ``cfg.horizon_s``;
    II   one-bit reports at the start of every frame, with the allocation
         refreshed every ``fixed_interval`` seconds;
    III  full reports every closed-form optimal interval for the UE speed
         (the horizon when the UE is static).

    Each run scores one interval of each policy from the same initial
    state, which is the per-interval expectation of a stationary system.
    """
    seed = cfg.seed if seed is None else seed
    velocities = [float(v) for v in velocity_grid]
    model = _CellModel.from_config(cfg, r_req=r_req)
    horizon = cfg.horizon_s
    t_opts = []
    for v in velocities:
        if v == 0:
            t_opts.append(horizon)
        else:
            p = UpdateIntervalParams.from_config(cfg, v=v, R_req=r_req)
            t_opts.append(min(t_opt_closed_form(p), horizon))
    eps_fixed = report_airtime(cfg.n_data_subcarriers, cfg) / cfg.t_frame
    seqs = np.random.SeedSequence([seed, 12]).spawn(n_runs)
    jobs = [(model, s, velocities, t_opts, horizon, fixed_interval, eps_fixed, cfg.t_fb, n_time)
            for s in seqs]
    res = np.array(_map_runs(_scenario_run, jobs))     # (runs, velocities, 3)
    table = ResultTable("scenarios", ["velocity_mps", "scenario", "update_interval_s", "mean_mbps",
                                    "stderr_mbps", "n"])
    for i, v in enumerate(velocities):
        for j, (name, t_u) in enumerate([("I", horizon), ("II", fixed_interval), ("III", t_opts[i])]):
            mean, se = _mean_stderr(res[:, i, j] / 1e6)
            table.rows.append((v, name, t_u, mean, se, n_runs))
    table.metadata = experiment_metadata("scenarios", cfg, seed, n_runs, r_req_bps=r_req,
                               fixed_interval_s=fixed_interval, horizon_s=horizon,
                               onebit_threshold=model.threshold)
    return table


# ----------------------------------------------------------------------
# room-scale scheme comparison

def _compare_run(job):
    cfg, seq, n_ues_grid, schemes, r_req, threshold = job
    rng = np.random.default_rng(seq)
    room = RoomChannel(cfg)
    sub_bw = cfg.bw_down / cfg.n_subcarriers
    out = []
    for n in n_ues_grid:
        now = room.sample_positions(rng, n)
        before = room.sample_positions(rng, n)
        gains = room.gains(np.vstack([now, before]))
        serving, sinr = downlink_sinr_matrix(gains[:n], cfg)
        _, old_sinr = downlink_sinr_matrix(gains[n:], cfg, serving=serving)
        believed_lcf = sinr.copy()
        # LCF keeps the vector from the earlier position when the AP did not change
        same = np.flatnonzero(np.argmax(gains[n:], axis=1) == serving)
        if same.size:
            ratio = (_dc_sinr(gains[:n][same], serving[same], cfg)
                     / _dc_sinr(gains[n:][same], serving[same], cfg))
            believed_lcf[same] = old_sinr[same] * ratio[:, None]
        totals = dict.fromkeys(schemes, 0.0)
        for ap in np.unique(serving):
            idx = np.flatnonzero(serving == ap)
            req = np.full(idx.size, r_req)
            true = sinr[idx]
            for s in schemes:
                if s == "ff":
                    owner = fair_schedule(req, true, sub_bw)
                elif s == "lcf":
                    owner = fair_schedule(req, believed_lcf[idx], sub_bw)
                else:
                    owner = one_bit_schedule(true >= threshold, req, threshold, sub_bw, rng,
                                             fallback=cfg.onebit_fallback)
                rates = sub_bw * np.log2(1.0 + np.where(owner.mask(idx.size), true, 0.0)).sum(axis=1)
                totals[s] += float(np.minimum(rates, r_req).sum())
        out.append([totals[s] for s in schemes])
    return out


def _dc_sinr(gains, serving, cfg: NetworkConfig) -> np.ndarray:
    """SINR of the DC reference for rows of AP gains and given serving APs."""
    return np.array([sinr_from_gains(g[s], g[_peers(cfg, s)], 0, cfg) for g, s in zip(gains, serving)])


def _peers(cfg: NetworkConfig, ap: int) -> list[int]:
    for g in cfg.groups():
        if ap in g:
            return [i for i in g if i != ap]
    return []


def compare_schemes_downlink(n_ues_grid: Sequence[int], cfg: NetworkConfig,
                             schemes: Sequence[str] = ("ff", "lcf", "onebit"),
                             n_runs: int = 1_000, seed: int | None = None,
                             r_req: float = 20e6) -> ResultTable:
    """Mean network downlink throughput per feedback scheme in the full room.

    UEs are dropped uniformly in the room and attach to the strongest AP.
    FF schedules on the true SINR. LCF rescales the vector it reported at an
    independent earlier position by the change of the DC reference, or
    reports afresh when its serving AP changed. One-bit schedules from
    threshold bits. All schemes are scored on the true SINR, capped at the
    request, with common random positions.
    """
    for s in schemes:
        if s not in ("ff", "lcf", "onebit"):
            raise ValueError(f"scheme {s!r} has no downlink-only comparison")
    seed = cfg.seed if seed is None else seed
    threshold = default_onebit_threshold(cfg)
    seqs = np.random.SeedSequence([seed, 4, 4]).spawn(n_runs)
    jobs = [(cfg, s, list(n_ues_grid), list(schemes), r_req, threshold) for s in seqs]
    res = np.array(_map_runs(_compare_run, jobs))      # (runs, grid, schemes)
    table = ResultTable("downlink_compare", ["n_ues", "scheme", "mean_mbps", "stderr_mbps",
                                 "mean_per_ue_mbps", "n"])
    for i, n in enumerate(n_ues_grid):
        for j, s in enumerate(schemes):
            mean, se = _mean_stderr(res[:, i, j] / 1e6)
            table.rows.append((int(n), s, mean, se, mean / n, n_runs))
    table.metadata = experiment_metadata("downlink_compare", cfg, seed, n_runs, r_req_bps=r_req,
                               onebit_threshold=threshold)
    return table


# ----------------------------------------------------------------------
# update-interval sweeps

def topt_velocity_sweep(velocity_grid, cfg: NetworkConfig, r_req_list=(5e6, 20e6),
                        n_runs: int = 10_000, seed: int | None = None, n_grid: int = 200,
                        with_numeric: bool = True) -> ResultTable:
    """Closed-form, numeric-root and greedy-MC optimal intervals versus speed."""
    seed = cfg.seed if seed is None else seed
    table = ResultTable("topt_velocity", ["r_req_mbps", "velocity_mps", "t_closed_s", "t_numeric_s",
                                   "t_greedy_s", "grid_ratio", "n"])
    for i, r in enumerate(r_req_list):
        for v in velocity_grid:
            p = UpdateIntervalParams.from_config(cfg, v=float(v), R_req=float(r))
            table.rows.append((float(r) / 1e6, float(v), *_three_ways(p, n_runs, seed, n_grid,
                                                                      with_numeric, key=i)))
    table.metadata = experiment_metadata("topt_velocity", cfg, seed, n_runs, grid_points=n_grid)
    return table


def topt_power_sweep(power_grid, cfg: NetworkConfig, v: float = 1.0, r_req_list=(5e6, 20e6),
                     n_runs: int = 10_000, seed: int | None = None, n_grid: int = 200,
                     with_numeric: bool = True) -> ResultTable:
    """Optimal interval versus downlink optical power at fixed speed."""
    seed = cfg.seed if seed is None else seed
    table = ResultTable("topt_power", ["r_req_mbps", "p_down_w", "t_closed_s", "t_numeric_s",
                                   "t_greedy_s", "grid_ratio", "n"])
    for i, r in enumerate(r_req_list):
        for pw in power_grid:
            p = UpdateIntervalParams.from_config(cfg.replace(p_down_w=float(pw)), v=v, R_req=float(r))
            table.rows.append((float(r) / 1e6, float(pw), *_three_ways(p, n_runs, seed, n_grid,
                                                                       with_numeric, key=i)))
    table.metadata = experiment_metadata("topt_power", cfg, seed, n_runs, velocity_mps=v, grid_points=n_grid)
    return table


def _three_ways(p, n_runs, seed, n_grid, with_numeric, key=0):
    closed = t_opt_closed_form(p, overloaded=True)
    numeric = t_opt_numeric(p) if with_numeric else float("nan")
    grid = default_t_u_grid(p, n_grid)
    best, *_ = greedy_search_topt(p, n_runs, seed + 7919 * key, grid)
    return closed, numeric, best, float(grid[1] / grid[0]), n_runs


def overload_sweep(lambda_grid, velocity_grid, cfg: NetworkConfig, n_runs: int = 10_000,
                   seed: int | None = None, n_grid: int = 200,
                   parametrization: str = "served") -> ResultTable:
    """Optimal interval versus overload factor ``lambda`` for several speeds.

    ``served``: the requested rate stays ``cfg.r_req`` and each UE receives
    ``lambda`` of it. ``requested``: each UE receives ``cfg.r_req`` while
    requesting ``cfg.r_req / lambda``.
    """
    if parametrization not in ("served", "requested"):
        raise ValueError(f"unknown parametrization {parametrization!r}")
    seed = cfg.seed if seed is None else seed
    table = ResultTable("topt_overload", ["overload", "velocity_mps", "t_closed_s", "t_numeric_s",
                                 "t_greedy_s", "grid_ratio", "n"])
    for lam in lambda_grid:
        for v in velocity_grid:
            r = cfg.r_req if parametrization == "served" else cfg.r_req / lam
            p = UpdateIntervalParams.from_config(cfg, v=float(v), R_req=r, overload=float(lam))
            table.rows.append((float(lam), float(v), *_three_ways(p, n_runs, seed, n_grid, True)))
    table.metadata = experiment_metadata("topt_overload", cfg, seed, n_runs, parametrization=parametrization,
                               grid_points=n_grid)
    return table


def overhead_table(cfg: NetworkConfig, K_values=(64, 128, 256, 512, 1024, 2048, 4096),
                   velocities=(0.0, 0.5, 1.4)) -> ResultTable:
    """Feedback bits per frame against the subcarrier count.

    LFF rows use ``M = ceil(t_opt / t_frame)`` at each speed; static UEs
    update once per observation horizon.
    """
    table = ResultTable("overhead", ["K", "scheme", "velocity_mps", "frames_per_update",
                                 "bits_per_frame"])
    for K in K_values:
        c = cfg.replace(n_subcarriers=int(K))
        for s in ("ff", "onebit", "lcf"):
            table.rows.append((int(K), s, None, 1, overhead_per_frame(s, int(K), cfg.bits_per_sinr)))
        for v in velocities:
            if v == 0:
                t_u = cfg.horizon_s
            else:
                t_u = min(t_opt_closed_form(UpdateIntervalParams.from_config(c, v=float(v))),
                          cfg.horizon_s)
            M = frames_per_update(t_u, cfg.t_frame)
            table.rows.append((int(K), "lff", float(v), M,
                               overhead_per_frame("lff", int(K), cfg.bits_per_sinr, M)))
    table.metadata = experiment_metadata("overhead", cfg, cfg.seed, 0, velocities=list(velocities))
    return table
