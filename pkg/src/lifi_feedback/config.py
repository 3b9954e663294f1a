"""Network configuration: room geometry, AP lattice, PHY and MAC constants.

Field names double as configuration-file keys. Units are carried in the
name (``pd_area_cm2``, ``w0_mrad_s`` ...) and SI views are exposed as
properties. The defaults reproduce the indoor attocell setup used
throughout the package (10 x 10 x 2.15 m room, 3 x 3 AP lattice).

Configuration files are flat JSON objects. Keys may carry a dotted
section prefix (``"downlink.n_subcarriers"``); only the last component is
significant. A key given as ``null`` is treated as missing.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path
from typing import Any

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0


def fr4_groups(n_side: int) -> list[list[int]]:
    """Four-colour frequency-reuse groups for an ``n_side x n_side`` lattice.

    APs are indexed row-major. Two APs share a band when their row and column
    indices have the same parities.
    """
    groups: dict[tuple[int, int], list[int]] = {}
    for row in range(n_side):
        for col in range(n_side):
            groups.setdefault((row % 2, col % 2), []).append(row * n_side + col)
    return [g for _, g in sorted(groups.items())]


@dataclass(frozen=True)
class NetworkConfig:
    # room and lattice
    room_width_m: float = 10.0
    room_depth_m: float = 10.0
    room_height_m: float = 2.15
    ue_height_m: float = 0.0
    reflectivity: float = 0.85
    patch_m: float = 0.1
    ap_per_side: int = 3
    cell_radius_m: float = 2.35
    co_channel_groups: list[list[int]] | None = None
    # optical front end
    half_intensity_deg: float = 60.0
    fov_deg: float = 90.0
    pd_area_cm2: float = 1.0
    filter_gain: float = 1.0
    refractive_index: float = 1.0
    responsivity_a_w: float = 1.0
    w0_mrad_s: float = 45.3
    conversion_factor: float = 3.0
    noise_psd: float = 1e-21
    # downlink
    n_subcarriers: int = 2048
    bw_down_mhz: float = 10.0
    p_down_w: float = 8.0
    # uplink and MAC
    p_up_w: float = 0.2
    bw_up_mhz: float = 5.0
    payload_bytes: float = 2000.0
    phy_header_bits: float = 128.0
    mac_header_bits: float = 272.0
    rts_bits: float = 288.0
    cts_bits: float = 240.0
    ack_bits: float = 240.0
    sifs_us: float = 16.0
    difs_us: float = 32.0
    slot_us: float = 8.0
    delay_us: float = 1.0
    contention_window: int = 16
    control_rate_mbps: float | None = None
    # feedback
    t_fb_ms: float = 0.8
    frame_ms: float = 1.6
    bits_per_sinr: int = 10
    onebit_threshold: float | None = None
    onebit_fallback: bool = True
    # traffic and objective
    n_ues: int = 5
    r_req_mbps: float = 5.0
    w_u: float = 1.0
    w_d: float = 1.0
    overload: float = 1.0
    horizon_s: float = 1.0
    seed: int = 20180101

    def __post_init__(self):
        self._validate()

    # ------------------------------------------------------------------
    def _validate(self):
        positive = [
            "room_width_m", "room_depth_m", "room_height_m", "patch_m",
            "cell_radius_m", "pd_area_cm2", "filter_gain", "responsivity_a_w",
            "w0_mrad_s", "conversion_factor", "noise_psd", "bw_down_mhz",
            "p_down_w", "p_up_w", "bw_up_mhz", "payload_bytes", "rts_bits",
            "cts_bits", "ack_bits", "sifs_us", "difs_us", "slot_us",
            "delay_us", "t_fb_ms", "frame_ms", "r_req_mbps", "horizon_s",
        ]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ConfigError(f"reflectivity must lie in [0, 1], got {self.reflectivity}")
        if self.patch_m > min(self.room_width_m, self.room_depth_m, self.room_height_m):
            raise ConfigError("patch_m exceeds the smallest wall dimension")
        if not 0.0 <= self.ue_height_m < self.room_height_m:
            raise ConfigError("ue_height_m must lie in [0, room_height_m)")
        if not 0.0 < self.half_intensity_deg < 90.0:
            raise ConfigError("half_intensity_deg must lie in (0, 90)")
        if not 0.0 < self.fov_deg <= 90.0:
            raise ConfigError("fov_deg must lie in (0, 90]")
        if self.refractive_index < 1.0:
            raise ConfigError("refractive_index must be >= 1")
        if self.n_subcarriers < 4 or self.n_subcarriers % 2:
            raise ConfigError("n_subcarriers must be even and >= 4")
        if self.contention_window < 2:
            raise ConfigError("contention_window must be >= 2")
        if self.n_ues < 1 or self.ap_per_side < 1:
            raise ConfigError("n_ues and ap_per_side must be >= 1")
        if self.bits_per_sinr < 1:
            raise ConfigError("bits_per_sinr must be >= 1")
        if self.w_u < 0 or self.w_d < 0 or (self.w_u == 0 and self.w_d == 0):
            raise ConfigError("weights must be non-negative and not both zero")
        if not 0.0 < self.overload <= 1.0:
            raise ConfigError("overload must lie in (0, 1]")
        if self.co_channel_groups is not None:
            seen = [i for g in self.co_channel_groups for i in g]
            if len(seen) != len(set(seen)) or not all(0 <= i < self.n_aps for i in seen):
                raise ConfigError("co_channel_groups must partition AP indices without repeats")

    # ------------------------------------------------------------------
    # SI views
    @property
    def h(self) -> float:
        """Vertical AP-to-UE separation in metres."""
        return self.room_height_m - self.ue_height_m

    @property
    def n_aps(self) -> int:
        return self.ap_per_side ** 2

    @property
    def half_intensity(self) -> float:
        return math.radians(self.half_intensity_deg)

    @property
    def fov(self) -> float:
        return math.radians(self.fov_deg)

    @property
    def pd_area(self) -> float:
        return self.pd_area_cm2 * 1e-4

    @property
    def w0(self) -> float:
        return self.w0_mrad_s * 1e6

    @property
    def bw_down(self) -> float:
        return self.bw_down_mhz * 1e6

    @property
    def bw_up(self) -> float:
        return self.bw_up_mhz * 1e6

    @property
    def t_fb(self) -> float:
        return self.t_fb_ms * 1e-3

    @property
    def t_frame(self) -> float:
        return self.frame_ms * 1e-3

    @property
    def r_req(self) -> float:
        return self.r_req_mbps * 1e6

    @property
    def lambertian_order(self) -> float:
        from .channel import lambertian_order

        return lambertian_order(self.half_intensity)

    @property
    def n_data_subcarriers(self) -> int:
        return self.n_subcarriers // 2 - 1

    # ------------------------------------------------------------------
    # link constants of the LOS-only, interference-free approximation
    @cached_property
    def g0(self) -> float:
        m = self.lambertian_order
        conc = self.refractive_index ** 2 / math.sin(self.fov) ** 2
        return (m + 1) * self.pd_area / (2 * math.pi) * self.filter_gain * conc * self.h ** (m + 1)

    @cached_property
    def link_gain_down(self) -> float:
        """Downlink SINR constant: SINR = G exp(-4 pi k B / K w0) / d^(2(m+3))."""
        K = self.n_subcarriers
        num = K * (self.g0 * self.responsivity_a_w * self.p_down_w) ** 2
        return num / ((K - 2) * self.conversion_factor ** 2 * self.noise_psd * self.bw_down)

    @cached_property
    def link_gain_up(self) -> float:
        """Uplink SNR constant: SNR = G_u / d^(2(m+3))."""
        num = (self.g0 * self.responsivity_a_w * self.p_up_w) ** 2
        return num / (self.conversion_factor ** 2 * self.noise_psd * self.bw_up)

    def groups(self) -> list[list[int]]:
        if self.co_channel_groups is None:
            return fr4_groups(self.ap_per_side)
        return [list(g) for g in self.co_channel_groups]

    # ------------------------------------------------------------------
    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELDS = {f.name: f for f in fields(NetworkConfig)}
_OPTIONAL = {"co_channel_groups", "control_rate_mbps", "onebit_threshold"}


def config_from_mapping(data: dict[str, Any]) -> NetworkConfig:
    """Build a :class:`NetworkConfig` from a flat (optionally dotted) mapping."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    values: dict[str, Any] = {}
    for raw_key, value in data.items():
        key = str(raw_key).rsplit(".", 1)[-1]
        if key not in _FIELDS:
            raise ConfigError(f"unknown configuration key {raw_key!r}")
        if key in values:
            raise ConfigError(f"duplicate configuration key {key!r}")
        if value is None and key not in _OPTIONAL:
            raise ConfigError(f"missing value for required key {key!r}")
        values[key] = _coerce(key, value)
    try:
        return NetworkConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    default = _FIELDS[key].default
    try:
        if key == "co_channel_groups":
            return [[int(i) for i in g] for g in value]
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if isinstance(value, bool):
            raise TypeError
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key!r}: {value!r}") from None


def load_config(path: str | Path | None) -> NetworkConfig:
    """Read a JSON configuration file; ``None`` gives the defaults."""
    if path is None:
        return NetworkConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    if not text.strip():
        return NetworkConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_mapping(data)
