"""Simulation configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..exceptions import ConfigError


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulated experiment needs, in SI units.

    Noise standard deviations are per sample (IMU) or per measurement.
    Random-walk densities are in units per square-root second.
    """

    duration: float = 120.0
    imu_rate: float = 100.0
    meas_rate: float = 30.0

    sigma_w: float = 1.3e-2
    sigma_a: float = 8.3e-2
    sigma_theta: float = 8.7e-2
    sigma_p: float = 0.25
    sigma_v: float = 0.1
    bias_walk_w: float = 1e-4
    bias_walk_a: float = 1e-3

    # truth generation
    n_waypoints: int = 8
    box: float = 5.0
    n_sines: int = 5
    omega_max: float = 1.0
    sine_freq_min: float = 0.02
    sine_freq_max: float = 0.2
    attitude_max_deg: float = 30.0
    bias_std_w: float = 0.02
    bias_std_a: float = 0.1

    # filter initialisation: "zero" starts both filters at the identity with
    # zero biases; "offset" starts them at the truth displaced by the init_*
    # magnitudes along random directions
    init_mode: str = "zero"
    init_att_deg: float = 10.0
    init_pos_m: float = 1.0
    init_vel_mps: float = 1.0
    init_bias: float = 0.05
    # prior standard deviations used for the zero-start mode
    prior_att_deg: float = 30.0
    prior_pos_m: float = 5.0
    prior_vel_mps: float = 1.0
    prior_bw: float = 0.05
    prior_ba: float = 0.2
    # virtual-velocity bias slot of the EqF; its error coordinate mixes in
    # the gyro-bias error times the lever arm of the estimated position
    prior_nu: float = 0.5

    # filter gains
    nu_noise: float = 1e-2
    nu_bias_walk: float = 1e-4
    max_step: float = 0.01
    body_frame_noise: bool = True

    # switches
    noise_free: bool = False
    noise_free_imu: bool = False

    # reporting
    window: float = 40.0
    divergence_floor: float = 1.0

    # campaigns
    runs: int = 15
    sweep_duration: float = 60.0
    sweep_scales: tuple[float, ...] = field(default=(1, 2, 3, 4, 5, 6, 7, 8, 9, 10))
    tune_tight_scale: float = 1e-3
    tune_robust_scale: float = 1.0

    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        for name in ("imu_rate", "meas_rate"):
            r = getattr(self, name)
            if r <= 0 or r != int(r):
                raise ConfigError(f"{name} must be a positive whole number of Hz, got {r}")
        if self.meas_rate > self.imu_rate:
            raise ConfigError("meas_rate may not exceed imu_rate")
        for f in fields(self):
            if f.name.startswith(("sigma_", "bias_", "prior_", "init_")) and f.type == "float":
                if getattr(self, f.name) < 0:
                    raise ConfigError(f"{f.name} must be non-negative")
        if self.init_mode not in ("zero", "offset"):
            raise ConfigError(f"init_mode must be 'zero' or 'offset', got {self.init_mode!r}")
        if self.n_waypoints < 1 or self.n_sines < 0 or self.runs < 1:
            raise ConfigError("n_waypoints and runs must be >= 1, n_sines >= 0")
        if self.max_step <= 0 or self.window <= 0:
            raise ConfigError("max_step and window must be positive")
        if list(self.sweep_scales) != sorted(self.sweep_scales):
            raise ConfigError("sweep_scales must be sorted ascending")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def base_rate(self) -> int:
        """Common grid on which both sensor streams fall exactly."""
        a, b = int(self.imu_rate), int(self.meas_rate)
        return a * b // math.gcd(a, b)

    @property
    def imu_step(self) -> int:
        return self.base_rate // int(self.imu_rate)

    @property
    def meas_step(self) -> int:
        return self.base_rate // int(self.meas_rate)

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


def _convert(name: str, typ: str, raw: str):
    raw = raw.strip()
    try:
        if typ == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "str":
            return raw
        if typ.startswith("tuple"):
            return tuple(float(x) for x in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    raise ConfigError(f"unsupported type for {name}")


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    types = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, types[key], raw)
    return replace(base or SimConfig(), **values)


def load_config(path: str | Path | None, **overrides) -> SimConfig:
    cfg = SimConfig()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = parse_config(text, cfg)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def format_config(cfg: SimConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(float(x)) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
