"""Scenario parameters: per-tier knobs, beam patterns and scenario files.

Everything is stored in linear units and radians. dB values are accepted
only at the file boundary, in keys ending with ``_db`` or ``_dbw``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

from scipy import special

SPEED_OF_LIGHT = 3.0e8
BOLTZMANN = 1.380649e-23
DELTA_FLOOR = 1e-6

FADING_SCALES = ("unit-scale", "unit-mean")


class ConfigError(ValueError):
    """Invalid scenario value. ``field`` names the offending key."""

    def __init__(self, field_name: str, constraint: str):
        super().__init__(f"{field_name}: {constraint}")
        self.field = field_name
        self.constraint = constraint


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def kappa_from_bits(bits: int) -> float:
    """Distortion proportionality of a ``bits``-bit ADC, 2^-b / sqrt(1 - 2^-2b)."""
    if bits < 1:
        raise ConfigError("bits", "must be >= 1")
    q = 2.0 ** (-bits)
    return q / math.sqrt(1.0 - q * q)


def atn_from_amplifier(noise_figure_db: float, bits: float, thermal_noise: float) -> float:
    """Amplified thermal noise variance F * sigma^2 / (1 - 2^-2b).

    ``bits`` may be ``math.inf`` for an ideal quantizer.
    """
    if noise_figure_db < 0:
        raise ConfigError("noise_figure_db", "must be >= 0")
    return db_to_linear(noise_figure_db) * thermal_noise / (1.0 - 2.0 ** (-2.0 * bits))


def jakes_delta(doppler_hz: float, sample_period_s: float) -> float:
    """Lag-one Jakes autocorrelation J0(2 pi f_D T_s)."""
    if doppler_hz < 0:
        raise ConfigError("doppler_hz", "must be >= 0")
    if sample_period_s <= 0:
        raise ConfigError("sample_period_s", "must be > 0")
    return float(special.j0(2.0 * math.pi * doppler_hz * sample_period_s))


def free_space_intercept(carrier_freq: float) -> float:
    """Path-loss intercept (c / (4 pi f_c))^2 at one metre."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * carrier_freq)) ** 2


@dataclass(frozen=True)
class BeamPattern:
    """Sectored antenna: main-lobe gain over ``beamwidth`` radians, back-lobe gain elsewhere."""

    main_lobe_gain: float
    back_lobe_gain: float
    beamwidth: float

    def __post_init__(self):
        if not self.back_lobe_gain > 0:
            raise ConfigError("back_lobe_gain", "must be > 0")
        if self.back_lobe_gain > self.main_lobe_gain:
            raise ConfigError("back_lobe_gain", "must be <= main_lobe_gain")
        if not 0 < self.beamwidth <= 2 * math.pi:
            raise ConfigError("beamwidth", "must lie in (0, 2*pi]")

    @property
    def main_lobe_fraction(self) -> float:
        return self.beamwidth / (2 * math.pi)

    @classmethod
    def omni(cls) -> "BeamPattern":
        return cls(1.0, 1.0, 2 * math.pi)


@dataclass(frozen=True)
class TierParams:
    bs_density: float
    antennas: int
    users_per_bs: int
    tx_power: float
    target_sdinr: float
    los_intercept: float
    nlos_intercept: float
    blockage_rate: float = 1.0 / 141.4
    blockage_fraction: float = 0.0
    los_exponent: float = 3.0
    nlos_exponent: float = 4.0
    tx_beam: BeamPattern = field(default_factory=lambda: BeamPattern(100.0, 1.0, math.pi / 6))
    csit_quality: float = 0.0
    aging_delta: float | None = None
    doppler_hz: float | None = None
    sample_period_s: float | None = None
    tx_impairment: float = 0.0
    rx_impairment: float = 0.0
    # None means "equal to the scenario's thermal noise"; resolved by NetworkConfig.
    atn_variance: float | None = None

    def __post_init__(self):
        if not self.bs_density > 0:
            raise ConfigError("bs_density", "must be > 0")
        if not 0 <= self.blockage_fraction < 1:
            raise ConfigError("blockage_fraction", "must lie in [0, 1)")
        if not self.blockage_rate > 0:
            raise ConfigError("blockage_rate", "must be > 0")
        if int(self.antennas) != self.antennas or self.antennas < 1:
            raise ConfigError("antennas", "must be a positive integer")
        if int(self.users_per_bs) != self.users_per_bs or self.users_per_bs < 1:
            raise ConfigError("users_per_bs", "must be a positive integer")
        if self.users_per_bs > self.antennas:
            raise ConfigError("users_per_bs", "must be <= antennas (zero-forcing needs K <= N)")
        if not self.tx_power > 0:
            raise ConfigError("tx_power", "must be > 0")
        if not self.target_sdinr > 0:
            raise ConfigError("target_sdinr", "must be > 0")
        if not self.los_exponent > 2:
            raise ConfigError("los_exponent", "must be > 2")
        if not self.nlos_exponent > 2:
            raise ConfigError("nlos_exponent", "must be > 2")
        if not (self.los_intercept > 0 and self.nlos_intercept > 0):
            raise ConfigError("los_intercept" if not self.los_intercept > 0 else "nlos_intercept", "must be > 0")
        if not 0 <= self.csit_quality <= 1:
            raise ConfigError("csit_quality", "must lie in [0, 1]")
        if self.tx_impairment < 0:
            raise ConfigError("tx_impairment", "must be >= 0")
        if self.rx_impairment < 0:
            raise ConfigError("rx_impairment", "must be >= 0")
        if self.atn_variance is not None and not self.atn_variance > 0:
            raise ConfigError("atn_variance", "must be > 0")
        if self.doppler_hz is not None or self.sample_period_s is not None:
            if self.doppler_hz is None or self.sample_period_s is None:
                raise ConfigError("aging", "doppler_hz and sample_period_s must be given together")
            if self.aging_delta is not None:
                raise ConfigError("aging", "give either aging_delta or (doppler_hz, sample_period_s)")
            jakes_delta(self.doppler_hz, self.sample_period_s)
        elif self.aging_delta is None:
            object.__setattr__(self, "aging_delta", 1.0)
        elif not -1 <= self.aging_delta <= 1:
            raise ConfigError("aging_delta", "must lie in [-1, 1]")
        object.__setattr__(self, "antennas", int(self.antennas))
        object.__setattr__(self, "users_per_bs", int(self.users_per_bs))

    @property
    def delta(self) -> float:
        """Signed lag-one aging coefficient."""
        if self.aging_delta is not None:
            return self.aging_delta
        return jakes_delta(self.doppler_hz, self.sample_period_s)

    @property
    def outdoor_density(self) -> float:
        return (1.0 - self.blockage_fraction) * self.bs_density

    @property
    def per_user_power(self) -> float:
        return self.tx_power / self.antennas

    @property
    def sdinr_shape(self) -> int:
        """Gamma shape N - K + 1 of the desired-signal power."""
        return self.antennas - self.users_per_bs + 1

    @property
    def error_variance(self) -> float:
        d = self.delta
        return 1.0 - d * d * (1.0 - self.csit_quality**2)

    def intercept(self, los: bool) -> float:
        return self.los_intercept if los else self.nlos_intercept

    def exponent(self, los: bool) -> float:
        return self.los_exponent if los else self.nlos_exponent


@dataclass(frozen=True)
class NetworkConfig:
    tiers: tuple[TierParams, ...]
    thermal_noise: float
    rx_beam: BeamPattern = field(default_factory=BeamPattern.omni)
    carrier_freq: float = 50e9
    sim_window: float = 2500.0
    estimated_channel_variance: float = 1.0
    fading_scale: str = "unit-scale"
    rng_seed: int = 0

    def __post_init__(self):
        tiers = tuple(self.tiers)
        if not tiers:
            raise ConfigError("tiers", "at least one tier required")
        if not self.thermal_noise > 0:
            raise ConfigError("thermal_noise", "must be > 0")
        if not self.carrier_freq > 0:
            raise ConfigError("carrier_freq", "must be > 0")
        if not self.sim_window > 0:
            raise ConfigError("sim_window", "must be > 0")
        if not self.estimated_channel_variance > 0:
            raise ConfigError("estimated_channel_variance", "must be > 0")
        if self.fading_scale not in FADING_SCALES:
            raise ConfigError("fading_scale", f"must be one of {FADING_SCALES}")
        resolved = []
        for i, t in enumerate(tiers):
            if t.atn_variance is None:
                t = replace(t, atn_variance=self.thermal_noise)
            # relative slack absorbs dB round-off at the file boundary
            if t.atn_variance < self.thermal_noise * (1 - 1e-12):
                raise ConfigError(f"tiers[{i}].atn_variance", "must be >= thermal_noise")
            resolved.append(t)
        object.__setattr__(self, "tiers", tuple(resolved))
        object.__setattr__(self, "rng_seed", int(self.rng_seed))

    def interferer_scale(self, users: int) -> float:
        """Gamma scale of an interferer's precoded fading power."""
        return 1.0 if self.fading_scale == "unit-scale" else 1.0 / users

    def with_aging(self, delta: float | None = None, normalized_doppler: float | None = None) -> "NetworkConfig":
        """Copy with every tier's aging set from ``delta`` or from f_D * T_s."""
        if (delta is None) == (normalized_doppler is None):
            raise ConfigError("aging", "give exactly one of delta, normalized_doppler")
        if delta is not None:
            return self.with_tiers(aging_delta=delta, doppler_hz=None, sample_period_s=None)
        return self.with_tiers(aging_delta=None, doppler_hz=normalized_doppler, sample_period_s=1.0)

    def with_tiers(self, **changes) -> "NetworkConfig":
        """Copy with the same field changes applied to every tier."""
        return replace(self, tiers=tuple(replace(t, **changes) for t in self.tiers))


def default_thermal_noise(bandwidth_hz: float = 100e6, noise_figure_db: float = 0.0,
                          temperature_k: float = 290.0) -> float:
    return BOLTZMANN * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db)


# ---------------------------------------------------------------------------
# file boundary

def _beam_from_dict(d: Mapping[str, Any], where: str) -> BeamPattern:
    d = dict(d)
    try:
        main = _pick(d, "main_lobe_gain", where)
        back = _pick(d, "back_lobe_gain", where)
        if "beamwidth_deg" in d:
            width = math.radians(d.pop("beamwidth_deg"))
        else:
            width = d.pop("beamwidth")
    except KeyError as exc:
        raise ConfigError(f"{where}.{exc.args[0]}", "required field missing") from None
    _no_leftovers(d, where)
    return BeamPattern(main, back, width)


def _pick(d: dict, name: str, where: str, default: Any = KeyError) -> Any:
    """Pop ``name`` from ``d`` accepting ``name`` (linear) or ``name_db``/``name_dbw``."""
    present = [k for k in (name, name + "_db", name + "_dbw") if k in d]
    if len(present) > 1:
        raise ConfigError(f"{where}.{name}", "given in more than one unit")
    if not present:
        if default is KeyError:
            raise KeyError(name)
        return default
    key = present[0]
    value = d.pop(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key}", "must be a number")
    return db_to_linear(value) if key != name else value


def _no_leftovers(d: dict, where: str) -> None:
    if d:
        raise ConfigError(f"{where}.{sorted(d)[0]}", "unknown field")


def _tier_from_dict(raw: Mapping[str, Any], where: str, thermal_noise: float,
                    carrier_freq: float) -> TierParams:
    d = dict(raw)
    kw: dict[str, Any] = {}
    try:
        kw["bs_density"] = _pick(d, "bs_density", where)
        kw["antennas"] = d.pop("antennas")
        kw["users_per_bs"] = d.pop("users_per_bs")
        kw["tx_power"] = _pick(d, "tx_power", where)
        kw["target_sdinr"] = _pick(d, "target_sdinr", where)
    except KeyError as exc:
        raise ConfigError(f"{where}.{exc.args[0]}", "required field missing") from None
    fs = free_space_intercept(carrier_freq)
    kw["los_intercept"] = _pick(d, "los_intercept", where, fs)
    kw["nlos_intercept"] = _pick(d, "nlos_intercept", where, fs)
    if "los_range_m" in d:
        if "blockage_rate" in d:
            raise ConfigError(f"{where}.blockage_rate", "given together with los_range_m")
        kw["blockage_rate"] = 1.0 / d.pop("los_range_m")
    for name in ("blockage_rate", "blockage_fraction", "los_exponent", "nlos_exponent", "csit_quality"):
        if name in d:
            kw[name] = d.pop(name)
    if "tx_beam" in d:
        kw["tx_beam"] = _beam_from_dict(d.pop("tx_beam"), where + ".tx_beam")
    if "aging" in d:
        aging = dict(d.pop("aging"))
        if "delta" in aging:
            kw["aging_delta"] = aging.pop("delta")
        elif "doppler_hz" in aging or "velocity_mps" in aging:
            if "velocity_mps" in aging:
                kw["doppler_hz"] = aging.pop("velocity_mps") * carrier_freq / SPEED_OF_LIGHT
            else:
                kw["doppler_hz"] = aging.pop("doppler_hz")
            if "sample_period_s" not in aging:
                raise ConfigError(f"{where}.aging.sample_period_s", "required field missing")
            kw["sample_period_s"] = aging.pop("sample_period_s")
        elif "normalized_doppler" in aging:
            kw["doppler_hz"] = aging.pop("normalized_doppler")
            kw["sample_period_s"] = 1.0
        _no_leftovers(aging, where + ".aging")
    for side in ("tx", "rx"):
        name = f"{side}_impairment"
        if name in d and f"{name}_bits" in d:
            raise ConfigError(f"{where}.{name}", "given both directly and as bits")
        if name in d:
            kw[name] = d.pop(name)
        elif f"{name}_bits" in d:
            kw[name] = kappa_from_bits(d.pop(f"{name}_bits"))
    atn_keys = [k for k in ("atn_variance", "atn_variance_dbw", "atn_ratio", "atn_amplifier") if k in d]
    if len(atn_keys) > 1:
        raise ConfigError(f"{where}.atn_variance", "given in more than one form")
    if atn_keys:
        key = atn_keys[0]
        if key == "atn_ratio":
            kw["atn_variance"] = d.pop(key) * thermal_noise
        elif key == "atn_amplifier":
            amp = dict(d.pop(key))
            kw["atn_variance"] = atn_from_amplifier(amp.pop("noise_figure_db"), amp.pop("bits"), thermal_noise)
            _no_leftovers(amp, where + ".atn_amplifier")
        else:
            kw["atn_variance"] = _pick(d, "atn_variance", where)
    _no_leftovers(d, where)
    try:
        return TierParams(**kw)
    except ConfigError as exc:
        raise ConfigError(f"{where}.{exc.field}", exc.constraint) from None
    except TypeError as exc:
        raise ConfigError(where, str(exc)) from None


def config_from_dict(raw: Mapping[str, Any]) -> NetworkConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("<root>", "must be a JSON object")
    d = dict(raw)
    d.pop("schema", None)
    carrier = d.pop("carrier_freq", 50e9)
    noise = _pick(d, "thermal_noise", "<root>", None)
    if noise is None:
        noise = default_thermal_noise()
    tiers_raw = d.pop("tiers", None)
    if not isinstance(tiers_raw, list) or not tiers_raw:
        raise ConfigError("tiers", "a non-empty list is required")
    tiers = tuple(_tier_from_dict(t, f"tiers[{i}]", noise, carrier) for i, t in enumerate(tiers_raw))
    kw: dict[str, Any] = {"tiers": tiers, "thermal_noise": noise, "carrier_freq": carrier}
    if "rx_beam" in d:
        kw["rx_beam"] = _beam_from_dict(d.pop("rx_beam"), "rx_beam")
    for name in ("sim_window", "estimated_channel_variance", "fading_scale", "rng_seed"):
        if name in d:
            kw[name] = d.pop(name)
    _no_leftovers(d, "<root>")
    return NetworkConfig(**kw)


def load_config(text: str) -> NetworkConfig:
    """Parse a JSON scenario document into a validated :class:`NetworkConfig`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"JSON parse failure: {exc}") from None
    return config_from_dict(raw)


def config_to_dict(cfg: NetworkConfig) -> dict[str, Any]:
    """Canonical, linear-unit dictionary form (inverse of :func:`config_from_dict`)."""
    tiers = []
    for t in cfg.tiers:
        d = {f.name: getattr(t, f.name) for f in fields(t)}
        d["tx_beam"] = asdict(t.tx_beam)
        if t.aging_delta is not None:
            d["aging"] = {"delta": t.aging_delta}
        else:
            d["aging"] = {"doppler_hz": t.doppler_hz, "sample_period_s": t.sample_period_s}
        for k in ("aging_delta", "doppler_hz", "sample_period_s"):
            del d[k]
        tiers.append(d)
    return {
        "schema": "mmhetnet-scenario/1",
        "tiers": tiers,
        "thermal_noise": cfg.thermal_noise,
        "rx_beam": asdict(cfg.rx_beam),
        "carrier_freq": cfg.carrier_freq,
        "sim_window": cfg.sim_window,
        "estimated_channel_variance": cfg.estimated_channel_variance,
        "fading_scale": cfg.fading_scale,
        "rng_seed": cfg.rng_seed,
    }


def dump_config(cfg: NetworkConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
