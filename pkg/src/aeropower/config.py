"""Run configuration: one versioned key=value file drives every command.

Format: ``key = value`` lines, ``#`` comments and blank lines ignored,
``version = 1`` required. Radio inputs use interface units (dBm, dBi);
internally everything is watts and linear gain. Unset optional blocks
(environment, scaling laws, file paths) stay None. Every key has a
default except the optional blocks, so a two-line file is already a
valid simulation setup.

Keys and defaults:

    tx_power_dbm = 20.0        tx_gain_dbi = 10.0      rx_gain_dbi = 10.0
    carrier_hz = 3.5e9         alpha_los = 2.0         alpha_nlos = 3.0
    density = 0.005            guard_radius = 10.0     outer_radius = 4000.0
    heights = 20:500:20        seed = 0                trials = 10000
    delta / beta / gamma_param           environment triple (all three or none)
    mu / kappa                           fitted scaling laws (both or neither)
    ue_height_m = 0.0          mc_fading = true        raytrace_fading = false
    bin_width_m = 10.0         max_skew_s = 15.0       site_elevation_m = 0.0
    map_file / sweep_file / gps_file / tower_file / bands_file / compare_files

``heights`` accepts either a comma list (``20,40,60``) or an inclusive
``start:stop:step`` range. Relative paths resolve against the config
file's directory.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from .analytics import PathlossExponents, RadioConfig, ScenarioGeometry
from .los import BreakpointLaws, EnvironmentTriple
from .units import watts_from_dbm

CONFIG_VERSION = 1

_MAX_SEED = 2 ** 63


class ConfigError(ValueError):
    """A configuration file is missing, malformed, or inconsistent."""


_DEFAULT_HEIGHTS = tuple(float(h) for h in range(20, 501, 20))

_FLOAT_KEYS = ("tx_power_dbm", "tx_gain_dbi", "rx_gain_dbi", "carrier_hz",
               "alpha_los", "alpha_nlos", "delta", "beta", "gamma_param",
               "mu", "kappa", "density", "guard_radius", "outer_radius",
               "ue_height_m", "bin_width_m", "max_skew_s", "site_elevation_m")
_INT_KEYS = ("seed", "trials")
_BOOL_KEYS = ("mc_fading", "raytrace_fading")
_PATH_KEYS = ("map_file", "sweep_file", "gps_file", "tower_file", "bands_file")
_LIST_KEYS = ("heights", "compare_files")
_ALL_KEYS = (("version",) + _FLOAT_KEYS + _INT_KEYS + _BOOL_KEYS + _PATH_KEYS
             + _LIST_KEYS)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: radio, model parameters, grids, paths.

    The single-height scenario geometry is produced per height with
    scenario_at(); the config itself carries the height-independent parts
    plus the height grid.
    """

    radio: RadioConfig = RadioConfig(tx_power=watts_from_dbm(20.0),
                                     tx_gain=10.0, rx_gain=10.0,
                                     carrier_freq=3.5e9)
    exponents: PathlossExponents = PathlossExponents()
    env: EnvironmentTriple = None
    laws: BreakpointLaws = None
    heights: tuple = _DEFAULT_HEIGHTS
    density: float = 0.005
    guard_radius: float = 10.0
    outer_radius: float = 4000.0
    seed: int = 0
    trials: int = 10_000
    ue_height: float = 0.0
    mc_fading: bool = True
    raytrace_fading: bool = False
    bin_width: float = 10.0
    max_skew: float = 15.0
    site_elevation: float = 0.0
    map_file: str = None
    sweep_file: str = None
    gps_file: str = None
    tower_file: str = None
    bands_file: str = None
    compare_files: tuple = ()

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.size == 0 or np.any(np.diff(h) <= 0):
            raise ConfigError("heights must be non-empty and strictly increasing")
        if np.any(h <= 0):
            raise ConfigError("heights must be positive")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < _MAX_SEED:
            raise ConfigError("seed must be an integer in [0, 2^63)")
        if not self.bin_width > 0:
            raise ConfigError("bin_width_m must be positive")
        if self.max_skew < 0:
            raise ConfigError("max_skew_s must be non-negative")
        if self.ue_height < 0:
            raise ConfigError("ue_height_m must be non-negative")
        # geometry sanity via a throwaway instance at the first height
        try:
            self.scenario_at(float(h[0]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in _PATH_KEYS:
            path = getattr(self, name)
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"{name} does not exist: {path}")
        for path in self.compare_files:
            if not os.path.isfile(path):
                raise ConfigError(f"compare file does not exist: {path}")

    def scenario_at(self, height):
        return ScenarioGeometry(height_h=float(height),
                                guard_radius=self.guard_radius,
                                outer_radius=self.outer_radius,
                                density=self.density)


def _parse_heights(text):
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"heights range must be start:stop:step, "
                              f"got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0:
            raise ConfigError("heights range step must be positive")
        return tuple(float(v) for v in np.arange(start, stop + 0.5 * step, step))
    return tuple(float(v) for v in text.split(","))


def _parse_bool(key, text):
    low = text.strip().lower()
    if low in ("true", "on", "yes", "1"):
        return True
    if low in ("false", "off", "no", "0"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {text!r}")


def load_config(path):
    """Parse a config file into a RunConfig."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file does not exist: {path}")
    base = os.path.dirname(os.path.abspath(path))
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}: line {lineno}: expected "
                                  f"'key = value', got {text!r}")
            key, _, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _ALL_KEYS:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
            raw[key] = (lineno, value)

    def take(key):
        return raw.pop(key, (None, None))[1]

    version = take("version")
    if version is None:
        raise ConfigError(f"{path}: missing 'version' key")
    if version.strip() != str(CONFIG_VERSION):
        raise ConfigError(f"{path}: unsupported config version {version} "
                          f"(supported: {CONFIG_VERSION})")

    def number(key, default, kind=float):
        value = take(key)
        if value is None:
            return default
        try:
            if kind is int:
                return int(value)
            return float(value)
        except ValueError:
            raise ConfigError(f"{path}: {key} must be a number, "
                              f"got {value!r}") from None

    tx_power_dbm = number("tx_power_dbm", 20.0)
    tx_gain_dbi = number("tx_gain_dbi", 10.0)
    rx_gain_dbi = number("rx_gain_dbi", 10.0)
    carrier = number("carrier_hz", 3.5e9)
    try:
        radio = RadioConfig(tx_power=watts_from_dbm(tx_power_dbm),
                            tx_gain=10.0 ** (tx_gain_dbi / 10.0),
                            rx_gain=10.0 ** (rx_gain_dbi / 10.0),
                            carrier_freq=carrier)
        exponents = PathlossExponents(alpha_los=number("alpha_los", 2.0),
                                      alpha_nlos=number("alpha_nlos", 3.0))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    env_vals = {k: number(k, None) for k in ("delta", "beta", "gamma_param")}
    given = [k for k, v in env_vals.items() if v is not None]
    if given and len(given) != 3:
        raise ConfigError(f"{path}: environment needs delta, beta and "
                          f"gamma_param together (got only {', '.join(given)})")
    try:
        env = EnvironmentTriple(**env_vals) if len(given) == 3 else None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    mu, kappa = number("mu", None), number("kappa", None)
    if (mu is None) != (kappa is None):
        raise ConfigError(f"{path}: scaling laws need both mu and kappa")
    try:
        laws = BreakpointLaws(mu=mu, kappa=kappa) if mu is not None else None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    heights_text = take("heights")
    try:
        heights = (_DEFAULT_HEIGHTS if heights_text is None
                   else _parse_heights(heights_text))
    except ValueError as exc:
        raise ConfigError(f"{path}: heights: {exc}") from None

    def resolve(key):
        value = take(key)
        if value is None:
            return None
        return os.path.normpath(os.path.join(base, value))

    compare_text = take("compare_files")
    compare_files = tuple(
        os.path.normpath(os.path.join(base, p.strip()))
        for p in compare_text.split(",")) if compare_text else ()

    bool_vals = {}
    for key, default in (("mc_fading", True), ("raytrace_fading", False)):
        value = take(key)
        bool_vals[key] = default if value is None else _parse_bool(key, value)

    try:
        return RunConfig(radio=radio, exponents=exponents, env=env, laws=laws,
                         heights=heights,
                         density=number("density", 0.005),
                         guard_radius=number("guard_radius", 10.0),
                         outer_radius=number("outer_radius", 4000.0),
                         seed=number("seed", 0, int),
                         trials=number("trials", 10_000, int),
                         ue_height=number("ue_height_m", 0.0),
                         mc_fading=bool_vals["mc_fading"],
                         raytrace_fading=bool_vals["raytrace_fading"],
                         bin_width=number("bin_width_m", 10.0),
                         max_skew=number("max_skew_s", 15.0),
                         site_elevation=number("site_elevation_m", 0.0),
                         map_file=resolve("map_file"),
                         sweep_file=resolve("sweep_file"),
                         gps_file=resolve("gps_file"),
                         tower_file=resolve("tower_file"),
                         bands_file=resolve("bands_file"),
                         compare_files=compare_files)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _log_key(linear, offset=0.0):
    """Decibel value whose reparse reproduces ``linear`` bit-exactly.

    The naive log10 can land one ulp off the value that parsing produced;
    scanning its ulp neighborhood recovers the exact preimage whenever one
    exists (always, for configs that came from a file).
    """
    db = 10.0 * math.log10(linear) + offset
    lo = hi = db
    for _ in range(4):
        for cand in (db, lo, hi):
            if 10.0 ** ((cand - offset) / 10.0) == linear:
                return cand
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
    return db


def save_config(path, config):
    """Serialize a RunConfig so that load_config(save_config(c)) == c."""
    r = config.radio
    lines = [
        f"version = {CONFIG_VERSION}",
        f"tx_power_dbm = {_log_key(r.tx_power, offset=30.0)!r}",
        f"tx_gain_dbi = {_log_key(r.tx_gain)!r}",
        f"rx_gain_dbi = {_log_key(r.rx_gain)!r}",
        f"carrier_hz = {r.carrier_freq!r}",
        f"alpha_los = {config.exponents.alpha_los!r}",
        f"alpha_nlos = {config.exponents.alpha_nlos!r}",
    ]
    if config.env is not None:
        lines += [f"delta = {config.env.delta!r}",
                  f"beta = {config.env.beta!r}",
                  f"gamma_param = {config.env.gamma_param!r}"]
    if config.laws is not None:
        lines += [f"mu = {config.laws.mu!r}", f"kappa = {config.laws.kappa!r}"]
    lines += [
        "heights = " + ",".join(repr(h) for h in config.heights),
        f"density = {config.density!r}",
        f"guard_radius = {config.guard_radius!r}",
        f"outer_radius = {config.outer_radius!r}",
        f"seed = {config.seed}",
        f"trials = {config.trials}",
        f"ue_height_m = {config.ue_height!r}",
        f"mc_fading = {'true' if config.mc_fading else 'false'}",
        f"raytrace_fading = {'true' if config.raytrace_fading else 'false'}",
        f"bin_width_m = {config.bin_width!r}",
        f"max_skew_s = {config.max_skew!r}",
        f"site_elevation_m = {config.site_elevation!r}",
    ]
    for key in _PATH_KEYS:
        value = getattr(config, key)
        if value is not None:
            lines.append(f"{key} = {value}")
    if config.compare_files:
        lines.append("compare_files = " + ",".join(config.compare_files))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
