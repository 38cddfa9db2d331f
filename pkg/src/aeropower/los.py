"""Altitude-dependent line-of-sight probability and its break-point fit.

The exact model counts the buildings a ground-to-receiver ray crosses and
multiplies the per-building clearance probabilities.  An environment is the
triple (delta, beta, gamma_param): built-up land ratio, buildings per square
kilometer, and the Rayleigh scale of building heights in meters.  The ray
from a transmitter at ground distance r crosses about r * sqrt(delta * beta)
buildings (r in kilometers); the crossed count is the nearest integer.  The
n-th crossing, ordered from the receiver side, happens where the ray sits at
height H - (n + 1/2) H / count, and the link survives the crossing when the
building is lower than that.

The exact probability is a step function of distance.  The break-point
approximation replaces it with a value-1 plateau up to a break distance
followed by exponential decay, and the fitted plateau/decay parameters scale
with receiver height as k = mu / H and r_bp = kappa * H.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "EnvironmentTriple",
    "BreakpointParams",
    "BreakpointLaws",
    "FitResult",
    "LawsFit",
    "FitError",
    "URBAN",
    "DEFAULT_R_GRID",
    "DEFAULT_H_GRID",
    "plos_exact",
    "plos_exact_3d",
    "plos_approx",
    "fit_breakpoint",
    "fit_breakpoint_samples",
    "fit_laws",
    "save_laws",
    "load_laws",
]

K_LOWER_BOUND = 1e-9
PLATEAU_THRESHOLD = 0.99


class FitError(RuntimeError):
    """Raised when the break-point optimizer fails to converge."""


@dataclass(frozen=True)
class EnvironmentTriple:
    """Built-up ratio, buildings per km^2, building-height Rayleigh scale (m)."""

    delta: float
    beta: float
    gamma_param: float

    def __post_init__(self):
        if not (self.delta > 0 and self.beta > 0 and self.gamma_param > 0):
            raise ValueError("environment parameters must all be positive")

    @property
    def crossings_per_km(self):
        return math.sqrt(self.delta * self.beta)


URBAN = EnvironmentTriple(delta=0.3, beta=500.0, gamma_param=15.0)


@dataclass(frozen=True)
class BreakpointParams:
    """Single-height approximation: decay rate k (1/m), break distance r_bp (m)."""

    k: float
    r_bp: float

    def __post_init__(self):
        if not (self.k > 0 and self.r_bp > 0):
            raise ValueError("break-point parameters must be positive")


@dataclass(frozen=True)
class BreakpointLaws:
    """Height scaling of the break-point parameters: k = mu/H, r_bp = kappa*H."""

    mu: float
    kappa: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.kappa >= 1.0:
            raise ValueError("kappa must be >= 1; the break distance is a 3-D "
                             "distance and cannot undercut the height")

    def at_height(self, height_h):
        return BreakpointParams(k=self.mu / height_h, r_bp=self.kappa * height_h)


@dataclass(frozen=True)
class FitResult:
    params: BreakpointParams
    rmse: float


@dataclass(frozen=True)
class LawsFit:
    laws: BreakpointLaws
    per_height: tuple  # rows of (height, k, r_bp, rmse)
    mu_std: float
    kappa_std: float


def _crossed_count(ground_dist_r, env):
    # nearest integer to r_km * sqrt(delta*beta); ties round up
    x = np.asarray(ground_dist_r, dtype=float) / 1000.0 * env.crossings_per_km
    return np.floor(x + 0.5).astype(np.int64)


def _survival_for_count(height_h, count, env):
    # product over crossings of P(building below ray height at the crossing)
    n = np.arange(count)
    clearance = height_h - (n + 0.5) * height_h / count
    factors = -np.expm1(-(clearance * clearance) / (2.0 * env.gamma_param ** 2))
    return float(np.prod(factors))


def band_probabilities(height_h, max_count, env):
    """Survival probability for each crossed-building count 1..max_count."""
    return np.array([_survival_for_count(height_h, c, env)
                     for c in range(1, max_count + 1)])


def _negligible_count(height_h, env, start=2, log10_floor=-340.0):
    """Smallest-found crossing count whose survival drops below 10^floor.

    Works in log space over fixed-size chunks, scanning the tightest
    clearances first, so the memory footprint stays bounded however large
    the count gets.  Used to bound the support of the exact probability.
    """
    two_g2 = 2.0 * env.gamma_param ** 2
    chunk = 1 << 20

    def log10_survival(count):
        total = 0.0
        pos = count
        while pos > 0:
            lo = max(0, pos - chunk)
            n = np.arange(lo, pos)
            clearance = height_h - (n + 0.5) * height_h / count
            total += float(np.log10(-np.expm1(
                -(clearance * clearance) / two_g2)).sum())
            if total < log10_floor:
                return total
            pos = lo
        return total

    count = max(2, int(start))
    while log10_survival(count) > log10_floor:
        count *= 2
        if count > 2 ** 53:
            raise RuntimeError("survival never became negligible")
    return count


def band_edges_ground(env, r_max):
    """Ground distances where the crossed-building count increments, up to r_max.

    The exact probability is constant between consecutive edges, which makes
    these the natural quadrature break points and stratification boundaries.
    """
    band_width = 1000.0 / env.crossings_per_km
    edges = np.arange(0.5 * band_width, r_max, band_width)
    return edges


def plos_exact(height_h, ground_dist_r, env):
    """Exact LoS probability at receiver height H and ground distance r.

    Accepts a scalar or array r; H is scalar.  A distance short enough to
    cross no buildings gives probability 1 (receiver effectively overhead).
    """
    if not (math.isfinite(height_h) and height_h > 0):
        raise ValueError(f"height must be positive, got {height_h!r}")
    r = np.asarray(ground_dist_r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError("ground distance must be finite and non-negative")
    counts = _crossed_count(r, env)
    if counts.ndim == 0:
        c = int(counts)
        return 1.0 if c < 1 else _survival_for_count(height_h, c, env)
    out = np.ones(r.shape)
    top = int(counts.max(initial=0))
    if top >= 1:
        table = band_probabilities(height_h, top, env)
        crossed = counts >= 1
        out[crossed] = table[counts[crossed] - 1]
    return out


def plos_exact_3d(height_h, dist_3d_r, env):
    """Exact LoS probability as a function of the 3-D distance R >= H."""
    R = np.asarray(dist_3d_r, dtype=float)
    if np.any(R < height_h):
        raise ValueError("3-D distance cannot be smaller than the height")
    ground = np.sqrt(np.maximum(R * R - height_h * height_h, 0.0))
    return plos_exact(height_h, ground if ground.ndim else float(ground), env)


def _breakpoint_model(R, k, r_bp):
    R = np.asarray(R, dtype=float)
    return np.where(R < r_bp, 1.0, np.exp(-k * (np.maximum(R, r_bp) - r_bp)))


def plos_approx(dist_3d_r, height_h, laws):
    """Break-point approximation: 1 on the plateau, exponential decay beyond."""
    if not height_h > 0:
        raise ValueError("height must be positive")
    R = np.asarray(dist_3d_r, dtype=float)
    if np.any(R < height_h):
        raise ValueError("3-D distance cannot be smaller than the height")
    p = laws.at_height(height_h)
    out = _breakpoint_model(R, p.k, p.r_bp)
    return float(out) if out.ndim == 0 else out


DEFAULT_R_GRID = np.arange(0.0, 3000.0 + 1e-9, 10.0)
DEFAULT_H_GRID = np.arange(50.0, 500.0 + 1e-9, 50.0)


def fit_breakpoint_samples(dist_3d, probabilities, k0=None, r_bp0=None):
    """Least-squares break-point fit to (R, probability) samples.

    Loss is computed in the probability domain with uniform weights.  The
    plateau initializer is the largest sample still at probability >= 0.99;
    the decay initializer comes from a log-linear regression of the tail.
    A grid that never leaves the plateau pins the break point at the last
    sample and the decay rate at its lower bound.
    """
    R = np.asarray(dist_3d, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    if R.ndim != 1 or R.size < 2 or np.any(np.diff(R) <= 0):
        raise ValueError("need a strictly increasing 1-D distance grid")
    if R.shape != p.shape:
        raise ValueError("distance and probability grids must match")

    if np.all(p >= PLATEAU_THRESHOLD):
        params = BreakpointParams(k=K_LOWER_BOUND, r_bp=float(R[-1]))
        rmse = float(np.sqrt(np.mean((_breakpoint_model(R, params.k, params.r_bp) - p) ** 2)))
        return FitResult(params=params, rmse=rmse)

    if r_bp0 is None:
        plateau = np.nonzero(p >= PLATEAU_THRESHOLD)[0]
        r_bp0 = float(R[plateau[-1]]) if plateau.size else float(R[0])
    if k0 is None:
        tail = (R > r_bp0) & (p > 1e-12)
        if np.count_nonzero(tail) >= 2:
            slope = np.polyfit(R[tail] - r_bp0, np.log(p[tail]), 1)[0]
            k0 = max(-slope, 1e-6)
        else:
            k0 = 1.0 / max(r_bp0, 1.0)

    def residuals(theta):
        return _breakpoint_model(R, theta[0], theta[1]) - p

    x0 = np.array([np.clip(k0, K_LOWER_BOUND, 10.0), np.clip(r_bp0, R[0], R[-1])])
    result = least_squares(residuals, x0=x0,
                           bounds=([K_LOWER_BOUND, float(R[0])], [10.0, float(R[-1])]),
                           xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not result.success:
        raise FitError(f"break-point fit did not converge: {result.message}")
    params = BreakpointParams(k=float(result.x[0]), r_bp=float(result.x[1]))
    rmse = float(np.sqrt(np.mean(result.fun ** 2)))
    return FitResult(params=params, rmse=rmse)


def fit_breakpoint(height_h, env, r_grid=None):
    """Fit the break-point model to the exact probability at one height."""
    if not height_h > 0:
        raise ValueError("height must be positive")
    r = DEFAULT_R_GRID if r_grid is None else np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(np.diff(r) <= 0):
        raise ValueError("r_grid must be non-empty and strictly increasing")
    R = np.sqrt(r * r + height_h * height_h)
    p = plos_exact(height_h, r, env)
    return fit_breakpoint_samples(R, p)


def fit_laws(env, h_grid=None, r_grid=None, plos_fn=None):
    """Fit per-height break points and regress their height scaling.

    Per height the break-point fit runs on the default ground-distance grid
    (or ``r_grid``); the laws are the means of k*H and r_bp/H across heights,
    reported together with their dispersions.  ``plos_fn(height, r_array)``
    replaces the exact model when supplied, which supports synthetic
    round-trip checks.
    """
    heights = DEFAULT_H_GRID if h_grid is None else np.asarray(h_grid, dtype=float)
    if heights.ndim != 1 or heights.size == 0 or np.any(heights <= 0):
        raise ValueError("h_grid must be non-empty and positive")
    r = DEFAULT_R_GRID if r_grid is None else np.asarray(r_grid, dtype=float)

    rows = []
    for H in heights:
        R = np.sqrt(r * r + H * H)
        p = plos_exact(H, r, env) if plos_fn is None else np.asarray(plos_fn(H, r), dtype=float)
        try:
            fit = fit_breakpoint_samples(R, p)
        except (FitError, ValueError) as exc:
            raise FitError(f"fit failed at height {H:g} m: {exc}") from exc
        rows.append((float(H), fit.params.k, fit.params.r_bp, fit.rmse))

    arr = np.array([(h, k, rbp) for h, k, rbp, _ in rows])
    mu_samples = arr[:, 1] * arr[:, 0]
    kappa_samples = arr[:, 2] / arr[:, 0]
    laws = BreakpointLaws(mu=float(np.mean(mu_samples)), kappa=float(np.mean(kappa_samples)))
    return LawsFit(laws=laws, per_height=tuple(rows),
                   mu_std=float(np.std(mu_samples)), kappa_std=float(np.std(kappa_samples)))


LAWS_FILE_VERSION = 1


def save_laws(path, laws, env, rmse=None):
    """Write fitted laws as a small key-value text file."""
    lines = [
        f"version = {LAWS_FILE_VERSION}",
        f"mu = {laws.mu!r}",
        f"kappa = {laws.kappa!r}",
        f"delta = {env.delta!r}",
        f"beta = {env.beta!r}",
        f"gamma_param = {env.gamma_param!r}",
    ]
    if rmse is not None:
        lines.append(f"rmse = {rmse!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_laws(path):
    """Read a laws file; returns (BreakpointLaws, EnvironmentTriple, rmse or None)."""
    fields = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed laws line: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            fields[key] = value
    if int(fields.get("version", -1)) != LAWS_FILE_VERSION:
        raise ValueError(f"unsupported laws file version: {fields.get('version')!r}")
    laws = BreakpointLaws(mu=float(fields["mu"]), kappa=float(fields["kappa"]))
    env = EnvironmentTriple(delta=float(fields["delta"]), beta=float(fields["beta"]),
                            gamma_param=float(fields["gamma_param"]))
    rmse = float(fields["rmse"]) if "rmse" in fields else None
    return laws, env, rmse
