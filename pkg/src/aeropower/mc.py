"""Seeded Monte Carlo oracle for the aggregate ground-to-air received power.

Transmitters form a homogeneous Poisson process on a ground annulus between
a guard radius and a finite outer radius.  Each link is LoS or NLoS through
an independent Bernoulli draw from the exact building-crossing probability,
carries unit-mean exponential fading, and contributes

    P_tx G_t G_r (c / (4 pi f R))^2 * h * R^(2 - alpha)

with the exponent selected by link state.  The exact LoS probability is a
step function of ground distance, so placement is stratified by probability
band: per trial the band population is Poisson, the LoS subcount binomial,
and radii are uniform-in-area within the band.  That is distribution-equal
to sampling every transmitter individually and keeps the per-link work in a
compiled kernel (the azimuth never enters the power sum and is only drawn
by the reference sampler).

Reproducibility: every random quantity derives from (seed, height index,
trial index) through counter-based generators, so trials are independent
work units that may run in any order and merge by summation.  Stream
layout, all under one user seed:

  - per-trial band counts: Philox key ``[seed, height_index << 32 | trial]``
  - fixed-transmitter draws: Philox key ``[seed, 2**48 + height_index]``
  - reference ring sampler: Philox key ``[seed, 2**49 + field_index]``
  - fading and in-band radii: splitmix64 counter stream seeded from
    ``mix(seed ^ mix(height_index * GOLDEN + trial))``
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .analytics import LIGHT_SPEED, PathlossExponents, friis_constant
from .curves import AltitudePowerCurve
from .los import band_edges_ground, plos_exact

__all__ = [
    "UePlacement",
    "TrialResult",
    "SimulationResult",
    "FixedTransmitterSet",
    "RingSample",
    "sample_ring",
    "simulate_power",
    "simulate_power_curve",
    "simulate_hybrid",
    "read_fixed_set",
    "truncation_bound",
]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64_INV = 1.0 / 18446744073709551616.0
_M53 = 9007199254740992.0
_ZIG_R = 7.69711747013104972  # start of the exponential ziggurat tail

# Philox key-word-2 namespaces; count streams occupy [0, 2**48).
_FIXED_SALT = 1 << 48
_RING_SALT = 1 << 49


def _build_exp_ziggurat():
    """256-layer ziggurat tables for Exp(1) (Marsaglia-Tsang, 2^53 variant)."""
    ke = np.empty(256, dtype=np.uint64)
    we = np.empty(256)
    fe = np.empty(256)
    de = _ZIG_R
    te = _ZIG_R
    ve = 3.949659822581572e-3
    q = ve / math.exp(-de)
    ke[0] = np.uint64((de / q) * _M53)
    ke[1] = np.uint64(0)
    we[0] = q / _M53
    we[255] = de / _M53
    fe[0] = 1.0
    fe[255] = math.exp(-de)
    for i in range(254, 0, -1):
        de = -math.log(ve / de + math.exp(-de))
        ke[i + 1] = np.uint64((de / te) * _M53)
        te = de
        fe[i] = math.exp(-de)
        we[i] = de / _M53
    return ke, we, fe


_KE, _WE, _FE = _build_exp_ziggurat()


@njit(cache=True, fastmath=True)
def _mix(z):
    # splitmix64 finalizer
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, fastmath=True)
def _exp_draw(s0, ctr, ke, we, fe):
    """One Exp(1) variate from the counter stream; returns (value, counter)."""
    while True:
        ctr += np.uint64(1)
        u = _mix(s0 + ctr * GOLDEN)
        iz = np.int64(u & np.uint64(255))
        jz = u >> np.uint64(11)
        if jz < ke[iz]:
            return np.float64(jz) * we[iz], ctr
        if iz == 0:
            ctr += np.uint64(1)
            u2 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
            return _ZIG_R - np.log(u2), ctr
        x = np.float64(jz) * we[iz]
        ctr += np.uint64(1)
        u2 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
        if fe[iz] + u2 * (fe[iz - 1] - fe[iz]) < np.exp(-x):
            return x, ctr


@njit(cache=True, fastmath=True)
def _kernel_fast(seed, hidx, n_los, n_nlos, edges_sq, h_sq, out, ke, we, fe):
    """Per-trial power sums for exponents (2, 3) with fading, sans constant."""
    trials = n_los.shape[0]
    nb = n_los.shape[1]
    for t in range(trials):
        s0 = _mix(np.uint64(seed) ^ _mix(np.uint64(hidx) * GOLDEN + np.uint64(t)))
        ctr = np.uint64(0)
        acc = 0.0
        for b in range(nb):
            a = edges_sq[b]
            w = edges_sq[b + 1] - a
            for _ in range(n_los[t, b]):
                ctr += np.uint64(1)
                u1 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
                h, ctr = _exp_draw(s0, ctr, ke, we, fe)
                tt = 1.0 / (a + u1 * w + h_sq)
                acc += h * tt
            for _ in range(n_nlos[t, b]):
                ctr += np.uint64(1)
                u1 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
                h, ctr = _exp_draw(s0, ctr, ke, we, fe)
                tt = 1.0 / (a + u1 * w + h_sq)
                acc += h * tt * np.sqrt(tt)
        out[t] = acc


@njit(cache=True, fastmath=True)
def _kernel_general(seed, hidx, n_los, n_nlos, edges_sq, h_sq, half_los,
                    half_nlos, use_fading, out, ke, we, fe):
    """General-exponent variant; fading optional, same stream layout."""
    trials = n_los.shape[0]
    nb = n_los.shape[1]
    for t in range(trials):
        s0 = _mix(np.uint64(seed) ^ _mix(np.uint64(hidx) * GOLDEN + np.uint64(t)))
        ctr = np.uint64(0)
        acc = 0.0
        for b in range(nb):
            a = edges_sq[b]
            w = edges_sq[b + 1] - a
            for _ in range(n_los[t, b]):
                ctr += np.uint64(1)
                u1 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
                h = 1.0
                if use_fading:
                    h, ctr = _exp_draw(s0, ctr, ke, we, fe)
                tt = 1.0 / (a + u1 * w + h_sq)
                acc += h * tt ** half_los
            for _ in range(n_nlos[t, b]):
                ctr += np.uint64(1)
                u1 = (np.float64(_mix(s0 + ctr * GOLDEN)) + 0.5) * _U64_INV
                h = 1.0
                if use_fading:
                    h, ctr = _exp_draw(s0, ctr, ke, we, fe)
                tt = 1.0 / (a + u1 * w + h_sq)
                acc += h * tt ** half_nlos
        out[t] = acc


@dataclass(frozen=True)
class UePlacement:
    """One ground transmitter relative to the receiver's nadir."""

    ground_dist: float
    azimuth: float
    dist_3d: float
    los: bool
    fading: float

    def __post_init__(self):
        if self.ground_dist < 0 or self.fading < 0:
            raise ValueError("distance and fading must be non-negative")


@dataclass(frozen=True)
class TrialResult:
    trial_power: float
    ue_count: int
    los_count: int

    def __post_init__(self):
        if self.los_count > self.ue_count:
            raise ValueError("LoS count cannot exceed the transmitter count")
        if self.trial_power < 0:
            raise ValueError("power cannot be negative")


@dataclass(frozen=True)
class SimulationResult:
    """Mean received power with a 95% normal-approximation half-width.

    ``truncation_bound_w`` bounds the expected power the finite outer radius
    leaves out; it applies to the mean, not to individual trials.
    """

    mean_w: float
    half_width_w: float
    trials: int
    truncation_bound_w: float
    trial_results: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class FixedTransmitterSet:
    """Deterministic transmitters plus an optional extra random density.

    ``transmitters`` holds (ground_distance_m, label) pairs.  The extra
    density models additional unplanned nodes; its default of 1e-6 nodes/m^2
    is a package convention, not a measured value, and should be overridden
    when a survey density is known.
    """

    transmitters: tuple
    extra_density: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "transmitters",
                           tuple((float(d), str(lab)) for d, lab in self.transmitters))
        if any(d <= 0 for d, _ in self.transmitters):
            raise ValueError("fixed transmitter distances must be positive")
        if self.extra_density < 0:
            raise ValueError("extra density cannot be negative")

    @property
    def distances(self):
        return np.array([d for d, _ in self.transmitters], dtype=float)


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2 ** 63:
        raise ValueError("seed must lie in [0, 2**63)")
    return seed


def _ring_generator(seed, field_index):
    return np.random.Generator(np.random.Philox(key=[seed, _RING_SALT + field_index]))


class RingSample:
    """Sequence of transmitters from one Poisson draw over the ring.

    The population count is drawn eagerly; positions, link states and fading
    materialize lazily from per-field substreams, so counting-only uses stay
    cheap.  Access order does not affect the values.
    """

    def __init__(self, density, guard_radius, outer_radius, seed, height_h=None,
                 env=None, fading=True):
        if not outer_radius > guard_radius >= 0:
            raise ValueError("need outer_radius > guard_radius >= 0")
        if density < 0:
            raise ValueError("density cannot be negative")
        if (height_h is None) != (env is None):
            raise ValueError("height_h and env must be given together")
        self.density = float(density)
        self.guard_radius = float(guard_radius)
        self.outer_radius = float(outer_radius)
        self.seed = _check_seed(seed)
        self.height_h = None if height_h is None else float(height_h)
        self.env = env
        self._with_fading = bool(fading)
        mean = density * math.pi * (outer_radius ** 2 - guard_radius ** 2)
        self._count = int(_ring_generator(self.seed, 0).poisson(mean))
        self._cache = {}

    def __len__(self):
        return self._count

    def _field(self, name):
        if name in self._cache:
            return self._cache[name]
        n = self._count
        if name == "ground_dist":
            u = _ring_generator(self.seed, 1).random(n)
            lo_sq = self.guard_radius ** 2
            value = np.sqrt(lo_sq + u * (self.outer_radius ** 2 - lo_sq))
        elif name == "azimuth":
            value = 2.0 * math.pi * _ring_generator(self.seed, 2).random(n)
        elif name == "los":
            if self.height_h is None:
                value = np.ones(n, dtype=bool)
            else:
                p = plos_exact(self.height_h, self._field("ground_dist"), self.env)
                value = _ring_generator(self.seed, 3).random(n) < p
        elif name == "fading":
            if self.height_h is None or not self._with_fading:
                value = np.ones(n)
            else:
                value = _ring_generator(self.seed, 4).standard_exponential(n)
        else:
            raise KeyError(name)
        self._cache[name] = value
        return value

    @property
    def ground_dist(self):
        return self._field("ground_dist")

    @property
    def azimuth(self):
        return self._field("azimuth")

    @property
    def los(self):
        return self._field("los")

    @property
    def fading(self):
        return self._field("fading")

    @property
    def dist_3d(self):
        h = 0.0 if self.height_h is None else self.height_h
        return np.hypot(self.ground_dist, h)

    def __getitem__(self, index):
        if not isinstance(index, (int, np.integer)):
            raise TypeError("ring samples support integer indexing only")
        n = self._count
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError("transmitter index out of range")
        return UePlacement(
            ground_dist=float(self.ground_dist[index]),
            azimuth=float(self.azimuth[index]),
            dist_3d=float(self.dist_3d[index]),
            los=bool(self.los[index]),
            fading=float(self.fading[index]),
        )

    def __iter__(self):
        for i in range(self._count):
            yield self[i]


def sample_ring(density, guard_radius, outer_radius, seed, *, height_h=None,
                env=None, fading=True):
    """Reference transmitter placement: one Poisson draw over the ring.

    The count follows Poisson(density * ring area), radii follow the
    uniform-in-area inverse CDF sqrt(r0^2 + u (r_out^2 - r0^2)), azimuths are
    uniform.  With ``height_h`` and ``env`` supplied the links also carry
    Bernoulli LoS states and Exp(1) fading; without them the geometry-only
    defaults are LoS with unit fading at height zero.  Deterministic in
    ``seed``.
    """
    return RingSample(density, guard_radius, outer_radius, seed,
                      height_h=height_h, env=env, fading=fading)


def _link_constant(radio):
    """Per-link constant P G_t G_r (c / (4 pi f))^2; multiply by R^-alpha."""
    return (radio.tx_power * radio.tx_gain * radio.rx_gain
            * (LIGHT_SPEED / (4.0 * math.pi * radio.carrier_freq)) ** 2)


def _band_partition(env, guard_radius, outer_radius):
    """Ground-distance cells on which the exact LoS probability is constant."""
    interior = band_edges_ground(env, outer_radius)
    interior = interior[interior > guard_radius]
    return np.concatenate(([guard_radius], interior, [outer_radius]))


def _band_probabilities(height_h, edges, env, plos_fn):
    mids = 0.5 * (edges[:-1] + edges[1:])
    if plos_fn is None:
        p = plos_exact(height_h, mids, env)
    else:
        p = np.asarray(plos_fn(height_h, mids), dtype=float)
    if p.shape != mids.shape or np.any(p < 0) or np.any(p > 1):
        raise ValueError("LoS probabilities must lie in [0, 1] per band")
    return p


def _draw_band_counts(seed, height_index, trials, lam, p):
    """Per-trial Poisson populations and binomial LoS splits per band."""
    nb = lam.size
    n_los = np.empty((trials, nb), dtype=np.int64)
    n_nlos = np.empty((trials, nb), dtype=np.int64)
    for t in range(trials):
        g = np.random.Generator(np.random.Philox(key=[seed, (height_index << 32) + t]))
        n = g.poisson(lam)
        k = g.binomial(n, p)
        n_los[t] = k
        n_nlos[t] = n - k
    return n_los, n_nlos


def _run_kernel(seed, height_index, n_los, n_nlos, edges, height_h, exponents,
                fading):
    out = np.empty(n_los.shape[0])
    edges_sq = edges ** 2
    h_sq = height_h * height_h
    if fading and exponents.alpha_los == 2.0 and exponents.alpha_nlos == 3.0:
        _kernel_fast(seed, height_index, n_los, n_nlos, edges_sq, h_sq, out,
                     _KE, _WE, _FE)
    else:
        _kernel_general(seed, height_index, n_los, n_nlos, edges_sq, h_sq,
                        0.5 * exponents.alpha_los, 0.5 * exponents.alpha_nlos,
                        fading, out, _KE, _WE, _FE)
    return out


def truncation_bound(scenario, radio, exponents, env, plos_fn=None):
    """Upper bound on the expected power beyond the outer radius, in watts.

    The NLoS term integrates in closed form.  The LoS term uses that the
    crossing probability is non-increasing in ground distance and falls
    below any floating-point resolution at a finite radius; with
    alpha_los = 2 the integral is logarithmic over that finite support.
    Returns inf when the supplied probability never becomes negligible.
    """
    c = friis_constant(radio, scenario.density)
    if c == 0.0:
        return 0.0
    h_sq = scenario.height_h ** 2
    a3 = math.hypot(scenario.outer_radius, scenario.height_h)
    bound = c * a3 ** (2.0 - exponents.alpha_nlos) / (exponents.alpha_nlos - 2.0)

    def p_at(r):
        if plos_fn is None:
            return float(plos_exact(scenario.height_h, r, env))
        return float(plos_fn(scenario.height_h, np.array([r]))[0])

    p_out = p_at(scenario.outer_radius)
    if p_out > 0.0:
        if exponents.alpha_los > 2.0:
            bound += c * p_out * a3 ** (2.0 - exponents.alpha_los) / (exponents.alpha_los - 2.0)
        elif plos_fn is None:
            # ground radius where the exact survival product underflows,
            # located in count space to keep memory bounded
            from .los import _crossed_count, _negligible_count

            start = int(_crossed_count(scenario.outer_radius, env)) + 1
            count = _negligible_count(scenario.height_h, env, start=start)
            band_width = 1000.0 / env.crossings_per_km
            r_zero = max(count * band_width, scenario.outer_radius)
            bound += c * p_out * 0.5 * math.log((r_zero ** 2 + h_sq) / (a3 * a3))
        else:
            r_zero = scenario.outer_radius
            for _ in range(60):
                r_zero *= 2.0
                if p_at(r_zero) <= 1e-340:
                    break
            else:
                return math.inf
            bound += c * p_out * 0.5 * math.log((r_zero ** 2 + h_sq) / (a3 * a3))
    return bound


def simulate_power(scenario, radio, exponents, env, trials=10_000, seed=0, *,
                   plos_fn=None, fading=True, height_index=0,
                   return_trials=False):
    """Monte Carlo estimate of the aggregate received power, in watts.

    Per trial: Poisson placement on the ring, Bernoulli LoS per link from
    the exact crossing probability (or ``plos_fn(height, r)`` when given),
    Exp(1) fading, and the pathloss sum with the exponent picked per link.
    Returns the trial mean and its 95% half-width; fully reproducible from
    (seed, height_index).  ``plos_fn`` is sampled once per constant-
    probability band, which is exact for the built-in step model.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("need at least one trial")
    seed = _check_seed(seed)
    height_index = int(height_index)
    if not 0 <= height_index < 2 ** 31:
        raise ValueError("height index out of range")

    edges = _band_partition(env, scenario.guard_radius, scenario.outer_radius)
    p = _band_probabilities(scenario.height_h, edges, env, plos_fn)
    lam = scenario.density * math.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    n_los, n_nlos = _draw_band_counts(seed, height_index, trials, lam, p)
    sums = _run_kernel(seed, height_index, n_los, n_nlos, edges,
                       scenario.height_h, exponents, fading)
    powers = _link_constant(radio) * sums

    mean = float(powers.mean())
    half_width = 0.0
    if trials > 1:
        half_width = float(1.96 * powers.std(ddof=1) / math.sqrt(trials))
    bound = truncation_bound(scenario, radio, exponents, env, plos_fn=plos_fn)
    per_trial = None
    if return_trials:
        totals = n_los.sum(axis=1) + n_nlos.sum(axis=1)
        per_trial = tuple(
            TrialResult(float(powers[t]), int(totals[t]), int(n_los[t].sum()))
            for t in range(trials)
        )
    return SimulationResult(mean, half_width, trials, bound, per_trial)


def simulate_power_curve(heights, radio, env, *, density=0.005,
                         guard_radius=10.0, outer_radius=4000.0,
                         exponents=PathlossExponents(), trials=10_000, seed=0,
                         label="monte-carlo", plos_fn=None, fading=True):
    """Simulated mean power across heights; one substream family per height."""
    from .analytics import ScenarioGeometry

    heights = np.asarray(heights, dtype=float)
    samples = []
    half_widths = []
    for hidx, h in enumerate(heights):
        scenario = ScenarioGeometry(height_h=float(h), guard_radius=guard_radius,
                                    outer_radius=outer_radius, density=density)
        res = simulate_power(scenario, radio, exponents, env, trials, seed,
                             plos_fn=plos_fn, fading=fading, height_index=hidx)
        samples.append((float(h), res.mean_w))
        half_widths.append(res.half_width_w)
    return AltitudePowerCurve(samples=tuple(samples), label=label,
                              half_widths=tuple(half_widths))


def _fixed_contribution(fixed, height_h, radio, exponents, env, trials, seed,
                        height_index, plos_fn, fading):
    """Per-trial power from the deterministic transmitters, vectorized."""
    d = fixed.distances
    if d.size == 0:
        return np.zeros(trials)
    if plos_fn is None:
        p = np.asarray(plos_exact(height_h, d, env), dtype=float)
    else:
        p = np.asarray(plos_fn(height_h, d), dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("LoS probabilities must lie in [0, 1]")
    g = np.random.Generator(np.random.Philox(key=[seed, _FIXED_SALT + height_index]))
    los = g.random((trials, d.size)) < p
    h = g.standard_exponential((trials, d.size)) if fading else np.ones((trials, d.size))
    tt = 1.0 / (d ** 2 + height_h ** 2)
    w_los = tt ** (0.5 * exponents.alpha_los)
    w_nlos = tt ** (0.5 * exponents.alpha_nlos)
    weights = np.where(los, w_los, w_nlos)
    return _link_constant(radio) * (h * weights).sum(axis=1)


def simulate_hybrid(fixed, scenario, radio, exponents, env, trials=10_000,
                    seed=0, *, heights=None, plos_fn=None, fading=True,
                    label="hybrid-downlink"):
    """Downlink curve from fixed transmitters plus a random extra population.

    The fixed transmitters are present in every trial with per-trial
    Bernoulli LoS states; extras follow a Poisson process of density
    ``fixed.extra_density`` on the scenario ring.  Returns the mean curve
    over ``heights`` (default 10..500 m step 10) with 95% half-widths.
    """
    if len(fixed.transmitters) == 0 and fixed.extra_density == 0.0:
        raise ValueError("need fixed transmitters or a positive extra density")
    seed = _check_seed(seed)
    trials = int(trials)
    if trials < 1:
        raise ValueError("need at least one trial")
    if heights is None:
        heights = np.arange(10.0, 500.0 + 1e-9, 10.0)
    heights = np.asarray(heights, dtype=float)

    edges = _band_partition(env, scenario.guard_radius, scenario.outer_radius)
    samples = []
    half_widths = []
    for hidx, h in enumerate(heights):
        totals = _fixed_contribution(fixed, float(h), radio, exponents, env,
                                     trials, seed, hidx, plos_fn, fading)
        if fixed.extra_density > 0.0:
            p = _band_probabilities(float(h), edges, env, plos_fn)
            lam = fixed.extra_density * math.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
            n_los, n_nlos = _draw_band_counts(seed, hidx, trials, lam, p)
            sums = _run_kernel(seed, hidx, n_los, n_nlos, edges, float(h),
                               exponents, fading)
            totals = totals + _link_constant(radio) * sums
        mean = float(totals.mean())
        hw = float(1.96 * totals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        samples.append((float(h), mean))
        half_widths.append(hw)
    return AltitudePowerCurve(samples=tuple(samples), label=label,
                              half_widths=tuple(half_widths))


def read_fixed_set(path, origin=None, extra_density=1e-6):
    """Load fixed transmitters from CSV.

    Accepts either ``label,ground_distance_m`` rows or ``lat,lon[,label]``
    rows; the latter are resolved to ground distances against ``origin``
    (the receiver's nadir as a (lat, lon) pair in degrees) using the same
    equirectangular projection as the visibility engine.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("fixed transmitter file is empty")
        header = [h.strip().lower() for h in header]
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if header[:2] == ["label", "ground_distance_m"]:
        entries = [(float(r[1]), r[0].strip()) for r in rows]
    elif header[:2] == ["lat", "lon"]:
        if origin is None:
            raise ValueError("lat/lon transmitter lists need an origin (lat, lon)")
        from .visibility import equirect_xy

        entries = []
        for i, r in enumerate(rows):
            x, y = equirect_xy(float(r[0]), float(r[1]), origin[0], origin[1])
            lab = r[2].strip() if len(r) > 2 and r[2].strip() else f"site-{i}"
            entries.append((math.hypot(x, y), lab))
    else:
        raise ValueError(f"unrecognized fixed transmitter header: {header!r}")
    return FixedTransmitterSet(tuple(entries), extra_density=extra_density)
