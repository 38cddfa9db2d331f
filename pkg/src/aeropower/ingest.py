"""Spectrum-sweep and GPS ingestion: parse, time-join, band-integrate, bin.

Input files are plain CSV with a version tag on the first line; '#' lines
and blank lines elsewhere are ignored:

    # aeropower-sweeps 1
    timestamp,freq_start_hz,bin_width_hz,bin_powers...
    <epoch s>,<Hz>,<Hz>,<W>,<W>,...    one column per frequency bin

    # aeropower-gps 1
    timestamp,lat,lon,alt_m

    # aeropower-bands 1
    name,f_low_hz,f_high_hz,direction

Band integration counts a bin exactly when its center frequency falls in
[f_low, f_high), so splitting a band into disjoint sub-bands is additive
in watts. Summary statistics are computed in dBm; sums stay linear.
"""

import csv
import importlib.resources
import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .units import dbm_from_watts, watts_from_dbm

_FORMAT_VERSION = 1
SWEEP_TAG = "aeropower-sweeps"
GPS_TAG = "aeropower-gps"
BANDS_TAG = "aeropower-bands"
SWEEP_HEADER = ["timestamp", "freq_start_hz", "bin_width_hz", "bin_powers..."]
GPS_HEADER = ["timestamp", "lat", "lon", "alt_m"]
BANDS_HEADER = ["name", "f_low_hz", "f_high_hz", "direction"]
BINNED_CSV_HEADER = ["height_m", "power_w", "power_dbm", "q25_dbm", "q75_dbm",
                     "count", "label"]

DEFAULT_MAX_SKEW = 15.0  # one sweep duration, in seconds


class DataError(ValueError):
    """An input file or record violates its documented schema."""


@dataclass(frozen=True)
class SweepRecord:
    """One analyzer sweep: contiguous frequency bins of linear power."""

    timestamp: float
    freq_start: float
    bin_width: float
    bin_powers: tuple

    def __post_init__(self):
        if not self.bin_width > 0:
            raise DataError("bin width must be positive")
        if len(self.bin_powers) == 0:
            raise DataError("sweep needs at least one bin")
        # normalize to builtin floats so the writers emit plain reprs
        powers = tuple(float(p) for p in self.bin_powers)
        if any(not (p >= 0) or not math.isfinite(p) for p in powers):
            raise DataError("bin powers must be finite and non-negative")
        object.__setattr__(self, "bin_powers", powers)

    @property
    def freq_stop(self):
        return self.freq_start + len(self.bin_powers) * self.bin_width

    def bin_centers(self):
        idx = np.arange(len(self.bin_powers))
        return self.freq_start + (idx + 0.5) * self.bin_width


@dataclass(frozen=True)
class GpsFix:
    timestamp: float
    latitude: float
    longitude: float
    altitude: float  # meters above ground at the launch site


@dataclass(frozen=True)
class BandDef:
    name: str
    f_low: float
    f_high: float
    direction: str  # "uplink" or "downlink"

    def __post_init__(self):
        if not self.f_low < self.f_high:
            raise DataError(f"band {self.name!r}: f_low must be below f_high")
        if self.direction not in ("uplink", "downlink"):
            raise DataError(f"band {self.name!r}: direction must be "
                            f"'uplink' or 'downlink', got {self.direction!r}")


@dataclass(frozen=True)
class AltitudePowerPoint:
    """Band power of one sweep, annotated with receiver altitude."""

    altitude: float
    band: str
    power: float  # watts
    timestamp: float

    def __post_init__(self):
        if not self.altitude >= 0:
            raise DataError("altitude must be non-negative")
        if not (self.power >= 0) or not math.isfinite(self.power):
            raise DataError("power must be finite and non-negative")


@dataclass(frozen=True)
class JoinedSweep:
    """A sweep paired with its position from the GPS log."""

    record: SweepRecord
    altitude: float
    latitude: float
    longitude: float
    skew: float  # |sweep time - nearest fix time|, seconds


@dataclass(frozen=True)
class AltitudeBin:
    """Per-altitude-bin dBm statistics over [altitude_low, altitude_high)."""

    altitude_low: float
    altitude_high: float
    median_dbm: float
    q25_dbm: float
    q75_dbm: float
    count: int

    @property
    def center(self):
        return 0.5 * (self.altitude_low + self.altitude_high)


def _read_tagged_csv(path, tag, expected_header):
    """Shared reader: version tag, header row, then (line_number, row) pairs."""
    with open(path, encoding="utf-8") as fh:
        lines = [(i + 1, line.rstrip("\r\n")) for i, line in enumerate(fh)]
    meaningful = [(n, s) for n, s in lines if s.strip()]
    if not meaningful:
        raise DataError(f"{path}: empty file")
    n0, first = meaningful[0]
    stripped = first.strip()
    parts = stripped.lstrip("#").split()
    if not stripped.startswith("#") or len(parts) != 2 or parts[0] != tag:
        raise DataError(f"{path}: line {n0}: first line must be "
                        f"'# {tag} {_FORMAT_VERSION}', got {first!r}")
    try:
        version = int(parts[1])
    except ValueError:
        raise DataError(f"{path}: line {n0}: malformed version {parts[1]!r}") from None
    if version != _FORMAT_VERSION:
        raise DataError(f"{path}: unsupported {tag} version {version} "
                        f"(supported: {_FORMAT_VERSION})")
    body = [(n, s) for n, s in meaningful[1:] if not s.strip().startswith("#")]
    if not body:
        raise DataError(f"{path}: missing header row")
    n_h, header_line = body[0]
    header = next(csv.reader([header_line]))
    for i, want in enumerate(expected_header):
        got = header[i].strip() if i < len(header) else ""
        if got != want:
            raise DataError(f"{path}: line {n_h}: header column {i + 1} is "
                            f"{got!r}, expected {want!r}")
    return [(n, next(csv.reader([s]))) for n, s in body[1:]]


def _parse_float(path, lineno, column, text):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{path}: line {lineno}: column {column!r} has "
                        f"non-numeric value {text!r}") from None


def read_sweep_csv(path):
    """Parse a sweep file into SweepRecords, in file order."""
    records = []
    for lineno, row in _read_tagged_csv(path, SWEEP_TAG, SWEEP_HEADER[:3]):
        if len(row) < 4:
            raise DataError(f"{path}: line {lineno}: sweep row needs at least "
                            f"one bin power column")
        timestamp = _parse_float(path, lineno, "timestamp", row[0])
        freq_start = _parse_float(path, lineno, "freq_start_hz", row[1])
        bin_width = _parse_float(path, lineno, "bin_width_hz", row[2])
        powers = tuple(_parse_float(path, lineno, f"bin_powers[{i}]", cell)
                       for i, cell in enumerate(row[3:]))
        try:
            records.append(SweepRecord(timestamp=timestamp, freq_start=freq_start,
                                       bin_width=bin_width, bin_powers=powers))
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    if not records:
        raise DataError(f"{path}: no sweep records")
    return records


def read_gps_csv(path, site_elevation=0.0):
    """Parse a GPS log; altitude is stored minus the launch-site elevation."""
    fixes = []
    prev_t = -math.inf
    for lineno, row in _read_tagged_csv(path, GPS_TAG, GPS_HEADER):
        if len(row) != 4:
            raise DataError(f"{path}: line {lineno}: expected 4 columns, "
                            f"got {len(row)}")
        t = _parse_float(path, lineno, "timestamp", row[0])
        if t < prev_t:
            raise DataError(f"{path}: line {lineno}: timestamps must be "
                            f"non-decreasing")
        prev_t = t
        fixes.append(GpsFix(timestamp=t,
                            latitude=_parse_float(path, lineno, "lat", row[1]),
                            longitude=_parse_float(path, lineno, "lon", row[2]),
                            altitude=_parse_float(path, lineno, "alt_m", row[3])
                            - site_elevation))
    if not fixes:
        raise DataError(f"{path}: no GPS fixes")
    return fixes


def write_sweep_csv(path, records):
    """Inverse of read_sweep_csv; floats written with round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {SWEEP_TAG} {_FORMAT_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for rec in records:
            writer.writerow([repr(rec.timestamp), repr(rec.freq_start),
                             repr(rec.bin_width)]
                            + [repr(p) for p in rec.bin_powers])


def write_gps_csv(path, fixes):
    """Inverse of read_gps_csv (with site_elevation already applied)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {GPS_TAG} {_FORMAT_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(GPS_HEADER)
        for fix in fixes:
            writer.writerow([repr(fix.timestamp), repr(fix.latitude),
                             repr(fix.longitude), repr(fix.altitude)])


def band_power(record, band):
    """Total linear power over bins whose center lies in [f_low, f_high).

    Bins straddling a band edge count if and only if their center
    qualifies, which makes disjoint sub-bands exactly additive. Raises
    DataError when the band does not overlap the sweep span at all.
    """
    if not (band.f_low < record.freq_stop and band.f_high > record.freq_start):
        raise DataError(f"band {band.name!r} [{band.f_low:g}, {band.f_high:g}) Hz "
                        f"does not overlap sweep span [{record.freq_start:g}, "
                        f"{record.freq_stop:g}) Hz")
    return math.fsum(
        p for i, p in enumerate(record.bin_powers)
        if band.f_low <= record.freq_start + (i + 0.5) * record.bin_width
        < band.f_high)


def time_join(sweeps, fixes, max_skew=DEFAULT_MAX_SKEW):
    """Pair each sweep with the GPS fix nearest in time.

    Altitude is linearly interpolated when both bracketing fixes sit within
    max_skew; otherwise the nearest fix's altitude is used as-is. Sweeps
    farther than max_skew from every fix are dropped. Inputs are sorted by
    timestamp internally, so the result is order-independent.

    Returns (joined, dropped_count); raises DataError when nothing joins.
    """
    if not max_skew >= 0:
        raise DataError("max_skew must be non-negative")
    sweeps = sorted(sweeps, key=lambda r: r.timestamp)
    fixes = sorted(fixes, key=lambda f: f.timestamp)
    if not sweeps or not fixes:
        raise DataError("time join needs at least one sweep and one fix")
    times = [f.timestamp for f in fixes]
    joined = []
    dropped = 0
    for rec in sweeps:
        t = rec.timestamp
        j = bisect_left(times, t)
        # candidate fixes: last one at or before t, first one at or after t
        candidates = [k for k in (j - 1, j) if 0 <= k < len(fixes)]
        nearest = min(candidates, key=lambda k: (abs(times[k] - t), k))
        skew = abs(times[nearest] - t)
        if skew > max_skew:
            dropped += 1
            continue
        altitude = fixes[nearest].altitude
        if 0 < j < len(fixes):
            ta, tb = times[j - 1], times[j]
            if tb > ta and t - ta <= max_skew and tb - t <= max_skew:
                frac = (t - ta) / (tb - ta)
                alt_a, alt_b = fixes[j - 1].altitude, fixes[j].altitude
                altitude = alt_a + frac * (alt_b - alt_a)
        joined.append(JoinedSweep(record=rec, altitude=altitude,
                                  latitude=fixes[nearest].latitude,
                                  longitude=fixes[nearest].longitude,
                                  skew=skew))
    if not joined:
        raise DataError(f"no sweep joined within {max_skew:g} s of a GPS fix")
    return joined, dropped


def band_points(joined, band):
    """Integrate one band over joined sweeps, yielding altitude-power points."""
    return [AltitudePowerPoint(altitude=js.altitude, band=band.name,
                               power=band_power(js.record, band),
                               timestamp=js.record.timestamp)
            for js in joined]


def altitude_binning(points, bin_width):
    """Per-altitude-bin dBm statistics: median, quartiles, count.

    Bins are [k*bin_width, (k+1)*bin_width); empty bins are omitted.
    Statistics are computed in dBm (powers must be positive); energy sums
    elsewhere stay in watts.
    """
    if not bin_width > 0:
        raise DataError("bin width must be positive")
    groups = {}
    for pt in points:
        groups.setdefault(int(math.floor(pt.altitude / bin_width)),
                          []).append(pt.power)
    bins = []
    for k in sorted(groups):
        dbm = np.atleast_1d(dbm_from_watts(np.array(groups[k], dtype=float)))
        q25, median, q75 = np.percentile(dbm, [25.0, 50.0, 75.0])
        bins.append(AltitudeBin(altitude_low=k * bin_width,
                                altitude_high=(k + 1) * bin_width,
                                median_dbm=float(median), q25_dbm=float(q25),
                                q75_dbm=float(q75), count=len(groups[k])))
    return bins


def load_band_table(path=None):
    """Load band definitions; defaults to the packaged cellular uplink table."""
    if path is None:
        ref = importlib.resources.files("aeropower").joinpath("data/bands.csv")
        with importlib.resources.as_file(ref) as p:
            return load_band_table(p)
    bands = []
    for lineno, row in _read_tagged_csv(path, BANDS_TAG, BANDS_HEADER):
        if len(row) != 4:
            raise DataError(f"{path}: line {lineno}: expected 4 columns, "
                            f"got {len(row)}")
        try:
            bands.append(BandDef(name=row[0].strip(),
                                 f_low=_parse_float(path, lineno, "f_low_hz", row[1]),
                                 f_high=_parse_float(path, lineno, "f_high_hz", row[2]),
                                 direction=row[3].strip()))
        except DataError as exc:
            if str(exc).startswith(str(path)):
                raise
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    if not bands:
        raise DataError(f"{path}: no band definitions")
    return tuple(bands)


def write_binned_csv(path, binned):
    """Write {label: [AltitudeBin, ...]} in the shared curve schema plus
    percentile and count columns. The power_w column is the linear form of
    the median."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BINNED_CSV_HEADER)
        for label, bins in binned.items():
            for b in bins:
                writer.writerow([f"{b.center:.6f}",
                                 f"{watts_from_dbm(b.median_dbm):.12e}",
                                 f"{b.median_dbm:.8f}", f"{b.q25_dbm:.8f}",
                                 f"{b.q75_dbm:.8f}", str(b.count), label])


def read_binned_csv(path):
    """Read a binned-statistics CSV back as {label: [(center, median_dbm,
    q25_dbm, q75_dbm, count), ...]}."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != BINNED_CSV_HEADER:
            raise DataError(f"{path}: unexpected header {header!r} "
                            f"(want {BINNED_CSV_HEADER!r})")
        for row in reader:
            if len(row) != len(BINNED_CSV_HEADER):
                raise DataError(f"{path}: malformed row {row!r}")
            out.setdefault(row[6], []).append(
                (float(row[0]), float(row[2]), float(row[3]), float(row[4]),
                 int(row[5])))
    return out
