"""Height-indexed power curves and their CSV interchange format.

Every model in the package (closed form, quadrature, Monte Carlo, site
visibility, ingestion) reduces to an ordered (height, power) sequence, so
they all share this container and one CSV schema:

    height_m,power_w,power_dbm,label
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .units import dbm_from_watts

CSV_HEADER = ["height_m", "power_w", "power_dbm", "label"]


@dataclass(frozen=True)
class AltitudePowerCurve:
    samples: tuple  # ((height_m, power_w), ...) strictly increasing heights
    label: str = ""
    half_widths: tuple = field(default=None, compare=False)  # optional 95% CI

    def __post_init__(self):
        heights = np.array([h for h, _ in self.samples], dtype=float)
        powers = np.array([p for _, p in self.samples], dtype=float)
        if heights.size == 0:
            raise ValueError("curve needs at least one sample")
        if np.any(np.diff(heights) <= 0):
            raise ValueError("curve heights must be strictly increasing")
        if np.any(powers < 0) or not np.all(np.isfinite(powers)):
            raise ValueError("curve powers must be finite and non-negative")

    @property
    def heights(self):
        return np.array([h for h, _ in self.samples], dtype=float)

    @property
    def powers_w(self):
        return np.array([p for _, p in self.samples], dtype=float)

    @property
    def powers_dbm(self):
        return dbm_from_watts(self.powers_w)

    def interpolate_w(self, heights):
        """Linear interpolation in watts onto a new height grid (no extrapolation)."""
        h = np.asarray(heights, dtype=float)
        lo, hi = self.heights[0], self.heights[-1]
        if np.any(h < lo) or np.any(h > hi):
            raise ValueError("interpolation grid extends beyond the curve")
        return np.interp(h, self.heights, self.powers_w)


def write_curve_csv(path, curves):
    """Write one or more curves to the shared CSV schema."""
    if isinstance(curves, AltitudePowerCurve):
        curves = [curves]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for curve in curves:
            for h, p in curve.samples:
                writer.writerow([f"{h:.6f}", f"{p:.12e}", f"{dbm_from_watts(p):.8f}",
                                 curve.label])


def read_curve_csv(path):
    """Read curves back; returns a list of AltitudePowerCurve, one per label."""
    by_label = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected curve CSV header: {header!r} "
                             f"(want {CSV_HEADER!r})")
        for row in reader:
            if len(row) != 4:
                raise ValueError(f"malformed curve CSV row: {row!r}")
            height, power_w, _, label = row
            by_label.setdefault(label, []).append((float(height), float(power_w)))
    return [AltitudePowerCurve(samples=tuple(samples), label=label)
            for label, samples in by_label.items()]
