"""Power unit conversions.

All internal arithmetic is carried out in watts; dBm appears only at
interfaces (file output, logs, plot axes).
"""

import numpy as np


def dbm_from_watts(power_w):
    """Convert watts to dBm. Accepts scalars or arrays; requires power > 0."""
    p = np.asarray(power_w, dtype=float)
    if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
        raise ValueError("dBm conversion requires finite positive power")
    out = 10.0 * np.log10(p) + 30.0
    return float(out) if np.isscalar(power_w) or out.ndim == 0 else out


def watts_from_dbm(power_dbm):
    """Convert dBm to watts."""
    p = np.asarray(power_dbm, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("dBm input must be finite")
    out = 10.0 ** ((p - 30.0) / 10.0)
    return float(out) if np.isscalar(power_dbm) or out.ndim == 0 else out
