"""Static SVG rendering of the package's CSV products.

Output is deterministic: the SVG date stamp is suppressed and element ids
are salted with a fixed string, so rerunning a command reproduces the
file byte for byte.
"""

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .units import dbm_from_watts

_HASHSALT = "aeropower"
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": _HASHSALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _axes(fig, xlabel, ylabel, title):
    ax = fig.add_subplot(111)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return ax


def plot_curves(path, curves, title="Aggregate received power vs altitude"):
    """Overlay altitude-power curves in dBm; error bars when a curve has
    confidence half-widths."""
    fig = Figure(figsize=(7.2, 4.6))
    ax = _axes(fig, "receiver height (m)", "aggregate power (dBm)", title)
    for i, curve in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        label = curve.label or f"curve {i + 1}"
        ax.plot(curve.heights, curve.powers_dbm, color=color, label=label)
        if curve.half_widths is not None:
            p = curve.powers_w
            hw = np.asarray(curve.half_widths, dtype=float)
            # floor the lower edge to keep the log conversion defined
            low = np.maximum(p - hw, np.finfo(float).tiny)
            ax.fill_between(curve.heights, dbm_from_watts(low),
                            dbm_from_watts(p + hw), color=color, alpha=0.25,
                            linewidth=0)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_binned(path, binned, title="Altitude-binned band power"):
    """Median lines with interquartile shading, one per band label.

    ``binned`` maps label -> list of AltitudeBin.
    """
    fig = Figure(figsize=(7.2, 4.6))
    ax = _axes(fig, "altitude (m)", "band power (dBm)", title)
    for i, (label, bins) in enumerate(binned.items()):
        color = _COLORS[i % len(_COLORS)]
        centers = [b.center for b in bins]
        ax.plot(centers, [b.median_dbm for b in bins], color=color,
                marker="o", markersize=3, label=label)
        ax.fill_between(centers, [b.q25_dbm for b in bins],
                        [b.q75_dbm for b in bins], color=color, alpha=0.2,
                        linewidth=0)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_visibility(path, result, bmap=None,
                    title="Ground-grid line-of-sight map"):
    """Scatter of grid points colored by LoS state, with footprints overlaid."""
    fig = Figure(figsize=(6.4, 6.0))
    ax = _axes(fig, "east (m)", "north (m)",
               f"{title} (receiver at {result.uav_height:g} m)")
    keep = result.active
    pts = result.positions
    los = result.los
    ax.scatter(pts[keep & los, 0], pts[keep & los, 1], s=2, color="#2ca02c",
               label="LoS", linewidths=0)
    ax.scatter(pts[keep & ~los, 0], pts[keep & ~los, 1], s=2, color="#d62728",
               label="NLoS", linewidths=0)
    if bmap is not None:
        for b in bmap.buildings:
            xy = list(b.footprint) + [b.footprint[0]]
            ax.fill([p[0] for p in xy], [p[1] for p in xy],
                    facecolor="#7f7f7f", edgecolor="#404040", alpha=0.8,
                    linewidth=0.5)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=9, markerscale=4)
    fig.tight_layout()
    _save(fig, path)
