"""Site-specific LoS determination against extruded building footprints.

Buildings are flat-roofed vertical prisms over simple 2-D polygons in a
local tangent-plane frame (equirectangular projection at the map origin).
A transmitter-receiver segment is NLoS when it passes through the interior
of any prism: the segment's 2-D projection is cut into intervals by its
polygon-edge crossings, and on every interval whose midpoint lies strictly
inside the footprint the linear segment height is compared against the roof.
Grazing contact, running exactly along a wall, or touching a roof counts as
LoS; only interior penetration blocks.

The kernel also drives a polar analysis grid around a site: per-point LoS
flags at a configurable antenna height, aggregate received power with the
exponent picked per flag, and distance-binned empirical LoS probabilities.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .curves import AltitudePowerCurve

__all__ = [
    "EARTH_RADIUS",
    "GeometryError",
    "Building",
    "BuildingMap",
    "CircularGrid",
    "VisibilityResult",
    "equirect_xy",
    "los_visible",
    "grid_visibility",
    "aggregate_power_site",
    "empirical_plos",
    "site_curve_over_heights",
    "read_map_file",
    "write_map_file",
    "write_visibility_csv",
]

EARTH_RADIUS = 6371000.0
MAP_FORMAT_NAME = "aeropower-map"
MAP_FORMAT_VERSION = 1
_MAX_EXTENT = 10000.0  # local-frame validity limit, meters


class GeometryError(ValueError):
    """Degenerate geometry: zero-length segments, broken polygons."""


def equirect_xy(lat, lon, origin_lat, origin_lon):
    """Tangent-plane offset in meters of (lat, lon) from the origin."""
    x = EARTH_RADIUS * math.radians(lon - origin_lon) * math.cos(math.radians(origin_lat))
    y = EARTH_RADIUS * math.radians(lat - origin_lat)
    return x, y


def _on_segment(px, py, ax, ay, bx, by):
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _proper_or_touching(ax, ay, bx, by, cx, cy, dx, dy):
    """Closed-segment intersection test for the polygon simplicity check."""
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    for px, py, qx, qy, rx, ry in (
        (cx, cy, ax, ay, bx, by),
        (dx, dy, ax, ay, bx, by),
        (ax, ay, cx, cy, dx, dy),
        (bx, by, cx, cy, dx, dy),
    ):
        if _on_segment(px, py, qx, qy, rx, ry):
            return True
    return False


@dataclass(frozen=True, eq=False)
class Building:
    """Flat-roofed prism over a simple polygon footprint (local meters).

    Vertices are normalized to counterclockwise order on construction.
    """

    footprint: tuple
    height: float

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.footprint)
        if len(verts) < 3:
            raise GeometryError("footprint needs at least 3 vertices")
        if not self.height > 0:
            raise GeometryError("building height must be positive")
        n = len(verts)
        area2 = 0.0
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            if x1 == x2 and y1 == y2:
                raise GeometryError("footprint has a zero-length edge")
            area2 += x1 * y2 - x2 * y1
        if area2 == 0.0:
            raise GeometryError("footprint is degenerate (zero area)")
        if area2 < 0.0:
            verts = verts[::-1]
        # simplicity: no two non-adjacent edges may meet, even at a point
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                cx, cy = verts[j]
                dx, dy = verts[(j + 1) % n]
                if _proper_or_touching(ax, ay, bx, by, cx, cy, dx, dy):
                    raise GeometryError("footprint is self-intersecting")
        object.__setattr__(self, "footprint", verts)
        object.__setattr__(self, "height", float(self.height))

    @property
    def vertices(self):
        return np.array(self.footprint, dtype=float)


@dataclass(frozen=True, eq=False)
class BuildingMap:
    """Immutable building collection anchored at a (lat, lon) origin."""

    buildings: tuple
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        object.__setattr__(self, "origin",
                           (float(self.origin[0]), float(self.origin[1])))
        for b in self.buildings:
            v = b.vertices
            if np.hypot(v[:, 0], v[:, 1]).max() > _MAX_EXTENT:
                raise GeometryError("footprint farther than 10 km from origin, "
                                    "beyond the flat-frame validity range")

    @cached_property
    def _packed(self):
        # concatenated vertex array + offsets + heights for the jit kernel
        if not self.buildings:
            return (np.empty((0, 2)), np.zeros(1, dtype=np.int64), np.empty(0))
        verts = np.concatenate([b.vertices for b in self.buildings])
        offsets = np.zeros(len(self.buildings) + 1, dtype=np.int64)
        np.cumsum([len(b.footprint) for b in self.buildings], out=offsets[1:])
        heights = np.array([b.height for b in self.buildings])
        return verts, offsets, heights


@njit(cache=True)
def _strict_inside(x, y, v):
    """Even-odd interior test; points on the boundary count as outside."""
    n = v.shape[0]
    inside = False
    for i in range(n):
        x1 = v[i, 0]
        y1 = v[i, 1]
        j = i + 1
        if j == n:
            j = 0
        x2 = v[j, 0]
        y2 = v[j, 1]
        cr = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if (cr == 0.0 and min(x1, x2) <= x <= max(x1, x2)
                and min(y1, y2) <= y <= max(y1, y2)):
            return False
        if (y1 > y) != (y2 > y):
            xin = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xin:
                inside = not inside
    return inside


@njit(cache=True)
def _blocked_one(ax, ay, z0, bx, by, z1, v, roof):
    """True when segment (a, z0)->(b, z1) penetrates the prism interior."""
    if z0 >= roof and z1 >= roof:
        return False
    n = v.shape[0]
    # bounding-box cull
    bb_lo_x = v[0, 0]
    bb_hi_x = v[0, 0]
    bb_lo_y = v[0, 1]
    bb_hi_y = v[0, 1]
    for i in range(1, n):
        bb_lo_x = min(bb_lo_x, v[i, 0])
        bb_hi_x = max(bb_hi_x, v[i, 0])
        bb_lo_y = min(bb_lo_y, v[i, 1])
        bb_hi_y = max(bb_hi_y, v[i, 1])
    if (max(ax, bx) < bb_lo_x or min(ax, bx) > bb_hi_x
            or max(ay, by) < bb_lo_y or min(ay, by) > bb_hi_y):
        return False

    rx = bx - ax
    ry = by - ay
    len2 = rx * rx + ry * ry
    ts = np.empty(2 * n + 2)
    m = 0
    ts[m] = 0.0
    m += 1
    ts[m] = 1.0
    m += 1
    for i in range(n):
        cx = v[i, 0]
        cy = v[i, 1]
        j = i + 1
        if j == n:
            j = 0
        dx = v[j, 0] - cx
        dy = v[j, 1] - cy
        ex = cx - ax
        ey = cy - ay
        denom = rx * dy - ry * dx
        if denom != 0.0:
            t = (ex * dy - ey * dx) / denom
            u = (ex * ry - ey * rx) / denom
            if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
                ts[m] = t
                m += 1
        elif ex * ry - ey * rx == 0.0 and len2 > 0.0:
            # collinear edge: its span splits the partition too
            tc = (ex * rx + ey * ry) / len2
            td = ((cx + dx - ax) * rx + (cy + dy - ay) * ry) / len2
            ts[m] = min(max(tc, 0.0), 1.0)
            m += 1
            ts[m] = min(max(td, 0.0), 1.0)
            m += 1

    # insertion sort of the candidate parameters
    for i in range(1, m):
        key = ts[i]
        k = i - 1
        while k >= 0 and ts[k] > key:
            ts[k + 1] = ts[k]
            k -= 1
        ts[k + 1] = key

    for i in range(m - 1):
        ta = ts[i]
        tb = ts[i + 1]
        if tb <= ta:
            continue
        tm = 0.5 * (ta + tb)
        if _strict_inside(ax + tm * rx, ay + tm * ry, v):
            za = z0 + ta * (z1 - z0)
            zb = z0 + tb * (z1 - z0)
            if min(za, zb) < roof:
                return True
    return False


@njit(cache=True)
def _any_blocked(ax, ay, z0, bx, by, z1, verts, offsets, heights):
    for b in range(heights.size):
        if _blocked_one(ax, ay, z0, bx, by, z1,
                        verts[offsets[b]:offsets[b + 1]], heights[b]):
            return True
    return False


@njit(cache=True)
def _grid_flags(px, py, pz, ux, uy, uz, verts, offsets, heights):
    n = px.size
    los = np.empty(n, dtype=np.bool_)
    inside = np.empty(n, dtype=np.bool_)
    for i in range(n):
        hit = False
        for b in range(heights.size):
            if _strict_inside(px[i], py[i], verts[offsets[b]:offsets[b + 1]]):
                hit = True
                break
        inside[i] = hit
        los[i] = not _any_blocked(px[i], py[i], pz, ux, uy, uz,
                                  verts, offsets, heights)
    return los, inside


def los_visible(tx, rx, bmap):
    """True when the open segment tx -> rx misses every building interior.

    ``tx`` and ``rx`` are (x, y, z) triples in the map's local frame.  The
    tie-break is documented and consistent: contact confined to walls,
    roofs, or edges (zero penetration depth) is LoS.
    """
    ax, ay, az = (float(c) for c in tx)
    bx, by, bz = (float(c) for c in rx)
    if ax == bx and ay == by and az == bz:
        raise GeometryError("zero-length segment has no visibility status")
    verts, offsets, heights = bmap._packed
    return not _any_blocked(ax, ay, az, bx, by, bz, verts, offsets, heights)


@dataclass(frozen=True)
class CircularGrid:
    """Polar analysis grid: rings every radial_step out to max_radius.

    Radii run radial_step..max_radius inclusive and azimuths cover
    0..360 degrees exclusive, so the defaults (20 m, 4 deg, 2000 m) give
    100 x 90 = 9000 points.  Point order is radius-major.
    """

    radial_step: float = 20.0
    azimuth_step: float = 4.0
    max_radius: float = 2000.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (self.radial_step > 0 and self.azimuth_step > 0):
            raise ValueError("grid steps must be positive")
        for total, step, what in ((self.max_radius, self.radial_step, "radius"),
                                  (360.0, self.azimuth_step, "azimuth")):
            ratio = total / step
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError(f"{what} range must be a whole number of steps")
        object.__setattr__(self, "center",
                           (float(self.center[0]), float(self.center[1])))

    @property
    def n_radial(self):
        return int(round(self.max_radius / self.radial_step))

    @property
    def n_azimuth(self):
        return int(round(360.0 / self.azimuth_step))

    @property
    def point_count(self):
        return self.n_radial * self.n_azimuth

    def points(self):
        """(N, 2) array of grid positions, radius-major, azimuth minor."""
        radii = self.radial_step * np.arange(1, self.n_radial + 1)
        az = np.deg2rad(self.azimuth_step * np.arange(self.n_azimuth))
        r = np.repeat(radii, self.n_azimuth)
        a = np.tile(az, self.n_radial)
        return np.column_stack((self.center[0] + r * np.cos(a),
                                self.center[1] + r * np.sin(a)))


@dataclass(frozen=True, eq=False)
class VisibilityResult:
    """Per-point LoS outcome of one grid sweep at a fixed receiver height."""

    positions: np.ndarray  # (N, 2) local meters
    dist_3d: np.ndarray
    los: np.ndarray
    inside_building: np.ndarray
    uav_height: float
    ue_height: float
    center: tuple

    @property
    def active(self):
        """Mask of points that survive inside-building removal."""
        return ~self.inside_building

    @property
    def ground_dist(self):
        return np.hypot(self.positions[:, 0] - self.center[0],
                        self.positions[:, 1] - self.center[1])


def grid_visibility(grid, uav_height, bmap, ue_height=0.0):
    """LoS flags for every grid point against a receiver over the center.

    Points whose ground position falls strictly inside a footprint are
    flagged ``inside_building`` and excluded from aggregation downstream.
    """
    if not uav_height > ue_height:
        raise GeometryError("receiver must sit above the antenna height")
    pts = grid.points()
    verts, offsets, heights = bmap._packed
    try:
        los, inside = _grid_flags(pts[:, 0], pts[:, 1], float(ue_height),
                                  grid.center[0], grid.center[1],
                                  float(uav_height), verts, offsets, heights)
    except Exception as exc:  # pragma: no cover - kernel never raises per point
        raise GeometryError(f"grid visibility failed: {exc}") from exc
    dist = np.sqrt((pts[:, 0] - grid.center[0]) ** 2
                   + (pts[:, 1] - grid.center[1]) ** 2
                   + (uav_height - ue_height) ** 2)
    return VisibilityResult(positions=pts, dist_3d=dist, los=los,
                            inside_building=inside, uav_height=float(uav_height),
                            ue_height=float(ue_height), center=grid.center)


def aggregate_power_site(result, radio, exponents, fading=False, seed=0):
    """Aggregate received power over the surviving grid points, in watts."""
    from .mc import _link_constant

    if result.positions.shape[0] == 0:
        raise ValueError("visibility result is empty")
    keep = result.active
    r = result.dist_3d[keep]
    if r.size == 0:
        return 0.0
    alpha = np.where(result.los[keep], exponents.alpha_los, exponents.alpha_nlos)
    weights = r ** -alpha
    if fading:
        g = np.random.Generator(np.random.Philox(key=[int(seed), 0]))
        h = g.standard_exponential(r.size)
    else:
        h = 1.0
    return float(_link_constant(radio) * np.sum(h * weights))


def empirical_plos(results, bin_width=50.0):
    """Distance-binned LoS fraction per receiver height.

    Returns {uav_height: [(bin_center_m, probability, count), ...]} with one
    entry per populated bin; empty bins are absent rather than zero.
    """
    if not results:
        raise ValueError("need at least one visibility result")
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    curves = {}
    for res in results:
        keep = res.active
        d = res.dist_3d[keep]
        flags = res.los[keep]
        rows = []
        if d.size:
            idx = np.floor(d / bin_width).astype(np.int64)
            for b in np.unique(idx):
                sel = idx == b
                rows.append(((float(b) + 0.5) * bin_width,
                             float(flags[sel].mean()), int(sel.sum())))
        curves[res.uav_height] = rows
    return curves


def site_curve_over_heights(grid, bmap, radio, exponents, heights,
                            guard_radius=0.0, *, ue_height=0.0, fading=False,
                            seed=0, label="site"):
    """Aggregate site power per receiver height, as an altitude curve.

    Grid points closer to the center than ``guard_radius`` (ground
    distance) are excluded.  Fading defaults to off so repeated sweeps are
    deterministic; with fading on, each height uses the same seed.
    """
    heights = np.asarray(heights, dtype=float)
    if heights.size == 0 or np.any(np.diff(heights) <= 0):
        raise ValueError("heights must be strictly increasing and non-empty")
    samples = []
    for h in heights:
        res = grid_visibility(grid, float(h), bmap, ue_height=ue_height)
        keep = res.ground_dist >= guard_radius
        trimmed = VisibilityResult(
            positions=res.positions[keep], dist_3d=res.dist_3d[keep],
            los=res.los[keep], inside_building=res.inside_building[keep],
            uav_height=res.uav_height, ue_height=res.ue_height,
            center=res.center)
        if trimmed.positions.shape[0] == 0:
            power = 0.0
        else:
            power = aggregate_power_site(trimmed, radio, exponents,
                                         fading=fading, seed=seed)
        samples.append((float(h), power))
    return AltitudePowerCurve(samples=tuple(samples), label=label)


def write_map_file(path, bmap):
    """Write the versioned plain-text map format.

    Layout: a ``aeropower-map 1`` header, an ``origin lat lon`` line, then
    per building a ``building height n_vertices`` line followed by
    ``x y`` vertex lines.  Floats use shortest exact decimal form, so a
    write/read cycle reproduces values bit-for-bit.
    """
    lines = [f"{MAP_FORMAT_NAME} {MAP_FORMAT_VERSION}",
             f"origin {bmap.origin[0]!r} {bmap.origin[1]!r}"]
    for b in bmap.buildings:
        lines.append(f"building {b.height!r} {len(b.footprint)}")
        for x, y in b.footprint:
            lines.append(f"{x!r} {y!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_map_file(path):
    """Parse the plain-text map format written by write_map_file."""
    with open(path, encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("map file is empty")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAP_FORMAT_NAME:
        raise ValueError(f"not a building map file: {lines[0]!r}")
    if int(head[1]) != MAP_FORMAT_VERSION:
        raise ValueError(f"unsupported map format version {head[1]}")
    pos = 1
    origin = (0.0, 0.0)
    if pos < len(lines) and lines[pos].startswith("origin"):
        _, lat, lon = lines[pos].split()
        origin = (float(lat), float(lon))
        pos += 1
    buildings = []
    while pos < len(lines):
        parts = lines[pos].split()
        if parts[0] != "building" or len(parts) != 3:
            raise ValueError(f"expected a building header at line: {lines[pos]!r}")
        height = float(parts[1])
        count = int(parts[2])
        pos += 1
        if pos + count > len(lines):
            raise ValueError("map file truncated inside a vertex list")
        verts = []
        for ln in lines[pos:pos + count]:
            x, y = ln.split()
            verts.append((float(x), float(y)))
        pos += count
        buildings.append(Building(footprint=tuple(verts), height=height))
    return BuildingMap(buildings=tuple(buildings), origin=origin)


def write_visibility_csv(path, result):
    """Dump surviving points as ``point,x,y,R,los`` rows for rendering.

    ``point`` is the index in the original grid order, so removed
    (inside-building) points leave visible gaps in the numbering.
    """
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point", "x", "y", "R", "los"])
        for i in range(result.positions.shape[0]):
            if result.inside_building[i]:
                continue
            writer.writerow([i, f"{result.positions[i, 0]:.6f}",
                             f"{result.positions[i, 1]:.6f}",
                             f"{result.dist_3d[i]:.6f}",
                             int(result.los[i])])
