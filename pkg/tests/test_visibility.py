"""Building-occlusion engine: exact geometry against the sampling oracle.

The hand-derived single-box thresholds: a receiver climbing over a 30 m
building whose near wall sits 120 m from a transmitter at 200 m ground
distance clears the roof edge at exactly 200/120 * 30 - 30 ... rearranged,
the blocking corner fixes H* by similar triangles.  Both pinned boxes below
were worked out by hand: near wall at x = 80 gives H* = 75, near wall at
x = 40 gives H* = 50 (receiver above the origin, transmitter at x = 200).
"""

import math

import numpy as np
import pytest

from aeropower import (
    Building,
    BuildingMap,
    CircularGrid,
    PathlossExponents,
    aggregate_power_site,
    empirical_plos,
    grid_visibility,
    los_visible,
    read_map_file,
    site_curve_over_heights,
    write_map_file,
)
from aeropower.mc import _link_constant
from aeropower.visibility import (
    GeometryError,
    VisibilityResult,
    equirect_xy,
    write_visibility_csv,
)

import oracles

UE = (200.0, 0.0, 0.0)


def box(x_near, x_far, height=30.0):
    return BuildingMap(buildings=(Building(
        footprint=((x_near, -20.0), (x_far, -20.0), (x_far, 20.0), (x_near, 20.0)),
        height=height),), origin=(0.0, 0.0))


def rx(height):
    return (0.0, 0.0, float(height))


def test_empty_map_is_all_los():
    empty = BuildingMap(buildings=(), origin=(0.0, 0.0))
    assert los_visible(UE, rx(50.0), empty)
    assert los_visible((0.0, 0.0, 0.0), (0.0, 0.0, 100.0), empty)


def test_single_box_threshold_far_wall():
    # blocking corner at x = 80: H* = 30 * 200 / 80 = 75
    bmap = box(80.0, 120.0)
    assert not los_visible(UE, rx(74.999), bmap)
    assert los_visible(UE, rx(75.0), bmap)  # grazing the roof edge counts as clear
    assert los_visible(UE, rx(75.001), bmap)
    assert not los_visible(UE, rx(10.0), bmap)
    assert los_visible(UE, rx(500.0), bmap)


def test_single_box_threshold_near_wall():
    # blocking corner at x = 40: H* = 30 * 200 / (200 - 80) * (200/... ) by
    # similar triangles through the corner nearer the receiver: 50 exactly
    bmap = box(40.0, 80.0)
    assert not los_visible(UE, rx(49.999), bmap)
    assert los_visible(UE, rx(50.0), bmap)
    assert los_visible(UE, rx(50.001), bmap)


def test_threshold_agrees_with_oracle_at_the_boundary():
    for bmap, hstar in ((box(80.0, 120.0), 75.0), (box(40.0, 80.0), 50.0)):
        for h in (hstar - 0.001, hstar, hstar + 0.001):
            assert los_visible(UE, rx(h), bmap) == \
                oracles.oracle_visible(UE, rx(h), bmap)


def test_grazing_contact_is_los():
    bmap = box(80.0, 120.0)
    # glide along the wall plane x = 80 below the roof: touching, not crossing
    assert los_visible((80.0, -100.0, 10.0), (80.0, 100.0, 10.0), bmap)
    # clip exactly through the vertical edge at a corner
    assert los_visible((80.0, -20.0, 10.0), (80.0, -20.0, 10.0 + 1e-9), bmap)


def test_endpoint_inside_footprint():
    bmap = box(80.0, 120.0)
    # a transmitter strictly inside the footprint below the roof starts
    # under the building; no exit direction can clear it
    assert not los_visible((100.0, 0.0, 0.0), (0.0, 0.0, 300.0), bmap)
    assert not los_visible((100.0, 0.0, 0.0), (0.0, 0.0, 20.0), bmap)
    # above the roof the footprint does not matter
    assert los_visible((100.0, 0.0, 40.0), (0.0, 0.0, 300.0), bmap)


def test_vertical_segment_over_building():
    bmap = box(80.0, 120.0)
    assert not los_visible((100.0, 0.0, 0.0), (100.0, 0.0, 20.0), bmap)
    assert los_visible((100.0, 0.0, 31.0), (100.0, 0.0, 200.0), bmap)
    assert los_visible((500.0, 0.0, 0.0), (500.0, 0.0, 120.0), bmap)


def test_building_validation():
    with pytest.raises(GeometryError):
        Building(footprint=((0, 0), (1, 0)), height=10.0)
    with pytest.raises(GeometryError):
        Building(footprint=((0, 0), (1, 0), (1, 1)), height=0.0)
    with pytest.raises(GeometryError):
        Building(footprint=((0, 0), (0, 0), (1, 1)), height=10.0)
    with pytest.raises(GeometryError):
        Building(footprint=((0, 0), (1, 0), (2, 0)), height=10.0)  # zero area
    with pytest.raises(GeometryError):  # bowtie
        Building(footprint=((0, 0), (2, 2), (2, 0), (0, 2)), height=10.0)


def test_clockwise_footprints_are_normalized():
    ccw = Building(footprint=((0, 0), (4, 0), (4, 4), (0, 4)), height=10.0)
    cw = Building(footprint=((0, 4), (4, 4), (4, 0), (0, 0)), height=10.0)
    assert set(ccw.footprint) == set(cw.footprint)
    a = BuildingMap(buildings=(ccw,))
    b = BuildingMap(buildings=(cw,))
    for seg in ((((-5.0, 2.0, 1.0)), ((9.0, 2.0, 1.0))),
                (((-5.0, -5.0, 0.0)), ((9.0, 9.0, 30.0)))):
        assert los_visible(seg[0], seg[1], a) == los_visible(seg[0], seg[1], b)


def test_map_extent_guard():
    far = Building(footprint=((20000.0, 0.0), (20010.0, 0.0), (20010.0, 10.0),
                              (20000.0, 10.0)), height=5.0)
    with pytest.raises(GeometryError):
        BuildingMap(buildings=(far,))


def test_equirect_projection():
    assert equirect_xy(40.0, -75.0, 40.0, -75.0) == (0.0, 0.0)
    x, y = equirect_xy(40.001, -75.0, 40.0, -75.0)
    assert x == pytest.approx(0.0, abs=1e-9)
    assert y == pytest.approx(111.195, abs=0.05)
    x, y = equirect_xy(40.0, -74.999, 40.0, -75.0)
    assert y == pytest.approx(0.0, abs=1e-9)
    assert x == pytest.approx(111.195 * math.cos(math.radians(40.0)), abs=0.05)


def test_map_file_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    bmap = oracles.random_scene(rng, 4)
    path = tmp_path / "scene.map"
    write_map_file(path, bmap)
    back = read_map_file(path)
    assert back.origin == bmap.origin
    assert len(back.buildings) == len(bmap.buildings)
    for got, want in zip(back.buildings, bmap.buildings):
        assert got.footprint == want.footprint
        assert got.height == want.height
    path2 = tmp_path / "again.map"
    write_map_file(path2, back)
    assert path2.read_bytes() == path.read_bytes()


def test_map_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.map"
    path.write_text("")
    with pytest.raises(ValueError):
        read_map_file(path)
    path.write_text("not-a-map 1\n")
    with pytest.raises(ValueError):
        read_map_file(path)
    path.write_text("aeropower-map 99\n")
    with pytest.raises(ValueError):
        read_map_file(path)
    path.write_text("aeropower-map 1\nbuilding 10.0 4\n0 0\n1 0\n")
    with pytest.raises(ValueError):
        read_map_file(path)


def test_default_grid_point_count():
    grid = CircularGrid()
    assert grid.point_count == 9000
    pts = grid.points()
    assert pts.shape == (9000, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert r.min() == pytest.approx(20.0, rel=1e-12)
    assert r.max() == pytest.approx(2000.0, rel=1e-12)
    # radius-major: first ring is the 90 azimuths of the innermost radius
    assert np.allclose(r[:90], 20.0)
    assert pts[0, 0] == pytest.approx(20.0) and pts[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_grid_validation_and_center():
    with pytest.raises(ValueError):
        CircularGrid(radial_step=30.0, max_radius=100.0)  # not a whole count
    with pytest.raises(ValueError):
        CircularGrid(azimuth_step=7.0)
    with pytest.raises(ValueError):
        CircularGrid(radial_step=0.0)
    grid = CircularGrid(radial_step=50.0, azimuth_step=90.0, max_radius=100.0,
                        center=(10.0, -5.0))
    assert grid.point_count == 8
    assert np.allclose(grid.points()[0], [60.0, -5.0])


def test_grid_visibility_flags():
    bmap = box(80.0, 120.0)
    grid = CircularGrid(radial_step=50.0, azimuth_step=10.0, max_radius=400.0)
    res = grid_visibility(grid, 60.0, bmap)
    assert res.positions.shape[0] == 8 * 36
    inside = np.hypot(res.positions[:, 0] - 100.0, res.positions[:, 1]) < 1e-9
    # the grid point at (100, 0) sits inside the footprint
    assert res.inside_building[np.hypot(res.positions[:, 0] - 100.0,
                                        res.positions[:, 1]) < 1.0].all()
    assert res.active.sum() == res.positions.shape[0] - res.inside_building.sum()
    # on the +x axis behind the box, the ray from (0, 0, 60) dips below the
    # 30 m roof inside [80, 120] exactly when x < 240
    on_axis = np.abs(res.positions[:, 1]) < 1e-6
    x = res.positions[:, 0]
    assert not res.los[on_axis & (x > 120.0) & (x < 240.0)].any()
    assert res.los[on_axis & (x > 240.0)].all()
    with pytest.raises(GeometryError):
        grid_visibility(grid, 0.0, bmap)
    with pytest.raises(GeometryError):
        grid_visibility(grid, 1.0, bmap, ue_height=2.0)


def test_rotation_symmetry():
    rng = np.random.default_rng(12)
    bmap = oracles.random_scene(rng, 5)
    rot = BuildingMap(buildings=tuple(
        Building(footprint=tuple((-y, x) for x, y in b.footprint), height=b.height)
        for b in bmap.buildings), origin=bmap.origin)
    grid = CircularGrid(radial_step=100.0, azimuth_step=6.0, max_radius=1000.0)
    a = grid_visibility(grid, 80.0, bmap)
    b = grid_visibility(grid, 80.0, rot)
    # rotating the scene by 90 degrees shifts each ring by a quarter turn
    # (the 6-degree azimuth step divides 90, so the grid maps onto itself)
    n_az = grid.n_azimuth
    shift = n_az // 4
    assert shift * 4 == n_az
    for ring in range(grid.n_radial):
        sl = slice(ring * n_az, (ring + 1) * n_az)
        assert np.array_equal(np.roll(a.los[sl], shift), b.los[sl])
        assert np.array_equal(np.roll(a.inside_building[sl], shift),
                              b.inside_building[sl])


def test_raising_receiver_never_loses_los():
    rng = np.random.default_rng(31)
    for _ in range(3):
        bmap = oracles.random_scene(rng, 6)
        grid = CircularGrid(radial_step=250.0, azimuth_step=12.0, max_radius=1500.0)
        previous = None
        for h in (30.0, 60.0, 120.0, 240.0, 480.0):
            res = grid_visibility(grid, h, bmap)
            if previous is not None:
                assert not np.any(previous & ~res.los)
            previous = res.los


def test_randomized_oracle_agreement():
    rng = np.random.default_rng(77)
    for _ in range(3):
        bmap = oracles.random_scene(rng, int(rng.integers(1, 11)))
        for _ in range(150):
            tx = (*rng.uniform(-1600, 1600, 2), rng.uniform(0, 6))
            rx_pt = (*rng.uniform(-1600, 1600, 2), rng.uniform(5, 320))
            assert los_visible(tx, rx_pt, bmap) == \
                oracles.oracle_visible(tx, rx_pt, bmap)


def test_empirical_plos_empty_map():
    empty = BuildingMap(buildings=())
    grid = CircularGrid(radial_step=100.0, azimuth_step=30.0, max_radius=500.0)
    results = [grid_visibility(grid, h, empty) for h in (50.0, 100.0)]
    curves = empirical_plos(results, bin_width=100.0)
    assert set(curves) == {50.0, 100.0}
    for rows in curves.values():
        assert rows
        for center, prob, count in rows:
            assert prob == 1.0
            assert count > 0
            assert center % 50.0 == 0.0
    with pytest.raises(ValueError):
        empirical_plos([])
    with pytest.raises(ValueError):
        empirical_plos(results, bin_width=0.0)


def test_empirical_plos_shadowed_fraction():
    bmap = box(80.0, 120.0, height=60.0)
    grid = CircularGrid(radial_step=40.0, azimuth_step=5.0, max_radius=800.0)
    res = grid_visibility(grid, 30.0, bmap)
    curves = empirical_plos([res], bin_width=200.0)
    rows = curves[30.0]
    assert any(prob < 1.0 for _, prob, _ in rows)


def test_aggregate_power_hand_sum(radio, exponents):
    empty = BuildingMap(buildings=())
    grid = CircularGrid(radial_step=100.0, azimuth_step=90.0, max_radius=200.0)
    res = grid_visibility(grid, 50.0, empty)
    want = _link_constant(radio) * sum(
        (r * r + 50.0 ** 2) ** -1.0 for r in (100.0, 100.0, 100.0, 100.0,
                                              200.0, 200.0, 200.0, 200.0))
    assert aggregate_power_site(res, radio, exponents) == pytest.approx(want, rel=1e-12)


def test_aggregate_power_split_exponents(radio, exponents):
    # a mixed scene must weigh blocked points with the NLoS exponent
    bmap = box(80.0, 120.0, height=60.0)
    grid = CircularGrid(radial_step=100.0, azimuth_step=45.0, max_radius=300.0)
    res = grid_visibility(grid, 30.0, bmap)
    keep = res.active
    r = res.dist_3d[keep]
    alpha = np.where(res.los[keep], 2.0, 3.0)
    want = _link_constant(radio) * np.sum(r ** -alpha)
    assert aggregate_power_site(res, radio, exponents) == pytest.approx(want, rel=1e-12)
    assert (~res.los[keep]).any()


def test_aggregate_power_fading(radio, exponents):
    empty = BuildingMap(buildings=())
    grid = CircularGrid(radial_step=50.0, azimuth_step=4.0, max_radius=1000.0)
    res = grid_visibility(grid, 80.0, empty)
    base = aggregate_power_site(res, radio, exponents, fading=False)
    faded1 = aggregate_power_site(res, radio, exponents, fading=True, seed=2)
    faded2 = aggregate_power_site(res, radio, exponents, fading=True, seed=2)
    faded3 = aggregate_power_site(res, radio, exponents, fading=True, seed=3)
    assert faded1 == faded2
    assert faded1 != faded3
    # unit-mean fading: a couple hundred seeds should bracket the mean
    sample = [aggregate_power_site(res, radio, exponents, fading=True, seed=s)
              for s in range(200)]
    assert np.mean(sample) == pytest.approx(base, rel=0.05)


def test_site_curve_empty_map_matches_direct_sum(radio, exponents):
    grid = CircularGrid(radial_step=100.0, azimuth_step=12.0, max_radius=1000.0)
    empty = BuildingMap(buildings=())
    heights = [40.0, 90.0, 160.0]
    curve = site_curve_over_heights(grid, empty, radio, exponents, heights)
    r = np.hypot(*grid.points().T)
    for h, power in curve.samples:
        want = _link_constant(radio) * np.sum(1.0 / (r * r + h * h))
        assert power == pytest.approx(want, rel=1e-12)


def test_site_curve_guard_exclusion(radio, exponents):
    grid = CircularGrid(radial_step=100.0, azimuth_step=30.0, max_radius=500.0)
    empty = BuildingMap(buildings=())
    full = site_curve_over_heights(grid, empty, radio, exponents, [60.0])
    trimmed = site_curve_over_heights(grid, empty, radio, exponents, [60.0],
                                      guard_radius=150.0)
    r = np.hypot(*grid.points().T)
    removed = _link_constant(radio) * np.sum(1.0 / (r[r < 150.0] ** 2 + 60.0 ** 2))
    assert full.powers_w[0] - trimmed.powers_w[0] == pytest.approx(removed, rel=1e-12)
    with pytest.raises(ValueError):
        site_curve_over_heights(grid, empty, radio, exponents, [60.0, 60.0])


def test_visibility_csv_rows(tmp_path, radio, exponents):
    bmap = box(80.0, 120.0)
    grid = CircularGrid(radial_step=50.0, azimuth_step=10.0, max_radius=400.0)
    res = grid_visibility(grid, 60.0, bmap)
    path = tmp_path / "vis.csv"
    write_visibility_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "point,x,y,R,los"
    assert len(lines) - 1 == int(res.active.sum())
