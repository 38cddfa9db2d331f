"""Command-line entry point: outputs, determinism and exit codes.

Every test drives main() in process with an argv list. Usage mistakes
surface as SystemExit(1) because the parser overrides argparse's exit
code; everything after parsing returns an int instead of raising.
"""

import os

import numpy as np
import pytest

from aeropower import (
    AltitudePowerCurve,
    Building,
    BuildingMap,
    load_laws,
    read_binned_csv,
    read_curve_csv,
    write_curve_csv,
    write_map_file,
)
from aeropower.cli import main

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

BASE_LINES = [
    "version = 1",
    "mu = 0.6",
    "kappa = 1.38",
    "heights = 20:100:40",
    "trials = 30",
    "seed = 3",
]

URBAN_LINES = [
    "version = 1",
    "delta = 0.3",
    "beta = 500.0",
    "gamma_param = 15.0",
    "heights = 20:100:40",
    "trials = 30",
    "seed = 3",
]


def write_config(tmp_path, lines, name="run.cfg"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def run(tmp_path, command, lines, *extra):
    config = write_config(tmp_path, lines)
    out = tmp_path / "out"
    rc = main([command, "--config", config, "--out", str(out), *extra])
    return rc, out


# ---------------------------------------------------------------- parsing

def test_no_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_unknown_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["transmogrify"])
    assert exc.value.code == 1


def test_unknown_flag_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["sosgad", "--bogus"])
    assert exc.value.code == 1


def test_missing_config_file_exits_one(tmp_path):
    rc = main(["sosgad", "--config", str(tmp_path / "absent.cfg"),
               "--out", str(tmp_path)])
    assert rc == 1


def test_unknown_config_key_exits_one(tmp_path):
    rc, _ = run(tmp_path, "sosgad", BASE_LINES + ["wibble = 3"])
    assert rc == 1


# ----------------------------------------------------------------- sosgad

def test_sosgad_writes_three_curves(tmp_path):
    rc, out = run(tmp_path, "sosgad", BASE_LINES)
    assert rc == 0
    curves = read_curve_csv(out / "sosgad.csv")
    assert [c.label for c in curves] == ["closed-form", "quadrature",
                                         "asymptote"]
    closed, quad, asym = curves
    assert np.array_equal(closed.heights, [20.0, 60.0, 100.0])
    # quadrature integrates the very model the closed form solves
    assert np.max(np.abs(closed.powers_dbm - quad.powers_dbm)) < 1e-6
    assert np.ptp(asym.powers_w) == 0.0


def test_sosgad_requires_laws_or_env(tmp_path):
    lines = ["version = 1", "heights = 20:100:40"]
    rc, _ = run(tmp_path, "sosgad", lines)
    assert rc == 1


def test_sosgad_rejects_other_exponents(tmp_path):
    rc, _ = run(tmp_path, "sosgad", BASE_LINES + ["alpha_nlos = 3.5"])
    assert rc == 1


def test_sosgad_rerun_is_byte_identical(tmp_path):
    config = write_config(tmp_path, BASE_LINES)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["sosgad", "--config", config, "--out", str(out_a)]) == 0
    assert main(["sosgad", "--config", config, "--out", str(out_b)]) == 0
    assert (out_a / "sosgad.csv").read_bytes() == \
        (out_b / "sosgad.csv").read_bytes()


def test_sosgad_plot_format_adds_svg(tmp_path):
    rc, out = run(tmp_path, "sosgad", BASE_LINES, "--format", "csv+plot")
    assert rc == 0
    svg = (out / "sosgad.svg").read_bytes()
    assert svg.startswith(b"<?xml")
    assert b"</svg>" in svg


def test_out_directory_is_created(tmp_path):
    config = write_config(tmp_path, BASE_LINES)
    nested = tmp_path / "deep" / "er" / "dir"
    assert main(["sosgad", "--config", config, "--out", str(nested)]) == 0
    assert (nested / "sosgad.csv").is_file()


# ---------------------------------------------------------------- fit-los

def test_fit_los_writes_laws_and_report(tmp_path):
    rc, out = run(tmp_path, "fit-los", URBAN_LINES)
    assert rc == 0
    laws, env, rmse = load_laws(out / "laws.txt")
    assert 0.54 <= laws.mu <= 0.66
    assert 1.24 <= laws.kappa <= 1.52
    assert env is not None and env.beta == 500.0
    assert rmse is not None and 0.0 < rmse < 0.06
    report = (out / "fit_report.txt").read_text(encoding="utf-8")
    assert "mu = " in report and "kappa = " in report
    # one fitted row per altitude in the fit grid
    rows = [ln for ln in report.splitlines()
            if ln and not ln.startswith(("#", "mu", "kappa"))]
    assert len(rows) >= 5


def test_fit_los_requires_environment(tmp_path):
    rc, _ = run(tmp_path, "fit-los", BASE_LINES)
    assert rc == 1


# ------------------------------------------------------------- montecarlo

def test_montecarlo_deterministic_and_seed_sensitive(tmp_path):
    config = write_config(tmp_path, URBAN_LINES)
    outs = [tmp_path / name for name in ("a", "b", "c")]
    assert main(["montecarlo", "--config", config, "--out", str(outs[0])]) == 0
    assert main(["montecarlo", "--config", config, "--out", str(outs[1])]) == 0
    assert main(["montecarlo", "--config", config, "--out", str(outs[2]),
                 "--seed", "7"]) == 0
    first = (outs[0] / "montecarlo.csv").read_bytes()
    assert first == (outs[1] / "montecarlo.csv").read_bytes()
    assert first != (outs[2] / "montecarlo.csv").read_bytes()
    (curve,) = read_curve_csv(outs[0] / "montecarlo.csv")
    assert np.array_equal(curve.heights, [20.0, 60.0, 100.0])
    assert np.all(curve.powers_w > 0.0)


def test_montecarlo_requires_environment(tmp_path):
    rc, _ = run(tmp_path, "montecarlo", BASE_LINES)
    assert rc == 1


# --------------------------------------------------------------- raytrace

def box_map(tmp_path):
    bmap = BuildingMap(buildings=(
        Building(footprint=((80.0, -20.0), (120.0, -20.0),
                            (120.0, 20.0), (80.0, 20.0)), height=30.0),))
    path = tmp_path / "site.map"
    write_map_file(path, bmap)
    return str(path)


def test_raytrace_writes_curve_and_dump(tmp_path, capsys):
    lines = ["version = 1", "heights = 60:120:60", "seed = 1",
             f"map_file = {box_map(tmp_path)}"]
    rc, out = run(tmp_path, "raytrace", lines)
    assert rc == 0
    (curve,) = read_curve_csv(out / "raytrace.csv")
    assert np.array_equal(curve.heights, [60.0, 120.0])
    assert np.all(curve.powers_w > 0.0)
    dump = (out / "visibility.csv").read_text(encoding="utf-8").splitlines()
    assert dump[0] == "point,x,y,R,los"
    assert len(dump) > 8000
    assert "grid points have line of sight" in capsys.readouterr().out


def test_raytrace_requires_map(tmp_path):
    rc, _ = run(tmp_path, "raytrace", ["version = 1", "heights = 60:120:60"])
    assert rc == 1


def test_raytrace_corrupt_map_exits_two(tmp_path):
    bad = tmp_path / "broken.map"
    bad.write_text("not a map at all\n", encoding="utf-8")
    lines = ["version = 1", "heights = 60:120:60", f"map_file = {bad}"]
    rc, _ = run(tmp_path, "raytrace", lines)
    assert rc == 2


# ----------------------------------------------------------------- ingest

def ingest_lines(bin_width=50.0):
    return [
        "version = 1",
        f"sweep_file = {os.path.join(DATA_DIR, 'sweeps.csv')}",
        f"gps_file = {os.path.join(DATA_DIR, 'gps.csv')}",
        f"bin_width_m = {bin_width}",
    ]


def test_ingest_reproduces_golden_bytes(tmp_path, capsys):
    rc, out = run(tmp_path, "ingest", ingest_lines())
    assert rc == 0
    golden = os.path.join(DATA_DIR, "golden_binned.csv")
    with open(golden, "rb") as fh:
        assert (out / "ingest_binned.csv").read_bytes() == fh.read()
    printed = capsys.readouterr().out
    assert "1 dropped" in printed
    binned = read_binned_csv(out / "ingest_binned.csv")
    assert list(binned) == ["UL 30"]
    assert [row[4] for row in binned["UL 30"]] == [1, 6, 5, 2]


def test_ingest_requires_both_inputs(tmp_path):
    lines = ["version = 1",
             f"sweep_file = {os.path.join(DATA_DIR, 'sweeps.csv')}"]
    rc, _ = run(tmp_path, "ingest", lines)
    assert rc == 1


def test_ingest_corrupt_sweeps_exits_two(tmp_path):
    bad = tmp_path / "bad_sweeps.csv"
    bad.write_text("time_s,stuff\n1,2\n", encoding="utf-8")
    lines = ingest_lines()
    lines[1] = f"sweep_file = {bad}"
    rc, _ = run(tmp_path, "ingest", lines)
    assert rc == 2


# ---------------------------------------------------------------- compare

def curve_file(tmp_path, name, samples, label):
    path = tmp_path / name
    write_curve_csv(path, [AltitudePowerCurve(samples=tuple(samples),
                                              label=label)])
    return str(path)


def test_compare_identical_files_report_zero_gap(tmp_path, capsys):
    samples = [(20.0, 1e-6), (60.0, 5e-7), (100.0, 4e-7)]
    path = curve_file(tmp_path, "a.csv", samples, "closed-form")
    out = tmp_path / "out"
    rc = main(["compare", "--out", str(out), path, path])
    assert rc == 0
    report = (out / "compare_report.txt").read_text(encoding="utf-8")
    assert "closed-form vs closed-form (2): max |gap| = 0.000000 dB" in report
    assert "max gap: 0.000000 dB" in capsys.readouterr().out
    table = (out / "compare.csv").read_text(encoding="utf-8").splitlines()
    assert table[0] == "height_m,closed-form dBm,closed-form (2) dBm"
    assert len(table) == 1 + len(samples)


def test_compare_aligns_on_shared_grid(tmp_path):
    # overlap is [60, 100]; each curve is sampled there by interpolation
    a = curve_file(tmp_path, "a.csv", [(20.0, 8e-7), (100.0, 4e-7)], "wide")
    b = curve_file(tmp_path, "b.csv", [(60.0, 6e-7), (140.0, 2e-7)], "high")
    out = tmp_path / "out"
    assert main(["compare", "--out", str(out), a, b]) == 0
    rows = (out / "compare.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "height_m,wide dBm,high dBm"
    heights = [float(r.split(",")[0]) for r in rows[1:]]
    assert heights == [60.0, 100.0]
    got_a60 = float(rows[1].split(",")[1])
    want_a60 = 10.0 * np.log10(6e-7) + 30.0  # linear in watts at h = 60
    assert got_a60 == pytest.approx(want_a60, abs=1e-6)


def test_compare_via_config_file_list(tmp_path):
    a = curve_file(tmp_path, "a.csv", [(20.0, 8e-7), (100.0, 4e-7)], "one")
    b = curve_file(tmp_path, "b.csv", [(20.0, 7e-7), (100.0, 3e-7)], "two")
    lines = ["version = 1", f"compare_files = {a},{b}"]
    rc, out = run(tmp_path, "compare", lines)
    assert rc == 0
    assert (out / "compare.csv").is_file()
    assert (out / "compare_report.txt").is_file()


def test_compare_needs_two_curves(tmp_path):
    a = curve_file(tmp_path, "a.csv", [(20.0, 8e-7), (100.0, 4e-7)], "one")
    rc = main(["compare", "--out", str(tmp_path / "out"), a])
    assert rc == 1


def test_compare_missing_file_exits_two(tmp_path):
    a = curve_file(tmp_path, "a.csv", [(20.0, 8e-7), (100.0, 4e-7)], "one")
    rc = main(["compare", "--out", str(tmp_path / "out"), a,
               str(tmp_path / "missing.csv")])
    assert rc == 2


def test_compare_disjoint_ranges_exit_two(tmp_path):
    a = curve_file(tmp_path, "a.csv", [(20.0, 8e-7), (40.0, 4e-7)], "low")
    b = curve_file(tmp_path, "b.csv", [(100.0, 6e-7), (200.0, 2e-7)], "high")
    rc = main(["compare", "--out", str(tmp_path / "out"), a, b])
    assert rc == 2


def test_model_vs_simulation_end_to_end(tmp_path):
    """The full pipeline: model curves, simulated curve, compare report.

    400 trials keeps this quick; the model-vs-simulation gap is then
    the smooth-approximation error plus a little noise, well under the
    half-dB the two are expected to agree within at release scale.
    """
    lines = [
        "version = 1",
        "delta = 0.3", "beta = 500.0", "gamma_param = 15.0",
        "mu = 0.6", "kappa = 1.38",
        "heights = 40:200:80",
        "trials = 400",
        "seed = 9",
    ]
    config = write_config(tmp_path, lines)
    out = tmp_path / "out"
    assert main(["sosgad", "--config", config, "--out", str(out)]) == 0
    assert main(["montecarlo", "--config", config, "--out", str(out)]) == 0
    assert main(["compare", "--out", str(out),
                 str(out / "sosgad.csv"), str(out / "montecarlo.csv")]) == 0
    report = (out / "compare_report.txt").read_text(encoding="utf-8")
    (line,) = [ln for ln in report.splitlines()
               if ln.startswith("closed-form vs monte-carlo:")]
    gap = float(line.split("=")[1].split("dB")[0])
    assert 0.0 <= gap < 0.5
