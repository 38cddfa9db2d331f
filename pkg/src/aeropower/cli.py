"""Command-line front end: configuration in, CSV (and optional SVG) out.

Subcommands: sosgad, fit-los, montecarlo, raytrace, ingest, compare.
Every command reads one RunConfig (all keys defaulted when --config is
omitted), writes its products into --out, and is byte-reproducible for a
fixed config and seed. Exit codes: 0 success, 1 configuration error,
2 data error, 3 numeric failure.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .analytics import (NumericsError, altitude_curve, asymptote_power,
                        expected_power_quadrature)
from .config import ConfigError, RunConfig, load_config
from .curves import AltitudePowerCurve, read_curve_csv, write_curve_csv
from .ingest import (DataError, altitude_binning, band_points, load_band_table,
                     read_gps_csv, read_sweep_csv, time_join, write_binned_csv)
from .los import FitError, fit_laws, plos_approx, save_laws
from .mc import read_fixed_set, simulate_hybrid, simulate_power_curve
from .units import dbm_from_watts
from .visibility import (GeometryError, CircularGrid, grid_visibility,
                         read_map_file, site_curve_over_heights,
                         write_visibility_csv)


def _resolve_laws(config):
    """Configured laws, or laws fitted from the configured environment."""
    if config.laws is not None:
        return config.laws
    if config.env is None:
        raise ConfigError("need scaling laws (mu and kappa) or an environment "
                          "triple (delta, beta, gamma_param) to fit them from")
    return fit_laws(config.env).laws


def _require(config, attr, why):
    value = getattr(config, attr)
    if value is None:
        raise ConfigError(f"{attr} is required {why}")
    return value


def _plots_wanted(args):
    return args.format == "csv+plot"


def cmd_sosgad(config, out_dir, want_plot):
    """Closed-form, quadrature and asymptote curves for one configuration."""
    if (config.exponents.alpha_los, config.exponents.alpha_nlos) != (2.0, 3.0):
        raise ConfigError("the closed form exists only for pathloss exponents "
                          "(2, 3); adjust alpha_los/alpha_nlos")
    laws = _resolve_laws(config)
    closed = altitude_curve(config.heights, config.radio, laws, config.density,
                            config.guard_radius, label="closed-form")
    quad_samples = []
    for h in config.heights:
        params = laws.at_height(h)
        value = expected_power_quadrature(
            config.scenario_at(h), config.radio, config.exponents,
            lambda R: plos_approx(R, h, laws), points=[params.r_bp])
        quad_samples.append((float(h), value))
    quad = AltitudePowerCurve(samples=tuple(quad_samples), label="quadrature")
    flat = asymptote_power(config.radio, config.density, laws)
    asym = AltitudePowerCurve(samples=tuple((float(h), flat)
                                            for h in config.heights),
                              label="asymptote")
    csv_path = os.path.join(out_dir, "sosgad.csv")
    write_curve_csv(csv_path, [closed, quad, asym])
    gap = float(np.max(np.abs(closed.powers_dbm - quad.powers_dbm)))
    print(f"wrote {csv_path} (closed form vs quadrature: "
          f"max gap {gap:.3e} dB; asymptote {dbm_from_watts(flat):.4f} dBm)")
    if want_plot:
        from .plotting import plot_curves
        svg_path = os.path.join(out_dir, "sosgad.svg")
        plot_curves(svg_path, [closed, quad, asym])
        print(f"wrote {svg_path}")


def cmd_fit_los(config, out_dir, want_plot):
    """Fit the break-point scaling laws and write laws file plus report."""
    if config.env is None:
        raise ConfigError("fit-los needs an environment triple "
                          "(delta, beta, gamma_param)")
    fit = fit_laws(config.env)
    rmse = float(np.mean([row[3] for row in fit.per_height]))
    laws_path = os.path.join(out_dir, "laws.txt")
    save_laws(laws_path, fit.laws, config.env, rmse=rmse)
    report_path = os.path.join(out_dir, "fit_report.txt")
    lines = ["# per-height break-point fits",
             "# height_m  k_per_m  r_bp_m  rmse"]
    for h, k, r_bp, err in fit.per_height:
        lines.append(f"{h:10.3f}  {k:.8e}  {r_bp:14.6f}  {err:.3e}")
    lines.append("")
    lines.append(f"mu = {fit.laws.mu!r} (std {fit.mu_std:.3e})")
    lines.append(f"kappa = {fit.laws.kappa!r} (std {fit.kappa_std:.3e})")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {laws_path} and {report_path} "
          f"(mu = {fit.laws.mu:.4f}, kappa = {fit.laws.kappa:.4f})")


def cmd_montecarlo(config, out_dir, want_plot):
    """Simulated mean power curve; adds a hybrid curve when towers are given."""
    if config.env is None:
        raise ConfigError("montecarlo needs an environment triple "
                          "(delta, beta, gamma_param) for the LoS model")
    curve = simulate_power_curve(config.heights, config.radio, config.env,
                                 density=config.density,
                                 guard_radius=config.guard_radius,
                                 outer_radius=config.outer_radius,
                                 exponents=config.exponents,
                                 trials=config.trials, seed=config.seed,
                                 fading=config.mc_fading)
    curves = [curve]
    if config.tower_file is not None:
        origin = None
        if config.map_file is not None:
            origin = read_map_file(config.map_file).origin
        fixed = read_fixed_set(config.tower_file, origin=origin)
        scenario = config.scenario_at(config.heights[0])
        curves.append(simulate_hybrid(fixed, scenario, config.radio,
                                      config.exponents, config.env,
                                      trials=config.trials, seed=config.seed,
                                      heights=config.heights,
                                      fading=config.mc_fading))
    csv_path = os.path.join(out_dir, "montecarlo.csv")
    write_curve_csv(csv_path, curves)
    hw = np.asarray(curve.half_widths, dtype=float)
    print(f"wrote {csv_path} ({config.trials} trials per height; "
          f"widest 95% half-interval {hw.max():.3e} W)")
    if want_plot:
        from .plotting import plot_curves
        svg_path = os.path.join(out_dir, "montecarlo.svg")
        plot_curves(svg_path, curves)
        print(f"wrote {svg_path}")


def cmd_raytrace(config, out_dir, want_plot):
    """Site visibility curve over heights plus a per-point LoS dump."""
    map_path = _require(config, "map_file", "to ray-trace against")
    bmap = read_map_file(map_path)
    grid = CircularGrid()
    curve = site_curve_over_heights(grid, bmap, config.radio, config.exponents,
                                    config.heights,
                                    guard_radius=config.guard_radius,
                                    ue_height=config.ue_height,
                                    fading=config.raytrace_fading,
                                    seed=config.seed)
    csv_path = os.path.join(out_dir, "raytrace.csv")
    write_curve_csv(csv_path, curve)
    dump_height = float(config.heights[0])
    result = grid_visibility(grid, dump_height, bmap,
                             ue_height=config.ue_height)
    dump_path = os.path.join(out_dir, "visibility.csv")
    write_visibility_csv(dump_path, result)
    n_active = int(result.active.sum())
    n_los = int(result.los[result.active].sum())
    print(f"wrote {csv_path} and {dump_path} (at {dump_height:g} m: "
          f"{n_los}/{n_active} grid points have line of sight)")
    if want_plot:
        from .plotting import plot_curves, plot_visibility
        curve_svg = os.path.join(out_dir, "raytrace.svg")
        plot_curves(curve_svg, [curve], title="Site aggregate power vs altitude")
        vis_svg = os.path.join(out_dir, "visibility.svg")
        plot_visibility(vis_svg, result, bmap)
        print(f"wrote {curve_svg} and {vis_svg}")


def cmd_ingest(config, out_dir, want_plot):
    """Sweeps + GPS to altitude-binned per-band power statistics."""
    sweep_path = _require(config, "sweep_file", "to ingest")
    gps_path = _require(config, "gps_file", "to ingest")
    sweeps = read_sweep_csv(sweep_path)
    fixes = read_gps_csv(gps_path, site_elevation=config.site_elevation)
    joined, dropped = time_join(sweeps, fixes, max_skew=config.max_skew)
    print(f"joined {len(joined)} of {len(sweeps)} sweeps "
          f"({dropped} dropped beyond {config.max_skew:g} s skew)")
    bands = load_band_table(config.bands_file)
    binned = {}
    for band in bands:
        try:
            points = band_points(joined, band)
        except DataError:
            print(f"band {band.name!r} does not overlap the sweeps; skipped")
            continue
        binned[band.name] = altitude_binning(points, config.bin_width)
    if not binned:
        raise DataError("no configured band overlaps the sweep span")
    csv_path = os.path.join(out_dir, "ingest_binned.csv")
    write_binned_csv(csv_path, binned)
    print(f"wrote {csv_path} ({', '.join(binned)})")
    if want_plot:
        from .plotting import plot_binned
        svg_path = os.path.join(out_dir, "ingest.svg")
        plot_binned(svg_path, binned)
        print(f"wrote {svg_path}")


def cmd_compare(config, out_dir, want_plot, files):
    """Align curve CSVs on a shared height grid; report pairwise gaps."""
    paths = list(files) + list(config.compare_files)
    if len(paths) < 2:
        raise ConfigError("compare needs at least two curve CSV paths "
                          "(positional arguments or compare_files)")
    curves = []
    for path in paths:
        if not os.path.isfile(path):
            raise DataError(f"curve file does not exist: {path}")
        curves.extend(read_curve_csv(path))
    labels = []
    for curve in curves:
        label = curve.label or "curve"
        if label in labels:
            suffix = 2
            while f"{label} ({suffix})" in labels:
                suffix += 1
            label = f"{label} ({suffix})"
        labels.append(label)
    lo = max(curve.heights[0] for curve in curves)
    hi = min(curve.heights[-1] for curve in curves)
    if lo > hi:
        raise DataError("curves share no altitude range")
    grid = np.unique(np.concatenate([
        curve.heights[(curve.heights >= lo) & (curve.heights <= hi)]
        for curve in curves] + [np.array([lo, hi])]))
    table = np.vstack([dbm_from_watts(curve.interpolate_w(grid))
                       for curve in curves])
    csv_path = os.path.join(out_dir, "compare.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["height_m"] + [f"{lab} dBm" for lab in labels])
                 + "\n")
        for row in range(grid.size):
            cells = [f"{grid[row]:.6f}"] + [f"{table[i, row]:.8f}"
                                            for i in range(len(curves))]
            fh.write(",".join(cells) + "\n")
    report_lines = []
    worst = (0.0, "", "", 0.0)
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            diff = np.abs(table[i] - table[j])
            at = int(np.argmax(diff))
            gap = float(diff[at])
            report_lines.append(f"{labels[i]} vs {labels[j]}: max |gap| = "
                                f"{gap:.6f} dB at h = {grid[at]:g} m")
            if gap >= worst[0]:
                worst = (gap, labels[i], labels[j], float(grid[at]))
    report_path = os.path.join(out_dir, "compare_report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(report_lines) + "\n")
    print(f"wrote {csv_path} and {report_path}")
    print(f"max gap: {worst[0]:.6f} dB ({worst[1]} vs {worst[2]} "
          f"at h = {worst[3]:g} m)")
    if want_plot:
        from .plotting import plot_curves
        aligned = [AltitudePowerCurve(samples=tuple(zip(grid.tolist(),
                                                        curve.interpolate_w(grid).tolist())),
                                      label=labels[i])
                   for i, curve in enumerate(curves)]
        svg_path = os.path.join(out_dir, "compare.svg")
        plot_curves(svg_path, aligned, title="Curve comparison")
        print(f"wrote {svg_path}")


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors: exit code 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="aeropower",
                     description="Altitude-dependent aggregate received power: "
                                 "models, simulation, visibility, ingestion.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=None, metavar="PATH",
                        help="run configuration file (defaults when omitted)")
        sp.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (created if missing)")
        sp.add_argument("--seed", type=int, default=None, metavar="N",
                        help="override the configured seed")
        sp.add_argument("--format", choices=("csv", "csv+plot"), default="csv",
                        help="emit CSV only, or CSV plus SVG plots")
        return sp

    add("sosgad", "closed-form, quadrature and asymptote power curves")
    add("fit-los", "fit break-point scaling laws for an environment")
    add("montecarlo", "simulated mean power curve (hybrid when towers given)")
    add("raytrace", "building-map visibility curve and LoS dump")
    add("ingest", "sweeps + GPS to altitude-binned band power")
    compare = add("compare", "overlay curve CSVs and report max gaps")
    compare.add_argument("files", nargs="*", metavar="CURVE_CSV",
                         help="curve files to compare (adds to compare_files)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        os.makedirs(args.out, exist_ok=True)
        want_plot = _plots_wanted(args)
        if args.command == "sosgad":
            cmd_sosgad(config, args.out, want_plot)
        elif args.command == "fit-los":
            cmd_fit_los(config, args.out, want_plot)
        elif args.command == "montecarlo":
            cmd_montecarlo(config, args.out, want_plot)
        elif args.command == "raytrace":
            cmd_raytrace(config, args.out, want_plot)
        elif args.command == "ingest":
            cmd_ingest(config, args.out, want_plot)
        else:
            cmd_compare(config, args.out, want_plot, args.files)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericsError, FitError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (GeometryError, DataError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
