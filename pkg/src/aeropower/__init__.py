"""Altitude-dependent aggregate received power toolkit.

Closed-form stochastic-geometry model of the expected aggregate power seen
by an elevated receiver above a Poisson field of ground transmitters, with
a seeded Monte Carlo oracle, a 3-D building occlusion engine, and a
spectrum-sweep measurement ingestion pipeline for model validation.
"""

from .units import dbm_from_watts, watts_from_dbm
from .gammainc import upper_gamma_zero, upper_gamma_neg1
from .los import (
    EnvironmentTriple,
    BreakpointParams,
    BreakpointLaws,
    FitError,
    URBAN,
    plos_exact,
    plos_exact_3d,
    plos_approx,
    fit_breakpoint,
    fit_breakpoint_samples,
    fit_laws,
    save_laws,
    load_laws,
)
from .analytics import (
    RadioConfig,
    PathlossExponents,
    ScenarioGeometry,
    friis_constant,
    expected_power_closed,
    expected_power_altitude,
    asymptote_power,
    expected_power_quadrature,
    power_special_r0_zero,
    power_special_r0_large,
    altitude_curve,
)
from .curves import AltitudePowerCurve, read_curve_csv, write_curve_csv
from .mc import (
    FixedTransmitterSet,
    RingSample,
    SimulationResult,
    read_fixed_set,
    sample_ring,
    simulate_power,
    simulate_power_curve,
    simulate_hybrid,
    truncation_bound,
)
from .visibility import (
    Building,
    BuildingMap,
    CircularGrid,
    VisibilityResult,
    los_visible,
    grid_visibility,
    aggregate_power_site,
    empirical_plos,
    site_curve_over_heights,
    read_map_file,
    write_map_file,
)
from .ingest import (
    SweepRecord,
    GpsFix,
    BandDef,
    AltitudeBin,
    AltitudePowerPoint,
    DataError,
    JoinedSweep,
    read_sweep_csv,
    read_gps_csv,
    write_sweep_csv,
    write_gps_csv,
    band_power,
    band_points,
    time_join,
    altitude_binning,
    load_band_table,
    read_binned_csv,
    write_binned_csv,
)
from .config import RunConfig, load_config, save_config

__version__ = "0.1.0"

__all__ = [
    "dbm_from_watts",
    "watts_from_dbm",
    "upper_gamma_zero",
    "upper_gamma_neg1",
    "EnvironmentTriple",
    "BreakpointParams",
    "BreakpointLaws",
    "URBAN",
    "plos_exact",
    "plos_exact_3d",
    "plos_approx",
    "FitError",
    "fit_breakpoint",
    "fit_breakpoint_samples",
    "fit_laws",
    "save_laws",
    "load_laws",
    "RadioConfig",
    "PathlossExponents",
    "ScenarioGeometry",
    "friis_constant",
    "expected_power_closed",
    "expected_power_altitude",
    "asymptote_power",
    "expected_power_quadrature",
    "power_special_r0_zero",
    "power_special_r0_large",
    "altitude_curve",
    "AltitudePowerCurve",
    "read_curve_csv",
    "write_curve_csv",
    "FixedTransmitterSet",
    "RingSample",
    "SimulationResult",
    "read_fixed_set",
    "sample_ring",
    "simulate_power",
    "truncation_bound",
    "simulate_power_curve",
    "simulate_hybrid",
    "Building",
    "BuildingMap",
    "CircularGrid",
    "VisibilityResult",
    "los_visible",
    "grid_visibility",
    "aggregate_power_site",
    "empirical_plos",
    "site_curve_over_heights",
    "read_map_file",
    "write_map_file",
    "SweepRecord",
    "GpsFix",
    "BandDef",
    "AltitudeBin",
    "AltitudePowerPoint",
    "DataError",
    "JoinedSweep",
    "read_sweep_csv",
    "read_gps_csv",
    "write_sweep_csv",
    "write_gps_csv",
    "band_power",
    "band_points",
    "time_join",
    "altitude_binning",
    "load_band_table",
    "read_binned_csv",
    "write_binned_csv",
    "RunConfig",
    "load_config",
    "save_config",
]
