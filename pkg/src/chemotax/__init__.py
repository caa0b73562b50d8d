"""Finite-volume solver for a chemotaxis system with consumed nutrient.

The model couples advective transport of an active cell density along the
gradient of an elliptically determined chemoattractant with a diffusing
nutrient that converts active cells to an inactive deposit.  The package
provides the solver, structural diagnostics (conservation and norm-growth
residuals), comparison-ODE bounds, blow-up detection and scanning tools,
and a small CLI.
"""

from .config import OdeTaskSpec, RunConfig, ScanSpec, load_config, parse_config
from .diagnostics import (
    BlowupVerdict,
    DiagConfig,
    DiagRecord,
    detect_blowup,
    mass_law_residual,
    record,
    zzz_residual,
)
from .dynamics import (
    RunResult,
    State,
    StepConfig,
    Trajectory,
    advance,
    cfl_dt,
    run,
    validate_state,
)
from .elliptic import (
    EllipticConfig,
    EllipticConstants,
    helmholtz_residual,
    measure_elliptic_constants,
    solve_helmholtz,
    solve_shifted,
)
from .errors import (
    ChemotaxError,
    ConfigError,
    DtCollapse,
    ScanError,
    SolverFailure,
    SweepError,
)
from .grid import (
    Field,
    Grid,
    GridSpec,
    build_grid,
    dirichlet_energy,
    integrate,
    laplacian_neumann,
    lp_norm,
    w1p_norm,
)
from .io import read_snapshot, read_timeseries, write_snapshot, write_timeseries
from .model import (
    KineticsSpec,
    ModelParams,
    ValidationReport,
    b_eval,
    g_eval,
    validate_kinetics,
)
from .ode import (
    BlowupOdeParams,
    BlowupOdeResult,
    GrowthOdeParams,
    GrowthOdeResult,
    blowup_threshold,
    fit_comparison_constant,
    integrate_blowup_ode,
    integrate_growth_ode,
    ode_comparator_check,
    pure_power_blowup_time,
)
from .scenarios import (
    EpsStudySpec,
    InitialCondition,
    ScanResult,
    Scenario,
    SweepResult,
    blowup_scan,
    epsilon_sweep,
    make_initial_condition,
    make_initial_state,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupOdeParams",
    "BlowupOdeResult",
    "BlowupVerdict",
    "ChemotaxError",
    "ConfigError",
    "DiagConfig",
    "DiagRecord",
    "DtCollapse",
    "EllipticConfig",
    "EllipticConstants",
    "EpsStudySpec",
    "Field",
    "Grid",
    "GridSpec",
    "GrowthOdeParams",
    "GrowthOdeResult",
    "InitialCondition",
    "KineticsSpec",
    "ModelParams",
    "OdeTaskSpec",
    "RunConfig",
    "RunResult",
    "ScanError",
    "ScanResult",
    "ScanSpec",
    "Scenario",
    "SolverFailure",
    "State",
    "StepConfig",
    "SweepError",
    "SweepResult",
    "Trajectory",
    "ValidationReport",
    "advance",
    "b_eval",
    "blowup_scan",
    "blowup_threshold",
    "build_grid",
    "cfl_dt",
    "detect_blowup",
    "dirichlet_energy",
    "epsilon_sweep",
    "fit_comparison_constant",
    "g_eval",
    "helmholtz_residual",
    "integrate",
    "integrate_blowup_ode",
    "integrate_growth_ode",
    "laplacian_neumann",
    "load_config",
    "lp_norm",
    "make_initial_condition",
    "make_initial_state",
    "mass_law_residual",
    "measure_elliptic_constants",
    "ode_comparator_check",
    "parse_config",
    "pure_power_blowup_time",
    "read_snapshot",
    "read_timeseries",
    "record",
    "run",
    "run_scenario",
    "solve_helmholtz",
    "solve_shifted",
    "validate_kinetics",
    "validate_state",
    "w1p_norm",
    "write_snapshot",
    "write_timeseries",
    "zzz_residual",
]
