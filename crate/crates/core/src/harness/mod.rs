//! Experiment harness: scenario documents, convergence sweeps, reports.

pub mod config;
pub mod report;
pub mod sweep;

pub use config::{
    builtin_names, builtin_scenario, default_ode_step, matrix_value, parse_kraus_document,
    parse_scenario, scenario_from_value, serialize_scenario, Scenario, SystemSpec,
};
pub use report::{
    emit_report, emit_simulation, ConvergenceReport, ReportFormat, ReportMetadata, ReportRow,
    SimulationReport, SimulationRow,
};
pub use sweep::{
    coefficients_for, fit_order, run_matrix_element_convergence, run_semigroup_convergence,
    run_simulation, SimulationMode,
};
