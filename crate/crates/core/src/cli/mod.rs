//! Command-line front end: configuration and circuit files, end-to-end
//! runs of the three engines, and reports.

mod circuit_file;
mod config;
mod experiment;

pub use circuit_file::{parse_angle, parse_circuit, parse_circuit_str, read_matrix};
pub use config::{
    BellConfig, EngineSelection, EpsilonSource, ExperimentConfig, FrameChoice, InitialState,
    LeggettGargConfig, ScheduleConfig, MAX_ALL_SPECS_QUBITS, MAX_QUASI_QUBITS,
};
pub use experiment::{
    load_frame, resolve_epsilon, run_experiment, target_density, target_quasi, ComparisonReport,
    ComparisonRow, EXACT_AGREEMENT, Z_LIMIT,
};
