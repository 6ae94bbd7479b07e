//! Catalogued studies, diagnostics and the driver that runs them.

pub mod diagnostics;
pub mod presets;
pub mod study;

pub use diagnostics::{
    find_peaks, l2_error, max_drift, nodal_l2_error, order_table, parity_defect, residual_series, ConvergenceRow, Peak,
    ResidualRow,
};
pub use presets::{
    halving_sequence, initial_condition, preset, ExperimentPreset, GaussianTerm, InitialCondition, StudyKind,
    STUDY_NAMES,
};
pub use study::{run_study, Progress, RunOptions, Snapshot, SnapshotSchedule, StudyOutput};
