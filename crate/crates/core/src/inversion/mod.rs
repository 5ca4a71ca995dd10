//! Iterative reconstruction of a pair potential from a target RDF.

pub mod config;
pub mod driver;
pub mod hncgn;
pub mod history;
pub mod metrics;
pub mod steps;

pub use config::{ForwardKind, Scheme, SchemeConfig};
pub use driver::{run_inversion, ForwardOperator, ForwardResult, HncForward};
pub use hncgn::{
    antiderivative_matrix, hncgn_step, pressure_constraint_vector, GaussNewton, HncgnOutcome,
};
pub use history::{
    load_run_dir, read_history_csv, write_history_csv, HistoryRow, IterationFailure,
    IterationHistory, IterationRecord, RunDirectory,
};
pub use metrics::{data_fit, error_metric, sup_distance};
pub use steps::{
    hncn_step, hncn_step_with, ibi_step, ihnc_step, ihnc_step_with, lwr_step, lwr_step_with,
    pmf_initial_guess, pyv_step, pyv_step_with, relative_step, TargetLinearization,
};
