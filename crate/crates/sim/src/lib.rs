//! Monte Carlo harness, CSV output and command line for the robust relay solver in
//! [`relay_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod verify;

pub use error::HarnessError;
pub use experiment::{
    parse_grid, run_sweep, trial_seed, ExperimentSpec, LinkParams, RateReport, ReceiveArray,
    SweepKind, SweepPoint,
};
pub use report::{emit_csv, parse_csv, read_csv, write_csv, ReportRow};
