//! Monte Carlo campaigns: configuration, per-replication records, the four
//! experiments and their outputs.

pub mod config;
pub mod experiments;
pub mod io;
pub mod record;
pub mod svg;

pub use config::{derive_seed, ExperimentConfig, OutputFormat, Statistic};
pub use experiments::{
    run_clt, run_ld, run_moment_check, run_slln, CltReport, LdReport, MomentReport, SllnReport, StatisticRow,
};
pub use record::{run_grid, run_grid_point, run_replication, ExperimentRecord};
