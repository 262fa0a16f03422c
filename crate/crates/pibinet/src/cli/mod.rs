//! Command harness: dataset generation, training, evaluation, benchmark
//! sweeps and well-data ingestion, each leaving a complete run manifest.

pub mod benchmark;
pub mod evaluate;
pub mod gen_data;
pub mod io;
pub mod manifest;
pub mod model_file;
pub mod train_cmd;
pub mod wells;

pub use benchmark::{benchmark_cmd, BenchmarkCell, BenchmarkConfig};
pub use evaluate::{evaluate_cmd, EvalMetrics};
pub use gen_data::{gen_data, GenDataConfig, Region, Scenario};
pub use model_file::ModelFile;
pub use train_cmd::{train_cmd, Method, SourceSetup, TrainCmdConfig};
pub use wells::{wells_cmd, WellsConfig};

use std::path::PathBuf;

/// Environment variable selecting the default output directory.
pub const OUT_DIR_ENV: &str = "PIBINET_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Process exit code for an error: 2 usage, 3 input data, 4 numerical.
pub fn exit_code(err: &crate::error::Error) -> i32 {
    use crate::error::Error::*;
    match err {
        InvalidConfig(_) | UnsupportedDimension(_) => 2,
        Parse { .. } | InputData(_) | Io(_) | Json(_) => 3,
        _ => 4,
    }
}
