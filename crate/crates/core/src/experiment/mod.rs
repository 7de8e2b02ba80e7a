//! Experiment configuration, orchestration and file output.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    parse_config, DivisorEntry, ExperimentKind, Family, GeometryConfig, GridConfig, KwConfig,
    KwTermConfig, OutputConfig, RunConfig, SweepGrid, TermConfig,
};
pub use output::{
    csv_text, emit_csv, emit_heatmap, read_pgm, svg_text, write_atomic, HeatmapSidecar, CSV_HEADER,
};
pub use run::{
    load_manifest, run, summarize, ErrorRecord, KwSummary, RunManifest, RunStatus, StageTiming,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// `line` and `column` are 1-based; 0 when the parser gave no position.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

impl OutputError {
    pub fn new(path: &Path, source: std::io::Error) -> Self {
        OutputError {
            path: path.to_path_buf(),
            source,
        }
    }
}
