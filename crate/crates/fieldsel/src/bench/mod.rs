//! Configuration-driven experiment runner: reproduces the simulation study
//! (variance scaling, penalty sweep, risk ratios) as CSV tables with plot
//! scripts and metadata sidecars.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, ExperimentConfig, PStar};
pub use report::{emit_outputs, read_table_csv, ColumnType, FigureKind, ResultTable, Value};
pub use run::{
    derive_stream, fnv1a64, run_risk_ratio, run_risk_ratio_with_source, run_slope_figure,
    run_variance_experiment, ExperimentOutput, PluginSource,
};
