//! Configuration, experiment orchestration and output writers.

mod config;
mod experiment;
mod output;

pub use config::{
    load_config, ConfigError, SimulationConfig, StrategyChoice, SweepParam, SweepSpec, DEFAULT_GAMMA_GRID,
    DEFAULT_XI_GRID, DESK_CELLS_PER_SIDE, DESK_NUM_STEPS, FULL_CELLS_PER_SIDE,
};
pub use experiment::{run_experiment, run_single, MetricsRecord};
pub use output::{write_metrics_csv, write_vtk, METRICS_HEADER};
