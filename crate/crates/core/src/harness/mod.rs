//! Error metrics, experiment pipelines and result files.

mod config;
mod experiments;
mod metrics;
mod pressure;
mod results;

pub use config::ExperimentConfig;
pub use experiments::{
    cylinder_pair, deform, frequency_run, run_cylinder_spatial_experiment, run_cylinder_with,
    run_frequency_experiment, run_square_spatial_experiment, run_strain_experiment, square_pair, CylinderConfig,
    CylinderOutcome, FrequencyConfig, FrequencyOutcome, QualityStudy, RemeshedPair, SquareConfig, SquareOutcome,
    StrainConfig, StrainOutcome, CYLINDER_HEIGHT, CYLINDER_RADIUS,
};
pub use metrics::{spatial_error, strain_error, values, ErrorSample, StrainErrors};
pub use pressure::{run_pressure_simulation, PressureConfig, PressureOutcome, SimulationRun, TimeSample, TIME_SERIES_HEADER};
pub use results::{write_results, ExperimentResult, LevelResult, RESULTS_HEADER};
