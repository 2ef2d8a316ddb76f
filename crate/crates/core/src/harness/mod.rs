//! Experiment orchestration: config files, synthetic two-moons data,
//! shipped hyperparameter presets, method comparison across seeds, and
//! report/plot-data emission.

mod config;
mod experiment;
mod presets;
mod scatter;
mod two_moons;

pub use config::{
    DatasetSource, ExperimentConfig, ExperimentSection, GridSection, Method, SplitConfig,
    TtganSection,
};
pub use experiment::{
    evaluate_model, load_dataset, run_experiment, run_grid_search, DatasetSummary, GridOutcome,
    MethodAggregate, RunReport, SeedOutcome,
};
pub use presets::{available_presets, load_preset, TtganPreset, PRESETS};
pub use scatter::write_scatter_tsv;
pub use two_moons::{make_two_moons, TwoMoonsSpec};
