//! The EDA loop and its operators.

mod bank;
mod eda;
mod operators;
mod presets;
mod select;
mod temperature;

pub use bank::{Entry, SolutionBank};
pub use eda::{
    run_eda, EdaConfig, FittedModel, GenerationView, ModelKind, Observer, PopulationUpdate, RunRecord, RunResult,
    SelectionPolicy, SolverConfig, StopReason,
};
pub use operators::{mutate, two_point_crossover, two_point_crossover_at};
pub use presets::Preset;
pub use select::{boltzmann_select, boltzmann_weights, greedy_select, tournament_select, Pool};
pub use temperature::{
    adaptive_temperature, annealed_temperature, initial_temperature, TemperatureSchedule, FLOOR_TEMPERATURE,
};

pub mod constants {
    pub use super::presets::{
        CALL_BUDGET, CHAIN_SMOOTHING, GEO_GENERATIONS, GEO_INITIAL, MUTATION_RATE, POPULATION, PROTES_SAMPLES,
        PROTES_TRAIN, TOP_K_POOL, TOURNAMENT_ARITY,
    };
}
