//! The solver configurations used in the benchmark comparison, plus the
//! portfolio-study protocol.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eda::{EdaConfig, ModelKind, PopulationUpdate, SelectionPolicy, SolverConfig};
use super::select::Pool;
use super::temperature::TemperatureSchedule;
use crate::error::Error;
use crate::models::TrainConfig;

pub const POPULATION: usize = 1000;
pub const CALL_BUDGET: usize = 60_000;
pub const MUTATION_RATE: f64 = 0.01;
/// Boltzmann pool size of the first TN solver.
pub const TOP_K_POOL: usize = 1000;
pub const PROTES_TRAIN: usize = 10;
pub const PROTES_SAMPLES: usize = 100;
pub const TOURNAMENT_ARITY: usize = 3;
pub const CHAIN_SMOOTHING: f64 = 1.0;
/// Random strings evaluated before the first portfolio-study generation.
pub const GEO_INITIAL: usize = 100;
pub const GEO_GENERATIONS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "TN1")]
    Tn1,
    #[serde(rename = "TN2")]
    Tn2,
    #[serde(rename = "TN3")]
    Tn3,
    #[serde(rename = "BN1")]
    Bn1,
    #[serde(rename = "BN2")]
    Bn2,
    #[serde(rename = "GA1")]
    Ga1,
    #[serde(rename = "GA2")]
    Ga2,
    #[serde(rename = "GEO")]
    Geo,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Tn1,
        Preset::Tn2,
        Preset::Tn3,
        Preset::Bn1,
        Preset::Bn2,
        Preset::Ga1,
        Preset::Ga2,
        Preset::Geo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tn1 => "TN1",
            Preset::Tn2 => "TN2",
            Preset::Tn3 => "TN3",
            Preset::Bn1 => "BN1",
            Preset::Bn2 => "BN2",
            Preset::Ga1 => "GA1",
            Preset::Ga2 => "GA2",
            Preset::Geo => "GEO",
        }
    }

    pub fn config(self) -> SolverConfig {
        let annealed_top = SelectionPolicy::Boltzmann {
            schedule: TemperatureSchedule::annealed(),
            pool: Pool::TopK(TOP_K_POOL),
        };
        let tournament = SelectionPolicy::Tournament {
            arity: TOURNAMENT_ARITY,
        };
        let generational = |mutation_rate: f64, update: PopulationUpdate| EdaConfig {
            n_parents: POPULATION,
            n_children: POPULATION,
            generations: CALL_BUDGET / POPULATION,
            initial_population: POPULATION,
            mutation_rate,
            tensor_noise: 0.0,
            call_budget: CALL_BUDGET,
            population_update: update,
            elitism: false,
        };
        let born = ModelKind::BornMachine {
            train: TrainConfig::solver(),
        };
        let chain = ModelKind::ChainBayes {
            smoothing: CHAIN_SMOOTHING,
        };
        let crossover = ModelKind::Crossover { rate: 1.0 };
        let (model, selection, eda) = match self {
            Preset::Tn1 => (born, annealed_top, generational(MUTATION_RATE, PopulationUpdate::AppendToBank)),
            Preset::Tn2 => (
                born,
                SelectionPolicy::Boltzmann {
                    schedule: TemperatureSchedule::annealed(),
                    pool: Pool::AllUnique,
                },
                generational(0.0, PopulationUpdate::AppendToBank),
            ),
            Preset::Tn3 => (
                ModelKind::PositiveMps {
                    train: TrainConfig {
                        fresh_init: false,
                        ..TrainConfig::solver()
                    },
                },
                SelectionPolicy::GreedyTopK { k: PROTES_TRAIN },
                EdaConfig {
                    n_parents: PROTES_TRAIN,
                    n_children: PROTES_SAMPLES,
                    generations: CALL_BUDGET / PROTES_SAMPLES,
                    initial_population: PROTES_SAMPLES,
                    ..generational(0.0, PopulationUpdate::ReplaceWithNewUnique)
                },
            ),
            Preset::Bn1 => (chain, annealed_top, generational(MUTATION_RATE, PopulationUpdate::AppendToBank)),
            Preset::Bn2 => (chain, tournament, generational(0.0, PopulationUpdate::ReplaceWithNewUnique)),
            Preset::Ga1 => (crossover, annealed_top, generational(MUTATION_RATE, PopulationUpdate::AppendToBank)),
            Preset::Ga2 => (
                crossover,
                tournament,
                EdaConfig {
                    elitism: true,
                    ..generational(0.0, PopulationUpdate::ReplaceWithNewUnique)
                },
            ),
            Preset::Geo => (
                ModelKind::BornMachine {
                    train: TrainConfig::portfolio(),
                },
                SelectionPolicy::Boltzmann {
                    schedule: TemperatureSchedule::adaptive(),
                    pool: Pool::AllUnique,
                },
                EdaConfig {
                    generations: GEO_GENERATIONS,
                    initial_population: GEO_INITIAL,
                    ..generational(0.0, PopulationUpdate::AppendToBank)
                },
            ),
        };
        SolverConfig { model, selection, eda }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}")))
    }
}
