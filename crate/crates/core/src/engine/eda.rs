use std::collections::HashSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::bank::SolutionBank;
use super::operators::{mutate, two_point_crossover};
use super::select::{boltzmann_select, greedy_select, tournament_select, Pool};
use super::temperature::{
    adaptive_temperature, annealed_temperature, initial_temperature, TemperatureSchedule, FLOOR_TEMPERATURE,
};
use crate::bits::BitString;
use crate::diagnostics::KlReport;
use crate::error::{Error, Result};
use crate::models::{fit_chain_bayes, train_born_machine, train_positive_mps, ChainBayes, GenerativeModel, TrainConfig};
use crate::mps::{Mode, Mps};
use crate::problems::Problem;
use crate::rng::Rng;

/// How children are produced from the selected parents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Amplitude MPS trained by two-site NLL sweeps.
    BornMachine { train: TrainConfig },
    /// Nonnegative MPS updated incrementally across generations.
    PositiveMps { train: TrainConfig },
    ChainBayes { smoothing: f64 },
    /// Genetic algorithm: consecutive parents are paired and recombined by
    /// two-point crossover with probability `rate`.
    Crossover { rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionPolicy {
    Boltzmann { schedule: TemperatureSchedule, pool: Pool },
    Tournament { arity: usize },
    /// The `k` best of the current population.
    GreedyTopK { k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationUpdate {
    /// Selection sees every string evaluated so far.
    AppendToBank,
    /// Selection sees only the distinct children of the latest generation.
    ReplaceWithNewUnique,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdaConfig {
    /// Training strings drawn by selection each generation.
    pub n_parents: usize,
    /// Strings sampled from the model each generation.
    pub n_children: usize,
    pub generations: usize,
    /// Uniform random strings evaluated before the first generation.
    pub initial_population: usize,
    /// Per-bit flip probability applied to every child.
    pub mutation_rate: f64,
    /// Standard deviation of Gaussian noise added to MPS entries after
    /// training (0 disables it).
    #[serde(default)]
    pub tensor_noise: f64,
    /// Distinct objective evaluations allowed. The last generation may
    /// overshoot by up to `n_children`.
    pub call_budget: usize,
    pub population_update: PopulationUpdate,
    /// Keep the best string so far in a replaced population.
    #[serde(default)]
    pub elitism: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub model: ModelKind,
    pub selection: SelectionPolicy,
    pub eda: EdaConfig,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.eda;
        if e.n_parents == 0 || e.n_children == 0 {
            return Err(Error::invalid("n_parents and n_children must be positive"));
        }
        if e.initial_population == 0 {
            return Err(Error::invalid("initial_population must be positive"));
        }
        if e.call_budget == 0 {
            return Err(Error::invalid("call_budget must be positive"));
        }
        if !(0.0..=1.0).contains(&e.mutation_rate) {
            return Err(Error::invalid(format!("mutation_rate {} outside [0, 1]", e.mutation_rate)));
        }
        if !(e.tensor_noise >= 0.0) {
            return Err(Error::invalid("tensor_noise must be >= 0"));
        }
        match &self.model {
            ModelKind::BornMachine { train } | ModelKind::PositiveMps { train } => train.validate()?,
            ModelKind::ChainBayes { smoothing } => {
                if !(*smoothing >= 0.0) {
                    return Err(Error::invalid("smoothing must be >= 0"));
                }
            }
            ModelKind::Crossover { rate } => {
                if !(0.0..=1.0).contains(rate) {
                    return Err(Error::invalid("crossover rate outside [0, 1]"));
                }
            }
        }
        match &self.selection {
            SelectionPolicy::Boltzmann { schedule, pool } => {
                schedule.validate()?;
                if *pool == Pool::TopK(0) {
                    return Err(Error::invalid("Boltzmann pool size must be positive"));
                }
            }
            SelectionPolicy::Tournament { arity } if *arity == 0 => {
                return Err(Error::invalid("tournament arity must be positive"));
            }
            SelectionPolicy::GreedyTopK { k } if *k == 0 => {
                return Err(Error::invalid("greedy k must be positive"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Telemetry for one generation (generation 0 is the initial population).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub generation: usize,
    /// Distinct objective evaluations so far.
    pub calls: usize,
    pub new_evaluations: usize,
    pub best_value: f64,
    pub best: BitString,
    /// Best and median objective over this generation's children.
    pub generation_best: f64,
    pub generation_median: f64,
    pub temperature: Option<f64>,
    pub kl: Option<KlReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Generations,
    /// The initial population alone used up the budget.
    BudgetBeforeFirstGeneration,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub bank: SolutionBank,
    pub stop: StopReason,
}

impl RunResult {
    pub fn best(&self) -> (&BitString, f64) {
        let e = self.bank.best().expect("bank holds the initial population");
        (&e.x, e.value)
    }

    pub fn calls(&self) -> usize {
        self.bank.len()
    }
}

/// The model trained in one generation, after any tensor noise.
#[derive(Clone, Debug)]
pub enum FittedModel {
    Mps(Mps),
    Chain(ChainBayes),
    None,
}

/// Everything a per-generation observer may inspect.
pub struct GenerationView<'a> {
    pub generation: usize,
    pub temperature: Option<f64>,
    pub bank: &'a SolutionBank,
    /// Bank indices selection drew from.
    pub pool: &'a [usize],
    pub parents: &'a [BitString],
    pub model: &'a FittedModel,
    pub mutation_rate: f64,
    /// Generator state immediately before the model was trained.
    pub train_rng: &'a Rng,
}

/// Hook called after training in every generation; may attach a KL report
/// to the generation's record.
pub trait Observer {
    fn observe(&mut self, view: &GenerationView<'_>) -> Result<Option<KlReport>>;

    /// Called once per record, right after it is complete (including the
    /// initial population's record).
    fn record_done(&mut self, _record: &RunRecord) {}
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

struct Loop<'a, P: Problem + ?Sized> {
    problem: &'a P,
    cfg: &'a SolverConfig,
    bank: SolutionBank,
    /// Bank indices of the current population (replacement mode only).
    population: Vec<usize>,
    carried: Option<Mps>,
    t0: f64,
}

impl<P: Problem + ?Sized> Loop<'_, P> {
    /// Evaluates unseen strings; returns the bank indices of the distinct
    /// strings in `batch` (first occurrence order) and the number of new ones.
    fn evaluate(&mut self, batch: &[BitString], generation: usize) -> (Vec<usize>, usize) {
        let mut seen = HashSet::new();
        let mut unique = Vec::new();
        let mut fresh = 0;
        for x in batch {
            if !self.bank.contains(x) {
                let f = self.problem.evaluate(x);
                self.bank.insert(x.clone(), f, generation);
                fresh += 1;
            }
            let i = self.bank.position(x).expect("just inserted");
            if seen.insert(i) {
                unique.push(i);
            }
        }
        (unique, fresh)
    }

    fn population(&self) -> Vec<usize> {
        match self.cfg.eda.population_update {
            PopulationUpdate::AppendToBank => (0..self.bank.len()).collect(),
            PopulationUpdate::ReplaceWithNewUnique => self.population.clone(),
        }
    }

    fn record(&self, generation: usize, batch: &[BitString], fresh: usize, temperature: Option<f64>) -> RunRecord {
        let mut values: Vec<f64> = batch
            .iter()
            .map(|x| self.bank.get(x).expect("evaluated").value)
            .collect();
        let best = self.bank.best().expect("nonempty bank");
        RunRecord {
            generation,
            calls: self.bank.len(),
            new_evaluations: fresh,
            best_value: best.value,
            best: best.x.clone(),
            generation_best: values.iter().copied().fold(f64::INFINITY, f64::min),
            generation_median: median(&mut values),
            temperature,
            kl: None,
        }
    }

    fn temperature(&self, pool: &[usize], generation: usize) -> Option<f64> {
        let SelectionPolicy::Boltzmann { schedule, .. } = &self.cfg.selection else {
            return None;
        };
        Some(match *schedule {
            TemperatureSchedule::Annealed { t0, t_max } => {
                let t_max = t_max.unwrap_or(self.cfg.eda.generations).max(1);
                annealed_temperature(t0.unwrap_or(self.t0), generation - 1, t_max)
            }
            TemperatureSchedule::AdaptiveGap { rank, ratio } => {
                adaptive_temperature(&self.bank.values(pool), rank, ratio).unwrap_or(FLOOR_TEMPERATURE)
            }
            TemperatureSchedule::Fixed(t) => t,
        })
    }

    fn select(&self, population: &[usize], temperature: Option<f64>, rng: &mut Rng) -> Result<(Vec<usize>, Vec<BitString>)> {
        let eda = &self.cfg.eda;
        let (pool, picks) = match &self.cfg.selection {
            SelectionPolicy::Boltzmann { pool, .. } => {
                let pool: Vec<usize> = match *pool {
                    Pool::AllUnique => population.to_vec(),
                    Pool::TopK(k) => {
                        let mut ranked = population.to_vec();
                        ranked.sort_by(|&a, &b| self.bank.entry(a).value.total_cmp(&self.bank.entry(b).value).then(a.cmp(&b)));
                        ranked.truncate(k);
                        ranked
                    }
                };
                let t = temperature.expect("Boltzmann selection has a temperature");
                let picks = boltzmann_select(&self.bank.values(&pool), eda.n_parents, t, rng)?;
                (pool, picks)
            }
            SelectionPolicy::Tournament { arity } => {
                let picks = tournament_select(&self.bank.values(population), eda.n_parents, *arity, rng)?;
                (population.to_vec(), picks)
            }
            SelectionPolicy::GreedyTopK { k } => {
                let picks = greedy_select(&self.bank.values(population), *k);
                (population.to_vec(), picks)
            }
        };
        let parents = picks.iter().map(|&i| self.bank.entry(pool[i]).x.clone()).collect();
        Ok((pool, parents))
    }

    fn breed(&mut self, parents: &[BitString], rng: &mut Rng) -> Result<(FittedModel, Vec<BitString>)> {
        let eda = &self.cfg.eda;
        let n = self.problem.dim();
        let noisy = |m: Mps, rng: &mut Rng| -> Result<Mps> {
            if eda.tensor_noise > 0.0 {
                m.add_tensor_noise(eda.tensor_noise, rng)
            } else {
                Ok(m)
            }
        };
        let model = match &self.cfg.model {
            ModelKind::BornMachine { train } => {
                let m = train_born_machine(parents, train, self.carried.as_ref(), rng)?;
                if !train.fresh_init {
                    self.carried = Some(m.clone());
                }
                FittedModel::Mps(noisy(m, rng)?)
            }
            ModelKind::PositiveMps { train } => {
                let init = match self.carried.take() {
                    Some(m) => m,
                    None => Mps::random(n, train.chi_max, Mode::DirectPositive, rng)?,
                };
                let m = train_positive_mps(parents, train, &init)?;
                self.carried = Some(m.clone());
                FittedModel::Mps(noisy(m, rng)?)
            }
            ModelKind::ChainBayes { smoothing } => FittedModel::Chain(fit_chain_bayes(parents, *smoothing)?),
            ModelKind::Crossover { .. } => FittedModel::None,
        };
        let children = match (&model, &self.cfg.model) {
            (FittedModel::Mps(m), _) => m.sample_many(eda.n_children, rng)?,
            (FittedModel::Chain(c), _) => c.sample_many(eda.n_children, rng)?,
            (FittedModel::None, ModelKind::Crossover { rate }) => {
                let mut out = Vec::with_capacity(eda.n_children + 1);
                let mut k = 0;
                while out.len() < eda.n_children {
                    let a = &parents[k % parents.len()];
                    let b = &parents[(k + 1) % parents.len()];
                    k += 2;
                    let (c, d) = if rng.random::<f64>() < *rate {
                        two_point_crossover(a, b, rng)?
                    } else {
                        (a.clone(), b.clone())
                    };
                    out.push(c);
                    out.push(d);
                }
                out.truncate(eda.n_children);
                out
            }
            (FittedModel::None, _) => unreachable!("only crossover has no model"),
        };
        let children = children.iter().map(|x| mutate(x, eda.mutation_rate, rng)).collect();
        Ok((model, children))
    }
}

/// Runs the EDA loop: evaluate a random initial population, then per
/// generation select parents, fit the model, sample and mutate children, and
/// evaluate the ones not yet in the bank.
pub fn run_eda<P: Problem + ?Sized>(
    problem: &P,
    cfg: &SolverConfig,
    rng: &mut Rng,
    mut observer: Option<&mut dyn Observer>,
) -> Result<RunResult> {
    cfg.validate()?;
    let n = problem.dim();
    if n == 0 {
        return Err(Error::invalid("problem has no variables"));
    }
    let eda = &cfg.eda;
    let mut state = Loop {
        problem,
        cfg,
        bank: SolutionBank::new(),
        population: Vec::new(),
        carried: None,
        t0: 1.0,
    };

    let initial: Vec<BitString> = (0..eda.initial_population).map(|_| BitString::random(n, rng)).collect();
    let (unique, fresh) = state.evaluate(&initial, 0);
    state.t0 = initial_temperature(&state.bank.values(&unique));
    state.population = unique;
    let mut records = vec![state.record(0, &initial, fresh, None)];
    if let Some(obs) = observer.as_deref_mut() {
        obs.record_done(&records[0]);
    }
    if state.bank.len() >= eda.call_budget {
        return Ok(RunResult {
            records,
            bank: state.bank,
            stop: StopReason::BudgetBeforeFirstGeneration,
        });
    }

    let mut stop = StopReason::Generations;
    for generation in 1..=eda.generations {
        if state.bank.len() >= eda.call_budget {
            stop = StopReason::Budget;
            break;
        }
        let population = state.population();
        let temperature = state.temperature(&population, generation);
        let (pool, parents) = state.select(&population, temperature, rng)?;
        let train_rng = observer.as_ref().map(|_| rng.clone());
        let (model, children) = state.breed(&parents, rng)?;
        let kl = match (observer.as_deref_mut(), &train_rng) {
            (Some(obs), Some(train_rng)) => obs.observe(&GenerationView {
                generation,
                temperature,
                bank: &state.bank,
                pool: &pool,
                parents: &parents,
                model: &model,
                mutation_rate: eda.mutation_rate,
                train_rng,
            })?,
            _ => None,
        };
        let (unique, fresh) = state.evaluate(&children, generation);
        if eda.population_update == PopulationUpdate::ReplaceWithNewUnique {
            state.population = unique;
            if eda.elitism {
                let best = state.bank.best_index().expect("nonempty bank");
                if !state.population.contains(&best) {
                    state.population.push(best);
                }
            }
        }
        let mut rec = state.record(generation, &children, fresh, temperature);
        rec.kl = kl;
        if let Some(obs) = observer.as_deref_mut() {
            obs.record_done(&rec);
        }
        records.push(rec);
    }
    if stop == StopReason::Generations && state.bank.len() >= eda.call_budget {
        stop = StopReason::Budget;
    }
    Ok(RunResult {
        records,
        bank: state.bank,
        stop,
    })
}
