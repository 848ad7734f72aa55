//! Experiment configuration files (JSON).
//!
//! ```json
//! {
//!   "name": "tn1-onemax",
//!   "problem": { "kind": "onemax", "n": 20 },
//!   "solver": { "preset": "TN1", "eda": { "mutation_rate": 0.0 } },
//!   "seeds": "0..10",
//!   "call_budget": 60000
//! }
//! ```
//!
//! The solver is a preset name, a preset plus overrides merged field by field,
//! or a complete solver description. Relative paths are taken from the
//! directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use tneda::diagnostics::ReferenceConfig;
use tneda::engine::{Preset, SolverConfig};
use tneda::ordering::correlation_ordering;
use tneda::problems::{
    brute_force_optimum, load_covariance_csv, parse_dimacs_cnf, random_covariance, CovarianceInput, Knapsack,
    MaxSat, OneMax, PermutedProblem, Portfolio, Problem, Trap,
};
use tneda::rng::seeded;
use tneda::BitString;

use crate::error::{read_file, BenchError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemSpec,
    pub solver: Value,
    pub seeds: Seeds,
    /// Overrides the solver's call budget.
    #[serde(default)]
    pub call_budget: Option<usize>,
    /// Optimum used for relative errors. Defaults to the instance's own
    /// optimum when one is known.
    #[serde(default)]
    pub optimum: Option<OptimumSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Train a bystander model each generation and record KL divergences.
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    /// Call-count bucket width of the summary; defaults to the number of
    /// children per generation.
    #[serde(default)]
    pub bucket_size: Option<usize>,
}

fn default_true() -> bool {
    true
}

/// A list of seeds or a half-open range `"a..b"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range(String),
}

impl Seeds {
    pub fn expand(&self) -> Result<Vec<u64>> {
        let seeds = match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range(s) => parse_seed_range(s)?,
        };
        if seeds.is_empty() {
            return Err(BenchError::config("no seeds"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(BenchError::config("duplicate seeds"));
        }
        Ok(seeds)
    }
}

/// Parses `a..b` (half-open) or a single seed.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let bad = || BenchError::config(format!("bad seed range {s:?}, expected a..b"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if b <= a {
                return Err(bad());
            }
            Ok((a..b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    #[default]
    Covariance,
    Returns,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingSpec {
    #[default]
    None,
    /// Place correlated assets next to each other on the chain.
    Correlation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    #[serde(rename = "onemax")]
    OneMax { n: usize },
    Trap { n: usize, k: usize },
    Knapsack { path: PathBuf },
    RandomKnapsack { n: usize, seed: u64 },
    Maxsat { path: PathBuf },
    RandomMaxsat {
        n_vars: usize,
        n_clauses: usize,
        seed: u64,
        /// Plant a satisfying assignment, so the optimum is 0.
        #[serde(default)]
        planted: bool,
    },
    Portfolio {
        path: PathBuf,
        #[serde(default)]
        input: CovarianceKind,
        n_min: usize,
        n_max: usize,
        #[serde(default)]
        penalty: Option<f64>,
        #[serde(default)]
        ordering: OrderingSpec,
    },
    RandomPortfolio {
        n: usize,
        seed: u64,
        n_min: usize,
        n_max: usize,
        #[serde(default)]
        penalty: Option<f64>,
        #[serde(default)]
        ordering: OrderingSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptimumSpec {
    Value(f64),
    Method(OptimumMethod),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumMethod {
    /// Enumerate all strings (at most 24 variables).
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceSpec {
    Named(ReferenceName),
    Explicit(ReferenceConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceName {
    /// Same model, no mutation or tensor noise.
    Noiseless,
    /// Same model, noise and generator state as the primary.
    Mirror,
}

impl ReferenceSpec {
    pub fn resolve(&self, primary: &SolverConfig) -> ReferenceConfig {
        match self {
            ReferenceSpec::Named(ReferenceName::Noiseless) => ReferenceConfig::noiseless(primary),
            ReferenceSpec::Named(ReferenceName::Mirror) => ReferenceConfig::mirror(primary),
            ReferenceSpec::Explicit(r) => r.clone(),
        }
    }
}

/// A problem ready to run, possibly with its variables reordered.
pub struct Instance {
    pub problem: Box<dyn Problem + Send + Sync>,
    /// `perm[k]` is the original variable at chain position `k`.
    pub perm: Option<Vec<usize>>,
    pub optimum: Option<f64>,
}

impl Instance {
    /// `x` in the problem's original variable order.
    pub fn to_original(&self, x: &BitString) -> BitString {
        match &self.perm {
            Some(p) => x.unpermuted(p),
            None => x.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BenchError::config(e.to_string()))
    }

    /// Reads a config file and returns it with the directory that relative
    /// paths refer to.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let cfg = Self::from_json(&read_file(path)?).map_err(|e| BenchError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = resolve_solver(&self.solver)?;
        if let Some(b) = self.call_budget {
            cfg.eda.call_budget = b;
        }
        cfg.validate().map_err(|e| BenchError::config(e.to_string()))?;
        if cfg.eda.call_budget <= cfg.eda.initial_population {
            return Err(BenchError::config(format!(
                "call budget {} does not exceed the initial population {}",
                cfg.eda.call_budget, cfg.eda.initial_population
            )));
        }
        Ok(cfg)
    }

    pub fn instance(&self, base: &Path) -> Result<Instance> {
        build_instance(&self.problem, self.optimum.as_ref(), base)
    }
}

/// Expands the `solver` entry of a config.
pub fn resolve_solver(spec: &Value) -> Result<SolverConfig> {
    let parse_preset = |v: &Value| -> Result<Preset> {
        let name = v.as_str().ok_or_else(|| BenchError::config("preset must be a string"))?;
        name.parse().map_err(|e: tneda::Error| BenchError::config(e.to_string()))
    };
    let full = match spec {
        Value::String(_) => serde_json::to_value(parse_preset(spec)?.config()),
        Value::Object(map) => match map.get("preset") {
            Some(p) => {
                let mut base = serde_json::to_value(parse_preset(p)?.config()).expect("presets serialize");
                let mut overrides = map.clone();
                overrides.remove("preset");
                merge(&mut base, Value::Object(overrides));
                Ok(base)
            }
            None => Ok(spec.clone()),
        },
        _ => return Err(BenchError::config("solver must be a preset name or an object")),
    }
    .expect("presets serialize");
    serde_json::from_value(full).map_err(|e| BenchError::config(format!("solver: {e}")))
}

/// Recursive merge of JSON objects. An override carrying a different `kind`
/// tag replaces the base value outright.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            if o.get("kind").is_some_and(|k| b.get("kind") != Some(k)) {
                *b = o;
                return;
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, over) => *slot = over,
    }
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn portfolio_instance(
    sigma: nalgebra::DMatrix<f64>,
    n_min: usize,
    n_max: usize,
    penalty: Option<f64>,
    ordering: OrderingSpec,
) -> Result<Instance> {
    let p = Portfolio::new(sigma, n_min, n_max, penalty.unwrap_or(Portfolio::DEFAULT_PENALTY))
        .map_err(|e| BenchError::config(format!("portfolio: {e}")))?;
    match ordering {
        OrderingSpec::None => Ok(Instance {
            problem: Box::new(p),
            perm: None,
            optimum: None,
        }),
        OrderingSpec::Correlation => {
            let perm = correlation_ordering(&p.correlation())?;
            Ok(Instance {
                problem: Box::new(PermutedProblem::new(p, perm.clone())?),
                perm: Some(perm),
                optimum: None,
            })
        }
    }
}

pub fn build_instance(spec: &ProblemSpec, optimum: Option<&OptimumSpec>, base: &Path) -> Result<Instance> {
    let plain = |problem: Box<dyn Problem + Send + Sync>, optimum: Option<f64>| Instance {
        problem,
        perm: None,
        optimum,
    };
    let mut inst = match spec {
        ProblemSpec::OneMax { n } => {
            if *n == 0 {
                return Err(BenchError::config("onemax needs n >= 1"));
            }
            plain(Box::new(OneMax::new(*n)), None)
        }
        ProblemSpec::Trap { n, k } => plain(
            Box::new(Trap::new(*n, *k).map_err(|e| BenchError::config(format!("trap: {e}")))?),
            None,
        ),
        ProblemSpec::Knapsack { path } => {
            let path = resolve_path(base, path);
            let k = Knapsack::parse(&read_file(&path)?).map_err(|e| BenchError::parse(&path, e))?;
            let opt = k.dp_optimum().1;
            plain(Box::new(k), Some(opt))
        }
        ProblemSpec::RandomKnapsack { n, seed } => {
            let k = Knapsack::random(*n, &mut seeded(*seed)).map_err(|e| BenchError::config(e.to_string()))?;
            let opt = k.dp_optimum().1;
            plain(Box::new(k), Some(opt))
        }
        ProblemSpec::Maxsat { path } => {
            let path = resolve_path(base, path);
            let sat = parse_dimacs_cnf(&read_file(&path)?).map_err(|e| BenchError::parse(&path, e))?;
            plain(Box::new(sat), None)
        }
        ProblemSpec::RandomMaxsat {
            n_vars,
            n_clauses,
            seed,
            planted,
        } => {
            let mut rng = seeded(*seed);
            let bad = |e: tneda::Error| BenchError::config(format!("random_maxsat: {e}"));
            if *planted {
                let (sat, _) = MaxSat::random_planted_3sat(*n_vars, *n_clauses, &mut rng).map_err(bad)?;
                plain(Box::new(sat), Some(0.0))
            } else {
                plain(Box::new(MaxSat::random_3sat(*n_vars, *n_clauses, &mut rng).map_err(bad)?), None)
            }
        }
        ProblemSpec::Portfolio {
            path,
            input,
            n_min,
            n_max,
            penalty,
            ordering,
        } => {
            let path = resolve_path(base, path);
            let input = match input {
                CovarianceKind::Covariance => CovarianceInput::Covariance,
                CovarianceKind::Returns => CovarianceInput::Returns,
            };
            let sigma = load_covariance_csv(&read_file(&path)?, input).map_err(|e| BenchError::parse(&path, e))?;
            portfolio_instance(sigma, *n_min, *n_max, *penalty, *ordering)?
        }
        ProblemSpec::RandomPortfolio {
            n,
            seed,
            n_min,
            n_max,
            penalty,
            ordering,
        } => {
            if *n == 0 {
                return Err(BenchError::config("random_portfolio needs n >= 1"));
            }
            portfolio_instance(random_covariance(*n, &mut seeded(*seed)), *n_min, *n_max, *penalty, *ordering)?
        }
    };
    inst.optimum = match optimum {
        Some(OptimumSpec::Value(v)) => Some(*v),
        Some(OptimumSpec::Method(OptimumMethod::BruteForce)) => Some(brute_force_optimum(&*inst.problem)?.1),
        None => inst.optimum.or_else(|| inst.problem.known_optimum()),
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tneda::engine::{ModelKind, PopulationUpdate, SelectionPolicy};

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("3..6").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_seed_range("7").unwrap(), vec![7]);
        assert!(parse_seed_range("5..5").is_err());
        assert!(parse_seed_range("a..b").is_err());
        assert!(Seeds::List(vec![1, 1]).expand().is_err());
        assert!(Seeds::List(vec![]).expand().is_err());
    }

    #[test]
    fn presets_and_overrides() {
        let tn1 = resolve_solver(&serde_json::json!("tn1")).unwrap();
        assert_eq!(tn1, Preset::Tn1.config());
        let tweaked = resolve_solver(&serde_json::json!({
            "preset": "TN1",
            "eda": { "mutation_rate": 0.0, "n_children": 50 }
        }))
        .unwrap();
        assert_eq!(tweaked.eda.mutation_rate, 0.0);
        assert_eq!(tweaked.eda.n_children, 50);
        assert_eq!(tweaked.eda.n_parents, 1000);
        assert_eq!(tweaked.model, tn1.model);

        let swapped = resolve_solver(&serde_json::json!({
            "preset": "TN1",
            "model": { "kind": "chain_bayes", "smoothing": 0.5 }
        }))
        .unwrap();
        assert_eq!(swapped.model, ModelKind::ChainBayes { smoothing: 0.5 });
    }

    #[test]
    fn ga2_expands() {
        let ga2 = resolve_solver(&serde_json::json!("GA2")).unwrap();
        assert_eq!(ga2.selection, SelectionPolicy::Tournament { arity: 3 });
        assert_eq!(ga2.model, ModelKind::Crossover { rate: 1.0 });
        assert_eq!(ga2.eda.mutation_rate, 0.0);
        assert_eq!(ga2.eda.population_update, PopulationUpdate::ReplaceWithNewUnique);
    }

    #[test]
    fn explicit_solver_round_trips() {
        let cfg = Preset::Bn1.config();
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(resolve_solver(&v).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(resolve_solver(&serde_json::json!("TN7")).is_err());
        assert!(resolve_solver(&serde_json::json!({"preset": "TN1", "eda": {"typo": 1}})).is_err());
        assert!(resolve_solver(&serde_json::json!(3)).is_err());
        let text = r#"{"problem": {"kind": "onemax", "n": 8}, "solver": "TN1", "seeds": [1], "call_budget": 500}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(matches!(cfg.solver_config(), Err(BenchError::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"problem": {"kind": "onemax", "n": 8, "x": 1}, "solver": "TN1", "seeds": [1]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"problem": {"kind": "onemax", "n": 8}, "solver": "TN1", "seeds": [1], "extra": 0}"#).is_err());
    }

    #[test]
    fn instances() {
        let base = Path::new(".");
        let k = build_instance(&ProblemSpec::RandomKnapsack { n: 12, seed: 3 }, None, base).unwrap();
        assert_eq!(k.optimum, Some(brute_force_optimum(&*k.problem).unwrap().1));
        let om = build_instance(&ProblemSpec::OneMax { n: 5 }, Some(&OptimumSpec::Value(-4.0)), base).unwrap();
        assert_eq!(om.optimum, Some(-4.0));
        let spec = ProblemSpec::RandomPortfolio {
            n: 8,
            seed: 1,
            n_min: 2,
            n_max: 4,
            penalty: None,
            ordering: OrderingSpec::Correlation,
        };
        let p = build_instance(&spec, Some(&OptimumSpec::Method(OptimumMethod::BruteForce)), base).unwrap();
        let perm = p.perm.clone().unwrap();
        let direct = Portfolio::new(random_covariance(8, &mut seeded(1)), 2, 4, 100.0).unwrap();
        assert_eq!(p.optimum, Some(brute_force_optimum(&direct).unwrap().1));
        let x: BitString = "11010000".parse().unwrap();
        assert_eq!(p.problem.evaluate(&x), direct.evaluate(&p.to_original(&x)));
        assert_eq!(perm.len(), 8);
        let missing = ProblemSpec::Knapsack {
            path: "does/not/exist.knap".into(),
        };
        assert!(matches!(build_instance(&missing, None, base), Err(BenchError::Io { .. })));
    }
}
