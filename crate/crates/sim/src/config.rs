use std::path::PathBuf;
use std::str::FromStr;

use deepie_core::{Canvas, EvolutionParams};
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorChoice {
    Procedural { canvas: Canvas },
    Weights { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// Target rendered from a latent drawn from the prior with this seed.
    Latent { seed: u64 },
    Image { path: PathBuf },
}

impl FromStr for TargetSpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s.split_once(':') {
            Some(("latent", seed)) => seed
                .parse()
                .map(|seed| TargetSpec::Latent { seed })
                .map_err(|_| SimError::Config(format!("bad target seed {seed:?}"))),
            Some(("image", path)) if !path.is_empty() => Ok(TargetSpec::Image { path: path.into() }),
            _ => Err(SimError::Config(format!("target must be latent:<seed> or image:<path>, got {s:?}"))),
        }
    }
}

/// Mutation standard deviation per advanced generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Constant(f64),
    /// Straight line from `start` (first advance) to `end` (last advance).
    Linear { start: f64, end: f64 },
    List(Vec<f64>),
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Linear { start: 0.5, end: 0.1 }
    }
}

impl Schedule {
    pub fn std_at(&self, round: usize, generations: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Linear { start, end } => {
                if generations <= 1 {
                    *start
                } else {
                    start + (end - start) * round as f64 / (generations - 1) as f64
                }
            }
            Schedule::List(values) => values[round],
        }
    }

    fn validate(&self, generations: usize) -> Result<(), SimError> {
        let values: Vec<f64> = match self {
            Schedule::Constant(v) => vec![*v],
            Schedule::Linear { start, end } => vec![*start, *end],
            Schedule::List(values) => {
                if values.len() < generations {
                    return Err(SimError::Config(format!(
                        "schedule lists {} values for {generations} generations",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            Some(v) => Err(SimError::Config(format!("mutation std {v} outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

impl FromStr for Schedule {
    type Err = SimError;

    /// `const:V`, `linear:START:END` or `list:V1,V2,...`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::Config(format!("cannot parse schedule {s:?}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let mut parts = s.splitn(2, ':');
        match (parts.next(), parts.next()) {
            (Some("const"), Some(v)) => Ok(Schedule::Constant(num(v)?)),
            (Some("linear"), Some(rest)) => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Schedule::Linear { start: num(a)?, end: num(b)? })
            }
            (Some("list"), Some(rest)) => Ok(Schedule::List(rest.split(',').map(num).collect::<Result<_, _>>()?)),
            _ => Err(bad()),
        }
    }
}

/// Scripted stand-in for the human: keeps the `k` images closest to the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoSelector {
    NearestK { k: usize },
    BestLikeness,
}

impl AutoSelector {
    pub fn k(&self) -> usize {
        match self {
            AutoSelector::NearestK { k } => *k,
            AutoSelector::BestLikeness => 1,
        }
    }

    /// Indices of the `k` smallest distances, nearest first; ties go to the lower index.
    pub fn select(&self, distances: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..distances.len()).collect();
        order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
        order.truncate(self.k());
        order
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorChoice,
    pub target: TargetSpec,
    pub generations: usize,
    pub selector: AutoSelector,
    pub schedule: Schedule,
    pub seeds: Vec<u64>,
    pub params: EvolutionParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorChoice::Procedural { canvas: Canvas { width: 32, height: 32 } },
            target: TargetSpec::Latent { seed: 0 },
            generations: 10,
            selector: AutoSelector::NearestK { k: 3 },
            schedule: Schedule::default(),
            seeds: (0..50).collect(),
            params: EvolutionParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.generations == 0 {
            return Err(SimError::Config("generations must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(SimError::Config("at least one seed is required".into()));
        }
        self.params.validate().map_err(|e| SimError::Config(e.to_string()))?;
        let k = self.selector.k();
        if k == 0 || k > self.params.m {
            return Err(SimError::Config(format!("selector k = {k} must lie in 1..={}", self.params.m)));
        }
        self.schedule.validate(self.generations)
    }
}

/// `N` for seeds `0..N`, or an explicit comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, SimError> {
    let bad = || SimError::Config(format!("cannot parse seeds {s:?}"));
    if s.contains(',') {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
    } else {
        let n: u64 = s.trim().parse().map_err(|_| bad())?;
        Ok((0..n).collect())
    }
}
