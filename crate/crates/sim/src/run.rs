use std::sync::Arc;
use std::time::Instant;

use deepie_core::evolution::sample_latent;
use deepie_core::{
    init_population, load_model, next_generation, Generator, Image, MutationMagnitude, Population,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GeneratorChoice, TargetSpec};
use crate::SimError;

/// Stream used for target latents, so a target seed never replays a run seed.
const TARGET_STREAM: u64 = 1;

/// One seed's run. `best_distances[g]` is the smallest distance to the target
/// among the images shown in generation `g`, for the `generations` rounds in
/// which a selection was made.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub best_distances: Vec<f64>,
    pub best_generation: usize,
    pub ratio: f64,
    pub initial_distance: f64,
    pub final_distance: f64,
    pub wall_clock_ms: f64,
}

impl Trajectory {
    pub(crate) fn from_distances(seed: u64, best_distances: Vec<f64>, wall_clock_ms: f64) -> Self {
        let best_generation = best_distances
            .iter()
            .enumerate()
            .fold(0, |best, (g, d)| if *d < best_distances[best] { g } else { best });
        Self {
            seed,
            ratio: best_iteration_ratio(best_generation, best_distances.len()),
            initial_distance: best_distances[0],
            final_distance: *best_distances.last().unwrap(),
            best_generation,
            best_distances,
            wall_clock_ms,
        }
    }

    /// Equality ignoring wall-clock time.
    pub fn same_run(&self, other: &Self) -> bool {
        Self { wall_clock_ms: 0.0, ..self.clone() } == Self { wall_clock_ms: 0.0, ..other.clone() }
    }
}

/// `(best + 1) / rounds` for a 0-based best round out of `rounds`.
pub fn best_iteration_ratio(best_generation: usize, rounds: usize) -> f64 {
    (best_generation + 1) as f64 / rounds as f64
}

/// Output file of `simulate`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Results {
    pub config: ExperimentConfig,
    pub trajectories: Vec<Trajectory>,
}

/// A validated config with its generator loaded and target rendered.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub generator: Generator,
    pub target: Image,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self, SimError> {
        config.validate()?;
        let generator = match &config.generator {
            GeneratorChoice::Procedural { canvas } => Generator::Procedural(*canvas),
            GeneratorChoice::Weights { path } => {
                let bytes = std::fs::read(path).map_err(|source| SimError::Io { path: path.clone(), source })?;
                let model = load_model(&bytes).map_err(|source| SimError::Weights { path: path.clone(), source })?;
                Generator::Neural(Arc::new(model))
            }
        };
        if !generator.accepts_latent_dim(config.params.n) {
            return Err(SimError::Config(format!(
                "latent length {} does not fit the generator (expects {})",
                config.params.n,
                generator.latent_dim().map_or("at least 6".to_string(), |d| d.to_string())
            )));
        }
        let target = match &config.target {
            TargetSpec::Latent { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(TARGET_STREAM);
                generator.render_one(&sample_latent(&config.params, &mut rng))?
            }
            TargetSpec::Image { path } => {
                let bytes = std::fs::read(path).map_err(|source| SimError::Io { path: path.clone(), source })?;
                let shape = generator.output_shape();
                Image::from_encoded(&bytes, shape.width, shape.height, shape.channels)
                    .map_err(|source| SimError::TargetImage { path: path.clone(), source })?
            }
        };
        Ok(Self { config, generator, target })
    }

    pub fn distances(&self, pop: &Population) -> Result<Vec<f64>, SimError> {
        let latents: Vec<_> = pop.latents().cloned().collect();
        self.generator
            .render(&latents)?
            .iter()
            .map(|img| img.distance(&self.target).map_err(SimError::from))
            .collect()
    }
}

/// Runs one seed. `observe` sees every selection round with the population shown
/// and the distance of each of its images.
pub fn run_seed(
    prepared: &Prepared,
    seed: u64,
    mut observe: impl FnMut(&Population, &[f64]),
) -> Result<Trajectory, SimError> {
    let start = Instant::now();
    let config = &prepared.config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pop = init_population(&config.params, &mut rng)?;
    let mut best = Vec::with_capacity(config.generations);
    for round in 0..config.generations {
        let distances = prepared.distances(&pop)?;
        observe(&pop, &distances);
        best.push(distances.iter().copied().fold(f64::INFINITY, f64::min));
        let selected = config.selector.select(&distances);
        let std = MutationMagnitude::new(config.schedule.std_at(round, config.generations))?;
        pop = next_generation(&pop, &selected, std, &config.params, &mut rng)?;
    }
    Ok(Trajectory::from_distances(seed, best, start.elapsed().as_secs_f64() * 1e3))
}

/// Every seed in parallel; output follows the order of `config.seeds`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<Trajectory>, SimError> {
    let prepared = Prepared::new(config.clone())?;
    prepared.config.seeds.par_iter().map(|&seed| run_seed(&prepared, seed, |_, _| ())).collect()
}
