//! Interactive latent-vector evolution: the evolutionary operators and a
//! generator runtime that turns latent vectors into images.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which the service and harness use.

pub mod evolution;
pub mod generator;
mod scalar;

pub use evolution::{
    init_population, mutate, next_generation, uniform_crossover, EvolutionError, MemberId, Provenance,
    ProvenanceKind,
};
pub use generator::{load_model, procedural_generate, save_model, Canvas, GeneratorError};
pub use scalar::Scalar;

pub type LatentVector = evolution::LatentVector<f64>;
pub type Population = evolution::Population<f64>;
pub type Member = evolution::Member<f64>;
pub type EvolutionParams = evolution::EvolutionParams<f64>;
pub type MutationMagnitude = evolution::MutationMagnitude<f64>;
pub type Image = generator::Image<f64>;
pub type GeneratorModel = generator::GeneratorModel<f64>;
pub type Generator = generator::Generator<f64>;

pub type LatentVectorF32 = evolution::LatentVector<f32>;
pub type PopulationF32 = evolution::Population<f32>;
pub type GeneratorModelF32 = generator::GeneratorModel<f32>;
