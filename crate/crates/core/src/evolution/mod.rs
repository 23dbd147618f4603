//! Evolutionary operators over generator latent vectors.
//!
//! Everything here is a pure function of its inputs and an explicitly passed
//! randomness source, so a seeded generator reproduces every population bit for bit.

mod operators;
mod types;

pub use operators::{
    init_population, mutate, next_generation, sample_latent, uniform_crossover,
    uniform_crossover_with_mask, GenerationCounts, Mutated,
};
pub use types::{
    EvolutionParams, LatentVector, Member, MemberId, MutationMagnitude, Population, Provenance,
    ProvenanceKind,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("latent vector must not be empty")]
    EmptyLatent,
    #[error("latent coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("mutation magnitude must be finite and non-negative, got {0}")]
    InvalidMagnitude(f64),
    #[error("shape mismatch: expected length {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("selection is empty")]
    EmptySelection,
    #[error("selected index {index} is out of range for a population of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("selected index {0} appears more than once")]
    DuplicateIndex(usize),
}
