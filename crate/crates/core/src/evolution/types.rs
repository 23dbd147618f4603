use serde::{Deserialize, Serialize};

use super::EvolutionError;
use crate::scalar::Scalar;

/// Genotype fed to a generator: a fixed-length vector of finite latent coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatentVector<T>(Vec<T>);

impl<T: Scalar> LatentVector<T> {
    /// Wraps `values`, rejecting empty vectors and non-finite coordinates.
    pub fn new(values: Vec<T>) -> Result<Self, EvolutionError> {
        if values.is_empty() {
            return Err(EvolutionError::EmptyLatent);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EvolutionError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    /// Internal constructor for operator outputs already known to be finite.
    pub(crate) fn from_raw(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    /// Bitwise equality, distinguishing `0.0` from `-0.0`.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.integer_decode() == b.integer_decode())
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .fold(T::zero(), |acc, v| acc + v)
            .sqrt()
    }
}

impl<T> std::ops::Index<usize> for LatentVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Identifier of a population member, unique within a session lineage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MemberId(pub u64);

impl std::fmt::Display for MemberId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceKind {
    Seed,
    Survivor,
    Crossover,
    Foreign,
}

/// How a member came to exist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    kind: ProvenanceKind,
    parents: Vec<MemberId>,
    mutated: bool,
}

impl Provenance {
    pub fn seed() -> Self {
        Self { kind: ProvenanceKind::Seed, parents: Vec::new(), mutated: false }
    }

    pub fn foreign() -> Self {
        Self { kind: ProvenanceKind::Foreign, parents: Vec::new(), mutated: false }
    }

    pub fn survivor(parent: MemberId, mutated: bool) -> Self {
        Self { kind: ProvenanceKind::Survivor, parents: vec![parent], mutated }
    }

    pub fn crossover(a: MemberId, b: MemberId, mutated: bool) -> Self {
        Self { kind: ProvenanceKind::Crossover, parents: vec![a, b], mutated }
    }

    pub fn kind(&self) -> ProvenanceKind {
        self.kind
    }

    pub fn parents(&self) -> &[MemberId] {
        &self.parents
    }

    pub fn mutated(&self) -> bool {
        self.mutated
    }

    /// Checks the parent-count rule for the kind (used when accepting deserialized data).
    pub fn is_consistent(&self) -> bool {
        let expected = match self.kind {
            ProvenanceKind::Seed | ProvenanceKind::Foreign => 0,
            ProvenanceKind::Survivor => 1,
            ProvenanceKind::Crossover => 2,
        };
        self.parents.len() == expected
            && !(self.mutated && matches!(self.kind, ProvenanceKind::Seed | ProvenanceKind::Foreign))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Member<T> {
    pub id: MemberId,
    pub values: LatentVector<T>,
    pub provenance: Provenance,
}

/// One generation: the ordered members plus the generation index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Population<T> {
    pub members: Vec<Member<T>>,
    pub generation: u64,
}

impl<T: Scalar> Population<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn latents(&self) -> impl Iterator<Item = &LatentVector<T>> {
        self.members.iter().map(|m| &m.values)
    }

    pub fn count(&self, kind: ProvenanceKind) -> usize {
        self.members.iter().filter(|m| m.provenance.kind() == kind).count()
    }

    pub fn bit_eq(&self, other: &Self) -> bool {
        self.generation == other.generation
            && self.members.len() == other.members.len()
            && self.members.iter().zip(&other.members).all(|(a, b)| {
                a.id == b.id && a.provenance == b.provenance && a.values.bit_eq(&b.values)
            })
    }
}

/// Algorithm parameters. Defaults: 20 members of 20 latents, `N(0, 1)` seeding,
/// gate probability 0.5 and two foreign members per generation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default)]
pub struct EvolutionParams<T> {
    pub m: usize,
    pub n: usize,
    pub mu: T,
    pub sigma2: T,
    pub p: f64,
    pub foreign: usize,
}

impl<T: Scalar> Default for EvolutionParams<T> {
    fn default() -> Self {
        Self { m: 20, n: 20, mu: T::zero(), sigma2: T::one(), p: 0.5, foreign: 2 }
    }
}

impl<T: Scalar> EvolutionParams<T> {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |reason: &str| Err(EvolutionError::InvalidParams(reason.to_owned()));
        if self.m == 0 {
            return bad("population size m must be at least 1");
        }
        if self.n == 0 {
            return bad("latent dimension n must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("mutation probability p must lie in [0, 1]");
        }
        if self.foreign > self.m {
            return bad("foreign quota must not exceed m");
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite");
        }
        if !(self.sigma2.is_finite() && self.sigma2 > T::zero()) {
            return bad("sigma2 must be finite and positive");
        }
        Ok(())
    }

    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }
}

/// Standard deviation of the mutation noise chosen by the user; 0 disables mutation.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MutationMagnitude<T>(T);

impl<T: Scalar> MutationMagnitude<T> {
    pub fn new(std: T) -> Result<Self, EvolutionError> {
        if std.is_finite() && std >= T::zero() {
            Ok(Self(std))
        } else {
            Err(EvolutionError::InvalidMagnitude(std.as_f64()))
        }
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn std(self) -> T {
        self.0
    }
}
