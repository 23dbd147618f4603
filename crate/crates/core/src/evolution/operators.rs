use rand::Rng;

use super::{
    EvolutionError, EvolutionParams, LatentVector, Member, MemberId, MutationMagnitude,
    Population, Provenance,
};
use crate::scalar::Scalar;

/// Draws one latent from `N(mu, sigma2)` coordinate-wise.
pub fn sample_latent<T: Scalar, R: Rng + ?Sized>(
    params: &EvolutionParams<T>,
    rng: &mut R,
) -> LatentVector<T> {
    let sigma = params.sigma();
    LatentVector::from_raw(
        (0..params.n)
            .map(|_| T::sample_normal(rng, params.mu, sigma))
            .collect(),
    )
}

/// Generation 0: `m` independent seeds with ids `0..m`.
pub fn init_population<T: Scalar, R: Rng + ?Sized>(
    params: &EvolutionParams<T>,
    rng: &mut R,
) -> Result<Population<T>, EvolutionError> {
    params.validate()?;
    let members = (0..params.m as u64)
        .map(|id| Member {
            id: MemberId(id),
            values: sample_latent(params, rng),
            provenance: Provenance::seed(),
        })
        .collect();
    Ok(Population { members, generation: 0 })
}

/// `mask_i ? a_i : b_i` with a fixed mask.
pub fn uniform_crossover_with_mask<T: Scalar>(
    a: &LatentVector<T>,
    b: &LatentVector<T>,
    mask: &[bool],
) -> Result<LatentVector<T>, EvolutionError> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), mask.len())?;
    let values = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .zip(mask)
        .map(|((&x, &y), &take_a)| if take_a { x } else { y })
        .collect();
    Ok(LatentVector::from_raw(values))
}

/// Per-coordinate choice between two parents under a `Bernoulli(0.5)` mask.
pub fn uniform_crossover<T: Scalar, R: Rng + ?Sized>(
    a: &LatentVector<T>,
    b: &LatentVector<T>,
    rng: &mut R,
) -> Result<LatentVector<T>, EvolutionError> {
    check_len(a.len(), b.len())?;
    let mask: Vec<bool> = (0..a.len()).map(|_| rng.random_bool(0.5)).collect();
    uniform_crossover_with_mask(a, b, &mask)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mutated<T> {
    pub vector: LatentVector<T>,
    /// Whether the Bernoulli gate fired (noise may still be zero when `std == 0`).
    pub fired: bool,
}

/// One whole-vector gate `~ Bernoulli(p)`; when it fires, adds `N(0, std)` noise to every coordinate.
pub fn mutate<T: Scalar, R: Rng + ?Sized>(
    v: &LatentVector<T>,
    mag: MutationMagnitude<T>,
    p: f64,
    rng: &mut R,
) -> Mutated<T> {
    let fired = rng.random_bool(p.clamp(0.0, 1.0));
    let std = mag.std();
    if !fired || std == T::zero() {
        return Mutated { vector: v.clone(), fired };
    }
    let mut values: Vec<T> = v
        .as_slice()
        .iter()
        .map(|&x| x + T::sample_normal(rng, T::zero(), std))
        .collect();
    // A huge std can overflow; keep the finiteness invariant by falling back to the parent value.
    for (out, &orig) in values.iter_mut().zip(v.as_slice()) {
        if !out.is_finite() {
            *out = orig;
        }
    }
    Mutated { vector: LatentVector::from_raw(values), fired }
}

/// Member counts of the next generation for a given selection size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationCounts {
    pub survivors: usize,
    pub crossover: usize,
    pub foreign: usize,
}

impl GenerationCounts {
    /// `Δ = m − selected`; crossover fills `max(0, Δ − foreign)` and foreign takes `min(foreign, Δ)`.
    pub fn for_selection(m: usize, foreign: usize, selected: usize) -> Self {
        let delta = m.saturating_sub(selected);
        Self {
            survivors: selected,
            crossover: delta.saturating_sub(foreign),
            foreign: foreign.min(delta),
        }
    }

    pub fn total(&self) -> usize {
        self.survivors + self.crossover + self.foreign
    }
}

/// Builds the next generation from the user's selection.
///
/// Output order is survivors (in selection order), crossover children, then
/// foreign samples. Every member receives a fresh id larger than any id in `pop`.
pub fn next_generation<T: Scalar, R: Rng + ?Sized>(
    pop: &Population<T>,
    selected: &[usize],
    mag: MutationMagnitude<T>,
    params: &EvolutionParams<T>,
    rng: &mut R,
) -> Result<Population<T>, EvolutionError> {
    params.validate()?;
    if pop.len() != params.m {
        return Err(EvolutionError::ShapeMismatch { expected: params.m, found: pop.len() });
    }
    if let Some(bad) = pop.members.iter().find(|m| m.values.len() != params.n) {
        return Err(EvolutionError::ShapeMismatch { expected: params.n, found: bad.values.len() });
    }
    validate_selection(selected, pop.len())?;

    let parents: Vec<&Member<T>> = selected.iter().map(|&i| &pop.members[i]).collect();
    let counts = GenerationCounts::for_selection(params.m, params.foreign, parents.len());

    let mut next_id = pop.members.iter().map(|m| m.id.0).max().map_or(0, |id| id + 1);
    let mut fresh_id = || {
        let id = MemberId(next_id);
        next_id += 1;
        id
    };

    // Draw order follows the reference loop: crossover, foreign, then survivor mutation.
    let mut crossover = Vec::with_capacity(counts.crossover);
    for _ in 0..counts.crossover {
        let a = parents[rng.random_range(0..parents.len())];
        let b = parents[rng.random_range(0..parents.len())];
        let child = uniform_crossover(&a.values, &b.values, rng)?;
        let Mutated { vector, fired } = mutate(&child, mag, params.p, rng);
        crossover.push((vector, Provenance::crossover(a.id, b.id, fired)));
    }

    let foreign: Vec<LatentVector<T>> =
        (0..counts.foreign).map(|_| sample_latent(params, rng)).collect();

    let survivors: Vec<(LatentVector<T>, Provenance)> = parents
        .iter()
        .map(|parent| {
            let Mutated { vector, fired } = mutate(&parent.values, mag, params.p, rng);
            (vector, Provenance::survivor(parent.id, fired))
        })
        .collect();

    let mut members = Vec::with_capacity(params.m);
    for (values, provenance) in survivors.into_iter().chain(crossover) {
        members.push(Member { id: fresh_id(), values, provenance });
    }
    for values in foreign {
        members.push(Member { id: fresh_id(), values, provenance: Provenance::foreign() });
    }
    debug_assert_eq!(members.len(), params.m);

    Ok(Population { members, generation: pop.generation + 1 })
}

fn validate_selection(selected: &[usize], len: usize) -> Result<(), EvolutionError> {
    if selected.is_empty() {
        return Err(EvolutionError::EmptySelection);
    }
    let mut seen = vec![false; len];
    for &index in selected {
        if index >= len {
            return Err(EvolutionError::IndexOutOfRange { index, len });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(EvolutionError::DuplicateIndex(index));
        }
    }
    Ok(())
}

fn check_len(expected: usize, found: usize) -> Result<(), EvolutionError> {
    if expected == found {
        Ok(())
    } else {
        Err(EvolutionError::ShapeMismatch { expected, found })
    }
}
