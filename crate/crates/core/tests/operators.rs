//! Statistical checks and invariants of the evolution operators.

use std::collections::HashSet;

use deepie_core::evolution::{
    init_population, mutate, next_generation, uniform_crossover, EvolutionParams, GenerationCounts, LatentVector,
    MutationMagnitude, Population, ProvenanceKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn crossover_takes_half_from_each_parent() {
    let a = LatentVector::new(vec![1.0f64; 20]).unwrap();
    let b = LatentVector::new(vec![0.0f64; 20]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let mut from_a = 0usize;
    for _ in 0..10_000 {
        let child = uniform_crossover(&a, &b, &mut rng).unwrap();
        from_a += child.as_slice().iter().filter(|&&v| v == 1.0).count();
    }
    let frac = from_a as f64 / 200_000.0;
    assert!((0.47..=0.53).contains(&frac), "fraction {frac}");
}

#[test]
fn mutation_delta_has_unit_variance() {
    let v = LatentVector::new((0..20).map(|i| i as f64 * 0.1).collect()).unwrap();
    let mag = MutationMagnitude::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let trials = 10_000;
    let mut sum = [0.0f64; 20];
    let mut sq = [0.0f64; 20];
    for _ in 0..trials {
        let out = mutate(&v, mag, 1.0, &mut rng);
        assert!(out.fired);
        for i in 0..20 {
            let d = out.vector[i] - v[i];
            sum[i] += d;
            sq[i] += d * d;
        }
    }
    for i in 0..20 {
        let mean = sum[i] / trials as f64;
        let var = (sq[i] - trials as f64 * mean * mean) / (trials as f64 - 1.0);
        assert!((0.9..=1.1).contains(&var), "coordinate {i}: variance {var}");
    }
}

#[test]
fn half_of_vectors_are_mutated() {
    let v = LatentVector::new(vec![0.0f64; 20]).unwrap();
    let mag = MutationMagnitude::new(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fired = (0..10_000).filter(|_| mutate(&v, mag, 0.5, &mut rng).fired).count();
    let frac = fired as f64 / 10_000.0;
    assert!((0.47..=0.53).contains(&frac), "fraction {frac}");
}

#[test]
fn three_selected_gives_fifteen_children_and_two_foreign() {
    let params = EvolutionParams::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pop = init_population(&params, &mut rng).unwrap();
    let next = next_generation(&pop, &[2, 7, 11], MutationMagnitude::new(0.5).unwrap(), &params, &mut rng).unwrap();
    assert_eq!(next.count(ProvenanceKind::Survivor), 3);
    assert_eq!(next.count(ProvenanceKind::Crossover), 15);
    assert_eq!(next.count(ProvenanceKind::Foreign), 2);
    let kinds: Vec<_> = next.members.iter().map(|m| m.provenance.kind()).collect();
    assert!(kinds[..3].iter().all(|&k| k == ProvenanceKind::Survivor));
    assert!(kinds[3..18].iter().all(|&k| k == ProvenanceKind::Crossover));
    assert!(kinds[18..].iter().all(|&k| k == ProvenanceKind::Foreign));
    assert_eq!(next.generation, 1);
}

#[test]
fn population_serializes_as_plain_json() {
    let params = EvolutionParams::<f64> { m: 2, n: 3, ..Default::default() };
    let pop = init_population(&params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let json = serde_json::to_value(&pop).unwrap();
    assert_eq!(json["generation"], 0);
    assert_eq!(json["members"][0]["id"], 0);
    assert_eq!(json["members"][0]["provenance"]["kind"], "seed");
    assert_eq!(json["members"][1]["values"].as_array().unwrap().len(), 3);
    let back: Population<f64> = serde_json::from_value(json).unwrap();
    assert!(back.bit_eq(&pop));
}

fn selection_strategy() -> impl Strategy<Value = (u64, Vec<usize>, usize, usize)> {
    (1usize..=24, 0usize..=4).prop_flat_map(|(m, foreign)| {
        let foreign = foreign.min(m);
        (any::<u64>(), proptest::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=m), Just(m), Just(foreign))
    })
}

fn setup(seed: u64, m: usize, foreign: usize, p: f64) -> (EvolutionParams<f64>, Population<f64>, ChaCha8Rng) {
    let params = EvolutionParams::<f64> { m, n: 8, foreign, p, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop = init_population(&params, &mut rng).unwrap();
    (params, pop, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn size_and_counts((seed, selected, m, foreign) in selection_strategy(), std in 0.0f64..1.0) {
        let (params, pop, mut rng) = setup(seed, m, foreign, 0.5);
        let next = next_generation(&pop, &selected, MutationMagnitude::new(std).unwrap(), &params, &mut rng).unwrap();
        let counts = GenerationCounts::for_selection(m, foreign, selected.len());
        prop_assert_eq!(next.len(), m);
        prop_assert_eq!(next.count(ProvenanceKind::Survivor), selected.len());
        prop_assert_eq!(next.count(ProvenanceKind::Crossover), counts.crossover);
        prop_assert_eq!(next.count(ProvenanceKind::Foreign), foreign.min(m - selected.len()));
    }

    #[test]
    fn elitism_at_zero_noise((seed, selected, m, foreign) in selection_strategy()) {
        let (params, pop, mut rng) = setup(seed, m, foreign, 0.5);
        let next = next_generation(&pop, &selected, MutationMagnitude::zero(), &params, &mut rng).unwrap();
        for (slot, &i) in selected.iter().enumerate() {
            prop_assert!(next.members[slot].values.bit_eq(&pop.members[i].values));
        }
    }

    #[test]
    fn crossover_closure((seed, selected, m, foreign) in selection_strategy()) {
        let (params, pop, mut rng) = setup(seed, m, foreign, 0.5);
        let next = next_generation(&pop, &selected, MutationMagnitude::zero(), &params, &mut rng).unwrap();
        let parents: Vec<_> = selected.iter().map(|&i| &pop.members[i]).collect();
        for child in next.members.iter().filter(|m| m.provenance.kind() == ProvenanceKind::Crossover) {
            let ids = child.provenance.parents();
            prop_assert!(ids.iter().all(|id| parents.iter().any(|p| p.id == *id)));
            for j in 0..params.n {
                let v = child.values[j];
                prop_assert!(parents.iter().any(|p| p.values[j].to_bits() == v.to_bits()));
            }
        }
    }

    #[test]
    fn deterministic_under_seed((seed, selected, m, foreign) in selection_strategy(), std in 0.0f64..1.0) {
        let (params, pop, _) = setup(seed, m, foreign, 0.5);
        let mag = MutationMagnitude::new(std).unwrap();
        let a = next_generation(&pop, &selected, mag, &params, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        let b = next_generation(&pop, &selected, mag, &params, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        prop_assert!(a.bit_eq(&b));
    }

    #[test]
    fn no_selection_leak((seed, selected, m, foreign) in selection_strategy(), std in 0.0f64..1.0) {
        let (params, pop, mut rng) = setup(seed, m, foreign, 0.5);
        let next = next_generation(&pop, &selected, MutationMagnitude::new(std).unwrap(), &params, &mut rng).unwrap();
        let old: HashSet<_> = pop.members.iter().map(|m| m.id).collect();
        let chosen: HashSet<_> = selected.iter().map(|&i| pop.members[i].id).collect();
        for member in &next.members {
            prop_assert!(!old.contains(&member.id));
            prop_assert!(member.provenance.parents().iter().all(|id| chosen.contains(id)));
            prop_assert!(member.provenance.is_consistent());
        }
    }
}
