use deepie_core::evolution::LatentVector;
use deepie_core::generator::{procedural_generate, Canvas};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

#[test]
fn nearby_latents_give_nearby_images() {
    let canvas = Canvas { width: 32, height: 32 };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for pair in 0..100 {
        let base: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let dir = unit_direction(&mut rng, 6);
        let at = |scale: f64| {
            let z: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + scale * d).collect();
            procedural_generate(&LatentVector::new(z).unwrap(), canvas).unwrap()
        };
        let origin = at(0.0);
        let near = origin.distance(&at(0.01)).unwrap();
        let far = origin.distance(&at(1.0)).unwrap();
        assert!(near < far, "pair {pair}: {near} vs {far}");
    }
}
