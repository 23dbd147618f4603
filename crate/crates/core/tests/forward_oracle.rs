mod support;

use deepie_core::evolution::LatentVector;
use deepie_core::generator::{load_model, save_model, transposed_output_size, GeneratorModel, Layer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::naive_forward::{naive_forward, random_model};

fn random_latents(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<LatentVector<f64>> {
    (0..count)
        .map(|_| LatentVector::new((0..n).map(|_| rng.random_range(-2.5..2.5)).collect()).unwrap())
        .collect()
}

#[test]
fn optimized_forward_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let model = random_model(&mut rng, n);
        let batch = random_latents(&mut rng, n, 4);
        let images = model.forward(&batch).unwrap();
        for (z, img) in batch.iter().zip(&images) {
            let expected = naive_forward(&model, z.as_slice());
            assert_eq!(img.pixels().len(), expected.len());
            for (a, b) in img.pixels().iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst <= 1e-4, "max per-pixel deviation {worst}");
}

#[test]
fn realized_sizes_follow_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let model = random_model(&mut rng, 3);
        let trace = model.shape_trace();
        for (i, layer) in model.layers().iter().enumerate() {
            if let Layer::TransposedConv(c) = layer {
                let (inp, out) = (trace[i], trace[i + 1]);
                assert_eq!(Some(out.height), transposed_output_size(inp.height, c.stride, c.padding, c.kernel));
                assert_eq!(out.height, (inp.height - 1) * c.stride + c.kernel - 2 * c.padding);
            }
        }
        let img = model.forward(&random_latents(&mut rng, 3, 1)).unwrap().remove(0);
        let out = model.output_shape();
        assert_eq!((img.height(), img.width(), img.channels()), (out.height, out.width, out.channels));
    }
}

#[test]
fn batch_items_do_not_interact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = random_model(&mut rng, 6);
    let batch = random_latents(&mut rng, 6, 2);
    let together = model.forward(&batch).unwrap();
    let a = model.forward(&batch[..1]).unwrap();
    let b = model.forward(&batch[1..]).unwrap();
    assert_eq!(together[0], a[0]);
    assert_eq!(together[1], b[0]);
    assert_eq!(model.forward(&batch).unwrap(), together);
}

#[test]
fn far_out_latents_give_valid_pixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let model = random_model(&mut rng, 4);
        let z = LatentVector::new(vec![1e30, -1e30, 3e20, 0.0]).unwrap();
        let img = model.forward(&[z]).unwrap().remove(0);
        assert!(img.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn wrong_latent_length_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = random_model(&mut rng, 4);
    assert!(model.forward(&[LatentVector::zeros(5)]).is_err());
}

#[test]
fn f32_and_f64_runtimes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let model = random_model(&mut rng, 5);
    let bytes = save_model(&model);
    let m64: GeneratorModel<f64> = load_model(&bytes).unwrap();
    let m32: GeneratorModel<f32> = load_model(&bytes).unwrap();
    let z = random_latents(&mut rng, 5, 3);
    let z32: Vec<LatentVector<f32>> = z
        .iter()
        .map(|v| LatentVector::new(v.as_slice().iter().map(|&x| x as f32).collect()).unwrap())
        .collect();
    for (a, b) in m64.forward(&z).unwrap().iter().zip(m32.forward(&z32).unwrap().iter()) {
        for (x, y) in a.pixels().iter().zip(b.pixels()) {
            assert!((x - *y as f64).abs() < 1e-4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_file_round_trips(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, n);
        let bytes = save_model(&model);
        let loaded: GeneratorModel<f64> = load_model(&bytes).unwrap();
        prop_assert_eq!(save_model(&loaded), bytes);
    }

    #[test]
    fn truncated_files_never_load(seed in any::<u64>(), frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bytes = save_model(&random_model(&mut rng, 3));
        let cut = ((bytes.len() as f64) * frac) as usize;
        prop_assert!(load_model::<f64>(&bytes[..cut]).is_err());
    }
}
