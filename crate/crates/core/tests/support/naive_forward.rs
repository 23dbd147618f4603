//! Brute-force generator forward pass, written from the layer definitions alone.
//! Shared by the oracle tests in several crates; keep it independent of the runtime's code paths.

#![allow(dead_code, clippy::needless_range_loop)]

use deepie_core::generator::{BatchNorm, GeneratorModel, Layer, TransposedConv};
use rand::Rng;

/// Channel-major tensor `[c][y][x]`.
pub type Tensor = Vec<Vec<Vec<f64>>>;

/// Gather form: every output pixel sums all (input pixel, kernel tap) pairs that land on it.
pub fn naive_transposed_conv(conv: &TransposedConv<f64>, input: &Tensor) -> Tensor {
    let in_h = input[0].len();
    let in_w = input[0][0].len();
    let k = conv.kernel as i64;
    let s = conv.stride as i64;
    let p = conv.padding as i64;
    let out_h = ((in_h as i64 - 1) * s - 2 * p + k) as usize;
    let out_w = ((in_w as i64 - 1) * s - 2 * p + k) as usize;
    let mut out = vec![vec![vec![0.0; out_w]; out_h]; conv.out_channels];
    for oc in 0..conv.out_channels {
        for oy in 0..out_h as i64 {
            for ox in 0..out_w as i64 {
                let mut acc = conv.bias[oc];
                for ic in 0..conv.in_channels {
                    for iy in 0..in_h as i64 {
                        for ix in 0..in_w as i64 {
                            let ky = oy + p - iy * s;
                            let kx = ox + p - ix * s;
                            if (0..k).contains(&ky) && (0..k).contains(&kx) {
                                let w = conv.weight[((ic * conv.out_channels + oc) * conv.kernel + ky as usize)
                                    * conv.kernel
                                    + kx as usize];
                                acc += input[ic][iy as usize][ix as usize] * w;
                            }
                        }
                    }
                }
                out[oc][oy as usize][ox as usize] = acc;
            }
        }
    }
    out
}

pub fn naive_batch_norm(bn: &BatchNorm<f64>, x: &mut Tensor) {
    for (c, plane) in x.iter_mut().enumerate() {
        for v in plane.iter_mut().flatten() {
            *v = bn.gamma[c] * (*v - bn.running_mean[c]) / (bn.running_var[c] + bn.epsilon).sqrt() + bn.beta[c];
        }
    }
}

/// Returns interleaved `[y][x][c]` pixels in `[0, 1]`.
pub fn naive_forward(model: &GeneratorModel<f64>, latent: &[f64]) -> Vec<f64> {
    let mut x: Tensor = latent.iter().map(|&v| vec![vec![v]]).collect();
    for layer in model.layers() {
        match layer {
            Layer::TransposedConv(c) => x = naive_transposed_conv(c, &x),
            Layer::BatchNorm(bn) => naive_batch_norm(bn, &mut x),
            Layer::Relu => x.iter_mut().flatten().flatten().for_each(|v| *v = if *v > 0.0 { *v } else { 0.0 }),
            Layer::Tanh => x.iter_mut().flatten().flatten().for_each(|v| *v = v.tanh()),
        }
    }
    let (h, w) = (x[0].len(), x[0][0].len());
    let mut pixels = Vec::with_capacity(x.len() * h * w);
    for y in 0..h {
        for xx in 0..w {
            for plane in &x {
                pixels.push((plane[y][xx] + 1.0) / 2.0);
            }
        }
    }
    pixels
}

fn normals<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0) * scale).collect()
}

/// Random model with 1–3 transposed convolutions, optional batch norm / ReLU between them,
/// a final tanh and an output of at most 16×16.
pub fn random_model<R: Rng>(rng: &mut R, latent_dim: usize) -> GeneratorModel<f64> {
    let convs = rng.random_range(1..=3);
    let mut layers = Vec::new();
    let mut channels = latent_dim;
    let mut size = 1usize;
    for i in 0..convs {
        let last = i + 1 == convs;
        let out_channels = if last { [1, 3][rng.random_range(0..2)] } else { rng.random_range(1..=5) };
        let (kernel, stride, padding) = loop {
            let kernel = rng.random_range(1..=4);
            let stride = rng.random_range(1..=2);
            let padding = if size > 1 { rng.random_range(0..=1) } else { 0 };
            let out = (size as i64 - 1) * stride as i64 - 2 * padding as i64 + kernel as i64;
            if (1..=16).contains(&out) {
                size = out as usize;
                break (kernel, stride, padding);
            }
        };
        let fan = (channels * kernel * kernel) as f64;
        layers.push(Layer::TransposedConv(TransposedConv {
            in_channels: channels,
            out_channels,
            kernel,
            stride,
            padding,
            weight: normals(rng, channels * out_channels * kernel * kernel, 2.0 / fan.sqrt()),
            bias: normals(rng, out_channels, 0.2),
        }));
        channels = out_channels;
        if !last {
            if rng.random_bool(0.7) {
                layers.push(Layer::BatchNorm(BatchNorm {
                    channels,
                    epsilon: 1e-5,
                    gamma: normals(rng, channels, 1.5),
                    beta: normals(rng, channels, 0.5),
                    running_mean: normals(rng, channels, 0.5),
                    running_var: (0..channels).map(|_| rng.random_range(0.2..2.0)).collect(),
                }));
            }
            layers.push(if rng.random_bool(0.8) { Layer::Relu } else { Layer::Tanh });
        }
    }
    layers.push(Layer::Tanh);
    GeneratorModel::new(latent_dim, layers).expect("random model construction is valid")
}
