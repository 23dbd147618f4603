use rayon::prelude::*;

use super::model::{BatchNorm, GeneratorModel, Layer, Shape, TransposedConv};
use super::{GeneratorError, Image};
use crate::evolution::LatentVector;
use crate::scalar::Scalar;

/// Channel-major activation buffer.
#[derive(Clone, Debug)]
pub(crate) struct FeatureMap<T> {
    pub shape: Shape,
    pub data: Vec<T>,
}

impl<T: Scalar> GeneratorModel<T> {
    /// Renders every latent in `batch`. Output order matches input order.
    pub fn forward(&self, batch: &[LatentVector<T>]) -> Result<Vec<Image<T>>, GeneratorError> {
        if let Some(bad) = batch.iter().find(|z| z.len() != self.latent_dim()) {
            return Err(GeneratorError::LatentLength { expected: self.latent_dim(), found: bad.len() });
        }
        Ok(batch.par_iter().map(|z| self.forward_one(z)).collect())
    }

    fn forward_one(&self, z: &LatentVector<T>) -> Image<T> {
        let mut x = FeatureMap {
            shape: Shape { channels: self.latent_dim(), height: 1, width: 1 },
            data: z.as_slice().to_vec(),
        };
        for layer in self.layers() {
            match layer {
                Layer::TransposedConv(conv) => x = transposed_conv(conv, &x),
                Layer::BatchNorm(bn) => batch_norm(bn, &mut x),
                Layer::Relu => x.data.iter_mut().for_each(|v| *v = v.max(T::zero())),
                Layer::Tanh => x.data.iter_mut().for_each(|v| *v = v.tanh()),
            }
        }
        Image::from_tanh_chw(x.shape, &x.data)
    }
}

/// Scatter form: each input activation adds a scaled kernel patch to the output.
fn transposed_conv<T: Scalar>(conv: &TransposedConv<T>, x: &FeatureMap<T>) -> FeatureMap<T> {
    let (in_h, in_w) = (x.shape.height, x.shape.width);
    let out_h = conv.output_size(in_h).expect("validated at construction");
    let out_w = conv.output_size(in_w).expect("validated at construction");
    let (k, stride, pad) = (conv.kernel, conv.stride as isize, conv.padding as isize);
    let plane = out_h * out_w;

    let mut out = vec![T::zero(); conv.out_channels * plane];
    for (oc, chunk) in out.chunks_mut(plane).enumerate() {
        chunk.iter_mut().for_each(|v| *v = conv.bias[oc]);
    }

    for ic in 0..conv.in_channels {
        let input = &x.data[ic * in_h * in_w..(ic + 1) * in_h * in_w];
        for iy in 0..in_h {
            let base_y = iy as isize * stride - pad;
            let ky_lo = (-base_y).max(0) as usize;
            let ky_hi = ((out_h as isize - base_y).min(k as isize)).max(0) as usize;
            for ix in 0..in_w {
                let v = input[iy * in_w + ix];
                if v == T::zero() {
                    continue;
                }
                let base_x = ix as isize * stride - pad;
                let kx_lo = (-base_x).max(0) as usize;
                let kx_hi = ((out_w as isize - base_x).min(k as isize)).max(0) as usize;
                if kx_lo >= kx_hi {
                    continue;
                }
                let ox_lo = (base_x + kx_lo as isize) as usize;
                let span = kx_hi - kx_lo;
                for oc in 0..conv.out_channels {
                    let kernel = &conv.weight[(ic * conv.out_channels + oc) * k * k..][..k * k];
                    let dst = &mut out[oc * plane..(oc + 1) * plane];
                    for ky in ky_lo..ky_hi {
                        let oy = (base_y + ky as isize) as usize;
                        let row = &mut dst[oy * out_w..(oy + 1) * out_w];
                        let krow = &kernel[ky * k..(ky + 1) * k];
                        for (o, &w) in row[ox_lo..ox_lo + span].iter_mut().zip(&krow[kx_lo..kx_hi]) {
                            *o += v * w;
                        }
                    }
                }
            }
        }
    }

    FeatureMap {
        shape: Shape { channels: conv.out_channels, height: out_h, width: out_w },
        data: out,
    }
}

fn batch_norm<T: Scalar>(bn: &BatchNorm<T>, x: &mut FeatureMap<T>) {
    let plane = x.shape.height * x.shape.width;
    let eps = T::from_f64_lossy(bn.epsilon);
    for (c, chunk) in x.data.chunks_mut(plane).enumerate() {
        let scale = bn.gamma[c] / (bn.running_var[c] + eps).sqrt();
        let shift = bn.beta[c] - scale * bn.running_mean[c];
        chunk.iter_mut().for_each(|v| *v = *v * scale + shift);
    }
}
