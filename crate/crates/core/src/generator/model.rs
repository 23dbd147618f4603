use serde::{Deserialize, Serialize};

use super::GeneratorError;
use crate::scalar::Scalar;

/// Largest spatial extent a layer may produce. Bounds allocation for hostile weight files.
pub const MAX_SPATIAL: usize = 4096;

/// Channel-major feature map shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Layer kind plus its shape metadata, without parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerSpec {
    TransposedConv {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    BatchNorm {
        channels: usize,
    },
    Relu,
    Tanh,
}

/// Fractionally-strided convolution. `weight` is `[in, out, kernel, kernel]` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransposedConv<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T> TransposedConv<T> {
    /// `(in − 1)·stride − 2·padding + kernel`, or `None` when the result is not positive.
    pub fn output_size(&self, input: usize) -> Option<usize> {
        transposed_output_size(input, self.stride, self.padding, self.kernel)
    }

    #[inline]
    pub fn weight_at(&self, ic: usize, oc: usize, ky: usize, kx: usize) -> &T {
        let k = self.kernel;
        &self.weight[((ic * self.out_channels + oc) * k + ky) * k + kx]
    }
}

pub fn transposed_output_size(input: usize, stride: usize, padding: usize, kernel: usize) -> Option<usize> {
    let full = (input.checked_sub(1)?).checked_mul(stride)?.checked_add(kernel)?;
    full.checked_sub(2 * padding).filter(|&s| s >= 1)
}

/// Inference-mode batch normalization with stored running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm<T> {
    pub channels: usize,
    pub epsilon: f64,
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer<T> {
    TransposedConv(TransposedConv<T>),
    BatchNorm(BatchNorm<T>),
    Relu,
    Tanh,
}

impl<T> Layer<T> {
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::TransposedConv(c) => LayerSpec::TransposedConv {
                in_channels: c.in_channels,
                out_channels: c.out_channels,
                kernel: c.kernel,
                stride: c.stride,
                padding: c.padding,
            },
            Layer::BatchNorm(b) => LayerSpec::BatchNorm { channels: b.channels },
            Layer::Relu => LayerSpec::Relu,
            Layer::Tanh => LayerSpec::Tanh,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::TransposedConv(_) => "transposed_conv",
            Layer::BatchNorm(_) => "batch_norm",
            Layer::Relu => "relu",
            Layer::Tanh => "tanh",
        }
    }
}

/// A validated generator network mapping `latent_dim` inputs to an image.
///
/// The latent enters as a `latent_dim × 1 × 1` feature map. The final layer is
/// always `Tanh`, whose `[-1, 1]` output is rescaled to `[0, 1]` pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel<T> {
    latent_dim: usize,
    layers: Vec<Layer<T>>,
    output: Shape,
}

impl<T: Scalar> GeneratorModel<T> {
    pub fn new(latent_dim: usize, layers: Vec<Layer<T>>) -> Result<Self, GeneratorError> {
        let output = validate(latent_dim, &layers)?;
        Ok(Self { latent_dim, layers, output })
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn output_shape(&self) -> Shape {
        self.output
    }

    /// Shape of the feature map entering each layer, followed by the final output shape.
    pub fn shape_trace(&self) -> Vec<Shape> {
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        let mut shape = Shape { channels: self.latent_dim, height: 1, width: 1 };
        shapes.push(shape);
        for layer in &self.layers {
            if let Layer::TransposedConv(c) = layer {
                shape = Shape {
                    channels: c.out_channels,
                    height: c.output_size(shape.height).unwrap_or(0),
                    width: c.output_size(shape.width).unwrap_or(0),
                };
            }
            shapes.push(shape);
        }
        shapes
    }
}

fn validate<T: Scalar>(latent_dim: usize, layers: &[Layer<T>]) -> Result<Shape, GeneratorError> {
    if latent_dim == 0 {
        return Err(GeneratorError::InvalidHyperparameter {
            layer: None,
            reason: "latent_dim must be at least 1".into(),
        });
    }
    let mut shape = Shape { channels: latent_dim, height: 1, width: 1 };
    for (index, layer) in layers.iter().enumerate() {
        let bad = |reason: String| GeneratorError::InvalidHyperparameter { layer: Some(index), reason };
        match layer {
            Layer::TransposedConv(c) => {
                if c.in_channels != shape.channels {
                    return Err(GeneratorError::ChannelChain {
                        layer: index,
                        expected: shape.channels,
                        found: c.in_channels,
                    });
                }
                if c.out_channels == 0 {
                    return Err(bad("out_channels must be at least 1".into()));
                }
                if c.kernel == 0 || c.stride == 0 {
                    return Err(bad("kernel and stride must be at least 1".into()));
                }
                let expected = c
                    .in_channels
                    .checked_mul(c.out_channels)
                    .and_then(|v| v.checked_mul(c.kernel))
                    .and_then(|v| v.checked_mul(c.kernel))
                    .ok_or_else(|| bad("weight tensor is too large".into()))?;
                check_len(index, "weight", expected, c.weight.len())?;
                check_len(index, "bias", c.out_channels, c.bias.len())?;
                check_finite(index, "weight", &c.weight)?;
                check_finite(index, "bias", &c.bias)?;
                let height = c.output_size(shape.height);
                let width = c.output_size(shape.width);
                match (height, width) {
                    (Some(h), Some(w)) if h <= MAX_SPATIAL && w <= MAX_SPATIAL => {
                        shape = Shape { channels: c.out_channels, height: h, width: w };
                    }
                    _ => {
                        return Err(bad(format!(
                            "kernel {} stride {} padding {} gives an invalid output size for a {}x{} input",
                            c.kernel, c.stride, c.padding, shape.height, shape.width
                        )))
                    }
                }
            }
            Layer::BatchNorm(b) => {
                if b.channels != shape.channels {
                    return Err(GeneratorError::ChannelChain {
                        layer: index,
                        expected: shape.channels,
                        found: b.channels,
                    });
                }
                if !(b.epsilon.is_finite() && b.epsilon >= 0.0) {
                    return Err(bad(format!("epsilon {} must be finite and non-negative", b.epsilon)));
                }
                for (name, tensor) in [
                    ("gamma", &b.gamma),
                    ("beta", &b.beta),
                    ("running_mean", &b.running_mean),
                    ("running_var", &b.running_var),
                ] {
                    check_len(index, name, b.channels, tensor.len())?;
                    check_finite(index, name, tensor)?;
                }
                if let Some(channel) = b.running_var.iter().position(|&v| v <= T::zero()) {
                    return Err(GeneratorError::VarianceNotPositive { layer: index, channel });
                }
            }
            Layer::Relu | Layer::Tanh => {}
        }
    }
    if !matches!(layers.last(), Some(Layer::Tanh)) {
        return Err(GeneratorError::MissingOutputTanh);
    }
    if !matches!(shape.channels, 1 | 3) {
        return Err(GeneratorError::OutputChannels(shape.channels));
    }
    Ok(shape)
}

fn check_len(layer: usize, tensor: &str, expected: usize, found: usize) -> Result<(), GeneratorError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeneratorError::ShapeMismatch {
            layer,
            tensor: tensor.to_owned(),
            detail: format!("expected {expected} elements, found {found}"),
        })
    }
}

fn check_finite<T: Scalar>(layer: usize, tensor: &str, values: &[T]) -> Result<(), GeneratorError> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(index) => Err(GeneratorError::NonFinite { layer, tensor: tensor.to_owned(), index }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(i: usize, o: usize, k: usize, s: usize, p: usize) -> Layer<f64> {
        Layer::TransposedConv(TransposedConv {
            in_channels: i,
            out_channels: o,
            kernel: k,
            stride: s,
            padding: p,
            weight: vec![0.1; i * o * k * k],
            bias: vec![0.0; o],
        })
    }

    #[test]
    fn output_size_formula() {
        assert_eq!(transposed_output_size(1, 1, 0, 4), Some(4));
        assert_eq!(transposed_output_size(4, 2, 1, 4), Some(8));
        assert_eq!(transposed_output_size(1, 1, 2, 3), None);
    }

    #[test]
    fn dcgan_style_chain() {
        let model = GeneratorModel::new(
            20,
            vec![conv(20, 8, 4, 1, 0), Layer::Relu, conv(8, 3, 4, 2, 1), Layer::Tanh],
        )
        .unwrap();
        assert_eq!(model.output_shape(), Shape { channels: 3, height: 8, width: 8 });
        let trace = model.shape_trace();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace[2], Shape { channels: 8, height: 4, width: 4 });
    }

    #[test]
    fn rejects_broken_chain() {
        let err = GeneratorModel::new(4, vec![conv(5, 1, 2, 1, 0), Layer::Tanh]).unwrap_err();
        assert!(matches!(err, GeneratorError::ChannelChain { layer: 0, expected: 4, found: 5 }));
    }

    #[test]
    fn rejects_missing_tanh_and_bad_channels() {
        assert!(matches!(
            GeneratorModel::new(2, vec![conv(2, 1, 2, 1, 0)]),
            Err(GeneratorError::MissingOutputTanh)
        ));
        assert!(matches!(
            GeneratorModel::new(2, vec![conv(2, 2, 2, 1, 0), Layer::Tanh]),
            Err(GeneratorError::OutputChannels(2))
        ));
    }

    #[test]
    fn rejects_non_positive_variance() {
        let bn = Layer::BatchNorm(BatchNorm {
            channels: 1,
            epsilon: 1e-5,
            gamma: vec![1.0],
            beta: vec![0.0],
            running_mean: vec![0.0],
            running_var: vec![0.0],
        });
        let err = GeneratorModel::new(2, vec![conv(2, 1, 2, 1, 0), bn, Layer::Tanh]).unwrap_err();
        assert!(matches!(err, GeneratorError::VarianceNotPositive { layer: 1, channel: 0 }));
    }

    #[test]
    fn rejects_wrong_tensor_length() {
        let mut layer = conv(2, 1, 2, 1, 0);
        if let Layer::TransposedConv(c) = &mut layer {
            c.weight.pop();
        }
        assert!(matches!(
            GeneratorModel::new(2, vec![layer, Layer::Tanh]),
            Err(GeneratorError::ShapeMismatch { layer: 0, .. })
        ));
    }
}
