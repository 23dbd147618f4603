//! Genotype-to-phenotype mapping: latent vectors in, images out.

mod forward;
mod image;
mod model;
mod procedural;
mod weights;

use std::sync::Arc;

use rayon::prelude::*;

pub use self::image::Image;
pub use model::{
    transposed_output_size, BatchNorm, GeneratorModel, Layer, LayerSpec, Shape, TransposedConv, MAX_SPATIAL,
};
pub use procedural::{procedural_generate, Canvas, Superellipse, PROCEDURAL_LATENTS};
pub use weights::{load_model, read_header, save_model, LayerHeader, TensorRef, WeightHeader, FORMAT_VERSION, MAGIC};

use crate::evolution::LatentVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("bad magic {0:?}, expected \"DIEW\"")]
    BadMagic([u8; 4]),
    #[error("unsupported weight format version {0}")]
    UnsupportedVersion(u32),
    #[error("file truncated while reading {what}: need {needed} bytes, have {available}")]
    Truncated { what: &'static str, needed: u64, available: u64 },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("{extra} unreferenced bytes after the last tensor")]
    TrailingBytes { extra: u64 },
    #[error("layer {layer} tensor {tensor}: shape mismatch: {detail}")]
    ShapeMismatch { layer: usize, tensor: String, detail: String },
    #[error("layer {layer} tensor {tensor}: non-finite value at element {index}")]
    NonFinite { layer: usize, tensor: String, index: usize },
    #[error("layer {layer}: expects {found} input channels but receives {expected}")]
    ChannelChain { layer: usize, expected: usize, found: usize },
    #[error("{}: {reason}", match .layer { Some(l) => format!("layer {l}"), None => "model".to_owned() })]
    InvalidHyperparameter { layer: Option<usize>, reason: String },
    #[error("layer {layer}: running variance of channel {channel} is not positive")]
    VarianceNotPositive { layer: usize, channel: usize },
    #[error("the final layer must be tanh")]
    MissingOutputTanh,
    #[error("images need 1 or 3 channels, got {0}")]
    OutputChannels(usize),
    #[error("declared output {declared:?} differs from the computed {computed:?}")]
    OutputShapeMismatch { declared: Shape, computed: Shape },
    #[error("latent length {found}, generator expects {expected}")]
    LatentLength { expected: usize, found: usize },
    #[error("{width}x{height}x{channels} image cannot hold {len} values")]
    ImageSize { width: usize, height: usize, channels: usize, len: usize },
    #[error("pixel {index} lies outside [0, 1]")]
    PixelRange { index: usize },
    #[error("cannot compare images of sizes {left:?} and {right:?}")]
    ImageMismatch { left: (usize, usize, usize), right: (usize, usize, usize) },
    #[error("cannot decode image: {0}")]
    Decode(String),
}

/// Either a loaded neural network or the procedural stand-in.
#[derive(Clone, Debug)]
pub enum Generator<T> {
    Neural(Arc<GeneratorModel<T>>),
    Procedural(Canvas),
}

impl<T: Scalar> Generator<T> {
    /// Exact latent length for neural models; `None` means "at least [`PROCEDURAL_LATENTS`]".
    pub fn latent_dim(&self) -> Option<usize> {
        match self {
            Generator::Neural(m) => Some(m.latent_dim()),
            Generator::Procedural(_) => None,
        }
    }

    pub fn accepts_latent_dim(&self, n: usize) -> bool {
        match self {
            Generator::Neural(m) => m.latent_dim() == n,
            Generator::Procedural(_) => n >= PROCEDURAL_LATENTS,
        }
    }

    pub fn output_shape(&self) -> Shape {
        match self {
            Generator::Neural(m) => m.output_shape(),
            Generator::Procedural(c) => Shape { channels: 1, height: c.height, width: c.width },
        }
    }

    pub fn render(&self, batch: &[LatentVector<T>]) -> Result<Vec<Image<T>>, GeneratorError> {
        match self {
            Generator::Neural(m) => m.forward(batch),
            Generator::Procedural(canvas) => batch.par_iter().map(|z| procedural_generate(z, *canvas)).collect(),
        }
    }

    pub fn render_one(&self, latent: &LatentVector<T>) -> Result<Image<T>, GeneratorError> {
        match self {
            Generator::Neural(m) => Ok(m.forward(std::slice::from_ref(latent))?.remove(0)),
            Generator::Procedural(canvas) => procedural_generate(latent, *canvas),
        }
    }
}
