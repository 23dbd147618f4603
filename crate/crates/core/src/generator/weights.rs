//! Portable generator weight file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DIEW"            4 bytes magic
//! version           u32 (currently 1)
//! header_len        u64
//! header            header_len bytes of UTF-8 JSON
//! payload           f32 tensors, row-major
//! ```
//!
//! Tensor offsets in the header are byte offsets relative to the start of the
//! payload. [`save_model`] writes the header as compact JSON in field order and
//! packs tensors contiguously in declaration order; this is the canonical form,
//! and `save_model(load_model(f)) == f` holds for any canonical file.

use serde::{Deserialize, Serialize};

use super::model::{BatchNorm, GeneratorModel, Layer, Shape, TransposedConv};
use super::GeneratorError;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"DIEW";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE: usize = 4 + 4 + 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRef {
    pub shape: Vec<usize>,
    /// Byte offset from the start of the payload.
    pub offset: u64,
    /// Element count; must equal the product of `shape`.
    pub length: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerHeader {
    TransposedConv {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        weight: TensorRef,
        bias: TensorRef,
    },
    BatchNorm {
        channels: usize,
        epsilon: f64,
        gamma: TensorRef,
        beta: TensorRef,
        running_mean: TensorRef,
        running_var: TensorRef,
    },
    Relu,
    Tanh,
}

/// JSON header of a weight file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightHeader {
    pub latent_dim: usize,
    pub output: Shape,
    pub layers: Vec<LayerHeader>,
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<GeneratorModel<T>, GeneratorError> {
    let (header, payload) = split(bytes)?;
    let tensors = PayloadReader { payload };
    let mut layers = Vec::with_capacity(header.layers.len());
    let mut consumed = 0u64;
    for (index, layer) in header.layers.iter().enumerate() {
        let mut read = |name: &str, r: &TensorRef, shape: &[usize]| -> Result<Vec<T>, GeneratorError> {
            let values = tensors.read(index, name, r, shape)?;
            consumed = consumed.max(r.offset + 4 * r.length);
            Ok(values)
        };
        layers.push(match layer {
            LayerHeader::TransposedConv { in_channels, out_channels, kernel, stride, padding, weight, bias } => {
                let (i, o, k) = (*in_channels, *out_channels, *kernel);
                Layer::TransposedConv(TransposedConv {
                    in_channels: i,
                    out_channels: o,
                    kernel: k,
                    stride: *stride,
                    padding: *padding,
                    weight: read("weight", weight, &[i, o, k, k])?,
                    bias: read("bias", bias, &[o])?,
                })
            }
            LayerHeader::BatchNorm { channels, epsilon, gamma, beta, running_mean, running_var } => {
                let ch = [*channels];
                Layer::BatchNorm(BatchNorm {
                    channels: *channels,
                    epsilon: *epsilon,
                    gamma: read("gamma", gamma, &ch)?,
                    beta: read("beta", beta, &ch)?,
                    running_mean: read("running_mean", running_mean, &ch)?,
                    running_var: read("running_var", running_var, &ch)?,
                })
            }
            LayerHeader::Relu => Layer::Relu,
            LayerHeader::Tanh => Layer::Tanh,
        });
    }
    if consumed < payload.len() as u64 {
        return Err(GeneratorError::TrailingBytes { extra: payload.len() as u64 - consumed });
    }
    let model = GeneratorModel::new(header.latent_dim, layers)?;
    if model.output_shape() != header.output {
        return Err(GeneratorError::OutputShapeMismatch { declared: header.output, computed: model.output_shape() });
    }
    Ok(model)
}

/// Reads only the header, without touching tensor data.
pub fn read_header(bytes: &[u8]) -> Result<WeightHeader, GeneratorError> {
    split(bytes).map(|(header, _)| header)
}

pub fn save_model<T: Scalar>(model: &GeneratorModel<T>) -> Vec<u8> {
    let mut payload: Vec<u8> = Vec::new();
    let mut push = |shape: Vec<usize>, values: &[T]| -> TensorRef {
        let offset = payload.len() as u64;
        for v in values {
            payload.extend_from_slice(&v.to_stored().to_le_bytes());
        }
        TensorRef { shape, offset, length: values.len() as u64 }
    };
    let layers = model
        .layers()
        .iter()
        .map(|layer| match layer {
            Layer::TransposedConv(c) => LayerHeader::TransposedConv {
                in_channels: c.in_channels,
                out_channels: c.out_channels,
                kernel: c.kernel,
                stride: c.stride,
                padding: c.padding,
                weight: push(vec![c.in_channels, c.out_channels, c.kernel, c.kernel], &c.weight),
                bias: push(vec![c.out_channels], &c.bias),
            },
            Layer::BatchNorm(b) => LayerHeader::BatchNorm {
                channels: b.channels,
                epsilon: b.epsilon,
                gamma: push(vec![b.channels], &b.gamma),
                beta: push(vec![b.channels], &b.beta),
                running_mean: push(vec![b.channels], &b.running_mean),
                running_var: push(vec![b.channels], &b.running_var),
            },
            Layer::Relu => LayerHeader::Relu,
            Layer::Tanh => LayerHeader::Tanh,
        })
        .collect();
    let header = WeightHeader { latent_dim: model.latent_dim(), output: model.output_shape(), layers };
    let json = serde_json::to_vec(&header).expect("header serialization is infallible");

    let mut out = Vec::with_capacity(PREAMBLE + json.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&payload);
    out
}

fn split(bytes: &[u8]) -> Result<(WeightHeader, &[u8]), GeneratorError> {
    let truncated = |what: &'static str, needed: u64| GeneratorError::Truncated {
        what,
        needed,
        available: bytes.len() as u64,
    };
    if bytes.len() < 4 {
        return Err(truncated("magic", 4));
    }
    if &bytes[..4] != MAGIC {
        return Err(GeneratorError::BadMagic([bytes[0], bytes[1], bytes[2], bytes[3]]));
    }
    if bytes.len() < PREAMBLE {
        return Err(truncated("preamble", PREAMBLE as u64));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(GeneratorError::UnsupportedVersion(version));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let header_end = (PREAMBLE as u64)
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len() as u64)
        .ok_or_else(|| truncated("header", (PREAMBLE as u64).saturating_add(header_len)))?;
    let header_bytes = &bytes[PREAMBLE..header_end as usize];
    let header: WeightHeader =
        serde_json::from_slice(header_bytes).map_err(|e| GeneratorError::InvalidHeader(e.to_string()))?;
    Ok((header, &bytes[header_end as usize..]))
}

struct PayloadReader<'a> {
    payload: &'a [u8],
}

impl PayloadReader<'_> {
    fn read<T: Scalar>(&self, layer: usize, name: &str, r: &TensorRef, expected: &[usize]) -> Result<Vec<T>, GeneratorError> {
        let mismatch = |detail: String| GeneratorError::ShapeMismatch { layer, tensor: name.to_owned(), detail };
        if r.shape != expected {
            return Err(mismatch(format!("declared shape {:?}, layer requires {:?}", r.shape, expected)));
        }
        let product = r.shape.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d as u64));
        if product != Some(r.length) {
            return Err(mismatch(format!("declared length {} is not the product of shape {:?}", r.length, r.shape)));
        }
        if !r.offset.is_multiple_of(4) {
            return Err(mismatch(format!("offset {} is not 4-byte aligned", r.offset)));
        }
        let end = r.length.checked_mul(4).and_then(|n| n.checked_add(r.offset));
        let end = match end {
            Some(end) if end <= self.payload.len() as u64 => end as usize,
            _ => {
                return Err(GeneratorError::Truncated {
                    what: "tensor payload",
                    needed: end.unwrap_or(u64::MAX),
                    available: self.payload.len() as u64,
                })
            }
        };
        let mut values = Vec::with_capacity(r.length as usize);
        for (index, chunk) in self.payload[r.offset as usize..end].chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(GeneratorError::NonFinite { layer, tensor: name.to_owned(), index });
            }
            values.push(T::from_stored(v));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smallest legal file, assembled by hand: latent 2 → 1×4×4 via one transposed conv, then tanh.
    fn minimal_file() -> Vec<u8> {
        let header = br#"{"latent_dim":2,"output":{"channels":1,"height":4,"width":4},"layers":[{"kind":"transposed_conv","in_channels":2,"out_channels":1,"kernel":4,"stride":1,"padding":0,"weight":{"shape":[2,1,4,4],"offset":0,"length":32},"bias":{"shape":[1],"offset":128,"length":1}},{"kind":"tanh"}]}"#;
        let mut f = Vec::new();
        f.extend_from_slice(b"DIEW");
        f.extend_from_slice(&1u32.to_le_bytes());
        f.extend_from_slice(&(header.len() as u64).to_le_bytes());
        f.extend_from_slice(header);
        for i in 0..32 {
            f.extend_from_slice(&(i as f32 * 0.01).to_le_bytes());
        }
        f.extend_from_slice(&0.25f32.to_le_bytes());
        f
    }

    #[test]
    fn loads_minimal_file() {
        let model = load_model::<f64>(&minimal_file()).unwrap();
        assert_eq!(model.layers().len(), 2);
        assert_eq!(model.latent_dim(), 2);
        assert_eq!(model.output_shape(), Shape { channels: 1, height: 4, width: 4 });
    }

    #[test]
    fn minimal_file_round_trips_bytewise() {
        let f = minimal_file();
        assert_eq!(save_model(&load_model::<f64>(&f).unwrap()), f);
        assert_eq!(save_model(&load_model::<f32>(&f).unwrap()), f);
    }

    #[test]
    fn length_not_matching_shape() {
        let mut f = minimal_file();
        let pos = find(&f, br#""length":32"#);
        f[pos + 10] = b'1';
        assert!(matches!(load_model::<f64>(&f), Err(GeneratorError::ShapeMismatch { layer: 0, .. })));
    }

    #[test]
    fn bad_magic_and_version() {
        let mut f = minimal_file();
        f[0] = b'X';
        assert!(matches!(load_model::<f64>(&f), Err(GeneratorError::BadMagic(_))));
        let mut f = minimal_file();
        f[4] = 2;
        assert!(matches!(load_model::<f64>(&f), Err(GeneratorError::UnsupportedVersion(2))));
    }

    #[test]
    fn truncation_is_detected_everywhere() {
        let f = minimal_file();
        for cut in [0, 3, 10, 40, f.len() - 1] {
            let err = load_model::<f64>(&f[..cut]).unwrap_err();
            assert!(
                matches!(err, GeneratorError::Truncated { .. } | GeneratorError::InvalidHeader(_)),
                "cut {cut}: {err:?}"
            );
        }
        assert!(matches!(load_model::<f64>(&f[..f.len() - 1]), Err(GeneratorError::Truncated { .. })));
    }

    #[test]
    fn non_finite_parameter() {
        let mut f = minimal_file();
        let payload_start = f.len() - 33 * 4;
        f[payload_start..payload_start + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            load_model::<f64>(&f),
            Err(GeneratorError::NonFinite { layer: 0, index: 0, .. })
        ));
    }

    #[test]
    fn trailing_payload_bytes() {
        let mut f = minimal_file();
        f.extend_from_slice(&[0; 4]);
        assert!(matches!(load_model::<f64>(&f), Err(GeneratorError::TrailingBytes { extra: 4 })));
    }

    #[test]
    fn declared_output_must_match() {
        let mut f = minimal_file();
        let pos = find(&f, br#""height":4"#);
        f[pos + 9] = b'5';
        assert!(matches!(load_model::<f64>(&f), Err(GeneratorError::OutputShapeMismatch { .. })));
    }

    fn find(hay: &[u8], needle: &[u8]) -> usize {
        hay.windows(needle.len()).position(|w| w == needle).unwrap()
    }
}
