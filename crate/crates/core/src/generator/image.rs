use std::io::Cursor;

use image::{ColorType, DynamicImage, ImageEncoder};

use super::model::Shape;
use super::GeneratorError;
use crate::scalar::Scalar;

/// Raster phenotype: interleaved row-major pixels in `[0, 1]`, 1 or 3 channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<T>) -> Result<Self, GeneratorError> {
        if !matches!(channels, 1 | 3) {
            return Err(GeneratorError::OutputChannels(channels));
        }
        if width == 0 || height == 0 || pixels.len() != width * height * channels {
            return Err(GeneratorError::ImageSize { width, height, channels, len: pixels.len() });
        }
        if let Some(index) = pixels.iter().position(|&v| !(v >= T::zero() && v <= T::one())) {
            return Err(GeneratorError::PixelRange { index });
        }
        Ok(Self { width, height, channels, pixels })
    }

    /// Converts a channel-major tanh activation into `[0, 1]` interleaved pixels.
    pub(crate) fn from_tanh_chw(shape: Shape, data: &[T]) -> Self {
        let half = T::from_f64_lossy(0.5);
        let plane = shape.height * shape.width;
        let mut pixels = Vec::with_capacity(data.len());
        for i in 0..plane {
            for c in 0..shape.channels {
                let t = data[c * plane + i];
                let v = if t.is_nan() { half } else { (t * half + half).max(T::zero()).min(T::one()) };
                pixels.push(v);
            }
        }
        Self { width: shape.width, height: shape.height, channels: shape.channels, pixels }
    }

    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, pixels: Vec<T>) -> Self {
        debug_assert_eq!(pixels.len(), width * height * channels);
        Self { width, height, channels, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize, c: usize) -> T {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    /// Root-mean-square per-pixel difference. Images must have identical dimensions.
    pub fn distance(&self, other: &Self) -> Result<T, GeneratorError> {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return Err(GeneratorError::ImageMismatch {
                left: (self.width, self.height, self.channels),
                right: (other.width, other.height, other.channels),
            });
        }
        let sum = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a - b) * (a - b))
            .fold(T::zero(), |acc, v| acc + v);
        Ok((sum / T::from_usize(self.pixels.len()).unwrap_or_else(T::one)).sqrt())
    }

    /// 8-bit quantized pixels, as encoded in PNG.
    pub fn to_bytes(&self) -> Vec<u8> {
        let scale = T::from_f64_lossy(255.0);
        self.pixels
            .iter()
            .map(|&v| (v * scale).round().to_u8().unwrap_or(0))
            .collect()
    }

    /// Lossless PNG (8-bit gray or RGB).
    pub fn to_png(&self) -> Vec<u8> {
        let color = if self.channels == 1 { ColorType::L8 } else { ColorType::Rgb8 };
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(&self.to_bytes(), self.width as u32, self.height as u32, color.into())
            .expect("in-memory PNG encoding of a validated buffer");
        out
    }

    /// Decodes any supported raster, converted to `channels` and resized to `width × height`.
    pub fn from_encoded(bytes: &[u8], width: usize, height: usize, channels: usize) -> Result<Self, GeneratorError> {
        let decoded = image::ImageReader::new(Cursor::new(bytes))
            .with_guessed_format()
            .map_err(|e| GeneratorError::Decode(e.to_string()))?
            .decode()
            .map_err(|e| GeneratorError::Decode(e.to_string()))?;
        let resized = if decoded.width() as usize == width && decoded.height() as usize == height {
            decoded
        } else {
            decoded.resize_exact(width as u32, height as u32, image::imageops::FilterType::Triangle)
        };
        let raw = match channels {
            1 => DynamicImage::ImageLuma8(resized.to_luma8()).into_bytes(),
            3 => DynamicImage::ImageRgb8(resized.to_rgb8()).into_bytes(),
            other => return Err(GeneratorError::OutputChannels(other)),
        };
        let inv = T::from_f64_lossy(1.0 / 255.0);
        let pixels = raw.into_iter().map(|b| T::from_u8(b).unwrap_or_else(T::zero) * inv).collect();
        Self::new(width, height, channels, pixels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_preserves_quantized_pixels() {
        let pixels: Vec<f64> = (0..4 * 3 * 3).map(|i| i as f64 / 35.0).collect();
        let img = Image::new(4, 3, 3, pixels).unwrap();
        let png = img.to_png();
        assert_eq!(&png[1..4], b"PNG");
        let back = Image::<f64>::from_encoded(&png, 4, 3, 3).unwrap();
        assert_eq!(back.to_bytes(), img.to_bytes());
        assert!(img.distance(&back).unwrap() < 1.0 / 255.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            Image::new(1, 1, 1, vec![1.5f64]),
            Err(GeneratorError::PixelRange { index: 0 })
        ));
        assert!(Image::new(1, 1, 2, vec![0.0f64; 2]).is_err());
    }

    #[test]
    fn distance_is_rms() {
        let a = Image::new(2, 1, 1, vec![0.0f64, 0.0]).unwrap();
        let b = Image::new(2, 1, 1, vec![1.0f64, 0.0]).unwrap();
        assert!((a.distance(&b).unwrap() - (0.5f64).sqrt()).abs() < 1e-12);
        let c = Image::new(1, 2, 1, vec![0.0f64, 0.0]).unwrap();
        assert!(a.distance(&c).is_err());
    }
}
