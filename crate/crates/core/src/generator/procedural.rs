//! Deterministic stand-in generator: a soft-edged superellipse driven by six latent coordinates.

use serde::{Deserialize, Serialize};

use super::{GeneratorError, Image};
use crate::evolution::LatentVector;
use crate::scalar::{c, Scalar};

/// Number of latent coordinates the procedural generator reads.
pub const PROCEDURAL_LATENTS: usize = 6;

const EXPONENT: f64 = 4.0;
/// Latent coordinates are scaled by this before squashing.
const GAIN: f64 = 0.35;
/// Half-width of the edge ramp as a fraction of the shorter canvas side.
const EDGE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
}

impl Default for Canvas {
    fn default() -> Self {
        Self { width: 64, height: 64 }
    }
}

/// Shape parameters decoded from the latent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superellipse<T> {
    pub center_x: T,
    pub center_y: T,
    pub radius_x: T,
    pub radius_y: T,
    pub rotation: T,
    pub intensity: T,
}

impl<T: Scalar> Superellipse<T> {
    /// Every parameter is an affine function of `tanh(GAIN * z_i)` for one coordinate, so it
    /// stays bounded and Lipschitz for arbitrarily distant latents.
    pub fn from_latent(z: &[T], canvas: Canvas) -> Self {
        let w: T = c(canvas.width as f64);
        let h: T = c(canvas.height as f64);
        let half: T = c(0.5);
        let squash = |i: usize| (z[i] * c::<T>(GAIN)).tanh();
        Self {
            center_x: w * (half + c::<T>(0.3) * squash(0)),
            center_y: h * (half + c::<T>(0.3) * squash(1)),
            radius_x: w * (c::<T>(0.22) + c::<T>(0.13) * squash(2)),
            radius_y: h * (c::<T>(0.22) + c::<T>(0.13) * squash(3)),
            rotation: c::<T>(std::f64::consts::FRAC_PI_2) * squash(4),
            intensity: c::<T>(0.7) + c::<T>(0.25) * squash(5),
        }
    }

    fn coverage(&self, px: T, py: T, edge: T) -> T {
        let dx = px - self.center_x;
        let dy = py - self.center_y;
        let (sin, cos) = self.rotation.sin_cos();
        let u = (dx * cos + dy * sin) / self.radius_x;
        let v = (dy * cos - dx * sin) / self.radius_y;
        let e: T = c(EXPONENT);
        let r = (u.abs().powf(e) + v.abs().powf(e)).powf(e.recip());
        // Approximate signed distance in pixels from the boundary.
        let d = (r - T::one()) * self.radius_x.min(self.radius_y);
        ((edge - d) / (edge + edge)).max(T::zero()).min(T::one())
    }
}

/// Renders a grayscale image of the superellipse encoded by coordinates 0–5 of `latent`.
pub fn procedural_generate<T: Scalar>(latent: &LatentVector<T>, canvas: Canvas) -> Result<Image<T>, GeneratorError> {
    if latent.len() < PROCEDURAL_LATENTS {
        return Err(GeneratorError::LatentLength { expected: PROCEDURAL_LATENTS, found: latent.len() });
    }
    if canvas.width == 0 || canvas.height == 0 {
        return Err(GeneratorError::ImageSize { width: canvas.width, height: canvas.height, channels: 1, len: 0 });
    }
    let shape = Superellipse::from_latent(latent.as_slice(), canvas);
    let half: T = c(0.5);
    let edge: T = c(EDGE * canvas.width.min(canvas.height) as f64);
    let mut pixels = Vec::with_capacity(canvas.width * canvas.height);
    for y in 0..canvas.height {
        let py = c::<T>(y as f64) + half;
        for x in 0..canvas.width {
            let px = c::<T>(x as f64) + half;
            pixels.push(shape.intensity * shape.coverage(px, py, edge));
        }
    }
    Ok(Image::from_raw(canvas.width, canvas.height, 1, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centroid(img: &Image<f64>) -> (f64, f64) {
        let (mut sx, mut sy, mut total) = (0.0, 0.0, 0.0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let v = img.pixel(x, y, 0);
                sx += v * (x as f64 + 0.5);
                sy += v * (y as f64 + 0.5);
                total += v;
            }
        }
        (sx / total, sy / total)
    }

    #[test]
    fn zero_latent_is_centered() {
        let canvas = Canvas { width: 40, height: 30 };
        let img = procedural_generate(&LatentVector::<f64>::zeros(20), canvas).unwrap();
        let (cx, cy) = centroid(&img);
        assert!((cx - 20.0).abs() < 1e-9, "cx {cx}");
        assert!((cy - 15.0).abs() < 1e-9, "cy {cy}");
        assert!(img.pixel(20, 15, 0) > 0.5);
        assert_eq!(img.pixel(0, 0, 0), 0.0);
    }

    #[test]
    fn ignores_trailing_coordinates() {
        let mut a = vec![0.3, -1.2, 0.5, 0.1, 2.0, -0.4];
        let mut b = a.clone();
        a.extend([1.0, 2.0, 3.0]);
        b.extend([-7.0, 0.0, 100.0]);
        let canvas = Canvas::default();
        let ia = procedural_generate(&LatentVector::new(a).unwrap(), canvas).unwrap();
        let ib = procedural_generate(&LatentVector::new(b).unwrap(), canvas).unwrap();
        assert_eq!(ia, ib);
    }

    #[test]
    fn extreme_latents_stay_in_range() {
        let z = LatentVector::new(vec![1e6, -1e6, 1e6, -1e6, 1e6, -1e6]).unwrap();
        let img = procedural_generate(&z, Canvas { width: 16, height: 16 }).unwrap();
        assert!(img.pixels().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn short_latent_is_rejected() {
        let z = LatentVector::new(vec![0.0f64; 5]).unwrap();
        assert!(matches!(
            procedural_generate(&z, Canvas::default()),
            Err(GeneratorError::LatentLength { expected: 6, found: 5 })
        ));
    }

    #[test]
    fn works_with_f32() {
        let img = procedural_generate(&LatentVector::<f32>::zeros(6), Canvas { width: 8, height: 8 }).unwrap();
        assert_eq!(img.pixels().len(), 64);
    }
}
