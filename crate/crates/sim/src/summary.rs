use serde::{Deserialize, Serialize};

use crate::Trajectory;

/// A run converges when its final distance is at most this fraction of its initial one.
pub const CONVERGENCE_FRACTION: f64 = 0.3;

/// Histogram bin over ratios, `(lo, hi]`; the first bin also holds `lo` itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub ratio_mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub ratio_std: f64,
    pub histogram: Vec<Bin>,
    pub convergence_fraction: f64,
    pub convergence_rate: f64,
    pub median_initial_distance: f64,
    pub median_final_distance: f64,
    pub mean_wall_clock_ms: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] }
}

/// Statistics over at least one trajectory with `bins >= 1` ratio bins over `[0, 1]`.
pub fn summarize(trajectories: &[Trajectory], bins: usize) -> Option<Summary> {
    if trajectories.is_empty() || bins == 0 {
        return None;
    }
    let n = trajectories.len();
    let ratios: Vec<f64> = trajectories.iter().map(|t| t.ratio).collect();
    let ratio_mean = mean(&ratios);
    let ratio_std = if n > 1 {
        (ratios.iter().map(|r| (r - ratio_mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut histogram: Vec<Bin> = (0..bins)
        .map(|i| Bin { lo: i as f64 / bins as f64, hi: (i + 1) as f64 / bins as f64, count: 0 })
        .collect();
    for r in &ratios {
        let i = ((r * bins as f64).ceil() as usize).clamp(1, bins) - 1;
        histogram[i].count += 1;
    }
    let converged = trajectories
        .iter()
        .filter(|t| t.final_distance <= CONVERGENCE_FRACTION * t.initial_distance)
        .count();
    let initial: Vec<f64> = trajectories.iter().map(|t| t.initial_distance).collect();
    let finals: Vec<f64> = trajectories.iter().map(|t| t.final_distance).collect();
    let clocks: Vec<f64> = trajectories.iter().map(|t| t.wall_clock_ms).collect();
    Some(Summary {
        runs: n,
        ratio_mean,
        ratio_std,
        histogram,
        convergence_fraction: CONVERGENCE_FRACTION,
        convergence_rate: converged as f64 / n as f64,
        median_initial_distance: median(&initial),
        median_final_distance: median(&finals),
        mean_wall_clock_ms: mean(&clocks),
    })
}

impl Summary {
    /// Histogram as `bin_lo,bin_hi,count` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        for b in &self.histogram {
            w.write_record([b.lo.to_string(), b.hi.to_string(), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
