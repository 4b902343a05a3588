//! Summaries computed directly from posterior draws.

use serde::{Deserialize, Serialize};

use crate::error::{MemError, Result};

/// Minimum number of draws accepted by the interval estimators.
pub const MIN_HPD_SAMPLES: usize = 100;

/// Lower bound applied to the KDE bandwidth.
pub const MIN_BANDWIDTH: f64 = 1e-3;

/// Kernel contributions beyond this many bandwidths are dropped (< 1e-13 relative).
const KERNEL_CUTOFF: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(MemError::Domain(format!("interval bounds out of order: [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Median of already sorted data: midpoint of the two central order statistics for even n.
pub fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    median_sorted(&sorted)
}

/// Number of sorted draws an HPD window at level `1 - alpha` must cover.
pub fn hpd_window_len(n: usize, alpha: f64) -> usize {
    // Guard against (1 - 0.05) * 200000 = 190000.00000000003 rounding up.
    let m = ((1.0 - alpha) * n as f64 - 1e-9).ceil() as usize;
    m.clamp(1, n)
}

/// Shortest window of sorted draws covering ⌈(1 − alpha)·N⌉ of them.
/// Ties go to the window with the lowest lower bound.
pub fn hpd_from_samples(samples: &[f64], alpha: f64) -> Result<Interval> {
    if samples.len() < MIN_HPD_SAMPLES {
        return Err(MemError::TooFewSamples { needed: MIN_HPD_SAMPLES, got: samples.len() });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    hpd_sorted(&sorted, alpha)
}

pub fn hpd_sorted(sorted: &[f64], alpha: f64) -> Result<Interval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MemError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if sorted.len() < MIN_HPD_SAMPLES {
        return Err(MemError::TooFewSamples { needed: MIN_HPD_SAMPLES, got: sorted.len() });
    }
    let n = sorted.len();
    let m = hpd_window_len(n, alpha);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for start in 0..=(n - m) {
        let width = sorted[start + m - 1] - sorted[start];
        if width < best_width {
            best_width = width;
            best = start;
        }
    }
    Ok(Interval { lower: sorted[best], upper: sorted[best + m - 1] })
}

/// Silverman's rule-of-thumb bandwidth, clipped below at [`MIN_BANDWIDTH`].
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mu = mean(sorted);
    let sd = (sorted.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let q = |p: f64| {
        let pos = p * (n - 1.0);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(sorted.len() - 1);
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    (0.9 * spread * n.powf(-0.2)).max(MIN_BANDWIDTH)
}

/// Gaussian kernel density of draws supported on [0, 1], evaluated on
/// `grid_points` equispaced points from 0 to 1.
///
/// Kernel mass falling outside the unit interval is reflected back at both
/// boundaries so the curve integrates to one over [0, 1].
pub fn kde_curve(samples: &[f64], grid_points: usize) -> Result<Vec<(f64, f64)>> {
    if grid_points < 2 {
        return Err(MemError::Domain(format!("need at least 2 grid points, got {grid_points}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() < 2 || sorted[0] == sorted[sorted.len() - 1] {
        return Err(MemError::Degenerate("kernel density needs at least two distinct draws".into()));
    }
    let h = silverman_bandwidth(&sorted);
    let reach = KERNEL_CUTOFF * h;
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());

    let sum_range = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let start = sorted.partition_point(|&v| v < lo);
        let end = sorted.partition_point(|&v| v <= hi);
        sorted[start..end.max(start)].iter().map(|&v| f(v)).sum()
    };

    let mut curve = Vec::with_capacity(grid_points);
    for g in 0..grid_points {
        let x = g as f64 / (grid_points - 1) as f64;
        let kernel = |center: f64| {
            let z = (x - center) / h;
            (-0.5 * z * z).exp()
        };
        let direct = sum_range(x - reach, x + reach, &|v| kernel(v));
        let mirror_low = sum_range(-x - reach, -x + reach, &|v| kernel(-v));
        let mirror_high = sum_range(2.0 - x - reach, 2.0 - x + reach, &|v| kernel(2.0 - v));
        curve.push((x, norm * (direct + mirror_low + mirror_high)));
    }
    Ok(curve)
}

/// Trapezoid rule over an (x, y) curve.
pub fn trapezoid(curve: &[(f64, f64)]) -> f64 {
    curve.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}
