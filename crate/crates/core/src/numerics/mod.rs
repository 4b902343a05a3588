//! Numerical kernels shared by the engines and summaries.

pub mod anneal;
pub mod rng;
pub mod sample;
pub mod special;

pub use anneal::{anneal_minimize, AnnealSchedule, Bounds};
pub use rng::{beta_sample, RngState};
pub use sample::{hpd_from_samples, kde_curve, mean, median, Interval};
pub use special::{beta_cdf, beta_quantile, ln_gamma, log_beta};

/// ln Σ exp(xᵢ), summed left to right after shifting by the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
