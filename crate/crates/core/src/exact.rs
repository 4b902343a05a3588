//! Posterior inference by enumerating every symmetric configuration.

use crate::error::{MemError, Result};
use crate::model::{
    cell_count, cell_index, cell_log_prior, cell_pair, Alternative, ExchConfig, MarginalKernel, PriorConfig,
    TrialData, MAX_EXACT_BASKETS,
};
use crate::numerics::rng::{beta_sample, RngState};
use crate::numerics::special::beta_cdf_unchecked;
use crate::numerics::log_sum_exp;

/// Normalized posterior over all 2^(J(J−1)/2) configurations.
///
/// Configuration `k` is `ExchConfig::from_index(J, k)`, so configurations are
/// not stored explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    baskets: usize,
    log_weights: Vec<f64>,
    map_index: usize,
    pep: Vec<Vec<f64>>,
}

impl ExactPosterior {
    pub fn baskets(&self) -> usize {
        self.baskets
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn config(&self, k: usize) -> ExchConfig {
        ExchConfig::from_index(self.baskets, k as u64)
    }

    pub fn configs(&self) -> impl Iterator<Item = ExchConfig> + '_ {
        (0..self.len()).map(|k| self.config(k))
    }

    /// Log posterior probabilities; they log-sum-exp to zero.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.log_weights[k].exp()
    }

    pub fn map_index(&self) -> usize {
        self.map_index
    }

    pub fn map_config(&self) -> ExchConfig {
        self.config(self.map_index)
    }

    pub fn pep(&self) -> &[Vec<f64>] {
        &self.pep
    }
}

/// Row pattern of basket `j` in configuration `index`, packed over the other baskets
/// in ascending order.
fn row_pattern(baskets: usize, j: usize, index: u64) -> usize {
    let mut pattern = 0usize;
    let mut bit = 0;
    for k in 0..baskets {
        if k == j {
            continue;
        }
        if index >> cell_index(baskets, j, k) & 1 == 1 {
            pattern |= 1 << bit;
        }
        bit += 1;
    }
    pattern
}

fn pattern_to_row(baskets: usize, j: usize, pattern: usize) -> Vec<bool> {
    let mut row = vec![false; baskets];
    let mut bit = 0;
    for (k, slot) in row.iter_mut().enumerate() {
        if k == j {
            *slot = true;
        } else {
            *slot = pattern >> bit & 1 == 1;
            bit += 1;
        }
    }
    row
}

pub fn fit_exact(data: &TrialData, prior: &PriorConfig) -> Result<ExactPosterior> {
    let j = data.baskets();
    if j > MAX_EXACT_BASKETS {
        return Err(MemError::TooManyBaskets { baskets: j, max: MAX_EXACT_BASKETS });
    }
    let kernel = MarginalKernel::new(data, prior)?;
    let cells = cell_count(j);
    let patterns = 1usize << (j - 1);

    // Every configuration's score is a sum of per-row terms, and each row term
    // depends only on that row's pattern: tabulate them once.
    let row_table: Vec<Vec<f64>> = (0..j)
        .map(|b| {
            (0..patterns)
                .map(|p| kernel.log_marginal(b, pattern_to_row(j, b, p).into_iter()))
                .collect()
        })
        .collect();
    let cell_priors: Vec<[f64; 2]> = (0..cells)
        .map(|c| {
            let (r, k) = cell_pair(j, c);
            let p = prior.prior_exch()[r][k];
            [cell_log_prior(p, false), cell_log_prior(p, true)]
        })
        .collect();

    let total = 1usize << cells;
    let mut scores = Vec::with_capacity(total);
    for index in 0..total as u64 {
        let mut score = 0.0;
        for (c, pr) in cell_priors.iter().enumerate() {
            score += pr[(index >> c & 1) as usize];
        }
        if score == f64::NEG_INFINITY {
            scores.push(score);
            continue;
        }
        for (b, table) in row_table.iter().enumerate() {
            score += table[row_pattern(j, b, index)];
        }
        scores.push(score);
    }

    let norm = log_sum_exp(&scores);
    if !norm.is_finite() {
        return Err(MemError::InvalidConfig("the prior assigns zero probability to every configuration".into()));
    }
    let log_weights: Vec<f64> = scores.iter().map(|s| s - norm).collect();

    let mut map_index = 0;
    for (k, &w) in log_weights.iter().enumerate() {
        if w > log_weights[map_index] {
            map_index = k;
        }
    }

    // Dividing by the summed weights (rather than trusting them to sum to one)
    // makes a forced cell come out as exactly 0 or 1.
    let mut cell_mass = vec![0.0; cells];
    let mut total_mass = 0.0;
    for (index, &lw) in log_weights.iter().enumerate() {
        let w = lw.exp();
        total_mass += w;
        for (c, mass) in cell_mass.iter_mut().enumerate() {
            if index >> c & 1 == 1 {
                *mass += w;
            }
        }
    }
    let mut pep = vec![vec![1.0; j]; j];
    for (c, &mass) in cell_mass.iter().enumerate() {
        let (r, k) = cell_pair(j, c);
        pep[r][k] = mass / total_mass;
        pep[k][r] = mass / total_mass;
    }

    Ok(ExactPosterior { baskets: j, log_weights, map_index, pep })
}

/// Posterior probability of each of basket `j`'s 2^(J−1) row patterns, obtained by
/// summing configuration weights. Rows are returned in ascending pattern order.
pub fn row_config_weights(j: usize, posterior: &ExactPosterior) -> Vec<(Vec<bool>, f64)> {
    let baskets = posterior.baskets;
    let mut mass = vec![0.0; 1 << (baskets - 1)];
    for (index, &lw) in posterior.log_weights.iter().enumerate() {
        mass[row_pattern(baskets, j, index as u64)] += lw.exp();
    }
    mass.into_iter()
        .enumerate()
        .map(|(p, w)| (pattern_to_row(baskets, j, p), w))
        .collect()
}

/// Mixture components of basket `j`: (weight, a', b') for every row pattern with positive mass.
pub fn mixture_components(
    j: usize,
    posterior: &ExactPosterior,
    kernel: &MarginalKernel,
) -> Vec<(f64, f64, f64)> {
    row_config_weights(j, posterior)
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(row, w)| {
            let (s, f, _) = kernel.row_sums(row.into_iter());
            let (a, b) = kernel.shapes(j, s, f);
            (w, a, b)
        })
        .collect()
}

/// `n_draws` draws per basket from the exact finite-mixture marginal posterior.
pub fn sample_pi_exact(
    posterior: &ExactPosterior,
    data: &TrialData,
    prior: &PriorConfig,
    n_draws: usize,
    rng: &mut RngState,
) -> Result<Vec<Vec<f64>>> {
    if n_draws == 0 {
        return Err(MemError::InvalidConfig("n_draws must be positive".into()));
    }
    let kernel = MarginalKernel::new(data, prior)?;
    let mut out = Vec::with_capacity(posterior.baskets);
    for j in 0..posterior.baskets {
        let components = mixture_components(j, posterior, &kernel);
        let mut cumulative = Vec::with_capacity(components.len());
        let mut acc = 0.0;
        for (w, _, _) in &components {
            acc += w;
            cumulative.push(acc);
        }
        let mut draws = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let u = rng.uniform() * acc;
            let pick = cumulative.partition_point(|&c| c <= u).min(components.len() - 1);
            let (_, a, b) = components[pick];
            draws.push(beta_sample(rng, a, b)?);
        }
        out.push(draws);
    }
    Ok(out)
}

/// Posterior exceedance probabilities as a weighted average of beta cdfs.
pub fn analytic_posterior_probability(
    posterior: &ExactPosterior,
    data: &TrialData,
    prior: &PriorConfig,
    p0: &[f64],
    alternative: Alternative,
) -> Result<Vec<f64>> {
    crate::model::validate_p0(p0, posterior.baskets)?;
    let kernel = MarginalKernel::new(data, prior)?;
    Ok((0..posterior.baskets)
        .map(|j| {
            mixture_components(j, posterior, &kernel)
                .into_iter()
                .map(|(w, a, b)| {
                    let below = beta_cdf_unchecked(p0[j], a, b);
                    w * match alternative {
                        Alternative::Greater => 1.0 - below,
                        Alternative::Less => below,
                    }
                })
                .sum()
        })
        .collect())
}
