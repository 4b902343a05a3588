//! Trial data, exchangeability configurations and the marginal-density kernel.
//!
//! An exchangeability configuration is a symmetric 0/1 matrix with unit
//! diagonal. Only the strict upper triangle is stored, packed row-major over
//! `(i, j)` with `i < j`. Basket `j`'s row of the matrix determines which
//! baskets are pooled with it; its marginal density is a ratio of beta
//! functions of the pooled counts times the independent-basket marginals of
//! every basket left out.

use serde::{Deserialize, Serialize};

use crate::error::{MemError, Result};
use crate::numerics::special::log_beta_unchecked;

/// Largest basket count accepted by exhaustive enumeration (2^21 configurations).
pub const MAX_EXACT_BASKETS: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialData {
    names: Vec<String>,
    responses: Vec<u64>,
    sizes: Vec<u64>,
}

impl TrialData {
    pub fn new(names: Vec<String>, responses: Vec<u64>, sizes: Vec<u64>) -> Result<Self> {
        let j = names.len();
        if j == 0 {
            return Err(MemError::InvalidData("at least one basket is required".into()));
        }
        if responses.len() != j || sizes.len() != j {
            return Err(MemError::InvalidData(format!(
                "{} names, {} response counts and {} sizes do not line up",
                j,
                responses.len(),
                sizes.len()
            )));
        }
        for (k, name) in names.iter().enumerate() {
            if name.trim().is_empty() {
                return Err(MemError::InvalidData(format!("basket {} has an empty name", k + 1)));
            }
            if names[..k].contains(name) {
                return Err(MemError::InvalidData(format!("duplicate basket name {name:?}")));
            }
            if sizes[k] == 0 {
                return Err(MemError::InvalidData(format!("basket {name:?} has no patients")));
            }
            if responses[k] > sizes[k] {
                return Err(MemError::InvalidData(format!(
                    "basket {name:?} has {} responses out of {} patients",
                    responses[k], sizes[k]
                )));
            }
        }
        Ok(Self { names, responses, sizes })
    }

    /// Basket names default to "Basket 1", "Basket 2", ...
    pub fn unnamed(responses: Vec<u64>, sizes: Vec<u64>) -> Result<Self> {
        let names = (1..=responses.len()).map(|k| format!("Basket {k}")).collect();
        Self::new(names, responses, sizes)
    }

    pub fn baskets(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn responses(&self) -> &[u64] {
        &self.responses
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn failures(&self, j: usize) -> u64 {
        self.sizes[j] - self.responses[j]
    }

    /// The same trial with baskets reordered so that new basket `k` is old basket `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            order.iter().map(|&k| self.names[k].clone()).collect(),
            order.iter().map(|&k| self.responses[k]).collect(),
            order.iter().map(|&k| self.sizes[k]).collect(),
        )
    }
}

/// Beta prior shapes per basket and the prior exchangeability matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    shape1: Vec<f64>,
    shape2: Vec<f64>,
    prior_exch: Vec<Vec<f64>>,
}

impl PriorConfig {
    pub fn new(shape1: Vec<f64>, shape2: Vec<f64>, prior_exch: Vec<Vec<f64>>) -> Result<Self> {
        let j = shape1.len();
        if j == 0 || shape2.len() != j || prior_exch.len() != j {
            return Err(MemError::InvalidConfig(format!(
                "prior dimensions disagree: {} shape1, {} shape2, {}-row matrix",
                j,
                shape2.len(),
                prior_exch.len()
            )));
        }
        for (k, (&a, &b)) in shape1.iter().zip(&shape2).enumerate() {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(MemError::InvalidConfig(format!(
                    "basket {} has invalid beta shapes ({a}, {b})",
                    k + 1
                )));
            }
        }
        for (r, row) in prior_exch.iter().enumerate() {
            if row.len() != j {
                return Err(MemError::InvalidConfig(format!("prior matrix row {} has {} entries", r + 1, row.len())));
            }
            if row[r] != 1.0 {
                return Err(MemError::InvalidConfig(format!(
                    "prior matrix diagonal entry {} must be 1, got {}",
                    r + 1,
                    row[r]
                )));
            }
            for (c, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(MemError::InvalidConfig(format!(
                        "prior matrix entry ({}, {}) = {p} is outside [0, 1]",
                        r + 1,
                        c + 1
                    )));
                }
                if p != prior_exch[c][r] {
                    return Err(MemError::InvalidConfig(format!(
                        "prior matrix is not symmetric at ({}, {})",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(Self { shape1, shape2, prior_exch })
    }

    /// Broadcasts scalar shapes and a common off-diagonal prior probability to `j` baskets.
    pub fn from_scalars(j: usize, shape1: f64, shape2: f64, off_diagonal: f64) -> Result<Self> {
        Self::new(vec![shape1; j], vec![shape2; j], uniform_prior_matrix(j, off_diagonal))
    }

    /// Beta(0.5, 0.5) priors with every pair a priori exchangeable with probability 0.5.
    pub fn reference(j: usize) -> Self {
        Self::from_scalars(j, 0.5, 0.5, 0.5).expect("reference prior is valid")
    }

    pub fn baskets(&self) -> usize {
        self.shape1.len()
    }

    pub fn shape1(&self) -> &[f64] {
        &self.shape1
    }

    pub fn shape2(&self) -> &[f64] {
        &self.shape2
    }

    pub fn prior_exch(&self) -> &[Vec<f64>] {
        &self.prior_exch
    }

    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            order.iter().map(|&k| self.shape1[k]).collect(),
            order.iter().map(|&k| self.shape2[k]).collect(),
            order.iter().map(|&r| order.iter().map(|&c| self.prior_exch[r][c]).collect()).collect(),
        )
    }
}

pub fn uniform_prior_matrix(j: usize, off_diagonal: f64) -> Vec<Vec<f64>> {
    (0..j)
        .map(|r| (0..j).map(|c| if r == c { 1.0 } else { off_diagonal }).collect())
        .collect()
}

/// Number of free cells in a `j`-basket configuration.
pub fn cell_count(j: usize) -> usize {
    j * j.saturating_sub(1) / 2
}

/// Packed position of the unordered pair `{i, j}`, `i != j`.
pub fn cell_index(baskets: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < baskets && j < baskets);
    let (r, c) = if i < j { (i, j) } else { (j, i) };
    r * baskets - r * (r + 1) / 2 + (c - r - 1)
}

/// Inverse of [`cell_index`]: the pair `(i, j)` with `i < j`.
pub fn cell_pair(baskets: usize, mut idx: usize) -> (usize, usize) {
    for r in 0..baskets {
        let row_len = baskets - r - 1;
        if idx < row_len {
            return (r, r + 1 + idx);
        }
        idx -= row_len;
    }
    panic!("cell index out of range");
}

/// A symmetric binary exchangeability matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExchConfig {
    baskets: usize,
    bits: Vec<u64>,
}

impl ExchConfig {
    /// The identity matrix: no basket pooled with any other.
    pub fn independent(baskets: usize) -> Self {
        Self { baskets, bits: vec![0; cell_count(baskets).div_ceil(64)] }
    }

    /// Every pair exchangeable.
    pub fn full(baskets: usize) -> Self {
        let mut config = Self::independent(baskets);
        for c in 0..cell_count(baskets) {
            config.set_cell(c, true);
        }
        config
    }

    /// Configuration whose cell `c` is bit `c` of `index` (enumeration order).
    pub fn from_index(baskets: usize, index: u64) -> Self {
        let cells = cell_count(baskets);
        debug_assert!(cells <= 64 && (cells == 64 || index >> cells == 0));
        let mut config = Self::independent(baskets);
        if !config.bits.is_empty() {
            config.bits[0] = index;
        }
        config
    }

    /// Enumeration index; only meaningful when the configuration has at most 64 cells.
    pub fn to_index(&self) -> u64 {
        self.bits.first().copied().unwrap_or(0)
    }

    /// Builds from a full 0/1 matrix, checking symmetry and the unit diagonal.
    pub fn from_matrix(matrix: &[Vec<u8>]) -> Result<Self> {
        let j = matrix.len();
        let mut config = Self::independent(j);
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != j {
                return Err(MemError::InvalidConfig(format!("configuration row {} has {} entries", r + 1, row.len())));
            }
            if row[r] != 1 {
                return Err(MemError::InvalidConfig("configuration diagonal must be 1".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v > 1 || v != matrix[c][r] {
                    return Err(MemError::InvalidConfig(format!(
                        "configuration must be symmetric 0/1; bad entry ({}, {})",
                        r + 1,
                        c + 1
                    )));
                }
                if c > r && v == 1 {
                    config.set(r, c, true);
                }
            }
        }
        Ok(config)
    }

    /// `round(prior - 0.001)` cellwise: the identity under the reference prior.
    pub fn from_prior_rounding(prior: &PriorConfig) -> Self {
        let j = prior.baskets();
        let mut config = Self::independent(j);
        for c in 0..cell_count(j) {
            let (r, k) = cell_pair(j, c);
            config.set_cell(c, (prior.prior_exch()[r][k] - 0.001).round() >= 1.0);
        }
        config
    }

    pub fn baskets(&self) -> usize {
        self.baskets
    }

    pub fn cells(&self) -> usize {
        cell_count(self.baskets)
    }

    pub fn cell(&self, c: usize) -> bool {
        self.bits[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set_cell(&mut self, c: usize, value: bool) {
        let mask = 1u64 << (c % 64);
        if value {
            self.bits[c / 64] |= mask;
        } else {
            self.bits[c / 64] &= !mask;
        }
    }

    pub fn flip_cell(&mut self, c: usize) {
        self.bits[c / 64] ^= 1u64 << (c % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        i == j || self.cell(cell_index(self.baskets, i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i != j, "diagonal cells are fixed at 1");
        self.set_cell(cell_index(self.baskets, i, j), value);
    }

    /// Row `j` of the full matrix.
    pub fn row(&self, j: usize) -> Vec<bool> {
        (0..self.baskets).map(|k| self.get(j, k)).collect()
    }

    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.baskets)
            .map(|r| (0..self.baskets).map(|c| u8::from(self.get(r, c))).collect())
            .collect()
    }

    pub fn set_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Precomputed per-basket constants of the marginal density.
///
/// `log_marginal_row` is evaluated millions of times by the engines, so the
/// independent-basket terms `ln B(a_i + S_i, b_i + n_i − S_i) − ln B(a_i, b_i)`
/// are computed once.
#[derive(Clone, Debug)]
pub struct MarginalKernel {
    successes: Vec<f64>,
    failures: Vec<f64>,
    shape1: Vec<f64>,
    shape2: Vec<f64>,
    log_beta_prior: Vec<f64>,
    independent: Vec<f64>,
}

impl MarginalKernel {
    pub fn new(data: &TrialData, prior: &PriorConfig) -> Result<Self> {
        let j = data.baskets();
        if prior.baskets() != j {
            return Err(MemError::InvalidConfig(format!(
                "prior describes {} baskets but the data has {}",
                prior.baskets(),
                j
            )));
        }
        let successes: Vec<f64> = data.responses().iter().map(|&s| s as f64).collect();
        let failures: Vec<f64> = (0..j).map(|k| data.failures(k) as f64).collect();
        let log_beta_prior: Vec<f64> =
            (0..j).map(|k| log_beta_unchecked(prior.shape1()[k], prior.shape2()[k])).collect();
        let independent = (0..j)
            .map(|k| {
                log_beta_unchecked(prior.shape1()[k] + successes[k], prior.shape2()[k] + failures[k])
                    - log_beta_prior[k]
            })
            .collect();
        Ok(Self {
            successes,
            failures,
            shape1: prior.shape1().to_vec(),
            shape2: prior.shape2().to_vec(),
            log_beta_prior,
            independent,
        })
    }

    pub fn baskets(&self) -> usize {
        self.successes.len()
    }

    pub fn successes(&self, k: usize) -> f64 {
        self.successes[k]
    }

    pub fn failures(&self, k: usize) -> f64 {
        self.failures[k]
    }

    /// ln B(a_k + S_k, b_k + n_k − S_k) − ln B(a_k, b_k)
    pub fn independent_term(&self, k: usize) -> f64 {
        self.independent[k]
    }

    /// Log marginal of basket `j` from already accumulated row sums.
    ///
    /// `pooled_s`/`pooled_f` are Σ row[h]·S_h and Σ row[h]·(n_h − S_h) including `j`
    /// itself; `excluded` is Σ over baskets with row[i] = 0 of their independent term.
    pub fn row_value(&self, j: usize, pooled_s: f64, pooled_f: f64, excluded: f64) -> f64 {
        log_beta_unchecked(self.shape1[j] + pooled_s, self.shape2[j] + pooled_f) - self.log_beta_prior[j]
            + excluded
    }

    pub fn row_sums(&self, row: impl Iterator<Item = bool>) -> (f64, f64, f64) {
        let mut s = 0.0;
        let mut f = 0.0;
        let mut excluded = 0.0;
        for (k, included) in row.enumerate() {
            if included {
                s += self.successes[k];
                f += self.failures[k];
            } else {
                excluded += self.independent[k];
            }
        }
        (s, f, excluded)
    }

    pub fn log_marginal(&self, j: usize, row: impl Iterator<Item = bool>) -> f64 {
        let (s, f, excluded) = self.row_sums(row);
        self.row_value(j, s, f, excluded)
    }

    pub fn shapes(&self, j: usize, pooled_s: f64, pooled_f: f64) -> (f64, f64) {
        (self.shape1[j] + pooled_s, self.shape2[j] + pooled_f)
    }

    pub fn config_log_marginal(&self, config: &ExchConfig) -> f64 {
        (0..self.baskets())
            .map(|j| self.log_marginal(j, (0..self.baskets()).map(|k| config.get(j, k))))
            .sum()
    }
}

fn check_row(j: usize, row: &[bool], baskets: usize) -> Result<()> {
    if row.len() != baskets || j >= baskets {
        return Err(MemError::InvalidConfig(format!(
            "row of length {} for basket {} does not match {} baskets",
            row.len(),
            j + 1,
            baskets
        )));
    }
    if !row[j] {
        return Err(MemError::InvalidConfig(format!(
            "basket {} must be exchangeable with itself",
            j + 1
        )));
    }
    Ok(())
}

/// ln m(S_j | Ω_j = row, S_(−j)).
pub fn log_marginal_row(j: usize, row: &[bool], data: &TrialData, prior: &PriorConfig) -> Result<f64> {
    check_row(j, row, data.baskets())?;
    let kernel = MarginalKernel::new(data, prior)?;
    Ok(kernel.log_marginal(j, row.iter().copied()))
}

/// Log prior of a configuration under independent Bernoulli cells.
/// `-inf` when a cell contradicts a prior probability of exactly 0 or 1.
pub fn log_config_prior(config: &ExchConfig, prior: &PriorConfig) -> f64 {
    let j = config.baskets();
    (0..config.cells())
        .map(|c| {
            let (r, k) = cell_pair(j, c);
            cell_log_prior(prior.prior_exch()[r][k], config.cell(c))
        })
        .sum()
}

pub(crate) fn cell_log_prior(p: f64, set: bool) -> f64 {
    if set {
        p.ln()
    } else {
        (-p).ln_1p()
    }
}

/// Unnormalized log posterior weight of a full configuration.
pub fn log_config_score(config: &ExchConfig, data: &TrialData, prior: &PriorConfig) -> Result<f64> {
    let kernel = MarginalKernel::new(data, prior)?;
    if config.baskets() != data.baskets() {
        return Err(MemError::InvalidConfig("configuration size does not match the data".into()));
    }
    Ok(kernel.config_log_marginal(config) + log_config_prior(config, prior))
}

/// Shapes of the conjugate beta posterior of basket `j` given its row.
pub fn conditional_beta_shapes(
    j: usize,
    row: &[bool],
    data: &TrialData,
    prior: &PriorConfig,
) -> Result<(f64, f64)> {
    check_row(j, row, data.baskets())?;
    let kernel = MarginalKernel::new(data, prior)?;
    let (s, f, _) = kernel.row_sums(row.iter().copied());
    Ok(kernel.shapes(j, s, f))
}

/// All 2^(J(J−1)/2) configurations in ascending enumeration-index order.
pub fn enumerate_configs(baskets: usize) -> Result<impl Iterator<Item = ExchConfig>> {
    if baskets == 0 {
        return Err(MemError::InvalidConfig("at least one basket is required".into()));
    }
    if baskets > MAX_EXACT_BASKETS {
        return Err(MemError::TooManyBaskets { baskets, max: MAX_EXACT_BASKETS });
    }
    let total = 1u64 << cell_count(baskets);
    Ok((0..total).map(move |k| ExchConfig::from_index(baskets, k)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    #[default]
    Greater,
    Less,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    #[default]
    Mcmc,
}

/// How the beta used for effective sample size is matched to the posterior HPD interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EssRule {
    /// Beta with the posterior mean whose equal-tailed credible interval is closest
    /// to the HPD bounds. Reproduces the ESS values of the reference R package.
    #[default]
    EqualTailed,
    /// Beta with the posterior mean whose own HPD interval is closest to the HPD bounds.
    /// Recovers a + b exactly when the posterior is itself a beta.
    Hpd,
}

pub const DEFAULT_P0: f64 = 0.15;
pub const DEFAULT_HPD_ALPHA: f64 = 0.05;
pub const DEFAULT_MCMC_ITER: usize = 200_000;
pub const DEFAULT_MCMC_BURNIN: usize = 50_000;
pub const DEFAULT_SEED: u64 = 20_190_603;

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub p0: Vec<f64>,
    pub alternative: Alternative,
    pub hpd_alpha: f64,
    pub method: Method,
    pub mcmc_iter: usize,
    pub mcmc_burnin: usize,
    pub seed: u64,
    pub initial_config: Option<ExchConfig>,
    pub ess_rule: EssRule,
}

impl AnalysisConfig {
    pub fn defaults(baskets: usize) -> Self {
        Self {
            p0: vec![DEFAULT_P0; baskets],
            alternative: Alternative::Greater,
            hpd_alpha: DEFAULT_HPD_ALPHA,
            method: Method::Mcmc,
            mcmc_iter: DEFAULT_MCMC_ITER,
            mcmc_burnin: DEFAULT_MCMC_BURNIN,
            seed: DEFAULT_SEED,
            initial_config: None,
            ess_rule: EssRule::EqualTailed,
        }
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        let j = self.p0.len();
        self.p0 = vec![p0; j];
        self
    }

    pub fn validate(&self, baskets: usize) -> Result<()> {
        validate_p0(&self.p0, baskets)?;
        if !(self.hpd_alpha > 0.0 && self.hpd_alpha < 1.0) {
            return Err(MemError::InvalidConfig(format!("hpd_alpha must lie in (0, 1), got {}", self.hpd_alpha)));
        }
        if self.mcmc_iter == 0 {
            return Err(MemError::InvalidConfig("mcmc_iter must be positive".into()));
        }
        if let Some(init) = &self.initial_config {
            if init.baskets() != baskets {
                return Err(MemError::InvalidConfig("initial configuration size does not match the data".into()));
            }
        }
        Ok(())
    }
}

pub fn validate_p0(p0: &[f64], baskets: usize) -> Result<()> {
    if p0.len() != baskets {
        return Err(MemError::InvalidConfig(format!(
            "{} null rates supplied for {} baskets",
            p0.len(),
            baskets
        )));
    }
    if let Some(bad) = p0.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(MemError::InvalidConfig(format!("null rate {bad} is outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn vemurafenib() -> TrialData {
        TrialData::new(
            ["NSCLC", "CRC (vemu)", "CRC (vemu+cetu)", "Bile Duct", "ECD or LCH", "ATC"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            vec![8, 0, 1, 1, 6, 2],
            vec![19, 10, 26, 8, 14, 7],
        )
        .unwrap()
    }

    #[test]
    fn trial_data_validation() {
        assert!(TrialData::unnamed(vec![5], vec![3]).is_err());
        assert!(TrialData::unnamed(vec![], vec![]).is_err());
        assert!(TrialData::new(vec!["a".into(), "a".into()], vec![1, 1], vec![2, 2]).is_err());
        assert!(TrialData::unnamed(vec![0], vec![0]).is_err());
    }

    #[test]
    fn prior_validation() {
        let mut m = uniform_prior_matrix(3, 0.5);
        m[0][1] = 0.7;
        assert!(PriorConfig::new(vec![0.5; 3], vec![0.5; 3], m).is_err());
        let mut m = uniform_prior_matrix(2, 0.5);
        m[1][1] = 0.9;
        assert!(PriorConfig::new(vec![0.5; 2], vec![0.5; 2], m).is_err());
        assert!(PriorConfig::from_scalars(2, 0.0, 1.0, 0.5).is_err());
        assert!(PriorConfig::from_scalars(2, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn cell_indexing_round_trip() {
        for j in 2..9 {
            let mut seen = 0;
            for r in 0..j {
                for c in (r + 1)..j {
                    let idx = cell_index(j, r, c);
                    assert_eq!(idx, seen);
                    assert_eq!(cell_index(j, c, r), idx);
                    assert_eq!(cell_pair(j, idx), (r, c));
                    seen += 1;
                }
            }
            assert_eq!(seen, cell_count(j));
        }
    }

    #[test]
    fn single_basket_marginal() {
        let data = TrialData::unnamed(vec![1], vec![1]).unwrap();
        let prior = PriorConfig::reference(1);
        let v = log_marginal_row(0, &[true], &data, &prior).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-14);
        assert!((log_config_score(&ExchConfig::independent(1), &data, &prior).unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn identical_baskets_symmetric_rows() {
        let data = TrialData::unnamed(vec![3, 3], vec![9, 9]).unwrap();
        let prior = PriorConfig::reference(2);
        let a = log_marginal_row(0, &[true, true], &data, &prior).unwrap();
        let b = log_marginal_row(1, &[true, true], &data, &prior).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn row_must_include_self() {
        let data = TrialData::unnamed(vec![3, 3], vec![9, 9]).unwrap();
        let prior = PriorConfig::reference(2);
        assert!(log_marginal_row(0, &[false, true], &data, &prior).is_err());
        assert!(conditional_beta_shapes(1, &[true, false], &data, &prior).is_err());
    }

    #[test]
    fn config_prior_examples() {
        let prior = PriorConfig::reference(4);
        let m = cell_count(4) as f64;
        for config in enumerate_configs(4).unwrap() {
            assert!((log_config_prior(&config, &prior) - m * 0.5f64.ln()).abs() < 1e-12);
        }

        let mut forced = uniform_prior_matrix(3, 0.5);
        forced[0][1] = 1.0;
        forced[1][0] = 1.0;
        let prior = PriorConfig::new(vec![0.5; 3], vec![0.5; 3], forced).unwrap();
        assert_eq!(log_config_prior(&ExchConfig::independent(3), &prior), f64::NEG_INFINITY);

        let data = TrialData::unnamed(vec![1, 2, 3], vec![5, 5, 5]).unwrap();
        assert_eq!(
            log_config_score(&ExchConfig::independent(3), &data, &prior).unwrap(),
            f64::NEG_INFINITY
        );

        let prior = PriorConfig::from_scalars(2, 0.5, 0.5, 0.8).unwrap();
        assert!((log_config_prior(&ExchConfig::full(2), &prior) - 0.8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn conjugate_shapes() {
        let data = vemurafenib();
        let prior = PriorConfig::reference(6);
        let mut singleton = vec![false; 6];
        singleton[0] = true;
        assert_eq!(conditional_beta_shapes(0, &singleton, &data, &prior).unwrap(), (8.5, 11.5));
        assert_eq!(conditional_beta_shapes(3, &[true; 6], &data, &prior).unwrap(), (18.5, 66.5));
        let row = [true, false, false, false, true, false];
        assert_eq!(conditional_beta_shapes(0, &row, &data, &prior).unwrap(), (14.5, 19.5));
    }

    #[test]
    fn enumeration_counts_and_validity() {
        assert_eq!(enumerate_configs(1).unwrap().count(), 1);
        assert_eq!(enumerate_configs(2).unwrap().count(), 2);
        assert_eq!(enumerate_configs(3).unwrap().count(), 8);
        assert_eq!(enumerate_configs(6).unwrap().count(), 32_768);
        assert!(matches!(enumerate_configs(8), Err(MemError::TooManyBaskets { .. })));

        let mut seen = HashSet::new();
        for config in enumerate_configs(4).unwrap() {
            let m = config.to_matrix();
            for r in 0..4 {
                assert_eq!(m[r][r], 1);
                for c in 0..4 {
                    assert_eq!(m[r][c], m[c][r]);
                }
            }
            assert_eq!(ExchConfig::from_matrix(&m).unwrap(), config);
            assert!(seen.insert(config));
        }
    }

    #[test]
    fn initial_config_rounding() {
        assert_eq!(ExchConfig::from_prior_rounding(&PriorConfig::reference(4)), ExchConfig::independent(4));
        let prior = PriorConfig::from_scalars(3, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(ExchConfig::from_prior_rounding(&prior), ExchConfig::full(3));
    }

    #[test]
    fn wide_configs_pack_past_one_word() {
        let mut config = ExchConfig::independent(20);
        assert_eq!(config.cells(), 190);
        config.set(17, 19, true);
        assert!(config.get(19, 17));
        assert_eq!(config.set_count(), 1);
        config.flip_cell(cell_index(20, 17, 19));
        assert_eq!(config, ExchConfig::independent(20));
    }

    proptest! {
        #[test]
        fn marginal_invariant_under_pooled_permutation(
            counts in prop::collection::vec((0u64..15, 1u64..15), 4),
            perm_seed in 0usize..24,
        ) {
            let responses: Vec<u64> = counts.iter().map(|&(s, _)| s).collect();
            let sizes: Vec<u64> = counts.iter().map(|&(s, extra)| s + extra).collect();
            let data = TrialData::unnamed(responses, sizes).unwrap();
            let prior = PriorConfig::reference(4);
            let row = [true, true, false, true];
            let base = log_marginal_row(0, &row, &data, &prior).unwrap();

            // permute the data of baskets other than 0 while keeping the row pattern's multiset
            let mut others = [1usize, 2, 3];
            let mut k = perm_seed;
            for i in (1..others.len()).rev() {
                others.swap(i, k % (i + 1));
                k /= i + 1;
            }
            let order = [0, others[0], others[1], others[2]];
            let permuted = data.permuted(&order).unwrap();
            let new_row: Vec<bool> = order.iter().map(|&o| row[o]).collect();
            let moved = log_marginal_row(0, &new_row, &permuted, &prior).unwrap();
            prop_assert!((base - moved).abs() < 1e-10);
        }

        #[test]
        fn singleton_row_is_independent_update(s in 0u64..40, extra in 0u64..40, a in 0.1f64..5.0, b in 0.1f64..5.0) {
            let data = TrialData::unnamed(vec![s, 1], vec![s + extra + 1, 3]).unwrap();
            let prior = PriorConfig::new(vec![a, 1.0], vec![b, 1.0], uniform_prior_matrix(2, 0.5)).unwrap();
            let shapes = conditional_beta_shapes(0, &[true, false], &data, &prior).unwrap();
            prop_assert_eq!(shapes, (a + s as f64, b + (extra + 1) as f64));
        }
    }
}
