//! Engine-agnostic posterior summaries of a fitted model.

use serde::{Deserialize, Serialize};

use crate::error::{MemError, Result};
use crate::exact::{fit_exact, sample_pi_exact, ExactPosterior};
use crate::mcmc::{fit_mcmc, McmcTrace};
use crate::model::{validate_p0, Alternative, AnalysisConfig, EssRule, ExchConfig, Method, PriorConfig, TrialData};
use crate::numerics::anneal::{anneal_minimize, AnnealSchedule, Bounds};
use crate::numerics::rng::{streams, RngState};
use crate::numerics::sample::{hpd_sorted, mean, median_sorted, Interval, MIN_HPD_SAMPLES};
use crate::numerics::special::beta_quantile_unchecked;

/// Search range for the effective sample size.
pub const ESS_RANGE: (f64, f64) = (1e-2, 1e5);

/// Smallest beta shape used while matching intervals.
const MIN_SHAPE: f64 = 1e-3;

/// The ESS search runs on its own generator so it depends on the draws alone.
const ESS_SEED: u64 = 0x4553_5331;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasketSummary {
    pub name: String,
    pub post_prob: f64,
    pub mean: f64,
    pub median: f64,
    pub hpd: Interval,
    pub ess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EngineOutput {
    Exact { posterior: ExactPosterior, draws: Vec<Vec<f64>> },
    Mcmc(McmcTrace),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemFit {
    pub data: TrialData,
    pub prior: PriorConfig,
    pub config: AnalysisConfig,
    pub engine: EngineOutput,
}

impl MemFit {
    pub fn pi_draws(&self) -> &[Vec<f64>] {
        match &self.engine {
            EngineOutput::Exact { draws, .. } => draws,
            EngineOutput::Mcmc(trace) => &trace.pi_draws,
        }
    }

    pub fn pep(&self) -> &[Vec<f64>] {
        match &self.engine {
            EngineOutput::Exact { posterior, .. } => posterior.pep(),
            EngineOutput::Mcmc(trace) => &trace.pep,
        }
    }

    pub fn map_config(&self) -> ExchConfig {
        match &self.engine {
            EngineOutput::Exact { posterior, .. } => posterior.map_config(),
            EngineOutput::Mcmc(trace) => trace.map_config.clone(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn method(&self) -> Method {
        match self.engine {
            EngineOutput::Exact { .. } => Method::Exact,
            EngineOutput::Mcmc(_) => Method::Mcmc,
        }
    }
}

/// Fits the model with the engine named in `config`.
///
/// The exact engine is followed by `config.mcmc_iter` draws per basket from the
/// mixture posterior so that both engines feed the same summaries.
pub fn fit(data: &TrialData, prior: &PriorConfig, config: &AnalysisConfig) -> Result<MemFit> {
    if prior.baskets() != data.baskets() {
        return Err(MemError::InvalidConfig(format!(
            "prior describes {} baskets but the data has {}",
            prior.baskets(),
            data.baskets()
        )));
    }
    config.validate(data.baskets())?;
    let engine = match config.method {
        Method::Exact => {
            let posterior = fit_exact(data, prior)?;
            let mut rng = RngState::with_stream(config.seed, streams::EXACT_DRAWS);
            let draws = sample_pi_exact(&posterior, data, prior, config.mcmc_iter, &mut rng)?;
            EngineOutput::Exact { posterior, draws }
        }
        Method::Mcmc => EngineOutput::Mcmc(fit_mcmc(data, prior, config)?),
    };
    Ok(MemFit { data: data.clone(), prior: prior.clone(), config: config.clone(), engine })
}

fn exceeds(x: f64, p0: f64, alternative: Alternative) -> bool {
    match alternative {
        Alternative::Greater => x > p0,
        Alternative::Less => x < p0,
    }
}

/// Fraction of pooled draws beyond their own null rate; each part is (draws, p0).
pub(crate) fn pooled_exceedance(parts: &[(&[f64], f64)], alternative: Alternative) -> f64 {
    let total: usize = parts.iter().map(|(d, _)| d.len()).sum();
    let hits: usize = parts
        .iter()
        .map(|(draws, p0)| draws.iter().filter(|&&x| exceeds(x, *p0, alternative)).count())
        .sum();
    hits as f64 / total as f64
}

/// Per-basket posterior probability that the response rate lies beyond `p0`.
pub fn posterior_probability(fit: &MemFit, p0: &[f64], alternative: Alternative) -> Result<Vec<f64>> {
    validate_p0(p0, fit.data.baskets())?;
    Ok(fit
        .pi_draws()
        .iter()
        .zip(p0)
        .map(|(draws, &p)| pooled_exceedance(&[(draws, p)], alternative))
        .collect())
}

/// Summary of a set of pooled draws, each part carrying its own null rate.
pub(crate) fn summarize_parts(
    name: &str,
    parts: &[(&[f64], f64)],
    alternative: Alternative,
    alpha: f64,
    rule: EssRule,
) -> Result<BasketSummary> {
    let mut sorted: Vec<f64> = parts.iter().flat_map(|(d, _)| d.iter().copied()).collect();
    if sorted.is_empty() {
        return Err(MemError::InvalidData(format!("{name} has no posterior draws")));
    }
    let mean = mean(&sorted);
    sorted.sort_by(f64::total_cmp);
    Ok(BasketSummary {
        name: name.to_string(),
        post_prob: pooled_exceedance(parts, alternative),
        mean,
        median: median_sorted(&sorted),
        hpd: hpd_sorted(&sorted, alpha)?,
        ess: ess_sorted(&sorted, mean, alpha, rule)?,
    })
}

pub fn summarize(fit: &MemFit) -> Result<Vec<BasketSummary>> {
    let cfg = &fit.config;
    fit.data
        .names()
        .iter()
        .zip(fit.pi_draws())
        .zip(&cfg.p0)
        .map(|((name, draws), &p0)| summarize_parts(name, &[(draws, p0)], cfg.alternative, cfg.hpd_alpha, cfg.ess_rule))
        .collect()
}

/// Effective sample size: a + b of the beta, with the draws' mean, whose
/// 1 − alpha interval lies closest (Euclidean distance of the bounds) to the
/// HPD interval of the draws.
pub fn ess(draws: &[f64], alpha: f64, rule: EssRule) -> Result<f64> {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    ess_sorted(&sorted, mean(draws), alpha, rule)
}

fn ess_sorted(sorted: &[f64], mean: f64, alpha: f64, rule: EssRule) -> Result<f64> {
    if sorted.len() < MIN_HPD_SAMPLES {
        return Err(MemError::TooFewSamples { needed: MIN_HPD_SAMPLES, got: sorted.len() });
    }
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(MemError::Degenerate("all draws are identical".into()));
    }
    if !(0.0..=1.0).contains(&sorted[0]) || !(0.0..=1.0).contains(&sorted[sorted.len() - 1]) {
        return Err(MemError::Domain("draws must lie in [0, 1]".into()));
    }
    let target = hpd_sorted(sorted, alpha)?;
    let m = mean.clamp(1e-9, 1.0 - 1e-9);
    let objective = |x: &[f64; 1]| {
        let e = x[0].exp();
        let a = (m * e).max(MIN_SHAPE);
        let b = ((1.0 - m) * e).max(MIN_SHAPE);
        let fitted = beta_interval(a, b, alpha, rule);
        (fitted.lower - target.lower).hypot(fitted.upper - target.upper)
    };
    let bounds = Bounds::new([ESS_RANGE.0.ln()], [ESS_RANGE.1.ln()]);
    let schedule = AnnealSchedule { levels: 120, moves_per_level: 20, ..AnnealSchedule::default() };
    let mut rng = RngState::with_stream(ESS_SEED, streams::ANNEAL);
    let (best, _) = anneal_minimize(objective, &bounds, &mut rng, &schedule);
    Ok(best[0].exp())
}

/// The 1 − alpha interval of Beta(a, b) under the given matching rule.
pub fn beta_interval(a: f64, b: f64, alpha: f64, rule: EssRule) -> Interval {
    let q = |p: f64| beta_quantile_unchecked(p, a, b);
    match rule {
        EssRule::EqualTailed => Interval { lower: q(0.5 * alpha), upper: q(1.0 - 0.5 * alpha) },
        EssRule::Hpd => beta_hpd(a, b, alpha),
    }
}

/// Shortest 1 − alpha interval of Beta(a, b): golden-section search over the lower tail mass.
pub fn beta_hpd(a: f64, b: f64, alpha: f64) -> Interval {
    let q = |p: f64| beta_quantile_unchecked(p, a, b);
    let width = |p: f64| q(p + 1.0 - alpha) - q(p);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, alpha);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (width(x1), width(x2));
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = width(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = width(x2);
        }
    }
    // the optimum can sit on either end when the density is monotone
    let p = [0.0, 0.5 * (lo + hi), alpha]
        .into_iter()
        .min_by(|&u, &v| width(u).total_cmp(&width(v)))
        .unwrap();
    Interval { lower: q(p), upper: q(p + 1.0 - alpha) }
}

/// `n` fresh draws per basket: from the mixture posterior for the exact engine,
/// by resampling the stored chain draws otherwise.
pub fn sample_posterior(fit: &MemFit, n: usize, rng: &mut RngState) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(MemError::InvalidConfig("number of draws must be positive".into()));
    }
    match &fit.engine {
        EngineOutput::Exact { posterior, .. } => sample_pi_exact(posterior, &fit.data, &fit.prior, n, rng),
        EngineOutput::Mcmc(trace) => Ok(trace
            .pi_draws
            .iter()
            .map(|draws| (0..n).map(|_| draws[rng.index(draws.len())]).collect())
            .collect()),
    }
}
