//! Metropolis sampling over symmetric exchangeability matrices.
//!
//! Each iteration draws a flip set (a uniformly sized, uniformly chosen set of
//! upper-triangle cells) and then visits those cells in the drawn order,
//! proposing to flip each one and accepting with probability
//! `min(1, exp(D* − D0))`, where D is the log marginal density plus the log
//! prior of the configuration. Single-cell flips are symmetric proposals, so
//! each visit is a valid Metropolis update and so is their composition.
//!
//! After every retained iteration one response rate per basket is drawn from
//! its conjugate beta given the current matrix row.

use std::collections::HashMap;

use crate::error::{MemError, Result};
use crate::model::{
    cell_count, cell_log_prior, cell_pair, AnalysisConfig, ExchConfig, MarginalKernel, PriorConfig, TrialData,
};
use crate::numerics::rng::{beta_sample, streams, RngState};

#[derive(Clone, Debug, PartialEq)]
pub struct McmcTrace {
    /// Accepted single-cell moves, burn-in included.
    pub accepted_count: u64,
    /// Single-cell moves proposed, burn-in included.
    pub proposed_count: u64,
    pub iter: usize,
    pub burnin: usize,
    /// Visit counts of retained configurations in order of first visit.
    pub config_tally: Vec<(ExchConfig, u64)>,
    pub pep: Vec<Vec<f64>>,
    pub map_config: ExchConfig,
    pub pi_draws: Vec<Vec<f64>>,
}

impl McmcTrace {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed_count == 0 {
            0.0
        } else {
            self.accepted_count as f64 / self.proposed_count as f64
        }
    }

    /// Visit frequency of a configuration among retained iterations.
    pub fn frequency(&self, config: &ExchConfig) -> f64 {
        self.config_tally
            .iter()
            .find(|(c, _)| c == config)
            .map_or(0.0, |(_, n)| *n as f64 / self.iter as f64)
    }
}

/// Draws a flip set: `k` uniform on `1..=cells`, then `k` distinct cells in random order.
pub fn propose_flip_set(cells: usize, rng: &mut RngState) -> Vec<usize> {
    assert!(cells > 0, "no cells to flip");
    let k = 1 + rng.index(cells);
    let mut pool: Vec<usize> = (0..cells).collect();
    for i in 0..k {
        let pick = i + rng.index(cells - i);
        pool.swap(i, pick);
    }
    pool.truncate(k);
    pool
}

/// The candidate obtained by flipping a random flip set of `current`.
pub fn propose_flip(current: &ExchConfig, rng: &mut RngState) -> ExchConfig {
    let mut next = current.clone();
    for c in propose_flip_set(current.cells(), rng) {
        next.flip_cell(c);
    }
    next
}

/// Running state of one chain: the configuration and each row's cached sums.
struct ChainState<'a> {
    kernel: &'a MarginalKernel,
    config: ExchConfig,
    pooled_s: Vec<f64>,
    pooled_f: Vec<f64>,
    excluded: Vec<f64>,
    row_value: Vec<f64>,
}

impl<'a> ChainState<'a> {
    fn new(kernel: &'a MarginalKernel, config: ExchConfig) -> Self {
        let j = kernel.baskets();
        let mut state = Self {
            kernel,
            config,
            pooled_s: vec![0.0; j],
            pooled_f: vec![0.0; j],
            excluded: vec![0.0; j],
            row_value: vec![0.0; j],
        };
        for r in 0..j {
            let (s, f, e) = kernel.row_sums((0..j).map(|k| state.config.get(r, k)));
            state.pooled_s[r] = s;
            state.pooled_f[r] = f;
            state.excluded[r] = e;
            state.row_value[r] = kernel.row_value(r, s, f, e);
        }
        state
    }

    /// Row sums of `row` after toggling its link to `other`.
    fn toggled(&self, row: usize, other: usize, linking: bool) -> (f64, f64, f64) {
        let sign = if linking { 1.0 } else { -1.0 };
        (
            self.pooled_s[row] + sign * self.kernel.successes(other),
            self.pooled_f[row] + sign * self.kernel.failures(other),
            self.excluded[row] - sign * self.kernel.independent_term(other),
        )
    }
}

pub fn fit_mcmc(data: &TrialData, prior: &PriorConfig, config: &AnalysisConfig) -> Result<McmcTrace> {
    let j = data.baskets();
    config.validate(j)?;
    let kernel = MarginalKernel::new(data, prior)?;
    let cells = cell_count(j);

    let initial = config
        .initial_config
        .clone()
        .unwrap_or_else(|| ExchConfig::from_prior_rounding(prior));
    let cell_priors: Vec<[f64; 2]> = (0..cells)
        .map(|c| {
            let (r, k) = cell_pair(j, c);
            let p = prior.prior_exch()[r][k];
            [cell_log_prior(p, false), cell_log_prior(p, true)]
        })
        .collect();
    if (0..cells).any(|c| cell_priors[c][usize::from(initial.cell(c))] == f64::NEG_INFINITY) {
        return Err(MemError::InvalidConfig(
            "initial configuration has zero prior probability".into(),
        ));
    }

    let mut rng = RngState::with_stream(config.seed, streams::MCMC_CHAIN);
    let mut state = ChainState::new(&kernel, initial);
    let mut accepted = 0u64;
    let mut proposed = 0u64;

    let mut tally: Vec<(ExchConfig, u64)> = Vec::new();
    let mut slots: HashMap<ExchConfig, usize> = HashMap::new();
    let mut current_slot: Option<usize> = None;
    let mut pi_draws = vec![Vec::with_capacity(config.mcmc_iter); j];

    for step in 0..(config.mcmc_burnin + config.mcmc_iter) {
        let mut moved = false;
        if cells > 0 {
            for c in propose_flip_set(cells, &mut rng) {
                proposed += 1;
                let (r, k) = cell_pair(j, c);
                let linking = !state.config.cell(c);
                let (rs, rf, re) = state.toggled(r, k, linking);
                let (ks, kf, ke) = state.toggled(k, r, linking);
                let new_r = kernel.row_value(r, rs, rf, re);
                let new_k = kernel.row_value(k, ks, kf, ke);
                let delta = (new_r - state.row_value[r]) + (new_k - state.row_value[k])
                    + cell_priors[c][usize::from(linking)]
                    - cell_priors[c][usize::from(!linking)];
                if delta >= 0.0 || rng.uniform() < delta.exp() {
                    accepted += 1;
                    moved = true;
                    state.config.flip_cell(c);
                    (state.pooled_s[r], state.pooled_f[r], state.excluded[r], state.row_value[r]) = (rs, rf, re, new_r);
                    (state.pooled_s[k], state.pooled_f[k], state.excluded[k], state.row_value[k]) = (ks, kf, ke, new_k);
                }
            }
        }

        if step < config.mcmc_burnin {
            continue;
        }
        if moved || current_slot.is_none() {
            let next = tally.len();
            let slot = *slots.entry(state.config.clone()).or_insert(next);
            if slot == next {
                tally.push((state.config.clone(), 0));
            }
            current_slot = Some(slot);
        }
        if let Some(slot) = current_slot {
            tally[slot].1 += 1;
        }
        for (b, draws) in pi_draws.iter_mut().enumerate() {
            let (a_post, b_post) = kernel.shapes(b, state.pooled_s[b], state.pooled_f[b]);
            draws.push(beta_sample(&mut rng, a_post, b_post)?);
        }
    }

    let iter = config.mcmc_iter;
    let mut cell_visits = vec![0u64; cells];
    for (g, n) in &tally {
        for (c, visits) in cell_visits.iter_mut().enumerate() {
            if g.cell(c) {
                *visits += n;
            }
        }
    }
    let mut pep = vec![vec![1.0; j]; j];
    for (c, &visits) in cell_visits.iter().enumerate() {
        let (r, k) = cell_pair(j, c);
        let p = visits as f64 / iter as f64;
        pep[r][k] = p;
        pep[k][r] = p;
    }

    // first maximum wins, and tally is in first-visit order
    let mut map_slot = 0;
    for (slot, (_, n)) in tally.iter().enumerate() {
        if *n > tally[map_slot].1 {
            map_slot = slot;
        }
    }
    let map_config = tally[map_slot].0.clone();

    Ok(McmcTrace {
        accepted_count: accepted,
        proposed_count: proposed,
        iter,
        burnin: config.mcmc_burnin,
        config_tally: tally,
        pep,
        map_config,
        pi_draws,
    })
}
