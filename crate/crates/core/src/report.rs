//! The analysis report: a serializable record of the fit and its text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_map, cluster_pep, cluster_summaries, ClusterAssignment};
use crate::error::{MemError, Result};
use crate::model::{validate_p0, Alternative, EssRule, Method};
use crate::summary::{pooled_exceedance, posterior_probability, summarize, BasketSummary, MemFit};

/// The resolved configuration a report was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CallEcho {
    pub method: Method,
    pub names: Vec<String>,
    pub responses: Vec<u64>,
    pub sizes: Vec<u64>,
    pub p0: Vec<f64>,
    pub alternative: Alternative,
    pub shape1: Vec<f64>,
    pub shape2: Vec<f64>,
    pub prior: Vec<Vec<f64>>,
    pub hpd_alpha: f64,
    pub mcmc_iter: usize,
    pub mcmc_burnin: usize,
    pub seed: u64,
    pub ess_rule: EssRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemReport {
    pub call: CallEcho,
    pub basket: Vec<BasketSummary>,
    pub cluster: Vec<BasketSummary>,
    pub cluster_baskets: ClusterAssignment,
    pub basket_pep: Vec<Vec<f64>>,
    pub basket_map: Vec<Vec<u8>>,
    pub cluster_pep: Vec<Vec<f64>>,
    pub cluster_map: Vec<Vec<u8>>,
    pub seed: u64,
    pub method: Method,
    /// Fraction of accepted single-cell moves; absent for the exact engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
}

impl MemReport {
    pub fn build(fit: &MemFit, clusters: &ClusterAssignment) -> Result<Self> {
        let cfg = &fit.config;
        let map = fit.map_config();
        let call = CallEcho {
            method: fit.method(),
            names: fit.data.names().to_vec(),
            responses: fit.data.responses().to_vec(),
            sizes: fit.data.sizes().to_vec(),
            p0: cfg.p0.clone(),
            alternative: cfg.alternative,
            shape1: fit.prior.shape1().to_vec(),
            shape2: fit.prior.shape2().to_vec(),
            prior: fit.prior.prior_exch().to_vec(),
            hpd_alpha: cfg.hpd_alpha,
            mcmc_iter: cfg.mcmc_iter,
            mcmc_burnin: cfg.mcmc_burnin,
            seed: cfg.seed,
            ess_rule: cfg.ess_rule,
        };
        let acceptance_rate = match &fit.engine {
            crate::summary::EngineOutput::Mcmc(trace) => Some(trace.acceptance_rate()),
            crate::summary::EngineOutput::Exact { .. } => None,
        };
        Ok(Self {
            call,
            basket: summarize(fit)?,
            cluster: cluster_summaries(fit, clusters)?,
            cluster_baskets: clusters.clone(),
            basket_pep: fit.pep().to_vec(),
            basket_map: map.to_matrix(),
            cluster_pep: cluster_pep(fit.pep(), clusters),
            cluster_map: cluster_map(&map, clusters),
            seed: fit.seed(),
            method: fit.method(),
            acceptance_rate,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plain-text summary in the layout of the reference package's printout.
    pub fn render_text(&self) -> String {
        let mut out = String::from("\n");
        let call = &self.call;
        let method = match call.method {
            Method::Exact => "exact",
            Method::Mcmc => "mcmc",
        };
        section(&mut out, "The MEM Model Call");
        let _ = writeln!(
            out,
            "method = {method}, baskets = {}, seed = {}, hpd_alpha = {}, mcmc_iter = {}, mcmc_burnin = {}",
            call.names.len(),
            call.seed,
            call.hpd_alpha,
            call.mcmc_iter,
            call.mcmc_burnin
        );
        out.push('\n');

        section(&mut out, "The Basket Summary");
        summary_tables(&mut out, &self.basket, &call.p0, call.alternative, call.hpd_alpha);

        section(&mut out, "The Cluster Summary");
        for (label, block) in self.cluster_baskets.labels.iter().zip(&self.cluster_baskets.clusters) {
            let _ = writeln!(out, "{label}");
            let members: Vec<String> = block.iter().map(|&b| format!("\"{}\"", call.names[b])).collect();
            let _ = writeln!(out, " {}", members.join(" "));
        }
        out.push('\n');
        let cluster_p0: Vec<f64> = self.cluster_baskets.clusters.iter().map(|b| call.p0[b[0]]).collect();
        summary_tables(&mut out, &self.cluster, &cluster_p0, call.alternative, call.hpd_alpha);
        out
    }
}

fn section(out: &mut String, title: &str) {
    let head = format!("-- {title} ");
    let _ = writeln!(out, "{head}{}\n", "-".repeat(80usize.saturating_sub(head.chars().count())));
}

/// Right-aligned table with row labels; every cell is pre-formatted.
fn table(out: &mut String, columns: &[String], rows: &[(&str, Vec<String>)]) {
    let label_width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(c, name)| rows.iter().map(|(_, v)| v[c].chars().count()).chain([name.chars().count()]).max().unwrap())
        .collect();
    let _ = write!(out, "{:label_width$}", "");
    for (name, w) in columns.iter().zip(&widths) {
        let _ = write!(out, " {name:>w$}");
    }
    out.push('\n');
    for (label, values) in rows {
        let _ = write!(out, "{label:<label_width$}");
        for (v, w) in values.iter().zip(&widths) {
            let _ = write!(out, " {v:>w$}");
        }
        out.push('\n');
    }
    out.push('\n');
}

fn summary_tables(out: &mut String, rows: &[BasketSummary], p0: &[f64], alternative: Alternative, alpha: f64) {
    let names: Vec<String> = rows.iter().map(|r| r.name.clone()).collect();
    let fmt = |x: f64| format!("{x:.3}");
    let direction = match alternative {
        Alternative::Greater => "greater",
        Alternative::Less => "less",
    };
    let _ = writeln!(out, "The Null Response Rates (alternative is {direction}):");
    table(
        out,
        &names,
        &[
            ("Null", p0.iter().map(|&p| fmt(p)).collect()),
            ("Posterior Prob", rows.iter().map(|r| fmt(r.post_prob)).collect()),
        ],
    );
    let _ = writeln!(out, "Posterior Mean and Median Response Rates:");
    table(
        out,
        &names,
        &[
            ("Mean", rows.iter().map(|r| fmt(r.mean)).collect()),
            ("Median", rows.iter().map(|r| fmt(r.median)).collect()),
        ],
    );
    let _ = writeln!(out, "Highest Posterior Density Interval with Coverage Probability {}:", fmt_level(1.0 - alpha));
    table(
        out,
        &names,
        &[
            ("Lower Bound", rows.iter().map(|r| fmt(r.hpd.lower)).collect()),
            ("Upper Bound", rows.iter().map(|r| fmt(r.hpd.upper)).collect()),
        ],
    );
    let _ = writeln!(out, "Posterior Effective Sample Size:");
    table(out, &names, &[("", rows.iter().map(|r| fmt(r.ess)).collect())]);
}

fn fmt_level(level: f64) -> String {
    let s = format!("{level:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Recomputes basket and cluster exceedance probabilities for new null rates.
/// Every other report field is carried over unchanged.
pub fn update_p0(fit: &MemFit, report: &MemReport, p0: &[f64], alternative: Alternative) -> Result<MemReport> {
    validate_p0(p0, fit.data.baskets())?;
    if report.basket.len() != fit.data.baskets() {
        return Err(MemError::InvalidConfig("report does not belong to this fit".into()));
    }
    let mut out = report.clone();
    for (row, prob) in out.basket.iter_mut().zip(posterior_probability(fit, p0, alternative)?) {
        row.post_prob = prob;
    }
    let draws = fit.pi_draws();
    for (row, block) in out.cluster.iter_mut().zip(&report.cluster_baskets.clusters) {
        let parts: Vec<(&[f64], f64)> = block.iter().map(|&b| (draws[b].as_slice(), p0[b])).collect();
        row.post_prob = pooled_exceedance(&parts, alternative);
    }
    out.call.p0 = p0.to_vec();
    out.call.alternative = alternative;
    Ok(out)
}
