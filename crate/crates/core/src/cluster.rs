//! Meta-baskets from community detection on the PEP-weighted basket graph.

use serde::{Deserialize, Serialize};

use crate::error::{MemError, Result};
use crate::model::ExchConfig;
use crate::summary::{summarize_parts, BasketSummary, MemFit};

/// A partition of basket indices into labelled clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Vec<usize>>,
    pub labels: Vec<String>,
}

/// Any function turning a PEP matrix into a partition can replace Louvain.
pub type ClusterFunction = dyn Fn(&[Vec<f64>]) -> Result<ClusterAssignment>;

impl ClusterAssignment {
    /// Validates that `blocks` partition `0..baskets`, sorts members, orders
    /// blocks by smallest member and labels them "Cluster 1", "Cluster 2", ...
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>, baskets: usize) -> Result<Self> {
        let mut seen = vec![false; baskets];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(MemError::InvalidConfig("empty cluster".into()));
            }
            block.sort_unstable();
            for &b in block.iter() {
                if b >= baskets || seen[b] {
                    return Err(MemError::InvalidConfig(format!("basket index {b} is out of range or repeated")));
                }
                seen[b] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(MemError::InvalidConfig(format!("basket {missing} is in no cluster")));
        }
        blocks.sort_by_key(|b| b[0]);
        let labels = (1..=blocks.len()).map(|k| format!("Cluster {k}")).collect();
        Ok(Self { clusters: blocks, labels })
    }

    pub fn singletons(baskets: usize) -> Self {
        Self::from_blocks((0..baskets).map(|b| vec![b]).collect(), baskets).expect("singletons form a partition")
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn baskets(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Cluster index of each basket.
    pub fn membership(&self) -> Vec<usize> {
        let mut out = vec![0; self.baskets()];
        for (k, block) in self.clusters.iter().enumerate() {
            for &b in block {
                out[b] = k;
            }
        }
        out
    }
}

fn check_square(pep: &[Vec<f64>]) -> Result<usize> {
    let j = pep.len();
    if j == 0 {
        return Err(MemError::InvalidConfig("cannot cluster zero baskets".into()));
    }
    for (r, row) in pep.iter().enumerate() {
        if row.len() != j {
            return Err(MemError::InvalidConfig("PEP matrix is not square".into()));
        }
        for (c, &v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) || v != pep[c][r] {
                return Err(MemError::InvalidConfig(format!("PEP entry ({r}, {c}) is not a symmetric probability")));
            }
        }
    }
    Ok(j)
}

/// Newman modularity of a membership vector on a weighted graph (self-loops allowed).
pub fn modularity(weights: &[Vec<f64>], membership: &[usize]) -> f64 {
    let degree: Vec<f64> = weights.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = degree.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..weights.len() {
        for j in 0..weights.len() {
            if membership[i] == membership[j] {
                q += weights[i][j] - degree[i] * degree[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Off-diagonal PEP entries as graph weights.
pub fn pep_graph(pep: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut w = pep.to_vec();
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    w
}

/// One pass of local moves. Returns the community of each node (relabelled
/// 0.. in order of smallest node) and whether anything moved.
fn local_moves(weights: &[Vec<f64>]) -> (Vec<usize>, bool) {
    let n = weights.len();
    let degree: Vec<f64> = weights.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = degree.iter().sum();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = degree.clone();
    let mut moved_any = false;

    // each improving move raises modularity, so this terminates; the cap is a backstop
    for _ in 0..1_000 {
        let mut moved = false;
        for i in 0..n {
            let own = community[i];
            total[own] -= degree[i];
            let mut links = vec![0.0; n];
            for j in 0..n {
                if j != i && weights[i][j] > 0.0 {
                    links[community[j]] += weights[i][j];
                }
            }
            let gain = |c: usize| links[c] - total[c] * degree[i] / two_m;
            let mut best = own;
            let mut best_gain = gain(own);
            for c in 0..n {
                if c != own && links[c] > 0.0 {
                    let g = gain(c);
                    if g > best_gain + 1e-12 || (best != own && (g - best_gain).abs() <= 1e-12 && c < best) {
                        best = c;
                        best_gain = g;
                    }
                }
            }
            total[best] += degree[i];
            if best != own {
                community[i] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }

    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for c in community.iter_mut() {
        if relabel[*c] == usize::MAX {
            relabel[*c] = next;
            next += 1;
        }
        *c = relabel[*c];
    }
    (community, moved_any)
}

/// Louvain modularity maximization on the graph with edge weights PEP[i][j].
///
/// Vertices are swept in index order. A vertex leaves its community only for
/// a strictly better one; among equally good targets the lowest index wins.
/// The result is fully determined by the matrix.
pub fn cluster_louvain(pep: &[Vec<f64>]) -> Result<ClusterAssignment> {
    let j = check_square(pep)?;
    let mut weights = pep_graph(pep);
    let mut node_of: Vec<usize> = (0..j).collect();
    if weights.iter().flatten().all(|&w| w == 0.0) {
        return ClusterAssignment::from_blocks((0..j).map(|b| vec![b]).collect(), j);
    }
    loop {
        let (community, moved) = local_moves(&weights);
        if !moved {
            break;
        }
        let count = community.iter().max().map_or(0, |m| m + 1);
        let mut folded = vec![vec![0.0; count]; count];
        for (a, row) in weights.iter().enumerate() {
            for (b, &w) in row.iter().enumerate() {
                folded[community[a]][community[b]] += w;
            }
        }
        for node in node_of.iter_mut() {
            *node = community[*node];
        }
        weights = folded;
        if count == 1 {
            break;
        }
    }
    let count = node_of.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); count];
    for (b, &c) in node_of.iter().enumerate() {
        blocks[c].push(b);
    }
    ClusterAssignment::from_blocks(blocks, j)
}

/// Applies a clustering function and checks its output is a partition of the baskets.
pub fn cluster_with(pep: &[Vec<f64>], function: &ClusterFunction) -> Result<ClusterAssignment> {
    let j = check_square(pep)?;
    let assignment = function(pep)?;
    ClusterAssignment::from_blocks(assignment.clusters, j)
}

/// Summaries of each cluster's pooled member draws. Exceedance counts each
/// member's draws against that member's own null rate.
pub fn cluster_summaries(fit: &MemFit, assignment: &ClusterAssignment) -> Result<Vec<BasketSummary>> {
    let cfg = &fit.config;
    let draws = fit.pi_draws();
    if assignment.baskets() != draws.len() {
        return Err(MemError::InvalidConfig("cluster assignment does not match the fitted baskets".into()));
    }
    assignment
        .clusters
        .iter()
        .zip(&assignment.labels)
        .map(|(block, label)| {
            let parts: Vec<(&[f64], f64)> = block.iter().map(|&b| (draws[b].as_slice(), cfg.p0[b])).collect();
            summarize_parts(label, &parts, cfg.alternative, cfg.hpd_alpha, cfg.ess_rule)
        })
        .collect()
}

/// Mean PEP between clusters. Diagonal entries average the within-cluster
/// pairs and are 1 for a singleton.
pub fn cluster_pep(pep: &[Vec<f64>], assignment: &ClusterAssignment) -> Vec<Vec<f64>> {
    let c = assignment.len();
    let mut out = vec![vec![1.0; c]; c];
    for k in 0..c {
        for l in 0..c {
            let mut sum = 0.0;
            let mut pairs = 0usize;
            for &i in &assignment.clusters[k] {
                for &j in &assignment.clusters[l] {
                    if i != j {
                        sum += pep[i][j];
                        pairs += 1;
                    }
                }
            }
            if pairs > 0 {
                out[k][l] = sum / pairs as f64;
            }
        }
    }
    out
}

/// 1 where every pair between (or within) the clusters is linked in the MAP configuration.
pub fn cluster_map(map_config: &ExchConfig, assignment: &ClusterAssignment) -> Vec<Vec<u8>> {
    let c = assignment.len();
    let mut out = vec![vec![1u8; c]; c];
    for k in 0..c {
        for l in 0..c {
            let unanimous = assignment.clusters[k]
                .iter()
                .all(|&i| assignment.clusters[l].iter().all(|&j| i == j || map_config.get(i, j)));
            out[k][l] = u8::from(unanimous);
        }
    }
    out
}
