//! Local clustering, the C(k) scaling test for hierarchical organization, and module-role
//! metrics (participation coefficient, within-module degree z-score).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_node(graph: &Graph, node: usize) -> Result<()> {
    if node >= graph.node_count() {
        return Err(Error::UnknownNode(node.to_string()));
    }
    Ok(())
}

fn links_among_neighbors(graph: &Graph, node: usize) -> usize {
    let nbrs = graph.neighbors(node);
    let mut links = 0;
    for (i, &(u, _)) in nbrs.iter().enumerate() {
        // sorted merge of u's list against the neighbors after u
        let rest = &nbrs[i + 1..];
        let (mut a, mut b) = (0, 0);
        let un = graph.neighbors(u);
        while a < un.len() && b < rest.len() {
            match un[a].0.cmp(&rest[b].0) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    links += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    links
}

/// Local clustering coefficient; `None` when the degree is below 2.
pub fn clustering_coefficient(graph: &Graph, node: usize) -> Result<Option<f64>> {
    check_node(graph, node)?;
    let k = graph.degree(node);
    if k < 2 {
        return Ok(None);
    }
    Ok(Some(2.0 * links_among_neighbors(graph, node) as f64 / (k * (k - 1)) as f64))
}

/// Participation coefficient `1 - sum_s (k_is / k_i)^2` over the fronts of the node's neighbors.
pub fn participation_coefficient(graph: &Graph, node: usize, labels: &[usize]) -> Result<f64> {
    check_node(graph, node)?;
    let k = graph.degree(node);
    if k == 0 {
        return Err(Error::IsolatedNode(node.to_string()));
    }
    let mut per: BTreeMap<usize, usize> = BTreeMap::new();
    for v in graph.neighbor_ids(node) {
        *per.entry(labels[v]).or_insert(0) += 1;
    }
    // integer sum of squares keeps the value independent of front numbering
    let squares: u64 = per.values().map(|&c| (c * c) as u64).sum();
    let k2 = (k * k) as u64;
    Ok((k2 - squares) as f64 / k2 as f64)
}

fn internal_degree(graph: &Graph, node: usize, labels: &[usize]) -> usize {
    graph.neighbor_ids(node).filter(|&v| labels[v] == labels[node]).count()
}

fn z_score(value: f64, population: &[f64]) -> Option<f64> {
    if population.len() < 2 {
        return None;
    }
    let n = population.len() as f64;
    let mean = population.iter().sum::<f64>() / n;
    let var = population.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (var > 1e-24).then(|| (value - mean) / var.sqrt())
}

/// Within-front degree z-score; `None` when the front has fewer than two members or every
/// member has the same internal degree.
pub fn within_module_z(graph: &Graph, node: usize, labels: &[usize]) -> Result<Option<f64>> {
    check_node(graph, node)?;
    let front = labels[node];
    let population: Vec<f64> = (0..graph.node_count())
        .filter(|&v| labels[v] == front)
        .map(|v| internal_degree(graph, v, labels) as f64)
        .collect();
    Ok(z_score(internal_degree(graph, node, labels) as f64, &population))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub degree: usize,
    pub clustering: Option<f64>,
    /// `None` for isolated nodes.
    pub participation: Option<f64>,
    pub within_module_z: Option<f64>,
}

/// All per-node metrics at once.
pub fn node_metrics(graph: &Graph, labels: &[usize]) -> Result<Vec<NodeMetrics>> {
    if labels.len() != graph.node_count() {
        return Err(Error::Mismatch { partition: labels.len(), scores: graph.node_count() });
    }
    let kappa: Vec<usize> = (0..graph.node_count()).map(|v| internal_degree(graph, v, labels)).collect();
    let mut populations: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (v, &k) in kappa.iter().enumerate() {
        populations.entry(labels[v]).or_default().push(k as f64);
    }
    (0..graph.node_count())
        .into_par_iter()
        .map(|v| {
            Ok(NodeMetrics {
                degree: graph.degree(v),
                clustering: clustering_coefficient(graph, v)?,
                participation: if graph.degree(v) == 0 { None } else { Some(participation_coefficient(graph, v, labels)?) },
                within_module_z: z_score(kappa[v] as f64, &populations[&labels[v]]),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Binning {
    /// Bins `[start * base^i, start * base^(i+1))`.
    Log { base: f64, start: usize },
    /// One bin per distinct degree.
    None,
}

impl Default for Binning {
    fn default() -> Self {
        Binning::Log { base: 2.0, start: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingOptions {
    pub binning: Binning,
    /// Bins with fewer nodes than this are left out of the fit.
    pub min_bin_size: usize,
    /// Weight each bin by its node count; otherwise every bin counts once.
    #[serde(default = "default_weighted")]
    pub weighted: bool,
}

fn default_weighted() -> bool {
    true
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions { binning: Binning::default(), min_bin_size: 1, weighted: true }
    }
}

/// Least-squares fit of `ln C(k)` against `ln k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_bins: usize,
    /// Nodes left out because their clustering coefficient is undefined (degree < 2).
    pub excluded_nodes: usize,
}

/// Fits the scaling of mean clustering with degree. A slope near -1 indicates hierarchical
/// modularity; random graphs give a flat profile.
pub fn ck_scaling(graph: &Graph, opts: ScalingOptions) -> Result<ScalingFit> {
    let mut excluded = 0;
    // bin key -> (count, sum k, sum c)
    let mut bins: BTreeMap<i64, (usize, f64, f64)> = BTreeMap::new();
    for v in 0..graph.node_count() {
        let k = graph.degree(v);
        let Some(c) = clustering_coefficient(graph, v)? else {
            excluded += 1;
            continue;
        };
        let key = match opts.binning {
            Binning::Log { base, start } => {
                if !(base > 1.0) || start < 2 {
                    return Err(Error::InvalidParameter(format!("log binning needs base > 1 and start >= 2, got {base}, {start}")));
                }
                if k < start {
                    continue;
                }
                ((k as f64 / start as f64).ln() / base.ln() + 1e-12).floor() as i64
            }
            Binning::None => k as i64,
        };
        let e = bins.entry(key).or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 += k as f64;
        e.2 += c;
    }
    let points: Vec<(f64, f64, f64)> = bins
        .values()
        .filter(|&&(n, _, sum_c)| n >= opts.min_bin_size.max(1) && sum_c > 0.0)
        .map(|&(n, sum_k, sum_c)| {
            let w = if opts.weighted { n as f64 } else { 1.0 };
            ((sum_k / n as f64).ln(), (sum_c / n as f64).ln(), w)
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "C(k) scaling needs at least 3 degree bins with positive clustering, found {}",
            points.len()
        )));
    }
    let w: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(ScalingFit { slope, intercept, r2, n_bins: points.len(), excluded_nodes: excluded })
}
