//! Translational hubs: high-degree, weakly clustered nodes whose links spread over several
//! fronts with different mean translational scores.
//!
//! A node is a candidate when it passes four filters (degree quantile, clustering cap,
//! participation floor, score spread floor) and is ranked by
//! `participation * t_spread * degree / max_degree`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::CitationNetwork;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{clustering_coefficient, participation_coefficient};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    /// Degree quantile a candidate must reach (nearest-rank).
    pub degree_pct: f64,
    /// Clustering ceiling; `None` uses the median of the defined clustering coefficients.
    pub c_max: Option<f64>,
    pub p_min: f64,
    pub t_spread_min: f64,
}

impl Default for HubConfig {
    fn default() -> Self {
        HubConfig { degree_pct: 0.90, c_max: None, p_min: 0.3, t_spread_min: 0.2 }
    }
}

impl HubConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.degree_pct > 0.0 && self.degree_pct <= 1.0) {
            return Err(Error::InvalidParameter(format!("degree_pct must lie in (0, 1], got {}", self.degree_pct)));
        }
        if let Some(c) = self.c_max {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidParameter(format!("c_max must lie in [0, 1], got {c}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_min) || !(0.0..=1.0).contains(&self.t_spread_min) {
            return Err(Error::InvalidParameter("p_min and t_spread_min must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubCandidate {
    pub id: String,
    #[serde(skip)]
    pub node: usize,
    pub degree: usize,
    pub clustering: Option<f64>,
    pub participation: f64,
    /// 1-based numbers of the fronts the node links into.
    pub bridged_fronts: Vec<usize>,
    pub t_spread: f64,
    pub hub_score: f64,
    pub rank: usize,
}

/// Nearest-rank quantile of the degree distribution.
pub fn degree_quantile(graph: &Graph, pct: f64) -> usize {
    let mut degrees: Vec<usize> = (0..graph.node_count()).map(|v| graph.degree(v)).collect();
    if degrees.is_empty() {
        return 0;
    }
    degrees.sort_unstable();
    let idx = ((pct * degrees.len() as f64) - 1e-9).ceil().max(1.0) as usize - 1;
    degrees[idx.min(degrees.len() - 1)]
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

/// Sorts by descending score, ties by id, and assigns ranks `1..`.
pub fn rank_candidates(cands: &mut [HubCandidate]) {
    cands.sort_by(|a, b| b.hub_score.total_cmp(&a.hub_score).then_with(|| a.id.cmp(&b.id)));
    for (i, c) in cands.iter_mut().enumerate() {
        c.rank = i + 1;
    }
}

/// Ranked translational hubs. `labels` are the level-2 fronts (0-based), `scores` the
/// per-document translational scores; both index the network's nodes.
pub fn detect_translational_hubs(
    net: &CitationNetwork,
    labels: &[usize],
    scores: &[Option<f64>],
    config: &HubConfig,
) -> Result<Vec<HubCandidate>> {
    config.validate()?;
    if labels.len() != net.len() || scores.len() != net.len() {
        return Err(Error::Mismatch { partition: labels.len(), scores: scores.len() });
    }
    let graph = net.projection();
    if graph.edge_count() == 0 {
        return Ok(Vec::new());
    }

    let mut front_t: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (v, s) in scores.iter().enumerate() {
        if let Some(t) = s {
            let e = front_t.entry(labels[v]).or_insert((0.0, 0));
            e.0 += t;
            e.1 += 1;
        }
    }
    let front_mean = |f: usize| front_t.get(&f).map(|&(sum, n)| sum / n as f64);

    let clustering: Vec<Option<f64>> =
        (0..net.len()).map(|v| clustering_coefficient(graph, v)).collect::<Result<_>>()?;
    let c_max = match config.c_max {
        Some(c) => c,
        None => median(clustering.iter().flatten().copied().collect()).unwrap_or(0.0),
    };
    let k_min = degree_quantile(graph, config.degree_pct);
    let k_max = (0..net.len()).map(|v| graph.degree(v)).max().unwrap_or(0);

    let mut out = Vec::new();
    for v in 0..net.len() {
        let k = graph.degree(v);
        if k == 0 || k < k_min || clustering[v].unwrap_or(0.0) > c_max {
            continue;
        }
        let p = participation_coefficient(graph, v, labels)?;
        if p < config.p_min {
            continue;
        }
        let bridged: BTreeSet<usize> = graph.neighbor_ids(v).map(|u| labels[u]).collect();
        let means: Vec<f64> = bridged.iter().filter_map(|&f| front_mean(f)).collect();
        if means.len() < 2 {
            continue;
        }
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = hi - lo;
        if spread < config.t_spread_min {
            continue;
        }
        out.push(HubCandidate {
            id: net.id(v).to_string(),
            node: v,
            degree: k,
            clustering: clustering[v],
            participation: p,
            bridged_fronts: bridged.iter().map(|f| f + 1).collect(),
            t_spread: spread,
            hub_score: p * spread * (k as f64 / k_max as f64),
            rank: 0,
        });
    }
    rank_candidates(&mut out);
    Ok(out)
}

/// Connected groups of accepted hubs in the undirected projection, as sorted id lists.
pub fn hub_regions(net: &CitationNetwork, hubs: &[HubCandidate]) -> Vec<Vec<String>> {
    let nodes: Vec<usize> = {
        let mut v: Vec<usize> = hubs.iter().map(|h| h.node).collect();
        v.sort_unstable();
        v
    };
    let sub = net.projection().induced(&nodes);
    let mut regions: Vec<Vec<String>> = sub
        .components()
        .into_iter()
        .map(|c| {
            let mut ids: Vec<String> = c.into_iter().map(|i| net.id(nodes[i]).to_string()).collect();
            ids.sort();
            ids
        })
        .collect();
    regions.sort();
    regions
}
