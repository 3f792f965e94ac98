//! Synthetic networks with planted ground truth: nested block structure with translational
//! homophily and planted hubs, the deterministic hierarchical model, and random graphs.
//!
//! All generators are pure functions of their configuration and a 64-bit seed (ChaCha8).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CitationNetwork, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockLevel {
    /// Sub-blocks per block of the level above.
    pub branching: usize,
    /// Link probability for pairs whose deepest shared block is at this level.
    pub p_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    /// Outermost level first.
    pub levels: Vec<BlockLevel>,
    pub leaf_size: usize,
    /// Link probability for pairs in different top-level blocks.
    pub p_between: f64,
    /// Homophily `h`: link probabilities are scaled by `1 - h * |T_u - T_v|`.
    pub homophily: f64,
    /// Target score per leaf block; evenly spaced over `[0, 1]` when absent.
    #[serde(default)]
    pub leaf_targets: Option<Vec<f64>>,
    pub n_hubs: usize,
    /// Links from each hub into each of its two blocks. Hub `i` bridges leaf block `i mod B`
    /// and the leaf block farthest from it in target score.
    pub hub_links: usize,
    /// Half-width of the uniform jitter applied to a document's target score.
    pub term_noise: f64,
    pub base_year: i32,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            levels: vec![BlockLevel { branching: 4, p_within: 0.1 }],
            leaf_size: 50,
            p_between: 0.005,
            homophily: 0.0,
            leaf_targets: None,
            n_hubs: 0,
            hub_links: 15,
            term_noise: 0.1,
            base_year: 2000,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl PlantedConfig {
    pub fn leaf_count(&self) -> usize {
        self.levels.iter().map(|l| l.branching).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.iter().any(|l| l.branching == 0) || self.leaf_size == 0 {
            return Err(Error::InvalidParameter("need at least one level, positive branching and leaf size".into()));
        }
        for l in &self.levels {
            check_prob("p_within", l.p_within)?;
        }
        check_prob("p_between", self.p_between)?;
        check_prob("homophily", self.homophily)?;
        check_prob("term_noise", self.term_noise)?;
        if let Some(t) = &self.leaf_targets {
            if t.len() != self.leaf_count() {
                return Err(Error::InvalidParameter(format!(
                    "{} leaf targets given for {} leaf blocks",
                    t.len(),
                    self.leaf_count()
                )));
            }
            for &x in t {
                check_prob("leaf target", x)?;
            }
        }
        if self.n_hubs > 0 && self.leaf_count() < 2 {
            return Err(Error::InvalidParameter("planted hubs need at least two leaf blocks".into()));
        }
        Ok(())
    }

    fn targets(&self) -> Vec<f64> {
        match &self.leaf_targets {
            Some(t) => t.clone(),
            None => {
                let b = self.leaf_count();
                if b == 1 {
                    vec![0.5]
                } else {
                    (0..b).map(|i| i as f64 / (b - 1) as f64).collect()
                }
            }
        }
    }
}

/// Planted truth for a generated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub config: PlantedConfig,
    pub ids: Vec<String>,
    /// Nested block path per node (outermost first). Hubs carry the path of their first block.
    pub paths: Vec<Vec<usize>>,
    pub planted_t: Vec<f64>,
    pub hubs: Vec<String>,
}

impl GroundTruth {
    /// Dense labels of the blocks at `depth` (1 = outermost).
    pub fn labels_at(&self, depth: usize) -> Vec<usize> {
        let mut ids = std::collections::BTreeMap::new();
        self.paths
            .iter()
            .map(|p| {
                let key = p[..depth.min(p.len())].to_vec();
                let next = ids.len();
                *ids.entry(key).or_insert(next)
            })
            .collect()
    }

    pub fn leaf_labels(&self) -> Vec<usize> {
        self.labels_at(self.config.levels.len())
    }

    pub fn is_hub(&self, node: usize) -> bool {
        self.hubs.iter().any(|h| *h == self.ids[node])
    }
}

fn node_id(i: usize) -> String {
    format!("n{i:05}")
}

fn years(n: usize, base: i32) -> impl Fn(usize) -> i32 {
    move |i| base + (i * 20 / n.max(1)) as i32
}

/// Term counts whose expected score equals `target` jittered by `noise`.
fn draw_terms(rng: &mut ChaCha8Rng, target: f64, noise: f64) -> (u64, u64) {
    let t = (target + noise * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0);
    let total = rng.random_range(10u64..=30);
    let clinical = (0..total).filter(|_| rng.random::<f64>() < t).count() as u64;
    (total - clinical, clinical)
}

/// Nested planted-partition citation network with translational homophily and planted hubs.
///
/// Block members are spread over random node positions; edges are oriented from the higher
/// node index (newer document) to the lower one.
pub fn gen_planted_kt_network(config: &PlantedConfig, seed: u64) -> Result<(CitationNetwork, GroundTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = config.leaf_count();
    let targets = config.targets();
    let depth = config.levels.len();
    let n_blocks = leaves * config.leaf_size;
    let n = n_blocks + config.n_hubs;

    let mut paths = Vec::with_capacity(n);
    for v in 0..n_blocks {
        let mut leaf = v / config.leaf_size;
        let mut path = vec![0; depth];
        for (d, level) in config.levels.iter().enumerate().rev() {
            path[d] = leaf % level.branching;
            leaf /= level.branching;
        }
        paths.push(path);
    }
    let leaf_of = |v: usize| v / config.leaf_size;
    let mut planted_t: Vec<f64> = (0..n_blocks).map(|v| targets[leaf_of(v)]).collect();

    let mut edges = Vec::new();
    for u in 0..n_blocks {
        for v in u + 1..n_blocks {
            let shared = paths[u].iter().zip(&paths[v]).take_while(|(a, b)| a == b).count();
            let base = if shared == 0 { config.p_between } else { config.levels[shared - 1].p_within };
            let p = base * (1.0 - config.homophily * (planted_t[u] - planted_t[v]).abs());
            if rng.random::<f64>() < p {
                edges.push((v, u));
            }
        }
    }

    let mut hubs = Vec::new();
    for h in 0..config.n_hubs {
        let v = n_blocks + h;
        // pair each block with the block farthest away in target score
        let a = h % leaves;
        let b = (0..leaves)
            .filter(|&b| b != a)
            .max_by(|&x, &y| {
                let (dx, dy) = ((targets[x] - targets[a]).abs(), (targets[y] - targets[a]).abs());
                dx.total_cmp(&dy).then(y.cmp(&x))
            })
            .expect("at least two leaf blocks");
        for block in [a, b] {
            let start = block * config.leaf_size;
            let mut pool: Vec<usize> = (start..start + config.leaf_size).collect();
            let take = config.hub_links.min(pool.len());
            for i in 0..take {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
                edges.push((v, pool[i]));
            }
        }
        paths.push(paths[a * config.leaf_size].clone());
        planted_t.push(0.5 * (targets[a] + targets[b]));
        hubs.push(v);
    }

    // shuffle positions so document age carries no block information
    let mut pos: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        pos.swap(i, j);
    }
    let mut order = vec![0; n];
    for (v, &p) in pos.iter().enumerate() {
        order[p] = v;
    }
    let hubs = hubs.into_iter().map(|v| node_id(pos[v])).collect();
    let paths = order.iter().map(|&v| paths[v].clone()).collect();
    let planted_t: Vec<f64> = order.iter().map(|&v| planted_t[v]).collect();
    let edges = edges.into_iter().map(|(a, b)| (pos[a].max(pos[b]), pos[a].min(pos[b])));

    let year = years(n, config.base_year);
    let docs: Vec<Document> = (0..n)
        .map(|v| {
            let (b, c) = draw_terms(&mut rng, planted_t[v], config.term_noise);
            Document::new(node_id(v)).with_year(year(v)).with_counts(b, c)
        })
        .collect();
    let ids = docs.iter().map(|d| d.id.clone()).collect();
    let net = CitationNetwork::new(docs, edges)?;
    Ok((net, GroundTruth { seed, config: config.clone(), ids, paths, planted_t, hubs }))
}

/// Largest iteration count accepted by [`gen_deterministic_hierarchical`] (5^7 nodes).
pub const MAX_HIERARCHICAL_ITERATIONS: u32 = 7;

/// Deterministic hierarchical model: a 5-clique is replicated four times per iteration and the
/// outermost nodes of each replica are wired to the center of the original. `5^iterations`
/// nodes; node 0 is the global center.
pub fn gen_deterministic_hierarchical(iterations: u32) -> Result<CitationNetwork> {
    if iterations == 0 || iterations > MAX_HIERARCHICAL_ITERATIONS {
        return Err(Error::InvalidParameter(format!(
            "iterations must lie in 1..={MAX_HIERARCHICAL_ITERATIONS}, got {iterations}"
        )));
    }
    // unit of size 5: center 0, periphery 1..4, all linked
    let mut edges: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
    let mut peripheral: Vec<usize> = (1..5).collect();
    let mut size = 5;
    for _ in 1..iterations {
        let unit_edges = edges.clone();
        let mut next_peripheral = Vec::new();
        for copy in 1..5 {
            let off = copy * size;
            edges.extend(unit_edges.iter().map(|&(a, b)| (a + off, b + off)));
            for &p in &peripheral {
                edges.push((0, p + off));
                next_peripheral.push(p + off);
            }
        }
        peripheral = next_peripheral;
        size *= 5;
    }
    let year = years(size, 2000);
    let docs = (0..size).map(|v| Document::new(node_id(v)).with_year(year(v))).collect();
    CitationNetwork::new(docs, edges.into_iter().map(|(a, b)| (a.max(b), a.min(b))))
}

/// Erdős–Rényi graph: every unordered pair is linked with probability `p`.
pub fn gen_random_graph(n: usize, p: f64, seed: u64) -> Result<CitationNetwork> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("random graph needs n >= 2, got {n}")));
    }
    check_prob("p", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((v, u));
            }
        }
    }
    let year = years(n, 2000);
    let docs = (0..n).map(|v| Document::new(node_id(v)).with_year(year(v))).collect();
    CitationNetwork::new(docs, edges)
}

/// `count` draws from a discrete power law with exponent `alpha` above `xmin`.
pub fn power_law_sample(alpha: f64, xmin: u64, count: usize, seed: u64) -> Result<Vec<u64>> {
    if !(alpha > 1.0) || xmin == 0 {
        return Err(Error::InvalidParameter(format!("need alpha > 1 and xmin >= 1, got {alpha}, {xmin}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| crate::selection::sample_discrete_power_law(&mut rng, alpha, xmin)).collect())
}

/// Normalized mutual information `2 I(A;B) / (H(A) + H(B))`; 1 when both labelings are trivial.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same nodes");
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    use std::collections::HashMap;
    let mut ca: HashMap<usize, f64> = HashMap::new();
    let mut cb: HashMap<usize, f64> = HashMap::new();
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
        *joint.entry((x, y)).or_default() += 1.0;
    }
    let entropy = |c: &HashMap<usize, f64>| -> f64 {
        let mut v: Vec<f64> = c.values().copied().collect();
        v.sort_by(f64::total_cmp);
        -v.iter().map(|&k| (k / n) * (k / n).ln()).sum::<f64>()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    if ha + hb == 0.0 {
        return 1.0;
    }
    let mut terms: Vec<f64> = joint
        .iter()
        .map(|(&(x, y), &k)| (k / n) * ((k * n) / (ca[&x] * cb[&y])).ln())
        .collect();
    terms.sort_by(f64::total_cmp);
    let mi: f64 = terms.iter().sum();
    (2.0 * mi / (ha + hb)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::translational_score;
    use crate::fronts::fast_greedy;

    #[test]
    fn same_seed_same_network() {
        let cfg = PlantedConfig { n_hubs: 3, homophily: 0.5, ..Default::default() };
        let (a, ta) = gen_planted_kt_network(&cfg, 42).unwrap();
        let (b, tb) = gen_planted_kt_network(&cfg, 42).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.documents(), b.documents());
        assert_eq!(ta, tb);
        let (c, _) = gen_planted_kt_network(&cfg, 43).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn zero_mixing_disconnects_leaves() {
        let cfg = PlantedConfig {
            levels: vec![BlockLevel { branching: 2, p_within: 0.0 }, BlockLevel { branching: 2, p_within: 0.3 }],
            leaf_size: 20,
            p_between: 0.0,
            ..Default::default()
        };
        let (net, truth) = gen_planted_kt_network(&cfg, 1).unwrap();
        let leaf = truth.leaf_labels();
        assert!(net.edges().iter().all(|&(u, v)| leaf[u] == leaf[v]));
        assert!(net.edge_count() > 0);
    }

    #[test]
    fn full_homophily_blocks_cross_score_links() {
        let cfg = PlantedConfig {
            levels: vec![BlockLevel { branching: 2, p_within: 0.5 }],
            leaf_size: 30,
            p_between: 0.5,
            homophily: 1.0,
            leaf_targets: Some(vec![0.0, 1.0]),
            ..Default::default()
        };
        let (net, truth) = gen_planted_kt_network(&cfg, 9).unwrap();
        let leaf = truth.leaf_labels();
        assert!(net.edges().iter().all(|&(u, v)| leaf[u] == leaf[v]));
    }

    #[test]
    fn edges_point_to_older_documents() {
        let (net, _) = gen_planted_kt_network(&PlantedConfig { n_hubs: 2, ..Default::default() }, 5).unwrap();
        for &(citing, cited) in net.edges() {
            assert!(citing > cited);
            assert!(net.document(citing).year >= net.document(cited).year);
        }
    }

    #[test]
    fn invalid_probabilities_rejected() {
        let bad = PlantedConfig { p_between: 1.5, ..Default::default() };
        assert!(gen_planted_kt_network(&bad, 0).is_err());
        let bad = PlantedConfig { homophily: -0.1, ..Default::default() };
        assert!(gen_planted_kt_network(&bad, 0).is_err());
        assert!(gen_random_graph(10, 2.0, 0).is_err());
        assert!(gen_random_graph(1, 0.5, 0).is_err());
    }

    #[test]
    fn block_mean_scores_track_targets() {
        let cfg = PlantedConfig { leaf_size: 60, ..Default::default() };
        let (net, truth) = gen_planted_kt_network(&cfg, 3).unwrap();
        let leaf = truth.leaf_labels();
        for block in 0..cfg.leaf_count() {
            let members: Vec<usize> = (0..net.len()).filter(|&v| leaf[v] == block).collect();
            let mean: f64 = members
                .iter()
                .map(|&v| {
                    let d = net.document(v);
                    translational_score(d.basic_terms.unwrap(), d.clinical_terms.unwrap()).unwrap()
                })
                .sum::<f64>()
                / members.len() as f64;
            let target = truth.planted_t[members[0]];
            assert!((mean - target).abs() <= 0.05, "block {block}: {mean} vs {target}");
        }
    }

    #[test]
    fn planted_hubs_span_two_blocks() {
        let cfg = PlantedConfig { n_hubs: 5, ..Default::default() };
        let (net, truth) = gen_planted_kt_network(&cfg, 8).unwrap();
        assert_eq!(truth.hubs.len(), 5);
        let leaf = truth.leaf_labels();
        for h in &truth.hubs {
            let v = net.index_of(h).unwrap();
            let g = net.projection();
            let blocks: std::collections::BTreeSet<_> = g.neighbor_ids(v).map(|u| leaf[u]).collect();
            assert_eq!(blocks.len(), 2);
            assert_eq!(g.degree(v), 2 * cfg.hub_links);
        }
    }

    #[test]
    fn hierarchical_model_sizes() {
        assert_eq!(gen_deterministic_hierarchical(1).unwrap().len(), 5);
        assert_eq!(gen_deterministic_hierarchical(1).unwrap().edge_count(), 10);
        let g2 = gen_deterministic_hierarchical(2).unwrap();
        assert_eq!(g2.len(), 25);
        // 5 cliques + 16 links to the center
        assert_eq!(g2.edge_count(), 50 + 16);
        assert_eq!(gen_deterministic_hierarchical(3).unwrap().len(), 125);
        assert!(gen_deterministic_hierarchical(0).is_err());
        assert!(gen_deterministic_hierarchical(MAX_HIERARCHICAL_ITERATIONS + 1).is_err());
    }

    #[test]
    fn random_graph_extremes() {
        assert_eq!(gen_random_graph(10, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gen_random_graph(10, 1.0, 1).unwrap().edge_count(), 45);
    }

    #[test]
    fn nmi_basics() {
        assert_eq!(nmi(&[0, 0, 1, 1], &[5, 5, 9, 9]), 1.0);
        assert!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).abs() < 1e-12);
        let x = nmi(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]);
        assert!(x > 0.0 && x < 1.0);
        assert_eq!(nmi(&[0, 0], &[1, 1]), 1.0);
    }

    #[test]
    fn recovery_improves_as_mixing_falls() {
        let mut prev = -1.0;
        for (p_between, h) in [(0.08, 0.0), (0.03, 0.5), (0.005, 1.0)] {
            let cfg = PlantedConfig {
                levels: vec![BlockLevel { branching: 4, p_within: 0.15 }],
                leaf_size: 40,
                p_between,
                homophily: h,
                ..Default::default()
            };
            let mean: f64 = (0..5)
                .map(|s| {
                    let (net, truth) = gen_planted_kt_network(&cfg, s).unwrap();
                    let p = fast_greedy(net.projection()).unwrap();
                    nmi(p.labels(), &truth.leaf_labels())
                })
                .sum::<f64>()
                / 5.0;
            assert!(mean >= prev - 0.02, "NMI fell from {prev} to {mean}");
            prev = mean;
        }
        assert!(prev > 0.95);
    }
}
