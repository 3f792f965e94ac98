//! Research fronts: modularity, greedy agglomerative modularity maximization and the nested
//! front hierarchy built by re-clustering each front on its own induced subgraph.
//!
//! Modularity is evaluated in exact integer arithmetic: with total edge weight `W`, internal
//! weight `I_s` and strength `S_s` of front `s`,
//! `Q = sum_s (4 W I_s - S_s^2) / (4 W^2)`. Merge gains in the agglomeration are compared as
//! integers too, so tie-breaking never depends on rounding.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Assignment of every node to one front, with its modularity.
///
/// Front indices are dense, `0..front_count()`, numbered by decreasing size and then by
/// smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    q: f64,
}

impl Partition {
    /// Canonicalizes arbitrary labels and evaluates their modularity on `graph`.
    pub fn from_labels(graph: &Graph, labels: &[usize]) -> Result<Self> {
        let q = modularity(graph, labels)?;
        Ok(Partition { labels: canonical_labels(labels), q })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn front_of(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn front_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each front, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.front_count()];
        for (v, &f) in self.labels.iter().enumerate() {
            out[f].push(v);
        }
        out
    }
}

/// Relabels to `0..k` ordered by decreasing group size, then smallest member.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (v, &l) in labels.iter().enumerate() {
        let e = groups.entry(l).or_insert((0, v));
        e.0 += 1;
    }
    let mut order: Vec<(usize, usize, usize)> = groups.into_iter().map(|(l, (size, first))| (size, first, l)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let map: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &(_, _, l))| (l, i)).collect();
    labels.iter().map(|l| map[l]).collect()
}

fn modularity_numerator(graph: &Graph, labels: &[usize]) -> i128 {
    let w = graph.total_weight() as i128;
    let mut per: HashMap<usize, (i128, i128)> = HashMap::new();
    for v in 0..graph.node_count() {
        per.entry(labels[v]).or_default().1 += graph.strength(v) as i128;
    }
    for (u, v, wt) in graph.edges() {
        if labels[u] == labels[v] {
            per.get_mut(&labels[u]).unwrap().0 += wt as i128;
        }
    }
    per.values().map(|&(internal, strength)| 4 * w * internal - strength * strength).sum()
}

fn q_from_numerator(num: i128, w: u64) -> f64 {
    let w = w as f64;
    num as f64 / (4.0 * w * w)
}

/// Newman modularity of `labels` on `graph` (weights replace edge counts).
pub fn modularity(graph: &Graph, labels: &[usize]) -> Result<f64> {
    if labels.len() != graph.node_count() {
        return Err(Error::Mismatch { partition: labels.len(), scores: graph.node_count() });
    }
    if graph.total_weight() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(q_from_numerator(modularity_numerator(graph, labels), graph.total_weight()))
}

struct Community {
    strength: i128,
    links: BTreeMap<usize, i128>,
    best: Option<(i128, usize)>,
}

/// Gain numerator for merging communities with link weight `w_ij`: the modularity change is
/// `2 * gain / (4 W^2)`.
fn gain(two_w: i128, w_ij: i128, s_i: i128, s_j: i128) -> i128 {
    two_w * w_ij - s_i * s_j
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn refresh_best(comms: &mut [Community], k: usize, two_w: i128) {
    let s_k = comms[k].strength;
    let mut best: Option<(i128, usize)> = None;
    for (&j, &w) in &comms[k].links {
        let g = gain(two_w, w, s_k, comms[j].strength);
        let better = match best {
            None => true,
            Some((bg, bj)) => g > bg || (g == bg && pair(k, j) < pair(k, bj)),
        };
        if better {
            best = Some((g, j));
        }
    }
    comms[k].best = best;
}

/// Weighted graph whose nodes may carry self-loops; used for collapsed fronts.
struct Level {
    adj: Vec<Vec<(usize, i128)>>,
    strength: Vec<i128>,
}

impl Level {
    fn from_graph(graph: &Graph) -> Self {
        Level {
            adj: (0..graph.node_count())
                .map(|v| graph.neighbors(v).iter().map(|&(u, w)| (u, w as i128)).collect())
                .collect(),
            strength: (0..graph.node_count()).map(|v| graph.strength(v) as i128).collect(),
        }
    }

    fn len(&self) -> usize {
        self.strength.len()
    }

    /// Collapses each label (dense) into one node.
    fn collapse(&self, labels: &[usize], k: usize) -> Level {
        let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); k];
        let mut strength = vec![0i128; k];
        for v in 0..self.len() {
            strength[labels[v]] += self.strength[v];
            for &(u, w) in &self.adj[v] {
                if labels[u] != labels[v] {
                    *links[labels[v]].entry(labels[u]).or_default() += w;
                }
            }
        }
        Level { adj: links.into_iter().map(|m| m.into_iter().collect()).collect(), strength }
    }
}

/// Moves single nodes to the neighboring front with the largest modularity gain, sweeping in
/// node order until no move gains. Ties go to the smallest front label. Returns whether any
/// node moved.
fn local_moves(level: &Level, labels: &mut [usize], four_w: i128) -> bool {
    let mut strength: HashMap<usize, i128> = HashMap::new();
    for v in 0..level.len() {
        *strength.entry(labels[v]).or_default() += level.strength[v];
    }
    let mut any = false;
    loop {
        let mut moved = false;
        for v in 0..level.len() {
            let s = level.strength[v];
            if s == 0 {
                continue;
            }
            let c = labels[v];
            let mut links: BTreeMap<usize, i128> = BTreeMap::new();
            for &(u, wt) in &level.adj[v] {
                *links.entry(labels[u]).or_default() += wt;
            }
            let k_c = links.get(&c).copied().unwrap_or(0);
            let s_c = strength[&c];
            let mut best: Option<(i128, usize)> = None;
            for (&d, &k_d) in &links {
                if d == c {
                    continue;
                }
                let g = four_w * (k_d - k_c) - 2 * s * (strength[&d] - s_c + s);
                if g > 0 && best.is_none_or(|(bg, _)| g > bg) {
                    best = Some((g, d));
                }
            }
            if let Some((_, d)) = best {
                *strength.get_mut(&c).unwrap() -= s;
                *strength.get_mut(&d).unwrap() += s;
                labels[v] = d;
                moved = true;
            }
        }
        if !moved {
            return any;
        }
        any = true;
    }
}

/// Tries to dissolve each front (smallest first) by sending its members to their best other
/// neighboring front and re-running local moves; keeps the result when modularity rises.
fn dissolve_fronts(graph: &Graph, base: &Level, labels: &mut Vec<usize>, four_w: i128) {
    let mut current = modularity_numerator(graph, labels);
    loop {
        let mut improved = false;
        let dense = canonical_labels(labels);
        let k = dense_count(&dense);
        let members = {
            let mut m = vec![Vec::new(); k];
            for (v, &f) in dense.iter().enumerate() {
                m[f].push(v);
            }
            m
        };
        *labels = dense;
        for f in (0..k).rev() {
            let mut trial = labels.clone();
            for &v in &members[f] {
                let mut links: BTreeMap<usize, i128> = BTreeMap::new();
                for &(u, w) in &base.adj[v] {
                    if trial[u] != f {
                        *links.entry(trial[u]).or_default() += w;
                    }
                }
                if let Some((&d, _)) = links.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
                    trial[v] = d;
                }
            }
            if trial == *labels {
                continue;
            }
            local_moves(base, &mut trial, four_w);
            let q = modularity_numerator(graph, &trial);
            if q > current {
                current = q;
                *labels = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Tries to split each front (largest first) along the best agglomerative cut of its induced
/// subgraph, then polishes with local moves and dissolution; keeps the result when modularity
/// rises.
fn split_fronts(graph: &Graph, base: &Level, labels: &mut Vec<usize>, four_w: i128) {
    let mut current = modularity_numerator(graph, labels);
    loop {
        let dense = canonical_labels(labels);
        let k = dense_count(&dense);
        let mut members = vec![Vec::new(); k];
        for (v, &f) in dense.iter().enumerate() {
            members[f].push(v);
        }
        *labels = dense;
        let mut order: Vec<usize> = (0..k).filter(|&f| members[f].len() > 1).collect();
        order.sort_by_key(|&f| (std::cmp::Reverse(members[f].len()), f));
        let mut improved = false;
        for f in order {
            let sub = graph.induced(&members[f]);
            let w = sub.total_weight() as i128;
            if w == 0 {
                continue;
            }
            let strengths = (0..sub.node_count()).map(|v| sub.strength(v) as i128).collect();
            let links = (0..sub.node_count())
                .map(|v| sub.neighbors(v).iter().map(|&(u, wt)| (u, wt as i128)).collect())
                .collect();
            let parts = apply_merges(sub.node_count(), &agglomerate(strengths, links, 2 * w));
            let mut fresh: BTreeMap<usize, usize> = BTreeMap::new();
            let mut trial = labels.clone();
            for (i, &v) in members[f].iter().enumerate() {
                let next = k + fresh.len();
                trial[v] = *fresh.entry(parts[i]).or_insert(next);
            }
            if fresh.len() < 2 {
                continue;
            }
            local_moves(base, &mut trial, four_w);
            dissolve_fronts(graph, base, &mut trial, four_w);
            let q = modularity_numerator(graph, &trial);
            if q > current {
                current = q;
                *labels = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Largest graph the Kernighan-Lin pass runs on; each pass costs O(n * m).
const KL_MAX_NODES: usize = 1000;

/// Kernighan-Lin refinement: every node is moved exactly once, each step taking the best
/// single move (to a neighboring front or a new one) among unmoved nodes even when it lowers
/// modularity, and the sweep is rewound to its best intermediate state. Sweeps repeat while
/// they gain. Ties go to the smallest node, then the smallest target label.
fn kernighan_lin(level: &Level, labels: &mut Vec<usize>, four_w: i128) -> bool {
    let n = level.len();
    if n > KL_MAX_NODES {
        return false;
    }
    let mut any = false;
    loop {
        let mut cur = canonical_labels(labels);
        let mut strength: HashMap<usize, i128> = HashMap::new();
        let mut size: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            *strength.entry(cur[v]).or_default() += level.strength[v];
            *size.entry(cur[v]).or_default() += 1;
        }
        let mut next_label = dense_count(&cur);
        let mut moved = vec![false; n];
        let (mut q, mut best_q) = (0i128, 0i128);
        let mut best_state: Option<Vec<usize>> = None;
        for _ in 0..n {
            let mut step: Option<(i128, usize, usize)> = None;
            for v in (0..n).filter(|&v| !moved[v] && level.strength[v] > 0) {
                let s = level.strength[v];
                let c = cur[v];
                let mut links: BTreeMap<usize, i128> = BTreeMap::new();
                for &(u, wt) in &level.adj[v] {
                    *links.entry(cur[u]).or_default() += wt;
                }
                let k_c = links.get(&c).copied().unwrap_or(0);
                let s_c = strength[&c];
                let mut targets: Vec<(usize, i128, i128)> =
                    links.iter().filter(|(&d, _)| d != c).map(|(&d, &k)| (d, k, strength[&d])).collect();
                if size[&c] > 1 {
                    targets.push((next_label, 0, 0));
                }
                for (d, k_d, s_d) in targets {
                    let g = four_w * (k_d - k_c) - 2 * s * (s_d - s_c + s);
                    if step.is_none_or(|(bg, _, _)| g > bg) {
                        step = Some((g, v, d));
                    }
                }
            }
            let Some((g, v, d)) = step else { break };
            let (c, s) = (cur[v], level.strength[v]);
            *strength.get_mut(&c).unwrap() -= s;
            *size.get_mut(&c).unwrap() -= 1;
            *strength.entry(d).or_default() += s;
            *size.entry(d).or_default() += 1;
            if d == next_label {
                next_label += 1;
            }
            cur[v] = d;
            moved[v] = true;
            q += g;
            if q > best_q {
                best_q = q;
                best_state = Some(cur.clone());
            }
        }
        match best_state {
            Some(state) => {
                *labels = canonical_labels(&state);
                any = true;
            }
            None => return any,
        }
    }
}

fn dense_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Multilevel local moving: node moves, then each front collapses to one node, repeated until
/// nothing moves.
fn multilevel(graph: &Graph, four_w: i128) -> Vec<usize> {
    let mut assignment: Vec<usize> = (0..graph.node_count()).collect();
    let mut level = Level::from_graph(graph);
    loop {
        let mut labels: Vec<usize> = (0..level.len()).collect();
        if !local_moves(&level, &mut labels, four_w) {
            return assignment;
        }
        let dense = canonical_labels(&labels);
        let k = dense_count(&dense);
        assignment = assignment.iter().map(|&a| dense[a]).collect();
        level = level.collapse(&dense, k);
    }
}

/// Agglomerates communities with the given strengths and inter-community link weights and
/// returns the merges `(kept, absorbed)` up to the cut with the highest modularity.
fn agglomerate(strengths: Vec<i128>, links: Vec<BTreeMap<usize, i128>>, two_w: i128) -> Vec<(usize, usize)> {
    let n = strengths.len();
    let mut comms: Vec<Community> =
        strengths.into_iter().zip(links).map(|(strength, links)| Community { strength, links, best: None }).collect();
    for k in 0..n {
        refresh_best(&mut comms, k, two_w);
    }
    let mut alive: Vec<bool> = vec![true; n];
    let mut q_num: i128 = 0;
    let mut best_q = q_num;
    let mut best_step = 0;
    let mut merges: Vec<(usize, usize)> = Vec::new();

    loop {
        let mut chosen: Option<(i128, (usize, usize))> = None;
        for k in 0..n {
            if !alive[k] {
                continue;
            }
            if let Some((g, j)) = comms[k].best {
                let p = pair(k, j);
                let better = match chosen {
                    None => true,
                    Some((cg, cp)) => g > cg || (g == cg && p < cp),
                };
                if better {
                    chosen = Some((g, p));
                }
            }
        }
        let Some((g, (a, b))) = chosen else { break };

        // merge b into a
        q_num += 2 * g;
        let b_links = std::mem::take(&mut comms[b].links);
        let s_b = comms[b].strength;
        comms[a].strength += s_b;
        comms[a].links.remove(&b);
        for (&k, &wt) in &b_links {
            if k == a {
                continue;
            }
            *comms[a].links.entry(k).or_insert(0) += wt;
            let kl = &mut comms[k].links;
            kl.remove(&b);
            *kl.entry(a).or_insert(0) += wt;
        }
        comms[b].best = None;
        alive[b] = false;
        merges.push((a, b));

        let touched: Vec<usize> = comms[a].links.keys().copied().collect();
        refresh_best(&mut comms, a, two_w);
        for k in touched {
            refresh_best(&mut comms, k, two_w);
        }

        if q_num > best_q {
            best_q = q_num;
            best_step = merges.len();
        }
    }
    merges.truncate(best_step);
    merges
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn apply_merges(count: usize, merges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..count).collect();
    for &(a, b) in merges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[rb] = ra;
    }
    (0..count).map(|v| find(&mut parent, v)).collect()
}

/// Improves an existing labeling by single-node moves, front dissolution and front splitting;
/// the result never has lower modularity than the input.
pub fn refine_partition(graph: &Graph, labels: &[usize]) -> Result<Partition> {
    modularity(graph, labels)?;
    let four_w = 4 * graph.total_weight() as i128;
    let base = Level::from_graph(graph);
    let mut labels = canonical_labels(labels);
    local_moves(&base, &mut labels, four_w);
    dissolve_fronts(graph, &base, &mut labels, four_w);
    split_fronts(graph, &base, &mut labels, four_w);
    Partition::from_labels(graph, &labels)
}

/// Greedy agglomerative modularity maximization.
///
/// Starts from singletons and repeatedly merges the linked pair with the largest modularity
/// gain (ties: smallest `(a, b)` community-id pair, a merged community keeps the smaller id)
/// until no linked pair remains, and takes the intermediate partition with the highest
/// modularity. That partition is then polished by alternating single-node moves between
/// neighboring fronts and further front merges, while either raises modularity, and by
/// tentatively dissolving fronts into their neighbors. A multilevel local-moving pass, polished
/// the same way, replaces the result when it reaches strictly higher modularity. Finally each
/// front is tentatively split along the agglomerative cut of its own subgraph. Isolated nodes
/// stay singletons.
pub fn fast_greedy(graph: &Graph) -> Result<Partition> {
    let n = graph.node_count();
    let w = graph.total_weight();
    if w == 0 {
        return Err(Error::EmptyGraph);
    }
    let two_w = 2 * w as i128;
    let strengths = (0..n).map(|v| graph.strength(v) as i128).collect();
    let links = (0..n).map(|v| graph.neighbors(v).iter().map(|&(u, wt)| (u, wt as i128)).collect()).collect();
    let mut labels = apply_merges(n, &agglomerate(strengths, links, two_w));
    let base = Level::from_graph(graph);
    loop {
        local_moves(&base, &mut labels, 2 * two_w);
        let dense = canonical_labels(&labels);
        let k = dense_count(&dense);
        let level = base.collapse(&dense, k);
        let merges = agglomerate(level.strength.clone(), level.adj.iter().map(|a| a.iter().copied().collect()).collect(), two_w);
        if merges.is_empty() {
            labels = dense;
            break;
        }
        let merged = apply_merges(k, &merges);
        labels = dense.iter().map(|&c| merged[c]).collect();
    }

    let four_w = 2 * two_w;
    let mut best: Option<(i128, Vec<usize>)> = None;
    for mut cand in [labels, multilevel(graph, four_w), vec![0; n]] {
        dissolve_fronts(graph, &base, &mut cand, four_w);
        split_fronts(graph, &base, &mut cand, four_w);
        if kernighan_lin(&base, &mut cand, four_w) {
            dissolve_fronts(graph, &base, &mut cand, four_w);
        }
        let num = modularity_numerator(graph, &cand);
        if best.as_ref().is_none_or(|(b, _)| num > *b) {
            best = Some((num, cand));
        }
    }
    let labels = canonical_labels(&best.expect("three candidates").1);
    let q = q_from_numerator(modularity_numerator(graph, &labels), w);
    Ok(Partition { labels, q })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HierarchyConfig {
    /// Deepest level produced; level 2 is the first clustering of the whole graph.
    pub max_depth: usize,
    /// Fronts smaller than this are not re-clustered.
    pub min_front_size: usize,
    /// A front is split only if its child partition reaches this modularity.
    pub min_q_gain: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig { max_depth: 4, min_front_size: 10, min_q_gain: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Front {
    /// 1-based front numbers from level 2 down to this front's level.
    pub path: Vec<usize>,
    pub members: Vec<usize>,
    /// Modularity of the partition this front was split into, if it was split.
    pub split_q: Option<f64>,
    /// Indices into [`FrontTree::fronts`].
    pub children: Vec<usize>,
}

impl Front {
    pub fn level(&self) -> usize {
        self.path.len() + 1
    }

    pub fn path_string(&self) -> String {
        path_string(&self.path)
    }
}

pub fn path_string(path: &[usize]) -> String {
    path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(".")
}

/// Nested fronts. Level 1 is the whole corpus; every deeper level refines the one above.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTree {
    config: HierarchyConfig,
    top: Partition,
    fronts: Vec<Front>,
    leaf_of: Vec<usize>,
}

impl FrontTree {
    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }

    /// The level-2 partition of the whole graph.
    pub fn top(&self) -> &Partition {
        &self.top
    }

    /// Every front, ordered by level and then by path.
    pub fn fronts(&self) -> &[Front] {
        &self.fronts
    }

    pub fn fronts_at(&self, level: usize) -> impl Iterator<Item = &Front> {
        self.fronts.iter().filter(move |f| f.level() == level)
    }

    /// Deepest level present.
    pub fn depth(&self) -> usize {
        self.fronts.iter().map(Front::level).max().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaf_of.is_empty()
    }

    /// Path of the deepest front containing `node`.
    pub fn path_of(&self, node: usize) -> &[usize] {
        &self.fronts[self.leaf_of[node]].path
    }

    pub fn leaf_of(&self, node: usize) -> &Front {
        &self.fronts[self.leaf_of[node]]
    }

    /// Dense labels of the fronts at `level`; nodes whose branch stops earlier keep the label
    /// of their deepest front.
    pub fn labels_at(&self, level: usize) -> Vec<usize> {
        let keep = level.saturating_sub(1).max(1);
        let keys: Vec<&[usize]> = (0..self.len())
            .map(|v| {
                let p = self.path_of(v);
                &p[..p.len().min(keep)]
            })
            .collect();
        let mut ids: BTreeMap<&[usize], usize> = BTreeMap::new();
        for k in &keys {
            let next = ids.len();
            ids.entry(k).or_insert(next);
        }
        keys.iter().map(|k| ids[k]).collect()
    }
}

/// Builds the nested front hierarchy: level 2 clusters the whole graph, and each front of at
/// least `min_front_size` nodes is re-clustered on its induced subgraph until `max_depth`, or
/// until its child partition's modularity falls below `min_q_gain`.
pub fn hierarchical_fronts(graph: &Graph, config: HierarchyConfig) -> Result<FrontTree> {
    if config.max_depth < 2 {
        return Err(Error::InvalidParameter(format!("max_depth must be >= 2, got {}", config.max_depth)));
    }
    let top = fast_greedy(graph)?;
    let mut fronts: Vec<Front> = top
        .members()
        .into_iter()
        .enumerate()
        .map(|(i, members)| Front { path: vec![i + 1], members, split_q: None, children: Vec::new() })
        .collect();

    let mut frontier: Vec<usize> = (0..fronts.len()).collect();
    let mut level = 2;
    while level < config.max_depth && !frontier.is_empty() {
        let splits: Vec<Option<Partition>> = frontier
            .par_iter()
            .map(|&fi| {
                let members = &fronts[fi].members;
                if members.len() < config.min_front_size.max(2) {
                    return None;
                }
                let sub = graph.induced(members);
                if sub.total_weight() == 0 {
                    return None;
                }
                let p = fast_greedy(&sub).ok()?;
                (p.front_count() >= 2 && p.q() >= config.min_q_gain).then_some(p)
            })
            .collect();
        let mut next = Vec::new();
        for (&fi, split) in frontier.iter().zip(splits) {
            let Some(p) = split else { continue };
            let parent_members = fronts[fi].members.clone();
            let parent_path = fronts[fi].path.clone();
            fronts[fi].split_q = Some(p.q());
            for (ci, local) in p.members().into_iter().enumerate() {
                let mut path = parent_path.clone();
                path.push(ci + 1);
                let members = local.into_iter().map(|l| parent_members[l]).collect();
                let idx = fronts.len();
                fronts.push(Front { path, members, split_q: None, children: Vec::new() });
                fronts[fi].children.push(idx);
                next.push(idx);
            }
        }
        frontier = next;
        level += 1;
    }

    let mut leaf_of = vec![0; graph.node_count()];
    for (i, f) in fronts.iter().enumerate() {
        if f.children.is_empty() {
            for &v in &f.members {
                leaf_of[v] = i;
            }
        }
    }
    Ok(FrontTree { config, top, fronts, leaf_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Modularity straight from the definition: e_ss is the fraction of edge weight inside s,
    /// a_s the fraction of edge ends attached to s.
    fn brute_q(g: &Graph, labels: &[usize]) -> f64 {
        let m: f64 = g.edges().map(|e| e.2 as f64).sum();
        let k = labels.iter().max().unwrap() + 1;
        let mut e = vec![0.0; k];
        let mut a = vec![0.0; k];
        for (u, v, w) in g.edges() {
            if labels[u] == labels[v] {
                e[labels[u]] += w as f64 / m;
            }
            a[labels[u]] += w as f64 / (2.0 * m);
            a[labels[v]] += w as f64 / (2.0 * m);
        }
        (0..k).map(|s| e[s] - a[s] * a[s]).sum()
    }

    /// Every set partition of `0..n` as restricted-growth strings.
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for l in 0..=max + 1 {
                cur.push(l);
                rec(i + 1, n, cur, max.max(l), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            let mut cur = vec![0];
            rec(1, n, &mut cur, 0, &mut out);
        }
        out
    }

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    #[test]
    fn modularity_examples() {
        let g = two_triangles();
        assert_eq!(modularity(&g, &[0; 6]).unwrap(), 0.0);
        let tri = [0, 0, 0, 1, 1, 1];
        assert!((brute_q(&g, &tri) - 0.5).abs() < 1e-15);
        assert!((modularity(&g, &tri).unwrap() - 0.5).abs() < 1e-12);
        let split = [0, 0, 2, 1, 1, 1];
        let q = modularity(&g, &split).unwrap();
        assert!((q - brute_q(&g, &split)).abs() < 1e-12);
        assert!(q < 0.5);
        assert!(matches!(modularity(&Graph::empty(3), &[0, 0, 0]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn greedy_recovers_two_triangles() {
        let g = two_triangles();
        let p = fast_greedy(&g).unwrap();
        assert_eq!(p.labels(), &[0, 0, 0, 1, 1, 1]);
        let best = all_partitions(6).iter().map(|l| brute_q(&g, l)).fold(f64::MIN, f64::max);
        assert!((p.q() - best).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_stays_whole() {
        let g = complete(5);
        let best = all_partitions(5).iter().map(|l| brute_q(&g, l)).fold(f64::MIN, f64::max);
        assert!(best <= 1e-12);
        let p = fast_greedy(&g).unwrap();
        assert_eq!(p.front_count(), 1);
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]);
        let p = fast_greedy(&g).unwrap();
        assert_eq!(p.front_count(), 3);
        assert_eq!(p.members()[2], vec![2]);
        assert!(matches!(fast_greedy(&Graph::empty(2)), Err(Error::EmptyGraph)));
    }

    #[test]
    fn weighted_modularity_uses_weights() {
        let g = Graph::from_weighted_edges(4, [(0, 1, 5), (2, 3, 5), (1, 2, 1)]);
        let l = [0, 0, 1, 1];
        assert!((modularity(&g, &l).unwrap() - brute_q(&g, &l)).abs() < 1e-12);
        assert_eq!(fast_greedy(&g).unwrap().labels(), &l);
    }

    #[test]
    fn hierarchy_size_floor_and_depth_cap() {
        let g = two_triangles();
        let t = hierarchical_fronts(&g, HierarchyConfig { min_front_size: 4, ..Default::default() }).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.fronts().len(), 2);
        let flat = hierarchical_fronts(&g, HierarchyConfig { max_depth: 2, min_front_size: 1, min_q_gain: -1.0 }).unwrap();
        assert_eq!(flat.labels_at(2), fast_greedy(&g).unwrap().labels());
        assert_eq!(flat.depth(), 2);
        assert!(hierarchical_fronts(&g, HierarchyConfig { max_depth: 1, ..Default::default() }).is_err());
    }

    /// Two groups, each made of two dense blocks joined by many edges; the groups share one edge.
    fn nested_blocks() -> (Graph, Vec<usize>, Vec<usize>) {
        let block = 6;
        let mut edges = Vec::new();
        for b in 0..4 {
            let base = b * block;
            for i in 0..block {
                for j in i + 1..block {
                    edges.push((base + i, base + j));
                }
            }
        }
        // within each group, link block pairs with a perfect matching plus a shifted one
        for g in 0..2 {
            let (a, b) = (2 * g * block, (2 * g + 1) * block);
            for i in 0..block {
                edges.push((a + i, b + i));
                edges.push((a + i, b + (i + 1) % block));
                edges.push((a + i, b + (i + 2) % block));
            }
        }
        edges.push((0, 2 * block));
        let n = 4 * block;
        let top = (0..n).map(|v| v / (2 * block)).collect();
        let leaf = (0..n).map(|v| v / block).collect();
        (Graph::from_edges(n, edges), top, leaf)
    }

    #[test]
    fn nested_structure_gives_depth_three() {
        let (g, top, leaf) = nested_blocks();
        let cfg = HierarchyConfig { max_depth: 4, min_front_size: 7, min_q_gain: 0.05 };
        let t = hierarchical_fronts(&g, cfg).unwrap();
        assert_eq!(t.depth(), 3);
        assert_eq!(canonical_labels(&t.labels_at(2)), canonical_labels(&top));
        assert_eq!(canonical_labels(&t.labels_at(3)), canonical_labels(&leaf));
        for f in t.fronts_at(3) {
            let parent = t.fronts().iter().find(|p| p.children.iter().any(|&c| std::ptr::eq(&t.fronts()[c], f)));
            let parent = parent.expect("level-3 front has a parent");
            assert!(f.members.iter().all(|m| parent.members.contains(m)));
        }
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (2usize..=8).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                Graph::from_edges(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(p, _)| p))
            })
        })
    }

    proptest! {
        #[test]
        fn greedy_beats_trivial_partitions(g in small_graph()) {
            prop_assume!(g.edge_count() > 0);
            let p = fast_greedy(&g).unwrap();
            let n = g.node_count();
            prop_assert!(p.q() >= modularity(&g, &vec![0; n]).unwrap() - 1e-12);
            prop_assert!(p.q() >= modularity(&g, &(0..n).collect::<Vec<_>>()).unwrap() - 1e-12);
            prop_assert!((p.q() - modularity(&g, p.labels()).unwrap()).abs() < 1e-12);
            prop_assert!((p.q() - brute_q(&g, p.labels())).abs() < 1e-12);
        }

        #[test]
        fn refinement_never_lowers_modularity(
            g in small_graph(),
            seed in proptest::collection::vec(0usize..4, 8),
        ) {
            prop_assume!(g.edge_count() > 0);
            let labels = &seed[..g.node_count()];
            let before = modularity(&g, labels).unwrap();
            let p = refine_partition(&g, labels).unwrap();
            prop_assert!(p.q() >= before - 1e-12);
            prop_assert!((p.q() - brute_q(&g, p.labels())).abs() < 1e-12);
        }

        #[test]
        fn hierarchy_levels_refine(g in small_graph(), min_size in 2usize..5) {
            prop_assume!(g.edge_count() > 0);
            let t = hierarchical_fronts(&g, HierarchyConfig { max_depth: 4, min_front_size: min_size, min_q_gain: 0.0 }).unwrap();
            for level in 3..=t.depth() {
                let fine = t.labels_at(level);
                let coarse = t.labels_at(level - 1);
                let mut parent: HashMap<usize, usize> = HashMap::new();
                for v in 0..g.node_count() {
                    prop_assert_eq!(*parent.entry(fine[v]).or_insert(coarse[v]), coarse[v]);
                }
            }
            let mut covered = vec![0; g.node_count()];
            for f in t.fronts().iter().filter(|f| f.children.is_empty()) {
                for &m in &f.members {
                    covered[m] += 1;
                }
            }
            prop_assert!(covered.iter().all(|&c| c == 1));
        }
    }
}
