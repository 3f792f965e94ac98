//! Search path count (SPC) weights and the greedy main path of a citation network.
//!
//! Knowledge flows against citation direction: if `b` cites `a`, the flow edge is `a -> b`.
//! Flow sources are documents citing nothing in the corpus, flow sinks are documents nobody
//! cites. A virtual super-source feeds every source and every sink drains into a virtual
//! super-sink, so the SPC of a flow edge `u -> v` is
//! `paths(super-source, u) * paths(v, super-sink)`, counted exactly with big integers.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus::CitationNetwork;
use crate::error::{Error, Result};

/// Acyclic flow graph derived from a citation network.
#[derive(Debug, Clone)]
pub struct FlowDag {
    /// Flow edges `(from, to)`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Citation edges `(citing, cited)` dropped to make the graph acyclic.
    pub removed: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl FlowDag {
    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }
}

/// Strongly connected components with more than one node (iterative Kosaraju).
fn cyclic_components(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for &(u, v) in edges {
        fwd[u].push(v);
        rev[v].push(u);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i < fwd[u].len() {
                let v = fwd[u][*i];
                *i += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &rev[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        out.push(members);
    }
    out.into_iter().filter(|c| c.len() > 1).collect()
}

/// Removes anti-chronological citations (citing document strictly older than the cited one),
/// then breaks any remaining cycle by deleting its lexicographically largest `(citing, cited)`
/// id pair, and returns the resulting flow DAG.
pub fn acyclic_flow(net: &CitationNetwork) -> FlowDag {
    let mut warnings = Vec::new();
    let mut removed = Vec::new();
    let mut kept: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(citing, cited) in net.edges() {
        let (a, b) = (net.document(citing).year, net.document(cited).year);
        if let (Some(a), Some(b)) = (a, b) {
            if a < b {
                warnings.push(format!(
                    "removed anti-chronological citation {} ({a}) -> {} ({b})",
                    net.id(citing),
                    net.id(cited)
                ));
                removed.push((citing, cited));
                continue;
            }
        }
        kept.insert((citing, cited));
    }
    loop {
        let cycles = cyclic_components(net.len(), &kept);
        if cycles.is_empty() {
            break;
        }
        for members in cycles {
            let mut inside = vec![false; net.len()];
            for &m in &members {
                inside[m] = true;
            }
            let victim = kept
                .iter()
                .filter(|&&(u, v)| inside[u] && inside[v])
                .max_by(|&&(a, b), &&(c, d)| (net.id(a), net.id(b)).cmp(&(net.id(c), net.id(d))))
                .copied()
                .expect("a cyclic component has an internal edge");
            kept.remove(&victim);
            warnings.push(format!("broke citation cycle by removing {} -> {}", net.id(victim.0), net.id(victim.1)));
            removed.push(victim);
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut succ = vec![Vec::new(); net.len()];
    let mut pred = vec![Vec::new(); net.len()];
    let mut edges: Vec<(usize, usize)> = kept.iter().map(|&(citing, cited)| (cited, citing)).collect();
    edges.sort_unstable();
    for &(u, v) in &edges {
        succ[u].push(v);
        pred[v].push(u);
    }
    removed.sort_unstable();
    FlowDag { edges, removed, warnings, succ, pred }
}

fn topological_order(dag: &FlowDag) -> Vec<usize> {
    let n = dag.node_count();
    let mut indeg: Vec<usize> = (0..n).map(|v| dag.pred[v].len()).collect();
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in &dag.succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}

/// SPC weight of every flow edge.
#[derive(Debug, Clone)]
pub struct SearchPathCounts {
    pub dag: FlowDag,
    /// Paths from the super-source to each node.
    pub from_source: Vec<BigUint>,
    /// Paths from each node to the super-sink.
    pub to_sink: Vec<BigUint>,
}

impl SearchPathCounts {
    pub fn edge_spc(&self, from: usize, to: usize) -> BigUint {
        &self.from_source[from] * &self.to_sink[to]
    }

    /// `(from, to, spc)` for every flow edge, in edge order.
    pub fn edge_weights(&self) -> Vec<(usize, usize, BigUint)> {
        self.dag.edges.iter().map(|&(u, v)| (u, v, self.edge_spc(u, v))).collect()
    }
}

pub fn search_path_counts(net: &CitationNetwork) -> SearchPathCounts {
    let dag = acyclic_flow(net);
    let order = topological_order(&dag);
    let n = dag.node_count();
    let mut from_source = vec![BigUint::zero(); n];
    for &v in &order {
        from_source[v] = if dag.pred[v].is_empty() {
            BigUint::one()
        } else {
            dag.pred[v].iter().map(|&u| &from_source[u]).sum()
        };
    }
    let mut to_sink = vec![BigUint::zero(); n];
    for &v in order.iter().rev() {
        to_sink[v] = if dag.succ[v].is_empty() {
            BigUint::one()
        } else {
            dag.succ[v].iter().map(|&w| &to_sink[w]).sum()
        };
    }
    SearchPathCounts { dag, from_source, to_sink }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainPath {
    /// Node indices from a flow source (cites nothing) to a flow sink (uncited).
    pub nodes: Vec<usize>,
    /// SPC of each step `nodes[i] -> nodes[i + 1]`, serialized as decimal strings.
    #[serde(with = "decimal")]
    pub spc: Vec<BigUint>,
    pub warnings: Vec<String>,
}

/// Greedy main path: start on the source edge with the largest SPC, then keep following the
/// outgoing edge with the largest SPC (ties: smallest head id) until a sink is reached.
pub fn main_path(net: &CitationNetwork) -> Result<MainPath> {
    if net.is_empty() || net.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let spc = search_path_counts(net);
    let dag = &spc.dag;
    let start = dag
        .edges
        .iter()
        .filter(|&&(u, _)| dag.pred[u].is_empty())
        .map(|&(u, v)| (spc.edge_spc(u, v), u, v))
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| (net.id(b.1), net.id(b.2)).cmp(&(net.id(a.1), net.id(a.2)))))
        .expect("an acyclic graph with edges has a source edge");
    let mut nodes = vec![start.1, start.2];
    let mut weights = vec![start.0];
    let mut cur = start.2;
    while !dag.succ[cur].is_empty() {
        let (w, next) = dag.succ[cur]
            .iter()
            .map(|&v| (spc.edge_spc(cur, v), v))
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| net.id(b.1).cmp(net.id(a.1))))
            .unwrap();
        nodes.push(next);
        weights.push(w);
        cur = next;
    }
    Ok(MainPath { nodes, spc: weights, warnings: dag.warnings.clone() })
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_str_radix(10)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom(format!("bad integer `{s}`"))))
            .collect()
    }
}
