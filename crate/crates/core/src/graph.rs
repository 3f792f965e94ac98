//! Undirected simple graph with integer edge weights.
//!
//! Nodes are dense indices `0..n`. Adjacency lists are kept sorted by neighbor index so
//! every traversal is deterministic. Unweighted projections store weight 1 on each edge.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<(usize, u64)>>,
    edge_count: usize,
    total_weight: u64,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edge_count: 0, total_weight: 0 }
    }

    /// Builds a simple graph; repeated pairs and self-loops are dropped, every edge gets weight 1.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeMap::new();
        for (u, v) in edges {
            if u != v {
                set.insert((u.min(v), u.max(v)), 1u64);
            }
        }
        Self::from_map(n, set)
    }

    /// Builds a weighted graph; weights of repeated pairs are summed, zero weights and
    /// self-loops are dropped.
    pub fn from_weighted_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            if u != v && w > 0 {
                *map.entry((u.min(v), u.max(v))).or_insert(0) += w;
            }
        }
        Self::from_map(n, map)
    }

    fn from_map(n: usize, map: BTreeMap<(usize, usize), u64>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut total_weight = 0;
        for (&(u, v), &w) in &map {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            adj[u].push((v, w));
            adj[v].push((u, w));
            total_weight += w;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { adj, edge_count: map.len(), total_weight }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sum of edge weights (equals the edge count for unweighted graphs).
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, u64)] {
        &self.adj[node]
    }

    pub fn neighbor_ids(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[node].iter().map(|&(v, _)| v)
    }

    /// Number of distinct neighbors.
    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, node: usize) -> u64 {
        self.adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        let list = &self.adj[u];
        list.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| list[i].1)
    }

    /// Each edge once, as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| u < v).map(move |&(v, w)| (u, v, w)))
    }

    /// Subgraph induced by `nodes`; node `i` of the result is `nodes[i]` of `self`.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let edges = nodes.iter().enumerate().flat_map(|(i, &u)| {
            let local = &local;
            self.adj[u]
                .iter()
                .filter(move |&&(v, _)| local[v] != usize::MAX && i < local[v])
                .map(move |&(v, w)| (i, local[v], w))
        });
        Graph::from_weighted_edges(nodes.len(), edges.collect::<Vec<_>>())
    }

    /// Disjoint union of `self` with itself.
    pub fn duplicated(&self) -> Graph {
        let n = self.node_count();
        let edges: Vec<_> = self.edges().chain(self.edges().map(|(u, v, w)| (u + n, v + n, w))).collect();
        Graph::from_weighted_edges(2 * n, edges)
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for v in self.neighbor_ids(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_projection_drops_duplicates_and_loops() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (2, 2), (1, 2)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.weight(0, 1), Some(1));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn weighted_edges_accumulate() {
        let g = Graph::from_weighted_edges(3, [(0, 1, 2), (1, 0, 3), (1, 2, 0)]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(1, 0), Some(5));
        assert_eq!(g.total_weight(), 5);
        assert_eq!(g.strength(0), 5);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        let sub = g.induced(&[1, 2, 3]);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(0, 1, 1), (1, 2, 1)]);
    }

    #[test]
    fn components_are_ordered() {
        let g = Graph::from_edges(5, [(3, 4), (0, 2)]);
        assert_eq!(g.components(), vec![vec![0, 2], vec![1], vec![3, 4]]);
    }
}
