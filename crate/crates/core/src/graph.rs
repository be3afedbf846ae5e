//! Erdős–Rényi generation and the structural queries the harness and the
//! verifier need (edge lookups, exact diameter).

use crate::rng::{RandomSource, StreamDomain};
use rand::Rng;
use thiserror::Error;

pub type NodeId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node count must be at least 1")]
    EmptyGraph,
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
}

/// Immutable undirected simple graph. Adjacency is kept twice: sorted
/// neighbor lists for iteration and a packed bitmatrix for O(1) membership
/// tests (the middle phases test "is the predecessor of w my neighbor?" a
/// few hundred million times per large run).
#[derive(Clone, Debug)]
pub struct Graph {
    n: u32,
    adj: Vec<Vec<NodeId>>,
    bits: Vec<u64>,
    words_per_row: usize,
    m: u64,
}

impl Graph {
    pub fn new(n: u32) -> Self {
        let words_per_row = (n as usize).div_ceil(64);
        Graph {
            n,
            adj: vec![Vec::new(); n as usize],
            bits: vec![0; words_per_row * n as usize],
            words_per_row,
            m: 0,
        }
    }

    pub fn from_edges(n: u32, edges: &[(NodeId, NodeId)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g.finish();
        g
    }

    fn add_edge(&mut self, u: NodeId, v: NodeId) {
        assert!(u < self.n && v < self.n && u != v, "bad edge ({u},{v})");
        if self.has_edge(u, v) {
            return;
        }
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
        self.bits[u as usize * self.words_per_row + v as usize / 64] |= 1 << (v % 64);
        self.bits[v as usize * self.words_per_row + u as usize / 64] |= 1 << (u % 64);
        self.m += 1;
    }

    fn finish(&mut self) {
        for l in &mut self.adj {
            l.sort_unstable();
        }
    }

    pub fn node_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: NodeId) -> u32 {
        self.adj[u as usize].len() as u32
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.bits[u as usize * self.words_per_row + v as usize / 64] & (1 << (v % 64)) != 0
    }

    fn adj_row(&self, u: NodeId) -> &[u64] {
        let s = u as usize * self.words_per_row;
        &self.bits[s..s + self.words_per_row]
    }

    /// Full symmetry/irreflexivity/no-duplicate scan, used by generator tests.
    pub fn check_invariants(&self) -> bool {
        for u in 0..self.n {
            let l = &self.adj[u as usize];
            if l.windows(2).any(|w| w[0] >= w[1]) {
                return false; // unsorted or duplicate
            }
            for &v in l {
                if v == u || !self.has_edge(v, u) {
                    return false;
                }
            }
        }
        true
    }
}

/// Samples G(n, p): each unordered pair {i, j} is included independently with
/// probability `p`, drawn from the source's edge stream.
pub fn gen_gnp(n: u32, p: f64, src: &RandomSource) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = src.stream(StreamDomain::Edges, 0);
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    g.finish();
    Ok(g)
}

/// The edge-probability regime of the main claim: (log2 n)^{3/2} / sqrt(n),
/// capped at 1. Base-2 logarithm throughout.
pub fn p_formula(n: u32) -> f64 {
    assert!(n >= 2, "p_formula needs n >= 2");
    let ln = (n as f64).log2();
    (ln.powf(1.5) / (n as f64).sqrt()).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diameter {
    Finite(u32),
    Disconnected,
}

/// Exact diameter via a bitset BFS from every node. Intended for desk-scale
/// acceptance checks, not large graphs.
pub fn empirical_diameter(g: &Graph) -> Diameter {
    let n = g.node_count();
    if n == 1 {
        return Diameter::Finite(0);
    }
    let words = (n as usize).div_ceil(64);
    let mut reached = vec![0u64; words];
    let mut frontier: Vec<NodeId> = Vec::with_capacity(n as usize);
    let mut next: Vec<NodeId> = Vec::with_capacity(n as usize);
    let mut diam = 0u32;
    for s in 0..n {
        reached.iter_mut().for_each(|w| *w = 0);
        reached[s as usize / 64] |= 1 << (s % 64);
        frontier.clear();
        frontier.push(s);
        let mut seen = 1u32;
        let mut depth = 0u32;
        while !frontier.is_empty() {
            next.clear();
            for &u in &frontier {
                for w in 0..words {
                    let fresh = g.adj_row(u)[w] & !reached[w];
                    if fresh == 0 {
                        continue;
                    }
                    reached[w] |= fresh;
                    let mut bitset = fresh;
                    while bitset != 0 {
                        let b = bitset.trailing_zeros();
                        next.push((w * 64) as u32 + b);
                        bitset &= bitset - 1;
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            depth += 1;
            seen += next.len() as u32;
            std::mem::swap(&mut frontier, &mut next);
        }
        if seen != n {
            return Diameter::Disconnected;
        }
        diam = diam.max(depth);
    }
    Diameter::Finite(diam)
}

/// BFS reach from one source; `(reached_count, eccentricity)`. Used by the
/// run pre-check so a disconnected sample is diagnosed without the full
/// all-pairs scan.
pub fn bfs_reach(g: &Graph, s: NodeId) -> (u32, u32) {
    let n = g.node_count();
    let mut dist = vec![u32::MAX; n as usize];
    dist[s as usize] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(s);
    let mut seen = 1u32;
    let mut ecc = 0u32;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                ecc = ecc.max(dist[v as usize]);
                seen += 1;
                queue.push_back(v);
            }
        }
    }
    (seen, ecc)
}

/// K_n on ids 0..n-1.
pub fn complete_graph(n: u32) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Path 0 - 1 - ... - (n-1).
pub fn path_graph(n: u32) -> Graph {
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &edges)
}

/// The Petersen graph: outer 5-cycle 0..4, spokes, inner pentagram 5..9.
/// 3-regular, connected, and famously non-Hamiltonian.
pub fn petersen_graph() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_has_no_edges() {
        let g = gen_gnp(1, 0.9, &RandomSource::new(3)).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn p_one_gives_complete_graph() {
        let g = gen_gnp(3, 1.0, &RandomSource::new(5)).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(0, 2));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(
            gen_gnp(0, 0.5, &RandomSource::new(1)).unwrap_err(),
            GraphError::EmptyGraph
        );
        assert_eq!(
            gen_gnp(4, 1.5, &RandomSource::new(1)).unwrap_err(),
            GraphError::BadProbability(1.5)
        );
        assert_eq!(
            gen_gnp(4, -0.1, &RandomSource::new(1)).unwrap_err(),
            GraphError::BadProbability(-0.1)
        );
    }

    #[test]
    fn edge_count_tracks_binomial_mean() {
        // C(1000, 2) * 0.5 = 249750, sigma = sqrt(C * 0.25) ~ 353.4
        let g = gen_gnp(1000, 0.5, &RandomSource::new(11)).unwrap();
        let mean = 249_750f64;
        let dev = (g.edge_count() as f64 - mean).abs();
        assert!(dev <= 3.0 * 353.4, "edge count {} too far off", g.edge_count());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_gnp(200, 0.13, &RandomSource::new(99)).unwrap();
        let b = gen_gnp(200, 0.13, &RandomSource::new(99)).unwrap();
        for u in 0..200 {
            assert_eq!(a.neighbors(u), b.neighbors(u));
        }
    }

    #[test]
    fn generated_graphs_hold_invariants() {
        for seed in 0..8 {
            let g = gen_gnp(150, 0.07, &RandomSource::new(seed)).unwrap();
            assert!(g.check_invariants());
        }
    }

    #[test]
    fn mean_edge_count_over_seeds_within_one_percent() {
        let n = 500u32;
        let p = 0.1;
        let expect = 0.5 * n as f64 * (n - 1) as f64 * p;
        let mut total = 0u64;
        let trials = 200u64;
        for seed in 0..trials {
            total += gen_gnp(n, p, &RandomSource::new(seed)).unwrap().edge_count();
        }
        let mean = total as f64 / trials as f64;
        assert!(
            (mean - expect).abs() / expect < 0.01,
            "mean {mean} vs expected {expect}"
        );
    }

    #[test]
    fn p_formula_values() {
        assert!((p_formula(1024) - 31.622776601683793 / 32.0).abs() < 1e-12);
        assert_eq!(p_formula(4), 1.0);
        assert!((p_formula(65536) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(empirical_diameter(&complete_graph(3)), Diameter::Finite(1));
        assert_eq!(empirical_diameter(&path_graph(3)), Diameter::Finite(2));
        let mut g = Graph::new(4);
        g.add_edge(0, 1);
        g.finish();
        assert_eq!(empirical_diameter(&g), Diameter::Disconnected);
    }

    #[test]
    fn petersen_shape() {
        let g = petersen_graph();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 15);
        assert!((0..10).all(|v| g.degree(v) == 3));
    }
}
