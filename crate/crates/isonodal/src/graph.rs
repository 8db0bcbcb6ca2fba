//! Finite simple graphs, pendant leaf pairs, and the edge insertion that
//! turns a pair into a cycle.
//!
//! A *k-leaf-pair* is a pair of pendant paths ("arms") of k vertices each,
//! hanging from a common root.  The exchange of the two arms is a graph
//! automorphism; inserting an edge between mirror vertices at depth j adds
//! the rank-one term gamma gamma^T to the Laplacian, where gamma is the
//! signed indicator of the two endpoints.  Everything here is exact integer
//! combinatorics stored into f64 matrices.

use crate::linalg::Matrix;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range for {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid leaf pair: {0}")]
    InvalidLeafPair(String),
    #[error("insertion depth {j} outside 1..={k}")]
    BadInsertionDepth { j: usize, k: usize },
    #[error("edge ({0}, {1}) already present")]
    EdgeExists(usize, usize),
    #[error("isomorphism test limited to {cap} vertices, got {n}")]
    TooLargeForIsomorphism { n: usize, cap: usize },
}

/// Simple undirected graph with canonical edge storage: every edge is kept
/// as (min, max) and the list is sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl DiscreteGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertex_count {
                return Err(GraphError::VertexOutOfRange(a, vertex_count));
            }
            if b >= vertex_count {
                return Err(GraphError::VertexOutOfRange(b, vertex_count));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut adj = vec![Vec::new(); vertex_count];
        for &(a, b) in &canon {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        Ok(DiscreteGraph { vertex_count, edges: canon, adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        self.components(&[]).count() == 1
    }

    /// First Betti number E - V + 1; requires a connected graph.
    pub fn betti(&self) -> Result<usize, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(self.edges.len() + 1 - self.vertex_count)
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edges.len() + 1 == self.vertex_count
    }

    /// Combinatorial Laplacian L = D - A.
    pub fn laplacian(&self) -> Matrix {
        let n = self.vertex_count;
        let mut l = Matrix::zeros(n);
        for v in 0..n {
            l.set(v, v, self.degree(v) as f64);
        }
        for &(a, b) in &self.edges {
            l.set(a, b, -1.0);
            l.set(b, a, -1.0);
        }
        l
    }

    /// Connected components after deleting `removed` edges (given in any
    /// orientation; edges not present are ignored).  Union-find with the
    /// smallest vertex id as class representative, so the partition does
    /// not depend on deletion order.
    pub fn components(&self, removed: &[(usize, usize)]) -> Partition {
        let gone: Vec<(usize, usize)> =
            removed.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            if gone.contains(&(a, b)) {
                continue;
            }
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                // keep the smaller id on top so representatives are minima
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                parent[hi] = lo;
            }
        }
        let rep: Vec<usize> = (0..self.vertex_count).map(|v| find(&mut parent, v)).collect();
        Partition { rep }
    }

    /// Grafts a fresh k-leaf-pair at `root`: arm vertices are appended as
    /// V..V+k-1 (plus arm) and V+k..V+2k-1 (minus arm).
    pub fn attach_k_leaf_pair(
        &self,
        root: usize,
        k: usize,
    ) -> Result<(DiscreteGraph, LeafPairSpec), GraphError> {
        if root >= self.vertex_count {
            return Err(GraphError::VertexOutOfRange(root, self.vertex_count));
        }
        if k == 0 {
            return Err(GraphError::InvalidLeafPair("arm length k must be positive".into()));
        }
        let v0 = self.vertex_count;
        let arm_plus: Vec<usize> = (v0..v0 + k).collect();
        let arm_minus: Vec<usize> = (v0 + k..v0 + 2 * k).collect();
        let mut edges = self.edges.clone();
        for arm in [&arm_plus, &arm_minus] {
            edges.push((root, arm[0]));
            for w in arm.windows(2) {
                edges.push((w[0], w[1]));
            }
        }
        let g = DiscreteGraph::new(v0 + 2 * k, &edges)?;
        let pair = LeafPairSpec::new(root, arm_plus, arm_minus)?;
        pair.validate(&g)?;
        Ok((g, pair))
    }

    /// All k-leaf-pairs present in the graph, ordered by (root, first arm).
    pub fn find_leaf_pairs(&self, k: usize) -> Vec<LeafPairSpec> {
        let mut pairs = Vec::new();
        if k == 0 {
            return pairs;
        }
        for root in 0..self.vertex_count {
            let mut arms: Vec<Vec<usize>> = Vec::new();
            for &start in &self.adj[root] {
                if let Some(arm) = self.pendant_arm(root, start, k) {
                    arms.push(arm);
                }
            }
            arms.sort();
            for i in 0..arms.len() {
                for j in (i + 1)..arms.len() {
                    let p = LeafPairSpec::new(root, arms[i].clone(), arms[j].clone())
                        .expect("arms are disjoint by construction");
                    debug_assert!(p.validate(self).is_ok());
                    pairs.push(p);
                }
            }
        }
        pairs
    }

    /// Walks the pendant path root -> start; Some(arm) iff it is exactly k
    /// vertices long, all interior degrees 2, ending in a leaf.
    fn pendant_arm(&self, root: usize, start: usize, k: usize) -> Option<Vec<usize>> {
        let mut arm = Vec::with_capacity(k);
        let mut prev = root;
        let mut cur = start;
        for depth in 0..k {
            let is_last = depth + 1 == k;
            if is_last {
                if self.degree(cur) != 1 {
                    return None;
                }
            } else {
                if self.degree(cur) != 2 {
                    return None;
                }
            }
            arm.push(cur);
            if !is_last {
                let next = *self.adj[cur].iter().find(|&&x| x != prev)?;
                if next == root {
                    return None;
                }
                prev = cur;
                cur = next;
            }
        }
        Some(arm)
    }
}

/// Vertex partition; `rep[v]` is the smallest vertex id in v's class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub rep: Vec<usize>,
}

impl Partition {
    pub fn count(&self) -> usize {
        let mut reps: Vec<usize> = self.rep.clone();
        reps.sort_unstable();
        reps.dedup();
        reps.len()
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.rep[a] == self.rep[b]
    }
}

/// Two pendant arms of equal length hanging from a common root.  Arm
/// vertices are listed from the root outward, so `arm_plus[j-1]` is the
/// vertex at depth j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafPairSpec {
    pub root: usize,
    pub arm_plus: Vec<usize>,
    pub arm_minus: Vec<usize>,
}

impl LeafPairSpec {
    pub fn new(
        root: usize,
        arm_plus: Vec<usize>,
        arm_minus: Vec<usize>,
    ) -> Result<Self, GraphError> {
        if arm_plus.is_empty() || arm_plus.len() != arm_minus.len() {
            return Err(GraphError::InvalidLeafPair(
                "arms must be nonempty and of equal length".into(),
            ));
        }
        let mut seen = vec![root];
        for &v in arm_plus.iter().chain(&arm_minus) {
            if seen.contains(&v) {
                return Err(GraphError::InvalidLeafPair(format!(
                    "vertex {v} appears twice in the pair"
                )));
            }
            seen.push(v);
        }
        Ok(LeafPairSpec { root, arm_plus, arm_minus })
    }

    pub fn k(&self) -> usize {
        self.arm_plus.len()
    }

    /// Checks the pair against a concrete graph: chain adjacency, interior
    /// degrees 2, leaf ends degree 1.
    pub fn validate(&self, g: &DiscreteGraph) -> Result<(), GraphError> {
        let k = self.k();
        for &v in [self.root].iter().chain(&self.arm_plus).chain(&self.arm_minus) {
            if v >= g.vertex_count() {
                return Err(GraphError::VertexOutOfRange(v, g.vertex_count()));
            }
        }
        for arm in [&self.arm_plus, &self.arm_minus] {
            if !g.has_edge(self.root, arm[0]) {
                return Err(GraphError::InvalidLeafPair(format!(
                    "arm does not start at an edge of the root: ({}, {})",
                    self.root, arm[0]
                )));
            }
            for w in arm.windows(2) {
                if !g.has_edge(w[0], w[1]) {
                    return Err(GraphError::InvalidLeafPair(format!(
                        "arm chain edge ({}, {}) missing",
                        w[0], w[1]
                    )));
                }
            }
            for (depth, &v) in arm.iter().enumerate() {
                let want = if depth + 1 == k { 1 } else { 2 };
                if g.degree(v) != want {
                    return Err(GraphError::InvalidLeafPair(format!(
                        "arm vertex {v} has degree {}, expected {want}",
                        g.degree(v)
                    )));
                }
            }
        }
        Ok(())
    }

    /// The arm-exchange permutation as a vertex map of length `n`.
    pub fn vertex_swap(&self, n: usize) -> Vec<usize> {
        let mut pi: Vec<usize> = (0..n).collect();
        for (&p, &m) in self.arm_plus.iter().zip(&self.arm_minus) {
            pi[p] = m;
            pi[m] = p;
        }
        pi
    }

    /// Signed indicator of the depth-j mirror vertices: +1 on the plus arm,
    /// -1 on the minus arm.  The inserted edge adds gamma gamma^T to L.
    pub fn gamma(&self, n: usize, j: usize) -> Result<Vec<f64>, GraphError> {
        if j == 0 || j > self.k() {
            return Err(GraphError::BadInsertionDepth { j, k: self.k() });
        }
        let mut g = vec![0.0; n];
        g[self.arm_plus[j - 1]] = 1.0;
        g[self.arm_minus[j - 1]] = -1.0;
        Ok(g)
    }
}

/// Adds the edge between the depth-j vertices of the two arms.
pub fn insert_pair_edge(
    g: &DiscreteGraph,
    pair: &LeafPairSpec,
    j: usize,
) -> Result<DiscreteGraph, GraphError> {
    pair.validate(g)?;
    if j == 0 || j > pair.k() {
        return Err(GraphError::BadInsertionDepth { j, k: pair.k() });
    }
    let a = pair.arm_plus[j - 1];
    let b = pair.arm_minus[j - 1];
    if g.has_edge(a, b) {
        return Err(GraphError::EdgeExists(a, b));
    }
    let mut edges = g.edges.clone();
    edges.push((a, b));
    DiscreteGraph::new(g.vertex_count, &edges)
}

const ISO_CAP: usize = 12;

/// Exact isomorphism test by color refinement plus backtracking.  Desk
/// scale only; errors out above 12 vertices.
pub fn is_isomorphic(g1: &DiscreteGraph, g2: &DiscreteGraph) -> Result<bool, GraphError> {
    let n = g1.vertex_count();
    if n > ISO_CAP || g2.vertex_count() > ISO_CAP {
        return Err(GraphError::TooLargeForIsomorphism {
            n: n.max(g2.vertex_count()),
            cap: ISO_CAP,
        });
    }
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(false);
    }
    let (c1, c2) = match joint_refine(g1, g2) {
        Some(c) => c,
        None => return Ok(false),
    };
    // map vertices in order of ascending candidate-set size
    let mut order: Vec<usize> = (0..n).collect();
    let class_size = |c: usize| c2.iter().filter(|&&x| x == c).count();
    order.sort_by_key(|&v| (class_size(c1[v]), v));
    let mut image: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    let ok = extend(g1, g2, &c1, &c2, &order, 0, &mut image, &mut used);
    Ok(ok)
}

/// Color refinement run jointly so both graphs share one color dictionary.
/// None when the color histograms separate the graphs.
fn joint_refine(g1: &DiscreteGraph, g2: &DiscreteGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = g1.vertex_count();
    let mut c1: Vec<usize> = (0..n).map(|v| g1.degree(v)).collect();
    let mut c2: Vec<usize> = (0..n).map(|v| g2.degree(v)).collect();
    for _ in 0..n {
        let mut dict: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next = |key: (usize, Vec<usize>), dict: &mut BTreeMap<_, usize>| {
            let id = dict.len();
            *dict.entry(key).or_insert(id)
        };
        let sig = |g: &DiscreteGraph, c: &[usize], v: usize| {
            let mut ns: Vec<usize> = g.neighbors(v).iter().map(|&u| c[u]).collect();
            ns.sort_unstable();
            (c[v], ns)
        };
        let n1: Vec<usize> = (0..n).map(|v| next(sig(g1, &c1, v), &mut dict)).collect();
        let n2: Vec<usize> = (0..n).map(|v| next(sig(g2, &c2, v), &mut dict)).collect();
        let mut h1 = n1.clone();
        let mut h2 = n2.clone();
        h1.sort_unstable();
        h2.sort_unstable();
        if h1 != h2 {
            return None;
        }
        let stable = n1 == c1 && n2 == c2;
        c1 = n1;
        c2 = n2;
        if stable {
            break;
        }
    }
    Some((c1, c2))
}

fn extend(
    g1: &DiscreteGraph,
    g2: &DiscreteGraph,
    c1: &[usize],
    c2: &[usize],
    order: &[usize],
    pos: usize,
    image: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
) -> bool {
    if pos == order.len() {
        return true;
    }
    let v = order[pos];
    for w in 0..g2.vertex_count() {
        if used[w] || c2[w] != c1[v] {
            continue;
        }
        let consistent = order[..pos].iter().all(|&u| {
            let iu = image[u].unwrap();
            g1.has_edge(v, u) == g2.has_edge(w, iu)
        });
        if !consistent {
            continue;
        }
        image[v] = Some(w);
        used[w] = true;
        if extend(g1, g2, c1, c2, order, pos + 1, image, used) {
            return true;
        }
        image[v] = None;
        used[w] = false;
    }
    false
}
