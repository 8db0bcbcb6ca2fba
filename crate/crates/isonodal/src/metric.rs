//! Metric graphs: finite connected multigraphs whose edges carry positive
//! lengths, each edge identified with the interval [0, l_e] measured from
//! its first endpoint.
//!
//! Two constructions matter downstream.  A *dummy vertex* splits an edge at
//! an interior point into two edges meeting at a new degree-2 vertex; with
//! Neumann vertex conditions this changes nothing spectrally, which makes
//! it a useful consistency probe.  *Gluing* takes an l-leaf pair — two
//! pendant edges of equal length l hanging off one root — and identifies
//! the points at distance l1 from the root on both edges into a single new
//! degree-4 vertex.  The result keeps the total length, gains one
//! independent cycle, and retains the exchange symmetry of the pair as a
//! bond involution, so eigenfunctions still split into even and odd parts.

use thiserror::Error;

/// Relative slack when comparing edge lengths that should be equal.
pub const LENGTH_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("vertex {0} out of range for {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("edge {0} out of range for {1} edges")]
    EdgeOutOfRange(usize, usize),
    #[error("edge lengths must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("self-loops are not supported")]
    SelfLoop,
    #[error("graph has no edges")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid leaf pair: {0}")]
    InvalidLeafPair(String),
    #[error("pair index {0} out of range for {1} pairs")]
    PairOutOfRange(usize, usize),
    #[error("split position {x} outside the open interval (0, {len})")]
    BadSplitPosition { x: f64, len: f64 },
}

/// One edge of a metric graph.  The orientation u -> v is a coordinate
/// convention (x = 0 at u), not a direction of travel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricEdge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

impl MetricEdge {
    pub fn new(u: usize, v: usize, length: f64) -> Self {
        MetricEdge { u, v, length }
    }

    /// The endpoint other than `w`.
    pub fn opposite(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Two pendant edges of equal length sharing a root vertex.  Exchanging
/// them is an isometry of the metric graph, and everything the gluing
/// construction does happens along these two edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricLeafPairSpec {
    pub root: usize,
    pub edge_plus: usize,
    pub edge_minus: usize,
}

impl MetricLeafPairSpec {
    pub fn new(root: usize, edge_plus: usize, edge_minus: usize) -> Self {
        MetricLeafPairSpec { root, edge_plus, edge_minus }
    }
}

/// Connected multigraph with positive edge lengths and the leaf pairs
/// declared on it.  Parallel edges are allowed (gluing creates them);
/// self-loops are not.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<MetricEdge>,
    leaf_pairs: Vec<MetricLeafPairSpec>,
}

/// Everything the gluing produces beyond the graph itself: the new joint
/// vertex, the images of the pair's edges, and the exchange symmetry of
/// the output expressed on vertices and directed bonds.
#[derive(Clone, Debug)]
pub struct GlueOutcome {
    pub graph: MetricGraph,
    /// the new degree-4 vertex
    pub joint: usize,
    pub root: usize,
    /// leaf ends of the two pendant tails (the original leaf vertices)
    pub leaf_plus: usize,
    pub leaf_minus: usize,
    /// parallel root-joint edges of length l1, images of the pair edges
    pub head_plus: usize,
    pub head_minus: usize,
    /// pendant joint-leaf edges of length l - l1
    pub tail_plus: usize,
    pub tail_minus: usize,
    /// involution on vertices exchanging the two sides
    pub vertex_swap: Vec<usize>,
    /// involution on directed bonds exchanging the two sides
    pub bond_swap: Vec<usize>,
}

impl MetricGraph {
    pub fn new(
        vertex_count: usize,
        edges: &[MetricEdge],
        leaf_pairs: &[MetricLeafPairSpec],
    ) -> Result<Self, MetricError> {
        if edges.is_empty() {
            return Err(MetricError::Empty);
        }
        for e in edges {
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(MetricError::BadLength(e.length));
            }
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(MetricError::VertexOutOfRange(e.u.max(e.v), vertex_count));
            }
            if e.u == e.v {
                return Err(MetricError::SelfLoop);
            }
        }
        let g = MetricGraph {
            vertex_count,
            edges: edges.to_vec(),
            leaf_pairs: leaf_pairs.to_vec(),
        };
        if !g.is_connected() {
            return Err(MetricError::Disconnected);
        }
        for pair in leaf_pairs {
            g.validate_pair(pair)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[MetricEdge] {
        &self.edges
    }

    pub fn leaf_pairs(&self) -> &[MetricLeafPairSpec] {
        &self.leaf_pairs
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Degree counting parallel edges with multiplicity.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    /// Edge ids incident to `v` (a parallel pair appears twice, once per id).
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].u == v || self.edges[e].v == v).collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for w in [e.u, e.v] {
                    if (e.u == v || e.v == v) && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// First Betti number E - V + 1 of the underlying multigraph.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    pub fn is_metric_tree(&self) -> bool {
        self.betti() == 0
    }

    fn validate_pair(&self, pair: &MetricLeafPairSpec) -> Result<(), MetricError> {
        let ne = self.edges.len();
        for id in [pair.edge_plus, pair.edge_minus] {
            if id >= ne {
                return Err(MetricError::EdgeOutOfRange(id, ne));
            }
        }
        if pair.edge_plus == pair.edge_minus {
            return Err(MetricError::InvalidLeafPair("the two leaf edges coincide".into()));
        }
        let ep = &self.edges[pair.edge_plus];
        let em = &self.edges[pair.edge_minus];
        for (id, e) in [(pair.edge_plus, ep), (pair.edge_minus, em)] {
            if e.u != pair.root && e.v != pair.root {
                return Err(MetricError::InvalidLeafPair(format!(
                    "edge {id} does not touch root {}",
                    pair.root
                )));
            }
            let leaf = e.opposite(pair.root);
            if self.degree(leaf) != 1 {
                return Err(MetricError::InvalidLeafPair(format!(
                    "vertex {leaf} at the far end of edge {id} is not pendant"
                )));
            }
        }
        let scale = ep.length.max(em.length);
        if (ep.length - em.length).abs() > LENGTH_TOL * scale {
            return Err(MetricError::InvalidLeafPair(format!(
                "leaf lengths differ: {} vs {}",
                ep.length, em.length
            )));
        }
        Ok(())
    }

    /// Involution on vertices exchanging the two leaf ends of `pair`.
    pub fn pair_vertex_swap(&self, pair: &MetricLeafPairSpec) -> Result<Vec<usize>, MetricError> {
        self.validate_pair(pair)?;
        let lp = self.edges[pair.edge_plus].opposite(pair.root);
        let lm = self.edges[pair.edge_minus].opposite(pair.root);
        let mut pi: Vec<usize> = (0..self.vertex_count).collect();
        pi[lp] = lm;
        pi[lm] = lp;
        Ok(pi)
    }

    /// Involution on directed bonds exchanging the two leaf edges of `pair`
    /// so that distance from the root is preserved.  Bond 2e runs u -> v of
    /// edge e, bond 2e+1 runs v -> u.
    pub fn pair_bond_swap(&self, pair: &MetricLeafPairSpec) -> Result<Vec<usize>, MetricError> {
        self.validate_pair(pair)?;
        let mut pi: Vec<usize> = (0..2 * self.edges.len()).collect();
        // bond leaving the root along each edge
        let outward = |id: usize| -> usize {
            if self.edges[id].u == pair.root {
                2 * id
            } else {
                2 * id + 1
            }
        };
        let (bp, bm) = (outward(pair.edge_plus), outward(pair.edge_minus));
        pi[bp] = bm;
        pi[bm] = bp;
        pi[bp ^ 1] = bm ^ 1;
        pi[bm ^ 1] = bp ^ 1;
        Ok(pi)
    }

    /// Splits edge `id` at distance `x` from its first endpoint, adding a
    /// degree-2 vertex.  With Neumann conditions the new vertex imposes
    /// nothing (continuity and matched derivatives already hold at an
    /// interior point), so the spectrum is unchanged — which tests exploit.
    /// Edge `id` keeps its id for the first half; the second half is
    /// appended with the largest id.  A leaf pair using edge `id` is
    /// dropped, since its leaf edge is no longer a single edge.
    pub fn add_dummy_vertex(&self, id: usize, x: f64) -> Result<(MetricGraph, usize), MetricError> {
        let ne = self.edges.len();
        if id >= ne {
            return Err(MetricError::EdgeOutOfRange(id, ne));
        }
        let e = self.edges[id];
        if !(x > 0.0 && x < e.length) {
            return Err(MetricError::BadSplitPosition { x, len: e.length });
        }
        let w = self.vertex_count;
        let mut edges = self.edges.clone();
        edges[id] = MetricEdge::new(e.u, w, x);
        edges.push(MetricEdge::new(w, e.v, e.length - x));
        let pairs: Vec<MetricLeafPairSpec> = self
            .leaf_pairs
            .iter()
            .filter(|p| p.edge_plus != id && p.edge_minus != id)
            .cloned()
            .collect();
        let g = MetricGraph::new(self.vertex_count + 1, &edges, &pairs)?;
        Ok((g, w))
    }

    /// Glues the leaf pair at index `pair_index` at distance `l1` from the
    /// root: the points at arclength l1 on the two leaf edges become one
    /// new vertex of degree 4.  The pair's edges are removed; surviving
    /// edges keep their relative order (ids compacted), then four new edges
    /// are appended: two parallel root-joint edges of length l1 (images of
    /// the plus and minus edges, in that order) and two pendant joint-leaf
    /// edges of length l - l1.  Total length is conserved and the Betti
    /// number rises by one.  Other leaf pairs survive with remapped ids.
    pub fn glue_leaf_pair(&self, pair_index: usize, l1: f64) -> Result<GlueOutcome, MetricError> {
        let Some(pair) = self.leaf_pairs.get(pair_index) else {
            return Err(MetricError::PairOutOfRange(pair_index, self.leaf_pairs.len()));
        };
        self.validate_pair(pair)?;
        let l = self.edges[pair.edge_plus].length;
        if !(l1 > 0.0 && l1 < l) {
            return Err(MetricError::BadSplitPosition { x: l1, len: l });
        }
        let leaf_plus = self.edges[pair.edge_plus].opposite(pair.root);
        let leaf_minus = self.edges[pair.edge_minus].opposite(pair.root);
        let joint = self.vertex_count;

        let mut edges = Vec::with_capacity(self.edges.len() + 2);
        let mut remap = vec![usize::MAX; self.edges.len()];
        for (id, e) in self.edges.iter().enumerate() {
            if id == pair.edge_plus || id == pair.edge_minus {
                continue;
            }
            remap[id] = edges.len();
            edges.push(*e);
        }
        let head_plus = edges.len();
        edges.push(MetricEdge::new(pair.root, joint, l1));
        let head_minus = edges.len();
        edges.push(MetricEdge::new(pair.root, joint, l1));
        let tail_plus = edges.len();
        edges.push(MetricEdge::new(joint, leaf_plus, l - l1));
        let tail_minus = edges.len();
        edges.push(MetricEdge::new(joint, leaf_minus, l - l1));

        let pairs: Vec<MetricLeafPairSpec> = self
            .leaf_pairs
            .iter()
            .enumerate()
            .filter(|(i, p)| {
                *i != pair_index
                    && remap[p.edge_plus] != usize::MAX
                    && remap[p.edge_minus] != usize::MAX
            })
            .map(|(_, p)| MetricLeafPairSpec {
                root: p.root,
                edge_plus: remap[p.edge_plus],
                edge_minus: remap[p.edge_minus],
            })
            .collect();

        let graph = MetricGraph::new(self.vertex_count + 1, &edges, &pairs)?;

        let mut vertex_swap: Vec<usize> = (0..graph.vertex_count).collect();
        vertex_swap[leaf_plus] = leaf_minus;
        vertex_swap[leaf_minus] = leaf_plus;

        let mut bond_swap: Vec<usize> = (0..2 * graph.edges.len()).collect();
        // all four new edges are stored pointing away from the root side
        // (root -> joint, joint -> leaf), so orientations already align
        for (a, b) in [(head_plus, head_minus), (tail_plus, tail_minus)] {
            bond_swap[2 * a] = 2 * b;
            bond_swap[2 * b] = 2 * a;
            bond_swap[2 * a + 1] = 2 * b + 1;
            bond_swap[2 * b + 1] = 2 * a + 1;
        }

        Ok(GlueOutcome {
            graph,
            joint,
            root: pair.root,
            leaf_plus,
            leaf_minus,
            head_plus,
            head_minus,
            tail_plus,
            tail_minus,
            vertex_swap,
            bond_swap,
        })
    }
}

/// Attaches a uniform length to every edge of a discrete graph's edge list.
pub fn build_metric(
    vertex_count: usize,
    edges: &[(usize, usize)],
    lengths: &[f64],
    leaf_pairs: &[MetricLeafPairSpec],
) -> Result<MetricGraph, MetricError> {
    if edges.len() != lengths.len() {
        return Err(MetricError::InvalidLeafPair(format!(
            "{} lengths for {} edges",
            lengths.len(),
            edges.len()
        )));
    }
    let metric: Vec<MetricEdge> =
        edges.iter().zip(lengths).map(|(&(u, v), &l)| MetricEdge::new(u, v, l)).collect();
    MetricGraph::new(vertex_count, &metric, leaf_pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// root 0 with two unit leaves (1, 2) and a spine edge to 3
    fn starlet() -> MetricGraph {
        build_metric(
            4,
            &[(0, 1), (0, 2), (0, 3)],
            &[1.0, 1.0, 1.3],
            &[MetricLeafPairSpec::new(0, 0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = [MetricEdge::new(0, 1, 0.0)];
        assert!(matches!(MetricGraph::new(2, &e, &[]), Err(MetricError::BadLength(_))));
        let e = [MetricEdge::new(0, 0, 1.0)];
        assert!(matches!(MetricGraph::new(1, &e, &[]), Err(MetricError::SelfLoop)));
        let e = [MetricEdge::new(0, 1, 1.0)];
        assert!(matches!(MetricGraph::new(3, &e, &[]), Err(MetricError::Disconnected)));
        assert!(matches!(MetricGraph::new(2, &[], &[]), Err(MetricError::Empty)));
        // unequal leaf lengths
        let bad = build_metric(
            4,
            &[(0, 1), (0, 2), (0, 3)],
            &[1.0, 0.9, 1.0],
            &[MetricLeafPairSpec::new(0, 0, 1)],
        );
        assert!(matches!(bad, Err(MetricError::InvalidLeafPair(_))));
        // far end not pendant
        let bad = build_metric(
            3,
            &[(0, 1), (0, 2), (1, 2)],
            &[1.0, 1.0, 1.0],
            &[MetricLeafPairSpec::new(0, 0, 1)],
        );
        assert!(matches!(bad, Err(MetricError::InvalidLeafPair(_))));
    }

    #[test]
    fn degrees_count_parallel_edges() {
        let g = build_metric(2, &[(0, 1), (0, 1)], &[1.0, 2.0], &[]).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.betti(), 1);
        assert!((g.total_length() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dummy_vertex_splits_in_place() {
        let g = build_metric(2, &[(0, 1)], &[1.0], &[]).unwrap();
        let (h, w) = g.add_dummy_vertex(0, 0.3).unwrap();
        assert_eq!(w, 2);
        assert_eq!(h.degree(w), 2);
        assert_eq!(h.edges()[0], MetricEdge::new(0, 2, 0.3));
        assert_eq!(h.edges()[1], MetricEdge::new(2, 1, 0.7));
        assert!((h.total_length() - g.total_length()).abs() < 1e-15);
        assert!(g.add_dummy_vertex(0, 0.0).is_err());
        assert!(g.add_dummy_vertex(0, 1.0).is_err());
        assert!(g.add_dummy_vertex(5, 0.5).is_err());
    }

    #[test]
    fn glue_builds_degree_four_joint() {
        let g = starlet();
        let out = g.glue_leaf_pair(0, 0.4142).unwrap();
        let h = &out.graph;
        assert_eq!(h.vertex_count(), 5);
        assert_eq!(out.joint, 4);
        assert_eq!(h.degree(out.joint), 4);
        assert_eq!(h.betti(), g.betti() + 1);
        assert!((h.total_length() - g.total_length()).abs() < 1e-12);
        // surviving spine edge compacted to id 0
        assert_eq!(h.edges()[0], MetricEdge::new(0, 3, 1.3));
        assert!((h.edges()[out.head_plus].length - 0.4142).abs() < 1e-15);
        assert!((h.edges()[out.tail_plus].length - 0.5858).abs() < 1e-12);
        assert_eq!(out.leaf_plus, 1);
        assert_eq!(out.leaf_minus, 2);
        // the swap exchanges the two sides and fixes everything else
        assert_eq!(out.vertex_swap, vec![0, 2, 1, 3, 4]);
        let bs = &out.bond_swap;
        assert_eq!(bs[2 * out.head_plus], 2 * out.head_minus);
        assert_eq!(bs[2 * out.tail_plus + 1], 2 * out.tail_minus + 1);
        assert_eq!(bs[0], 0);
        // involution
        for b in 0..bs.len() {
            assert_eq!(bs[bs[b]], b);
        }
    }

    #[test]
    fn glue_rejects_boundary_positions() {
        let g = starlet();
        assert!(g.glue_leaf_pair(0, 0.0).is_err());
        assert!(g.glue_leaf_pair(0, 1.0).is_err());
        assert!(g.glue_leaf_pair(1, 0.5).is_err());
    }

    #[test]
    fn other_pairs_survive_gluing_with_remapped_ids() {
        // two roots (0 and 1) joined by a spine, each carrying a unit pair
        let g = build_metric(
            6,
            &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)],
            &[1.3, 1.0, 1.0, 1.0, 1.0],
            &[MetricLeafPairSpec::new(0, 1, 2), MetricLeafPairSpec::new(1, 3, 4)],
        )
        .unwrap();
        let out = g.glue_leaf_pair(0, 0.5).unwrap();
        let pairs = out.graph.leaf_pairs();
        assert_eq!(pairs.len(), 1);
        // spine kept id 0; the second pair's edges moved to ids 1, 2
        assert_eq!(pairs[0], MetricLeafPairSpec::new(1, 1, 2));
        assert_eq!(out.graph.edges()[1], MetricEdge::new(1, 4, 1.0));
    }

    #[test]
    fn pair_swaps_exchange_the_arms() {
        let g = starlet();
        let pair = g.leaf_pairs()[0].clone();
        let pi = g.pair_vertex_swap(&pair).unwrap();
        assert_eq!(pi, vec![0, 2, 1, 3]);
        let bs = g.pair_bond_swap(&pair).unwrap();
        // edge 0 = (0,1), edge 1 = (0,2): outward bonds are 0 and 2
        assert_eq!(bs[0], 2);
        assert_eq!(bs[1], 3);
        assert_eq!(bs[4], 4);
        for b in 0..bs.len() {
            assert_eq!(bs[bs[b]], b);
        }
    }
}
