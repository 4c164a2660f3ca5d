//! The confusion graph and the clique lower bound.
//!
//! Two realizations are confusable when some user must tell them apart:
//! they differ on that user's must-decode sources while agreeing on its side
//! information. Any mechanism that decodes perfectly must keep confusable
//! realizations in disjoint output supports, so the clique number of the
//! subgraph induced by fixing the adversary's known sources lower-bounds the
//! achievable leakage.

use crate::bitset::{AdjacencyBits, BitSet};
use crate::error::{Error, Result};
use crate::prob::log2;
use crate::system::{SourceSet, SystemSpec};

/// Refuse to materialize adjacency beyond this many realizations.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

/// True iff some user must distinguish the two packed realizations.
pub fn confusable(spec: &SystemSpec, x1: usize, x2: usize) -> bool {
    let space = spec.space();
    let c1 = space.unpack(x1);
    let c2 = space.unpack(x2);
    confusable_coords(spec, &c1, &c2)
}

fn confusable_coords(spec: &SystemSpec, c1: &[usize], c2: &[usize]) -> bool {
    spec.users().iter().any(|u| {
        u.must_decode.iter().any(|i| c1[i] != c2[i])
            && u.side_info.iter().all(|i| c1[i] == c2[i])
    })
}

/// Undirected graph over all packed realizations with an edge per
/// confusable pair.
#[derive(Clone, Debug)]
pub struct ConfusionGraph {
    adj: AdjacencyBits,
}

impl ConfusionGraph {
    pub fn build(spec: &SystemSpec) -> Result<Self> {
        Self::build_with_cap(spec, DEFAULT_VERTEX_CAP)
    }

    /// Pairwise construction, `O(|space|^2 * users)`.
    pub fn build_with_cap(spec: &SystemSpec, cap: usize) -> Result<Self> {
        let space = spec.space();
        let n = space.len();
        if n > cap {
            return Err(Error::SystemTooLarge { vertices: n, cap });
        }
        let coords: Vec<Vec<usize>> = (0..n).map(|x| space.unpack(x)).collect();
        let mut adj = AdjacencyBits::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if confusable_coords(spec, &coords[a], &coords[b]) {
                    adj.add_edge(a, b);
                }
            }
        }
        Ok(ConfusionGraph { adj })
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj.has_edge(a, b)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        self.adj.neighbors(v)
    }

    /// Subgraph induced by the realizations that extend the fixed value
    /// `x_s` (packed within the subspace of `fixed`).
    pub fn induced(&self, spec: &SystemSpec, fixed: SourceSet, x_s: usize) -> InducedSubgraph {
        let space = spec.space();
        let mut vertices = Vec::new();
        for x in 0..space.len() {
            if space.project(&space.unpack(x), fixed) == x_s {
                vertices.push(x);
            }
        }
        let k = vertices.len();
        let mut adj = AdjacencyBits::new(k);
        for i in 0..k {
            for j in i + 1..k {
                if self.adj.has_edge(vertices[i], vertices[j]) {
                    adj.add_edge(i, j);
                }
            }
        }
        InducedSubgraph {
            fixed,
            fixed_value: x_s,
            vertices,
            adj,
        }
    }

    /// True iff no cell of the partition contains a confusable pair. For
    /// deterministic mechanisms this is exactly the perfect-decoding
    /// condition for every user.
    pub fn partition_is_confusion_free(&self, cells: &[Vec<usize>]) -> bool {
        let n = self.adj.len();
        let mut cell_bits = BitSet::new(n);
        for cell in cells {
            cell_bits.clear();
            for &x in cell {
                cell_bits.insert(x);
            }
            for &x in cell {
                let mut hits = self.adj.neighbors(x).clone();
                hits.intersect_with(&cell_bits);
                if !hits.is_empty() {
                    return false;
                }
            }
        }
        true
    }

    /// GraphViz DOT rendering with realizations labeled by their coordinate
    /// digits.
    pub fn to_dot(&self, spec: &SystemSpec) -> String {
        let space = spec.space();
        let mut out = String::from("graph confusion {\n");
        for v in 0..self.adj.len() {
            let label: Vec<String> = space.unpack(v).iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("  {} [label=\"{}\"];\n", v, label.join("")));
        }
        for a in 0..self.adj.len() {
            for b in self.adj.neighbors(a).iter() {
                if b > a {
                    out.push_str(&format!("  {a} -- {b};\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A fixed-value induced subgraph with its own compact vertex indexing.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub fixed: SourceSet,
    pub fixed_value: usize,
    /// Original packed realization per compact vertex index.
    pub vertices: Vec<usize>,
    adj: AdjacencyBits,
}

impl InducedSubgraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    pub fn clique_number(&self) -> usize {
        clique_number(&self.adj)
    }
}

/// Exact maximum clique size by branch and bound with a greedy-coloring
/// bound (Tomita-style). Exact for every graph small enough to build.
pub fn clique_number(adj: &AdjacencyBits) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let mut best = 1;
    let mut cand = BitSet::new(n);
    for v in 0..n {
        cand.insert(v);
    }
    expand(adj, &mut cand, 0, &mut best);
    best
}

fn expand(adj: &AdjacencyBits, cand: &mut BitSet, size: usize, best: &mut usize) {
    // Greedy coloring: vertices in ascending color class order. A clique can
    // use at most one vertex per color, so size + color bounds the branch.
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut uncolored = cand.clone();
    let mut color = 0;
    while !uncolored.is_empty() {
        color += 1;
        let mut avail = uncolored.clone();
        while let Some(v) = avail.first() {
            avail.remove(v);
            uncolored.remove(v);
            let mut blocked = adj.neighbors(v).clone();
            blocked.intersect_with(&avail);
            for b in blocked.iter() {
                avail.remove(b);
            }
            order.push((v, color));
        }
    }
    for &(v, c) in order.iter().rev() {
        if size + c <= *best {
            return;
        }
        let mut next = cand.clone();
        next.intersect_with(adj.neighbors(v));
        if next.is_empty() {
            if size + 1 > *best {
                *best = size + 1;
            }
        } else {
            expand(adj, &mut next, size + 1, best);
        }
        cand.remove(v);
    }
}

/// Result of the clique bound: the clique number of the subgraph fixed at
/// the adversary's known sources, and its log.
#[derive(Clone, Debug, PartialEq)]
pub struct CliqueBound {
    pub clique_size: usize,
    pub bits: f64,
}

/// Leakage lower bound `log2 w(induced at P)`, evaluated at the
/// all-first-symbols representative; the clique number does not depend on
/// which representative is fixed.
pub fn clique_lower_bound(spec: &SystemSpec) -> Result<CliqueBound> {
    let graph = ConfusionGraph::build(spec)?;
    Ok(clique_lower_bound_of(spec, &graph))
}

pub fn clique_lower_bound_of(spec: &SystemSpec, graph: &ConfusionGraph) -> CliqueBound {
    let sub = graph.induced(spec, spec.adversary_known(), 0);
    let w = sub.clique_number();
    CliqueBound {
        clique_size: w,
        bits: log2(w as f64),
    }
}
