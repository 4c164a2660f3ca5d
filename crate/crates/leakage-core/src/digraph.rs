//! Enumeration of small directed graphs up to isomorphism.
//!
//! Arcs of a simple digraph on `n` vertices (no self-loops) are packed into
//! a bitmask over the `n(n-1)` ordered pairs. A graph's canonical form is
//! the minimum of that mask over all vertex permutations; deduplicating the
//! canonical forms of every labeled digraph yields the nonisomorphic
//! catalog. Brute force over `2^(n(n-1))` masks is fine up to `n = 5`
//! (about a million masks times 120 permutations).

use crate::error::{Error, Result};
use crate::system::SourceSet;
use itertools::Itertools;

/// Largest vertex count the brute-force catalog accepts.
pub const MAX_CATALOG_VERTICES: usize = 5;

/// A simple directed graph on `n` vertices as an arc bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Digraph {
    pub n: usize,
    pub arcs: u32,
}

impl Digraph {
    pub fn num_arc_slots(n: usize) -> usize {
        n * (n - 1)
    }

    /// Bit position of the ordered arc `(from, to)`.
    #[inline]
    pub fn arc_bit(n: usize, from: usize, to: usize) -> usize {
        debug_assert!(from != to && from < n && to < n);
        from * (n - 1) + if to > from { to - 1 } else { to }
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs >> Self::arc_bit(self.n, from, to) & 1 == 1
    }

    /// Vertices with an arc into `v`.
    pub fn in_neighbors(&self, v: usize) -> SourceSet {
        SourceSet::from_indices(
            (0..self.n).filter(|&u| u != v && self.has_arc(u, v)),
        )
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.count_ones() as usize
    }
}

/// Arc-bit relabeling tables, one per vertex permutation.
fn permutation_tables(n: usize) -> Vec<Vec<usize>> {
    let slots = Digraph::num_arc_slots(n);
    (0..n)
        .permutations(n)
        .map(|perm| {
            let mut table = vec![0usize; slots];
            for from in 0..n {
                for to in 0..n {
                    if from != to {
                        table[Digraph::arc_bit(n, from, to)] =
                            Digraph::arc_bit(n, perm[from], perm[to]);
                    }
                }
            }
            table
        })
        .collect()
}

fn canonical_mask(mask: u32, tables: &[Vec<usize>]) -> u32 {
    let mut best = mask;
    for table in &tables[1..] {
        let mut out = 0u32;
        let mut bits = mask;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= 1 << table[b];
        }
        if out < best {
            best = out;
        }
    }
    best
}

/// All nonisomorphic simple digraphs on `n` vertices, sorted by canonical
/// arc mask. Counts: 1, 3, 16, 218, 9608 for `n = 1..=5`.
pub fn catalog(n: usize) -> Result<Vec<Digraph>> {
    if n == 0 || n > MAX_CATALOG_VERTICES {
        return Err(Error::CatalogTooLarge { n });
    }
    let slots = Digraph::num_arc_slots(n);
    let tables = permutation_tables(n);
    let mut seen = std::collections::HashSet::with_capacity(1 << 14);
    for mask in 0u32..1 << slots {
        seen.insert(canonical_mask(mask, &tables));
    }
    let mut masks: Vec<u32> = seen.into_iter().collect();
    masks.sort_unstable();
    Ok(masks.into_iter().map(|arcs| Digraph { n, arcs }).collect())
}
