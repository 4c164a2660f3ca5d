//! Fixed-capacity bitsets backed by `u64` words.
//!
//! Graph adjacency and partition cells are sets over packed realization
//! indices; keeping them as raw words makes pairwise intersection tests a
//! handful of AND/popcount instructions.

/// A set over `0..capacity`, stored as little-endian `u64` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
    capacity: usize,
}

impl BitSet {
    pub fn new(capacity: usize) -> Self {
        BitSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.capacity);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True iff `self` and `other` share at least one element.
    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Lowest set element, if any.
    pub fn first(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }

    pub fn from_iter(capacity: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(capacity);
        for i in items {
            s.insert(i);
        }
        s
    }
}

/// Symmetric adjacency over `n` vertices, one `BitSet` row per vertex.
#[derive(Clone, Debug)]
pub struct AdjacencyBits {
    rows: Vec<BitSet>,
}

impl AdjacencyBits {
    pub fn new(n: usize) -> Self {
        AdjacencyBits {
            rows: vec![BitSet::new(n); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b, "no self-loops");
        self.rows[a].insert(b);
        self.rows[b].insert(a);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.rows[v]
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BitSet::len).sum::<usize>() / 2
    }
}
