//! Randomized generators and independent oracles for the acceptance suite.
//!
//! Everything here deliberately avoids the library's fast paths: feasibility
//! at oracle leaves goes through the kernel-based constraint check, cliques
//! get a subset brute force, and expected gains are re-derived from the
//! single-observation ratio. That keeps each oracle an independent route to
//! the value it checks.

use leakage_core::bitset::AdjacencyBits;
use leakage_core::graph::ConfusionGraph;
use leakage_core::mechanism::{
    max_leakage, partition_leakage, satisfies_constraints, Mechanism, PartitionMechanism,
};
use leakage_core::prob::{ProductDistribution, SourceDistribution};
use leakage_core::system::{SourceSet, SystemSpec, UserSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sources(rng: &mut ChaCha8Rng, n: usize, max_alphabet: usize) -> ProductDistribution {
    ProductDistribution::new(
        (0..n)
            .map(|_| {
                let k = rng.gen_range(2..=max_alphabet);
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = w.iter().sum();
                SourceDistribution::new(w.iter().map(|x| x / total).collect()).unwrap()
            })
            .collect(),
    )
}

/// A valid random system: disjoint per-user side-info / must-decode splits,
/// thresholds below each guess set's min-entropy, and a random adversary set.
pub fn random_spec(rng: &mut ChaCha8Rng, max_n: usize, max_alphabet: usize) -> SystemSpec {
    let n = rng.gen_range(1..=max_n);
    let sources = random_sources(rng, n, max_alphabet);
    let m = rng.gen_range(1..=3);
    let users = (0..m)
        .map(|_| {
            let mut side = SourceSet::EMPTY;
            let mut decode = SourceSet::EMPTY;
            for i in 0..n {
                match rng.gen_range(0..3) {
                    0 => side = side.union(SourceSet::singleton(i)),
                    1 => decode = decode.union(SourceSet::singleton(i)),
                    _ => {}
                }
            }
            let guess = side.union(decode).complement(n);
            let threshold = rng.gen_range(0.0..1.0) * sources.min_entropy_of(guess);
            UserSpec::new(side, decode, threshold)
        })
        .collect();
    let p = SourceSet(rng.gen_range(0..1u32 << n));
    let spec = SystemSpec::new(sources, users, p);
    assert!(spec.validate().is_empty());
    spec
}

/// An arbitrary partition of the realization space (not feasibility-vetted).
pub fn random_partition(rng: &mut ChaCha8Rng, num_realizations: usize) -> PartitionMechanism {
    let k = rng.gen_range(1..=num_realizations);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k];
    for x in 0..num_realizations {
        cells[rng.gen_range(0..k)].push(x);
    }
    cells.retain(|c| !c.is_empty());
    PartitionMechanism::new(cells, num_realizations).unwrap()
}

/// A partition with no confusable pair inside any cell, grown by random
/// merges from the one-to-one start.
pub fn random_confusion_free_partition(
    spec: &SystemSpec,
    graph: &ConfusionGraph,
    rng: &mut ChaCha8Rng,
) -> PartitionMechanism {
    let n = spec.space().len();
    let mut cells: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    let attempts = rng.gen_range(0..2 * n);
    for _ in 0..attempts {
        if cells.len() < 2 {
            break;
        }
        let a = rng.gen_range(0..cells.len());
        let b = rng.gen_range(0..cells.len());
        if a == b {
            continue;
        }
        let clash = cells[a]
            .iter()
            .any(|&x| cells[b].iter().any(|&y| graph.has_edge(x, y)));
        if !clash {
            let (lo, hi) = (a.min(b), a.max(b));
            let moved = cells.remove(hi);
            cells[lo].extend(moved);
            cells[lo].sort_unstable();
        }
    }
    PartitionMechanism::new(cells, n).unwrap()
}

/// A randomized kernel with random supports and normalized rows.
pub fn random_mechanism(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Mechanism {
    let n = spec.space().len();
    let ny = rng.gen_range(1..=n + 2);
    let kernel = (0..n)
        .map(|_| {
            let mut row = vec![0.0f64; ny];
            for v in row.iter_mut() {
                if rng.gen_bool(0.6) {
                    *v = rng.gen_range(0.1..1.0);
                }
            }
            if row.iter().all(|&v| v == 0.0) {
                row[rng.gen_range(0..ny)] = 1.0;
            }
            let total: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= total;
            }
            row
        })
        .collect();
    Mechanism::new(ny, kernel).unwrap()
}

/// Exact maximum clique by checking every vertex subset; `None` above 16
/// vertices.
pub fn brute_force_clique(adj: &AdjacencyBits) -> Option<usize> {
    let v = adj.len();
    if v > 16 {
        return None;
    }
    if v == 0 {
        return Some(0);
    }
    let mut best = 0usize;
    'subset: for mask in 0u32..1 << v {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let members: Vec<usize> = (0..v).filter(|&i| mask >> i & 1 == 1).collect();
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                if !adj.has_edge(a, b) {
                    continue 'subset;
                }
            }
        }
        best = size;
    }
    Some(best)
}

/// Least leakage over every feasible partition, enumerated recursively with
/// confusion-free pruning. The linear-domain mass of the partial partition
/// only grows as elements are assigned, so branches already at or above the
/// best feasible mass are cut. Accepted leaves are vetted through the
/// kernel-based constraint evaluation, and the reported optimum is
/// re-evaluated through the kernel leakage route. Returns `None` when the
/// search exceeds `node_budget` recursion nodes.
pub fn exhaustive_min_feasible_leakage(spec: &SystemSpec, node_budget: usize) -> Option<f64> {
    // kernel checks at leaves dominate the cost; cap them separately
    let leaf_budget = node_budget / 20;
    let graph = ConfusionGraph::build(spec).unwrap();
    let space = spec.space();
    let n = space.len();
    let p_set = spec.adversary_known();
    let np = space.subspace_len(p_set);
    assert!(np <= 32, "oracle keeps projection sets as u32 masks");
    let proj: Vec<usize> = (0..n)
        .map(|x| space.project(&space.unpack(x), p_set))
        .collect();
    let pmass: Vec<f64> = (0..np)
        .map(|i| spec.sources().marginal_prob(p_set, i))
        .collect();

    struct Search<'a> {
        spec: &'a SystemSpec,
        graph: &'a ConfusionGraph,
        proj: &'a [usize],
        pmass: &'a [f64],
        n: usize,
        cells: Vec<Vec<usize>>,
        cell_proj: Vec<u32>,
        best_mass: f64,
        best_cells: Option<Vec<Vec<usize>>>,
        nodes: usize,
        budget: usize,
        leaves: usize,
        leaf_budget: usize,
    }

    impl Search<'_> {
        fn rec(&mut self, next: usize, mass: f64) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            if mass >= self.best_mass {
                return true; // assignments only add projection mass
            }
            if next == self.n {
                self.leaves += 1;
                if self.leaves > self.leaf_budget {
                    return false;
                }
                let partition = PartitionMechanism::new(self.cells.clone(), self.n).unwrap();
                let ok = satisfies_constraints(self.spec, &partition.to_mechanism())
                    .unwrap()
                    .satisfied;
                if ok {
                    self.best_mass = mass;
                    self.best_cells = Some(self.cells.clone());
                }
                return true;
            }
            let bit = 1u32 << self.proj[next];
            for c in 0..self.cells.len() {
                let clash = self.cells[c].iter().any(|&x| self.graph.has_edge(x, next));
                if clash {
                    continue;
                }
                let added = if self.cell_proj[c] & bit == 0 {
                    self.pmass[self.proj[next]]
                } else {
                    0.0
                };
                let saved = self.cell_proj[c];
                self.cells[c].push(next);
                self.cell_proj[c] |= bit;
                if !self.rec(next + 1, mass + added) {
                    return false;
                }
                self.cells[c].pop();
                self.cell_proj[c] = saved;
            }
            self.cells.push(vec![next]);
            self.cell_proj.push(bit);
            let ok = self.rec(next + 1, mass + self.pmass[self.proj[next]]);
            self.cells.pop();
            self.cell_proj.pop();
            ok
        }
    }

    let mut search = Search {
        spec,
        graph: &graph,
        proj: &proj,
        pmass: &pmass,
        n,
        cells: Vec::new(),
        cell_proj: Vec::new(),
        best_mass: f64::INFINITY,
        best_cells: None,
        nodes: 0,
        budget: node_budget,
        leaves: 0,
        leaf_budget,
    };
    if !search.rec(0, 0.0) {
        return None;
    }
    let cells = search.best_cells.expect("one-to-one partition is always feasible");
    // report the optimum through the kernel route, cross-checked against the
    // projection-mass route used for pruning
    let partition = PartitionMechanism::new(cells, n).unwrap();
    let direct = max_leakage(spec, &partition.to_mechanism()).unwrap();
    assert!((direct - search.best_mass.log2()).abs() <= 1e-9);
    assert!((direct - partition_leakage(spec, partition.cells())).abs() <= 1e-9);
    Some(direct)
}

/// Calls `f` with every set partition of `{0, .., k-1}` as a cell-index
/// assignment (restricted growth strings).
pub fn for_each_set_partition(k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(assign: &mut Vec<usize>, k: usize, max_used: usize, f: &mut impl FnMut(&[usize])) {
        if assign.len() == k {
            f(assign);
            return;
        }
        for c in 0..=max_used + 1 {
            assign.push(c);
            rec(assign, k, max_used.max(c), f);
            assign.pop();
        }
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut assign = vec![0usize];
    rec(&mut assign, k, 0, f);
}
