//! Privacy mechanisms and their evaluation: maximal leakage, guessing gain,
//! per-user utility, and the decoding constraints.
//!
//! A [`Mechanism`] is an arbitrary conditional distribution from full source
//! realizations to a finite output alphabet. A [`PartitionMechanism`] is the
//! deterministic special case: a partition of the realization space into
//! cells, each cell acting as one output symbol. Partitions get dedicated
//! fast paths because the mechanism designer only ever works with them.
//!
//! All leakage and utility values are in bits.

use crate::error::{Error, Result};
use crate::prob::{log2, JointTable};
use crate::system::{SourceSet, SystemSpec};

/// A conditional distribution `kernel[x][y]` over outputs `y` for every
/// packed realization `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    outputs: usize,
    kernel: Vec<Vec<f64>>,
}

impl Mechanism {
    /// Rows must sum to 1 within 1e-12 with every entry in `[0, 1]`.
    pub fn new(outputs: usize, kernel: Vec<Vec<f64>>) -> Result<Self> {
        for (x, row) in kernel.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::InvalidMechanism(format!(
                    "row {x} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidMechanism(format!(
                    "row {x} holds {bad}, outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMechanism(format!(
                    "row {x} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Mechanism { outputs, kernel })
    }

    /// The one-to-one disclosure: every realization is its own output.
    pub fn identity(num_realizations: usize) -> Self {
        let kernel = (0..num_realizations)
            .map(|x| {
                let mut row = vec![0.0; num_realizations];
                row[x] = 1.0;
                row
            })
            .collect();
        Mechanism {
            outputs: num_realizations,
            kernel,
        }
    }

    /// The fully suppressed disclosure: a single constant output.
    pub fn constant(num_realizations: usize) -> Self {
        Mechanism {
            outputs: 1,
            kernel: vec![vec![1.0]; num_realizations],
        }
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs
    }

    pub fn num_realizations(&self) -> usize {
        self.kernel.len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.kernel[x][y]
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    fn check_spec(&self, spec: &SystemSpec) -> Result<()> {
        let expected = spec.space().len();
        if self.kernel.len() != expected {
            return Err(Error::AlphabetMismatch {
                expected,
                actual: self.kernel.len(),
            });
        }
        Ok(())
    }
}

/// A deterministic mechanism given as disjoint cells of packed realizations
/// whose union is the whole space. Cell index doubles as output symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionMechanism {
    cells: Vec<Vec<usize>>,
    num_realizations: usize,
}

impl PartitionMechanism {
    pub fn new(cells: Vec<Vec<usize>>, num_realizations: usize) -> Result<Self> {
        let mut seen = vec![false; num_realizations];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {c} is empty")));
            }
            for &x in cell {
                if x >= num_realizations {
                    return Err(Error::InvalidPartition(format!(
                        "cell {c} holds realization {x}, beyond the space of {num_realizations}"
                    )));
                }
                if seen[x] {
                    return Err(Error::InvalidPartition(format!(
                        "realization {x} appears in more than one cell"
                    )));
                }
                seen[x] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!(
                "realization {missing} is not covered by any cell"
            )));
        }
        let mut cells = cells;
        for cell in &mut cells {
            cell.sort_unstable();
        }
        Ok(PartitionMechanism {
            cells,
            num_realizations,
        })
    }

    pub fn identity(num_realizations: usize) -> Self {
        PartitionMechanism {
            cells: (0..num_realizations).map(|x| vec![x]).collect(),
            num_realizations,
        }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_realizations(&self) -> usize {
        self.num_realizations
    }

    /// Lossless conversion to the 0/1-kernel form.
    pub fn to_mechanism(&self) -> Mechanism {
        let mut kernel = vec![vec![0.0; self.cells.len()]; self.num_realizations];
        for (y, cell) in self.cells.iter().enumerate() {
            for &x in cell {
                kernel[x][y] = 1.0;
            }
        }
        Mechanism {
            outputs: self.cells.len(),
            kernel,
        }
    }
}

/// Positive-probability supports in both directions of a kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSets {
    pub y_support_of_x: Vec<Vec<usize>>,
    pub x_support_of_y: Vec<Vec<usize>>,
}

impl SupportSets {
    pub fn of(mech: &Mechanism) -> Self {
        let mut y_of_x = vec![Vec::new(); mech.num_realizations()];
        let mut x_of_y = vec![Vec::new(); mech.num_outputs()];
        for (x, row) in mech.kernel.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    y_of_x[x].push(y);
                    x_of_y[y].push(x);
                }
            }
        }
        SupportSets {
            y_support_of_x: y_of_x,
            x_support_of_y: x_of_y,
        }
    }
}

/// Maximal leakage from the adversary's unknown sources to the disclosure,
/// given its side information, in bits:
/// `log2 sum_{y,x_P} P(x_P) max_{x_Q} k(y | x_P, x_Q)`.
///
/// When the adversary already knows everything (`Q` empty) the disclosure
/// reveals nothing new and the leakage is 0.
pub fn max_leakage(spec: &SystemSpec, mech: &Mechanism) -> Result<f64> {
    mech.check_spec(spec)?;
    let p_set = spec.adversary_known();
    let q_set = spec.adversary_unknown();
    if q_set.is_empty() {
        return Ok(0.0);
    }
    let space = spec.space();
    let np = space.subspace_len(p_set);
    let ny = mech.num_outputs();
    // per (x_P, y): max over x_Q of the kernel entry
    let mut best = vec![0.0f64; np * ny];
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        let xp = space.project(&coords, p_set);
        let row = &mech.kernel[x];
        let base = xp * ny;
        for (y, &v) in row.iter().enumerate() {
            if v > best[base + y] {
                best[base + y] = v;
            }
        }
        increment(&mut coords, space.sizes());
    }
    let mut total = 0.0;
    for xp in 0..np {
        let weight = spec.sources().marginal_prob(p_set, xp);
        let row_sum: f64 = best[xp * ny..(xp + 1) * ny].iter().sum();
        total += weight * row_sum;
    }
    Ok(log2(total))
}

/// Sibson mutual information of order infinity between the unknown sources
/// and the pair (disclosure, known sources), computed from the explicit
/// joint table with the pair flattened into one composite variable.
///
/// This is an independent route to the same value as [`max_leakage`].
pub fn sibson_leakage(spec: &SystemSpec, mech: &Mechanism) -> Result<f64> {
    mech.check_spec(spec)?;
    let p_set = spec.adversary_known();
    let q_set = spec.adversary_unknown();
    let space = spec.space();
    let nq = space.subspace_len(q_set);
    let np = space.subspace_len(p_set);
    let ny = mech.num_outputs();
    let ncomp = ny * np;
    // joint[q][composite (y, x_P)]
    let mut joint = vec![0.0f64; nq * ncomp];
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        let xq = space.project(&coords, q_set);
        let xp = space.project(&coords, p_set);
        let px = spec.sources().prob_coords(&coords);
        let row = &mech.kernel[x];
        for (y, &v) in row.iter().enumerate() {
            if v > 0.0 {
                joint[xq * ncomp + y * np + xp] += px * v;
            }
        }
        increment(&mut coords, space.sizes());
    }
    // marginal of the unknown block, taken from the joint itself
    let mut q_marginal = vec![0.0f64; nq];
    for q in 0..nq {
        q_marginal[q] = joint[q * ncomp..(q + 1) * ncomp].iter().sum();
    }
    let mut total = 0.0;
    for b in 0..ncomp {
        let mut best = 0.0f64;
        for q in 0..nq {
            if q_marginal[q] > 0.0 {
                let cond = joint[q * ncomp + b] / q_marginal[q];
                if cond > best {
                    best = cond;
                }
            }
        }
        total += best;
    }
    Ok(log2(total))
}

/// Single-observation guessing gain `r`: the ratio of the best correct-guess
/// probability of the target sources after versus before seeing output `y`,
/// given the packed side-information value `z`.
///
/// Errors when the pair `(y, z)` has zero probability.
pub fn guessing_gain(
    spec: &SystemSpec,
    mech: &Mechanism,
    target: SourceSet,
    side: SourceSet,
    y: usize,
    z: usize,
) -> Result<f64> {
    mech.check_spec(spec)?;
    if !target.is_disjoint_from(side) {
        return Err(Error::OverlappingAxes);
    }
    let space = spec.space();
    let nv = space.subspace_len(target);
    let mut by_target = vec![0.0f64; nv];
    let mut total = 0.0f64;
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        if space.project(&coords, side) == z {
            let mass = spec.sources().prob_coords(&coords) * mech.kernel[x][y];
            if mass > 0.0 {
                by_target[space.project(&coords, target)] += mass;
                total += mass;
            }
        }
        increment(&mut coords, space.sizes());
    }
    if total <= 0.0 {
        return Err(Error::UndefinedConditional);
    }
    let posterior_max = by_target.iter().cloned().fold(0.0, f64::max) / total;
    let prior_max = max_marginal_prob(spec, target);
    Ok(posterior_max / prior_max)
}

fn max_marginal_prob(spec: &SystemSpec, set: SourceSet) -> f64 {
    // largest atom of an independent product is the product of largest atoms
    set.iter()
        .map(|i| {
            spec.sources().source(i).pmf().iter().cloned().fold(0.0, f64::max)
        })
        .product()
}

/// Expected log guessing gain of `target` given `side`, over the joint of
/// (output, side information), in bits. Zero when `target` is empty.
pub fn expected_log_gain(
    spec: &SystemSpec,
    mech: &Mechanism,
    target: SourceSet,
    side: SourceSet,
) -> Result<f64> {
    mech.check_spec(spec)?;
    if !target.is_disjoint_from(side) {
        return Err(Error::OverlappingAxes);
    }
    if target.is_empty() {
        return Ok(0.0);
    }
    let space = spec.space();
    let na = space.subspace_len(side);
    let nv = space.subspace_len(target);
    let ny = mech.num_outputs();
    // mass[a][y][v] of the joint (side, output, target)
    let mut mass = vec![0.0f64; na * ny * nv];
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        let a = space.project(&coords, side);
        let v = space.project(&coords, target);
        let px = spec.sources().prob_coords(&coords);
        let row = &mech.kernel[x];
        let base = a * ny * nv + v;
        for (y, &k) in row.iter().enumerate() {
            if k > 0.0 {
                mass[base + y * nv] += px * k;
            }
        }
        increment(&mut coords, space.sizes());
    }
    let prior_max = max_marginal_prob(spec, target);
    let mut d = 0.0;
    for ay in 0..na * ny {
        let block = &mass[ay * nv..(ay + 1) * nv];
        let total: f64 = block.iter().sum();
        if total > 0.0 {
            let best = block.iter().cloned().fold(0.0, f64::max);
            d += total * log2(best / (total * prior_max));
        }
    }
    Ok(d)
}

/// User `i`'s utility: the expected log guessing gain of its guess set given
/// its side information.
pub fn user_utility(spec: &SystemSpec, mech: &Mechanism, user: usize) -> Result<f64> {
    let u = spec.user(user);
    expected_log_gain(spec, mech, spec.guess_set(user), u.side_info)
}

/// Whether user `i` can reconstruct its must-decode sources with certainty
/// from the output and its side information: for every positive-probability
/// (output, side value), all supported realizations agree on the must-decode
/// coordinates. Vacuously true for an empty must-decode set.
pub fn perfectly_decodes(spec: &SystemSpec, mech: &Mechanism, user: usize) -> Result<bool> {
    mech.check_spec(spec)?;
    let u = spec.user(user);
    let space = spec.space();
    let na = space.subspace_len(u.side_info);
    let ny = mech.num_outputs();
    let mut seen: Vec<Option<usize>> = vec![None; na * ny];
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        let a = space.project(&coords, u.side_info);
        let w = space.project(&coords, u.must_decode);
        for (y, &k) in mech.kernel[x].iter().enumerate() {
            if k > 0.0 {
                match seen[a * ny + y] {
                    None => seen[a * ny + y] = Some(w),
                    Some(prev) if prev != w => return Ok(false),
                    _ => {}
                }
            }
        }
        increment(&mut coords, space.sizes());
    }
    Ok(true)
}

/// Per-user view of the utility constraints under a mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct UserConstraintReport {
    pub user: usize,
    pub decoded: bool,
    pub utility_bits: f64,
    pub threshold_bits: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub satisfied: bool,
    pub users: Vec<UserConstraintReport>,
}

/// Utility feasibility slack shared with the mechanism designer.
pub const UTILITY_SLACK: f64 = 1e-9;

/// Evaluates both constraint families for every user: perfect decoding and
/// the utility threshold (checked with [`UTILITY_SLACK`]).
pub fn satisfies_constraints(spec: &SystemSpec, mech: &Mechanism) -> Result<ConstraintReport> {
    let mut users = Vec::with_capacity(spec.num_users());
    let mut satisfied = true;
    for i in 0..spec.num_users() {
        let decoded = perfectly_decodes(spec, mech, i)?;
        let utility = user_utility(spec, mech, i)?;
        let threshold = spec.user(i).gain_threshold;
        if !decoded || utility < threshold - UTILITY_SLACK {
            satisfied = false;
        }
        users.push(UserConstraintReport {
            user: i + 1,
            decoded,
            utility_bits: utility,
            threshold_bits: threshold,
        });
    }
    Ok(ConstraintReport { satisfied, users })
}

/// The leakage floor implied by achieved utilities on a mechanism that
/// perfectly decodes for every user:
/// `max( I(X_Q; Y | X_P), max_i utility_i + H(X_{W_i & Q}) + I(X_{A_i & Q}; Y | X_P) )`,
/// the inner max running over users whose guess set lies inside `Q`.
///
/// Errors when some user cannot perfectly decode, since the derivation
/// rests on that Markov structure.
pub fn utility_implied_floor(spec: &SystemSpec, mech: &Mechanism) -> Result<f64> {
    for i in 0..spec.num_users() {
        if !perfectly_decodes(spec, mech, i)? {
            return Err(Error::PerfectDecodingRequired);
        }
    }
    let q = spec.adversary_unknown();
    let p = spec.adversary_known();
    let mut floor = conditional_information(spec, mech, q, p)?;
    for i in 0..spec.num_users() {
        let sets = spec.derived_sets(i);
        if !sets.guess.is_subset_of(q) {
            continue;
        }
        let utility = user_utility(spec, mech, i)?;
        let decode_entropy = spec.sources().entropy_of(sets.must_decode_in_q);
        let info = conditional_information(spec, mech, sets.side_info_in_q, p)?;
        floor = floor.max(utility + decode_entropy + info);
    }
    Ok(floor)
}

/// `I(X_V ; Y | X_Z)` for the joint induced by the sources and the
/// mechanism, in bits.
pub fn conditional_information(
    spec: &SystemSpec,
    mech: &Mechanism,
    v: SourceSet,
    z: SourceSet,
) -> Result<f64> {
    let table = joint_with_output(spec, mech, &[v, z]);
    table.conditional_mutual_information(&[0], &[2], &[1])
}

/// Joint table over the listed source sets (each packed into one composite
/// axis, in order) plus the mechanism output as the final axis.
pub fn joint_with_output(spec: &SystemSpec, mech: &Mechanism, sets: &[SourceSet]) -> JointTable {
    let space = spec.space();
    let mut axes: Vec<usize> = sets.iter().map(|&s| space.subspace_len(s)).collect();
    axes.push(mech.num_outputs());
    let ny = mech.num_outputs();
    let mut probs = vec![0.0f64; axes.iter().product()];
    let mut coords = vec![0usize; space.num_sources()];
    for x in 0..space.len() {
        let mut base = 0usize;
        for &s in sets {
            base = base * space.subspace_len(s) + space.project(&coords, s);
        }
        let px = spec.sources().prob_coords(&coords);
        for (y, &k) in mech.kernel[x].iter().enumerate() {
            if k > 0.0 {
                probs[base * ny + y] += px * k;
            }
        }
        increment(&mut coords, space.sizes());
    }
    JointTable::new_unchecked(axes, probs)
}

// ---------------------------------------------------------------------------
// Deterministic-partition fast paths
// ---------------------------------------------------------------------------

/// Probability mass of the distinct side-`set` projections of the
/// realizations in `cell`.
pub fn projected_mass(spec: &SystemSpec, set: SourceSet, cell: &[usize]) -> f64 {
    let space = spec.space();
    let mut seen: Vec<usize> = cell
        .iter()
        .map(|&x| space.project(&space.unpack(x), set))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.iter()
        .map(|&xp| spec.sources().marginal_prob(set, xp))
        .sum()
}

/// Maximal leakage of a deterministic partition without materializing its
/// kernel: `log2 sum_cells P_{X_P}(projection of the cell)`.
pub fn partition_leakage(spec: &SystemSpec, cells: &[Vec<usize>]) -> f64 {
    let p_set = spec.adversary_known();
    let total: f64 = cells
        .iter()
        .map(|cell| projected_mass(spec, p_set, cell))
        .sum();
    log2(total)
}

/// [`expected_log_gain`] of a user's guess set under a deterministic
/// partition, evaluated directly on the cells.
pub fn partition_utility(spec: &SystemSpec, cells: &[Vec<usize>], user: usize) -> f64 {
    let u = spec.user(user);
    let target = spec.guess_set(user);
    if target.is_empty() {
        return 0.0;
    }
    let space = spec.space();
    let nv = space.subspace_len(target);
    let na = space.subspace_len(u.side_info);
    let prior_max = max_marginal_prob(spec, target);
    let mut mass = vec![0.0f64; na * nv];
    let mut touched: Vec<usize> = Vec::new();
    let mut d = 0.0;
    for cell in cells {
        touched.clear();
        for &x in cell {
            let coords = space.unpack(x);
            let a = space.project(&coords, u.side_info);
            let v = space.project(&coords, target);
            let slot = a * nv + v;
            if mass[slot] == 0.0 {
                touched.push(slot);
            }
            mass[slot] += spec.sources().prob_coords(&coords);
        }
        // group the touched slots by side value
        touched.sort_unstable();
        let mut k = 0;
        while k < touched.len() {
            let a = touched[k] / nv;
            let mut total = 0.0f64;
            let mut best = 0.0f64;
            while k < touched.len() && touched[k] / nv == a {
                let m = mass[touched[k]];
                total += m;
                if m > best {
                    best = m;
                }
                mass[touched[k]] = 0.0;
                k += 1;
            }
            if total > 0.0 {
                d += total * log2(best / (total * prior_max));
            }
        }
    }
    d
}

#[inline]
pub(crate) fn increment(coords: &mut [usize], sizes: &[usize]) {
    for i in (0..coords.len()).rev() {
        coords[i] += 1;
        if coords[i] < sizes[i] {
            return;
        }
        coords[i] = 0;
    }
}
