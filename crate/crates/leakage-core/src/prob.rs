//! Exact discrete probability over product alphabets.
//!
//! Everything here is plain summation over finite tables in double
//! precision. All information quantities are in bits (log base 2), with the
//! convention `0 * log 0 = 0`. Realizations of a product alphabet are packed
//! into a single mixed-radix index with source 1 most significant, so that
//! enumeration order is stable across file formats and test vectors.

use crate::error::{Error, Result};
use crate::system::SourceSet;

/// Tolerance for pmf normalization at construction time.
pub const PMF_SUM_TOL: f64 = 1e-12;
/// General tolerance for normalization checks on derived joint tables.
pub const TABLE_SUM_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    x.log2()
}

/// Distribution of a single discrete source with full support.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceDistribution {
    pmf: Vec<f64>,
}

impl SourceDistribution {
    /// Every entry must be strictly positive and the total must be 1 within
    /// [`PMF_SUM_TOL`].
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if let Some(&bad) = pmf.iter().find(|&&p| p <= 0.0 || !p.is_finite()) {
            return Err(Error::NonPositiveProbability { value: bad });
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(SourceDistribution { pmf })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        SourceDistribution::new(vec![1.0 - p, p])
    }

    pub fn uniform(k: usize) -> Result<Self> {
        SourceDistribution::new(vec![1.0 / k as f64; k])
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.pmf[symbol]
    }

    /// Shannon entropy in bits. The `+ 0.0` keeps a deterministic source at
    /// plus zero instead of IEEE `-0.0`.
    pub fn entropy(&self) -> f64 {
        -self.pmf.iter().map(|&p| p * log2(p)).sum::<f64>() + 0.0
    }

    /// Min-entropy (Renyi order infinity) in bits: `-log2 max_x p(x)`.
    pub fn min_entropy(&self) -> f64 {
        -log2(self.pmf.iter().cloned().fold(0.0, f64::max)) + 0.0
    }
}

/// Mixed-radix index layout of a product alphabet.
///
/// Source 1 is most significant: for sizes `(k_1, ..., k_n)` the packed index
/// of coordinates `(x_1, ..., x_n)` is `((x_1 k_2 + x_2) k_3 + x_3) ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    sizes: Vec<usize>,
}

impl ProductSpace {
    pub fn new(sizes: Vec<usize>) -> Self {
        debug_assert!(sizes.iter().all(|&k| k >= 1));
        ProductSpace { sizes }
    }

    pub fn num_sources(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Total number of full realizations.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // a product over >= 0 sources always has at least one point
    }

    pub fn pack(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.sizes.len());
        let mut idx = 0;
        for (&c, &k) in coords.iter().zip(&self.sizes) {
            debug_assert!(c < k);
            idx = idx * k + c;
        }
        idx
    }

    pub fn unpack(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0; self.sizes.len()];
        for i in (0..self.sizes.len()).rev() {
            coords[i] = idx % self.sizes[i];
            idx /= self.sizes[i];
        }
        coords
    }

    /// Number of joint symbols of the sources in `set`.
    pub fn subspace_len(&self, set: SourceSet) -> usize {
        set.iter().map(|i| self.sizes[i]).product()
    }

    /// Packs the restriction of `coords` to `set` (ascending source order,
    /// lowest index most significant).
    pub fn project(&self, coords: &[usize], set: SourceSet) -> usize {
        let mut idx = 0;
        for i in set.iter() {
            idx = idx * self.sizes[i] + coords[i];
        }
        idx
    }
}

/// Independent product of per-source distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDistribution {
    sources: Vec<SourceDistribution>,
    space: ProductSpace,
}

impl ProductDistribution {
    pub fn new(sources: Vec<SourceDistribution>) -> Self {
        let space = ProductSpace::new(sources.iter().map(|s| s.alphabet_size()).collect());
        ProductDistribution { sources, space }
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[SourceDistribution] {
        &self.sources
    }

    pub fn source(&self, i: usize) -> &SourceDistribution {
        &self.sources[i]
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    /// Joint probability of a full realization given by coordinates.
    pub fn prob_coords(&self, coords: &[usize]) -> f64 {
        self.sources
            .iter()
            .zip(coords)
            .map(|(s, &c)| s.prob(c))
            .product()
    }

    /// Joint probabilities of every packed realization, in packed order.
    pub fn full_table(&self) -> Vec<f64> {
        let n = self.space.len();
        let mut out = Vec::with_capacity(n);
        let mut coords = vec![0; self.sources.len()];
        for idx in 0..n {
            out.push(self.prob_coords(&coords));
            // mixed-radix increment, least significant (last source) first
            for i in (0..coords.len()).rev() {
                coords[i] += 1;
                if coords[i] < self.space.sizes()[i] {
                    break;
                }
                coords[i] = 0;
            }
            let _ = idx;
        }
        out
    }

    /// Probability of a packed sub-realization of the sources in `set`.
    pub fn marginal_prob(&self, set: SourceSet, packed: usize) -> f64 {
        let mut idx = packed;
        let members: Vec<usize> = set.iter().collect();
        let mut p = 1.0;
        for &i in members.iter().rev() {
            let k = self.sources[i].alphabet_size();
            p *= self.sources[i].prob(idx % k);
            idx /= k;
        }
        p
    }

    /// Marginal of the sources in `set` as a joint table with one axis per
    /// source (ascending order).
    pub fn joint_over(&self, set: SourceSet) -> JointTable {
        let axes: Vec<usize> = set.iter().map(|i| self.sources[i].alphabet_size()).collect();
        let len: usize = axes.iter().product();
        let mut probs = Vec::with_capacity(len);
        for idx in 0..len {
            probs.push(self.marginal_prob(set, idx));
        }
        JointTable::new_unchecked(axes, probs)
    }

    /// Shannon entropy of `X_S` in bits, computed from the marginal table.
    pub fn entropy_of(&self, set: SourceSet) -> f64 {
        self.joint_over(set).entropy().expect("marginal is normalized")
    }

    /// Min-entropy of `X_S` in bits. Exact for independent sources: the
    /// largest atom of a product is the product of the largest atoms.
    pub fn min_entropy_of(&self, set: SourceSet) -> f64 {
        set.iter().map(|i| self.sources[i].min_entropy()).sum::<f64>() + 0.0
    }
}

/// A joint distribution over an ordered list of finite axes.
///
/// Probabilities are stored in mixed-radix order (first axis most
/// significant). An empty axis list is the distribution of an empty tuple:
/// a single cell of probability 1.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    axes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(axes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let expected: usize = axes.iter().product();
        if probs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: probs.len(),
            });
        }
        if let Some(&bad) = probs.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::NonPositiveProbability { value: bad });
        }
        Ok(JointTable { axes, probs })
    }

    pub(crate) fn new_unchecked(axes: Vec<usize>, probs: Vec<f64>) -> Self {
        JointTable { axes, probs }
    }

    pub fn num_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let sum = self.sum();
        if (sum - 1.0).abs() > TABLE_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(())
    }

    /// Shannon entropy in bits: `-sum p log2 p` over positive cells.
    pub fn entropy(&self) -> Result<f64> {
        self.check_normalized()?;
        Ok(-self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * log2(p))
            .sum::<f64>()
            + 0.0)
    }

    /// Min-entropy in bits: `-log2 max p`.
    pub fn min_entropy(&self) -> Result<f64> {
        self.check_normalized()?;
        let max = self.probs.iter().cloned().fold(0.0, f64::max);
        Ok(-log2(max) + 0.0)
    }

    /// Exact marginal onto the listed axes, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<JointTable> {
        for &a in keep {
            if a >= self.axes.len() {
                return Err(Error::UnknownAxis { index: a });
            }
        }
        let mut seen = vec![false; self.axes.len()];
        for &a in keep {
            if seen[a] {
                return Err(Error::OverlappingAxes);
            }
            seen[a] = true;
        }
        let out_axes: Vec<usize> = keep.iter().map(|&a| self.axes[a]).collect();
        let out_len: usize = out_axes.iter().product();
        let mut out = vec![0.0; out_len];
        let mut coords = vec![0; self.axes.len()];
        for &p in &self.probs {
            let mut idx = 0;
            for &a in keep {
                idx = idx * self.axes[a] + coords[a];
            }
            out[idx] += p;
            for i in (0..coords.len()).rev() {
                coords[i] += 1;
                if coords[i] < self.axes[i] {
                    break;
                }
                coords[i] = 0;
            }
        }
        Ok(JointTable {
            axes: out_axes,
            probs: out,
        })
    }

    /// Conditional mutual information `I(A ; B | C)` in bits by direct
    /// summation, where `a`, `b`, `c` are disjoint lists of axis indices.
    ///
    /// Computed as `H(A,C) + H(B,C) - H(A,B,C) - H(C)` over exact marginals,
    /// clamped to zero to absorb `-1e-9`-scale float noise.
    pub fn conditional_mutual_information(
        &self,
        a: &[usize],
        b: &[usize],
        c: &[usize],
    ) -> Result<f64> {
        let mut seen = vec![false; self.axes.len()];
        for &x in a.iter().chain(b).chain(c) {
            if x >= self.axes.len() {
                return Err(Error::UnknownAxis { index: x });
            }
            if seen[x] {
                return Err(Error::OverlappingAxes);
            }
            seen[x] = true;
        }
        let ac: Vec<usize> = a.iter().chain(c).cloned().collect();
        let bc: Vec<usize> = b.iter().chain(c).cloned().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).cloned().collect();
        let h_ac = self.marginal(&ac)?.entropy()?;
        let h_bc = self.marginal(&bc)?.entropy()?;
        let h_abc = self.marginal(&abc)?.entropy()?;
        let h_c = self.marginal(c)?.entropy()?;
        let value = h_ac + h_bc - h_abc - h_c;
        debug_assert!(value > -1e-9, "CMI below numerical slack: {value}");
        Ok(value.max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn set(bits: &[usize]) -> SourceSet {
        SourceSet::from_indices(bits.iter().copied())
    }

    #[test]
    fn source_distribution_rejects_bad_input() {
        assert!(SourceDistribution::new(vec![]).is_err());
        assert!(SourceDistribution::new(vec![0.5, 0.0, 0.5]).is_err());
        assert!(SourceDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(SourceDistribution::new(vec![1.0]).is_ok());
    }

    #[test]
    fn entropy_examples() {
        let u4 = JointTable::new(vec![4], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(u4.entropy().unwrap(), 2.0, epsilon = 1e-12);
        let point = JointTable::new(vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(point.entropy().unwrap(), 0.0, epsilon = 1e-12);
        // Bern(0.3): value frozen from direct summation -0.3 log2 0.3 - 0.7 log2 0.7
        let b = SourceDistribution::bernoulli(0.3).unwrap();
        assert_abs_diff_eq!(b.entropy(), 0.8812908992306927, epsilon = 1e-12);
    }

    #[test]
    fn entropy_of_empty_subset_is_zero() {
        let d = ProductDistribution::new(vec![SourceDistribution::bernoulli(0.3).unwrap()]);
        assert_eq!(d.entropy_of(SourceSet::EMPTY), 0.0);
        assert_eq!(d.min_entropy_of(SourceSet::EMPTY), 0.0);
        assert_eq!(d.joint_over(SourceSet::EMPTY).probs(), &[1.0]);
    }

    #[test]
    fn min_entropy_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        assert_abs_diff_eq!(half.min_entropy(), 1.0, epsilon = 1e-12);
        let point = JointTable::new(vec![2], vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(point.min_entropy().unwrap(), 0.0, epsilon = 1e-12);
        // Bern(0.3): -log2 0.7
        let b = SourceDistribution::bernoulli(0.3).unwrap();
        assert_abs_diff_eq!(b.min_entropy(), 0.5145731728297583, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        let t = JointTable::new(vec![2], vec![0.5, 0.4]).unwrap();
        assert!(matches!(t.entropy(), Err(Error::NotNormalized { .. })));
        assert!(matches!(t.min_entropy(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn cmi_independent_output_is_zero() {
        // axes: (A, C, B) with B independent of the rest
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for c in 0..2 {
                for b in 0..2 {
                    probs[(a * 2 + c) * 2 + b] = 0.25 * 0.5;
                }
            }
        }
        let t = JointTable::new(vec![2, 2, 2], probs).unwrap();
        let i = t.conditional_mutual_information(&[0], &[2], &[1]).unwrap();
        assert_abs_diff_eq!(i, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cmi_identity_channel_is_one_bit() {
        // axes (A, B) with B = A, A ~ Bern(0.5); empty conditioning set
        let t = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let i = t.conditional_mutual_information(&[0], &[1], &[]).unwrap();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cmi_xor_is_one_bit() {
        // axes (X1, X2, Y) with Y = X1 xor X2, both uniform.
        // Brute-force joint table: each (x1, x2) has mass 1/4 on y = x1^x2.
        let mut probs = vec![0.0; 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                probs[(x1 * 2 + x2) * 2 + (x1 ^ x2)] = 0.25;
            }
        }
        let t = JointTable::new(vec![2, 2, 2], probs).unwrap();
        let i = t.conditional_mutual_information(&[0], &[2], &[1]).unwrap();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cmi_rejects_overlap_and_unknown_axes() {
        let t = JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(t.conditional_mutual_information(&[0], &[0], &[]).is_err());
        assert!(t.conditional_mutual_information(&[0], &[5], &[]).is_err());
    }

    #[test]
    fn marginal_examples() {
        // product Bern(0.3) x Bern(0.6), marginal onto the first source
        let d = ProductDistribution::new(vec![
            SourceDistribution::bernoulli(0.3).unwrap(),
            SourceDistribution::bernoulli(0.6).unwrap(),
        ]);
        let joint = d.joint_over(set(&[0, 1]));
        let m = joint.marginal(&[0]).unwrap();
        assert_abs_diff_eq!(m.probs()[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(m.probs()[1], 0.3, epsilon = 1e-12);
        // marginal onto the full axis list is the identity
        let full = joint.marginal(&[0, 1]).unwrap();
        assert_eq!(full.probs(), joint.probs());
        // uniform over {0,1}^2 onto the second axis
        let u = JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let m2 = u.marginal(&[1]).unwrap();
        assert_eq!(m2.probs(), &[0.5, 0.5]);
        assert!(u.marginal(&[3]).is_err());
    }

    #[test]
    fn projection_order_matches_packing() {
        // sizes (2, 3): source 1 most significant
        let sp = ProductSpace::new(vec![2, 3]);
        assert_eq!(sp.pack(&[1, 2]), 5);
        assert_eq!(sp.unpack(4), vec![1, 1]);
        assert_eq!(sp.project(&[1, 2], set(&[1])), 2);
        assert_eq!(sp.project(&[1, 2], set(&[0, 1])), 5);
        assert_eq!(sp.project(&[1, 2], SourceSet::EMPTY), 0);
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(sizes in proptest::collection::vec(1usize..5, 1..5)) {
            let sp = ProductSpace::new(sizes);
            for idx in 0..sp.len() {
                prop_assert_eq!(sp.pack(&sp.unpack(idx)), idx);
            }
        }

        #[test]
        fn independence_additivity(ps in proptest::collection::vec(0.05f64..0.95, 1..5)) {
            let d = ProductDistribution::new(
                ps.iter().map(|&p| SourceDistribution::bernoulli(p).unwrap()).collect(),
            );
            let n = d.num_sources();
            for mask in 0..1u32 << n {
                let s = SourceSet(mask);
                let joint_entropy = d.entropy_of(s);
                let sum: f64 = s.iter().map(|i| d.source(i).entropy()).sum();
                prop_assert!((joint_entropy - sum).abs() < 1e-9);
                // min-entropy never exceeds Shannon entropy
                let h_inf = d.joint_over(s).min_entropy().unwrap();
                prop_assert!(h_inf <= joint_entropy + 1e-9);
            }
        }

        #[test]
        fn cmi_nonnegative_and_zero_for_constant(ps in proptest::collection::vec(0.1f64..0.9, 2..4)) {
            // table over (X1.., Y) with Y constant
            let d = ProductDistribution::new(
                ps.iter().map(|&p| SourceDistribution::bernoulli(p).unwrap()).collect(),
            );
            let n = d.num_sources();
            let base = d.joint_over(SourceSet::full(n));
            let mut axes = base.axes().to_vec();
            axes.push(1);
            let t = JointTable::new(axes, base.probs().to_vec()).unwrap();
            let y = n;
            let i = t.conditional_mutual_information(&[0], &[y], &(1..n).collect::<Vec<_>>()).unwrap();
            prop_assert!(i >= 0.0);
            prop_assert!(i.abs() < 1e-9);
        }
    }
}
