//! The disclosure system: independent sources, users with side information
//! and decoding demands, and an adversary with side information.
//!
//! A system bundles the source product distribution, one [`UserSpec`] per
//! user, and the adversary's known-source set `P`. Everything else is
//! derived: the adversary's unknown set `Q` is the complement of `P`, and a
//! user's guess set `G_i` is what remains after removing its side
//! information `A_i` and its must-decode set `W_i`.
//!
//! Sets of sources are bitmasks ([`SourceSet`]); source indices are 0-based
//! internally and 1-based in files and diagnostics.

use serde::{Deserialize, Serialize};

use crate::prob::ProductDistribution;

/// A subset of the sources `{0, .., n-1}` as a 32-bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SourceSet(pub u32);

impl SourceSet {
    pub const EMPTY: SourceSet = SourceSet(0);

    pub fn full(n: usize) -> SourceSet {
        debug_assert!(n <= 32);
        if n == 32 {
            SourceSet(u32::MAX)
        } else {
            SourceSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> SourceSet {
        SourceSet(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> SourceSet {
        let mut mask = 0u32;
        for i in indices {
            mask |= 1 << i;
        }
        SourceSet(mask)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: SourceSet) -> SourceSet {
        SourceSet(self.0 | other.0)
    }

    pub fn intersect(self, other: SourceSet) -> SourceSet {
        SourceSet(self.0 & other.0)
    }

    pub fn minus(self, other: SourceSet) -> SourceSet {
        SourceSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> SourceSet {
        SourceSet::full(n).minus(self)
    }

    pub fn is_subset_of(self, other: SourceSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint_from(self, other: SourceSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Ascending member indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// 1-based member list, for diagnostics and file output.
    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl std::fmt::Display for SourceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// One legitimate user: known sources `A`, must-decode sources `W`, and the
/// guessing-gain threshold (bits) for everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct UserSpec {
    pub side_info: SourceSet,
    pub must_decode: SourceSet,
    pub gain_threshold: f64,
}

impl UserSpec {
    pub fn new(side_info: SourceSet, must_decode: SourceSet, gain_threshold: f64) -> Self {
        UserSpec {
            side_info,
            must_decode,
            gain_threshold,
        }
    }

    /// The guess set `G = [n] \ A \ W`; a user is interested in every source
    /// it does not already know, so there is no fourth category.
    pub fn guess_set(&self, n: usize) -> SourceSet {
        self.side_info.union(self.must_decode).complement(n)
    }
}

/// Machine-readable validation failure codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    NoSources,
    NoUsers,
    SourceIndexOutOfRange,
    AdversaryIndexOutOfRange,
    MustDecodeOverlapsSideInformation,
    ThresholdNegative,
    ThresholdExceedsMinEntropy,
}

/// A single validation failure. `user` is 1-based when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub user: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Derived set decomposition for one user, split along the adversary's
/// known/unknown partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserSets {
    pub guess: SourceSet,
    pub must_decode_in_q: SourceSet,
    pub side_info_in_q: SourceSet,
    pub must_decode_in_p: SourceSet,
    pub side_info_in_p: SourceSet,
}

/// The full disclosure system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    sources: ProductDistribution,
    users: Vec<UserSpec>,
    adversary_side_info: SourceSet,
}

impl SystemSpec {
    pub fn new(
        sources: ProductDistribution,
        users: Vec<UserSpec>,
        adversary_side_info: SourceSet,
    ) -> Self {
        SystemSpec {
            sources,
            users,
            adversary_side_info,
        }
    }

    pub fn sources(&self) -> &ProductDistribution {
        &self.sources
    }

    pub fn space(&self) -> &crate::prob::ProductSpace {
        self.sources.space()
    }

    pub fn num_sources(&self) -> usize {
        self.sources.num_sources()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[UserSpec] {
        &self.users
    }

    pub fn user(&self, i: usize) -> &UserSpec {
        &self.users[i]
    }

    /// The adversary's known set `P`.
    pub fn adversary_known(&self) -> SourceSet {
        self.adversary_side_info
    }

    /// The adversary's unknown set `Q = [n] \ P`, always derived.
    pub fn adversary_unknown(&self) -> SourceSet {
        self.adversary_side_info.complement(self.num_sources())
    }

    pub fn guess_set(&self, user: usize) -> SourceSet {
        self.users[user].guess_set(self.num_sources())
    }

    /// Exact set arithmetic for one user against the adversary partition.
    pub fn derived_sets(&self, user: usize) -> UserSets {
        let n = self.num_sources();
        let q = self.adversary_unknown();
        let p = self.adversary_known();
        let u = &self.users[user];
        UserSets {
            guess: u.guess_set(n),
            must_decode_in_q: u.must_decode.intersect(q),
            side_info_in_q: u.side_info.intersect(q),
            must_decode_in_p: u.must_decode.intersect(p),
            side_info_in_p: u.side_info.intersect(p),
        }
    }

    /// Checks every structural invariant; an empty result means the system
    /// is well formed. Pure and idempotent; messages use 1-based indices.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.num_sources();
        if n == 0 {
            out.push(Violation {
                code: ViolationCode::NoSources,
                user: None,
                message: "system has no sources".into(),
            });
            return out;
        }
        if self.users.is_empty() {
            out.push(Violation {
                code: ViolationCode::NoUsers,
                user: None,
                message: "system has no users".into(),
            });
        }
        let all = SourceSet::full(n);
        if !self.adversary_side_info.is_subset_of(all) {
            out.push(Violation {
                code: ViolationCode::AdversaryIndexOutOfRange,
                user: None,
                message: format!(
                    "adversary side information {} references sources beyond {n}",
                    self.adversary_side_info
                ),
            });
        }
        for (idx, u) in self.users.iter().enumerate() {
            let user_no = idx + 1;
            if !u.side_info.union(u.must_decode).is_subset_of(all) {
                out.push(Violation {
                    code: ViolationCode::SourceIndexOutOfRange,
                    user: Some(user_no),
                    message: format!("user {user_no} references sources beyond {n}"),
                });
                continue;
            }
            if !u.must_decode.is_disjoint_from(u.side_info) {
                out.push(Violation {
                    code: ViolationCode::MustDecodeOverlapsSideInformation,
                    user: Some(user_no),
                    message: format!(
                        "user {user_no}: must-decode set {} overlaps side information {}",
                        u.must_decode, u.side_info
                    ),
                });
            }
            if u.gain_threshold < 0.0 {
                out.push(Violation {
                    code: ViolationCode::ThresholdNegative,
                    user: Some(user_no),
                    message: format!(
                        "user {user_no}: gain threshold {} is negative",
                        u.gain_threshold
                    ),
                });
            }
            let ceiling = self.sources.min_entropy_of(u.guess_set(n));
            if u.gain_threshold > ceiling + 1e-9 {
                out.push(Violation {
                    code: ViolationCode::ThresholdExceedsMinEntropy,
                    user: Some(user_no),
                    message: format!(
                        "user {user_no}: gain threshold {} bits exceeds the min-entropy {} bits of its guess set {}",
                        u.gain_threshold,
                        ceiling,
                        u.guess_set(n)
                    ),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::SourceDistribution;
    use proptest::prelude::*;

    fn binary_spec(n: usize, users: Vec<UserSpec>, p: SourceSet) -> SystemSpec {
        let sources = ProductDistribution::new(
            (0..n)
                .map(|_| SourceDistribution::bernoulli(0.5).unwrap())
                .collect(),
        );
        SystemSpec::new(sources, users, p)
    }

    #[test]
    fn empty_guess_set_with_zero_threshold_is_ok() {
        // A = {2}, W = {1} on n = 2 leaves G empty; d = 0 is the only option
        let u = UserSpec::new(SourceSet::singleton(1), SourceSet::singleton(0), 0.0);
        let spec = binary_spec(2, vec![u], SourceSet::singleton(1));
        assert!(spec.validate().is_empty());
        assert_eq!(spec.guess_set(0), SourceSet::EMPTY);
    }

    #[test]
    fn threshold_above_min_entropy_is_flagged() {
        // G = {2} holds one Bern(0.5) source, so the ceiling is 1 bit
        let u = UserSpec::new(SourceSet::EMPTY, SourceSet::singleton(0), 1.5);
        let spec = binary_spec(2, vec![u], SourceSet::EMPTY);
        let vs = spec.validate();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].code, ViolationCode::ThresholdExceedsMinEntropy);
        assert_eq!(vs[0].user, Some(1));
    }

    #[test]
    fn overlap_between_w_and_a_is_flagged() {
        let u = UserSpec::new(SourceSet::singleton(0), SourceSet::singleton(0), 0.0);
        let spec = binary_spec(2, vec![u], SourceSet::EMPTY);
        let vs = spec.validate();
        assert!(vs
            .iter()
            .any(|v| v.code == ViolationCode::MustDecodeOverlapsSideInformation));
    }

    #[test]
    fn validate_is_idempotent() {
        let u = UserSpec::new(SourceSet::singleton(1), SourceSet::singleton(0), 0.0);
        let spec = binary_spec(2, vec![u], SourceSet::EMPTY);
        assert_eq!(spec.validate(), spec.validate());
    }

    #[test]
    fn derived_set_examples() {
        // n=5, P={1,2} (1-based) -> Q={3,4,5}
        let spec = binary_spec(5, vec![], SourceSet::from_indices([0, 1]));
        assert_eq!(
            spec.adversary_unknown(),
            SourceSet::from_indices([2, 3, 4])
        );
        // A={2}, W={1}, n=2 -> G empty
        let u = UserSpec::new(SourceSet::singleton(1), SourceSet::singleton(0), 0.0);
        assert_eq!(u.guess_set(2), SourceSet::EMPTY);
        // A={}, W={1}, n=2 -> G={2}
        let u2 = UserSpec::new(SourceSet::EMPTY, SourceSet::singleton(0), 0.0);
        assert_eq!(u2.guess_set(2), SourceSet::singleton(1));
    }

    proptest! {
        #[test]
        fn partition_identities(a_bits in 0u32..32, w_bits in 0u32..32, p_bits in 0u32..32) {
            let n = 5;
            let side = SourceSet(a_bits);
            let w = SourceSet(w_bits).minus(side);
            let u = UserSpec::new(side, w, 0.0);
            let spec = binary_spec(n, vec![u], SourceSet(p_bits));
            let q = spec.adversary_unknown();
            let p = spec.adversary_known();
            let d = spec.derived_sets(0);
            let g = d.guess;
            if g.is_subset_of(q) {
                // P and G disjoint, and both halves decompose exactly
                prop_assert!(p.is_disjoint_from(g));
                prop_assert_eq!(d.must_decode_in_p.union(d.side_info_in_p), p);
                prop_assert_eq!(d.must_decode_in_q.union(d.side_info_in_q).union(g), q);
            }
            // A, W, G always partition the ground set
            let u = spec.user(0);
            prop_assert_eq!(u.side_info.union(u.must_decode).union(g), SourceSet::full(n));
        }
    }
}
