//! Shared fixtures for unit tests: three tiny two-source systems with
//! hand-checked leakage values.

use crate::mechanism::PartitionMechanism;
use crate::prob::{ProductDistribution, SourceDistribution};
use crate::system::{SourceSet, SystemSpec, UserSpec};

pub fn uniform_binary_sources(n: usize) -> ProductDistribution {
    ProductDistribution::new(
        (0..n)
            .map(|_| SourceDistribution::bernoulli(0.5).unwrap())
            .collect(),
    )
}

pub fn system_with_p(users: Vec<UserSpec>, p: SourceSet) -> SystemSpec {
    SystemSpec::new(uniform_binary_sources(2), users, p)
}

pub fn t1_users() -> Vec<UserSpec> {
    // one user knowing source 2, must decode source 1, nothing left to guess
    vec![UserSpec::new(
        SourceSet::singleton(1),
        SourceSet::singleton(0),
        0.0,
    )]
}

/// Two uniform bits; user knows x2 and must decode x1; adversary knows x2.
pub fn t1_system() -> SystemSpec {
    system_with_p(t1_users(), SourceSet::singleton(1))
}

/// Same user as T1 but the adversary knows nothing.
pub fn t2_system() -> SystemSpec {
    system_with_p(t1_users(), SourceSet::EMPTY)
}

/// Two uniform bits; user has no side information, must decode x1, and wants
/// half a bit of gain on x2; adversary knows x1.
pub fn t3_system() -> SystemSpec {
    let users = vec![UserSpec::new(
        SourceSet::EMPTY,
        SourceSet::singleton(0),
        0.5,
    )];
    system_with_p(users, SourceSet::singleton(0))
}

/// The designed partition for T3: {00,01}, {10}, {11}.
pub fn t3_cells() -> PartitionMechanism {
    PartitionMechanism::new(vec![vec![0, 1], vec![2], vec![3]], 4).unwrap()
}
