//! Privacy-utility analysis for broadcast disclosure of independent discrete
//! sources.
//!
//! A data curator holds `n` independent sources and broadcasts a (possibly
//! randomized) function of them. Legitimate users must perfectly reconstruct
//! some sources and gain a minimum guessing advantage on the rest; an
//! eavesdropping adversary with its own side information should learn as
//! little as possible, measured by maximal leakage: the worst-case
//! multiplicative gain in its single-guess success probability over any
//! function of the sources it does not know.
//!
//! The crate evaluates leakage and utility for arbitrary discrete
//! mechanisms ([`mechanism`]), computes two converse lower bounds on the
//! achievable leakage — the clique number of a confusion graph ([`graph`])
//! and a linear program over polymatroidal rank functions ([`polymatroid`])
//! — synthesizes deterministic mechanisms by greedy agglomerative merging
//! ([`greedy`]), and reproduces a randomized end-to-end evaluation of all
//! three ([`experiment`]).
//!
//! All information quantities are in bits.

pub mod bitset;
pub mod digraph;
mod error;
pub mod experiment;
pub mod fileio;
pub mod graph;
pub mod greedy;
pub mod mechanism;
pub mod polymatroid;
pub mod prob;
pub mod simplex;
pub mod system;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use mechanism::{Mechanism, PartitionMechanism};
pub use prob::{JointTable, ProductDistribution, ProductSpace, SourceDistribution};
pub use system::{SourceSet, SystemSpec, UserSpec, Violation, ViolationCode};
