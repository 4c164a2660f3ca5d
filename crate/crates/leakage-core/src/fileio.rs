//! On-disk JSON formats.
//!
//! System files name sources by 1-based index:
//!
//! ```json
//! {"sources":[{"pmf":[0.5,0.5]},{"pmf":[0.5,0.5]}],
//!  "users":[{"A":[2],"W":[1],"d":0.0}],
//!  "P":[2]}
//! ```
//!
//! Mechanism files are either deterministic cells of packed realization
//! indices (0-based, source 1 most significant) or an explicit kernel:
//!
//! ```json
//! {"cells":[[0,1],[2],[3]]}
//! {"outputs":2,"kernel":[[0.5,0.5],[1.0,0.0]]}
//! ```

use crate::error::{Error, Result};
use crate::mechanism::{Mechanism, PartitionMechanism};
use crate::prob::{ProductDistribution, SourceDistribution};
use crate::system::{SourceSet, SystemSpec, UserSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceFile {
    pub pmf: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UserFile {
    #[serde(rename = "A")]
    pub side_info: Vec<usize>,
    #[serde(rename = "W")]
    pub must_decode: Vec<usize>,
    #[serde(rename = "d")]
    pub gain_threshold: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub sources: Vec<SourceFile>,
    pub users: Vec<UserFile>,
    #[serde(rename = "P")]
    pub adversary_side_info: Vec<usize>,
}

fn one_based_set(indices: &[usize], n: usize, what: &str) -> Result<SourceSet> {
    let mut set = SourceSet::EMPTY;
    for &i in indices {
        if i == 0 || i > n {
            return Err(Error::InvalidConfig(format!(
                "{what} lists source {i}, outside 1..={n}"
            )));
        }
        set = set.union(SourceSet::singleton(i - 1));
    }
    Ok(set)
}

impl SystemFile {
    pub fn into_spec(self) -> Result<SystemSpec> {
        let sources: Vec<SourceDistribution> = self
            .sources
            .into_iter()
            .map(|s| SourceDistribution::new(s.pmf))
            .collect::<Result<_>>()?;
        let n = sources.len();
        let users = self
            .users
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let label = format!("user {}", k + 1);
                Ok(UserSpec::new(
                    one_based_set(&u.side_info, n, &label)?,
                    one_based_set(&u.must_decode, n, &label)?,
                    u.gain_threshold,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = one_based_set(&self.adversary_side_info, n, "P")?;
        Ok(SystemSpec::new(ProductDistribution::new(sources), users, p))
    }

    pub fn from_spec(spec: &SystemSpec) -> Self {
        SystemFile {
            sources: spec
                .sources()
                .sources()
                .iter()
                .map(|s| SourceFile {
                    pmf: s.pmf().to_vec(),
                })
                .collect(),
            users: spec
                .users()
                .iter()
                .map(|u| UserFile {
                    side_info: u.side_info.to_one_based(),
                    must_decode: u.must_decode.to_one_based(),
                    gain_threshold: u.gain_threshold,
                })
                .collect(),
            adversary_side_info: spec.adversary_known().to_one_based(),
        }
    }
}

pub fn system_from_json(json: &str) -> Result<SystemSpec> {
    let file: SystemFile = serde_json::from_str(json)?;
    file.into_spec()
}

pub fn system_to_json(spec: &SystemSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SystemFile::from_spec(spec))?)
}

pub fn load_system(path: &Path) -> Result<SystemSpec> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    system_from_json(&body)
}

/// Either a deterministic partition or an explicit kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MechanismFile {
    Cells { cells: Vec<Vec<usize>> },
    Kernel { outputs: usize, kernel: Vec<Vec<f64>> },
}

impl MechanismFile {
    pub fn into_mechanism(self, num_realizations: usize) -> Result<Mechanism> {
        match self {
            MechanismFile::Cells { cells } => {
                Ok(PartitionMechanism::new(cells, num_realizations)?.to_mechanism())
            }
            MechanismFile::Kernel { outputs, kernel } => {
                if kernel.len() != num_realizations {
                    return Err(Error::AlphabetMismatch {
                        expected: num_realizations,
                        actual: kernel.len(),
                    });
                }
                Mechanism::new(outputs, kernel)
            }
        }
    }

    pub fn from_partition(partition: &PartitionMechanism) -> Self {
        MechanismFile::Cells {
            cells: partition.cells().to_vec(),
        }
    }
}

pub fn mechanism_from_json(json: &str, num_realizations: usize) -> Result<Mechanism> {
    let file: MechanismFile = serde_json::from_str(json)?;
    file.into_mechanism(num_realizations)
}

pub fn load_mechanism(path: &Path, num_realizations: usize) -> Result<Mechanism> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    mechanism_from_json(&body, num_realizations)
}
