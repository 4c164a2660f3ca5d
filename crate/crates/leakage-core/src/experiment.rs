//! Randomized evaluation harness: sample systems, run both lower bounds and
//! the mechanism designer on each, and aggregate the achieved-to-bound
//! ratios.
//!
//! Sampling follows a fixed protocol per trial: Bernoulli parameters for the
//! sources, a random digraph whose in-neighborhoods become the users' side
//! information, fractional gain thresholds scaled by each guess set's
//! min-entropy, and an adversary set drawn uniformly among the small
//! subsets. Trials run on independent ChaCha streams split off one seed, so
//! the batch is order-independent, parallelizes freely, and reproduces
//! byte-identically from `(config, seed)`.

use crate::digraph::{catalog, Digraph};
use crate::error::{Error, Result};
use crate::graph::clique_lower_bound;
use crate::greedy::design_mechanism;
use crate::polymatroid::polymatroid_lower_bound;
use crate::prob::{ProductDistribution, SourceDistribution};
use crate::system::{SourceSet, SystemSpec, UserSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Per-trial tolerance when asserting the bounds stay below the achieved
/// leakage.
pub const SOUNDNESS_SLACK: f64 = 1e-6;
/// Ratios within this of 1 count as exactly optimal.
pub const RATIO_UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DigraphMode {
    /// Uniform over the nonisomorphic catalog.
    #[serde(rename = "nonisomorphic-catalog")]
    NonisomorphicCatalog,
    /// Every arc an independent fair coin; cheaper, different distribution.
    #[serde(rename = "labeled-random")]
    LabeledRandom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub n: usize,
    pub m: usize,
    /// Per-source alphabet size; 2 gives Bernoulli sources.
    pub alphabet: usize,
    pub seed: u64,
    /// Open interval the Bernoulli parameters are drawn from.
    pub p_range: (f64, f64),
    /// Open interval the fractional thresholds are drawn from.
    pub d_fraction_range: (f64, f64),
    /// Cap on the adversary's known-set size.
    pub max_adversary_side_info: usize,
    pub digraph_mode: DigraphMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 500,
            n: 5,
            m: 5,
            alphabet: 2,
            seed: 42,
            p_range: (0.0, 1.0),
            d_fraction_range: (0.0, 1.0),
            max_adversary_side_info: 2,
            digraph_mode: DigraphMode::NonisomorphicCatalog,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n == 0 || self.n > 8 {
            return Err(Error::InvalidConfig(
                "source count must lie in 1..=8".into(),
            ));
        }
        if self.m != self.n {
            return Err(Error::InvalidConfig(
                "user count must equal source count: users are digraph vertices".into(),
            ));
        }
        if self.alphabet < 2 {
            return Err(Error::InvalidConfig("alphabet must be at least 2".into()));
        }
        for (lo, hi) in [self.p_range, self.d_fraction_range] {
            if !(0.0..1.0).contains(&lo) || !(lo..=1.0).contains(&hi) || lo >= hi {
                return Err(Error::InvalidConfig(
                    "ranges must be sub-intervals of (0, 1)".into(),
                ));
            }
        }
        if self.max_adversary_side_info > self.n {
            return Err(Error::InvalidConfig(
                "adversary side-information cap exceeds the source count".into(),
            ));
        }
        Ok(())
    }
}

/// Seeded sampler with the digraph catalog built once up front.
pub struct SystemSampler {
    config: ExperimentConfig,
    graphs: Option<Vec<Digraph>>,
    /// All admissible adversary sets, ordered by size then mask.
    adversary_choices: Vec<SourceSet>,
}

impl SystemSampler {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let graphs = match config.digraph_mode {
            DigraphMode::NonisomorphicCatalog => Some(catalog(config.n)?),
            DigraphMode::LabeledRandom => None,
        };
        let mut adversary_choices = Vec::new();
        for size in 0..=config.max_adversary_side_info {
            let mut of_size: Vec<SourceSet> = (0u32..1 << config.n)
                .map(SourceSet)
                .filter(|s| s.len() == size)
                .collect();
            of_size.sort();
            adversary_choices.extend(of_size);
        }
        Ok(SystemSampler {
            config,
            graphs,
            adversary_choices,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// The independent ChaCha stream for one trial.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(trial as u64);
        rng
    }

    fn open_unit(&self, rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
        // resample the measure-zero endpoints so the interval stays open
        loop {
            let v = rng.gen_range(lo..hi);
            if v > lo {
                return v;
            }
        }
    }

    /// One system under the generation protocol. Always validates.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> SystemSpec {
        let n = self.config.n;
        let sources: Vec<SourceDistribution> = (0..n)
            .map(|_| {
                if self.config.alphabet == 2 {
                    SourceDistribution::bernoulli(self.open_unit(rng, self.config.p_range))
                        .expect("open-interval parameter")
                } else {
                    // larger alphabets: normalized positive weights
                    let w: Vec<f64> = (0..self.config.alphabet)
                        .map(|_| self.open_unit(rng, self.config.p_range))
                        .collect();
                    let total: f64 = w.iter().sum();
                    SourceDistribution::new(w.iter().map(|x| x / total).collect())
                        .expect("positive weights normalize")
                }
            })
            .collect();
        let sources = ProductDistribution::new(sources);
        let digraph = match &self.graphs {
            Some(graphs) => graphs[rng.gen_range(0..graphs.len())],
            None => Digraph {
                n,
                arcs: rng.gen_range(0..1u32 << Digraph::num_arc_slots(n)),
            },
        };
        let users: Vec<UserSpec> = (0..self.config.m)
            .map(|i| {
                let side_info = digraph.in_neighbors(i);
                let must_decode = SourceSet::singleton(i);
                let guess = side_info.union(must_decode).complement(n);
                let fraction = self.open_unit(rng, self.config.d_fraction_range);
                let threshold = fraction * sources.min_entropy_of(guess);
                UserSpec::new(side_info, must_decode, threshold)
            })
            .collect();
        let adversary =
            self.adversary_choices[rng.gen_range(0..self.adversary_choices.len())];
        SystemSpec::new(sources, users, adversary)
    }
}

/// Bounds, achieved leakage, and their ratio for one system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub theorem1_bits: f64,
    pub theorem2_bits: f64,
    pub alg1_bits: f64,
    #[serde(rename = "R")]
    pub ratio: f64,
}

/// Cumulative ratio buckets (each includes the exactly-optimal trials), plus
/// the open top bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CumulativeBuckets {
    pub eq_1: usize,
    pub lt_1_05: usize,
    pub lt_1_10: usize,
    pub lt_1_20: usize,
    pub ge_1_20: usize,
}

/// The same trials as a disjoint partition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointBuckets {
    pub eq_1: usize,
    pub gt_1_lt_1_05: usize,
    pub from_1_05_lt_1_10: usize,
    pub from_1_10_lt_1_20: usize,
    pub ge_1_20: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceCounts {
    pub thm1_gt_thm2: usize,
    pub thm2_gt_thm1: usize,
    pub equal: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub buckets_cumulative: CumulativeBuckets,
    pub buckets_disjoint: DisjointBuckets,
    pub dominance: DominanceCounts,
}

/// Evaluates both bounds and the designed mechanism on one system.
pub fn evaluate_system(trial: usize, spec: &SystemSpec) -> Result<TrialRecord> {
    let theorem1_bits = clique_lower_bound(spec)?.bits;
    let theorem2_bits = polymatroid_lower_bound(spec)?.bits;
    let alg1_bits = design_mechanism(spec)?.final_leakage_bits;
    let bound = theorem1_bits.max(theorem2_bits);
    let ratio = if bound.abs() <= RATIO_UNIT_TOL && alg1_bits.abs() <= RATIO_UNIT_TOL {
        1.0
    } else if bound <= 0.0 {
        f64::INFINITY
    } else {
        alg1_bits / bound
    };
    Ok(TrialRecord {
        trial,
        theorem1_bits,
        theorem2_bits,
        alg1_bits,
        ratio,
    })
}

/// Runs the full batch in parallel. Any trial whose achieved leakage falls
/// below a bound beyond [`SOUNDNESS_SLACK`] aborts the batch: the bounds are
/// converses, so that is an implementation bug, never a valid outcome.
pub fn run_batch(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let sampler = SystemSampler::new(config.clone())?;
    let trials: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampler.trial_rng(t);
            let spec = sampler.sample(&mut rng);
            debug_assert!(spec.validate().is_empty());
            evaluate_system(t, &spec)
        })
        .collect::<Result<_>>()?;
    for r in &trials {
        let bound = r.theorem1_bits.max(r.theorem2_bits);
        if r.alg1_bits < bound - SOUNDNESS_SLACK {
            return Err(Error::SoundnessViolation {
                trial: r.trial,
                achieved_bits: r.alg1_bits,
                bound_bits: bound,
            });
        }
    }
    Ok(assemble_report(config.clone(), trials))
}

pub fn assemble_report(config: ExperimentConfig, trials: Vec<TrialRecord>) -> ExperimentReport {
    let mut cumulative = CumulativeBuckets::default();
    let mut disjoint = DisjointBuckets::default();
    let mut dominance = DominanceCounts::default();
    for r in &trials {
        let ratio = r.ratio;
        let unit = (ratio - 1.0).abs() <= RATIO_UNIT_TOL;
        if unit {
            cumulative.eq_1 += 1;
        }
        if ratio < 1.05 {
            cumulative.lt_1_05 += 1;
        }
        if ratio < 1.10 {
            cumulative.lt_1_10 += 1;
        }
        if ratio < 1.20 {
            cumulative.lt_1_20 += 1;
        } else {
            cumulative.ge_1_20 += 1;
        }
        if unit {
            disjoint.eq_1 += 1;
        } else if ratio < 1.05 {
            disjoint.gt_1_lt_1_05 += 1;
        } else if ratio < 1.10 {
            disjoint.from_1_05_lt_1_10 += 1;
        } else if ratio < 1.20 {
            disjoint.from_1_10_lt_1_20 += 1;
        } else {
            disjoint.ge_1_20 += 1;
        }
        if (r.theorem1_bits - r.theorem2_bits).abs() <= RATIO_UNIT_TOL {
            dominance.equal += 1;
        } else if r.theorem1_bits > r.theorem2_bits {
            dominance.thm1_gt_thm2 += 1;
        } else {
            dominance.thm2_gt_thm1 += 1;
        }
    }
    ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        trials,
        buckets_cumulative: cumulative,
        buckets_disjoint: disjoint,
        dominance,
    }
}

impl ExperimentReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Bucket-summary CSV: comment lines carrying config, seed, and version,
    /// a header row, and (when any trials ran) one cumulative-count row.
    pub fn to_csv_string(&self) -> String {
        let c = &self.config;
        let mode = match c.digraph_mode {
            DigraphMode::NonisomorphicCatalog => "nonisomorphic-catalog",
            DigraphMode::LabeledRandom => "labeled-random",
        };
        let mut out = String::new();
        out.push_str(&format!("# leakage-lab {} ratio buckets (cumulative)\n", self.version));
        out.push_str(&format!(
            "# seed={} trials={} n={} m={} alphabet={} max_p={} digraphs={} p_range=({},{}) d_range=({},{})\n",
            c.seed, c.trials, c.n, c.m, c.alphabet, c.max_adversary_side_info, mode,
            c.p_range.0, c.p_range.1, c.d_fraction_range.0, c.d_fraction_range.1,
        ));
        out.push_str("ratio_R,=1,<1.05,<1.1,<1.2,>=1.2\n");
        if !self.trials.is_empty() {
            let b = &self.buckets_cumulative;
            out.push_str(&format!(
                "systems,{},{},{},{},{}\n",
                b.eq_1, b.lt_1_05, b.lt_1_10, b.lt_1_20, b.ge_1_20
            ));
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let body = self.to_json_string()?;
        write_file(path, body.as_bytes())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_csv_string().as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;
    use approx::assert_abs_diff_eq;

    fn small_config(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            trials,
            n: 3,
            m: 3,
            seed: 7,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            m: 4,
            ..ExperimentConfig::default()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            p_range: (0.2, 0.2),
            ..ExperimentConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn in_neighbor_edge_cases() {
        // empty digraph: no side information, guess everything else
        let empty = Digraph { n: 5, arcs: 0 };
        for i in 0..5 {
            assert_eq!(empty.in_neighbors(i), SourceSet::EMPTY);
        }
        // complete digraph: full side information, empty guess set
        let full = Digraph {
            n: 5,
            arcs: (1u32 << Digraph::num_arc_slots(5)) - 1,
        };
        for i in 0..5 {
            assert_eq!(full.in_neighbors(i), SourceSet::singleton(i).complement(5));
        }
    }

    #[test]
    fn sampled_systems_always_validate() {
        let sampler = SystemSampler::new(small_config(1)).unwrap();
        for t in 0..50 {
            let mut rng = sampler.trial_rng(t);
            let spec = sampler.sample(&mut rng);
            assert!(spec.validate().is_empty(), "trial {t} failed validation");
        }
    }

    #[test]
    fn sampling_is_deterministic_across_runs() {
        let sampler1 = SystemSampler::new(small_config(1)).unwrap();
        let sampler2 = SystemSampler::new(small_config(1)).unwrap();
        for t in 0..10 {
            let a = sampler1.sample(&mut sampler1.trial_rng(t));
            let b = sampler2.sample(&mut sampler2.trial_rng(t));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn seed_42_regression_fixture() {
        // frozen snapshot of the first default-config system
        let sampler = SystemSampler::new(ExperimentConfig::default()).unwrap();
        let spec = sampler.sample(&mut sampler.trial_rng(0));
        let json = crate::fileio::system_to_json(&spec).unwrap();
        let expected = include_str!("../tests/data/seed42_trial0.json");
        assert_eq!(json.trim(), expected.trim());
    }

    #[test]
    fn fixture_trials_match_hand_values() {
        let t1 = evaluate_system(0, &t1_system()).unwrap();
        assert_abs_diff_eq!(t1.ratio, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t1.alg1_bits, 1.0, epsilon = 1e-9);
        let t3 = evaluate_system(0, &t3_system()).unwrap();
        assert_abs_diff_eq!(t3.theorem1_bits, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t3.theorem2_bits, 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(t3.ratio, 1.1699250014423124, epsilon = 1e-6);
    }

    #[test]
    fn bucket_rules() {
        let config = small_config(6);
        let mk = |trial, ratio, t1: f64, t2: f64| TrialRecord {
            trial,
            theorem1_bits: t1,
            theorem2_bits: t2,
            alg1_bits: ratio * t1.max(t2),
            ratio,
        };
        let report = assemble_report(
            config,
            vec![
                mk(0, 1.0, 1.0, 0.5),
                mk(1, 1.0 + 5e-10, 1.0, 1.0),
                mk(2, 1.04, 0.5, 1.0),
                mk(3, 1.07, 1.0, 0.5),
                mk(4, 1.15, 1.0, 0.5),
                mk(5, 1.30, 1.0, 0.5),
            ],
        );
        let c = &report.buckets_cumulative;
        assert_eq!((c.eq_1, c.lt_1_05, c.lt_1_10, c.lt_1_20, c.ge_1_20), (2, 3, 4, 5, 1));
        let d = &report.buckets_disjoint;
        assert_eq!(
            (d.eq_1, d.gt_1_lt_1_05, d.from_1_05_lt_1_10, d.from_1_10_lt_1_20, d.ge_1_20),
            (2, 1, 1, 1, 1)
        );
        let total = d.eq_1 + d.gt_1_lt_1_05 + d.from_1_05_lt_1_10 + d.from_1_10_lt_1_20 + d.ge_1_20;
        assert_eq!(total, report.trials.len());
        assert_eq!(report.dominance.thm1_gt_thm2, 4);
        assert_eq!(report.dominance.thm2_gt_thm1, 1);
        assert_eq!(report.dominance.equal, 1);
    }

    #[test]
    fn small_batch_is_sound_and_deterministic() {
        let config = small_config(8);
        let a = run_batch(&config).unwrap();
        let b = run_batch(&config).unwrap();
        assert_eq!(
            a.to_json_string().unwrap(),
            b.to_json_string().unwrap()
        );
        for r in &a.trials {
            assert!(r.ratio >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn csv_shapes() {
        let config = small_config(3);
        let empty = assemble_report(config.clone(), vec![]).to_csv_string();
        let lines: Vec<&str> = empty.trim_end().lines().collect();
        assert_eq!(lines.len(), 3); // two comment lines + header only
        assert_eq!(lines[2], "ratio_R,=1,<1.05,<1.1,<1.2,>=1.2");

        let report = run_batch(&config).unwrap();
        let csv = report.to_csv_string();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("systems,"));
        assert_eq!(report.trials.len(), 3);
    }
}
