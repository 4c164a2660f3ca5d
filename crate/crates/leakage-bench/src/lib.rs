//! Shared fixtures for the benchmarks: seeded systems from the experiment
//! sampler so runs are comparable across machines.

use leakage_core::experiment::{ExperimentConfig, SystemSampler};
use leakage_core::system::SystemSpec;

/// The `trial`-th system of a default-protocol batch with the given seed.
pub fn sampled_system(seed: u64, trial: usize) -> SystemSpec {
    let config = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    let sampler = SystemSampler::new(config).expect("default config is valid");
    sampler.sample(&mut sampler.trial_rng(trial))
}
