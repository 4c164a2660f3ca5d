//! Command-line front end.
//!
//! Subcommands: `bounds` (both leakage lower bounds for a system), `design`
//! (greedy mechanism synthesis plus its merge trace), `analyze` (leakage,
//! utility, and decoding report for a given mechanism), and `experiment`
//! (the seeded randomized evaluation batch).
//!
//! Exit codes: 0 on success, 2 when inputs fail validation or cannot be
//! read, 3 when an experiment trial violates converse soundness.

use clap::{Parser, Subcommand, ValueEnum};
use leakage_core::experiment::{run_batch, DigraphMode, ExperimentConfig};
use leakage_core::fileio::{load_mechanism, load_system, MechanismFile};
use leakage_core::graph::{clique_lower_bound, ConfusionGraph};
use leakage_core::greedy::design_mechanism;
use leakage_core::mechanism::{
    max_leakage, satisfies_constraints, sibson_leakage, utility_implied_floor, Mechanism,
};
use leakage_core::polymatroid::{build_program, polymatroid_lower_bound};
use leakage_core::system::SystemSpec;
use leakage_core::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOUNDNESS: u8 = 3;

#[derive(Parser)]
#[command(name = "leakage-lab", version, about = "Privacy-utility analysis of broadcast disclosure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DigraphArg {
    /// Uniform over the nonisomorphic digraph catalog.
    Catalog,
    /// Independent fair coin per arc.
    Labeled,
}

#[derive(Subcommand)]
enum Command {
    /// Compute both leakage lower bounds for a system.
    Bounds {
        #[arg(long)]
        system: PathBuf,
        /// Write the confusion graph in GraphViz DOT form.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the rank linear program as a plain-text listing.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Synthesize a mechanism by greedy merging and record the trace.
    Design {
        #[arg(long)]
        system: PathBuf,
        /// Output mechanism JSON.
        #[arg(long)]
        out: PathBuf,
        /// Output merge-trace JSON.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Evaluate leakage, utility, and decoding for a mechanism.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        mechanism: PathBuf,
    },
    /// Run the seeded randomized evaluation batch.
    Experiment {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        /// Cap on the adversary's known-set size.
        #[arg(long = "max-p", default_value_t = 2)]
        max_p: usize,
        #[arg(long = "digraphs", value_enum, default_value_t = DigraphArg::Catalog)]
        digraphs: DigraphArg,
        /// Full per-trial report (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Optional bucket-summary CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct UserTermOut {
    user: usize,
    counted: bool,
    threshold_bits: f64,
    must_decode_entropy_bits: f64,
    side_info_floor_bits: f64,
    term_bits: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    theorem1_bits: f64,
    theorem1_clique: usize,
    theorem2_bits: f64,
    #[serde(rename = "lambda_QP")]
    lambda_qp: f64,
    per_user: Vec<UserTermOut>,
}

#[derive(Serialize)]
struct UserAnalysisOut {
    user: usize,
    decoded: bool,
    utility_bits: f64,
    threshold_bits: f64,
}

#[derive(Serialize)]
struct AnalyzeOut {
    leakage_bits: f64,
    sibson_bits: f64,
    satisfied: bool,
    users: Vec<UserAnalysisOut>,
    /// Floor implied by the achieved utilities; absent when some user cannot
    /// perfectly decode.
    lemma2_bits: Option<f64>,
}

#[derive(Serialize)]
struct TraceEntryOut {
    iteration: usize,
    merged: [usize; 2],
    leakage_bits: f64,
    #[serde(rename = "per_user_D")]
    per_user_utility: Vec<f64>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::SoundnessViolation { .. } => ExitCode::from(EXIT_SOUNDNESS),
                Error::LpNotOptimal(_) => ExitCode::FAILURE,
                _ => ExitCode::from(EXIT_VALIDATION),
            }
        }
    }
}

fn load_validated_system(path: &Path) -> Result<SystemSpec, Error> {
    let spec = load_system(path)?;
    let violations = spec.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("invalid system: {v}");
        }
        return Err(Error::InvalidSystem(violations));
    }
    Ok(spec)
}

fn write_text(path: &Path, body: &str) -> Result<(), Error> {
    std::fs::write(path, body).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Bounds { system, dot, dump_lp } => {
            let spec = load_validated_system(&system)?;
            if let Some(path) = dot {
                let graph = ConfusionGraph::build(&spec)?;
                write_text(&path, &graph.to_dot(&spec))?;
            }
            if let Some(path) = dump_lp {
                let program =
                    build_program(&spec, spec.adversary_unknown(), spec.adversary_known())?;
                write_text(&path, &program.dump())?;
            }
            let clique = clique_lower_bound(&spec)?;
            let rank = polymatroid_lower_bound(&spec)?;
            let out = BoundsOut {
                theorem1_bits: clique.bits,
                theorem1_clique: clique.clique_size,
                theorem2_bits: rank.bits,
                lambda_qp: rank.base_floor_bits,
                per_user: rank
                    .per_user
                    .into_iter()
                    .map(|t| UserTermOut {
                        user: t.user,
                        counted: t.counted,
                        threshold_bits: t.threshold_bits,
                        must_decode_entropy_bits: t.must_decode_entropy_bits,
                        side_info_floor_bits: t.side_info_floor_bits,
                        term_bits: t.term_bits,
                    })
                    .collect(),
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Command::Design { system, out, trace } => {
            let spec = load_validated_system(&system)?;
            let result = design_mechanism(&spec)?;
            let mech_json =
                serde_json::to_string_pretty(&MechanismFile::from_partition(&result.partition))?;
            write_text(&out, &mech_json)?;
            let entries: Vec<TraceEntryOut> = result
                .trace
                .iter()
                .map(|r| TraceEntryOut {
                    iteration: r.iteration,
                    merged: [r.merged.0, r.merged.1],
                    leakage_bits: r.leakage_bits,
                    per_user_utility: r.per_user_utility.clone(),
                })
                .collect();
            write_text(&trace, &serde_json::to_string_pretty(&entries)?)?;
            println!(
                "designed {} cells, leakage {:.6} bits, {} merges",
                result.partition.num_cells(),
                result.final_leakage_bits,
                result.trace.len()
            );
            Ok(())
        }
        Command::Analyze { system, mechanism } => {
            let spec = load_validated_system(&system)?;
            let mech: Mechanism = load_mechanism(&mechanism, spec.space().len())?;
            let report = satisfies_constraints(&spec, &mech)?;
            let lemma2_bits = if report.users.iter().all(|u| u.decoded) {
                Some(utility_implied_floor(&spec, &mech)?)
            } else {
                None
            };
            let out = AnalyzeOut {
                leakage_bits: max_leakage(&spec, &mech)?,
                sibson_bits: sibson_leakage(&spec, &mech)?,
                satisfied: report.satisfied,
                users: report
                    .users
                    .iter()
                    .map(|u| UserAnalysisOut {
                        user: u.user,
                        decoded: u.decoded,
                        utility_bits: u.utility_bits,
                        threshold_bits: u.threshold_bits,
                    })
                    .collect(),
                lemma2_bits,
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Command::Experiment {
            trials,
            seed,
            n,
            m,
            alphabet,
            max_p,
            digraphs,
            out,
            csv,
        } => {
            let config = ExperimentConfig {
                trials,
                n,
                m,
                alphabet,
                seed,
                max_adversary_side_info: max_p,
                digraph_mode: match digraphs {
                    DigraphArg::Catalog => DigraphMode::NonisomorphicCatalog,
                    DigraphArg::Labeled => DigraphMode::LabeledRandom,
                },
                ..ExperimentConfig::default()
            };
            config.validate()?;
            let report = run_batch(&config)?;
            report.write_json(&out)?;
            if let Some(path) = csv {
                report.write_csv(&path)?;
            }
            let b = &report.buckets_cumulative;
            println!(
                "{} trials: ratio buckets =1:{} <1.05:{} <1.1:{} <1.2:{} >=1.2:{}",
                report.trials.len(),
                b.eq_1,
                b.lt_1_05,
                b.lt_1_10,
                b.lt_1_20,
                b.ge_1_20
            );
            Ok(())
        }
    }
}
