use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scma_core::designer::{design, med, BuildOptions, DesignInstance, SolverOptions, StopReason};
use scma_core::detector::FastPath;
use scma_core::{complexity_report, Scheme};
use scma_sim::bits::Labeling;
use scma_sim::codebook_file::{load_codebook, save_codebook, CodebookDocument};
use scma_sim::golden::{golden_codebooks, golden_graph, golden_profiles};
use scma_sim::graph_file::load_graph;
use scma_sim::sim::{parse_snr_grid, DetectorKind, SimConfig, Simulator, CSV_HEADER};
use scma_sim::validate::validate_document;
use scma_sim::SimError;

#[derive(Parser)]
#[command(name = "scma", version, about = "Design, validate and simulate sparse codebooks for real-valued channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Full,
    Conventional,
    Symmetric,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Full => Scheme::Full,
            SchemeArg::Conventional => Scheme::ConventionalDifference,
            SchemeArg::Symmetric => Scheme::Symmetric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Mpa,
    Map,
}

#[derive(Clone, Copy, ValueEnum)]
enum FastPathArg {
    Auto,
    Generic,
    Symmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelingArg {
    Natural,
    Gray,
}

#[derive(Subcommand)]
enum Command {
    /// Design codebooks by successive linearization.
    Design {
        /// Graph file, or builtin:canonical.
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long = "M", default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.01)]
        step_threshold: f64,
        /// Keep both members of each antipodal constraint pair.
        #[arg(long)]
        no_dedup: bool,
    },
    /// Monte Carlo BER sweep.
    Simulate {
        #[arg(long)]
        codebook: PathBuf,
        /// A:STEP:B in dB, inclusive, or a single value.
        #[arg(long)]
        snr_db: String,
        #[arg(long, default_value_t = 50)]
        frames: usize,
        #[arg(long, default_value_t = 1024)]
        bits_per_frame: usize,
        #[arg(long, default_value_t = 5)]
        mpa_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_normalize: bool,
        #[arg(long, value_enum, default_value_t = DetectorArg::Mpa)]
        detector: DetectorArg,
        #[arg(long, value_enum, default_value_t = FastPathArg::Auto)]
        fast_path: FastPathArg,
        #[arg(long, value_enum, default_value_t = LabelingArg::Natural)]
        labeling: LabelingArg,
    },
    /// Structural checks and brute-force MED; exit code 1 if any check fails.
    Validate {
        #[arg(long)]
        codebook: PathBuf,
    },
    /// Variable and constraint counts of a design scheme.
    Complexity {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long = "M", default_value_t = 4)]
        m: usize,
        #[arg(long = "J", default_value_t = 6)]
        j: usize,
        #[arg(long, default_value_t = 4)]
        n_real: usize,
    },
    /// Writes the reference codebooks to DIR/golden.toml.
    Golden {
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Validation,
    Usage(String),
    Numerical(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        use scma_core::Error as E;
        match e {
            SimError::Core(
                c @ (E::InfeasiblePoint(_)
                | E::DegenerateInitialization(_)
                | E::DegenerateCodebook { .. }
                | E::TooManyConstraints { .. }
                | E::CapExceeded { .. }
                | E::CountOverflow { .. }),
            ) => Failure::Numerical(c.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<scma_core::Error> for Failure {
    fn from(e: scma_core::Error) -> Self {
        SimError::Core(e).into()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| SimError::io(path, e).into())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Design { graph, scheme, m, seed, out, trace, max_iter, step_threshold, no_dedup } => {
            let graph = load_graph(&graph)?;
            let opts = BuildOptions { antipodal_dedup: !no_dedup, ..BuildOptions::default() };
            let instance = DesignInstance::build(graph.clone(), scheme.into(), m, None, &opts)?;
            eprintln!(
                "{} variables, {} constraints",
                instance.num_variables(),
                instance.num_constraints()
            );
            let solver = SolverOptions {
                seed,
                max_outer_iterations: max_iter,
                step_threshold,
                ..SolverOptions::default()
            };
            let outcome = design(&instance, &solver)?;
            if let Some(path) = trace {
                write_file(&path, &outcome.trace.to_csv())?;
            }
            let d = med(&outcome.codebooks)?;
            let mut doc = CodebookDocument::new(graph, outcome.codebooks).with_med(d);
            doc.profiles = outcome.profiles;
            save_codebook(&doc, &out)?;
            let objective = outcome.trace.objectives().last().copied().unwrap_or(f64::NAN);
            eprintln!(
                "stopped after {} iterations ({}): objective {objective:.6e}, MED {d:.6e}",
                outcome.trace.outer_iterations(),
                outcome.trace.stop_reason
            );
            if outcome.trace.stop_reason == StopReason::SolverFailure {
                return Err(Failure::Numerical("subproblem solver failed".into()));
            }
            Ok(())
        }
        Command::Simulate {
            codebook,
            snr_db,
            frames,
            bits_per_frame,
            mpa_iters,
            seed,
            out,
            no_normalize,
            detector,
            fast_path,
            labeling,
        } => {
            let doc = load_codebook(&codebook)?;
            let fast_path = match fast_path {
                FastPathArg::Auto => FastPath::Auto,
                FastPathArg::Generic => FastPath::Generic,
                FastPathArg::Symmetric => FastPath::Symmetric,
            };
            let config = SimConfig {
                snr_grid_db: parse_snr_grid(&snr_db)?,
                frames,
                bits_per_frame,
                seed,
                gains: None,
                normalize_power: !no_normalize,
                detector: match detector {
                    DetectorArg::Mpa => DetectorKind::Mpa { t_max: mpa_iters, fast_path },
                    DetectorArg::Map => DetectorKind::Map,
                },
                labeling: match labeling {
                    LabelingArg::Natural => Labeling::Natural,
                    LabelingArg::Gray => Labeling::Gray,
                },
            };
            let sim = Simulator::new(config, &doc.codebooks)?;
            let io = |e| SimError::io(&out, e);
            let mut file = std::fs::File::create(&out).map_err(io)?;
            let head: String = sim.metadata().iter().map(|(k, v)| format!("# {k}: {v}\n")).collect();
            writeln!(file, "{head}{CSV_HEADER}").map_err(io)?;
            sim.sweep_with(|p| {
                writeln!(file, "{}", p.csv_row()).and_then(|_| file.flush()).map_err(io)?;
                eprintln!("{} dB: {} errors in {} bits", p.snr_db, p.bit_errors, p.total_bits);
                Ok(())
            })?;
            Ok(())
        }
        Command::Validate { codebook } => {
            let doc = match load_codebook(&codebook) {
                Ok(doc) => doc,
                Err(e @ SimError::Format { .. }) => {
                    println!("FAIL load: {e}");
                    return Err(Failure::Validation);
                }
                Err(e) => return Err(e.into()),
            };
            let report = validate_document(&doc)?;
            for c in &report.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{tag} {}", c.name);
                } else {
                    println!("{tag} {}: {}", c.name, c.detail);
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Complexity { scheme, m, j, n_real } => {
            let report = complexity_report(scheme.into(), m, j, n_real, None)?;
            println!("scheme\tvariables\tP\tconstraints");
            println!("{report}");
            Ok(())
        }
        Command::Golden { out } => {
            std::fs::create_dir_all(&out).map_err(|e| SimError::io(&out, e))?;
            let doc = CodebookDocument::new(golden_graph(), golden_codebooks()).with_profiles(golden_profiles());
            let path = out.join("golden.toml");
            save_codebook(&doc, &path)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
