use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ppsz_core::cnf::{parse_dimacs, write_dimacs, Assignment, CnfFormula};
use ppsz_core::generators::{generate, parse_metadata, Family, Metadata};
use ppsz_core::harness::{
    analyze_report, constants_report, estimate_success, solve, write_csv, EstimateJob,
    Strategy, SuccessRule,
};
use ppsz_core::improved::SolverConfig;
use ppsz_core::mathkit::ConstantsLedger;
use ppsz_core::ppsz::ImplicationBackend;

const EXIT_FOUND: u8 = 10;
const EXIT_NOT_FOUND: u8 = 20;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "ppsz", version, about = "PPSZ and the improved unique 3-SAT solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted instance; writes FILE and FILE.meta.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hub count for dense-planted.
        #[arg(long, default_value_t = 1)]
        hubs: u32,
        /// Make one hub clause per center critical (dense-planted).
        #[arg(long)]
        critical_hub: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a DIMACS file. Exit 10 if found, 20 if not.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "improved")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: Budget,
    },
    /// Estimate the per-invocation success probability; prints CSV.
    Estimate {
        file: PathBuf,
        /// Metadata sidecar; defaults to FILE.meta.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, default_value = "ppsz")]
        strategy: Strategy,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Count any satisfying assignment instead of the planted one.
        #[arg(long)]
        any_satisfying: bool,
        #[arg(long)]
        no_header: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Criticality, density and average-degree summary.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Maximum number of subsets for the witness search.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u128,
    },
    /// Named constants and ledger checks.
    Constants,
}

#[derive(Args)]
struct Budget {
    /// Implication bound; default max(3, ⌈log₂ n⌉).
    #[arg(long)]
    d: Option<usize>,
    /// exact or unit.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    ppsz_reps: Option<u64>,
    #[arg(long)]
    dense_reps: Option<u64>,
    #[arg(long)]
    sparse_reps: Option<u64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long)]
    p_star: Option<f64>,
    /// Call the low-degree solver without the probability gate.
    #[arg(long)]
    no_gate: bool,
}

impl Budget {
    fn config(&self) -> Result<SolverConfig, String> {
        let backend = match self.backend.as_deref() {
            None => None,
            Some("exact") => Some(ImplicationBackend::ExactSubset),
            Some("unit") => Some(ImplicationBackend::UnitRefutation),
            Some(other) => return Err(format!("unknown backend `{other}`")),
        };
        let mut cfg = SolverConfig {
            d: self.d,
            backend,
            ..SolverConfig::default()
        };
        if let Some(r) = self.ppsz_reps {
            cfg.ppsz_repetitions = r;
        }
        if let Some(r) = self.dense_reps {
            cfg.dense_repetitions = r;
        }
        if let Some(r) = self.sparse_reps {
            cfg.sparse_repetitions = r;
        }
        if let Some(x) = self.delta1 {
            cfg.delta1_effective = x;
        }
        if let Some(x) = self.delta2 {
            cfg.delta2_effective = x;
        }
        if let Some(x) = self.p_star {
            cfg.p_star_effective = x;
        }
        cfg.wahlstroem_gate = !self.no_gate;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn read_formula(path: &Path) -> Result<CnfFormula, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_dimacs(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn meta_path(file: &Path) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Reads the explicit sidecar, or `FILE.meta` if it exists.
fn read_meta(file: &Path, explicit: Option<&Path>) -> Result<Option<Metadata>, String> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let p = meta_path(file);
            if !p.exists() {
                return Ok(None);
            }
            p
        }
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_metadata(&text)
        .map(Some)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn format_assignment(a: &Assignment) -> String {
    a.to_dimacs()
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Gen {
            family,
            n,
            seed,
            hubs,
            critical_hub,
            out,
        } => {
            let inst = generate(family, n, hubs, critical_hub, seed).map_err(|e| e.to_string())?;
            fs::write(&out, write_dimacs(&inst.formula)).map_err(|e| format!("{}: {e}", out.display()))?;
            let meta = meta_path(&out);
            fs::write(&meta, inst.metadata()).map_err(|e| format!("{}: {e}", meta.display()))?;
            Ok(0)
        }
        Command::Solve {
            file,
            strategy,
            seed,
            budget,
        } => {
            let f = read_formula(&file)?;
            let cfg = budget.config()?;
            match solve(&f, strategy, &cfg, seed).map_err(|e| e.to_string())? {
                Some(a) => {
                    println!("{}", format_assignment(&a));
                    Ok(EXIT_FOUND)
                }
                None => {
                    println!("not found");
                    Ok(EXIT_NOT_FOUND)
                }
            }
        }
        Command::Estimate {
            file,
            meta,
            strategy,
            trials,
            seed,
            any_satisfying,
            no_header,
            budget,
        } => {
            let f = read_formula(&file)?;
            let meta = read_meta(&file, meta.as_deref())?;
            let cfg = budget.config()?;
            let job = EstimateJob {
                instance: file.display().to_string(),
                family: meta.as_ref().map_or("unknown".into(), |m| m.family.to_string()),
                strategy,
                trials,
                rule: if any_satisfying {
                    SuccessRule::AnySatisfying
                } else {
                    SuccessRule::ExactAlpha
                },
                cfg: &cfg,
                seed,
            };
            let result = estimate_success(&f, meta.as_ref().map(|m| &m.alpha), &job)
                .map_err(|e| e.to_string())?;
            write_csv(io::stdout().lock(), &[result], !no_header).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Analyze {
            file,
            meta,
            delta,
            budget,
        } => {
            let f = read_formula(&file)?;
            let meta = read_meta(&file, meta.as_deref())?;
            print!("{}", analyze_report(&f, meta.as_ref().map(|m| &m.alpha), delta, budget));
            Ok(0)
        }
        Command::Constants => {
            print!("{}", constants_report(&ConstantsLedger::default()));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
