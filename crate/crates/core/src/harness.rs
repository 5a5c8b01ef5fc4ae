//! Monte Carlo success estimation, CSV rows and `key=value` reports.
//!
//! Seed discipline: trial `t` of the strategy uses `derive_seed(seed, 2t)`
//! and the matching diagnostic run with `β = α` uses `derive_seed(seed,
//! 2t + 1)`, so results do not depend on how trials are scheduled.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{criticality_summary, find_sparse_witness, wahlstroem_criterion, DensityVerdict};
use crate::cnf::{Assignment, CnfFormula};
use crate::improved::{dense_solve, one_cc, ppsz_improved, sparse_solve, SolverConfig, SolverError};
use crate::mathkit::{self, ConstantsLedger};
use crate::ppsz::{Beta, EngineError, PpszEngine};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Ppsz,
    Improved,
    Dense,
    Sparse,
    OneCc,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Ppsz,
        Strategy::Improved,
        Strategy::Dense,
        Strategy::Sparse,
        Strategy::OneCc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ppsz => "ppsz",
            Strategy::Improved => "improved",
            Strategy::Dense => "dense",
            Strategy::Sparse => "sparse",
            Strategy::OneCc => "onecc",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("strategy {strategy} has a zero repetition budget")]
    ZeroBudget { strategy: Strategy },
    #[error("exact-α counting needs a total planted assignment")]
    NoReference,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One solver invocation of `strategy`. For `ppsz` this is a single run;
/// the others use the budgets in `cfg`. Never returns a non-satisfying
/// assignment.
pub fn solve_once(
    f: &CnfFormula,
    strategy: Strategy,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    match strategy {
        Strategy::Ppsz => {
            let engine = PpszEngine::new(f, cfg.params_for(f))?;
            let run = engine.run(&Assignment::new(), Beta::Uniform, seed)?;
            Ok(f.is_satisfied_by(&run.assignment).then_some(run.assignment))
        }
        Strategy::Improved => ppsz_improved(f, cfg, seed),
        Strategy::Dense => match dense_solve(f, cfg, seed) {
            Err(SolverError::NoHighDegreeVariable { .. }) => Ok(None),
            other => other,
        },
        Strategy::Sparse => sparse_solve(f, cfg, seed),
        Strategy::OneCc => one_cc(f, cfg, seed),
    }
}

/// Like `solve_once`, except that `ppsz` repeats up to `ppsz_repetitions`
/// runs.
pub fn solve(
    f: &CnfFormula,
    strategy: Strategy,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    match strategy {
        Strategy::Ppsz => Ok(PpszEngine::new(f, cfg.params_for(f))?.solve_from(
            &Assignment::new(),
            cfg.ppsz_repetitions,
            seed,
        )),
        _ => solve_once(f, strategy, cfg, seed),
    }
}

fn check_budget(strategy: Strategy, cfg: &SolverConfig) -> Result<(), HarnessError> {
    let zero = match strategy {
        Strategy::Ppsz => false,
        Strategy::Dense => cfg.dense_repetitions == 0,
        Strategy::Sparse => cfg.sparse_repetitions == 0,
        Strategy::OneCc => cfg.dense_repetitions == 0 && cfg.sparse_repetitions == 0,
        Strategy::Improved => {
            cfg.ppsz_repetitions == 0 && cfg.dense_repetitions == 0 && cfg.sparse_repetitions == 0
        }
    };
    if zero {
        Err(HarnessError::ZeroBudget { strategy })
    } else {
        Ok(())
    }
}

/// What counts as a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessRule {
    ExactAlpha,
    AnySatisfying,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub instance: String,
    pub n: u32,
    pub family: String,
    pub strategy: Strategy,
    pub trials: u64,
    pub successes: u64,
    /// Mean forced and guessed counts of PPSZ runs with `β = α`; `None`
    /// without a reference assignment.
    pub mean_forced: Option<f64>,
    pub mean_guessed: Option<f64>,
    /// Mean of `2^(−G)` over the same runs.
    pub mean_pow2_neg_guessed: Option<f64>,
    pub wall_ms: u128,
    pub seed: u64,
}

impl ExperimentResult {
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of `estimate`.
    pub fn sigma(&self) -> f64 {
        let p = self.estimate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// 95% normal-approximation interval with continuity correction,
    /// clipped to `[0, 1]`.
    pub fn interval(&self) -> (f64, f64) {
        let half = 1.96 * self.sigma() + 0.5 / self.trials as f64;
        let p = self.estimate();
        ((p - half).max(0.0), (p + half).min(1.0))
    }

    /// `2^(−mean G)`, the weaker lower bound.
    pub fn pow2_neg_mean_guessed(&self) -> Option<f64> {
        self.mean_guessed.map(|g| (-g).exp2())
    }
}

pub const CSV_HEADER: [&str; 15] = [
    "instance",
    "n",
    "family",
    "strategy",
    "trials",
    "successes",
    "estimate",
    "ci_low",
    "ci_high",
    "mean_forced",
    "mean_guessed",
    "mean_pow2_neg_guessed",
    "pow2_neg_mean_guessed",
    "wall_ms",
    "seed",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    pub fn csv_record(&self) -> Vec<String> {
        let (lo, hi) = self.interval();
        vec![
            self.instance.clone(),
            self.n.to_string(),
            self.family.clone(),
            self.strategy.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            self.estimate().to_string(),
            lo.to_string(),
            hi.to_string(),
            opt(self.mean_forced),
            opt(self.mean_guessed),
            opt(self.mean_pow2_neg_guessed),
            opt(self.pow2_neg_mean_guessed()),
            self.wall_ms.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Writes the rows as CSV, with the header unless `header` is false.
pub fn write_csv<W: io::Write>(out: W, rows: &[ExperimentResult], header: bool) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EstimateJob<'a> {
    pub instance: String,
    pub family: String,
    pub strategy: Strategy,
    pub trials: u64,
    pub rule: SuccessRule,
    pub cfg: &'a SolverConfig,
    pub seed: u64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    successes: u64,
    forced: u64,
    guessed: u64,
    pow2: f64,
}

/// Runs `job.trials` independent invocations and counts successes. With a
/// total reference `alpha`, also collects forced/guessed statistics of
/// PPSZ runs conditioned on `β = alpha`.
pub fn estimate_success(
    f: &CnfFormula,
    alpha: Option<&Assignment>,
    job: &EstimateJob<'_>,
) -> Result<ExperimentResult, HarnessError> {
    if job.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    check_budget(job.strategy, job.cfg)?;
    let reference = alpha.filter(|a| (1..=f.num_vars()).all(|v| a.is_defined(v)));
    if job.rule == SuccessRule::ExactAlpha && reference.is_none() {
        return Err(HarnessError::NoReference);
    }
    let engine = PpszEngine::new(f, job.cfg.params_for(f))?;
    let start = Instant::now();
    let tally = (0..job.trials)
        .into_par_iter()
        .map(|t| -> Result<Tally, HarnessError> {
            let out = solve_once(f, job.strategy, job.cfg, derive_seed(job.seed, 2 * t))?;
            let hit = match (job.rule, out) {
                (_, None) => false,
                (SuccessRule::AnySatisfying, Some(_)) => true,
                (SuccessRule::ExactAlpha, Some(a)) => {
                    Some(&a.restricted_to(1..=f.num_vars())) == reference
                }
            };
            let mut tally = Tally {
                successes: u64::from(hit),
                ..Tally::default()
            };
            if let Some(r) = reference {
                let run = engine.run(&Assignment::new(), Beta::Fixed(r), derive_seed(job.seed, 2 * t + 1))?;
                tally.forced = run.stats.forced_count as u64;
                tally.guessed = run.stats.guessed_count as u64;
                tally.pow2 = (-(run.stats.guessed_count as f64)).exp2();
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| {
            Ok(Tally {
                successes: a.successes + b.successes,
                forced: a.forced + b.forced,
                guessed: a.guessed + b.guessed,
                pow2: a.pow2 + b.pow2,
            })
        })?;
    let trials = job.trials as f64;
    let diag = |x: f64| reference.map(|_| x / trials);
    Ok(ExperimentResult {
        instance: job.instance.clone(),
        n: f.num_vars(),
        family: job.family.clone(),
        strategy: job.strategy,
        trials: job.trials,
        successes: tally.successes,
        mean_forced: diag(tally.forced as f64),
        mean_guessed: diag(tally.guessed as f64),
        mean_pow2_neg_guessed: diag(tally.pow2),
        wall_ms: start.elapsed().as_millis(),
        seed: job.seed,
    })
}

/// All named constants and the ledger checks as `key=value` lines.
pub fn constants_report(ledger: &ConstantsLedger) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    line("S", mathkit::s_constant().to_string());
    line("S_quadrature", mathkit::s_constant_quadrature().to_string());
    line("two_pow_S", mathkit::s_constant().exp2().to_string());
    line("forcing_integral_two_crit", mathkit::forcing_integral_two_crit().to_string());
    line("forcing_integral_short_crit", mathkit::forcing_integral_short_crit().to_string());
    line("dense_savings_constant", mathkit::dense_savings_constant().to_string());
    line("dense_guess_entropy", mathkit::dense_guess_entropy().to_string());
    line("low_degree_exponent", mathkit::LOW_DEGREE_EXPONENT.to_string());
    line("sparse_gate_savings", mathkit::SPARSE_GATE_SAVINGS.to_string());
    line("eps1", ledger.eps1.to_string());
    line("eps2", ledger.eps2.to_string());
    line("eps3", ledger.eps3.to_string());
    line("delta1", ledger.delta1.to_string());
    line("delta2", ledger.delta2.to_string());
    line("p_star", ledger.p_star.to_string());
    match mathkit::validate_ledger(ledger) {
        Ok(checks) => {
            for c in checks {
                line(&format!("check.{}", c.name), if c.passed { "pass" } else { "fail" }.into());
                line(&format!("margin.{}", c.name), c.margin.to_string());
            }
        }
        Err(e) => line("ledger_error", e.to_string()),
    }
    out
}

/// Criticality (when `alpha` is given), density and average-degree lines.
pub fn analyze_report(
    f: &CnfFormula,
    alpha: Option<&Assignment>,
    delta: f64,
    budget: u128,
) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    line("n", f.num_vars().to_string());
    line("clauses", f.len().to_string());
    line("max_degree3", f.max_degree3().to_string());
    if let Some(a) = alpha {
        match criticality_summary(f, a) {
            Ok(s) => {
                line("multi_critical", s.multi_critical.to_string());
                line("short_critical", s.short_critical.to_string());
                line("one_cc", s.one_cc.to_string());
            }
            Err(e) => line("criticality_error", e.to_string()),
        }
    }
    line("delta", delta.to_string());
    match find_sparse_witness(f, delta, budget) {
        Ok(DensityVerdict::Sparse { witness }) => {
            line("density", "sparse".into());
            let w: Vec<String> = witness.iter().map(u32::to_string).collect();
            line("witness", w.join(" "));
        }
        Ok(DensityVerdict::Dense { high_degree }) => {
            line("density", "dense".into());
            let h: Vec<String> = high_degree.iter().map(u32::to_string).collect();
            line("high_degree", h.join(" "));
        }
        Err(e) => line("density_error", e.to_string()),
    }
    match wahlstroem_criterion(f) {
        Ok(c) => {
            line("average_degree", c.average_degree.to_string());
            line("low_degree_eligible", c.eligible.to_string());
        }
        Err(e) => line("average_degree_error", e.to_string()),
    }
    out
}
