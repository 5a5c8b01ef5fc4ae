//! Structural classification: criticality counts, sparse/dense verdicts and
//! the average-degree criterion of the low-degree solver.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula, Var};
use crate::mathkit::binomial;
use crate::oracle::{Oracle, OracleError};

/// Eligibility threshold of the average adjusted degree.
pub const WAHLSTROEM_MAX_AVG_DEGREE: f64 = 4.2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("witness search needs {needed} subsets, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("density parameter {0} outside [0, 1]")]
    BadDelta(String),
    #[error("formula declares no variables")]
    NoVariables,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticalitySummary {
    /// Variables with at least two critical clauses.
    pub multi_critical: usize,
    /// Variables with a critical clause of size at most two.
    pub short_critical: usize,
    pub one_cc: bool,
}

pub fn criticality_summary(
    f: &CnfFormula,
    alpha: &Assignment,
) -> Result<CriticalitySummary, AnalysisError> {
    let report = Oracle::default().critical_clauses(f, alpha)?;
    Ok(CriticalitySummary {
        multi_critical: report.multi_critical_count(),
        short_critical: report.short_critical_count(),
        one_cc: report.is_one_cc(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DensityVerdict {
    /// No admissible `W` exists. `high_degree` lists the variables of
    /// 3-clause degree at least 5 in the whole formula.
    Dense { high_degree: Vec<Var> },
    /// Removing the clauses touching `witness` leaves 3-clause degree ≤ 4.
    Sparse { witness: BTreeSet<Var> },
}

impl DensityVerdict {
    pub fn is_dense(&self) -> bool {
        matches!(self, DensityVerdict::Dense { .. })
    }

    pub fn witness(&self) -> Option<&BTreeSet<Var>> {
        match self {
            DensityVerdict::Sparse { witness } => Some(witness),
            DensityVerdict::Dense { .. } => None,
        }
    }
}

/// `⌊delta · n⌋` with a guard against rounding just below an integer.
pub fn subset_size(delta: f64, n: usize) -> usize {
    let x = delta * n as f64;
    (x + 1e-9).floor() as usize
}

fn check_delta(delta: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(AnalysisError::BadDelta(delta.to_string()))
    }
}

/// Exhaustive search for a set `W` of at most `⌊delta·n⌋` variables of
/// `vbl(f)` such that the clauses avoiding `W` have 3-clause degree ≤ 4.
/// Smaller sizes are tried first and each size in lexicographic order, so
/// the verdict is deterministic. `budget` caps the number of subsets.
pub fn find_sparse_witness(
    f: &CnfFormula,
    delta: f64,
    budget: u128,
) -> Result<DensityVerdict, AnalysisError> {
    check_delta(delta)?;
    let vars = f.vars();
    let k = subset_size(delta, vars.len());
    let needed = (0..=k)
        .map(|i| binomial(vars.len() as u64, i as u64).unwrap_or(u128::MAX))
        .fold(0u128, u128::saturating_add);
    if needed > budget {
        return Err(AnalysisError::BudgetExceeded { needed, budget });
    }
    for size in 0..=k {
        for w in vars.iter().copied().combinations(size) {
            let w: BTreeSet<Var> = w.into_iter().collect();
            if f.independent_part(&w).max_degree3() <= 4 {
                return Ok(DensityVerdict::Sparse { witness: w });
            }
        }
    }
    let high_degree = vars.into_iter().filter(|&v| f.degree3(v) >= 5).collect();
    Ok(DensityVerdict::Dense { high_degree })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WahlstroemCriterion {
    pub average_degree: f64,
    pub eligible: bool,
}

/// Average over declared variables of `max(degree, 2)`.
pub fn wahlstroem_criterion(f: &CnfFormula) -> Result<WahlstroemCriterion, AnalysisError> {
    let n = f.num_vars();
    if n == 0 {
        return Err(AnalysisError::NoVariables);
    }
    let total: usize = (1..=n).map(|v| adjusted_degree(f.degree(v))).sum();
    let average_degree = total as f64 / n as f64;
    Ok(WahlstroemCriterion {
        average_degree,
        eligible: average_degree <= WAHLSTROEM_MAX_AVG_DEGREE,
    })
}

fn adjusted_degree(degree: usize) -> usize {
    degree.max(2)
}
