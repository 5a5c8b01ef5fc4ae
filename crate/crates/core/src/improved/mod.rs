//! The improved unique 3-SAT solver: plain PPSZ for formulas with many
//! doubly-critical variables, otherwise a sweep over small partial
//! assignments, each handed to the one-critical-clause solver (dense
//! case first, then sparse).

mod dense;
mod lowdeg;
mod sparse;

use std::sync::Arc;

use itertools::Itertools;
use thiserror::Error;

use crate::analysis::subset_size;
use crate::cnf::{Assignment, CnfFormula, Var};
use crate::mathkit::ConstantsLedger;
use crate::ppsz::{default_backend, default_bound, EngineError, ImplicationBackend, PpszEngine, PpszParams};

pub use dense::{dense_guess, dense_solve, get_ind_2clauses, TwoClauseSample};
pub use lowdeg::{BacktrackingSolver, LowDegreeSolver};
pub use sparse::{pick_short_clause, sparse_solve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("no variable of 3-clause degree ≥ 5 left after {found} of {quota} 2-clauses")]
    NoHighDegreeVariable {
        found: usize,
        quota: usize,
        partial: TwoClauseSample,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Budgets and parameters. The asymptotic constants live in `ledger`; the
/// `*_effective` fields are the values actually used.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub ledger: ConstantsLedger,
    /// Implication bound; defaults per formula when `None`.
    pub d: Option<usize>,
    pub backend: Option<ImplicationBackend>,
    pub ppsz_repetitions: u64,
    pub dense_repetitions: u64,
    pub sparse_repetitions: u64,
    /// Size fraction of the partial-assignment sweep in the top level.
    pub delta1_effective: f64,
    /// Density parameter: quota of the 2-clause extraction and size fraction
    /// of the sparse sweep.
    pub delta2_effective: f64,
    pub p_star_effective: f64,
    /// Apply the exponentially small probability gate before calling the
    /// low-degree solver.
    pub wahlstroem_gate: bool,
    pub low_degree_solver: Arc<dyn LowDegreeSolver>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let ledger = ConstantsLedger::default();
        SolverConfig {
            ledger,
            d: None,
            backend: None,
            ppsz_repetitions: 2000,
            dense_repetitions: 2000,
            sparse_repetitions: 200,
            delta1_effective: ledger.delta1,
            delta2_effective: ledger.delta2,
            p_star_effective: 0.5,
            wahlstroem_gate: true,
            low_degree_solver: Arc::new(BacktrackingSolver),
        }
    }
}

impl SolverConfig {
    pub fn params_for(&self, f: &CnfFormula) -> PpszParams {
        PpszParams {
            d: self.d.unwrap_or_else(|| default_bound(f.num_vars())),
            backend: self.backend.unwrap_or_else(|| default_backend(f.num_vars())),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for (name, p) in [
            ("delta1_effective", self.delta1_effective),
            ("delta2_effective", self.delta2_effective),
            ("p_star_effective", self.p_star_effective),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SolverError::Config(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Declared variables that `f` no longer mentions and `fixed` leaves open
/// get `false`, so that runs only spend guesses on live variables.
pub(crate) fn pad_inert(f: &CnfFormula, live: &[Var], fixed: &Assignment) -> Assignment {
    let mut out = fixed.clone();
    for v in 1..=f.num_vars() {
        if !out.is_defined(v) && live.binary_search(&v).is_err() {
            out.set(v, false);
        }
    }
    out
}

/// Every assignment to every `k`-subset of `vars`, in lexicographic subset
/// order and then binary counting order.
pub(crate) fn subset_assignments(vars: &[Var], k: usize) -> impl Iterator<Item = Vec<(Var, bool)>> + '_ {
    vars.iter().copied().combinations(k).flat_map(move |w| {
        (0u64..1 << w.len()).map(move |bits| {
            w.iter()
                .enumerate()
                .map(|(i, &v)| (v, bits >> i & 1 == 1))
                .collect()
        })
    })
}

fn extend(base: &Assignment, pairs: &[(Var, bool)]) -> Assignment {
    let mut a = base.clone();
    for &(v, b) in pairs {
        a.set(v, b);
    }
    a
}

pub(crate) fn one_cc_from(
    f: &CnfFormula,
    base: &Assignment,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    match dense::dense_from(f, base, cfg, crate::seed::derive_seed(seed, 0)) {
        Ok(Some(a)) => return Ok(Some(a)),
        Ok(None) | Err(SolverError::NoHighDegreeVariable { .. }) => {}
        Err(e) => return Err(e),
    }
    sparse::sparse_from(f, base, cfg, crate::seed::derive_seed(seed, 1))
}

/// Dense case, and the sparse case if that fails or finds nothing.
pub fn one_cc(f: &CnfFormula, cfg: &SolverConfig, seed: u64) -> Result<Option<Assignment>, SolverError> {
    cfg.validate()?;
    one_cc_from(f, &Assignment::new(), cfg, seed)
}

/// Phase 1: `ppsz_repetitions` PPSZ runs. Phase 2: for every subset `W` of
/// `⌊delta1_effective · n⌋` variables and every assignment to `W`, the
/// one-critical-clause solver on the restricted formula.
pub fn ppsz_improved(
    f: &CnfFormula,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    cfg.validate()?;
    let engine = PpszEngine::new(f, cfg.params_for(f))?;
    let vars = f.vars();
    let start = pad_inert(f, &vars, &Assignment::new());
    if let Some(a) = engine.solve_from(&start, cfg.ppsz_repetitions, crate::seed::derive_seed(seed, 0)) {
        return Ok(Some(a));
    }
    let k = subset_size(cfg.delta1_effective, vars.len());
    let phase2 = crate::seed::derive_seed(seed, 1);
    for (i, pairs) in subset_assignments(&vars, k).enumerate() {
        let base = extend(&Assignment::new(), &pairs);
        if let Some(a) = one_cc_from(f, &base, cfg, crate::seed::derive_seed(phase2, i as u64))? {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_assignments_enumerates_all() {
        let all: Vec<_> = subset_assignments(&[1, 2, 3], 1).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![(1, false)]);
        assert_eq!(all[1], vec![(1, true)]);
        assert_eq!(subset_assignments(&[1, 2], 0).count(), 1);
        assert_eq!(subset_assignments(&[1, 2, 3, 4], 2).count(), 24);
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig {
            p_star_effective: 1.5,
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(SolverError::Config(_))));
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn improved_examples() {
        let cfg = SolverConfig::default();
        let f = CnfFormula::from_dimacs_clauses(2, &[vec![1], vec![-1, 2]]).unwrap();
        assert_eq!(
            ppsz_improved(&f, &cfg, 1).unwrap(),
            Some(Assignment::from_bools(&[true, true]))
        );
        let unsat = CnfFormula::from_dimacs_clauses(1, &[vec![1], vec![-1]]).unwrap();
        assert_eq!(ppsz_improved(&unsat, &cfg, 1).unwrap(), None);
        assert_eq!(one_cc(&unsat, &cfg, 1).unwrap(), None);
    }

    #[test]
    fn phase_two_alone_solves() {
        let cfg = SolverConfig {
            ppsz_repetitions: 0,
            delta1_effective: 0.5,
            ..SolverConfig::default()
        };
        let f = CnfFormula::from_dimacs_clauses(
            4,
            &[vec![1], vec![-1, 2], vec![-2, 3], vec![-3, 4]],
        )
        .unwrap();
        let a = ppsz_improved(&f, &cfg, 3).unwrap().unwrap();
        assert_eq!(a, Assignment::from_bools(&[true; 4]));
    }
}
