//! The PPSZ algorithm.
//!
//! One run draws a random assignment `β` and a random placement, then walks
//! the unassigned variables by ascending place. A variable whose value (or
//! its negation) is `d`-implied by the current restriction is *forced*;
//! otherwise it is *guessed* and copies `β`. The restriction is updated after
//! every step.

mod implication;
mod placement;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::{Assignment, CnfError, CnfFormula, Lit, Var};
use crate::seed::{derive_seed, rng_from_seed};

pub use implication::ImplicationBackend;
pub(crate) use implication::ResClause;
use implication::Scratch;
pub use placement::{sample_placement, Placement};

/// Formulas with at most this many variables use the exact backend by default.
pub const EXACT_BACKEND_MAX_VARS: u32 = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("clause of size {0} found; only (≤3)-CNF formulas are supported")]
    ClauseTooLong(usize),
    #[error("implication bound must be at least 1")]
    ZeroBound,
    #[error("β does not define variable {0}")]
    BetaUndefined(Var),
    #[error("reference assignment does not satisfy the formula")]
    NotSatisfying,
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// `max(3, ⌈log₂ n⌉)`.
pub fn default_bound(num_vars: u32) -> usize {
    let log = if num_vars <= 1 {
        0
    } else {
        (u32::BITS - (num_vars - 1).leading_zeros()) as usize
    };
    log.max(3)
}

pub fn default_backend(num_vars: u32) -> ImplicationBackend {
    if num_vars <= EXACT_BACKEND_MAX_VARS {
        ImplicationBackend::ExactSubset
    } else {
        ImplicationBackend::UnitRefutation
    }
}

/// Implication bound and backend of a PPSZ run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpszParams {
    pub d: usize,
    pub backend: ImplicationBackend,
}

impl PpszParams {
    pub fn new(d: usize, backend: ImplicationBackend) -> PpszParams {
        PpszParams { d, backend }
    }

    /// Defaults for the formula's declared variable count.
    pub fn for_formula(f: &CnfFormula) -> PpszParams {
        PpszParams {
            d: default_bound(f.num_vars()),
            backend: default_backend(f.num_vars()),
        }
    }
}

/// Source of the guessed values.
#[derive(Debug, Clone, Copy)]
pub enum Beta<'a> {
    /// Drawn uniformly, up front.
    Uniform,
    /// Fixed, e.g. to condition on `β = α`.
    Fixed(&'a Assignment),
}

/// How a variable got its value in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Forced(bool),
    Guessed(bool),
}

impl Step {
    pub fn value(self) -> bool {
        match self {
            Step::Forced(b) | Step::Guessed(b) => b,
        }
    }

    pub fn is_forced(self) -> bool {
        matches!(self, Step::Forced(_))
    }
}

/// Per-variable outcome against a reference assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarOutcome {
    Forced,
    GuessedCorrect,
    GuessedWrong,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub forced_count: usize,
    pub guessed_count: usize,
    /// `(variable, step)` in processing order.
    pub steps: Vec<(Var, Step)>,
    pub placement: Placement,
}

impl RunStats {
    pub fn step_of(&self, var: Var) -> Option<Step> {
        self.steps.iter().find(|(v, _)| *v == var).map(|&(_, s)| s)
    }

    /// Outcomes relative to `reference`; variables it leaves undefined count
    /// as wrongly guessed when guessed.
    pub fn classify(&self, reference: &Assignment) -> Vec<(Var, VarOutcome)> {
        self.steps
            .iter()
            .map(|&(v, s)| {
                let outcome = match s {
                    Step::Forced(_) => VarOutcome::Forced,
                    Step::Guessed(b) if reference.get(v) == Some(b) => VarOutcome::GuessedCorrect,
                    Step::Guessed(_) => VarOutcome::GuessedWrong,
                };
                (v, outcome)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpszRun {
    /// Total on the declared variables.
    pub assignment: Assignment,
    pub stats: RunStats,
}

/// A formula validated and preprocessed for repeated PPSZ runs.
#[derive(Debug, Clone)]
pub struct PpszEngine<'f> {
    formula: &'f CnfFormula,
    clauses: Vec<ResClause>,
    params: PpszParams,
}

impl<'f> PpszEngine<'f> {
    pub fn new(formula: &'f CnfFormula, params: PpszParams) -> Result<PpszEngine<'f>, EngineError> {
        if params.d == 0 {
            return Err(EngineError::ZeroBound);
        }
        let clauses = residual_clauses(formula)?;
        Ok(PpszEngine {
            formula,
            clauses,
            params,
        })
    }

    pub fn formula(&self) -> &'f CnfFormula {
        self.formula
    }

    pub fn params(&self) -> PpszParams {
        self.params
    }

    /// Declared variables not fixed by `start`.
    pub fn free_vars(&self, start: &Assignment) -> Vec<Var> {
        (1..=self.formula.num_vars())
            .filter(|&v| !start.is_defined(v))
            .collect()
    }

    /// One run with its randomness drawn from `seed`: first `β` (when
    /// uniform), then the placement, both over the free variables in index
    /// order.
    pub fn run(&self, start: &Assignment, beta: Beta<'_>, seed: u64) -> Result<PpszRun, EngineError> {
        let free = self.free_vars(start);
        let mut rng = rng_from_seed(seed);
        let beta = match beta {
            Beta::Uniform => {
                let mut b = Assignment::with_capacity(self.formula.num_vars());
                for &v in &free {
                    b.set(v, rng.random::<bool>());
                }
                b
            }
            Beta::Fixed(b) => {
                if let Some(&v) = free.iter().find(|&&v| !b.is_defined(v)) {
                    return Err(EngineError::BetaUndefined(v));
                }
                b.clone()
            }
        };
        let placement = Placement::sample(&free, &mut rng);
        Ok(self.run_with(start, &beta, &placement))
    }

    /// One run with explicit `β` and placement. Variables without a place
    /// that `start` leaves undefined are processed after all placed ones, in
    /// index order.
    pub fn run_with(&self, start: &Assignment, beta: &Assignment, placement: &Placement) -> PpszRun {
        let n = self.formula.num_vars();
        let mut order = placement.order();
        order.retain(|&v| !start.is_defined(v));
        for v in self.free_vars(start) {
            if placement.get(v).is_none() {
                order.push(v);
            }
        }

        let mut alpha = start.clone();
        let mut scratch = Scratch::new(n);
        let mut steps = Vec::with_capacity(order.len());
        let mut res = Vec::with_capacity(self.clauses.len());
        for x in order {
            self.restrict_into(&alpha, &mut res);
            scratch.set_preferences(&res);
            let d = self.params.d;
            let backend = self.params.backend;
            let step = if implication::implies(backend, &res, Lit::pos(x), d, &mut scratch) {
                Step::Forced(true)
            } else if implication::implies(backend, &res, Lit::neg(x), d, &mut scratch) {
                Step::Forced(false)
            } else {
                Step::Guessed(beta.get(x).unwrap_or(false))
            };
            alpha.set(x, step.value());
            steps.push((x, step));
        }
        let forced_count = steps.iter().filter(|(_, s)| s.is_forced()).count();
        PpszRun {
            assignment: alpha,
            stats: RunStats {
                forced_count,
                guessed_count: steps.len() - forced_count,
                steps,
                placement: placement.clone(),
            },
        }
    }

    /// The clauses of `F^[alpha]`.
    fn restrict_into(&self, alpha: &Assignment, out: &mut Vec<ResClause>) {
        out.clear();
        'clauses: for c in &self.clauses {
            let mut kept = [Lit::pos(1); 3];
            let mut len = 0;
            for &l in c.lits() {
                match alpha.lit_value(l) {
                    Some(true) => continue 'clauses,
                    Some(false) => {}
                    None => {
                        kept[len] = l;
                        len += 1;
                    }
                }
            }
            out.push(ResClause::new(&kept[..len]));
        }
    }

    /// Repeats runs with seeds `derive_seed(seed, i)` and returns the first
    /// (lowest `i`) result that satisfies the formula.
    pub fn solve_from(&self, start: &Assignment, repetitions: u64, seed: u64) -> Option<Assignment> {
        (0..repetitions).into_par_iter().find_map_first(|i| {
            let run = self
                .run(start, Beta::Uniform, derive_seed(seed, i))
                .expect("uniform β is always defined");
            self.formula
                .is_satisfied_by(&run.assignment)
                .then_some(run.assignment)
        })
    }
}

pub(crate) fn residual_clauses(formula: &CnfFormula) -> Result<Vec<ResClause>, EngineError> {
    formula
        .clauses()
        .iter()
        .map(|c| {
            if c.len() > 3 {
                Err(EngineError::ClauseTooLong(c.len()))
            } else {
                Ok(ResClause::new(c.lits()))
            }
        })
        .collect()
}

/// One PPSZ run over all declared variables.
pub fn ppsz_run(
    f: &CnfFormula,
    params: PpszParams,
    beta: Beta<'_>,
    seed: u64,
) -> Result<PpszRun, EngineError> {
    PpszEngine::new(f, params)?.run(&Assignment::new(), beta, seed)
}

/// Up to `repetitions` independent runs; the first satisfying assignment
/// found, if any. Never returns a non-satisfying assignment.
pub fn ppsz_solve(
    f: &CnfFormula,
    params: PpszParams,
    repetitions: u64,
    seed: u64,
) -> Result<Option<Assignment>, EngineError> {
    Ok(PpszEngine::new(f, params)?.solve_from(&Assignment::new(), repetitions, seed))
}

/// Whether `u` is `d`-implied by `f` according to `backend`.
pub fn implies(
    f: &CnfFormula,
    u: Lit,
    d: usize,
    backend: ImplicationBackend,
) -> Result<bool, EngineError> {
    let clauses = residual_clauses(f)?;
    let mut scratch = Scratch::new(f.num_vars().max(u.var()));
    scratch.set_preferences(&clauses);
    Ok(implication::implies(backend, &clauses, u, d, &mut scratch))
}

/// Guessed frequencies by placement decile.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessProfile {
    pub trials: u64,
    /// `(guessed, observed)` counts for places in `[i/10, (i+1)/10)`.
    pub buckets: [(u64, u64); 10],
    /// Sum over trials of the number of guessed variables (all variables).
    pub guessed_total: u64,
}

impl GuessProfile {
    pub fn rate(&self, bucket: usize) -> f64 {
        let (g, n) = self.buckets[bucket];
        if n == 0 {
            0.0
        } else {
            g as f64 / n as f64
        }
    }

    /// Binomial standard error of `rate(bucket)`.
    pub fn sigma(&self, bucket: usize) -> f64 {
        let n = self.buckets[bucket].1;
        if n == 0 {
            return 0.0;
        }
        let p = self.rate(bucket);
        (p * (1.0 - p) / n as f64).sqrt()
    }

    pub fn mean_guessed(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.guessed_total as f64 / self.trials as f64
        }
    }

    fn merge(mut self, other: GuessProfile) -> GuessProfile {
        self.trials += other.trials;
        self.guessed_total += other.guessed_total;
        for (a, b) in self.buckets.iter_mut().zip(other.buckets) {
            a.0 += b.0;
            a.1 += b.1;
        }
        self
    }
}

/// Monte Carlo estimate, conditioned on `β = alpha`, of how often a variable
/// is guessed as a function of its place. When `only` is given, the buckets
/// count only those variables.
pub fn guessed_rate_profile(
    f: &CnfFormula,
    alpha: &Assignment,
    params: PpszParams,
    only: Option<&[Var]>,
    trials: u64,
    seed: u64,
) -> Result<GuessProfile, EngineError> {
    if !f.evaluate(alpha)? {
        return Err(EngineError::NotSatisfying);
    }
    let engine = PpszEngine::new(f, params)?;
    let start = Assignment::new();
    if let Some(&v) = engine.free_vars(&start).iter().find(|&&v| !alpha.is_defined(v)) {
        return Err(EngineError::BetaUndefined(v));
    }
    let empty = GuessProfile {
        trials: 0,
        buckets: [(0, 0); 10],
        guessed_total: 0,
    };
    let profile = (0..trials)
        .into_par_iter()
        .map(|t| {
            let run = engine
                .run(&start, Beta::Fixed(alpha), derive_seed(seed, t))
                .expect("β checked above");
            let mut p = GuessProfile {
                trials: 1,
                guessed_total: run.stats.guessed_count as u64,
                ..empty.clone()
            };
            for &(v, step) in &run.stats.steps {
                if only.is_some_and(|vs| !vs.contains(&v)) {
                    continue;
                }
                let place = run.stats.placement.get(v).expect("placed");
                let bucket = ((place * 10.0) as usize).min(9);
                p.buckets[bucket].1 += 1;
                p.buckets[bucket].0 += u64::from(!step.is_forced());
            }
            p
        })
        .reduce(|| empty.clone(), GuessProfile::merge);
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(n: u32, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, clauses).unwrap()
    }

    fn exact(d: usize) -> PpszParams {
        PpszParams::new(d, ImplicationBackend::ExactSubset)
    }

    #[test]
    fn default_bound_values() {
        assert_eq!(default_bound(1), 3);
        assert_eq!(default_bound(8), 3);
        assert_eq!(default_bound(9), 4);
        assert_eq!(default_bound(16), 4);
        assert_eq!(default_bound(17), 5);
    }

    #[test]
    fn unit_clause_is_always_forced() {
        let f = cnf(1, &[&[1]]);
        for seed in 0..20 {
            let run = ppsz_run(&f, exact(1), Beta::Uniform, seed).unwrap();
            assert_eq!(run.assignment, Assignment::from_bools(&[true]));
            assert_eq!(run.stats.guessed_count, 0);
            assert_eq!(run.stats.forced_count, 1);
        }
    }

    #[test]
    fn empty_formula_gives_empty_run() {
        let f = CnfFormula::empty(0);
        let run = ppsz_run(&f, exact(3), Beta::Uniform, 1).unwrap();
        assert!(run.assignment.is_empty());
        assert_eq!(run.stats.forced_count + run.stats.guessed_count, 0);
    }

    #[test]
    fn rejects_long_clauses_and_zero_bound() {
        let f = cnf(4, &[&[1, 2, 3, 4]]);
        assert_eq!(
            ppsz_run(&f, exact(3), Beta::Uniform, 0).unwrap_err(),
            EngineError::ClauseTooLong(4)
        );
        let f = cnf(1, &[&[1]]);
        assert_eq!(
            ppsz_run(&f, exact(0), Beta::Uniform, 0).unwrap_err(),
            EngineError::ZeroBound
        );
    }

    #[test]
    fn fixed_beta_must_cover_free_variables() {
        let f = cnf(2, &[&[1, 2]]);
        let beta = Assignment::from_bools(&[true]);
        assert_eq!(
            ppsz_run(&f, exact(3), Beta::Fixed(&beta), 0).unwrap_err(),
            EngineError::BetaUndefined(2)
        );
    }

    #[test]
    fn run_with_explicit_order() {
        let f = cnf(2, &[&[1], &[-1, 2]]);
        let engine = PpszEngine::new(&f, exact(1)).unwrap();
        let beta = Assignment::from_bools(&[false, false]);
        let late_x1 = Placement::from_pairs(vec![(1, 0.9), (2, 0.1)]);
        let run = engine.run_with(&Assignment::new(), &beta, &late_x1);
        // x2 first: {x̄1, x2} alone does not 1-imply x2, so it copies β.
        assert_eq!(run.stats.step_of(2), Some(Step::Guessed(false)));
        assert_eq!(run.stats.step_of(1), Some(Step::Forced(true)));
        let classes = run.stats.classify(&Assignment::from_bools(&[true, true]));
        assert_eq!(classes, vec![(2, VarOutcome::GuessedWrong), (1, VarOutcome::Forced)]);

        let engine = PpszEngine::new(&f, exact(2)).unwrap();
        let run = engine.run_with(&Assignment::new(), &beta, &late_x1);
        assert_eq!(run.stats.step_of(2), Some(Step::Forced(true)));
    }

    #[test]
    fn start_assignment_is_kept() {
        let f = cnf(3, &[&[1, 2, 3]]);
        let start = Assignment::from_dimacs(&[-1, -2]).unwrap();
        let run = PpszEngine::new(&f, exact(3))
            .unwrap()
            .run(&start, Beta::Uniform, 5)
            .unwrap();
        assert_eq!(run.assignment, Assignment::from_dimacs(&[-1, -2, 3]).unwrap());
        assert_eq!(run.stats.steps, vec![(3, Step::Forced(true))]);
    }

    #[test]
    fn solve_examples() {
        let f = cnf(2, &[&[1], &[-1, 2]]);
        let sol = ppsz_solve(&f, exact(3), 100, 9).unwrap();
        assert_eq!(sol, Some(Assignment::from_bools(&[true, true])));
        let unsat = cnf(1, &[&[1], &[-1]]);
        assert_eq!(ppsz_solve(&unsat, exact(3), 100, 9).unwrap(), None);
        assert_eq!(ppsz_solve(&f, exact(3), 0, 9).unwrap(), None);
    }

    #[test]
    fn solve_is_deterministic() {
        let f = cnf(3, &[&[1, 2, 3], &[-1, 2], &[-2, 3]]);
        let a = ppsz_solve(&f, exact(1), 50, 3).unwrap();
        let b = ppsz_solve(&f, exact(1), 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.is_some_and(|a| f.is_satisfied_by(&a)));
    }

    #[test]
    fn profile_requires_satisfying_reference() {
        let f = cnf(1, &[&[1]]);
        let bad = Assignment::from_bools(&[false]);
        assert_eq!(
            guessed_rate_profile(&f, &bad, exact(1), None, 10, 0).unwrap_err(),
            EngineError::NotSatisfying
        );
    }
}
