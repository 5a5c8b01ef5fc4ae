use rand::Rng;
use rayon::prelude::*;

use super::{extend, pad_inert, subset_assignments, SolverConfig, SolverError};
use crate::analysis::subset_size;
use crate::cnf::{Assignment, Clause, CnfFormula};
use crate::mathkit::{s_constant, SPARSE_GATE_SAVINGS};
use crate::ppsz::{Beta, PpszEngine};
use crate::seed::{derive_seed, rng_from_seed, SolverRng};

/// A uniformly chosen clause of size at most two, if any.
pub fn pick_short_clause(f: &CnfFormula, seed: u64) -> Option<Clause> {
    pick_short_with(f, &mut rng_from_seed(seed)).cloned()
}

fn pick_short_with<'f>(f: &'f CnfFormula, rng: &mut SolverRng) -> Option<&'f Clause> {
    let short: Vec<&Clause> = f.clauses().iter().filter(|c| c.len() <= 2).collect();
    if short.is_empty() {
        None
    } else {
        Some(short[rng.random_range(0..short.len())])
    }
}

/// Probability of calling the low-degree solver on `live` variables.
pub(crate) fn gate_probability(live: usize) -> f64 {
    (-(s_constant() - SPARSE_GATE_SAVINGS) * live as f64).exp2()
}

/// One branch: alternate a PPSZ run, the (gated) low-degree solver, and
/// setting both literals of a random short clause, until success or dead end.
fn branch(
    f: &CnfFormula,
    engine: &PpszEngine<'_>,
    fixed: Assignment,
    cfg: &SolverConfig,
    rng: &mut SolverRng,
) -> Option<Assignment> {
    let mut fixed = fixed;
    loop {
        let g = f.restrict(&fixed);
        if g.has_empty_clause() {
            return None;
        }
        let live = g.vars();
        let start = pad_inert(f, &live, &fixed);
        let run = engine
            .run(&start, Beta::Uniform, rng.random())
            .expect("uniform β");
        if f.is_satisfied_by(&run.assignment) {
            return Some(run.assignment);
        }
        if live.is_empty() {
            return None;
        }

        let short = g.clauses().iter().filter(|c| c.len() <= 2).count();
        if short * 10 <= live.len()
            && (!cfg.wahlstroem_gate || rng.random::<f64>() < gate_probability(live.len()))
        {
            if let Some(sol) = cfg.low_degree_solver.solve(&g) {
                let full = pad_inert(f, &live, &fixed.union(&sol)?);
                if f.is_satisfied_by(&full) {
                    return Some(full);
                }
            }
        }

        let c = pick_short_with(&g, rng)?;
        for &l in c.lits() {
            fixed.set_lit(l);
        }
    }
}

pub(crate) fn sparse_from(
    f: &CnfFormula,
    base: &Assignment,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    let engine = PpszEngine::new(f, cfg.params_for(f))?;
    let vars = f.restrict(base).vars();
    let k = subset_size(cfg.delta2_effective, vars.len());
    let found = (0..cfg.sparse_repetitions).into_par_iter().find_map_first(|rep| {
        let rep_seed = derive_seed(seed, rep);
        subset_assignments(&vars, k).enumerate().find_map(|(i, pairs)| {
            let mut rng = rng_from_seed(derive_seed(rep_seed, i as u64));
            branch(f, &engine, extend(base, &pairs), cfg, &mut rng)
        })
    });
    Ok(found)
}

/// Sparse case: for each repetition, each subset `W` of
/// `⌊delta2_effective · n⌋` variables and each assignment to it, one branch.
pub fn sparse_solve(f: &CnfFormula, cfg: &SolverConfig, seed: u64) -> Result<Option<Assignment>, SolverError> {
    cfg.validate()?;
    sparse_from(f, &Assignment::new(), cfg, seed)
}
