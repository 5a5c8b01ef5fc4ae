use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use super::{pad_inert, SolverConfig, SolverError};
use crate::cnf::{Assignment, Clause, CnfFormula, Lit, Var};
use crate::ppsz::{Beta, PpszEngine};
use crate::seed::{derive_seed, rng_from_seed, SolverRng};

/// Pairwise variable-disjoint 2-clauses cut out of 3-clauses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TwoClauseSample {
    pub clauses: Vec<Clause>,
    /// For each clause: the 3-clause it came from and the deleted literal.
    pub sources: Vec<(Clause, Lit)>,
}

impl TwoClauseSample {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }
}

/// Greedy extraction of `quota` independent 2-clauses. Each round takes the
/// smallest-index variable of 3-clause degree at least 5 among the remaining
/// 3-clauses, removes it from one of its 3-clauses chosen uniformly, and
/// drops every remaining 3-clause that shares a variable with the result.
pub fn get_ind_2clauses(f: &CnfFormula, quota: usize, seed: u64) -> Result<TwoClauseSample, SolverError> {
    get_ind_2clauses_with(f, quota, &mut rng_from_seed(seed))
}

fn get_ind_2clauses_with(
    f: &CnfFormula,
    quota: usize,
    rng: &mut SolverRng,
) -> Result<TwoClauseSample, SolverError> {
    let mut f3: Vec<&Clause> = f.clauses().iter().filter(|c| c.len() == 3).collect();
    let mut sample = TwoClauseSample::default();
    let mut degree = vec![0usize; f.num_vars() as usize + 1];
    for _ in 0..quota {
        degree.iter_mut().for_each(|d| *d = 0);
        for c in &f3 {
            for v in c.vars() {
                degree[v as usize] += 1;
            }
        }
        let Some(x) = (1..degree.len()).find(|&v| degree[v] >= 5) else {
            return Err(SolverError::NoHighDegreeVariable {
                found: sample.len(),
                quota,
                partial: sample,
            });
        };
        let x = x as Var;
        let holders: Vec<&Clause> = f3.iter().copied().filter(|c| c.contains_var(x)).collect();
        let chosen = holders[rng.random_range(0..holders.len())];
        let two = chosen.without_var(x);
        f3.retain(|c| !two.vars().any(|v| c.contains_var(v)));
        sample.sources.push((chosen.clone(), chosen.lit_over(x).expect("holder")));
        sample.clauses.push(two);
    }
    Ok(sample)
}

/// Biased guess on `v_pstar`: each sampled 2-clause lying inside `v_pstar`
/// gets its violating literal pattern with probability 3/15 and each
/// satisfying one with 4/15; other variables get fair bits.
pub fn dense_guess(v_pstar: &BTreeSet<Var>, sample: &TwoClauseSample, seed: u64) -> Assignment {
    dense_guess_with(v_pstar, sample, &mut rng_from_seed(seed))
}

fn dense_guess_with(v_pstar: &BTreeSet<Var>, sample: &TwoClauseSample, rng: &mut SolverRng) -> Assignment {
    let mut alpha = Assignment::new();
    for c in &sample.clauses {
        if !c.vars().all(|v| v_pstar.contains(&v)) {
            continue;
        }
        let (u, w) = (c.lits()[0], c.lits()[1]);
        let (bu, bw) = match rng.random_range(0..15u8) {
            0..3 => (false, false),
            3..7 => (false, true),
            7..11 => (true, false),
            _ => (true, true),
        };
        alpha.set(u.var(), u.is_positive() == bu);
        alpha.set(w.var(), w.is_positive() == bw);
    }
    for &v in v_pstar {
        if !alpha.is_defined(v) {
            alpha.set(v, rng.random::<bool>());
        }
    }
    alpha
}

pub(crate) fn dense_from(
    f: &CnfFormula,
    base: &Assignment,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Option<Assignment>, SolverError> {
    let g = f.restrict(base);
    let live = g.vars();
    let quota = (cfg.delta2_effective * live.len() as f64 - 1e-9).ceil().max(0.0) as usize;
    let sample = get_ind_2clauses(&g, quota, derive_seed(seed, 0))?;
    let engine = PpszEngine::new(f, cfg.params_for(f))?;
    let start = pad_inert(f, &live, base);
    let found = (0..cfg.dense_repetitions).into_par_iter().find_map_first(|i| {
        let mut rng = rng_from_seed(derive_seed(seed, i + 1));
        let v_p: BTreeSet<Var> = live
            .iter()
            .copied()
            .filter(|_| rng.random_bool(cfg.p_star_effective))
            .collect();
        let guess = dense_guess_with(&v_p, &sample, &mut rng);
        let start = start.union(&guess).expect("guess avoids fixed variables");
        let run = engine
            .run(&start, Beta::Uniform, rng.random())
            .expect("uniform β");
        f.is_satisfied_by(&run.assignment).then_some(run.assignment)
    });
    Ok(found)
}

/// Extracts the 2-clause sample once, then repeats: sample `V_p*`, guess it
/// with `dense_guess`, and complete with one PPSZ run. Fails when the
/// extraction fails.
pub fn dense_solve(f: &CnfFormula, cfg: &SolverConfig, seed: u64) -> Result<Option<Assignment>, SolverError> {
    cfg.validate()?;
    dense_from(f, &Assignment::new(), cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> CnfFormula {
        let clauses: Vec<Vec<i64>> = (0..5).map(|i| vec![1, 2 + 2 * i, 3 + 2 * i]).collect();
        CnfFormula::from_dimacs_clauses(11, &clauses).unwrap()
    }

    #[test]
    fn fails_without_high_degree() {
        let f = CnfFormula::from_dimacs_clauses(3, &[[1, 2, 3]]).unwrap();
        assert!(matches!(
            get_ind_2clauses(&f, 1, 0),
            Err(SolverError::NoHighDegreeVariable { found: 0, quota: 1, .. })
        ));
        assert_eq!(get_ind_2clauses(&f, 0, 0).unwrap(), TwoClauseSample::default());
    }

    #[test]
    fn star_yields_one_leaf_pair() {
        let f = star();
        let s = get_ind_2clauses(&f, 1, 4).unwrap();
        assert_eq!(s.len(), 1);
        let (src, lit) = &s.sources[0];
        assert_eq!(*lit, Lit::pos(1));
        assert_eq!(src.without_var(1), s.clauses[0]);
        // Only one high-degree variable, and it loses a clause.
        assert!(get_ind_2clauses(&f, 2, 4).is_err());
    }

    #[test]
    fn guess_respects_membership() {
        let s = TwoClauseSample {
            clauses: vec![Clause::from_dimacs(&[1, -2]).unwrap()],
            sources: vec![],
        };
        let vp = BTreeSet::from([1, 3]);
        let a = dense_guess(&vp, &s, 7);
        assert_eq!(a.domain(), vec![1, 3]);
        let vp = BTreeSet::from([1, 2]);
        for seed in 0..50 {
            assert_eq!(dense_guess(&vp, &s, seed).domain(), vec![1, 2]);
        }
    }

    #[test]
    fn zero_budget_finds_nothing() {
        let f = star();
        let cfg = SolverConfig {
            dense_repetitions: 0,
            ..SolverConfig::default()
        };
        assert_eq!(dense_solve(&f, &cfg, 0).unwrap(), None);
    }
}
