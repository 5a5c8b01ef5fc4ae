use std::collections::BTreeSet;

use itertools::Itertools;
use num_rational::Ratio;

use ppsz_core::cnf::{Assignment, Clause, CnfFormula, Lit, Var};
use ppsz_core::generators::{chain, gen_dense_planted, gen_noncritical_pairs, gen_one_cc, gen_sparse_planted, gen_unique};
use ppsz_core::harness::{estimate_success, EstimateJob, Strategy, SuccessRule};
use ppsz_core::improved::{
    dense_guess, dense_solve, get_ind_2clauses, one_cc, pick_short_clause, ppsz_improved, sparse_solve,
    SolverConfig, SolverError, TwoClauseSample,
};
use ppsz_core::oracle::Oracle;
use ppsz_core::ppsz::{guessed_rate_profile, ppsz_solve, ImplicationBackend, PpszParams};
use ppsz_core::seed::derive_seed;

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn cnf(n: u32, clauses: &[&[i64]]) -> CnfFormula {
    CnfFormula::from_dimacs_clauses(n, clauses).unwrap()
}

fn star() -> CnfFormula {
    let clauses: Vec<Vec<i64>> = (0..5).map(|i| vec![1, 2 + 2 * i, 3 + 2 * i]).collect();
    CnfFormula::from_dimacs_clauses(11, &clauses).unwrap()
}

/// Guessed count for one variable order with `β = α`, computed with the
/// oracle's subset-enumeration implication test.
fn guessed_for_order(f: &CnfFormula, alpha: &Assignment, order: &[Var], d: usize) -> u32 {
    let oracle = Oracle::default();
    let mut partial = Assignment::new();
    let mut guessed = 0;
    for &v in order {
        let g = f.restrict(&partial);
        let lit = Lit::new(v, alpha.get(v).unwrap());
        let forced = oracle.d_implies_exact(&g, lit, d).unwrap();
        assert!(!oracle.d_implies_exact(&g, !lit, d).unwrap(), "unsound forcing");
        if !forced {
            guessed += 1;
        }
        partial.set(v, alpha.get(v).unwrap());
    }
    guessed
}

#[test]
fn success_equals_expected_two_to_minus_guessed() {
    // For uniquely satisfiable formulas, a run succeeds iff every guess is
    // right, so the exact success probability is E[2^(-G)] over orders.
    let oracle = Oracle::default();
    let mut formulas = vec![chain(3), chain(4)];
    for seed in 0..3 {
        formulas.push(gen_unique(4, 60, seed).unwrap());
        formulas.push(gen_one_cc(5, seed).unwrap());
    }
    for inst in &formulas {
        let n = inst.formula.num_vars();
        for d in 1..=3 {
            let mut sum = Ratio::new(0u64, 1);
            let mut count = 0u64;
            for order in (1..=n).permutations(n as usize) {
                let g = guessed_for_order(&inst.formula, &inst.alpha, &order, d);
                sum += Ratio::new(1, 1u64 << g);
                count += 1;
            }
            let expected = sum / count;
            let exact = oracle.exact_ppsz_success(&inst.formula, &inst.alpha, d).unwrap();
            assert_eq!(exact, expected, "{}", inst.formula);
        }
    }
}

#[test]
fn mean_guessed_matches_enumeration() {
    const TRIALS: u64 = 50_000;
    for seed in 0..3 {
        let inst = gen_one_cc(5, 10 + seed).unwrap();
        let d = 2;
        let gs: Vec<f64> = (1..=5u32)
            .permutations(5)
            .map(|o| guessed_for_order(&inst.formula, &inst.alpha, &o, d) as f64)
            .collect();
        let mean = gs.iter().sum::<f64>() / gs.len() as f64;
        let var = gs.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gs.len() as f64;
        let params = PpszParams::new(d, ImplicationBackend::ExactSubset);
        let profile = guessed_rate_profile(&inst.formula, &inst.alpha, params, None, TRIALS, seed).unwrap();
        let tol = 3.0 * (var / TRIALS as f64).sqrt();
        assert!(
            (profile.mean_guessed() - mean).abs() <= tol.max(1e-12),
            "{} vs {mean} (3σ = {tol})",
            profile.mean_guessed()
        );
    }
}

/// Guessed rate of the chain in placement bucket `b`. `x_v` is guessed iff
/// `v > d` and none of its `d` predecessors sits earlier, so the rate is
/// `(n − d)/n · E[(1 − r)^d]` over the bucket.
fn chain_bucket_rate(n: u32, d: usize, b: usize) -> f64 {
    let (lo, hi) = (b as f64 / 10.0, (b + 1) as f64 / 10.0);
    let k = d as i32 + 1;
    let mean = ((1.0 - lo).powi(k) - (1.0 - hi).powi(k)) / (k as f64 * (hi - lo));
    n.saturating_sub(d as u32) as f64 / n as f64 * mean
}

#[test]
fn chain_guess_rule_matches_oracle() {
    for n in 2..=6u32 {
        let c = chain(n);
        for d in 1..=3 {
            for order in (1..=n).permutations(n as usize) {
                let g = guessed_for_order(&c.formula, &c.alpha, &order, d);
                let pos = |v: Var| order.iter().position(|&u| u == v).unwrap();
                let rule = (1..=n)
                    .filter(|&v| v as usize > d && (v as usize - d..v as usize).all(|u| pos(u as Var) > pos(v)))
                    .count() as u32;
                assert_eq!(g, rule, "n={n} d={d} {order:?}");
            }
        }
    }
}

#[test]
fn chain_profile_matches_closed_form() {
    let c = chain(12);
    let params = PpszParams::for_formula(&c.formula);
    let d = params.d;
    let p = guessed_rate_profile(&c.formula, &c.alpha, params, None, 100_000, 1).unwrap();
    assert!(p.rate(9) <= 0.05, "late decile guessed {}", p.rate(9));
    for b in 0..10 {
        let want = chain_bucket_rate(12, d, b);
        let tol = 3.0 * sigma(want, p.buckets[b].1);
        assert!((p.rate(b) - want).abs() <= tol.max(1e-9), "bucket {b}: {} vs {want}", p.rate(b));
    }
}

#[test]
fn star_sources_are_uniform() {
    const RUNS: u64 = 10_000;
    let f = star();
    let mut counts = [0u64; 5];
    for t in 0..RUNS {
        let s = get_ind_2clauses(&f, 1, t).unwrap();
        let leaf = s.clauses[0].lits()[0].var();
        counts[((leaf - 2) / 2) as usize] += 1;
    }
    for k in counts {
        let freq = k as f64 / RUNS as f64;
        assert!((freq - 0.2).abs() <= 3.0 * sigma(0.2, RUNS), "{counts:?}");
    }
}

#[test]
fn dense_guess_marginals() {
    const DRAWS: u64 = 100_000;
    let vp: BTreeSet<Var> = BTreeSet::from([1, 2, 3]);
    let empty = TwoClauseSample::default();
    let half = |k: u64| ((k as f64 / DRAWS as f64) - 0.5).abs() <= 3.0 * sigma(0.5, DRAWS);
    let mut ones = [0u64; 3];
    for t in 0..DRAWS {
        let a = dense_guess(&vp, &empty, t);
        for v in 1..=3 {
            ones[v as usize - 1] += u64::from(a.get(v).unwrap());
        }
    }
    assert!(ones.iter().all(|&k| half(k)), "{ones:?}");

    // A clause reaching outside V_p contributes nothing.
    let outside = TwoClauseSample {
        clauses: vec![Clause::from_dimacs(&[1, 4]).unwrap()],
        sources: vec![],
    };
    let mut ones = 0;
    for t in 0..DRAWS {
        ones += u64::from(dense_guess(&vp, &outside, t).get(1).unwrap());
    }
    assert!(half(ones));

    // For a clause satisfied by α the guess matches α with probability 4/15,
    // for a violated one with 1/5.
    let clause = Clause::from_dimacs(&[1, 2]).unwrap();
    let sample = TwoClauseSample {
        clauses: vec![clause],
        sources: vec![],
    };
    let vp2 = BTreeSet::from([1, 2]);
    for (alpha, p) in [(vec![true, false], 4.0 / 15.0), (vec![false, false], 0.2)] {
        let alpha = Assignment::from_bools(&alpha);
        let hits = (0..DRAWS)
            .filter(|&t| dense_guess(&vp2, &sample, t) == alpha)
            .count() as f64;
        assert!((hits / DRAWS as f64 - p).abs() <= 3.0 * sigma(p, DRAWS));
    }
}

#[test]
fn dense_solve_finds_planted_assignments() {
    let cfg = SolverConfig::default();
    for seed in 0..4 {
        for critical in [false, true] {
            let inst = gen_dense_planted(12 + seed as u32, 1, critical, seed).unwrap();
            let out = dense_solve(&inst.formula, &cfg, seed).unwrap();
            assert_eq!(out.as_ref(), Some(&inst.alpha));
        }
    }
    let zero = SolverConfig {
        dense_repetitions: 0,
        ..SolverConfig::default()
    };
    assert_eq!(dense_solve(&star(), &zero, 0).unwrap(), None);
}

#[test]
fn non_critical_hubs_strip_to_satisfied_clauses() {
    for seed in 0..200 {
        let inst = gen_dense_planted(11, 1, false, seed % 5).unwrap();
        let s = get_ind_2clauses(&inst.formula, 1, seed).unwrap();
        assert_eq!(s.clauses[0].satisfied_count(&inst.alpha), 2);
    }
}

#[test]
fn dense_without_sampling_behaves_like_ppsz() {
    const SEEDS: u64 = 4000;
    let f = chain(10).formula;
    let cfg = SolverConfig {
        p_star_effective: 0.0,
        dense_repetitions: 1,
        delta2_effective: 0.0,
        ..SolverConfig::default()
    };
    let params = cfg.params_for(&f);
    let dense = (0..SEEDS)
        .filter(|&s| dense_solve(&f, &cfg, s).unwrap().is_some())
        .count() as f64
        / SEEDS as f64;
    let plain = (0..SEEDS)
        .filter(|&s| ppsz_solve(&f, params, 1, 1_000_000 + s).unwrap().is_some())
        .count() as f64
        / SEEDS as f64;
    let tol = 3.0 * (sigma(dense, SEEDS).powi(2) + sigma(plain, SEEDS).powi(2)).sqrt();
    assert!((dense - plain).abs() <= tol, "{dense} vs {plain}");
}

#[test]
fn sparse_step_is_consistent_without_critical_short_clauses() {
    for i in 0..20 {
        let inst = gen_noncritical_pairs(9, 10, i).unwrap();
        for t in 0..200 {
            let c = pick_short_clause(&inst.formula, t).unwrap();
            assert!(c.lits().iter().all(|&l| inst.alpha.lit_value(l) == Some(true)));
        }
    }
}

#[test]
fn sparse_solve_examples() {
    let cfg = SolverConfig::default();
    for seed in 0..5 {
        let inst = gen_sparse_planted(10, seed).unwrap();
        let out = sparse_solve(&inst.formula, &cfg, seed).unwrap();
        assert_eq!(out.as_ref(), Some(&inst.alpha));
    }
    let unsat = cnf(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]);
    assert_eq!(sparse_solve(&unsat, &cfg, 0).unwrap(), None);
    let zero = SolverConfig {
        sparse_repetitions: 0,
        ..SolverConfig::default()
    };
    assert_eq!(sparse_solve(&chain(3).formula, &zero, 0).unwrap(), None);
}

#[test]
fn one_cc_examples() {
    let cfg = SolverConfig::default();
    let dense = gen_dense_planted(12, 1, true, 3).unwrap();
    assert_eq!(one_cc(&dense.formula, &cfg, 1).unwrap().as_ref(), Some(&dense.alpha));

    let sparse = gen_sparse_planted(10, 3).unwrap();
    assert!(sparse.formula.max_degree3() <= 4);
    assert!(matches!(
        dense_solve(&sparse.formula, &cfg, 1),
        Err(SolverError::NoHighDegreeVariable { .. })
    ));
    assert_eq!(one_cc(&sparse.formula, &cfg, 1).unwrap().as_ref(), Some(&sparse.alpha));

    let unsat = cnf(1, &[&[1], &[-1]]);
    assert_eq!(one_cc(&unsat, &cfg, 1).unwrap(), None);
}

#[test]
fn improved_without_sweep_is_one_cc() {
    let cfg = SolverConfig {
        ppsz_repetitions: 0,
        dense_repetitions: 3,
        sparse_repetitions: 2,
        ..SolverConfig::default()
    };
    for seed in 0..10 {
        let inst = gen_one_cc(9, seed).unwrap();
        let phase2 = derive_seed(derive_seed(seed, 1), 0);
        assert_eq!(
            ppsz_improved(&inst.formula, &cfg, seed).unwrap(),
            one_cc(&inst.formula, &cfg, phase2).unwrap()
        );
    }
}

#[test]
fn estimate_matches_small_example() {
    const TRIALS: u64 = 100_000;
    let f = chain(2);
    for (d, p) in [(1, 0.75), (3, 1.0)] {
        let cfg = SolverConfig {
            d: Some(d),
            ..SolverConfig::default()
        };
        let job = EstimateJob {
            instance: "F1".into(),
            family: "chain".into(),
            strategy: Strategy::Ppsz,
            trials: TRIALS,
            rule: SuccessRule::ExactAlpha,
            cfg: &cfg,
            seed: 2,
        };
        let r = estimate_success(&f.formula, Some(&f.alpha), &job).unwrap();
        assert!((r.estimate() - p).abs() <= 3.0 * sigma(p, TRIALS), "d={d}: {}", r.estimate());
        // Success is E[2^(-G)] here, so the diagnostic must agree.
        let m = r.mean_pow2_neg_guessed.unwrap();
        assert!(r.estimate() >= m - 3.0 * r.sigma() - 1e-12);
        assert!(m >= r.pow2_neg_mean_guessed().unwrap() - 1e-12);
    }
}
