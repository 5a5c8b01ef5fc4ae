use ppsz_core::cnf::CnfFormula;
use ppsz_core::generators::{
    chain, default_clause_budget, gen_dense_planted, gen_multi_critical, gen_one_cc, gen_sparse_planted, gen_unique,
    generate, parse_metadata, Family, PlantedInstance,
};
use ppsz_core::improved::get_ind_2clauses;
use ppsz_core::oracle::Oracle;

fn check_tagged(inst: &PlantedInstance) {
    let o = Oracle::default();
    assert!(inst.formula.evaluate(&inst.alpha).unwrap());
    assert!(inst.verified);
    assert_eq!(o.unique_solution(&inst.formula).unwrap().as_ref(), Some(&inst.alpha));
}

#[test]
fn unique_small_cases() {
    for seed in 0..5 {
        let one = gen_unique(1, default_clause_budget(1), seed).unwrap();
        assert_eq!(one.formula.len(), 1);
        assert_eq!(one.formula.clauses()[0].len(), 1);
        check_tagged(&one);

        let eight = gen_unique(8, default_clause_budget(8), seed).unwrap();
        assert_eq!(Oracle::default().count_satisfying(&eight.formula, 2).unwrap(), 1);
        check_tagged(&eight);
    }
}

#[test]
fn every_family_is_deterministic() {
    for family in Family::ALL {
        let n = if family == Family::DensePlanted { 13 } else { 9 };
        let a = generate(family, n, 1, true, 42).unwrap();
        let b = generate(family, n, 1, true, 42).unwrap();
        assert_eq!(a, b, "{family}");
        assert!(a.formula.evaluate(&a.alpha).unwrap(), "{family}");
    }
}

#[test]
fn one_cc_outputs_pass_the_oracle() {
    let o = Oracle::default();
    for seed in 0..10 {
        let inst = gen_one_cc(8, seed).unwrap();
        check_tagged(&inst);
        assert!(o.critical_clauses(&inst.formula, &inst.alpha).unwrap().is_one_cc());
    }
}

#[test]
fn chains_are_one_cc() {
    let o = Oracle::default();
    for n in 1..=12 {
        let c = chain(n);
        assert_eq!(o.unique_solution(&c.formula).unwrap().as_ref(), Some(&c.alpha));
        assert!(o.critical_clauses(&c.formula, &c.alpha).unwrap().is_one_cc(), "n={n}");
    }
    let f1 = CnfFormula::from_dimacs_clauses(2, &[&[1][..], &[-1, 2]]).unwrap();
    assert_eq!(chain(2).formula, f1);
}

#[test]
fn dense_hubs() {
    for seed in 0..5 {
        for critical in [false, true] {
            let inst = gen_dense_planted(14, 1, critical, seed).unwrap();
            check_tagged(&inst);
            assert!(Oracle::default()
                .critical_clauses(&inst.formula, &inst.alpha)
                .unwrap()
                .is_one_cc());
            assert!(inst.formula.max_degree3() >= 5);
            assert_eq!(get_ind_2clauses(&inst.formula, 1, seed).unwrap().len(), 1);
        }
    }
    assert!(gen_dense_planted(10, 1, false, 0).is_err());
}

#[test]
fn sparse_planted_has_low_degree() {
    for seed in 0..5 {
        let inst = gen_sparse_planted(10, seed).unwrap();
        check_tagged(&inst);
        assert!(inst.formula.max_degree3() <= 4);
    }
}

#[test]
fn multi_critical_counts_and_removal() {
    let o = Oracle::default();
    for seed in 0..4 {
        let inst = gen_multi_critical(8, seed).unwrap();
        check_tagged(&inst);
        let report = o.critical_clauses(&inst.formula, &inst.alpha).unwrap();
        assert_eq!(report.multi_critical_count(), 8);
        for v in inst.formula.vars() {
            for c in report.clauses_for(v) {
                let rest: Vec<_> = inst.formula.clauses().iter().filter(|&k| k != c).cloned().collect();
                let g = CnfFormula::new(inst.formula.num_vars(), rest).unwrap();
                assert_eq!(o.unique_solution(&g).unwrap().as_ref(), Some(&inst.alpha), "drop {c}");
            }
        }
    }
}

#[test]
fn metadata_round_trips() {
    let inst = gen_one_cc(6, 3).unwrap();
    let m = parse_metadata(&inst.metadata()).unwrap();
    assert_eq!(m.family, Family::OneCc);
    assert_eq!(m.seed, 3);
    assert_eq!(m.n, 6);
    assert_eq!(m.alpha, inst.alpha);
    assert!(m.verified);
}

#[test]
fn above_the_cap_tags_degrade() {
    let inst = generate(Family::Chain, 40, 1, false, 0).unwrap();
    assert!(!inst.verified);
    assert_eq!(inst.family, Family::Planted);
    assert!(inst.metadata().contains("unique=unverified"));
}
