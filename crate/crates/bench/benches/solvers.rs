use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ppsz_core::cnf::{Assignment, Lit};
use ppsz_core::generators::{chain, gen_dense_planted, gen_one_cc, gen_sparse_planted};
use ppsz_core::improved::{dense_solve, get_ind_2clauses, sparse_solve, SolverConfig};
use ppsz_core::mathkit::{forcing_integral_two_crit, s_constant_quadrature};
use ppsz_core::ppsz::{implies, Beta, ImplicationBackend, PpszEngine, PpszParams};

fn ppsz_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("ppsz_run");
    for n in [8u32, 12, 14] {
        let inst = gen_one_cc(n, 1).unwrap();
        for backend in [ImplicationBackend::ExactSubset, ImplicationBackend::UnitRefutation] {
            let engine = PpszEngine::new(&inst.formula, PpszParams::new(3, backend)).unwrap();
            let mut seed = 0u64;
            g.bench_with_input(BenchmarkId::new(format!("{backend:?}"), n), &n, |b, _| {
                b.iter(|| {
                    seed += 1;
                    engine.run(&Assignment::new(), Beta::Uniform, black_box(seed)).unwrap()
                })
            });
        }
    }
    g.finish();
}

fn implication(c: &mut Criterion) {
    let f = chain(14).formula;
    let mut g = c.benchmark_group("implies");
    for d in [2usize, 4, 6] {
        g.bench_with_input(BenchmarkId::new("exact", d), &d, |b, &d| {
            b.iter(|| implies(black_box(&f), Lit::new(14, true), d, ImplicationBackend::ExactSubset).unwrap())
        });
    }
    g.finish();
}

fn improved(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let dense = gen_dense_planted(14, 1, true, 2).unwrap();
    let sparse = gen_sparse_planted(12, 2).unwrap();
    let mut seed = 0u64;
    c.bench_function("get_ind_2clauses", |b| {
        b.iter(|| {
            seed += 1;
            get_ind_2clauses(&dense.formula, 1, seed).unwrap()
        })
    });
    c.bench_function("dense_solve", |b| b.iter(|| dense_solve(&dense.formula, &cfg, black_box(3)).unwrap()));
    c.bench_function("sparse_solve", |b| b.iter(|| sparse_solve(&sparse.formula, &cfg, black_box(3)).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    c.bench_function("s_quadrature", |b| b.iter(s_constant_quadrature));
    c.bench_function("two_crit_integral", |b| b.iter(forcing_integral_two_crit));
}

criterion_group!(benches, ppsz_runs, implication, improved, quadrature);
criterion_main!(benches);
