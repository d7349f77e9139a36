use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use persuade_core::builtins::{Morale, Retailer};
use persuade_core::grid::{solve_grid, GridMethod, GridSpec};
use persuade_core::lp::LinearProgram;
use persuade_core::one_state::{solve_one_state, OneStateInstance, OneStateOptions};
use persuade_core::transport::{assortative, solve_mk, TransportInstance};
use persuade_core::{Distribution, PersuasionProblem};

/// A dense feasible LP: maximize a positive objective over random-looking rows.
fn dense_lp(n: usize) -> LinearProgram {
    let c: Vec<f64> = (0..n).map(|j| 1.0 + (j % 7) as f64 * 0.1).collect();
    let mut lp = LinearProgram::maximize(c);
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| 1.0 + ((i * 31 + j * 17) % 13) as f64 / 13.0).collect();
        lp.add_le(row, 10.0 + i as f64);
    }
    lp
}

fn lp(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp_dense");
    for n in [20, 60] {
        let prog = dense_lp(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &prog, |b, p| b.iter(|| black_box(p.solve().unwrap())));
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let problem = PersuasionProblem::binary(0.3, 2, Arc::new(Retailer)).unwrap();
    let mut g = c.benchmark_group("grid_retailer");
    g.sample_size(10);
    for m in [10, 20] {
        let spec = GridSpec::binary(m).unwrap();
        g.bench_with_input(BenchmarkId::new("primal", m), &spec, |b, s| {
            b.iter(|| black_box(solve_grid(&problem, s, GridMethod::Primal).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("dual", m), &spec, |b, s| {
            b.iter(|| black_box(solve_grid(&problem, s, GridMethod::Dual).unwrap()))
        });
    }
    g.finish();
}

fn transport(c: &mut Criterion) {
    let marginal = |n: usize| {
        Distribution::new((0..n).map(|i| (i as f64 / n as f64, 1.0 / n as f64)).collect()).unwrap()
    };
    let inst = TransportInstance::new(
        vec![marginal(12), marginal(12), marginal(6)],
        Arc::new(|z: &[f64]| z.iter().product()),
    )
    .unwrap();
    let mut g = c.benchmark_group("transport");
    g.sample_size(10);
    g.bench_function("lp", |b| b.iter(|| black_box(solve_mk(&inst).unwrap())));
    g.bench_function("assortative", |b| b.iter(|| black_box(assortative(inst.marginals()).unwrap())));
    g.finish();
}

fn one_state(c: &mut Criterion) {
    let inst = OneStateInstance::new(PersuasionProblem::binary(0.5, 2, Arc::new(Morale)).unwrap(), 0).unwrap();
    let mut g = c.benchmark_group("one_state");
    g.sample_size(10);
    g.bench_function("morale", |b| {
        b.iter(|| black_box(solve_one_state(&inst, &OneStateOptions::default()).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, lp, grid, transport, one_state);
criterion_main!(benches);
