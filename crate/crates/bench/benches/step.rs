use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use rlogse::experiments::preset;
use rlogse::{solve_stage_system, ButcherTableau, Integrator, SolverConfig, SpectralOperator, StageSystem};

fn integrator(name: &str, desk: bool) -> (Integrator, rlogse::ComplexField) {
    let p = preset(name, desk).unwrap();
    let grid = p.grid().unwrap();
    let cfg = SolverConfig::new(0.01).with_sweeps(p.sweeps);
    let integ = Integrator::new(&grid, ButcherTableau::gauss2(), cfg, p.params().unwrap()).unwrap();
    (integ, p.initial.sample(&grid))
}

fn steps(c: &mut Criterion) {
    let (integ, u) = integrator("accuracy-1d", false);
    c.bench_function("step_1d_n512", |b| b.iter(|| integ.step(black_box(&u)).unwrap()));

    let (integ, u) = integrator("cases-2d/I", true);
    c.bench_function("step_2d_n128", |b| b.iter(|| integ.step(black_box(&u)).unwrap()));
}

fn stage_solve(c: &mut Criterion) {
    let p = preset("cases-1d/I", false).unwrap();
    let grid = p.grid().unwrap();
    let op = Arc::new(SpectralOperator::new(&grid));
    let u = p.initial.sample(&grid);
    let t = ButcherTableau::gauss2();
    let rhs = vec![u.clone(), u];
    c.bench_function("stage_solve_1d_n1024", |b| {
        b.iter(|| {
            let sys = StageSystem {
                a: t.a(),
                tau: 5e-3,
                rhs: &rhs,
            };
            solve_stage_system(&op, black_box(&sys)).unwrap()
        })
    });
}

criterion_group!(benches, steps, stage_solve);
criterion_main!(benches);
