use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use solerlab::evolve::{evolve_nls, EvolveOptions, Splitting};
use solerlab::radial::{dirac_eigen, scale_to_dirac_potential, tune_potential, DiracSolver, SchrodingerSolver};
use solerlab::support::{partial_convolution, refinement_pair};
use solerlab::{Alpha, Complex64, Grid2, PeriodicGrid};

fn convolution(c: &mut Criterion) {
    for (n_x, n_w) in [(41, 81), (81, 161)] {
        let grid = Grid2::new(-1.0, 1.0, n_x, -2.0, 2.0, n_w).unwrap();
        let (f, g) = refinement_pair(grid).unwrap();
        c.bench_function(&format!("partial_convolution {n_x}x{n_w}"), |b| {
            b.iter(|| partial_convolution(black_box(&f), black_box(&g)).unwrap())
        });
    }
}

fn shooting(c: &mut Criterion) {
    let (m, omega) = (1.0, 0.95);
    let tuned = tune_potential(m, &SchrodingerSolver::for_mass(m)).unwrap();
    let v = scale_to_dirac_potential(&tuned.potential, m, omega).unwrap();
    let solver = DiracSolver::for_regime(m, omega);
    let mut group = c.benchmark_group("dirac_eigen");
    group.sample_size(10);
    group.bench_function("ground", |b| b.iter(|| dirac_eigen(&v, m, omega, 0, &solver).unwrap()));
    group.bench_function("excited", |b| b.iter(|| dirac_eigen(&v, m, 0.5 * (m + omega), 1, &solver).unwrap()));
    group.finish();
}

fn split_step(c: &mut Criterion) {
    let grid = PeriodicGrid::new(40.0, 1024).unwrap();
    let u0: Vec<Complex64> =
        grid.nodes().iter().map(|x| Complex64::new(2f64.sqrt() / x.cosh(), 0.0)).collect();
    let alpha = Alpha::Power { coef: -1.0, exponent: 1.0 };
    let mut group = c.benchmark_group("nls_1000_steps");
    group.sample_size(10);
    for splitting in [Splitting::Strang, Splitting::Yoshida4] {
        let opts = EvolveOptions { dt: 1e-3, t_final: 1.0, stride: 100, splitting };
        group.bench_function(format!("{splitting:?}"), |b| {
            b.iter(|| evolve_nls(grid, black_box(&u0), &alpha, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, convolution, shooting, split_step);
criterion_main!(benches);
