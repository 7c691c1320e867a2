use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use procrustean::ensemble::{distill_ensemble, sample_ensemble, sweep_grid, EnsembleSpec, SweepSpec};
use procrustean::povm::{distill_ghz, distill_pair, DistillParams};
use procrustean::qubit::PureState;
use procrustean::tdse::{init_gaussian, potential_term, Grid2D, PhysicalParams, Stepper, TermSpec};
use procrustean::Complex64;

fn weak_pair() -> DistillParams {
    DistillParams { phi: PI / 6.0, gamma: PI / 2.0 }
}

fn povm(c: &mut Criterion) {
    let p = weak_pair();
    let (a, b) = p.amplitudes();
    let pair = PureState::schmidt_pair(a, b).unwrap();
    c.bench_function("distill_pair", |bch| bch.iter(|| distill_pair(black_box(&pair), &p, 0).unwrap()));
    let mut group = c.benchmark_group("distill_ghz");
    for n in [3, 6, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, &n| bch.iter(|| distill_ghz(n, a, b).unwrap()));
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let samples = sample_ensemble(&EnsembleSpec::gaussian(0.75, 0.01, 10_000, 1)).unwrap();
    let p = DistillParams { phi: 0.75f64.sqrt().acos(), gamma: 0.0 };
    c.bench_function("distill_ensemble_1e4", |bch| bch.iter(|| distill_ensemble(black_box(&samples), &p).unwrap()));
    let spec = SweepSpec {
        phi_axis: (0..10).map(|i| i as f64 * PI / 40.0).collect(),
        s_in_axis: (0..10).map(|i| 0.1 + 0.08 * i as f64).collect(),
        sigma: 0.01,
        size: 1_000,
        seed: 3,
        gamma: 0.0,
    };
    c.bench_function("sweep_10x10_1e3", |bch| bch.iter(|| sweep_grid(black_box(&spec)).unwrap()));
}

fn tdse(c: &mut Criterion) {
    let params = PhysicalParams::default();
    let mut group = c.benchmark_group("tdse_step");
    for dx in [0.2, 0.1] {
        let grid = Grid2D::covering([-4.0, 4.0], [-13.0, 13.0], dx).unwrap();
        let trap = potential_term(&TermSpec::HarmonicTrap { centers: vec![[0.0, 0.0]] }, &params).unwrap();
        let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut field = init_gaussian(grid, [0.0, 0.0], params.ground_width(), [0.0, 0.0], [half, half]).unwrap();
        let mut stepper = Stepper::new(grid, &[trap], &params, 0.0).unwrap();
        let dt = 0.5 * stepper.max_stable_dt();
        let label = format!("{}x{}", grid.nx, grid.ny);
        group.bench_function(BenchmarkId::from_parameter(label), |bch| {
            bch.iter(|| stepper.step(&mut field, dt).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, povm, ensemble, tdse);
criterion_main!(benches);
