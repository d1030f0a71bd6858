use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;

use ssvlab::nn::{init_params, Activation, Arch, FcnArch, MlpArch};
use ssvlab::profiles::lamb_oseen_exact;
use ssvlab::solvers::{ColeHopf, Ns2dConfig, Ns2dSolver};
use ssvlab::training::{sample_paired_batch_ns, ArchKind, ExperimentConfig};
use ssvlab::{FieldSeries, Grid, Grid1D, Grid2D, ScalarFieldSnapshot, SeededRng, System};

fn ns_steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("ns2d_10_steps");
    g.sample_size(10);
    for n in [64, 128, 256] {
        let grid = Grid2D::new(n, 20.0).unwrap();
        let cfg = Ns2dConfig { grid, dt: 2.5e-3, t_end: 0.025, dt_out: 0.025, ..Ns2dConfig::reference_default() };
        let w0 = ScalarFieldSnapshot::from_fn(Grid::D2(grid), 0.0, |p| lamb_oseen_exact([p[0], p[1]], 0.0, 1.0)).unwrap();
        let mut solver = Ns2dSolver::new(grid);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solver.run(&w0, &cfg, |s| { black_box(s); Ok(()) }).unwrap())
        });
    }
    g.finish();
}

fn cole_hopf(c: &mut Criterion) {
    let ch = ColeHopf::bipolar_box();
    let grid = Grid1D::new(2048, -15.0, 15.0).unwrap();
    c.bench_function("cole_hopf_2048_nodes", |b| b.iter(|| ch.series(grid, black_box(&[1.0])).unwrap()));
}

fn gradients(c: &mut Criterion) {
    let mut g = c.benchmark_group("grad_mse_batch_1024");
    let arches = [
        ("mlp_3x64", Arch::Mlp(MlpArch { input_dim: 3, hidden: vec![64; 3], activation: Activation::Tanh })),
        (
            "fcn_2x32_3x64_k32",
            Arch::Fcn(FcnArch {
                input_dim: 3,
                branch_hidden: vec![32; 2],
                trunk_hidden: vec![64; 3],
                latent: 32,
                activation: Activation::Tanh,
            }),
        ),
    ];
    for (name, arch) in arches {
        let mut rng = SeededRng::new(0);
        let p = init_params(&mut rng, &arch).unwrap();
        let x = Array2::from_shape_fn((1024, 3), |_| rng.uniform());
        let y: Vec<f64> = (0..1024).map(|_| rng.uniform()).collect();
        g.bench_function(name, |b| b.iter(|| p.grad_mse(x.view(), black_box(&y)).unwrap()));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let grid = Grid::D2(Grid2D::new(256, 20.0).unwrap());
    let snaps = (0..=30)
        .map(|k| {
            let t = k as f64 / 100.0;
            ScalarFieldSnapshot::from_fn(grid, t, |p| lamb_oseen_exact([p[0], p[1]], t, 1.0)).unwrap()
        })
        .collect();
    let reference = FieldSeries::new(snaps).unwrap();
    let cfg = ExperimentConfig::desk_for(System::Ns2d, ArchKind::Mlp);
    let mut rng = SeededRng::new(1);
    c.bench_function("ns_paired_batch_1024", |b| {
        b.iter(|| sample_paired_batch_ns(&mut rng, &cfg, &reference).unwrap())
    });
}

criterion_group!(benches, ns_steps, cole_hopf, gradients, sampling);
criterion_main!(benches);
