use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use z2harm::cover::antiinvariant_cohomology;
use z2harm::flatmodel::{quadratic_differential_form, QuadraticDifferential};
use z2harm::hodge::{harmonic_from_cochain, harmonic_representative, MetricWeights, SolverOptions};
use z2harm::par::Exec;
use z2harm::presets::preset;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("dot");
    for n in [10_000, 1_000_000] {
        let a: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |bench, _| bench.iter(|| exec.dot(&a, &b)));
        }
    }
    g.finish();
}

fn flat_torus(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonic_flat_torus");
    g.sample_size(10);
    for n in [16, 48] {
        let f = quadratic_differential_form(QuadraticDifferential::Pillowcase { n }).unwrap();
        let cover = f.cover().unwrap();
        let w = MetricWeights::uniform(&cover.complex);
        // a lifted form perturbed by an odd exact term, so the solver has work to do
        let mut phi = vec![0.0; cover.complex.n_vertices()];
        for (v, pair) in cover.lifts[0].iter().enumerate() {
            if pair[0] != pair[1] {
                phi[pair[0]] = (v as f64 * 0.7).sin();
                phi[pair[1]] = -phi[pair[0]];
            }
        }
        let rep: Vec<f64> = cover.lift_form(&f.form).iter().zip(cover.complex.coboundary0(&phi)).map(|(a, b)| a + b).collect();
        for (name, exec) in MODES {
            let opts = SolverOptions { exec, ..Default::default() };
            g.bench_with_input(BenchmarkId::new(name, n), &n, |bench, _| {
                bench.iter(|| harmonic_from_cochain(&cover, &w, &rep, vec![], &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn star_tree(c: &mut Criterion) {
    let p = preset("star-tree").unwrap();
    let cover = p.cover().unwrap();
    let basis = antiinvariant_cohomology(&cover).unwrap();
    let w = MetricWeights::uniform(&cover.complex);
    let mut g = c.benchmark_group("harmonic_star_tree");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SolverOptions { exec, ..Default::default() };
        g.bench_function(name, |bench| bench.iter(|| harmonic_representative(&cover, &w, &p.class, &basis, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, kernels, flat_torus, star_tree);
criterion_main!(benches);
