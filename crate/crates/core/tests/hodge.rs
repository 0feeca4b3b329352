use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use z2harm::cover::BranchedCover;
use z2harm::flatmodel::{quadratic_differential_form, QuadraticDifferential};
use z2harm::hodge::*;

fn flat_torus(n: usize) -> (BranchedCover, Vec<f64>) {
    let f = quadratic_differential_form(QuadraticDifferential::Pillowcase { n }).unwrap();
    let cover = f.cover().unwrap();
    let dx = cover.lift_form(&f.form);
    (cover, dx)
}

/// `dφ` for a random potential with `φ ∘ τ = -φ`.
fn odd_exact(cover: &BranchedCover, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = vec![0.0; cover.complex.n_vertices()];
    for pair in &cover.lifts[0] {
        if pair[0] != pair[1] {
            let r = scale * rng.gen_range(-1.0..1.0);
            phi[pair[0]] = r;
            phi[pair[1]] = -r;
        }
    }
    cover.complex.coboundary0(&phi)
}

#[test]
fn flat_torus_recovers_dx_at_three_levels() {
    for n in [4, 6, 8] {
        let (cover, dx) = flat_torus(n);
        let w = MetricWeights::uniform(&cover.complex);
        let cycles = cover.complex.cocycle_basis().unwrap().cycles;
        let target = periods(&cover.complex, &dx, &cycles).unwrap();
        let rep: Vec<f64> = dx.iter().zip(odd_exact(&cover, 7, 0.3)).map(|(a, b)| a + b).collect();

        let zero = harmonic_from_cochain(&cover, &w, &rep, vec![], &SolverOptions::default()).unwrap();
        let opts = SolverOptions { initial: InitialGuess::Random(11), ..Default::default() };
        let random = harmonic_from_cochain(&cover, &w, &rep, vec![], &opts).unwrap();
        for h in [&zero, &random] {
            assert!(h.residual <= 1e-10, "n = {n}: residual {}", h.residual);
            for (p, t) in h.periods.iter().zip(&target) {
                assert!((p - t).abs() <= 1e-10 * t.abs().max(1.0), "n = {n}: {p} vs {t}");
            }
            let pulled = cover.tau_pullback(&h.cochain);
            assert!(pulled.iter().zip(&h.cochain).all(|(a, b)| *a == -*b));
            let err = h.cochain.iter().zip(&dx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "n = {n}: distance to dx {err}");
        }
        let gap = zero.cochain.iter().zip(&random.cochain).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-8, "n = {n}: starts disagree by {gap}");
    }
}

#[test]
fn exec_modes_agree_bitwise() {
    let (cover, dx) = flat_torus(6);
    let w = MetricWeights::uniform(&cover.complex);
    let rep: Vec<f64> = dx.iter().zip(odd_exact(&cover, 3, 0.5)).map(|(a, b)| a + b).collect();
    let run = |exec| harmonic_from_cochain(&cover, &w, &rep, vec![], &SolverOptions { exec, ..Default::default() }).unwrap();
    let (a, b) = (run(z2harm::par::Exec::Sequential), run(z2harm::par::Exec::Parallel));
    assert!(a.cochain.iter().zip(&b.cochain).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn open_cochain_is_rejected() {
    let (cover, mut dx) = flat_torus(4);
    dx[0] += 1.0;
    let w = MetricWeights::uniform(&cover.complex);
    assert!(matches!(harmonize_antiinvariant(&cover, &w, &dx, &SolverOptions::default()), Err(HodgeError::NotClosed(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn harmonic_form_minimizes_energy_in_its_class(seed in any::<u64>(), scale in 1e-3f64..1.0) {
        let (cover, dx) = flat_torus(4);
        let w = MetricWeights::uniform(&cover.complex);
        let rep: Vec<f64> = dx.iter().zip(odd_exact(&cover, seed, 0.4)).map(|(a, b)| a + b).collect();
        let h = harmonic_from_cochain(&cover, &w, &rep, vec![], &SolverOptions::default()).unwrap();
        let bumped: Vec<f64> = h.cochain.iter().zip(odd_exact(&cover, seed ^ 0x5a5a, scale)).map(|(a, b)| a + b).collect();
        prop_assert!(energy(&h.cochain, &w) <= energy(&bumped, &w) + 1e-12);
        prop_assert!(closedness_defect(&cover.complex, &h.cochain) < 1e-12);
    }
}
