use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use z2harm::flatmodel::*;

fn grid(stations: usize) -> Vec<(Complex64, f64)> {
    let mut g = Vec::new();
    for t in 0..stations {
        for r in [0.2, 0.1] {
            for k in 0..12 {
                g.push((Complex64::from_polar(r, 0.1 + k as f64 * std::f64::consts::TAU / 12.0), t as f64));
            }
        }
    }
    g
}

#[test]
fn noisy_fits_stay_within_tolerance() {
    let a = Complex64::new(0.3, -0.2);
    let b = Complex64::new(1.5, 0.7);
    let noise = Normal::new(0.0, 1e-6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut s = sample_flat_model(a, b, &grid(3));
        for v in &mut s.values {
            *v += noise.sample(&mut rng);
        }
        for f in fit_leading_coefficients(&s).unwrap() {
            worst = worst.max((f.a - a).norm()).max((f.b - b).norm());
        }
    }
    assert!(worst < 1e-3, "worst coefficient error {worst}");
}

#[test]
fn verdicts_on_canonical_cases() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let verdict = |per_station: &[(Complex64, Complex64)]| {
        let mut fits = Vec::new();
        for (t, &(a, b)) in per_station.iter().enumerate() {
            let g: Vec<_> = grid(1).into_iter().map(|(z, _)| (z, t as f64)).collect();
            fits.extend(fit_leading_coefficients(&sample_flat_model(a, b, &g)).unwrap());
        }
        nondegeneracy_test(&[fits], 1e-6, 1e-4)[0].verdict
    };
    assert_eq!(verdict(&[(zero, one), (zero, 2.0 * one)]), Verdict::Nondegenerate);
    assert_eq!(verdict(&[(zero, one), (0.5 * one, one)]), Verdict::DegenerateA { station: 1.0 });
    assert_eq!(verdict(&[(zero, one), (zero, zero)]), Verdict::VanishingB { station: 1.0 });
}

proptest! {
    #[test]
    fn noiseless_samples_recover_the_coefficients(re_a in -2.0f64..2.0, im_a in -2.0f64..2.0, re_b in -2.0f64..2.0, im_b in -2.0f64..2.0) {
        let (a, b) = (Complex64::new(re_a, im_a), Complex64::new(re_b, im_b));
        let s = sample_flat_model(a, b, &grid(2));
        prop_assert!(s.is_antisymmetric());
        for f in fit_leading_coefficients(&s).unwrap() {
            prop_assert!((f.a - a).norm() < 1e-10 && (f.b - b).norm() < 1e-10, "{f:?}");
        }
    }
}
