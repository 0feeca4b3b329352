//! The local model `f = Re(A ζ^{1/2} + B ζ^{3/2})` near the branch locus:
//! sampling, least-squares fitting of the leading coefficients and the
//! nondegeneracy verdict. Exact flat examples live in [`surfaces`].

mod stations;
pub mod surfaces;

pub use stations::*;
pub use surfaces::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::ComplexError;
use crate::cover::CoverError;

#[derive(Debug, Error)]
pub enum FlatError {
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
    #[error("inconsistent sheet assignment: {0}")]
    Monodromy(String),
    #[error("invalid surface: {0}")]
    Surface(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// A sample location: `ζ` in the normal disk, station `t` along the
/// component, and the sheet (`+1` or `-1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub zeta: Complex64,
    pub station: f64,
    pub sheet: i8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<Sample>,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn push(&mut self, s: Sample, value: f64) {
        self.points.push(s);
        self.values.push(value);
    }

    /// Every sample whose mirror `(ζ, t, −sheet)` is present has the
    /// opposite value, bit for bit.
    pub fn is_antisymmetric(&self) -> bool {
        self.points.iter().enumerate().all(|(i, p)| {
            self.points.iter().enumerate().all(|(j, q)| {
                !(p.zeta == q.zeta && p.station == q.station && p.sheet == -q.sheet) || self.values[i] == -self.values[j]
            })
        })
    }
}

/// `sheet · Re(A ζ^{1/2} + B ζ^{3/2})` with the principal square root.
pub fn flat_model_value(a: Complex64, b: Complex64, zeta: Complex64, sheet: i8) -> f64 {
    let s = zeta.sqrt();
    let v = (a * s + b * zeta * s).re;
    if sheet < 0 {
        -v
    } else {
        v
    }
}

/// Samples the model on both sheets at every `(ζ, station)` of `grid`.
pub fn sample_flat_model(a: Complex64, b: Complex64, grid: &[(Complex64, f64)]) -> SampleSet {
    let mut set = SampleSet::default();
    for &(zeta, station) in grid {
        for sheet in [1, -1] {
            set.push(Sample { zeta, station, sheet }, flat_model_value(a, b, zeta, sheet));
        }
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingCoefficients {
    pub station: f64,
    pub a: Complex64,
    pub b: Complex64,
    /// RMS misfit of the least-squares fit.
    pub fit_residual: f64,
}

fn distinct(mut xs: Vec<f64>, tol: f64) -> usize {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= tol * b.abs().max(1.0));
    xs.len()
}

/// Least-squares fit of `(Re A, Im A, Re B, Im B)` at a single station.
pub fn fit_station(points: &[Sample], values: &[f64]) -> Result<LeadingCoefficients, FlatError> {
    let n = points.len();
    if n < 4 {
        return Err(FlatError::DegenerateSamples(format!("{n} samples, need at least 4")));
    }
    if distinct(points.iter().map(|p| p.zeta.norm()).collect(), 1e-9) < 2 {
        return Err(FlatError::DegenerateSamples("fewer than 2 distinct radii".into()));
    }
    if distinct(points.iter().map(|p| p.zeta.arg()).collect(), 1e-9) < 3 {
        return Err(FlatError::DegenerateSamples("fewer than 3 distinct angles".into()));
    }
    let design = DMatrix::from_fn(n, 4, |i, j| {
        let p = points[i];
        let s = p.zeta.sqrt();
        let w = if j < 2 { s } else { p.zeta * s };
        let v = if j % 2 == 0 { w.re } else { -w.im };
        if p.sheet < 0 {
            -v
        } else {
            v
        }
    });
    let y = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.min() <= 1e-12 * smax {
        return Err(FlatError::DegenerateSamples("rank-deficient design matrix".into()));
    }
    let x = svd.solve(&y, 0.0).map_err(|e| FlatError::DegenerateSamples(e.to_string()))?;
    let misfit = &design * &x - &y;
    Ok(LeadingCoefficients {
        station: points[0].station,
        a: Complex64::new(x[0], x[1]),
        b: Complex64::new(x[2], x[3]),
        fit_residual: (misfit.norm_squared() / n as f64).sqrt(),
    })
}

/// Fits every station of `samples` separately, in increasing station order.
pub fn fit_leading_coefficients(samples: &SampleSet) -> Result<Vec<LeadingCoefficients>, FlatError> {
    let mut stations: Vec<f64> = samples.points.iter().map(|p| p.station).collect();
    stations.sort_by(f64::total_cmp);
    stations.dedup();
    if stations.is_empty() {
        return Err(FlatError::DegenerateSamples("no samples".into()));
    }
    stations
        .into_iter()
        .map(|t| {
            let idx: Vec<usize> = (0..samples.points.len()).filter(|&i| samples.points[i].station == t).collect();
            let pts: Vec<Sample> = idx.iter().map(|&i| samples.points[i]).collect();
            let vals: Vec<f64> = idx.iter().map(|&i| samples.values[i]).collect();
            fit_station(&pts, &vals)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Nondegenerate,
    DegenerateA { station: f64 },
    VanishingB { station: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub component: usize,
    pub max_a: f64,
    pub min_b: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// NONDEGENERATE iff `max |A| ≤ tol_a` and `min |B| ≥ tol_b` over the
/// stations of a component; otherwise names the worst offending station.
pub fn nondegeneracy_test(coeffs: &[Vec<LeadingCoefficients>], tol_a: f64, tol_b: f64) -> Vec<ComponentVerdict> {
    coeffs
        .iter()
        .enumerate()
        .map(|(component, stations)| {
            let worst_a = stations.iter().max_by(|x, y| x.a.norm().total_cmp(&y.a.norm()));
            let worst_b = stations.iter().min_by(|x, y| x.b.norm().total_cmp(&y.b.norm()));
            let max_a = worst_a.map_or(0.0, |c| c.a.norm());
            let min_b = worst_b.map_or(f64::INFINITY, |c| c.b.norm());
            let verdict = if max_a > tol_a {
                Verdict::DegenerateA { station: worst_a.unwrap().station }
            } else if min_b < tol_b {
                Verdict::VanishingB { station: worst_b.unwrap().station }
            } else {
                Verdict::Nondegenerate
            };
            ComponentVerdict { component, max_a, min_b, verdict }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(stations: &[f64]) -> Vec<(Complex64, f64)> {
        let mut g = Vec::new();
        for &t in stations {
            for r in [0.1, 0.05] {
                for k in 0..8 {
                    g.push((Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.25) / 8.0), t));
                }
            }
        }
        g
    }

    #[test]
    fn model_values() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(flat_model_value(zero, one, one, 1), 1.0);
        assert!(flat_model_value(one, zero, Complex64::from_polar(1.0, PI), 1).abs() < 1e-15);
        assert_eq!(flat_model_value(one, one, zero, 1), 0.0);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(2.0, 1.0);
        let s = sample_flat_model(a, b, &grid(&[0.0, 1.0]));
        assert!(s.is_antisymmetric());
        let fits = fit_leading_coefficients(&s).unwrap();
        assert_eq!(fits.len(), 2);
        for f in fits {
            assert!((f.a - a).norm() < 1e-10);
            assert!((f.b - b).norm() < 1e-10);
            assert!(f.fit_residual < 1e-12);
        }
    }

    #[test]
    fn degenerate_samples_are_rejected() {
        let one = Complex64::new(1.0, 0.0);
        let single_radius: Vec<(Complex64, f64)> =
            (0..6).map(|k| (Complex64::from_polar(0.1, k as f64), 0.0)).collect();
        let s = sample_flat_model(one, one, &single_radius);
        assert!(matches!(fit_leading_coefficients(&s), Err(FlatError::DegenerateSamples(_))));
        let s = sample_flat_model(one, one, &[(one, 0.0)]);
        assert!(matches!(fit_leading_coefficients(&s), Err(FlatError::DegenerateSamples(_))));
    }

    #[test]
    fn canonical_verdicts() {
        let c = |a: f64, b: f64, t: f64| LeadingCoefficients {
            station: t,
            a: Complex64::new(a, 0.0),
            b: Complex64::new(b, 0.0),
            fit_residual: 0.0,
        };
        let v = nondegeneracy_test(
            &[vec![c(0.0, 1.0, 0.0), c(0.0, 1.0, 1.0)], vec![c(0.0, 1.0, 0.0), c(0.5, 1.0, 1.0)], vec![c(0.0, 1.0, 0.0), c(0.0, 0.0, 1.0)]],
            1e-3,
            1e-2,
        );
        assert_eq!(v[0].verdict, Verdict::Nondegenerate);
        assert_eq!(v[1].verdict, Verdict::DegenerateA { station: 1.0 });
        assert_eq!(v[2].verdict, Verdict::VanishingB { station: 1.0 });
    }
}
