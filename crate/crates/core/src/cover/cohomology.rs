use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{BranchedCover, CoverError, SingularLocus};
use crate::linalg::independent_columns;

/// Closed anti-invariant 1-cochains on the cover spanning `H¹₋`, with
/// linearly independent period vectors.
pub fn antiinvariant_cohomology(cover: &BranchedCover) -> Result<Vec<Vec<f64>>, CoverError> {
    let basis = cover.complex.cocycle_basis()?;
    let tau = &cover.involution[1];
    // 2·(σ − τ*σ)/2 stays integral
    let doubled: Vec<Vec<i64>> = basis
        .cocycles
        .iter()
        .map(|z| z.iter().enumerate().map(|(e, &v)| v - z[tau[e]]).collect())
        .collect();
    let periods: Vec<Vec<i64>> = doubled.iter().map(|z| basis.integer_periods(z)).collect();
    // columns = candidate cochains
    let rows = basis.rank();
    let m: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| periods.iter().map(|p| BigRational::from_integer(BigInt::from(p[r]))).collect())
        .collect();
    let keep = if rows == 0 { Vec::new() } else { independent_columns(&m) };
    Ok(keep.into_iter().map(|i| doubled[i].iter().map(|&v| v as f64 / 2.0).collect()).collect())
}

/// Necessary condition for a Z/2 harmonic 1-form branching along Z: the
/// branched double cover has positive first Betti number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub b1_cover: usize,
    pub component_count: usize,
    pub passes: bool,
    pub notes: String,
}

pub fn haydys_obstruction(
    cover: &BranchedCover,
    locus: &SingularLocus,
    base_is_rhs: bool,
) -> Result<ObstructionReport, CoverError> {
    let b1 = cover.complex.homology()?.betti[1];
    let n = locus.n_components();
    let mut notes = Vec::new();
    if b1 == 0 {
        notes.push("branched double cover has b1 = 0; no Z/2 harmonic 1-form branches along Z".to_string());
    }
    if base_is_rhs && n < 2 {
        notes.push(format!("Z has {n} component; on a rational homology sphere at least two are required"));
    }
    Ok(ObstructionReport { b1_cover: b1, component_count: n, passes: b1 > 0, notes: notes.join("; ") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{icosahedron, join_of_cycles};
    use crate::cover::build_branched_cover;

    #[test]
    fn sphere_cover_has_no_odd_classes() {
        let cov = build_branched_cover(&icosahedron(), &SingularLocus::points(&[0, 6])).unwrap();
        assert!(antiinvariant_cohomology(&cov).unwrap().is_empty());
    }

    #[test]
    fn unlink_cover_has_one_odd_class() {
        let s3 = join_of_cycles(8, 8);
        let z = SingularLocus::loops(&[vec![7, 8 + 7, 1, 8 + 1], vec![3, 8 + 3, 5, 8 + 5]]);
        let cov = build_branched_cover(&s3, &z).unwrap();
        let odd = antiinvariant_cohomology(&cov).unwrap();
        assert_eq!(odd.len(), 1);
        let sigma = &odd[0];
        assert!(cov.complex.coboundary1(sigma).iter().all(|&v| v == 0.0));
        let t = cov.tau_pullback(sigma);
        assert!(sigma.iter().zip(&t).all(|(a, b)| a + b == 0.0));
        let rep = haydys_obstruction(&cov, &z, true).unwrap();
        assert!(rep.passes);
        assert_eq!(rep.b1_cover, 1);
    }

    #[test]
    fn unknot_fails_with_note() {
        let s3 = join_of_cycles(4, 5);
        let z = SingularLocus::loops(&[vec![0, 1, 2, 3]]);
        let cov = build_branched_cover(&s3, &z).unwrap();
        let rep = haydys_obstruction(&cov, &z, true).unwrap();
        assert!(!rep.passes);
        assert!(rep.notes.contains("1 component"));
    }
}
