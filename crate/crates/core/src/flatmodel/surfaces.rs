//! Exact two-valued forms `Re √q` on flat surfaces.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FlatError;
use crate::complex::{faces, CellComplex};
use crate::cover::{BranchedCover, MonodromyCocycle, SingularLocus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticDifferential {
    /// `q` on the pillowcase `T²/±1`, the quotient of the unit square torus
    /// with `ω = dz` triangulated by an `n x n` grid; `Z` = the four corners.
    Pillowcase { n: usize },
    /// `q = ω²` on the regular-octagon genus-2 surface with `ω = dz`, whose
    /// double zero sits at the single corner vertex.
    RegularOctagon,
}

/// A triangulated flat surface with `Re √q` and `Im √q` integrated along the
/// representative lift of every edge.
#[derive(Debug, Clone)]
pub struct FlatSurfaceForm {
    pub complex: CellComplex,
    /// Zeros and poles of `q` as vertices.
    pub locus: SingularLocus,
    pub cocycle: MonodromyCocycle,
    pub form: Vec<f64>,
    pub form_im: Vec<f64>,
    /// Whether `√q` branches at the locus; false when `q = ω²`.
    pub branched: bool,
}

pub fn quadratic_differential_form(q: QuadraticDifferential) -> Result<FlatSurfaceForm, FlatError> {
    let f = match q {
        QuadraticDifferential::Pillowcase { n } => pillowcase(n)?,
        QuadraticDifferential::RegularOctagon => octagon()?,
    };
    f.check_sheets()?;
    Ok(f)
}

impl FlatSurfaceForm {
    /// The branched double cover over the locus, with `(v, 0)` over each
    /// vertex on the sheet the form's values refer to.
    pub fn cover(&self) -> Result<BranchedCover, FlatError> {
        if !self.branched {
            return Err(FlatError::Surface("√q does not branch; the form is single-valued".into()));
        }
        Ok(BranchedCover::new(&self.complex, &self.locus, &self.cocycle)?)
    }

    /// Flat displacement vector of every cover edge.
    pub fn cover_displacements(&self, cover: &BranchedCover) -> Vec<Vec<f64>> {
        let x = cover.lift_form(&self.form);
        let y = cover.lift_form(&self.form_im);
        x.into_iter().zip(y).map(|(a, b)| vec![a, b]).collect()
    }

    /// Checks that the sheet assignment closes up around every triangle.
    pub fn check_sheets(&self) -> Result<(), FlatError> {
        let cx = &self.complex;
        let z = self.locus.vertex_mask(cx.n_vertices());
        for t in cx.cells(2) {
            // sheet of each vertex in the lift putting the lowest non-Z vertex on sheet 0
            let r0 = t.iter().copied().find(|&v| !z[v]);
            let sheet = |v: usize| -> u8 {
                match r0 {
                    Some(r) if v != r && !z[v] => self.cocycle.values[cx.edge_index(r, v).unwrap()],
                    _ => 0,
                }
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for (f, s) in faces(t) {
                let e = cx.edge_index(f[0], f[1]).unwrap();
                // representative lift of f starts from its lowest non-Z vertex on sheet 0
                let lo = f.iter().copied().find(|&v| !z[v]);
                let sign = match lo {
                    Some(v) if sheet(v) == 1 => -1.0,
                    _ => 1.0,
                };
                sum += s as f64 * sign * Complex64::new(self.form[e], self.form_im[e]);
            }
            if sum.norm() > 1e-12 {
                return Err(FlatError::Monodromy(format!("form does not close on {t:?}")));
            }
        }
        if self.branched {
            self.cocycle.validate(cx, &self.locus)?;
        }
        Ok(())
    }
}

fn pillowcase(n: usize) -> Result<FlatSurfaceForm, FlatError> {
    if n < 4 || n % 2 == 1 {
        return Err(FlatError::Surface(format!("pillowcase grid needs even n ≥ 4, got {n}")));
    }
    let idx = |i: usize, j: usize| (i % n) + n * (j % n);
    let neg = |t: usize| idx(n - t % n, n - t / n);
    let reps: BTreeSet<usize> = (0..n * n).map(|t| t.min(neg(t))).collect();
    let base_of: BTreeMap<usize, usize> = reps.iter().enumerate().map(|(b, &r)| (r, b)).collect();
    let rep_list: Vec<usize> = reps.into_iter().collect();
    let orbit = |t: usize| base_of[&t.min(neg(t))];
    let nb = rep_list.len();
    let mut seen = BTreeSet::new();
    let mut tops = Vec::new();
    for j in 0..n {
        for i in 0..n {
            for tri in [[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)], [idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]] {
                let t: Vec<usize> = tri.iter().map(|&v| orbit(v)).collect();
                let mut key = t.clone();
                key.sort_unstable();
                if seen.insert(key) {
                    tops.push(t);
                }
            }
        }
    }
    let complex = CellComplex::from_oriented_top_cells(2, nb, &tops)?;
    let fixed: Vec<usize> = (0..nb).filter(|&b| neg(rep_list[b]) == rep_list[b]).collect();
    let locus = SingularLocus::points(&fixed);
    // torus offset from u to v when adjacent
    let step = |u: usize, v: usize| -> Option<(i64, i64)> {
        let w = |d: i64| if d > n as i64 / 2 { d - n as i64 } else { d };
        let di = w((v % n + n - u % n) as i64 % n as i64);
        let dj = w((v / n + n - u / n) as i64 % n as i64);
        matches!((di, dj), (1, 0) | (-1, 0) | (0, 1) | (0, -1) | (1, 1) | (-1, -1)).then_some((di, dj))
    };
    let mut cocycle = vec![0u8; complex.n_cells(1)];
    let mut form = vec![0.0; complex.n_cells(1)];
    let mut form_im = vec![0.0; complex.n_cells(1)];
    for (e, ab) in complex.edges().iter().enumerate() {
        let (a, b) = (ab[0], ab[1]);
        let (ra, rb) = (rep_list[a], rep_list[b]);
        // a torus fixed point is adjacent to both lifts of a neighbor, so the
        // representative lifts are the ones through the orbit representatives
        let (c, d) = match step(ra, rb) {
            Some(d) => (0, Some(d)),
            None => (1, step(ra, neg(rb))),
        };
        let (di, dj) = d.ok_or_else(|| FlatError::Surface(format!("edge {ab:?} has no torus lift")))?;
        cocycle[e] = c;
        form[e] = di as f64 / n as f64;
        form_im[e] = dj as f64 / n as f64;
    }
    Ok(FlatSurfaceForm { complex, locus, cocycle: MonodromyCocycle { values: cocycle }, form, form_im, branched: true })
}

fn octagon() -> Result<FlatSurfaceForm, FlatError> {
    let corner = |k: usize| Complex64::from_polar(1.0, PI / 8.0 + (k % 8) as f64 * PI / 4.0);
    // vertex classes: 0 corner, 1..=8 side points, 9..=24 inner ring, 25 center
    let side_point = |k: usize, s: usize| -> usize {
        let k = k % 8;
        if k < 4 {
            2 * k + s
        } else {
            2 * (k - 4) + 3 - s
        }
    };
    let j_ring = |k: usize| 9 + 2 * (k % 8);
    let i_ring = |k: usize| 10 + 2 * (k % 8);
    let mut tris: Vec<[(usize, Complex64); 3]> = Vec::new();
    for k in 0..8 {
        let (c0, c1) = (corner(k), corner(k + 1));
        let s1 = c0 + (c1 - c0) / 3.0;
        let s2 = c0 + (c1 - c0) * (2.0 / 3.0);
        let jk = (j_ring(k), c0 * 0.6);
        let jn = (j_ring(k + 1), c1 * 0.6);
        let ik = (i_ring(k), (c0 + c1) * 0.3);
        let (p0, p1) = ((0, c0), (0, c1));
        let (q1, q2) = ((side_point(k, 1), s1), (side_point(k, 2), s2));
        tris.extend([[jk, p0, q1], [jk, q1, ik], [ik, q1, q2], [ik, q2, jn], [jn, q2, p1]]);
        tris.extend([[(25, Complex64::new(0.0, 0.0)), jk, ik], [(25, Complex64::new(0.0, 0.0)), ik, jn]]);
    }
    let area = |t: &[(usize, Complex64); 3]| ((t[1].1 - t[0].1) * (t[2].1 - t[0].1).conj()).im;
    for t in &mut tris {
        if area(t) > 0.0 {
            t.swap(1, 2);
        }
    }
    let tops: Vec<Vec<usize>> = tris.iter().map(|t| t.iter().map(|p| p.0).collect()).collect();
    let complex = CellComplex::from_oriented_top_cells(2, 26, &tops)?;
    let mut disp: Vec<Option<Complex64>> = vec![None; complex.n_cells(1)];
    for t in &tris {
        for x in 0..3 {
            for y in 0..3 {
                let ((a, pa), (b, pb)) = (t[x], t[y]);
                if a < b {
                    let e = complex.edge_index(a, b).unwrap();
                    let d = pb - pa;
                    match disp[e] {
                        Some(old) if (old - d).norm() > 1e-12 => {
                            return Err(FlatError::Surface(format!("gluing is not a translation on edge {a}-{b}")))
                        }
                        _ => disp[e] = Some(d),
                    }
                }
            }
        }
    }
    let disp: Vec<Complex64> = disp.into_iter().map(Option::unwrap).collect();
    Ok(FlatSurfaceForm {
        locus: SingularLocus::points(&[0]),
        cocycle: MonodromyCocycle { values: vec![0; complex.n_cells(1)] },
        form: disp.iter().map(|d| d.re).collect(),
        form_im: disp.iter().map(|d| d.im).collect(),
        complex,
        branched: false,
    })
}
