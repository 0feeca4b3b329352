use serde::{Deserialize, Serialize};

use super::{meridian_cocycle, CoverError, MonodromyCocycle, SingularLocus};
use crate::complex::{CellComplex, Simplex};

/// A 2-fold branched cover `p: M̂ → M` with deck involution `τ`.
///
/// Off Z every base vertex `v` has two lifts `(v, 0)` and `(v, 1)`; a Z vertex
/// has one. Cover vertices are numbered in base order, so a lifted simplex
/// keeps its vertex order and its orientation.
#[derive(Debug, Clone)]
pub struct BranchedCover {
    pub base: CellComplex,
    pub locus: SingularLocus,
    pub cocycle: MonodromyCocycle,
    pub complex: CellComplex,
    /// Base vertex of each cover vertex.
    pub vertex_base: Vec<usize>,
    /// Sheet of each cover vertex; `None` over Z.
    pub vertex_sheet: Vec<Option<u8>>,
    /// `lifts[k][c]` are the sheet-0 and sheet-1 lifts of base `k`-cell `c`
    /// (equal for cells of Z). The sheet-0 lift is the representative lift.
    pub lifts: Vec<Vec<[usize; 2]>>,
    /// `projection[k][c]` is the base cell under cover `k`-cell `c`.
    pub projection: Vec<Vec<usize>>,
    /// `involution[k][c]` is `τ(c)`.
    pub involution: Vec<Vec<usize>>,
    /// Cover cells over Z, per degree, in increasing order.
    pub branch_cells: Vec<Vec<usize>>,
}

fn lift_vertex(first: &[usize], z: &[bool], v: usize, sheet: u8) -> usize {
    if z[v] {
        first[v]
    } else {
        first[v] + sheet as usize
    }
}

impl BranchedCover {
    /// Builds the cover from a full locus and a valid cocycle.
    pub fn new(base: &CellComplex, locus: &SingularLocus, cocycle: &MonodromyCocycle) -> Result<Self, CoverError> {
        locus.validate(base)?;
        if let Some(s) = locus.fullness_violation(base) {
            return Err(CoverError::NotFull(s));
        }
        cocycle.validate(base, locus)?;
        let nb = base.n_vertices();
        let z = locus.vertex_mask(nb);
        let mut first = vec![0; nb];
        let mut vertex_base = Vec::new();
        let mut vertex_sheet = Vec::new();
        for v in 0..nb {
            first[v] = vertex_base.len();
            if z[v] {
                vertex_base.push(v);
                vertex_sheet.push(None);
            } else {
                vertex_base.extend([v, v]);
                vertex_sheet.extend([Some(0), Some(1)]);
            }
        }
        // sheet of each vertex of `cell` in its lift whose lowest non-Z vertex is on `s`
        let lift_cell = |cell: &[usize], s: u8| -> Simplex {
            let Some(&r0) = cell.iter().find(|&&v| !z[v]) else {
                return cell.iter().map(|&v| first[v]).collect();
            };
            cell.iter()
                .map(|&v| {
                    if z[v] || v == r0 {
                        lift_vertex(&first, &z, v, s)
                    } else {
                        let e = base.edge_index(r0, v).expect("face edge");
                        lift_vertex(&first, &z, v, s ^ cocycle.values[e])
                    }
                })
                .collect()
        };
        let d = base.dimension();
        let mut tops = Vec::with_capacity(2 * base.n_cells(d));
        for t in base.oriented_top_cells() {
            // oriented order may differ from sorted order; lift via the sorted cell
            let mut sorted = t.clone();
            sorted.sort_unstable();
            for s in 0..2 {
                let l = lift_cell(&sorted, s);
                tops.push(t.iter().map(|v| l[sorted.binary_search(v).unwrap()]).collect::<Vec<_>>());
            }
        }
        let complex = CellComplex::from_oriented_top_cells(d, vertex_base.len(), &tops)?;
        let mut lifts = Vec::with_capacity(d + 1);
        let mut projection = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut proj = vec![usize::MAX; complex.n_cells(k)];
            let lk: Vec<[usize; 2]> = base
                .cells(k)
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let pair = [0, 1].map(|s| complex.cell_index(&lift_cell(c, s)).expect("lifted cell"));
                    proj[pair[0]] = i;
                    proj[pair[1]] = i;
                    pair
                })
                .collect();
            if proj.contains(&usize::MAX) {
                return Err(CoverError::InvalidCocycle("cover has cells that are not lifts".into()));
            }
            lifts.push(lk);
            projection.push(proj);
        }
        let mut involution = Vec::with_capacity(d + 1);
        let mut branch_cells = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut inv = vec![0; complex.n_cells(k)];
            for pair in &lifts[k] {
                inv[pair[0]] = pair[1];
                inv[pair[1]] = pair[0];
            }
            branch_cells.push((0..inv.len()).filter(|&c| inv[c] == c).collect());
            involution.push(inv);
        }
        Ok(BranchedCover {
            base: base.clone(),
            locus: locus.clone(),
            cocycle: cocycle.clone(),
            complex,
            vertex_base,
            vertex_sheet,
            lifts,
            projection,
            involution,
            branch_cells,
        })
    }

    pub fn is_branch_vertex(&self, v: usize) -> bool {
        self.vertex_sheet[v].is_none()
    }

    /// `(τ*x)(e) = x(τ e)` for a 1-cochain; τ preserves edge orientation.
    pub fn tau_pullback(&self, x: &[f64]) -> Vec<f64> {
        self.involution[1].iter().map(|&t| x[t]).collect()
    }

    /// Lifts two-valued data stored on representative lifts to an
    /// anti-invariant cover cochain.
    pub fn lift_form(&self, base_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.complex.n_cells(1)];
        for (f, pair) in self.lifts[1].iter().enumerate() {
            if pair[0] != pair[1] {
                out[pair[0]] = base_values[f];
                out[pair[1]] = -base_values[f];
            }
        }
        out
    }

    /// Values of a cover cochain on the representative lifts.
    pub fn descend_form(&self, cover_values: &[f64]) -> Vec<f64> {
        self.lifts[1].iter().map(|p| if p[0] == p[1] { 0.0 } else { cover_values[p[0]] }).collect()
    }

    /// Sign relating a cover edge to the representative lift of its base edge.
    pub fn edge_sheet_sign(&self, e: usize) -> f64 {
        let f = self.projection[1][e];
        if self.lifts[1][f][0] == e {
            1.0
        } else {
            -1.0
        }
    }

    /// Checks `p∘τ = p`, `τ² = id`, `fixed(τ) = lifts of Z`, preimage counts
    /// and the Euler characteristic relation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let zcells = self.locus.cells();
        for k in 0..=self.complex.dimension() {
            let inv = &self.involution[k];
            let proj = &self.projection[k];
            for c in 0..inv.len() {
                if inv[inv[c]] != c {
                    return Err(format!("τ² ≠ id on {k}-cell {c}"));
                }
                if proj[inv[c]] != proj[c] {
                    return Err(format!("p∘τ ≠ p on {k}-cell {c}"));
                }
                let over_z = zcells.contains(&self.base.cells(k)[proj[c]]);
                if (inv[c] == c) != over_z {
                    return Err(format!("fixed set of τ differs from Z at {k}-cell {c}"));
                }
            }
            let mut count = vec![0usize; self.base.n_cells(k)];
            for &b in proj {
                count[b] += 1;
            }
            for (b, &n) in count.iter().enumerate() {
                let want = if zcells.contains(&self.base.cells(k)[b]) { 1 } else { 2 };
                if n != want {
                    return Err(format!("base {k}-cell {b} has {n} preimages"));
                }
            }
        }
        let lhs = self.complex.euler_characteristic();
        let rhs = 2 * self.base.euler_characteristic() - self.locus.euler_characteristic();
        if lhs != rhs {
            return Err(format!("χ(cover) = {lhs} but 2χ(M) − χ(Z) = {rhs}"));
        }
        Ok(())
    }

    /// Map file contents: cover preimages of every base cell.
    pub fn map_json(&self) -> CoverMapJson {
        CoverMapJson {
            vertex_base: self.vertex_base.clone(),
            vertex_sheet: self.vertex_sheet.clone(),
            preimages: self
                .lifts
                .iter()
                .map(|lk| lk.iter().map(|p| if p[0] == p[1] { vec![p[0]] } else { p.to_vec() }).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverMapJson {
    pub vertex_base: Vec<usize>,
    pub vertex_sheet: Vec<Option<u8>>,
    /// `preimages[k][c]`: cover `k`-cells over base cell `c`, in sheet order.
    pub preimages: Vec<Vec<Vec<usize>>>,
}

/// Subdivides until Z is full, solves for the monodromy and builds the cover.
pub fn build_branched_cover(base: &CellComplex, locus: &SingularLocus) -> Result<BranchedCover, CoverError> {
    let full = locus.make_full(base)?;
    let c = meridian_cocycle(&full, locus)?;
    BranchedCover::new(&full, locus, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{icosahedron, join_of_cycles};

    #[test]
    fn sphere_over_two_points_is_a_sphere() {
        let cov = build_branched_cover(&icosahedron(), &SingularLocus::points(&[0, 6])).unwrap();
        cov.check_invariants().unwrap();
        assert_eq!(cov.complex.euler_characteristic(), 2);
        assert_eq!(cov.complex.n_vertices(), 22);
    }

    #[test]
    fn unknot_cover_is_a_homology_sphere() {
        let s3 = join_of_cycles(4, 5);
        let cov = build_branched_cover(&s3, &SingularLocus::loops(&[vec![0, 1, 2, 3]])).unwrap();
        cov.check_invariants().unwrap();
        let h = cov.complex.homology().unwrap();
        assert_eq!(h.betti, vec![1, 0, 0, 1]);
        assert!(h.torsion.iter().all(Vec::is_empty));
    }

    #[test]
    fn hopf_link_cover_has_two_torsion() {
        let s3 = join_of_cycles(4, 4);
        let z = SingularLocus::loops(&[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        let cov = build_branched_cover(&s3, &z).unwrap();
        cov.check_invariants().unwrap();
        let h = cov.complex.homology().unwrap();
        assert_eq!(h.betti, vec![1, 0, 0, 1]);
        assert_eq!(h.torsion[1], vec![2]);
    }

    #[test]
    fn lift_and_descend_are_inverse() {
        let cov = build_branched_cover(&icosahedron(), &SingularLocus::points(&[0, 6])).unwrap();
        let base: Vec<f64> = (0..cov.base.n_cells(1)).map(|i| i as f64 - 7.5).collect();
        let up = cov.lift_form(&base);
        assert_eq!(cov.descend_form(&up), base);
        let t = cov.tau_pullback(&up);
        assert!(up.iter().zip(&t).all(|(a, b)| *a == -*b));
    }
}
