//! Oriented simplicial complexes with integer chain algebra.
//!
//! Simplices are stored with their vertices sorted ascending; a simplex
//! `[v0, .., vk]` carries the orientation of that ordering. Top-dimensional
//! cells additionally carry a sign so that the signed sum of top cells is a
//! fundamental cycle.

mod build;
mod homology;

pub use build::*;
pub use homology::{CohomologyBasis, HomologySummary};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("degree {degree} out of range for a complex of dimension {dim}")]
    Degree { degree: usize, dim: usize },
    #[error("expected a complex of dimension {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("malformed cell {cell:?}: {reason}")]
    MalformedCell { cell: Vec<usize>, reason: String },
    #[error("not a closed oriented manifold: {0}")]
    NotManifold(String),
    #[error("arithmetic overflow during integer reduction: {0}")]
    Arithmetic(String),
    #[error("invalid complex description: {0}")]
    Invalid(String),
}

/// Sorted vertex tuple of a simplex.
pub type Simplex = Vec<usize>;

/// Sign of the permutation sorting `cell` ascending, or `None` on repeats.
pub fn permutation_sign(cell: &[usize]) -> Option<i8> {
    let mut sign = 1i8;
    for i in 0..cell.len() {
        for j in (i + 1)..cell.len() {
            match cell[i].cmp(&cell[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(sign)
}

fn sorted(cell: &[usize]) -> Simplex {
    let mut s = cell.to_vec();
    s.sort_unstable();
    s
}

/// All codimension-one faces of a sorted simplex with their incidence signs.
pub fn faces(cell: &[usize]) -> impl Iterator<Item = (Simplex, i64)> + '_ {
    (0..cell.len()).map(move |i| {
        let mut f = cell.to_vec();
        f.remove(i);
        (f, if i % 2 == 0 { 1 } else { -1 })
    })
}

/// A closed, connected-or-not, oriented simplicial 2- or 3-manifold.
#[derive(Debug, Clone)]
pub struct CellComplex {
    dim: usize,
    cells: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    orientation: Vec<i8>,
}

impl PartialEq for CellComplex {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.cells == other.cells && self.orientation == other.orientation
    }
}

impl CellComplex {
    /// Builds a complex from top cells whose listed vertex order gives their
    /// orientation. Fails unless the result is a closed oriented manifold.
    pub fn from_oriented_top_cells(
        dim: usize,
        n_vertices: usize,
        tops: &[Vec<usize>],
    ) -> Result<Self, ComplexError> {
        let mut signed = Vec::with_capacity(tops.len());
        for t in tops {
            check_cell(t, dim, n_vertices)?;
            let sign = permutation_sign(t).expect("checked for repeats");
            signed.push((sorted(t), sign));
        }
        Self::assemble(dim, n_vertices, signed)
    }

    /// Builds a complex from unoriented top cells, choosing a coherent
    /// orientation by propagation from the first cell of each component.
    pub fn from_top_cells(
        dim: usize,
        n_vertices: usize,
        tops: &[Vec<usize>],
    ) -> Result<Self, ComplexError> {
        let mut cells: Vec<Simplex> = Vec::with_capacity(tops.len());
        for t in tops {
            check_cell(t, dim, n_vertices)?;
            cells.push(sorted(t));
        }
        cells.sort();
        let n = cells.len();
        let mut by_face: HashMap<Simplex, Vec<(usize, i64)>> = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            for (f, s) in faces(c) {
                by_face.entry(f).or_default().push((i, s));
            }
        }
        let mut sign = vec![0i8; n];
        for start in 0..n {
            if sign[start] != 0 {
                continue;
            }
            sign[start] = 1;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for (f, s) in faces(&cells[i]) {
                    let inc = &by_face[&f];
                    if inc.len() != 2 {
                        return Err(ComplexError::NotManifold(format!(
                            "face {f:?} lies in {} top cells",
                            inc.len()
                        )));
                    }
                    let (j, sj) = if inc[0].0 == i { inc[1] } else { inc[0] };
                    // induced orientations must cancel: sign_i*s + sign_j*sj = 0
                    let want = (-(sign[i] as i64) * s * sj) as i8;
                    if sign[j] == 0 {
                        sign[j] = want;
                        stack.push(j);
                    } else if sign[j] != want {
                        return Err(ComplexError::NotManifold("non-orientable".into()));
                    }
                }
            }
        }
        Self::assemble(dim, n_vertices, cells.into_iter().zip(sign).collect())
    }

    fn assemble(
        dim: usize,
        n_vertices: usize,
        mut tops: Vec<(Simplex, i8)>,
    ) -> Result<Self, ComplexError> {
        if !(2..=3).contains(&dim) {
            return Err(ComplexError::Invalid(format!("dimension {dim} unsupported")));
        }
        tops.sort();
        for w in tops.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ComplexError::MalformedCell {
                    cell: w[0].0.clone(),
                    reason: "listed twice".into(),
                });
            }
        }
        let mut levels: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); dim + 1];
        for (t, _) in &tops {
            levels[dim].insert(t.clone());
        }
        for k in (1..=dim).rev() {
            let (lower, upper) = levels.split_at_mut(k);
            for c in upper[0].iter() {
                for (f, _) in faces(c) {
                    lower[k - 1].insert(f);
                }
            }
        }
        if levels[0].len() != n_vertices {
            return Err(ComplexError::Invalid(format!(
                "{} vertices declared but {} used",
                n_vertices,
                levels[0].len()
            )));
        }
        let cells: Vec<Vec<Simplex>> = levels.into_iter().map(|l| l.into_iter().collect()).collect();
        let index = cells
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect())
            .collect();
        let orientation = tops.iter().map(|(_, s)| *s).collect();
        let cx = CellComplex { dim, cells, index, orientation };
        cx.check_manifold()?;
        Ok(cx)
    }

    fn check_manifold(&self) -> Result<(), ComplexError> {
        let d = self.dim;
        let mut acc: Vec<(usize, i64)> = vec![(0, 0); self.cells[d - 1].len()];
        for (t, cell) in self.cells[d].iter().enumerate() {
            for (f, s) in faces(cell) {
                let fi = self.index[d - 1][&f];
                acc[fi].0 += 1;
                acc[fi].1 += s * self.orientation[t] as i64;
            }
        }
        for (fi, (count, sum)) in acc.iter().enumerate() {
            if *count != 2 {
                return Err(ComplexError::NotManifold(format!(
                    "face {:?} lies in {count} top cells",
                    self.cells[d - 1][fi]
                )));
            }
            if *sum != 0 {
                return Err(ComplexError::NotManifold(format!(
                    "top cells around face {:?} are not coherently oriented",
                    self.cells[d - 1][fi]
                )));
            }
        }
        // vertex links: a circle in dimension 2, a connected surface with
        // Euler characteristic 2 in dimension 3
        let mut link: Vec<Vec<Simplex>> = vec![Vec::new(); self.n_vertices()];
        for cell in &self.cells[d] {
            for (i, &v) in cell.iter().enumerate() {
                let mut rest = cell.clone();
                rest.remove(i);
                link[v].push(rest);
            }
        }
        for (v, l) in link.iter().enumerate() {
            if !link_is_sphere(l, d - 1) {
                return Err(ComplexError::NotManifold(format!("link of vertex {v} is not a sphere")));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.cells[0].len()
    }

    pub fn n_cells(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    pub fn cells(&self, k: usize) -> &[Simplex] {
        self.cells.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> &[Simplex] {
        self.cells(1)
    }

    pub fn top_cells(&self) -> &[Simplex] {
        &self.cells[self.dim]
    }

    /// Orientation sign of top cell `i` relative to its sorted vertex order.
    pub fn top_orientation(&self, i: usize) -> i8 {
        self.orientation[i]
    }

    pub fn cell_index(&self, cell: &[usize]) -> Option<usize> {
        let s = sorted(cell);
        self.index.get(s.len().wrapping_sub(1))?.get(&s).copied()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { vec![a, b] } else { vec![b, a] };
        self.index[1].get(&key).copied()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, l)| if k % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    /// Integer boundary matrix from degree `k` chains to degree `k - 1`.
    pub fn boundary_matrix(&self, k: usize) -> Result<SparseMatrix, ComplexError> {
        if k == 0 || k > self.dim {
            return Err(ComplexError::Degree { degree: k, dim: self.dim });
        }
        let cols = self.cells[k]
            .iter()
            .map(|c| {
                let mut col: Vec<(usize, i64)> =
                    faces(c).map(|(f, s)| (self.index[k - 1][&f], s)).collect();
                col.sort_unstable();
                col
            })
            .collect();
        Ok(SparseMatrix::from_columns(self.cells[k - 1].len(), cols))
    }

    /// Coboundary of a 0-cochain: `(df)(a, b) = f(b) - f(a)` on sorted edges.
    pub fn coboundary0(&self, f: &[f64]) -> Vec<f64> {
        self.edges().iter().map(|e| f[e[1]] - f[e[0]]).collect()
    }

    /// Coboundary of a 1-cochain evaluated on every triangle.
    pub fn coboundary1(&self, x: &[f64]) -> Vec<f64> {
        self.cells[2]
            .iter()
            .map(|t| {
                faces(t)
                    .map(|(f, s)| s as f64 * x[self.index[1][&f]])
                    .sum::<f64>()
            })
            .collect()
    }

    /// Vertex adjacency lists as `(neighbor, edge index)`, sorted by neighbor.
    pub fn vertex_edges(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (i, e) in self.edges().iter().enumerate() {
            adj[e[0]].push((e[1], i));
            adj[e[1]].push((e[0], i));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// For each top cell, the top cells sharing a codimension-one face.
    pub fn top_adjacency(&self) -> Vec<Vec<usize>> {
        let d = self.dim;
        let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); self.cells[d - 1].len()];
        for (t, c) in self.cells[d].iter().enumerate() {
            for (f, _) in faces(c) {
                by_face[self.index[d - 1][&f]].push(t);
            }
        }
        let mut adj = vec![Vec::new(); self.cells[d].len()];
        for pair in by_face {
            adj[pair[0]].push(pair[1]);
            adj[pair[1]].push(pair[0]);
        }
        adj
    }

    /// Top cells containing each vertex.
    pub fn vertex_stars(&self) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.n_vertices()];
        for (t, c) in self.top_cells().iter().enumerate() {
            for &v in c {
                star[v].push(t);
            }
        }
        star
    }

    /// Number of connected components of the 1-skeleton.
    pub fn n_components(&self) -> usize {
        let adj = self.vertex_edges();
        let mut seen = vec![false; self.n_vertices()];
        let mut count = 0;
        for s in 0..self.n_vertices() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Applies a vertex permutation `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, ComplexError> {
        let tops: Vec<Vec<usize>> = self.cells[self.dim]
            .iter()
            .zip(&self.orientation)
            .map(|(c, &s)| {
                let mut t: Vec<usize> = c.iter().map(|&v| perm[v]).collect();
                if s < 0 {
                    t.swap(0, 1);
                }
                t
            })
            .collect();
        Self::from_oriented_top_cells(self.dim, self.n_vertices(), &tops)
    }

    /// Top cells in their oriented vertex order.
    pub fn oriented_top_cells(&self) -> Vec<Vec<usize>> {
        self.cells[self.dim]
            .iter()
            .zip(&self.orientation)
            .map(|(c, &s)| {
                let mut t = c.clone();
                if s < 0 {
                    t.swap(0, 1);
                }
                t
            })
            .collect()
    }

    pub fn to_json_model(&self) -> ComplexJson {
        let tops = self.oriented_top_cells();
        let (triangles, tets) = if self.dim == 2 {
            (tops, Vec::new())
        } else {
            (self.cells[2].clone(), tops)
        };
        ComplexJson {
            dimension: self.dim,
            vertices: self.n_vertices(),
            edges: self.cells[1].clone(),
            triangles,
            tets,
        }
    }

    pub fn from_json_model(m: &ComplexJson) -> Result<Self, ComplexError> {
        let tops = match m.dimension {
            2 => &m.triangles,
            3 => &m.tets,
            d => return Err(ComplexError::Invalid(format!("dimension {d} unsupported"))),
        };
        let cx = Self::from_oriented_top_cells(m.dimension, m.vertices, tops)?;
        let listed = |k: usize, cells: &[Vec<usize>]| -> Result<(), ComplexError> {
            let given: BTreeSet<Simplex> = cells.iter().map(|c| sorted(c)).collect();
            let closure: BTreeSet<Simplex> = cx.cells[k].iter().cloned().collect();
            if given != closure {
                return Err(ComplexError::Invalid(format!(
                    "listed {k}-cells differ from the faces of the top cells"
                )));
            }
            Ok(())
        };
        listed(1, &m.edges)?;
        if m.dimension == 3 {
            listed(2, &m.triangles)?;
        }
        Ok(cx)
    }
}

/// Wire format of a complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub dimension: usize,
    pub vertices: usize,
    pub edges: Vec<Vec<usize>>,
    pub triangles: Vec<Vec<usize>>,
    #[serde(default)]
    pub tets: Vec<Vec<usize>>,
}

fn check_cell(t: &[usize], dim: usize, n_vertices: usize) -> Result<(), ComplexError> {
    if t.len() != dim + 1 {
        return Err(ComplexError::MalformedCell {
            cell: t.to_vec(),
            reason: format!("expected {} vertices", dim + 1),
        });
    }
    if t.iter().any(|&v| v >= n_vertices) {
        return Err(ComplexError::MalformedCell { cell: t.to_vec(), reason: "vertex out of range".into() });
    }
    if permutation_sign(t).is_none() {
        return Err(ComplexError::MalformedCell { cell: t.to_vec(), reason: "repeated vertex".into() });
    }
    Ok(())
}

/// Whether a pure complex given by its top cells is a circle (`d = 1`) or a
/// connected closed surface of Euler characteristic 2 (`d = 2`).
fn link_is_sphere(tops: &[Simplex], d: usize) -> bool {
    if tops.is_empty() {
        return false;
    }
    let mut counts: BTreeMap<Simplex, usize> = BTreeMap::new();
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    for t in tops {
        verts.extend(t.iter().copied());
        for (f, _) in faces(t) {
            *counts.entry(f).or_default() += 1;
        }
    }
    if counts.values().any(|&c| c != 2) {
        return false;
    }
    // connectivity through shared vertices
    let vs: Vec<usize> = verts.iter().copied().collect();
    let pos: HashMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vs.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for t in tops {
        for w in t.windows(2) {
            let (a, b) = (find(&mut parent, pos[&w[0]]), find(&mut parent, pos[&w[1]]));
            parent[a] = b;
        }
    }
    let root = find(&mut parent, 0);
    if (0..vs.len()).any(|i| find(&mut parent, i) != root) {
        return false;
    }
    match d {
        1 => true,
        2 => {
            let chi = vs.len() as i64 - counts.len() as i64 + tops.len() as i64;
            chi == 2
        }
        _ => false,
    }
}

/// A real cochain of a fixed degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(cx: &CellComplex, degree: usize, values: Vec<f64>) -> Result<Self, ComplexError> {
        if values.len() != cx.n_cells(degree) {
            return Err(ComplexError::Invalid(format!(
                "{} values for {} cells of degree {degree}",
                values.len(),
                cx.n_cells(degree)
            )));
        }
        Ok(Cochain { degree, values })
    }

    pub fn zeros(cx: &CellComplex, degree: usize) -> Self {
        Cochain { degree, values: vec![0.0; cx.n_cells(degree)] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_boundary_columns() {
        // a single triangle is not closed, so exercise the raw boundary rule
        let t = vec![0usize, 1, 2];
        let f: Vec<_> = faces(&t).collect();
        assert_eq!(f, vec![(vec![1, 2], 1), (vec![0, 2], -1), (vec![0, 1], 1)]);
    }

    #[test]
    fn sphere_boundary_matrices() {
        let s2 = tetrahedron_boundary();
        let d1 = s2.boundary_matrix(1).unwrap();
        let d2 = s2.boundary_matrix(2).unwrap();
        assert_eq!((d2.rows(), d2.cols()), (6, 4));
        for c in 0..d1.cols() {
            let col = d1.column(c);
            assert_eq!(col.len(), 2);
            assert_eq!(col.iter().map(|e| e.1).sum::<i64>(), 0);
        }
        assert!(d1.mul(&d2).is_zero());
        assert!(matches!(s2.boundary_matrix(3), Err(ComplexError::Degree { .. })));
        assert!(matches!(s2.boundary_matrix(0), Err(ComplexError::Degree { .. })));
    }

    #[test]
    fn rejects_non_manifolds() {
        // two triangles sharing an edge: open surface
        let r = CellComplex::from_top_cells(2, 4, &[vec![0, 1, 2], vec![1, 2, 3]]);
        assert!(matches!(r, Err(ComplexError::NotManifold(_))));
        // incoherent orientation
        let mut tops = tetrahedron_boundary().oriented_top_cells();
        tops[0].swap(0, 1);
        let r = CellComplex::from_oriented_top_cells(2, 4, &tops);
        assert!(matches!(r, Err(ComplexError::NotManifold(_))));
        // repeated vertex
        let r = CellComplex::from_top_cells(2, 4, &[vec![0, 0, 2]]);
        assert!(matches!(r, Err(ComplexError::MalformedCell { .. })));
    }

    #[test]
    fn rejects_pinched_vertex() {
        // two tetrahedron boundaries sharing one vertex
        let mut tops = Vec::new();
        for base in [0usize, 3] {
            let vs = [0, base + 1, base + 2, base + 3];
            for skip in 0..4 {
                tops.push((0..4).filter(|&i| i != skip).map(|i| vs[i]).collect::<Vec<_>>());
            }
        }
        let r = CellComplex::from_top_cells(2, 7, &tops);
        assert!(matches!(r, Err(ComplexError::NotManifold(_))));
    }

    #[test]
    fn json_round_trip() {
        let s3 = simplex_boundary(4);
        let m = s3.to_json_model();
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexJson = serde_json::from_str(&text).unwrap();
        assert_eq!(CellComplex::from_json_model(&back).unwrap(), s3);
    }

    #[test]
    fn json_rejects_missing_faces() {
        let mut m = tetrahedron_boundary().to_json_model();
        m.edges.pop();
        assert!(CellComplex::from_json_model(&m).is_err());
    }
}
