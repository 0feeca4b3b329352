//! Two-fold branched covers along a codimension-2 locus.

mod build;
mod cohomology;

pub use build::*;
pub use cohomology::*;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{stellar_subdivision, CellComplex, ComplexError, Simplex};
use crate::linalg::gf2_solve;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("invalid singular locus: {0}")]
    InvalidLocus(String),
    #[error("singular locus is not a full subcomplex: {0:?} has all vertices in Z")]
    NotFull(Simplex),
    #[error("no double cover with the required monodromy exists")]
    NoLineBundle,
    #[error("invalid monodromy cocycle: {0}")]
    InvalidCocycle(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// The branch locus: closed edge loops in dimension 3, isolated vertices in
/// dimension 2. Cells are stored by vertex tuple so they survive subdivision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularLocus {
    pub dimension: usize,
    /// Component `i` is labelled `Σ_{i+1}`; each entry is an edge `[a, b]`
    /// (dimension 3) or a vertex `[v]` (dimension 2).
    pub components: Vec<Vec<Simplex>>,
}

impl SingularLocus {
    /// Isolated branch points on a surface.
    pub fn points(vertices: &[usize]) -> Self {
        SingularLocus { dimension: 2, components: vertices.iter().map(|&v| vec![vec![v]]).collect() }
    }

    /// Edge loops in a 3-manifold, each given by its cyclic vertex sequence.
    pub fn loops(cycles: &[Vec<usize>]) -> Self {
        let components = cycles
            .iter()
            .map(|c| {
                (0..c.len())
                    .map(|i| {
                        let (a, b) = (c[i], c[(i + 1) % c.len()]);
                        vec![a.min(b), a.max(b)]
                    })
                    .collect()
            })
            .collect();
        SingularLocus { dimension: 3, components }
    }

    /// Builds a locus from edge indices (dimension 3) or vertex indices
    /// (dimension 2) of `cx`.
    pub fn from_indices(cx: &CellComplex, components: &[Vec<usize>]) -> Result<Self, CoverError> {
        let dim = cx.dimension();
        let mut out = Vec::new();
        for comp in components {
            let mut cells = Vec::new();
            for &i in comp {
                if dim == 3 {
                    let e = cx.edges().get(i).ok_or_else(|| CoverError::InvalidLocus(format!("edge {i} out of range")))?;
                    cells.push(e.clone());
                } else {
                    if i >= cx.n_vertices() {
                        return Err(CoverError::InvalidLocus(format!("vertex {i} out of range")));
                    }
                    cells.push(vec![i]);
                }
            }
            out.push(cells);
        }
        let z = SingularLocus { dimension: dim, components: out };
        z.validate(cx)?;
        Ok(z)
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn label(i: usize) -> String {
        format!("Σ{}", i + 1)
    }

    /// Vertices of each component, sorted.
    pub fn component_vertices(&self) -> Vec<Vec<usize>> {
        self.components
            .iter()
            .map(|c| c.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect())
            .collect()
    }

    /// `mask[v]` is the component containing vertex `v`, if any.
    pub fn vertex_component(&self, n_vertices: usize) -> Vec<Option<usize>> {
        let mut m = vec![None; n_vertices];
        for (i, vs) in self.component_vertices().iter().enumerate() {
            for &v in vs {
                m[v] = Some(i);
            }
        }
        m
    }

    pub fn vertex_mask(&self, n_vertices: usize) -> Vec<bool> {
        self.vertex_component(n_vertices).iter().map(Option::is_some).collect()
    }

    /// Euler characteristic of Z as a subcomplex.
    pub fn euler_characteristic(&self) -> i64 {
        let nv: usize = self.component_vertices().iter().map(Vec::len).sum();
        let ne: usize = if self.dimension == 3 { self.components.iter().map(Vec::len).sum() } else { 0 };
        nv as i64 - ne as i64
    }

    /// Checks that the cells exist and form disjoint simple loops (or points).
    pub fn validate(&self, cx: &CellComplex) -> Result<(), CoverError> {
        let bad = |s: String| Err(CoverError::InvalidLocus(s));
        if self.dimension != cx.dimension() {
            return bad(format!("locus dimension {} on a {}-complex", self.dimension, cx.dimension()));
        }
        if self.components.iter().any(Vec::is_empty) {
            return bad("empty component".into());
        }
        let mut owner = vec![usize::MAX; cx.n_vertices()];
        for (i, comp) in self.components.iter().enumerate() {
            for c in comp {
                if c.len() != self.dimension - 1 || cx.cell_index(c).is_none() {
                    return bad(format!("{c:?} is not a cell of the right dimension"));
                }
            }
            for &v in &self.component_vertices()[i] {
                if owner[v] != usize::MAX {
                    return bad(format!("vertex {v} lies in two components"));
                }
                owner[v] = i;
            }
            if self.dimension == 2 {
                if comp.len() != 1 {
                    return bad("a surface locus component is a single vertex".into());
                }
                continue;
            }
            let distinct: BTreeSet<&Simplex> = comp.iter().collect();
            if distinct.len() != comp.len() || comp.len() < 3 {
                return bad(format!("component {} is not a simple loop", Self::label(i)));
            }
            let mut deg = std::collections::BTreeMap::<usize, Vec<usize>>::new();
            for e in comp {
                deg.entry(e[0]).or_default().push(e[1]);
                deg.entry(e[1]).or_default().push(e[0]);
            }
            if deg.values().any(|n| n.len() != 2) {
                return bad(format!("component {} has a vertex of degree other than 2", Self::label(i)));
            }
            // connected: walk the loop
            let start = comp[0][0];
            let (mut prev, mut cur, mut steps) = (start, deg[&start][0], 1);
            while cur != start {
                let n = &deg[&cur];
                let next = if n[0] != prev { n[0] } else { n[1] };
                prev = cur;
                cur = next;
                steps += 1;
            }
            if steps != comp.len() {
                return bad(format!("component {} is not connected", Self::label(i)));
            }
        }
        Ok(())
    }

    /// Cells of Z in every degree, as vertex tuples.
    pub fn cells(&self) -> BTreeSet<Simplex> {
        let mut s: BTreeSet<Simplex> = BTreeSet::new();
        for comp in &self.components {
            for c in comp {
                s.insert(c.clone());
                for &v in c {
                    s.insert(vec![v]);
                }
            }
        }
        s
    }

    /// The lowest-dimensional cell outside Z with all of its vertices in Z.
    pub fn fullness_violation(&self, cx: &CellComplex) -> Option<Simplex> {
        let z = self.vertex_mask(cx.n_vertices());
        let cells = self.cells();
        (1..=cx.dimension()).find_map(|k| {
            cx.cells(k).iter().find(|c| c.iter().all(|&v| z[v]) && !cells.contains(*c)).cloned()
        })
    }

    pub fn is_full(&self, cx: &CellComplex) -> bool {
        self.fullness_violation(cx).is_none()
    }

    /// Stellar-subdivides cells violating fullness until Z is full. Vertex
    /// indices of `cx` are preserved; new vertices are appended.
    pub fn make_full(&self, cx: &CellComplex) -> Result<CellComplex, CoverError> {
        self.validate(cx)?;
        let mut cur = cx.clone();
        while let Some(s) = self.fullness_violation(&cur) {
            cur = stellar_subdivision(&cur, &s)?;
        }
        Ok(cur)
    }

    /// The link of each top cell of Z (a Z edge in dimension 3, a Z vertex in
    /// dimension 2) as a cyclic vertex sequence, tagged with its component.
    pub fn meridians(&self, cx: &CellComplex) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (i, comp) in self.components.iter().enumerate() {
            for c in comp {
                out.push((i, link_cycle(cx, c)));
            }
        }
        out
    }

    /// Locus JSON `{"components": [[index, ...], ...]}` with edge indices
    /// (dimension 3) or vertex indices (dimension 2) of `cx`.
    pub fn to_index_json(&self, cx: &CellComplex) -> LocusJson {
        LocusJson {
            components: self
                .components
                .iter()
                .map(|comp| {
                    comp.iter().map(|c| if self.dimension == 3 { cx.cell_index(c).unwrap() } else { c[0] }).collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusJson {
    pub components: Vec<Vec<usize>>,
}

/// Link of a codimension-2 cell of a closed manifold as a cyclic vertex order.
pub fn link_cycle(cx: &CellComplex, cell: &[usize]) -> Vec<usize> {
    let mut nbr: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for t in cx.top_cells() {
        if cell.iter().all(|v| t.contains(v)) {
            let rest: Vec<usize> = t.iter().copied().filter(|v| !cell.contains(v)).collect();
            nbr.entry(rest[0]).or_default().push(rest[1]);
            nbr.entry(rest[1]).or_default().push(rest[0]);
        }
    }
    let start = *nbr.keys().next().expect("cell has a nonempty link");
    let mut cycle = vec![start];
    let (mut prev, mut cur) = (start, nbr[&start][0]);
    while cur != start {
        cycle.push(cur);
        let n = &nbr[&cur];
        let next = if n[0] != prev { n[0] } else { n[1] };
        prev = cur;
        cur = next;
    }
    cycle
}

/// Z/2 transition data on the edges of `M` disjoint from `Z`; edges meeting
/// `Z` carry 0 and are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyCocycle {
    pub values: Vec<u8>,
}

impl MonodromyCocycle {
    /// Parity of the cocycle along a cyclic vertex sequence in `M \ Z`.
    pub fn holonomy(&self, cx: &CellComplex, cycle: &[usize]) -> u8 {
        let mut h = 0;
        for i in 0..cycle.len() {
            let e = cx.edge_index(cycle[i], cycle[(i + 1) % cycle.len()]).expect("cycle edge");
            h ^= self.values[e];
        }
        h
    }

    /// Checks closedness on triangles disjoint from Z and odd holonomy on
    /// every meridian.
    pub fn validate(&self, cx: &CellComplex, z: &SingularLocus) -> Result<(), CoverError> {
        if self.values.len() != cx.n_cells(1) {
            return Err(CoverError::InvalidCocycle("wrong number of edge values".into()));
        }
        let zm = z.vertex_mask(cx.n_vertices());
        for t in cx.cells(2) {
            if t.iter().all(|&v| !zm[v]) {
                let s = (0..3).fold(0, |acc, i| acc ^ self.values[cx.edge_index(t[i], t[(i + 1) % 3]).unwrap()]);
                if s != 0 {
                    return Err(CoverError::InvalidCocycle(format!("not closed on {t:?}")));
                }
            }
        }
        for (i, m) in z.meridians(cx) {
            if m.iter().any(|&v| zm[v]) {
                return Err(CoverError::NotFull(m));
            }
            if self.holonomy(cx, &m) != 1 {
                return Err(CoverError::InvalidCocycle(format!("even holonomy around {}", SingularLocus::label(i))));
            }
        }
        Ok(())
    }
}

/// Solves for a monodromy cocycle over GF(2): closed on `M \ Z` and odd on
/// every meridian of a full locus.
pub fn meridian_cocycle(cx: &CellComplex, z: &SingularLocus) -> Result<MonodromyCocycle, CoverError> {
    z.validate(cx)?;
    if let Some(s) = z.fullness_violation(cx) {
        return Err(CoverError::NotFull(s));
    }
    let zm = z.vertex_mask(cx.n_vertices());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for t in cx.cells(2) {
        if t.iter().all(|&v| !zm[v]) {
            rows.push((0..3).map(|i| cx.edge_index(t[i], t[(i + 1) % 3]).unwrap()).collect());
            rhs.push(false);
        }
    }
    for (_, m) in z.meridians(cx) {
        rows.push((0..m.len()).map(|i| cx.edge_index(m[i], m[(i + 1) % m.len()]).unwrap()).collect());
        rhs.push(true);
    }
    let x = gf2_solve(&rows, &rhs, cx.n_cells(1)).ok_or(CoverError::NoLineBundle)?;
    Ok(MonodromyCocycle { values: x.into_iter().map(u8::from).collect() })
}
