use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{CircleMap, LeafDomain};
use crate::complex::CellComplex;

/// PL type of a vertex for the (tie-broken) function `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VertexType {
    Regular,
    Critical { index: u8 },
    Unresolved,
}

impl VertexType {
    pub fn is_critical(self) -> bool {
        self != VertexType::Regular
    }
}

/// Increments `δ(x→w) = μ v̂(x→w)` with exact ties broken by an
/// anti-equivariant perturbation keyed on base index and sheet.
fn increments(cx: &CellComplex, adj: &[(usize, usize)], key: &[i64], mu: f64, cochain: &[f64], x: usize) -> Vec<(usize, bool)> {
    adj.iter()
        .map(|&(w, e)| {
            let s = if cx.edges()[e][0] == x { 1.0 } else { -1.0 };
            let d = s * mu * cochain[e];
            let up = if d != 0.0 { d > 0.0 } else { key[w] > key[x] };
            (w, up)
        })
        .collect()
}

/// (components, Euler characteristic) of the part of the link of `x`
/// spanned by the vertices in `side`.
fn link_side(cells: &[&[usize]], x: usize, side: &[usize]) -> (usize, i64) {
    let idx = |v: usize| side.iter().position(|&s| s == v);
    let mut uf = UnionFind::new(side.len());
    let mut faces = std::collections::BTreeSet::new();
    for t in cells {
        let rest: Vec<usize> = t.iter().copied().filter(|&v| v != x).collect();
        let n = rest.len();
        for mask in 1u32..(1 << n) {
            let f: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| rest[i]).collect();
            if f.iter().all(|&v| idx(v).is_some()) {
                faces.insert(f);
            }
        }
    }
    let mut chi = 0i64;
    for f in &faces {
        chi += if f.len() % 2 == 1 { 1 } else { -1 };
        if f.len() == 2 {
            uf.union(idx(f[0]).unwrap(), idx(f[1]).unwrap());
        }
    }
    let comps = (0..side.len()).filter(|&i| uf.find(i) == i).count();
    (comps, chi)
}

/// PL critical type of every non-branch vertex (branch vertices get `None`).
pub fn classify_vertices(domain: LeafDomain, map: &CircleMap, cochain: &[f64]) -> Vec<Option<VertexType>> {
    let cx = domain.complex();
    let dim = cx.dimension();
    let stars = cx.vertex_stars();
    let branch = domain.branch_component();
    let adj = cx.vertex_edges();
    let base = domain.vertex_base();
    let key: Vec<i64> = domain.sheet_sign().iter().zip(&base).map(|(&s, &b)| s as i64 * (b as i64 + 1)).collect();
    (0..cx.n_vertices())
        .map(|x| {
            if branch[x].is_some() {
                return None;
            }
            let inc = increments(cx, &adj[x], &key, map.mu(), cochain, x);
            let lower: Vec<usize> = inc.iter().filter(|p| !p.1).map(|p| p.0).collect();
            let upper: Vec<usize> = inc.iter().filter(|p| p.1).map(|p| p.0).collect();
            if lower.is_empty() {
                return Some(VertexType::Critical { index: 0 });
            }
            if upper.is_empty() {
                return Some(VertexType::Critical { index: dim as u8 });
            }
            let cells: Vec<&[usize]> = stars[x].iter().map(|&t| cx.top_cells()[t].as_slice()).collect();
            let lo = link_side(&cells, x, &lower);
            let hi = link_side(&cells, x, &upper);
            Some(match (dim, lo, hi) {
                (_, (1, 1), (1, 1)) => VertexType::Regular,
                (2, (2, 2), (2, 2)) => VertexType::Critical { index: 1 },
                (3, (2, 2), (1, 0)) => VertexType::Critical { index: 1 },
                (3, (1, 0), (2, 2)) => VertexType::Critical { index: 2 },
                _ => VertexType::Unresolved,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub vertex: usize,
    pub base_vertex: usize,
    /// `None` for an unresolved (non-Morse) zero.
    pub index: Option<u8>,
    pub star_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub zeros: Vec<ZeroEntry>,
    /// Small stars that turned out PL-regular and were discarded.
    pub rejected: Vec<usize>,
    pub threshold: f64,
    /// Median `|v|` over all edges.
    pub scale: f64,
    pub transverse: bool,
}

impl ZeroReport {
    pub fn base_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.zeros.iter().map(|z| z.base_vertex).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Vertices off the branch locus whose star has `max |v| < threshold · scale`
/// and which are PL-critical, with their Morse index.
pub fn detect_zeros(domain: LeafDomain, map: &CircleMap, cochain: &[f64], threshold: f64) -> ZeroReport {
    let cx = domain.complex();
    let mut abs: Vec<f64> = cochain.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let scale = abs.get(abs.len() / 2).copied().unwrap_or(0.0);
    let types = classify_vertices(domain, map, cochain);
    let base = domain.vertex_base();
    let adj = cx.vertex_edges();
    let mut zeros = Vec::new();
    let mut rejected = Vec::new();
    for (x, t) in types.iter().enumerate() {
        let Some(t) = t else { continue };
        let star_max = adj[x].iter().map(|&(_, e)| cochain[e].abs()).fold(0.0, f64::max);
        if star_max >= threshold * scale {
            continue;
        }
        match t {
            VertexType::Regular => rejected.push(x),
            VertexType::Critical { index } => {
                zeros.push(ZeroEntry { vertex: x, base_vertex: base[x], index: Some(*index), star_max })
            }
            VertexType::Unresolved => zeros.push(ZeroEntry { vertex: x, base_vertex: base[x], index: None, star_max }),
        }
    }
    let transverse = zeros.iter().all(|z| z.index.is_some());
    ZeroReport { zeros, rejected, threshold, scale, transverse }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::grid_torus;

    /// `df` on the 8×8 torus with a saddle of tiny amplitude at vertex 27.
    fn saddle() -> (crate::complex::CellComplex, Vec<f64>) {
        let cx = grid_torus(8).unwrap();
        let s = 27;
        let mut f: Vec<f64> = (0..64).map(|v| 1.0 + ((v * 37) % 64) as f64 / 64.0).collect();
        f[s] = 0.0;
        // cyclic order around (3,3): E, NE, N, W, SW, S
        let (i, j) = (3usize, 3usize);
        let at = |a: usize, b: usize| (a % 8) + 8 * (b % 8);
        let ring = [at(i + 1, j), at(i + 1, j + 1), at(i, j + 1), at(i + 7, j), at(i + 7, j + 7), at(i, j + 7)];
        for (v, sign) in ring.iter().zip([1.0, 1.0, -1.0, 1.0, -1.0, -1.0]) {
            f[*v] = sign * 1e-6;
        }
        (cx.clone(), cx.coboundary0(&f))
    }

    #[test]
    fn single_saddle_is_found() {
        let (cx, df) = saddle();
        let map = CircleMap { values: vec![0.0; 64], mu_numer: 1, mu_denom: 1, exact: true };
        let r = detect_zeros(LeafDomain::Plain(&cx), &map, &df, 1e-3);
        assert_eq!(r.zeros.len(), 1);
        assert_eq!(r.zeros[0].vertex, 27);
        assert_eq!(r.zeros[0].index, Some(1));
        assert!(r.transverse);
        assert!(detect_zeros(LeafDomain::Plain(&cx), &map, &df, 0.0).zeros.is_empty());
    }

    #[test]
    fn linear_function_is_regular() {
        let cx = grid_torus(6).unwrap();
        let x: Vec<f64> = cx.edges().iter().map(|e| match (e[1] % 6 + 6 - e[0] % 6) % 6 {
                1 => 1.0 / 6.0,
                5 => -1.0 / 6.0,
                _ => 0.0,
            }).collect();
        let map = CircleMap { values: vec![0.0; 36], mu_numer: 1, mu_denom: 1, exact: false };
        let t = classify_vertices(LeafDomain::Plain(&cx), &map, &x);
        assert!(t.iter().all(|t| *t == Some(VertexType::Regular)));
    }
}
