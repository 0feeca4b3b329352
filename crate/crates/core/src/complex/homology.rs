use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{faces, CellComplex, ComplexError};
use crate::linalg::{integer_kernel, invariant_factors, LinalgError};

impl From<LinalgError> for ComplexError {
    fn from(e: LinalgError) -> Self {
        ComplexError::Arithmetic(e.to_string())
    }
}

/// Betti numbers and torsion coefficients per degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologySummary {
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<u64>>,
}

impl HomologySummary {
    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

impl CellComplex {
    /// Integral homology via Smith normal form of the boundary matrices.
    pub fn homology(&self) -> Result<HomologySummary, ComplexError> {
        let d = self.dimension();
        // factors[k] = invariant factors of boundary k (k = 1..=d)
        let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); d + 2];
        for k in 1..=d {
            factors[k] = invariant_factors(&self.boundary_matrix(k)?)?;
        }
        let mut betti = Vec::with_capacity(d + 1);
        let mut torsion = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let rank_out = factors[k].len();
            let rank_in = factors[k + 1].len();
            betti.push(self.n_cells(k) - rank_out - rank_in);
            let mut t: Vec<u64> = factors[k + 1]
                .iter()
                .filter(|f| !f.is_one())
                .map(|f| f.to_u64().ok_or_else(|| ComplexError::Arithmetic("torsion too large".into())))
                .collect::<Result<_, _>>()?;
            t.sort_unstable();
            torsion.push(t);
        }
        Ok(HomologySummary { betti, torsion })
    }

    pub fn is_rational_homology_sphere(&self) -> Result<bool, ComplexError> {
        if self.dimension() != 3 {
            return Err(ComplexError::Dimension { expected: 3, found: self.dimension() });
        }
        Ok(self.homology()?.betti == vec![1, 0, 0, 1])
    }

    /// Integer 1-cocycles spanning H^1 modulo torsion, with a dual cycle basis.
    pub fn cocycle_basis(&self) -> Result<CohomologyBasis, ComplexError> {
        CohomologyBasis::new(self)
    }
}

/// Integer cocycle basis normalized to vanish on a spanning forest, together
/// with the fundamental cycles that pair with it as the identity matrix.
#[derive(Debug, Clone)]
pub struct CohomologyBasis {
    /// `tree[e]` marks spanning-forest edges.
    pub tree: Vec<bool>,
    /// Parent pointers of the forest: `(parent vertex, edge)`; roots map to themselves.
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    /// Edge carrying each basis cocycle's unit value.
    pub free_edges: Vec<usize>,
    pub cocycles: Vec<Vec<i64>>,
    /// Fundamental cycle of each free edge as `(edge, coefficient)`.
    pub cycles: Vec<Vec<(usize, i64)>>,
    /// Whether `cocycles` is a lattice basis of integral H^1.
    pub saturated: bool,
}

impl CohomologyBasis {
    fn new(cx: &CellComplex) -> Result<Self, ComplexError> {
        let nv = cx.n_vertices();
        let ne = cx.n_cells(1);
        let adj = cx.vertex_edges();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
        let mut depth = vec![0usize; nv];
        let mut seen = vec![false; nv];
        let mut tree = vec![false; ne];
        for root in 0..nv {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        tree[e] = true;
                        parent[w] = Some((v, e));
                        depth[w] = depth[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        let non_tree: Vec<usize> = (0..ne).filter(|&e| !tree[e]).collect();
        let mut col_of = vec![usize::MAX; ne];
        for (i, &e) in non_tree.iter().enumerate() {
            col_of[e] = i;
        }
        let rows: Vec<Vec<(usize, i64)>> = cx
            .cells(2)
            .iter()
            .map(|t| {
                let mut r: Vec<(usize, i64)> = faces(t)
                    .filter_map(|(f, s)| {
                        let e = cx.cell_index(&f).unwrap();
                        (!tree[e]).then_some((col_of[e], s))
                    })
                    .collect();
                r.sort_unstable();
                r
            })
            .filter(|r| !r.is_empty())
            .collect();
        let kernel = integer_kernel(rows, non_tree.len())?;
        let free_edges: Vec<usize> = kernel.free.iter().map(|&c| non_tree[c]).collect();
        let cocycles: Vec<Vec<i64>> = kernel
            .basis
            .iter()
            .map(|x| {
                let mut full = vec![0i64; ne];
                for (i, &e) in non_tree.iter().enumerate() {
                    full[e] = x[i];
                }
                full
            })
            .collect();
        let mut basis = CohomologyBasis {
            tree,
            parent,
            depth,
            free_edges: free_edges.clone(),
            cocycles,
            cycles: Vec::new(),
            saturated: kernel.saturated,
        };
        basis.cycles = free_edges.iter().map(|&e| basis.fundamental_cycle(cx, e)).collect();
        Ok(basis)
    }

    pub fn rank(&self) -> usize {
        self.cocycles.len()
    }

    /// Edge path in the forest from `a` to `b` as `(edge, sign)` along sorted
    /// edge orientation.
    pub fn tree_path(&self, cx: &CellComplex, a: usize, b: usize) -> Vec<(usize, i64)> {
        let (mut x, mut y) = (a, b);
        let mut up: Vec<(usize, i64)> = Vec::new();
        let mut down: Vec<(usize, i64)> = Vec::new();
        let edges = cx.edges();
        let step = |v: usize, e: usize, to: usize| -> i64 {
            if edges[e][0] == v && edges[e][1] == to {
                1
            } else {
                -1
            }
        };
        while x != y {
            if self.depth[x] >= self.depth[y] {
                let (p, e) = self.parent[x].expect("vertices in one component");
                up.push((e, step(x, e, p)));
                x = p;
            } else {
                let (p, e) = self.parent[y].expect("vertices in one component");
                down.push((e, step(p, e, y)));
                y = p;
            }
        }
        down.reverse();
        up.extend(down);
        up
    }

    fn fundamental_cycle(&self, cx: &CellComplex, e: usize) -> Vec<(usize, i64)> {
        let (a, b) = (cx.edges()[e][0], cx.edges()[e][1]);
        let mut c = vec![(e, 1)];
        c.extend(self.tree_path(cx, b, a));
        c
    }

    /// Potential of a closed cochain along the forest (zero at roots).
    pub fn potential(&self, cx: &CellComplex, x: &[f64]) -> Vec<f64> {
        let nv = cx.n_vertices();
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by_key(|&v| self.depth[v]);
        let mut f = vec![0.0; nv];
        for v in order {
            if let Some((p, e)) = self.parent[v] {
                let s = if cx.edges()[e][0] == p { 1.0 } else { -1.0 };
                f[v] = f[p] + s * x[e];
            }
        }
        f
    }

    /// Periods of a cochain on the fundamental cycles; for closed cochains
    /// these are the coordinates of its class in `cocycles`.
    pub fn periods(&self, x: &[f64]) -> Vec<f64> {
        self.cycles
            .iter()
            .map(|c| c.iter().map(|&(e, s)| s as f64 * x[e]).sum())
            .collect()
    }

    pub fn integer_periods(&self, x: &[i64]) -> Vec<i64> {
        self.cycles.iter().map(|c| c.iter().map(|&(e, s)| s * x[e]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn sphere_and_torus_homology() {
        let h = tetrahedron_boundary().homology().unwrap();
        assert_eq!(h.betti, vec![1, 0, 1]);
        assert!(h.torsion.iter().all(Vec::is_empty));
        let t = seven_vertex_torus().homology().unwrap();
        assert_eq!(t.betti, vec![1, 2, 1]);
    }

    #[test]
    fn rational_homology_sphere_requires_dimension_three() {
        assert!(matches!(
            tetrahedron_boundary().is_rational_homology_sphere(),
            Err(ComplexError::Dimension { .. })
        ));
        assert!(simplex_boundary(4).is_rational_homology_sphere().unwrap());
    }

    #[test]
    fn sphere_has_no_cocycles() {
        assert_eq!(tetrahedron_boundary().cocycle_basis().unwrap().rank(), 0);
    }

    #[test]
    fn cocycles_are_closed_and_dual_to_cycles() {
        let t = seven_vertex_torus();
        let b = t.cocycle_basis().unwrap();
        assert_eq!(b.rank(), 2);
        assert!(b.saturated);
        for (i, z) in b.cocycles.iter().enumerate() {
            let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
            assert!(t.coboundary1(&zf).iter().all(|&v| v == 0.0));
            let p = b.integer_periods(z);
            for (j, &pj) in p.iter().enumerate() {
                assert_eq!(pj, (i == j) as i64);
            }
        }
    }
}
