//! Standard triangulations and subdivisions.

use std::collections::{BTreeMap, BTreeSet};

use super::{CellComplex, ComplexError, Simplex};

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Boundary of the `n`-simplex: a triangulated `(n-1)`-sphere on `n + 1` vertices.
pub fn simplex_boundary(n: usize) -> CellComplex {
    CellComplex::from_top_cells(n - 1, n + 1, &subsets(n + 1, n)).expect("simplex boundary")
}

/// Boundary of a tetrahedron, the minimal 2-sphere.
pub fn tetrahedron_boundary() -> CellComplex {
    simplex_boundary(3)
}

/// The regular icosahedron; vertex `i + 6` is antipodal to vertex `i`.
pub fn icosahedron() -> CellComplex {
    // 0 top, 1..=5 upper ring, 6 bottom, 7..=11 lower ring; vertex 6+i is
    // antipodal to i with the lower ring rotated by half a step
    let mut tris = Vec::new();
    for i in 0..5 {
        let u = 1 + i;
        let un = 1 + (i + 1) % 5;
        // lower ring vertex j sits antipodal to upper ring vertex j - 3
        let l = 7 + (i + 2) % 5;
        let ln = 7 + (i + 3) % 5;
        tris.push(vec![0, u, un]);
        tris.push(vec![6, l, ln]);
        tris.push(vec![u, un, ln]);
        tris.push(vec![u, l, ln]);
    }
    CellComplex::from_top_cells(2, 12, &tris).expect("icosahedron")
}

/// Möbius' 7-vertex torus.
pub fn seven_vertex_torus() -> CellComplex {
    let mut tris = Vec::new();
    for i in 0..7 {
        tris.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
        tris.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
    }
    CellComplex::from_top_cells(2, 7, &tris).expect("7-vertex torus")
}

/// Square-grid torus with `n x n` vertices (index `i + n j`) and diagonals
/// from `(i, j)` to `(i + 1, j + 1)`.
pub fn grid_torus(n: usize) -> Result<CellComplex, ComplexError> {
    let v = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            tris.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            tris.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    CellComplex::from_oriented_top_cells(2, n * n, &tris)
}

/// Join of an `m`-cycle and an `n`-cycle, a triangulated 3-sphere. Vertices
/// `0..m` form the first circle and `m..m+n` the second; the two circles
/// form a Hopf link.
pub fn join_of_cycles(m: usize, n: usize) -> CellComplex {
    let mut tets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            tets.push(vec![i, (i + 1) % m, m + j, m + (j + 1) % n]);
        }
    }
    CellComplex::from_top_cells(3, m + n, &tets).expect("join of cycles")
}

/// `S^2 x S^1` as the boundary of a tetrahedron times an `n`-cycle, using
/// the staircase triangulation of each prism.
pub fn sphere_cross_circle(n: usize) -> CellComplex {
    let s2 = tetrahedron_boundary();
    let v = |p: usize, i: usize| p + 4 * (i % n);
    let mut tets = Vec::new();
    for t in s2.top_cells() {
        let (p, q, r) = (t[0], t[1], t[2]);
        for i in 0..n {
            tets.push(vec![v(p, i), v(q, i), v(r, i), v(r, i + 1)]);
            tets.push(vec![v(p, i), v(q, i), v(q, i + 1), v(r, i + 1)]);
            tets.push(vec![v(p, i), v(p, i + 1), v(q, i + 1), v(r, i + 1)]);
        }
    }
    CellComplex::from_top_cells(3, 4 * n, &tets).expect("S2 x S1")
}

/// Barycentric subdivision. Returns the subdivided complex and, for each new
/// vertex, the simplex of the original complex it is the barycenter of.
pub fn barycentric_subdivision(cx: &CellComplex) -> (CellComplex, Vec<Simplex>) {
    let d = cx.dimension();
    let mut verts: Vec<Simplex> = Vec::new();
    let mut id: BTreeMap<Simplex, usize> = BTreeMap::new();
    for k in 0..=d {
        for c in cx.cells(k) {
            id.insert(c.clone(), verts.len());
            verts.push(c.clone());
        }
    }
    let mut tops = Vec::new();
    for top in cx.top_cells() {
        // flags: permutations of the top cell's vertices
        let mut perm: Vec<usize> = top.clone();
        permutations(&mut perm, 0, &mut |p| {
            let mut flag = Vec::with_capacity(d + 1);
            for k in 1..=d + 1 {
                let mut face: Vec<usize> = p[..k].to_vec();
                face.sort_unstable();
                flag.push(id[&face]);
            }
            tops.push(flag);
        });
    }
    let sd = CellComplex::from_top_cells(d, verts.len(), &tops).expect("barycentric subdivision");
    (sd, verts)
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Bisects every edge joining a vertex of `core` to a vertex outside it,
/// `rounds` times, which halves the star of `core` each round. Existing
/// vertex indices are preserved.
pub fn refine_around(cx: &CellComplex, core: &[usize], rounds: usize) -> Result<CellComplex, ComplexError> {
    let mut tops = cx.oriented_top_cells();
    let mut n = cx.n_vertices();
    let inside: Vec<bool> = (0..n).map(|v| core.contains(&v)).collect();
    let is_core = |v: usize| v < inside.len() && inside[v];
    for _ in 0..rounds {
        let mut star = vec![Vec::new(); n];
        for (i, t) in tops.iter().enumerate() {
            for &v in t {
                star[v].push(i);
            }
        }
        let mut cut = std::collections::BTreeSet::new();
        for t in &tops {
            for &a in t {
                for &b in t {
                    if a < b && is_core(a) != is_core(b) {
                        cut.insert((a, b));
                    }
                }
            }
        }
        for (a, b) in cut {
            let new = n;
            n += 1;
            star.push(Vec::new());
            let hit: Vec<usize> = star[a].iter().copied().filter(|&i| tops[i].contains(&b)).collect();
            for i in hit {
                // replacing one endpoint at its position keeps orientation
                let other: Vec<usize> = tops[i].iter().map(|&w| if w == b { new } else { w }).collect();
                tops[i] = tops[i].iter().map(|&w| if w == a { new } else { w }).collect();
                star[a].retain(|&j| j != i);
                star[new].push(i);
                let j = tops.len();
                for &w in &other {
                    if w != a {
                        star[w].push(j);
                    }
                }
                star[a].push(j);
                tops.push(other);
            }
        }
    }
    CellComplex::from_oriented_top_cells(cx.dimension(), n, &tops)
}

/// Stellar subdivision of `simplex`: a new vertex (index `n_vertices`) is
/// placed in its interior and its star is re-coned.
pub fn stellar_subdivision(cx: &CellComplex, simplex: &[usize]) -> Result<CellComplex, ComplexError> {
    let mut s = simplex.to_vec();
    s.sort_unstable();
    if cx.cell_index(&s).is_none() {
        return Err(ComplexError::Invalid(format!("{s:?} is not a cell")));
    }
    if s.len() == 1 {
        return Ok(cx.clone());
    }
    let new = cx.n_vertices();
    let mut tops = Vec::new();
    for t in cx.oriented_top_cells() {
        if s.iter().all(|v| t.contains(v)) {
            // replacing one vertex of the simplex at its position keeps orientation
            for v in &s {
                let cell: Vec<usize> = t.iter().map(|&w| if w == *v { new } else { w }).collect();
                tops.push(cell);
            }
        } else {
            tops.push(t);
        }
    }
    CellComplex::from_oriented_top_cells(cx.dimension(), new + 1, &tops)
}

/// Boundary of the 4-dimensional cross-polytope; vertex `2i` is `+e_i` and
/// `2i + 1` is `-e_i`.
pub fn cross_polytope_boundary() -> CellComplex {
    let mut tets = Vec::new();
    for mask in 0..16usize {
        tets.push((0..4).map(|i| 2 * i + ((mask >> i) & 1)).collect::<Vec<_>>());
    }
    CellComplex::from_top_cells(3, 8, &tets).expect("cross-polytope")
}

/// Real projective 3-space `L(2,1)`: the antipodal quotient of the
/// barycentric subdivision of the cross-polytope boundary.
pub fn projective_three_space() -> CellComplex {
    let (sd, verts) = barycentric_subdivision(&cross_polytope_boundary());
    let antipode = |c: &Simplex| -> Simplex {
        let mut a: Simplex = c.iter().map(|&v| v ^ 1).collect();
        a.sort_unstable();
        a
    };
    let pos: BTreeMap<&Simplex, usize> = verts.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut class = vec![usize::MAX; verts.len()];
    let mut next = 0;
    for (i, c) in verts.iter().enumerate() {
        if class[i] == usize::MAX {
            class[i] = next;
            class[pos[&antipode(c)]] = next;
            next += 1;
        }
    }
    let tops: BTreeSet<Vec<usize>> = sd
        .top_cells()
        .iter()
        .map(|t| {
            let mut q: Vec<usize> = t.iter().map(|&v| class[v]).collect();
            q.sort_unstable();
            q
        })
        .collect();
    let tops: Vec<Vec<usize>> = tops.into_iter().collect();
    CellComplex::from_top_cells(3, next, &tops).expect("RP3")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_manifolds_with_expected_euler_characteristic() {
        assert_eq!(icosahedron().euler_characteristic(), 2);
        assert_eq!(icosahedron().n_cells(2), 20);
        assert_eq!(seven_vertex_torus().euler_characteristic(), 0);
        assert_eq!(grid_torus(4).unwrap().euler_characteristic(), 0);
        assert_eq!(join_of_cycles(4, 5).euler_characteristic(), 0);
        assert_eq!(sphere_cross_circle(3).euler_characteristic(), 0);
        assert_eq!(projective_three_space().euler_characteristic(), 0);
    }

    #[test]
    fn icosahedron_antipodes_are_not_adjacent() {
        let ico = icosahedron();
        for i in 0..6 {
            assert!(ico.edge_index(i, i + 6).is_none());
        }
        let anti = |v: usize| (v + 6) % 12;
        for t in ico.top_cells() {
            let img: Vec<usize> = t.iter().map(|&v| anti(v)).collect();
            assert!(ico.cell_index(&img).is_some());
        }
    }

    #[test]
    fn subdivisions_preserve_homology() {
        let s = join_of_cycles(3, 3);
        let (sd, _) = barycentric_subdivision(&s);
        assert_eq!(sd.homology().unwrap(), s.homology().unwrap());
        let st = stellar_subdivision(&s, &[0, 3]).unwrap();
        assert_eq!(st.n_vertices(), 7);
        assert_eq!(st.homology().unwrap().betti, vec![1, 0, 0, 1]);
    }

    #[test]
    fn shipped_three_manifolds() {
        let l21 = projective_three_space();
        let h = l21.homology().unwrap();
        assert_eq!(h.betti, vec![1, 0, 0, 1]);
        assert_eq!(h.torsion[1], vec![2]);
        assert!(l21.is_rational_homology_sphere().unwrap());
        let s2s1 = sphere_cross_circle(3);
        assert_eq!(s2s1.homology().unwrap().betti, vec![1, 1, 1, 1]);
        assert!(!s2s1.is_rational_homology_sphere().unwrap());
        let b = s2s1.cocycle_basis().unwrap();
        assert_eq!(b.rank(), 1);
        assert_ne!(b.integer_periods(&b.cocycles[0]), vec![0]);
    }
}
