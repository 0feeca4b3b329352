use std::collections::{BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::IntrinsicError;
use crate::complex::{faces, CellComplex};

/// Acyclic matching on a cobordism `W` relative to its bottom boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseCertificate {
    pub dimension: usize,
    /// `(dimension, vertices)` of every unmatched cell.
    pub critical: Vec<(usize, Vec<usize>)>,
    /// Critical cells per dimension.
    pub counts: Vec<usize>,
    pub pairs: usize,
    pub cancelled: usize,
    pub passes: usize,
    /// `χ(W) − χ(L₁)`, which equals the alternating critical count.
    pub relative_euler: i64,
}

impl MorseCertificate {
    pub fn extreme_free(&self) -> bool {
        self.counts[0] == 0 && self.counts[self.dimension] == 0
    }
}

struct Cells {
    cells: Vec<Vec<usize>>,
    faces: Vec<Vec<usize>>,
    cofaces: Vec<Vec<usize>>,
    bottom: Vec<bool>,
}

impl Cells {
    fn new(cx: &CellComplex, region: &[usize], bottom_vertex: &[bool]) -> Self {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<Vec<usize>> = region.iter().map(|&t| cx.top_cells()[t].to_vec()).collect();
        while let Some(c) = stack.pop() {
            if index.contains_key(&c) {
                continue;
            }
            index.insert(c.clone(), cells.len());
            if c.len() > 1 {
                stack.extend(faces(&c).map(|(f, _)| f.to_vec()));
            }
            cells.push(c);
        }
        let n = cells.len();
        let mut fs = vec![Vec::new(); n];
        let mut cs = vec![Vec::new(); n];
        for (i, c) in cells.iter().enumerate() {
            if c.len() > 1 {
                for (f, _) in faces(c) {
                    let j = index[f.as_slice()];
                    fs[i].push(j);
                    cs[j].push(i);
                }
            }
        }
        let d = cx.dimension();
        // closure of the codimension-one faces lying on exactly one top cell
        let mut on_boundary = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| cells[i].len() == d && cs[i].len() == 1).collect();
        while let Some(i) = stack.pop() {
            if !on_boundary[i] {
                on_boundary[i] = true;
                stack.extend(fs[i].iter().copied());
            }
        }
        let bottom = (0..n).map(|i| on_boundary[i] && cells[i].iter().all(|&v| bottom_vertex[v])).collect();
        Cells { cells, faces: fs, cofaces: cs, bottom }
    }

    fn dim(&self, i: usize) -> usize {
        self.cells[i].len() - 1
    }
}

const NONE: usize = usize::MAX;

/// Lower-star discrete gradient of `f0` on the cobordism formed by the
/// `region` top cells of `cx`, relative to the bottom boundary (boundary cells
/// spanned by `bottom` vertices), followed by up to five passes cancelling
/// critical cells of index 0 and top index along unique gradient paths.
pub fn discrete_morse_cobordism(
    cx: &CellComplex,
    region: &[usize],
    f0: &[f64],
    bottom: &[bool],
) -> Result<MorseCertificate, IntrinsicError> {
    if region.is_empty() {
        return Err(IntrinsicError::InputError("empty cobordism".into()));
    }
    let d = cx.dimension();
    let k = Cells::new(cx, region, bottom);
    let n = k.cells.len();

    let l1: Vec<usize> = (0..n).filter(|&i| k.bottom[i]).collect();
    let mut uf = UnionFind::new(cx.n_vertices());
    for &i in &l1 {
        if k.dim(i) == 1 {
            uf.union(k.cells[i][0], k.cells[i][1]);
        }
    }
    let mut roots: Vec<usize> = l1.iter().filter(|&&i| k.dim(i) == 0).map(|&i| uf.find(k.cells[i][0])).collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() != 1 {
        return Err(IntrinsicError::InputError(format!("bottom boundary has {} components", roots.len())));
    }

    let mut order: Vec<usize> = (0..cx.n_vertices()).collect();
    order.sort_by(|&a, &b| f0[a].total_cmp(&f0[b]).then(a.cmp(&b)));
    let mut rank = vec![0; cx.n_vertices()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let key = |i: usize| -> Vec<usize> {
        let mut r: Vec<usize> = k.cells[i].iter().map(|&v| rank[v]).collect();
        r.sort_unstable_by(|a, b| b.cmp(a));
        r
    };
    let top_vertex = |i: usize| *k.cells[i].iter().max_by_key(|&&v| rank[v]).unwrap();

    let mut lower: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        if !k.bottom[i] {
            lower.entry(top_vertex(i)).or_default().push(i);
        }
    }
    let mut pair = vec![NONE; n];
    let mut critical = vec![false; n];
    let mut in_star = vec![false; n];
    let mut verts: Vec<usize> = lower.keys().copied().collect();
    verts.sort_unstable_by_key(|&v| rank[v]);
    for x in verts {
        let star = &lower[&x];
        for &i in star {
            in_star[i] = true;
        }
        let classified = |i: usize, pair: &[usize], critical: &[bool]| pair[i] != NONE || critical[i];
        let open = |i: usize, pair: &[usize], critical: &[bool], in_star: &[bool]| -> Vec<usize> {
            k.faces[i].iter().copied().filter(|&f| in_star[f] && !classified(f, pair, critical)).collect()
        };
        let mut one: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
        let mut zero: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
        for &i in star {
            match open(i, &pair, &critical, &in_star).len() {
                0 => zero.insert((key(i), i)),
                1 => one.insert((key(i), i)),
                _ => false,
            };
        }
        loop {
            while let Some((_, b)) = one.pop_first() {
                if classified(b, &pair, &critical) {
                    continue;
                }
                let u = open(b, &pair, &critical, &in_star);
                match u.len() {
                    0 => {
                        zero.insert((key(b), b));
                    }
                    1 => {
                        pair[b] = u[0];
                        pair[u[0]] = b;
                        for &c in k.cofaces[b].iter().chain(&k.cofaces[u[0]]) {
                            if in_star[c] && !classified(c, &pair, &critical) {
                                one.insert((key(c), c));
                            }
                        }
                    }
                    _ => {}
                }
            }
            let Some((_, g)) = zero.pop_first() else { break };
            if classified(g, &pair, &critical) || !open(g, &pair, &critical, &in_star).is_empty() {
                continue;
            }
            critical[g] = true;
            for &c in &k.cofaces[g] {
                if in_star[c] && !classified(c, &pair, &critical) {
                    one.insert((key(c), c));
                }
            }
        }
        for &i in star {
            if !classified(i, &pair, &critical) {
                critical[i] = true;
            }
            in_star[i] = false;
        }
    }

    let mut cancelled = 0;
    let mut passes = 0;
    while passes < 5 {
        let extreme: Vec<usize> = (0..n).filter(|&i| critical[i] && (k.dim(i) == 0 || k.dim(i) == d)).collect();
        if extreme.is_empty() {
            break;
        }
        passes += 1;
        let mut progress = false;
        for c in extreme {
            if !critical[c] {
                continue;
            }
            let done = if k.dim(c) == 0 { cancel_minimum(&k, &mut pair, &mut critical, c) } else { cancel_maximum(&k, &mut pair, &mut critical, c) };
            if done {
                cancelled += 1;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }

    let mut counts = vec![0; d + 1];
    let mut crit = Vec::new();
    for i in (0..n).filter(|&i| critical[i]) {
        counts[k.dim(i)] += 1;
        crit.push((k.dim(i), k.cells[i].clone()));
    }
    crit.sort();
    let relative_euler = (0..n).filter(|&i| !k.bottom[i]).map(|i| if k.dim(i) % 2 == 0 { 1i64 } else { -1 }).sum();
    let cert = MorseCertificate {
        dimension: d,
        critical: crit,
        counts,
        pairs: pair.iter().filter(|&&p| p != NONE).count() / 2,
        cancelled,
        passes,
        relative_euler,
    };
    if !cert.extreme_free() {
        let bad = cert.critical.iter().filter(|c| c.0 == 0 || c.0 == d).cloned().collect();
        return Err(IntrinsicError::MorseObstruction(bad));
    }
    Ok(cert)
}

/// Follows the gradient from vertex `p` down to a critical vertex, or `None`
/// if it runs into the bottom boundary.
fn descend(k: &Cells, pair: &[usize], critical: &[bool], mut p: usize) -> Option<Vec<usize>> {
    let mut path = vec![p];
    for _ in 0..k.cells.len() {
        if k.bottom[p] {
            return None;
        }
        if critical[p] {
            return Some(path);
        }
        let e = pair[p];
        let v = &k.cells[e];
        let q = if k.faces[e][0] == p { k.faces[e][1] } else { k.faces[e][0] };
        debug_assert!(v.len() == 2);
        path.push(e);
        path.push(q);
        p = q;
    }
    None
}

fn cancel_minimum(k: &Cells, pair: &mut [usize], critical: &mut [bool], v: usize) -> bool {
    for e in (0..k.cells.len()).filter(|&e| critical[e] && k.dim(e) == 1) {
        let flows: Vec<Option<Vec<usize>>> = k.faces[e].iter().map(|&p| descend(k, pair, critical, p)).collect();
        let hits: Vec<&Vec<usize>> = flows.iter().flatten().filter(|p| *p.last().unwrap() == v).collect();
        if hits.len() != 1 {
            continue;
        }
        let path = hits[0].clone();
        critical[e] = false;
        critical[v] = false;
        let mut edge = e;
        for step in path.chunks(2) {
            let p = step[0];
            let next = step.get(1).copied();
            pair[p] = edge;
            pair[edge] = p;
            if let Some(n) = next {
                edge = n;
            }
        }
        return true;
    }
    false
}

/// Follows the dual gradient from a codimension-one cell through `top` to a
/// critical top cell, or `None` if it leaves through the boundary.
fn ascend(k: &Cells, pair: &[usize], critical: &[bool], from: usize, mut top: usize) -> Option<Vec<usize>> {
    let mut path = vec![from, top];
    for _ in 0..k.cells.len() {
        if critical[top] {
            return Some(path);
        }
        let s = pair[top];
        if s == NONE || s == path[path.len() - 2] {
            return None;
        }
        let next = k.cofaces[s].iter().copied().find(|&c| c != top)?;
        path.push(s);
        path.push(next);
        top = next;
    }
    None
}

fn cancel_maximum(k: &Cells, pair: &mut [usize], critical: &mut [bool], t: usize) -> bool {
    let d = k.dim(t);
    for s in (0..k.cells.len()).filter(|&s| critical[s] && k.dim(s) + 1 == d) {
        let flows: Vec<Option<Vec<usize>>> = k.cofaces[s].iter().map(|&c| ascend(k, pair, critical, s, c)).collect();
        let hits: Vec<&Vec<usize>> = flows.iter().flatten().filter(|p| *p.last().unwrap() == t).collect();
        if hits.len() != 1 {
            continue;
        }
        let path = hits[0].clone();
        critical[s] = false;
        critical[t] = false;
        for step in path.chunks(2) {
            pair[step[0]] = step[1];
            pair[step[1]] = step[0];
        }
        return true;
    }
    false
}

/// Graph-Laplacian harmonic extension of the `fixed` values over the vertices
/// touched by `edges`, by conjugate gradients.
pub fn dirichlet_harmonic(n: usize, edges: &[[usize; 2]], fixed: &[Option<f64>], tol: f64) -> Vec<f64> {
    let mut nbr = vec![Vec::new(); n];
    for &[a, b] in edges {
        nbr[a].push(b);
        nbr[b].push(a);
    }
    let mut f: Vec<f64> = fixed.iter().map(|x| x.unwrap_or(0.0)).collect();
    let free: Vec<bool> = (0..n).map(|v| fixed[v].is_none() && !nbr[v].is_empty()).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n).map(|v| if free[v] { nbr[v].len() as f64 * x[v] - nbr[v].iter().filter(|&&w| free[w]).map(|&w| x[w]).sum::<f64>() } else { 0.0 }).collect()
    };
    let b: Vec<f64> = (0..n).map(|v| if free[v] { nbr[v].iter().filter(|&&w| !free[w]).map(|&w| f[w]).sum() } else { 0.0 }).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = tol * tol * dot(&b, &b).max(1e-300);
    for _ in 0..(10 * n).max(100) {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for v in 0..n {
            x[v] += alpha * p[v];
            r[v] -= alpha * ap[v];
        }
        let next = dot(&r, &r);
        for v in 0..n {
            p[v] = r[v] + next / rr * p[v];
        }
        rr = next;
    }
    for v in 0..n {
        if free[v] {
            f[v] = x[v];
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::grid_torus;

    const N: usize = 10;

    fn row(v: usize) -> usize {
        v / N
    }

    /// Rows `2..=7` of the grid torus, optionally with one square removed,
    /// and the harmonic function equal to 1 on row 2 and 2 on the rest of
    /// the boundary.
    fn cobordism(hole: bool) -> (CellComplex, Vec<usize>, Vec<f64>, Vec<bool>) {
        let cx = grid_torus(N).unwrap();
        let sq = [44, 45, 54, 55];
        let region: Vec<usize> = (0..cx.n_cells(2))
            .filter(|&t| {
                let c = &cx.top_cells()[t];
                c.iter().all(|&v| (2..=7).contains(&row(v))) && !(hole && c.iter().all(|v| sq.contains(v)))
            })
            .collect();
        let fixed: Vec<Option<f64>> = (0..N * N)
            .map(|v| match row(v) {
                2 => Some(1.0),
                7 => Some(2.0),
                _ if hole && sq.contains(&v) => Some(2.0),
                _ => None,
            })
            .collect();
        let edges: Vec<[usize; 2]> = cx
            .edges()
            .iter()
            .filter(|e| e.iter().all(|&v| (2..=7).contains(&row(v))))
            .map(|e| [e[0], e[1]])
            .collect();
        let mut f = dirichlet_harmonic(N * N, &edges, &fixed, 1e-12);
        for (v, x) in f.iter_mut().enumerate() {
            *x += 1e-4 * ((v * 7) % 11) as f64;
        }
        let bottom = (0..N * N).map(|v| row(v) == 2).collect();
        (cx, region, f, bottom)
    }

    #[test]
    fn product_cobordism_has_no_critical_cells() {
        let (cx, region, f, bottom) = cobordism(false);
        let c = discrete_morse_cobordism(&cx, &region, &f, &bottom).unwrap();
        assert_eq!(c.relative_euler, 0);
        assert_eq!(c.counts, vec![0, 0, 0], "{:?}", c.critical);
    }

    #[test]
    fn pair_of_pants_has_one_saddle() {
        let (cx, region, f, bottom) = cobordism(true);
        let c = discrete_morse_cobordism(&cx, &region, &f, &bottom).unwrap();
        assert_eq!(c.relative_euler, -1);
        assert_eq!(c.counts, vec![0, 1, 0], "{:?}", c.critical);
    }

    #[test]
    fn disconnected_bottom_is_rejected() {
        let (cx, region, f, _) = cobordism(false);
        let bottom: Vec<bool> = (0..N * N).map(|v| row(v) == 2 || row(v) == 7).collect();
        assert!(matches!(discrete_morse_cobordism(&cx, &region, &f, &bottom), Err(IntrinsicError::InputError(_))));
    }

    #[test]
    fn harmonic_extension_is_linear_on_a_path() {
        let edges = [[0, 1], [1, 2], [2, 3], [3, 4]];
        let fixed = [Some(0.0), None, None, None, Some(1.0)];
        let f = dirichlet_harmonic(5, &edges, &fixed, 1e-14);
        for (i, x) in f.iter().enumerate() {
            assert!((x - i as f64 / 4.0).abs() < 1e-12);
        }
    }
}
