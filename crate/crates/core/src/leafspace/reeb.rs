//! Level and slab components of a piecewise-linear circle map, computed over
//! per-cell linear frames glued by `x ↦ ±x + m` across codimension-one faces.

use std::collections::{HashMap, VecDeque};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{classify_vertices, CircleMap, LeafDomain, LeafEdge, LeafError, LeafGraph, LeafVertex, ZeroReport};
use crate::complex::CellComplex;
use crate::cover::BranchedCover;
use crate::par::Exec;

const EPS: f64 = 1e-9;
const SAME_LEVEL: f64 = 1e-11;

struct Transition {
    to: usize,
    face: Vec<usize>,
    eps: i64,
    m: i64,
}

/// Linear values of the map on every top cell, in that cell's own frame.
struct Frames {
    cells: Vec<Vec<(usize, f64)>>,
    ranges: Vec<(f64, f64)>,
    adj: Vec<Vec<Transition>>,
    /// `[1]` on a cover or plain complex, `[1, -1]` for two-valued base data.
    signs: Vec<i64>,
    circle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    cell: usize,
    s: i64,
    k: i64,
}

#[derive(Debug, Clone, Copy)]
enum Window {
    Level(f64),
    Slab(f64, f64),
}

struct Comps {
    index: HashMap<Node, usize>,
    comp: Vec<usize>,
    nodes: Vec<Node>,
    n: usize,
}

fn span(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

impl Frames {
    fn new(cells: Vec<Vec<(usize, f64)>>, adj: Vec<Vec<Transition>>, signs: Vec<i64>, circle: bool) -> Self {
        let ranges = cells.iter().map(|c| span(c.iter().map(|p| p.1))).collect();
        Frames { cells, ranges, adj, signs, circle }
    }

    fn value(&self, cell: usize, v: usize) -> Option<f64> {
        self.cells[cell].iter().find(|p| p.0 == v).map(|p| p.1)
    }

    fn hits(&self, w: Window, s: i64, k: i64, (lo, hi): (f64, f64)) -> bool {
        match w {
            Window::Level(c) => {
                let x = s as f64 * c + k as f64;
                lo - EPS <= x && x <= hi + EPS
            }
            Window::Slab(a, b) => {
                let (l, r) = if s > 0 { (a + k as f64, b + k as f64) } else { (k as f64 - b, k as f64 - a) };
                lo < r - EPS && hi > l + EPS
            }
        }
    }

    fn normalize(&self, w: Window, n: Node) -> Node {
        match w {
            Window::Level(c) if n.s < 0 && (c == 0.0 || (self.circle && (2.0 * c).fract() == 0.0)) => {
                Node { cell: n.cell, s: 1, k: n.k - (2.0 * c) as i64 }
            }
            _ => n,
        }
    }

    fn shifts(&self, w: Window, s: i64, (lo, hi): (f64, f64)) -> Vec<i64> {
        if !self.circle {
            return vec![0];
        }
        let (a, b) = match w {
            Window::Level(c) => (s as f64 * c, s as f64 * c),
            Window::Slab(a, b) => {
                if s > 0 {
                    (a, b)
                } else {
                    (-b, -a)
                }
            }
        };
        ((lo - b).floor() as i64 - 1..=(hi - a).ceil() as i64 + 1).collect()
    }

    fn components(&self, w: Window) -> Comps {
        let mut index = HashMap::new();
        let mut nodes = Vec::new();
        for cell in 0..self.cells.len() {
            let r = self.ranges[cell];
            for &s in &self.signs {
                for k in self.shifts(w, s, r) {
                    if self.hits(w, s, k, r) {
                        let n = self.normalize(w, Node { cell, s, k });
                        index.entry(n).or_insert_with(|| {
                            nodes.push(n);
                            nodes.len() - 1
                        });
                    }
                }
            }
        }
        let mut uf = UnionFind::new(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            for t in &self.adj[n.cell] {
                let fr = span(t.face.iter().map(|&v| self.value(n.cell, v).unwrap()));
                if self.hits(w, n.s, n.k, fr) {
                    let m = self.normalize(w, Node { cell: t.to, s: t.eps * n.s, k: t.eps * n.k + t.m });
                    if let Some(&j) = index.get(&m) {
                        uf.union(i, j);
                    }
                }
            }
        }
        let mut label = HashMap::new();
        let comp: Vec<usize> = (0..nodes.len())
            .map(|i| {
                let r = uf.find(i);
                let next = label.len();
                *label.entry(r).or_insert(next)
            })
            .collect();
        Comps { index, comp, nodes, n: label.len() }
    }
}

fn frames_from_complex(cx: &CellComplex, map: &CircleMap, cochain: &[f64]) -> Frames {
    let mu = map.mu();
    let cells: Vec<Vec<(usize, f64)>> = cx
        .top_cells()
        .iter()
        .map(|t| {
            let u0 = map.values[t[0]];
            let mut f = vec![(t[0], u0)];
            for &v in &t[1..] {
                f.push((v, u0 + mu * cochain[cx.edge_index(t[0], v).unwrap()]));
            }
            f
        })
        .collect();
    let adj = glue(cx, &cells, |_, _, _| 1);
    Frames::new(cells, adj, vec![1], !map.exact)
}

/// Transitions across shared faces; `orient(σ, σ', face)` decides the sign.
fn glue(cx: &CellComplex, cells: &[Vec<(usize, f64)>], orient: impl Fn(usize, usize, &[usize]) -> i64) -> Vec<Vec<Transition>> {
    let tops = cx.top_cells();
    cx.top_adjacency()
        .into_iter()
        .enumerate()
        .map(|(a, nbrs)| {
            nbrs.into_iter()
                .map(|b| {
                    let face: Vec<usize> = tops[a].iter().copied().filter(|v| tops[b].contains(v)).collect();
                    let eps = orient(a, b, &face);
                    let w = face[0];
                    let va = cells[a].iter().find(|p| p.0 == w).unwrap().1;
                    let vb = cells[b].iter().find(|p| p.0 == w).unwrap().1;
                    Transition { to: b, face, eps, m: (vb - eps as f64 * va).round() as i64 }
                })
                .collect()
        })
        .collect()
}

/// Sorts values and merges those within `EPS`; distinct values that close
/// are a collision unless `allow`.
fn cluster(mut vals: Vec<f64>, circle: bool, allow: bool) -> Result<(Vec<f64>, bool), LeafError> {
    vals.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for x in vals {
        match groups.last_mut() {
            Some(g) if x - g.last().unwrap() <= EPS => g.push(x),
            _ => groups.push(vec![x]),
        }
    }
    if circle && groups.len() > 1 && groups[0][0] + 1.0 - groups.last().unwrap().last().unwrap() <= EPS {
        let last = groups.pop().unwrap();
        groups[0].extend(last.into_iter().map(|x| x - 1.0));
    }
    let mut non_generic = false;
    let mut out = Vec::new();
    for g in groups {
        let (lo, hi) = span(g.iter().copied());
        if hi - lo > SAME_LEVEL {
            if !allow {
                return Err(LeafError::CriticalCollision(lo, hi));
            }
            non_generic = true;
        }
        let rep = if g.contains(&0.0) {
            0.0
        } else if g.contains(&0.5) {
            0.5
        } else {
            g.iter().sum::<f64>() / g.len() as f64
        };
        out.push(if circle { rep.rem_euclid(1.0) } else { rep });
    }
    out.sort_by(f64::total_cmp);
    Ok((out, non_generic))
}

/// Consecutive levels `(lower, upper, upper offset)`, wrapping on a circle.
fn slabs(n: usize, circle: bool) -> Vec<(usize, usize, i64)> {
    if circle {
        (0..n).map(|i| (i, (i + 1) % n, if i + 1 == n { 1 } else { 0 })).collect()
    } else {
        (0..n.saturating_sub(1)).map(|i| (i, i + 1, 0)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Mark {
    Component(usize),
    Zero(usize),
}

struct Built {
    graph: LeafGraph,
    levels: Vec<f64>,
    slabs: Vec<(usize, usize, i64)>,
    level_comps: Vec<Comps>,
    slab_comps: Vec<Comps>,
    level_offset: Vec<usize>,
    slab_offset: Vec<usize>,
}

fn build(
    frames: &Frames,
    levels: Vec<f64>,
    wrap: bool,
    marks: &[(usize, Mark)],
    mu: f64,
    exec: Exec,
) -> Result<Built, LeafError> {
    let slabs = slabs(levels.len(), wrap);
    let level_comps = exec.map(levels.len(), |i| frames.components(Window::Level(levels[i])));
    let slab_comps = exec.map(slabs.len(), |j| {
        let (lo, hi, off) = slabs[j];
        frames.components(Window::Slab(levels[lo], levels[hi] + off as f64))
    });
    let mut level_offset = vec![0];
    let mut vertices = Vec::new();
    for (i, c) in level_comps.iter().enumerate() {
        level_offset.push(level_offset[i] + c.n);
        vertices.extend((0..c.n).map(|_| LeafVertex { level: levels[i], components: vec![], zeros: vec![] }));
    }
    let mut edges = Vec::new();
    let mut slab_offset = vec![0];
    for (j, c) in slab_comps.iter().enumerate() {
        slab_offset.push(slab_offset[j] + c.n);
        let (lo, hi, off) = slabs[j];
        let (a, b) = (levels[lo], levels[hi] + off as f64);
        let mut ends = vec![(Vec::new(), Vec::new()); c.n];
        for (i, n) in c.nodes.iter().enumerate() {
            let r = frames.ranges[n.cell];
            for (end, lvl, k, side) in [(a, lo, n.k, 0), (b, hi, n.k + n.s * off, 1)] {
                if frames.hits(Window::Level(end), n.s, n.k, r) {
                    let w = Window::Level(levels[lvl]);
                    let m = frames.normalize(w, Node { cell: n.cell, s: n.s, k });
                    let Some(&x) = level_comps[lvl].index.get(&m) else { continue };
                    let v = level_offset[lvl] + level_comps[lvl].comp[x];
                    let list = if side == 0 { &mut ends[c.comp[i]].0 } else { &mut ends[c.comp[i]].1 };
                    if !list.contains(&v) {
                        list.push(v);
                    }
                }
            }
        }
        for (lower, upper) in ends {
            if lower.len() != 1 || upper.len() != 1 {
                return Err(LeafError::Construction(format!(
                    "slab ({a}, {b}) meets {} lower and {} upper leaves",
                    lower.len(),
                    upper.len()
                )));
            }
            let (x, y) = (lower[0], upper[0]);
            edges.push(LeafEdge { ends: [x.min(y), x.max(y)], length: (b - a) / mu });
        }
    }
    let mut graph = LeafGraph { vertices, edges };
    for &(y, mark) in marks {
        let v = locate(frames, &levels, &level_comps, &level_offset, y)
            .ok_or_else(|| LeafError::Construction(format!("vertex {y} is not on a critical leaf")))?;
        let p = &mut graph.vertices[v];
        match mark {
            Mark::Component(c) if !p.components.contains(&c) => p.components.push(c),
            Mark::Zero(z) if !p.zeros.contains(&z) => p.zeros.push(z),
            _ => {}
        }
    }
    for p in &mut graph.vertices {
        p.components.sort_unstable();
        p.zeros.sort_unstable();
    }
    Ok(Built { graph, levels, slabs, level_comps, slab_comps, level_offset, slab_offset })
}

/// Graph vertex of the critical leaf through domain vertex `y`.
fn locate(frames: &Frames, levels: &[f64], comps: &[Comps], offset: &[usize], y: usize) -> Option<usize> {
    let cell = (0..frames.cells.len()).find(|&c| frames.value(c, y).is_some())?;
    let u = frames.value(cell, y).unwrap();
    for (i, &c) in levels.iter().enumerate() {
        for &s in &frames.signs {
            let k = if frames.circle { (u - s as f64 * c).round() as i64 } else { 0 };
            if (u - (s as f64 * c + k as f64)).abs() <= 1e-7 {
                let n = frames.normalize(Window::Level(c), Node { cell, s, k });
                if let Some(&x) = comps[i].index.get(&n) {
                    return Some(offset[i] + comps[i].comp[x]);
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LeafOptions {
    /// Merge singular leaves closer than `1e-9` instead of failing.
    pub allow_collisions: bool,
    pub exec: Exec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafSpace {
    /// The leaf graph of the two-valued form (the quotient by `τ` on a cover).
    pub graph: LeafGraph,
    /// Leaf graph of `u` before the quotient.
    pub cover_graph: LeafGraph,
    /// Singular values of `u` used as vertex levels.
    pub levels: Vec<f64>,
    pub mu: f64,
    /// Base vertices under the PL-critical vertices of `u` off the branch locus.
    pub critical_base: Vec<usize>,
    pub non_generic: bool,
}

/// The leaf graph of `u` on the domain and, on a cover, its quotient by `τ`.
pub fn leaf_graph(
    domain: LeafDomain,
    map: &CircleMap,
    cochain: &[f64],
    zeros: &ZeroReport,
    opts: LeafOptions,
) -> Result<LeafSpace, LeafError> {
    let cx = domain.complex();
    let circle = !map.exact;
    let branch = domain.branch_component();
    let types = classify_vertices(domain, map, cochain);
    let base = domain.vertex_base();
    let critical: Vec<usize> = (0..cx.n_vertices()).filter(|&y| types[y].is_some_and(|t| t.is_critical())).collect();
    let mut vals: Vec<f64> = (0..cx.n_vertices())
        .filter(|&y| branch[y].is_some() || types[y].is_some_and(|t| t.is_critical()))
        .map(|y| map.values[y])
        .collect();
    if let LeafDomain::Cover(_) = domain {
        vals.push(0.0);
        if circle {
            vals.push(0.5);
        }
    }
    if vals.is_empty() {
        if !circle {
            return Err(LeafError::Construction("u has no critical points".into()));
        }
        vals.push(generic_level(&map.values));
    }
    let (levels, non_generic) = cluster(vals, circle, opts.allow_collisions)?;
    let mut marks: Vec<(usize, Mark)> = (0..cx.n_vertices()).filter_map(|y| branch[y].map(|c| (y, Mark::Component(c)))).collect();
    marks.extend(zeros.zeros.iter().map(|z| (z.vertex, Mark::Zero(z.base_vertex))));
    let frames = frames_from_complex(cx, map, cochain);
    let built = build(&frames, levels, circle, &marks, map.mu(), opts.exec)?;
    let mut cover_graph = built.graph.clone();
    cover_graph.contract();
    let mut graph = match domain {
        LeafDomain::Cover(cover) => quotient(cover, &frames, &built, circle)?,
        LeafDomain::Plain(_) => built.graph.clone(),
    };
    graph.contract();
    let mut critical_base: Vec<usize> = critical.iter().map(|&y| base[y]).collect();
    critical_base.sort_unstable();
    critical_base.dedup();
    Ok(LeafSpace { graph, cover_graph, levels: built.levels, mu: map.mu(), critical_base, non_generic })
}

/// Midpoint of the widest cyclic gap between vertex values.
fn generic_level(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = (v[0] + 1.0 - v[v.len() - 1], v[v.len() - 1]);
    for w in v.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    (best.1 + best.0 / 2.0).rem_euclid(1.0)
}

fn quotient(cover: &BranchedCover, frames: &Frames, b: &Built, circle: bool) -> Result<LeafGraph, LeafError> {
    let dim = cover.complex.dimension();
    let tau_v = &cover.involution[0];
    let tau_t = &cover.involution[dim];
    let shift: Vec<i64> = (0..frames.cells.len())
        .map(|c| {
            let (v, x) = frames.cells[c][0];
            let y = frames.value(tau_t[c], tau_v[v]).unwrap();
            (x + y).round() as i64
        })
        .collect();
    let mirror = |x: f64| if circle { (-x).rem_euclid(1.0) } else { -x };
    let level_of = |x: f64| {
        b.levels
            .iter()
            .position(|&c| super::circle_gap(c, x, !circle) <= 1e-7)
            .ok_or_else(|| LeafError::Construction(format!("level {x} has no mirror")))
    };
    let nv = b.graph.vertices.len();
    let ne = b.graph.edges.len();
    let mut uv = UnionFind::new(nv);
    let mut ue = UnionFind::new(ne);
    for (i, &c) in b.levels.iter().enumerate() {
        let ci = mirror(c);
        let i2 = level_of(ci)?;
        for n in &b.level_comps[i].nodes {
            let k = (-(c + n.k as f64) + shift[n.cell] as f64 - b.levels[i2]).round() as i64;
            let m = frames.normalize(Window::Level(b.levels[i2]), Node { cell: tau_t[n.cell], s: 1, k });
            let x = b.level_comps[i2].index.get(&m).ok_or_else(|| LeafError::Construction("τ leaves a level".into()))?;
            let (from, to) = (b.level_offset[i] + b.level_comps[i].comp[b.level_comps[i].index[n]], b.level_offset[i2] + b.level_comps[i2].comp[*x]);
            uv.union(from, to);
        }
    }
    for (j, &(_, hi, off)) in b.slabs.iter().enumerate() {
        let top = b.levels[hi] + off as f64;
        let lo2 = level_of(mirror(top))?;
        let j2 = b.slabs.iter().position(|s| s.0 == lo2).unwrap();
        if j2 == j {
            return Err(LeafError::Construction("τ fixes a slab".into()));
        }
        let a2 = b.levels[lo2];
        for (i, n) in b.slab_comps[j].nodes.iter().enumerate() {
            let k = (-top - n.k as f64 + shift[n.cell] as f64 - a2).round() as i64;
            let m = Node { cell: tau_t[n.cell], s: 1, k };
            let x = b.slab_comps[j2].index.get(&m).ok_or_else(|| LeafError::Construction("τ leaves a slab".into()))?;
            ue.union(b.slab_offset[j] + b.slab_comps[j].comp[i], b.slab_offset[j2] + b.slab_comps[j2].comp[*x]);
        }
    }
    let mut vmap = HashMap::new();
    let mut vertices: Vec<LeafVertex> = Vec::new();
    for v in 0..nv {
        let r = uv.find(v);
        let p = &b.graph.vertices[v];
        let id = *vmap.entry(r).or_insert_with(|| {
            let level = if circle { p.level.min(1.0 - p.level) } else { p.level.abs() };
            vertices.push(LeafVertex { level, components: vec![], zeros: vec![] });
            vertices.len() - 1
        });
        let q = &mut vertices[id];
        q.components.extend(&p.components);
        q.zeros.extend(&p.zeros);
    }
    for q in &mut vertices {
        q.components.sort_unstable();
        q.components.dedup();
        q.zeros.sort_unstable();
        q.zeros.dedup();
    }
    let mut seen = HashMap::new();
    let mut edges = Vec::new();
    for (e, edge) in b.graph.edges.iter().enumerate() {
        if seen.insert(ue.find(e), ()).is_none() {
            let (x, y) = (vmap[&uv.find(edge.ends[0])], vmap[&uv.find(edge.ends[1])]);
            edges.push(LeafEdge { ends: [x.min(y), x.max(y)], length: edge.length });
        }
    }
    Ok(LeafGraph { vertices, edges })
}

/// `u` on the sheet-0 lift of every base vertex, integrated directly from the
/// base values of a two-valued form and its monodromy.
fn base_potential(cover: &BranchedCover, form: &[f64], mu: f64, circle: bool) -> Vec<f64> {
    let base = &cover.base;
    let z = cover.locus.vertex_mask(base.n_vertices());
    let sheets = |e: usize| {
        let [a, b] = [base.edges()[e][0], base.edges()[e][1]];
        match (z[a], z[b]) {
            (true, _) => (1.0, 1.0),
            (_, true) => (1.0, 1.0),
            _ => (1.0, if cover.cocycle.values[e] == 1 { -1.0 } else { 1.0 }),
        }
    };
    let root = (0..base.n_vertices()).find(|&v| z[v]).unwrap_or(0);
    let adj = base.vertex_edges();
    let mut u = vec![f64::NAN; base.n_vertices()];
    u[root] = 0.0;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &(y, e) in &adj[x] {
            if u[y].is_nan() {
                let (sa, sb) = sheets(e);
                u[y] = if base.edges()[e][0] == x { sb * (sa * u[x] + mu * form[e]) } else { sa * (sb * u[x] - mu * form[e]) };
                queue.push_back(y);
            }
        }
    }
    for (v, x) in u.iter_mut().enumerate() {
        if circle {
            *x = x.rem_euclid(1.0);
        }
        if z[v] {
            *x = if !circle || *x < 0.25 || *x > 0.75 { 0.0 } else { 0.5 };
        }
    }
    u
}

/// The leaf graph built on the base itself, from the two-valued form (values
/// on representative lifts), its monodromy and the given critical and zero
/// base vertices; no cover-side graph is involved.
pub fn leaf_graph_base(
    cover: &BranchedCover,
    form: &[f64],
    map: &CircleMap,
    critical_base: &[usize],
    zero_base: &[usize],
    opts: LeafOptions,
) -> Result<LeafGraph, LeafError> {
    let base = &cover.base;
    let circle = !map.exact;
    let mu = map.mu();
    let comp = cover.locus.vertex_component(base.n_vertices());
    let u0 = base_potential(cover, form, mu, circle);
    let sheet_in = |t: &[usize], v: usize| -> Option<u8> {
        let r0 = *t.iter().find(|&&x| comp[x].is_none())?;
        if comp[v].is_some() {
            None
        } else if v == r0 {
            Some(0)
        } else {
            Some(cover.cocycle.values[base.edge_index(r0, v).unwrap()])
        }
    };
    let cells: Vec<Vec<(usize, f64)>> = base
        .top_cells()
        .iter()
        .map(|t| {
            let r0 = *t.iter().find(|&&x| comp[x].is_none()).expect("top cell off the locus");
            let ur = u0[r0];
            t.iter()
                .map(|&v| {
                    if v == r0 {
                        return (v, ur);
                    }
                    let e = base.edge_index(r0, v).unwrap();
                    let s = if r0 < v { 1.0 } else { -1.0 };
                    (v, ur + s * mu * form[e])
                })
                .collect()
        })
        .collect();
    let tops = base.top_cells();
    let adj = glue(base, &cells, |a, b, face| {
        let w = *face.iter().find(|&&x| comp[x].is_none()).expect("face off the locus");
        if sheet_in(&tops[a], w) == sheet_in(&tops[b], w) {
            1
        } else {
            -1
        }
    });
    let frames = Frames::new(cells, adj, vec![1, -1], circle);
    let fold = |x: f64| if circle { x.min(1.0 - x) } else { x.abs() };
    let mut vals: Vec<f64> = critical_base.iter().chain(zero_base).map(|&v| fold(u0[v])).collect();
    vals.extend((0..base.n_vertices()).filter(|&v| comp[v].is_some()).map(|v| u0[v]));
    vals.push(0.0);
    if circle {
        vals.push(0.5);
    }
    let (levels, _) = cluster(vals, false, opts.allow_collisions)?;
    let mut marks: Vec<(usize, Mark)> = (0..base.n_vertices()).filter_map(|v| comp[v].map(|c| (v, Mark::Component(c)))).collect();
    marks.extend(zero_base.iter().map(|&v| (v, Mark::Zero(v))));
    // levels live in [0, 1/2]: no wrap-around slab
    let built = build(&frames, levels, false, &marks, mu, opts.exec)?;
    let mut g = built.graph;
    g.contract();
    Ok(g)
}

