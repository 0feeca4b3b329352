use std::collections::VecDeque;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{default_threshold, discrete_morse_cobordism, dirichlet_harmonic, transitivity_of};
use super::{IntrinsicError, MorseCertificate, PositiveDigraph, TransitivityReport};
use crate::cover::{BranchedCover, MonodromyCocycle, SingularLocus};
use crate::hodge::{closedness_defect, periods};
use crate::leafspace::{check_tree, detect_zeros, integrate_rational_class, leaf_graph, CircleMap, LeafDomain};
use crate::leafspace::{LeafGraph, LeafOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PruneResult {
    /// The two retained branch components, in their original order.
    pub kept: [usize; 2],
    pub new_locus: SingularLocus,
    pub new_cocycle: MonodromyCocycle,
    /// Values on representative lifts of the new cover.
    pub new_form: Vec<f64>,
    /// Top cells of the two retained collars.
    pub collars: [Vec<usize>; 2],
    /// Top cells of the cobordism between the collars.
    pub cobordism: Vec<usize>,
    /// Offset between the two boundary potentials of the cobordism.
    pub shift: f64,
    /// Absent when nothing was cut.
    pub morse_certificate: Option<MorseCertificate>,
    pub leaf_graph: LeafGraph,
    pub mu: f64,
    pub transitivity: TransitivityReport,
    /// Closed positive walk on the new cover through both collars.
    pub collar_witness: Vec<usize>,
    pub new_cover_betti1: usize,
    pub closedness_defect: f64,
}

/// A tree with exactly two boundary vertices.
pub fn is_interval(g: &LeafGraph) -> bool {
    check_tree(g) && g.boundary_vertices().len() == 2
}

fn fail(msg: impl Into<String>) -> IntrinsicError {
    IntrinsicError::PruneFailed(msg.into())
}

/// Replaces the form away from the collars of two boundary leaves by the
/// differential of a harmonic function on the cobordism between them, and
/// drops every other branch component.
///
/// `map` is the circle-valued primitive on `cover.complex` from which `graph`
/// (the leaf graph on the base) was built; `pair` are two of its boundary
/// vertices.
pub fn prune(
    cover: &BranchedCover,
    form: &[f64],
    map: &CircleMap,
    graph: &LeafGraph,
    pair: (usize, usize),
) -> Result<PruneResult, IntrinsicError> {
    if !check_tree(graph) {
        return Err(fail("leaf graph is not a tree"));
    }
    let base = &cover.base;
    let nb = base.n_vertices();
    let mu = map.mu();
    let comps = cover.locus.vertex_component(nb);
    let ends = [pair.0, pair.1];
    let mut kept = [0; 2];
    for (i, &g) in ends.iter().enumerate() {
        let v = &graph.vertices[g];
        if graph.degree(g) != 1 || v.components.len() != 1 || !v.zeros.is_empty() {
            return Err(fail(format!("leaf vertex {g} is not a clean boundary vertex")));
        }
        kept[i] = v.components[0];
    }
    if kept[0] == kept[1] {
        return Err(fail("both ends hold the same component"));
    }
    let (ends, kept) = if kept[0] < kept[1] { (ends, kept) } else { ([ends[1], ends[0]], [kept[1], kept[0]]) };
    if cover.locus.n_components() == 2 && is_interval(graph) {
        // nothing to cut: the input already has the requested shape
        let anchor = |i: usize| cover.lifts[0][(0..nb).find(|&v| comps[v] == Some(kept[i])).unwrap()][0];
        let a = assess(cover, form, [anchor(0), anchor(1)])?;
        return Ok(PruneResult {
            kept,
            new_locus: cover.locus.clone(),
            new_cocycle: cover.cocycle.clone(),
            new_form: form.to_vec(),
            collars: [Vec::new(), Vec::new()],
            cobordism: Vec::new(),
            shift: 0.0,
            morse_certificate: None,
            leaf_graph: a.graph,
            mu: a.mu,
            transitivity: a.transitivity,
            collar_witness: a.witness,
            new_cover_betti1: a.betti1,
            closedness_defect: a.defect,
        });
    }

    let ubar: Vec<f64> = (0..nb)
        .map(|x| {
            let u = map.values[cover.lifts[0][x][0]];
            if map.exact {
                u.abs()
            } else {
                let f = u.rem_euclid(1.0);
                f.min(1.0 - f)
            }
        })
        .collect();

    // collars: the slab of whole cells below the first critical level along
    // each end's leaf edge, shrunk by one ring; it must keep the closed star
    let tops = base.top_cells();
    let adj = base.top_adjacency();
    let stars = base.vertex_stars();
    let mut in_collar = vec![None::<usize>; tops.len()];
    for i in 0..2 {
        let g = ends[i];
        let level = graph.vertices[g].level;
        let edge = graph.edges.iter().find(|e| e.ends.contains(&g)).expect("boundary vertex has an edge");
        let reach = edge.length * mu - 1e-9;
        let slab: Vec<bool> = tops.iter().map(|t| t.iter().all(|&v| (ubar[v] - level).abs() < reach)).collect();
        let mut rim = vec![false; nb];
        for (t, c) in tops.iter().enumerate() {
            if !slab[t] {
                for &v in c {
                    rim[v] = true;
                }
            }
        }
        let ok: Vec<bool> = (0..tops.len()).map(|t| slab[t] && tops[t].iter().all(|&v| !rim[v])).collect();
        let seeds: Vec<usize> = (0..nb).filter(|&v| comps[v] == Some(kept[i])).flat_map(|v| stars[v].clone()).collect();
        if seeds.iter().any(|&t| !ok[t]) {
            return Err(fail(format!("collar of {} is thinner than one cell ring", SingularLocus::label(kept[i]))));
        }
        let mut uf = UnionFind::new(tops.len());
        for (t, nbrs) in adj.iter().enumerate() {
            for &s in nbrs {
                if ok[t] && ok[s] {
                    uf.union(t, s);
                }
            }
        }
        let root = uf.find(seeds[0]);
        for t in 0..tops.len() {
            if ok[t] && uf.find(t) == root {
                if in_collar[t].is_some() {
                    return Err(fail("collars overlap"));
                }
                in_collar[t] = Some(i);
            }
        }
    }
    let collars: [Vec<usize>; 2] = [0, 1].map(|i| (0..tops.len()).filter(|&t| in_collar[t] == Some(i)).collect());
    let cobordism: Vec<usize> = (0..tops.len()).filter(|&t| in_collar[t].is_none()).collect();
    if cobordism.is_empty() {
        return Err(fail("collars cover the whole complex"));
    }

    // interface vertices lie on both a collar cell and a cobordism cell
    let mut side = vec![None::<usize>; nb];
    let mut in_w = vec![false; nb];
    for &t in &cobordism {
        for &v in &tops[t] {
            in_w[v] = true;
        }
    }
    let mut owner = vec![None::<usize>; nb];
    for i in 0..2 {
        for &t in &collars[i] {
            for &v in &tops[t] {
                if owner[v].is_some_and(|o| o != i) {
                    return Err(fail("collars touch"));
                }
                owner[v] = Some(i);
                if in_w[v] {
                    side[v] = Some(i);
                }
                if let Some(c) = comps[v] {
                    if c != kept[i] {
                        return Err(fail(format!("collar of {} meets {}", SingularLocus::label(kept[i]), SingularLocus::label(c))));
                    }
                }
            }
        }
    }
    for v in 0..nb {
        if in_w[v] && side[v].is_none() && comps[v].is_some_and(|c| kept.contains(&c)) {
            return Err(fail("a retained component touches the cobordism"));
        }
    }

    let d = base.dimension();
    let mut edge_collar = vec![None::<usize>; base.n_cells(1)];
    for i in 0..2 {
        for &t in &collars[i] {
            for a in 0..=d {
                for b in a + 1..=d {
                    edge_collar[base.edge_index(tops[t][a], tops[t][b]).unwrap()] = Some(i);
                }
            }
        }
    }
    let collar_edge: Vec<bool> = edge_collar.iter().map(Option::is_some).collect();
    let mut edge_in_w = vec![false; base.n_cells(1)];
    for &t in &cobordism {
        for a in 0..=d {
            for b in a + 1..=d {
                edge_in_w[base.edge_index(tops[t][a], tops[t][b]).unwrap()] = true;
            }
        }
    }

    // real potential of the lifted form on each collar, anchored on its branch component
    let lifted = cover.lift_form(form);
    let cx = &cover.complex;
    let mut pot = vec![f64::NAN; cx.n_vertices()];
    let cadj = cx.vertex_edges();
    for i in 0..2 {
        let root = cover.lifts[0][(0..nb).find(|&v| comps[v] == Some(kept[i])).unwrap()][0];
        pot[root] = graph.vertices[ends[i]].level / mu;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &cadj[x] {
                if edge_collar[cover.projection[1][e]] != Some(i) {
                    continue;
                }
                let s = if cx.edges()[e][0] == x { 1.0 } else { -1.0 };
                let val = pot[x] + s * lifted[e];
                if pot[y].is_nan() {
                    pot[y] = val;
                    queue.push_back(y);
                } else if (pot[y] - val).abs() > 1e-9 {
                    return Err(fail(format!("form has a period inside the collar of {}", SingularLocus::label(kept[i]))));
                }
            }
        }
    }

    // sheet over each interface vertex: a consistent lift of every interface
    // component, seeded above the bottom level and below the top one
    let mut g = vec![0u8; nb];
    let mut boundary: Vec<Option<f64>> = vec![None; nb];
    let levels = [0, 1].map(|i| graph.vertices[ends[i]].level / mu);
    let badj = base.vertex_edges();
    let mut seen = vec![false; nb];
    let mut order: Vec<usize> = (0..nb).filter(|&v| side[v].is_some()).collect();
    let offset = |v: usize| {
        let i = side[v].unwrap();
        pot[cover.lifts[0][v][0]] - levels[i]
    };
    order.sort_by(|&a, &b| offset(b).abs().total_cmp(&offset(a).abs()).then(a.cmp(&b)));
    for seed in order {
        if seen[seed] {
            continue;
        }
        let i = side[seed].unwrap();
        let off = offset(seed);
        if off.is_nan() || off.abs() < 1e-12 {
            return Err(fail(format!("interface vertex {seed} sits on a singular level")));
        }
        g[seed] = if (off > 0.0) == (i == 0) { 0 } else { 1 };
        seen[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &badj[x] {
                if side[y] != Some(i) || edge_collar[e] != Some(i) || !edge_in_w[e] {
                    continue;
                }
                let want = g[x] ^ cover.cocycle.values[e];
                if !seen[y] {
                    seen[y] = true;
                    g[y] = want;
                    queue.push_back(y);
                } else if g[y] != want {
                    return Err(fail(format!("interface of {} has a connected double cover", SingularLocus::label(kept[i]))));
                }
            }
        }
    }
    for v in 0..nb {
        if side[v].is_some() {
            boundary[v] = Some(pot[cover.lifts[0][v][g[v] as usize]]);
        }
    }
    let lo_max = (0..nb).filter(|&v| side[v] == Some(0)).map(|v| boundary[v].unwrap()).fold(f64::NEG_INFINITY, f64::max);
    let hi_min = (0..nb).filter(|&v| side[v] == Some(1)).map(|v| boundary[v].unwrap()).fold(f64::INFINITY, f64::min);
    if !lo_max.is_finite() || !hi_min.is_finite() {
        return Err(fail("a collar has no interface with the cobordism"));
    }
    // the loop through both collars has period 2 s + 2 (level₂ − level₁), so s
    // is a multiple of 1/(2μ) to keep the periods rational
    let unit = 0.5 / mu;
    let shift = ((lo_max - hi_min + 1.0 / mu) / unit).ceil() * unit;
    for v in 0..nb {
        if side[v] == Some(1) {
            boundary[v] = boundary[v].map(|x| x + shift);
        }
    }

    let mut cocycle = cover.cocycle.values.clone();
    let mut w_edges = Vec::new();
    for (e, ab) in base.edges().iter().enumerate() {
        if !collar_edge[e] {
            cocycle[e] = g[ab[0]] ^ g[ab[1]];
            w_edges.push([ab[0], ab[1]]);
        }
    }
    let new_locus = SingularLocus {
        dimension: cover.locus.dimension,
        components: kept.iter().map(|&k| cover.locus.components[k].clone()).collect(),
    };
    let new_cocycle = MonodromyCocycle { values: cocycle };
    new_cocycle.validate(base, &new_locus).map_err(|e| fail(format!("new monodromy: {e}")))?;

    let f0 = dirichlet_harmonic(nb, &w_edges, &boundary, 1e-13);
    let mut new_form = form.to_vec();
    for (e, ab) in base.edges().iter().enumerate() {
        if !collar_edge[e] {
            let s = if g[ab[0]] == 0 { 1.0 } else { -1.0 };
            new_form[e] = s * (f0[ab[1]] - f0[ab[0]]);
        }
    }

    let bottom: Vec<bool> = (0..nb).map(|v| side[v] == Some(0)).collect();
    let morse_certificate = discrete_morse_cobordism(base, &cobordism, &f0, &bottom)?;

    let new_cover = BranchedCover::new(base, &new_locus, &new_cocycle)?;
    let pick = |i: usize| {
        let v = (0..nb).find(|&v| side[v] == Some(i)).unwrap();
        new_cover.lifts[0][v][g[v] as usize]
    };
    let a = assess(&new_cover, &new_form, [pick(0), pick(1)])?;

    Ok(PruneResult {
        kept,
        new_locus,
        new_cocycle,
        new_form,
        collars,
        cobordism,
        shift,
        morse_certificate: Some(morse_certificate),
        leaf_graph: a.graph,
        mu: a.mu,
        transitivity: a.transitivity,
        collar_witness: a.witness,
        new_cover_betti1: a.betti1,
        closedness_defect: a.defect,
    })
}

struct Assessment {
    graph: LeafGraph,
    mu: f64,
    transitivity: TransitivityReport,
    witness: Vec<usize>,
    betti1: usize,
    defect: f64,
}

/// Leaf graph, transitivity and a positive walk `a → b → a` for a form on a
/// cover, given by its values on representative lifts.
fn assess(cover: &BranchedCover, form: &[f64], [a, b]: [usize; 2]) -> Result<Assessment, IntrinsicError> {
    let x = cover.lift_form(form);
    let defect = closedness_defect(&cover.complex, &x);
    if defect > 1e-9 {
        return Err(fail(format!("pruned form is not closed (defect {defect:.3e})")));
    }
    let basis = cover.complex.cocycle_basis().map_err(|e| fail(e.to_string()))?;
    let p = periods(&cover.complex, &x, &basis.cycles).map_err(|e| fail(e.to_string()))?;
    let dom = LeafDomain::Cover(cover);
    let map = integrate_rational_class(dom, &x, &p, 64)?;
    let zeros = detect_zeros(dom, &map, &x, 1e-3);
    let space = leaf_graph(dom, &map, &x, &zeros, LeafOptions::default())?;
    let digraph = PositiveDigraph::new(&cover.complex, &x, default_threshold(&x));
    let witness = match (digraph.path(a, b), digraph.path(b, a)) {
        (Some(mut there), Some(back)) => {
            there.extend_from_slice(&back[1..]);
            there
        }
        _ => Vec::new(),
    };
    Ok(Assessment {
        graph: space.graph,
        mu: space.mu,
        transitivity: transitivity_of(&digraph, 4),
        witness,
        betti1: basis.cycles.len(),
        defect,
    })
}
