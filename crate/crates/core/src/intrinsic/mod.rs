//! Transitivity of closed 1-forms as a digraph property, a discrete
//! harmonic-weight feasibility analog of intrinsic harmonicity, and the
//! pruning of a leaf tree down to two branch components.

mod morse;
mod prune;

pub use morse::*;
pub use prune::*;

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CellComplex;
use crate::cover::{BranchedCover, CoverError};
use crate::hodge::{closedness_defect, MetricWeights, WeightKind};
use crate::leafspace::{LeafError, LeafGraph};

#[derive(Debug, Error)]
pub enum IntrinsicError {
    #[error("cochain is not closed (defect {0:.3e})")]
    NotClosed(f64),
    #[error("no pair of boundary leaves with a single branch component and no zeros: {0}")]
    NeedsPerturbation(String),
    #[error("Morse cancellation left critical cells of extreme index: {0:?}")]
    MorseObstruction(Vec<(usize, Vec<usize>)>),
    #[error("invalid input: {0}")]
    InputError(String),
    #[error("pruned form failed: {0}")]
    PruneFailed(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Leaf(#[from] LeafError),
}

/// Arcs are the edges where the cochain exceeds the threshold in absolute
/// value, oriented so that it is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveDigraph {
    pub n_nodes: usize,
    /// `(tail, head, edge)`.
    pub arcs: Vec<(usize, usize, usize)>,
    pub zero_edges: Vec<usize>,
}

impl PositiveDigraph {
    pub fn new(cx: &CellComplex, cochain: &[f64], threshold: f64) -> Self {
        let mut arcs = Vec::new();
        let mut zero_edges = Vec::new();
        for (e, ab) in cx.edges().iter().enumerate() {
            let x = cochain[e];
            if x > threshold {
                arcs.push((ab[0], ab[1], e));
            } else if x < -threshold {
                arcs.push((ab[1], ab[0], e));
            } else {
                zero_edges.push(e);
            }
        }
        PositiveDigraph { n_nodes: cx.n_vertices(), arcs, zero_edges }
    }

    /// From explicit arcs; edge ids are the arc positions.
    pub fn from_arcs(n_nodes: usize, arcs: &[(usize, usize)]) -> Self {
        PositiveDigraph { n_nodes, arcs: arcs.iter().enumerate().map(|(i, &(a, b))| (a, b, i)).collect(), zero_edges: vec![] }
    }

    fn graph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.n_nodes, self.arcs.len());
        for _ in 0..self.n_nodes {
            g.add_node(());
        }
        for &(a, b, _) in &self.arcs {
            g.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
        }
        g
    }

    /// SCC label of every node and the number of SCCs.
    pub fn scc(&self) -> (Vec<usize>, usize) {
        let comps = tarjan_scc(&self.graph());
        let mut label = vec![0; self.n_nodes];
        for (i, c) in comps.iter().enumerate() {
            for v in c {
                label[v.index()] = i;
            }
        }
        (label, comps.len())
    }

    /// Shortest directed path from `a` to `b` as a vertex list.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_nodes];
        for &(x, y, _) in &self.arcs {
            out[x].push(y);
        }
        let mut prev = vec![usize::MAX; self.n_nodes];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if x == b {
                break;
            }
            for &y in &out[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if prev[b] == usize::MAX {
            return None;
        }
        let mut p = vec![b];
        let mut x = b;
        while x != a {
            x = prev[x];
            p.push(x);
        }
        p.reverse();
        Some(p)
    }

    /// A directed cycle through the arc `tail → head`, as a closed vertex list.
    pub fn cycle_through(&self, tail: usize, head: usize) -> Option<Vec<usize>> {
        let mut p = self.path(head, tail)?;
        p.insert(0, tail);
        Some(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub transitive: bool,
    /// Closed vertex lists `[x0, x1, …, x0]`.
    pub witness_cycles: Vec<Vec<usize>>,
    pub failing_arc: Option<(usize, usize)>,
    pub scc_count: usize,
    pub n_arcs: usize,
}

/// Transitive iff every arc lies inside a strongly connected component;
/// witnesses are cycles through up to `samples` evenly spaced arcs.
pub fn transitivity_of(d: &PositiveDigraph, samples: usize) -> TransitivityReport {
    let (label, scc_count) = d.scc();
    let failing = d.arcs.iter().find(|a| label[a.0] != label[a.1]).map(|a| (a.0, a.1));
    let mut witness_cycles = Vec::new();
    if failing.is_none() && !d.arcs.is_empty() {
        let step = (d.arcs.len() / samples.max(1)).max(1);
        for &(a, b, _) in d.arcs.iter().step_by(step).take(samples) {
            witness_cycles.push(d.cycle_through(a, b).expect("arc inside an SCC lies on a cycle"));
        }
    }
    TransitivityReport { transitive: failing.is_none(), witness_cycles, failing_arc: failing, scc_count, n_arcs: d.arcs.len() }
}

/// Builds the positive digraph of a closed cochain and tests transitivity.
pub fn transitivity_check(cx: &CellComplex, cochain: &[f64], threshold: f64) -> Result<TransitivityReport, IntrinsicError> {
    let defect = closedness_defect(cx, cochain);
    if defect > 1e-9 {
        return Err(IntrinsicError::NotClosed(defect));
    }
    Ok(transitivity_of(&PositiveDigraph::new(cx, cochain, threshold), 4))
}

/// Default arc threshold: `1e-9 · median |cochain|`.
pub fn default_threshold(cochain: &[f64]) -> f64 {
    let mut a: Vec<f64> = cochain.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    1e-9 * a.get(a.len() / 2).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeightOutcome {
    Feasible { weights: Vec<f64>, ratio: f64 },
    /// `cut` holds no free vertex and every arc between it and its complement
    /// crosses in the same direction, so no positive balanced flux exists.
    Infeasible { cut: Vec<usize>, crossing_arcs: Vec<usize>, reason: String },
}

/// Positive edge weights `w ∈ [1/κ, κ]` with `Σ w_e v_e = 0` at every vertex
/// outside `free` (zeros may absorb flux). Feasible weights come from a sum of
/// directed cycles covering every arc, so the balance is exact up to round-off.
pub fn harmonic_weights(
    cx: &CellComplex,
    cochain: &[f64],
    threshold: f64,
    free: &[usize],
    tau_edges: Option<&[usize]>,
    kappa: f64,
) -> WeightOutcome {
    let n = cx.n_vertices();
    let mut d = PositiveDigraph::new(cx, cochain, threshold);
    // a hub joined both ways to the free vertices
    let hub = n;
    d.n_nodes = n + 1;
    let real = d.arcs.len();
    for &z in free {
        d.arcs.push((z, hub, usize::MAX));
        d.arcs.push((hub, z, usize::MAX));
    }
    let (label, _) = d.scc();
    if let Some(&(a, b, e)) = d.arcs[..real].iter().find(|a| label[a.0] != label[a.1]) {
        // the nodes reachable from the head; if that takes in the free
        // vertices, the nodes reaching the tail instead
        let closure = |start: usize, forward: bool| {
            let mut seen = vec![false; d.n_nodes];
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(x) = queue.pop_front() {
                for &(p, q, _) in &d.arcs {
                    let (from, to) = if forward { (p, q) } else { (q, p) };
                    if from == x && !seen[to] {
                        seen[to] = true;
                        queue.push_back(to);
                    }
                }
            }
            seen
        };
        let mut seen = closure(b, true);
        if seen[hub] {
            seen = closure(a, false);
        }
        let cut: Vec<usize> = (0..n).filter(|&v| seen[v]).collect();
        let crossing: Vec<usize> = d.arcs[..real].iter().filter(|x| seen[x.0] != seen[x.1]).map(|x| x.2).collect();
        return WeightOutcome::Infeasible {
            cut,
            crossing_arcs: crossing,
            reason: format!("arc {a}→{b} (edge {e}) lies on no positive cycle"),
        };
    }
    // every arc closes into a walk through its component's root along two
    // BFS trees; the walks sum to a positive circulation
    let m = d.arcs.len();
    let mut out = vec![Vec::new(); d.n_nodes];
    let mut inn = vec![Vec::new(); d.n_nodes];
    for (i, &(p, q, _)) in d.arcs.iter().enumerate() {
        out[p].push(i);
        inn[q].push(i);
    }
    let none = usize::MAX;
    let (mut root, mut from_root, mut to_root) = (vec![none; d.n_nodes], vec![none; d.n_nodes], vec![none; d.n_nodes]);
    for r in 0..d.n_nodes {
        if root[r] != none {
            continue;
        }
        root[r] = r;
        let mut queue = VecDeque::from([r]);
        while let Some(x) = queue.pop_front() {
            for &i in &out[x] {
                let y = d.arcs[i].1;
                if root[y] == none {
                    root[y] = r;
                    from_root[y] = i;
                    queue.push_back(y);
                }
            }
        }
        let mut queue = VecDeque::from([r]);
        while let Some(x) = queue.pop_front() {
            for &i in &inn[x] {
                let y = d.arcs[i].0;
                if y != r && to_root[y] == none && root[y] == r {
                    to_root[y] = i;
                    queue.push_back(y);
                }
            }
        }
    }
    let mut count = vec![0.0; m];
    for i in 0..real {
        let (a, b, _) = d.arcs[i];
        count[i] += 1.0;
        let mut x = b;
        while x != root[x] {
            count[to_root[x]] += 1.0;
            x = d.arcs[to_root[x]].1;
        }
        let mut x = a;
        while x != root[x] {
            count[from_root[x]] += 1.0;
            x = d.arcs[from_root[x]].0;
        }
    }
    let mut flux = vec![0.0; cx.n_cells(1)];
    for i in 0..real {
        flux[d.arcs[i].2] += count[i];
    }
    if let Some(t) = tau_edges {
        let f = flux.clone();
        for (e, x) in flux.iter_mut().enumerate() {
            *x = 0.5 * (f[e] + f[t[e]]);
        }
    }
    let mut w: Vec<f64> = (0..cx.n_cells(1)).map(|e| if flux[e] > 0.0 { flux[e] / cochain[e].abs() } else { f64::NAN }).collect();
    let (lo, hi) = w.iter().filter(|x| x.is_finite()).fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if !lo.is_finite() {
        return WeightOutcome::Feasible { weights: vec![1.0; cx.n_cells(1)], ratio: 1.0 };
    }
    let scale = 1.0 / (lo * hi).sqrt();
    for x in w.iter_mut() {
        *x = if x.is_finite() { *x * scale } else { 1.0 };
    }
    let ratio = hi / lo;
    if ratio > kappa * kappa {
        return WeightOutcome::Infeasible {
            cut: vec![],
            crossing_arcs: vec![],
            reason: format!("cycle-cover weights span a ratio {ratio:.3e} beyond κ² = {:.3e}", kappa * kappa),
        };
    }
    WeightOutcome::Feasible { weights: w, ratio }
}

/// [`harmonic_weights`] on a cover: τ-invariant, with the zeros free.
pub fn find_harmonic_weights(
    cover: &BranchedCover,
    cochain: &[f64],
    zeros: &[usize],
    kappa: f64,
) -> Result<(WeightOutcome, Option<MetricWeights>), IntrinsicError> {
    let cx = &cover.complex;
    let defect = closedness_defect(cx, cochain);
    if defect > 1e-9 {
        return Err(IntrinsicError::NotClosed(defect));
    }
    let out = harmonic_weights(cx, cochain, default_threshold(cochain), zeros, Some(&cover.involution[1]), kappa);
    let weights = match &out {
        WeightOutcome::Feasible { weights, .. } => {
            let mut m = MetricWeights::uniform(cx);
            m.edge = weights.clone();
            m.kind = WeightKind::Custom;
            Some(m)
        }
        WeightOutcome::Infeasible { .. } => None,
    };
    Ok((out, weights))
}

/// Two boundary vertices holding exactly one branch component and no zeros,
/// smallest component labels first.
pub fn select_boundary_pair(g: &LeafGraph) -> Result<(usize, usize), IntrinsicError> {
    let mut ok: Vec<(usize, usize)> = g
        .boundary_vertices()
        .into_iter()
        .filter(|&v| g.vertices[v].components.len() == 1 && g.vertices[v].zeros.is_empty())
        .map(|v| (g.vertices[v].components[0], v))
        .collect();
    ok.sort_unstable();
    match ok.as_slice() {
        [a, b, ..] => Ok((a.1, b.1)),
        _ => Err(IntrinsicError::NeedsPerturbation(format!("{} qualifying boundary vertices", ok.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leafspace::{LeafEdge, LeafVertex};

    #[test]
    fn cycle_graph_is_transitive() {
        let d = PositiveDigraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let r = transitivity_of(&d, 2);
        assert!(r.transitive);
        assert_eq!(r.scc_count, 1);
        assert_eq!(r.witness_cycles[0], vec![0, 1, 2, 3, 0]);
    }

    #[test]
    fn exact_form_on_a_tree_is_not_transitive() {
        let cx = crate::complex::icosahedron();
        let f: Vec<f64> = (0..12).map(|v| v as f64).collect();
        let r = transitivity_check(&cx, &cx.coboundary0(&f), 0.0).unwrap();
        assert!(!r.transitive);
        assert!(r.failing_arc.is_some());
        let out = harmonic_weights(&cx, &cx.coboundary0(&f), 0.0, &[], None, 1e6);
        let WeightOutcome::Infeasible { cut, crossing_arcs, .. } = out else { panic!() };
        assert!(!cut.is_empty() && !crossing_arcs.is_empty());
    }

    #[test]
    fn boundary_pairs() {
        let v = |c: Vec<usize>, z: Vec<usize>| LeafVertex { level: 0.0, components: c, zeros: z };
        let e = |a, b| LeafEdge { ends: [a, b], length: 1.0 };
        let star = LeafGraph {
            vertices: vec![v(vec![2], vec![]), v(vec![], vec![]), v(vec![0], vec![]), v(vec![1], vec![])],
            edges: vec![e(0, 1), e(1, 2), e(1, 3)],
        };
        assert_eq!(select_boundary_pair(&star).unwrap(), (2, 3));
        let bad = LeafGraph { vertices: vec![v(vec![0], vec![5]), v(vec![1], vec![])], edges: vec![e(0, 1)] };
        assert!(matches!(select_boundary_pair(&bad), Err(IntrinsicError::NeedsPerturbation(_))));
    }
}
