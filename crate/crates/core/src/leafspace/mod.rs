//! Leaf spaces of rational two-valued forms as finite metric graphs.

mod graph;
mod reeb;
mod zeros;

pub use graph::*;
pub use reeb::*;
pub use zeros::*;

use std::collections::VecDeque;

use num_integer::Integer;
use num_rational::Ratio;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CellComplex;
use crate::cover::BranchedCover;

#[derive(Debug, Error)]
pub enum LeafError {
    #[error("periods {0:?} are not rational with denominator ≤ the cap")]
    NotRational(Vec<f64>),
    #[error("distinct singular leaves at u = {0} and u = {1} are closer than 1e-9")]
    CriticalCollision(f64, f64),
    #[error("zero set is not transverse; unresolved zeros at vertices {0:?}")]
    NotTransverse(Vec<usize>),
    #[error("leaf graph construction failed: {0}")]
    Construction(String),
}

/// Where a circle map lives: a branched cover with its involution, or a plain
/// complex carrying a single-valued form.
#[derive(Debug, Clone, Copy)]
pub enum LeafDomain<'a> {
    Cover(&'a BranchedCover),
    Plain(&'a CellComplex),
}

impl<'a> LeafDomain<'a> {
    pub fn complex(&self) -> &'a CellComplex {
        match self {
            LeafDomain::Cover(c) => &c.complex,
            LeafDomain::Plain(cx) => cx,
        }
    }

    /// Branch component of each domain vertex.
    pub fn branch_component(&self) -> Vec<Option<usize>> {
        match self {
            LeafDomain::Cover(c) => {
                let comp = c.locus.vertex_component(c.base.n_vertices());
                c.vertex_base.iter().map(|&b| comp[b]).collect()
            }
            LeafDomain::Plain(cx) => vec![None; cx.n_vertices()],
        }
    }

    /// Base vertex under each domain vertex.
    pub fn vertex_base(&self) -> Vec<usize> {
        match self {
            LeafDomain::Cover(c) => c.vertex_base.clone(),
            LeafDomain::Plain(cx) => (0..cx.n_vertices()).collect(),
        }
    }

    /// `+1` on sheet 0, `-1` on sheet 1, `0` over Z; `+1` everywhere on a plain complex.
    pub fn sheet_sign(&self) -> Vec<i8> {
        match self {
            LeafDomain::Cover(c) => c
                .vertex_sheet
                .iter()
                .map(|s| match s {
                    None => 0,
                    Some(0) => 1,
                    Some(_) => -1,
                })
                .collect(),
            LeafDomain::Plain(cx) => vec![1; cx.n_vertices()],
        }
    }
}

/// `u` with `du = μ v̂`, valued in `R/Z` (or in `R` when the class is exact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMap {
    /// Per domain vertex, in `[0, 1)` unless `exact`.
    pub values: Vec<f64>,
    pub mu_numer: i64,
    pub mu_denom: i64,
    /// All periods vanish; `u` is real-valued.
    pub exact: bool,
}

impl CircleMap {
    pub fn mu(&self) -> f64 {
        self.mu_numer as f64 / self.mu_denom as f64
    }
}

/// Best rational approximation `p/q` with `q ≤ cap` by continued fractions.
fn rational_approx(x: f64, cap: i64) -> Ratio<i64> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i64;
        let (h2, k2) = (ai.saturating_mul(h1).saturating_add(h0), ai.saturating_mul(k1).saturating_add(k0));
        if k2 > cap || k2 <= 0 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-12 || (h1 as f64 / k1 as f64 - x).abs() < 1e-13 * x.abs().max(1.0) {
            break;
        }
        y = 1.0 / frac;
    }
    Ratio::new(h1, k1)
}

/// The smallest rational `μ > 0` making every period an integer, from
/// rational approximations with denominators at most `cap`.
pub fn rational_scale(periods: &[f64], cap: i64) -> Result<Option<Ratio<i64>>, LeafError> {
    let tol = 1e-6;
    let nonzero: Vec<f64> = periods.iter().copied().filter(|p| p.abs() > tol).collect();
    if nonzero.is_empty() {
        return Ok(None);
    }
    let mut l = 1i64;
    let mut g = 0i64;
    for &p in &nonzero {
        let r = rational_approx(p, cap);
        if (p - *r.numer() as f64 / *r.denom() as f64).abs() > tol * p.abs().max(1.0) {
            return Err(LeafError::NotRational(periods.to_vec()));
        }
        l = l.lcm(r.denom());
        g = g.gcd(r.numer());
    }
    let mu = Ratio::new(l, g);
    for &p in periods {
        let s = p * *mu.numer() as f64 / *mu.denom() as f64;
        if (s - s.round()).abs() > tol * s.abs().max(1.0) {
            return Err(LeafError::NotRational(periods.to_vec()));
        }
    }
    Ok(Some(mu))
}

/// Integrates `μ v̂` from a branch vertex (or vertex 0) along a BFS tree.
pub fn integrate_rational_class(
    domain: LeafDomain,
    cochain: &[f64],
    periods: &[f64],
    denominator_cap: i64,
) -> Result<CircleMap, LeafError> {
    let mu = rational_scale(periods, denominator_cap)?;
    let cx = domain.complex();
    let (num, den, exact) = match mu {
        Some(m) => (*m.numer(), *m.denom(), false),
        None => (1, 1, true),
    };
    let scale = num as f64 / den as f64;
    let branch = domain.branch_component();
    let root = (0..cx.n_vertices()).find(|&v| branch[v].is_some()).unwrap_or(0);
    let adj = cx.vertex_edges();
    let mut u = vec![f64::NAN; cx.n_vertices()];
    u[root] = 0.0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if u[w].is_nan() {
                let s = if cx.edges()[e][0] == v { 1.0 } else { -1.0 };
                u[w] = u[v] + s * scale * cochain[e];
                queue.push_back(w);
            }
        }
    }
    for (v, x) in u.iter_mut().enumerate() {
        if !exact {
            *x = x.rem_euclid(1.0);
            if *x >= 1.0 - 1e-12 {
                *x = 0.0;
            }
        }
        // branch vertices sit on u ∈ {0, 1/2} by anti-equivariance
        if branch[v].is_some() {
            *x = if exact || *x < 0.25 || *x > 0.75 { 0.0 } else { 0.5 };
        }
    }
    Ok(CircleMap { values: u, mu_numer: num, mu_denom: den, exact })
}

/// Circle distance (or plain distance for exact maps).
pub fn circle_gap(a: f64, b: f64, exact: bool) -> f64 {
    if exact {
        (a - b).abs()
    } else {
        let d = (a - b).rem_euclid(1.0);
        d.min(1.0 - d)
    }
}

/// Checks the two `CircleMap` invariants within `tol`.
pub fn check_circle_map(domain: LeafDomain, map: &CircleMap, cochain: &[f64], tol: f64) -> Result<(), String> {
    let cx = domain.complex();
    for (e, ab) in cx.edges().iter().enumerate() {
        let want = map.values[ab[0]] + map.mu() * cochain[e];
        if circle_gap(want, map.values[ab[1]], map.exact) > tol {
            return Err(format!("du ≠ μ v̂ on edge {ab:?}"));
        }
    }
    if let LeafDomain::Cover(c) = domain {
        for (x, &t) in c.involution[0].iter().enumerate() {
            if circle_gap(map.values[t], -map.values[x], map.exact) > tol {
                return Err(format!("u(τx) ≠ −u(x) at vertex {x}"));
            }
        }
    }
    Ok(())
}

/// Shortest edge-path length with weights `|cochain|`; an upper bound for
/// the pseudo-metric `d_v` restricted to edge paths.
pub fn dv_oracle(cx: &CellComplex, cochain: &[f64], x: usize, y: usize) -> f64 {
    if x == y {
        return 0.0;
    }
    let mut g = UnGraph::<(), f64>::with_capacity(cx.n_vertices(), cx.n_cells(1));
    for _ in 0..cx.n_vertices() {
        g.add_node(());
    }
    for (e, ab) in cx.edges().iter().enumerate() {
        g.add_edge(NodeIndex::new(ab[0]), NodeIndex::new(ab[1]), cochain[e].abs());
    }
    let d = dijkstra(&g, NodeIndex::new(x), Some(NodeIndex::new(y)), |e| *e.weight());
    d.get(&NodeIndex::new(y)).copied().unwrap_or(f64::INFINITY)
}
