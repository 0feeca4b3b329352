//! Weighted discrete Hodge theory for 1-cochains on a branched cover.
//!
//! The inner product on 1-cochains is diagonal with edge weights `w`; the
//! codifferential at a vertex `x` is `div_x(v) = Σ_{e ∋ x} ±w_e v_e` (plus
//! when `x` is the head of `e`). The residual of a cochain is
//! `sqrt(Σ_x div_x² / m_x)` with vertex weights `m`, so scaling every edge
//! weight by `s` scales the residual by `s` and its square by `s²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CellComplex;
use crate::cover::BranchedCover;
use crate::par::Exec;

#[derive(Debug, Error)]
pub enum HodgeError {
    #[error("solver did not converge in {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("cochain is not closed (max |dσ| = {0:e})")]
    NotClosed(f64),
    #[error("cochain is not anti-invariant")]
    NotAntiInvariant,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("class has {got} coefficients but the basis has {want} elements")]
    ClassSize { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Uniform,
    Cotan,
    /// Cotangent weights were requested but some were non-positive.
    CotanFallbackUniform,
    Custom,
}

/// Diagonal inner products on 1- and 0-cochains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricWeights {
    pub edge: Vec<f64>,
    pub vertex: Vec<f64>,
    pub kind: WeightKind,
}

impl MetricWeights {
    pub fn uniform(cx: &CellComplex) -> Self {
        MetricWeights { edge: vec![1.0; cx.n_cells(1)], vertex: vec![1.0; cx.n_vertices()], kind: WeightKind::Uniform }
    }

    /// Cotangent weights in dimension 2 and dual-volume weights in dimension
    /// 3, computed from per-edge displacement vectors (`e[0]` to `e[1]`) in a
    /// flat chart of each top cell. Falls back to uniform weights when any
    /// weight is non-positive.
    pub fn cotan(cx: &CellComplex, displacement: &[Vec<f64>]) -> Self {
        let d = cx.dimension();
        let mut edge = vec![0.0; cx.n_cells(1)];
        let mut vertex = vec![0.0; cx.n_vertices()];
        for t in cx.top_cells() {
            // local positions with t[0] at the origin
            let pos: Vec<Vec<f64>> = t
                .iter()
                .map(|&v| if v == t[0] { vec![0.0; displacement[0].len()] } else { displacement[cx.edge_index(t[0], v).unwrap()].clone() })
                .collect();
            let vol = simplex_volume(&pos);
            for &v in t {
                vertex[v] += vol / (d + 1) as f64;
            }
            for i in 0..=d {
                for j in i + 1..=d {
                    let e = cx.edge_index(t[i], t[j]).unwrap();
                    let others: Vec<usize> = (0..=d).filter(|&k| k != i && k != j).collect();
                    edge[e] += if d == 2 {
                        let k = others[0];
                        0.5 * cot(&sub(&pos[i], &pos[k]), &sub(&pos[j], &pos[k]))
                    } else {
                        let (c, dd) = (others[0], others[1]);
                        let axis = sub(&pos[dd], &pos[c]);
                        let n1 = cross(&axis, &sub(&pos[i], &pos[c]));
                        let n2 = cross(&axis, &sub(&pos[j], &pos[c]));
                        norm(&axis) * cot3(&n1, &n2) / 6.0
                    };
                }
            }
        }
        if edge.iter().any(|&w| !(w > 0.0)) || vertex.iter().any(|&m| !(m > 0.0)) {
            let mut u = Self::uniform(cx);
            u.kind = WeightKind::CotanFallbackUniform;
            return u;
        }
        MetricWeights { edge, vertex, kind: WeightKind::Cotan }
    }

    pub fn validate(&self, cx: &CellComplex) -> Result<(), HodgeError> {
        if self.edge.len() != cx.n_cells(1) || self.vertex.len() != cx.n_vertices() {
            return Err(HodgeError::InvalidWeights("size mismatch".into()));
        }
        if self.edge.iter().chain(&self.vertex).any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(HodgeError::InvalidWeights("weights must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn validate_invariant(&self, cover: &BranchedCover) -> Result<(), HodgeError> {
        self.validate(&cover.complex)?;
        let tau = &cover.involution;
        if (0..self.edge.len()).any(|e| self.edge[tau[1][e]] != self.edge[e])
            || (0..self.vertex.len()).any(|v| self.vertex[tau[0][v]] != self.vertex[v])
        {
            return Err(HodgeError::InvalidWeights("weights are not τ-invariant".into()));
        }
        Ok(())
    }

    pub fn scale_edges(&self, s: f64) -> Self {
        MetricWeights { edge: self.edge.iter().map(|w| w * s).collect(), vertex: self.vertex.clone(), kind: self.kind }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Cotangent of the angle between two plane vectors.
fn cot(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (a[0] * b[1] - a[1] * b[0]).abs()
}

fn cot3(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / norm(&cross(a, b))
}

fn simplex_volume(pos: &[Vec<f64>]) -> f64 {
    let v: Vec<Vec<f64>> = pos[1..].iter().map(|p| sub(p, &pos[0])).collect();
    match v.len() {
        2 => 0.5 * (v[0][0] * v[1][1] - v[0][1] * v[1][0]).abs(),
        3 => dot(&v[0], &cross(&v[1], &v[2])).abs() / 6.0,
        _ => unreachable!("dimension 2 or 3"),
    }
}

/// `d*W v`: weighted divergence at each vertex.
pub fn divergence(cx: &CellComplex, cochain: &[f64], weights: &MetricWeights) -> Vec<f64> {
    let mut div = vec![0.0; cx.n_vertices()];
    for (e, ab) in cx.edges().iter().enumerate() {
        let f = weights.edge[e] * cochain[e];
        div[ab[1]] += f;
        div[ab[0]] -= f;
    }
    div
}

/// Weighted codifferential norm `sqrt(Σ_x div_x² / m_x)`.
pub fn residual(cx: &CellComplex, cochain: &[f64], weights: &MetricWeights) -> f64 {
    divergence(cx, cochain, weights).iter().zip(&weights.vertex).map(|(d, m)| d * d / m).sum::<f64>().sqrt()
}

pub fn energy(cochain: &[f64], weights: &MetricWeights) -> f64 {
    cochain.iter().zip(&weights.edge).map(|(v, w)| w * v * v).sum()
}

/// `(σ − τ*σ) / 2` for an edge involution `tau`.
pub fn antiinvariant_project(cochain: &[f64], tau: &[usize]) -> Vec<f64> {
    (0..cochain.len()).map(|e| (cochain[e] - cochain[tau[e]]) / 2.0).collect()
}

/// Largest coboundary entry, scaled by the cochain's magnitude.
pub fn closedness_defect(cx: &CellComplex, cochain: &[f64]) -> f64 {
    let scale = cochain.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    cx.coboundary1(cochain).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

/// Signed sums over integer 1-cycles; rejects cochains that are not closed.
pub fn periods(cx: &CellComplex, cochain: &[f64], cycles: &[Vec<(usize, i64)>]) -> Result<Vec<f64>, HodgeError> {
    let defect = closedness_defect(cx, cochain);
    if defect > 1e-9 {
        return Err(HodgeError::NotClosed(defect));
    }
    Ok(cycles.iter().map(|c| c.iter().map(|&(e, s)| s as f64 * cochain[e]).sum()).collect())
}

#[derive(Debug, Clone)]
pub enum InitialGuess {
    Zero,
    /// Uniform random potential in `[-1, 1]` from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Target for the weighted codifferential norm.
    pub tol: f64,
    /// Iteration cap as a multiple of the vertex count.
    pub max_iter_factor: usize,
    pub initial: InitialGuess,
    pub exec: Exec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter_factor: 10, initial: InitialGuess::Zero, exec: Exec::default() }
    }
}

/// Harmonic anti-invariant 1-form on a cover.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicForm {
    pub cochain: Vec<f64>,
    pub residual: f64,
    /// Periods on the cover's fundamental-cycle basis.
    pub periods: Vec<f64>,
    /// Coefficients of the class in the anti-invariant basis it came from.
    pub class_id: Vec<f64>,
    pub iterations: usize,
    pub weights: WeightKind,
}

/// Potentials solved for: each vertex is pinned (`None`) or tied to an
/// unknown with a sign.
struct Reduction {
    var: Vec<Option<(usize, f64)>>,
    members: Vec<Vec<(usize, f64)>>,
}

impl Reduction {
    /// Anti-invariant potentials: zero over Z, opposite on the two sheets.
    fn antiinvariant(cover: &BranchedCover) -> Self {
        let n = cover.complex.n_vertices();
        let mut var = vec![None; n];
        let mut members = Vec::new();
        for x in 0..n {
            if cover.vertex_sheet[x] == Some(0) {
                let y = cover.involution[0][x];
                var[x] = Some((members.len(), 1.0));
                var[y] = Some((members.len(), -1.0));
                members.push(vec![(x, 1.0), (y, -1.0)]);
            }
        }
        Reduction { var, members }
    }

    /// Single-valued potentials with the lowest vertex of each component pinned.
    fn plain(cx: &CellComplex) -> Self {
        let n = cx.n_vertices();
        let adj = cx.vertex_edges();
        let mut var = vec![None; n];
        let mut members = Vec::new();
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                if v != root {
                    var[v] = Some((members.len(), 1.0));
                    members.push(vec![(v, 1.0)]);
                }
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        Reduction { var, members }
    }

    fn expand(&self, y: &[f64]) -> Vec<f64> {
        self.var.iter().map(|v| v.map_or(0.0, |(k, s)| s * y[k])).collect()
    }
}

struct Operator<'a> {
    adj: Vec<Vec<(usize, usize, f64)>>,
    red: &'a Reduction,
    exec: Exec,
}

impl Operator<'_> {
    /// `P^T L P y`.
    fn apply(&self, y: &[f64], out: &mut [f64]) {
        let phi = self.red.expand(y);
        let mut g = vec![0.0; phi.len()];
        self.exec.fill(&mut g, |x| self.adj[x].iter().map(|&(o, _, w)| w * (phi[x] - phi[o])).sum());
        self.exec.fill(out, |k| self.red.members[k].iter().map(|&(x, s)| s * g[x]).sum());
    }
}

/// Minimizes the weighted energy of `rep + dφ` over potentials allowed by the
/// reduction with Jacobi-preconditioned conjugate gradients.
fn solve(
    cx: &CellComplex,
    red: &Reduction,
    weights: &MetricWeights,
    rep: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64), HodgeError> {
    let n = red.members.len();
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); cx.n_vertices()];
    for (e, ab) in cx.edges().iter().enumerate() {
        adj[ab[0]].push((ab[1], e, weights.edge[e]));
        adj[ab[1]].push((ab[0], e, weights.edge[e]));
    }
    let mut diag = vec![0.0; n];
    for (e, ab) in cx.edges().iter().enumerate() {
        let coef = |x: usize, k: usize| red.var[x].filter(|v| v.0 == k).map_or(0.0, |v| v.1);
        for k in [red.var[ab[0]], red.var[ab[1]]].into_iter().flatten().map(|v| v.0).collect::<std::collections::BTreeSet<_>>() {
            let c = coef(ab[1], k) - coef(ab[0], k);
            diag[k] += weights.edge[e] * c * c;
        }
    }
    let op = Operator { adj, red, exec: opts.exec };
    let div0 = divergence(cx, rep, weights);
    let b: Vec<f64> = red.members.iter().map(|m| -m.iter().map(|&(x, s)| s * div0[x]).sum::<f64>()).collect();
    let mut y = match opts.initial {
        InitialGuess::Zero => vec![0.0; n],
        InitialGuess::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    };
    let cap = opts.max_iter_factor * cx.n_vertices().max(1);
    let form = |y: &[f64]| -> Vec<f64> {
        let dphi = cx.coboundary0(&red.expand(y));
        rep.iter().zip(dphi).map(|(r, d)| r + d).collect()
    };
    let mut iterations = 0;
    let mut ay = vec![0.0; n];
    loop {
        // (re)start from the current iterate with the true residual
        op.apply(&y, &mut ay);
        let mut r: Vec<f64> = b.iter().zip(&ay).map(|(b, a)| b - a).collect();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = opts.exec.dot(&r, &z);
        let mut ap = vec![0.0; n];
        let estimate = |r: &[f64]| -> f64 {
            opts.exec
                .sum(n, |k| {
                    let m = &red.members[k];
                    let c = m.len() as f64;
                    r[k] * r[k] / (c * weights.vertex[m[0].0])
                })
                .sqrt()
        };
        while iterations < cap && estimate(&r) > 0.5 * opts.tol {
            op.apply(&p, &mut ap);
            let pap = opts.exec.dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                y[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
                z[k] = r[k] / diag[k];
            }
            let rz_new = opts.exec.dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            iterations += 1;
        }
        let v = form(&y);
        let res = residual(cx, &v, weights);
        if res <= opts.tol {
            return Ok((v, iterations, res));
        }
        if iterations >= cap {
            return Err(HodgeError::Convergence { iterations, residual: res });
        }
        iterations += 1;
    }
}

/// Harmonic representative of an anti-invariant closed cochain on `cover`.
pub fn harmonize_antiinvariant(
    cover: &BranchedCover,
    weights: &MetricWeights,
    rep: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64), HodgeError> {
    weights.validate_invariant(cover)?;
    let defect = closedness_defect(&cover.complex, rep);
    if defect > 1e-9 {
        return Err(HodgeError::NotClosed(defect));
    }
    if cover.tau_pullback(rep).iter().zip(rep).any(|(a, b)| *a != -*b) {
        return Err(HodgeError::NotAntiInvariant);
    }
    let red = Reduction::antiinvariant(cover);
    let (mut v, it, res) = solve(&cover.complex, &red, weights, rep, opts)?;
    // restore exact anti-invariance lost to round-off in rep + dφ
    for pair in &cover.lifts[1] {
        if pair[0] == pair[1] {
            v[pair[0]] = 0.0;
        } else {
            v[pair[1]] = -v[pair[0]];
        }
    }
    Ok((v, it, res))
}

/// Harmonic representative of a closed single-valued cochain on `cx`.
pub fn harmonize_plain(
    cx: &CellComplex,
    weights: &MetricWeights,
    rep: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64), HodgeError> {
    weights.validate(cx)?;
    let defect = closedness_defect(cx, rep);
    if defect > 1e-9 {
        return Err(HodgeError::NotClosed(defect));
    }
    solve(cx, &Reduction::plain(cx), weights, rep, opts)
}

/// Harmonic representative of `Σ class[i] basis[i]`, where `basis` holds
/// closed anti-invariant cochains on the cover.
pub fn harmonic_representative(
    cover: &BranchedCover,
    weights: &MetricWeights,
    class: &[f64],
    basis: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<HarmonicForm, HodgeError> {
    if class.len() != basis.len() {
        return Err(HodgeError::ClassSize { got: class.len(), want: basis.len() });
    }
    let mut rep = vec![0.0; cover.complex.n_cells(1)];
    for (c, b) in class.iter().zip(basis) {
        for (r, v) in rep.iter_mut().zip(b) {
            *r += c * v;
        }
    }
    harmonic_from_cochain(cover, weights, &rep, class.to_vec(), opts)
}

/// As [`harmonic_representative`] with the class given by a representative.
pub fn harmonic_from_cochain(
    cover: &BranchedCover,
    weights: &MetricWeights,
    rep: &[f64],
    class_id: Vec<f64>,
    opts: &SolverOptions,
) -> Result<HarmonicForm, HodgeError> {
    let (cochain, iterations, residual) = harmonize_antiinvariant(cover, weights, rep, opts)?;
    let cycles = cover.complex.cocycle_basis().map_err(|e| HodgeError::InvalidWeights(e.to_string()))?.cycles;
    let periods = periods(&cover.complex, &cochain, &cycles)?;
    Ok(HarmonicForm { cochain, residual, periods, class_id, iterations, weights: weights.kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::join_of_cycles;
    use crate::cover::{antiinvariant_cohomology, build_branched_cover, SingularLocus};

    fn unlink_cover() -> BranchedCover {
        let z = SingularLocus::loops(&[vec![7, 15, 1, 9], vec![3, 11, 5, 13]]);
        build_branched_cover(&join_of_cycles(8, 8), &z).unwrap()
    }

    #[test]
    fn zero_class_gives_zero_form() {
        let cov = unlink_cover();
        let w = MetricWeights::uniform(&cov.complex);
        let basis = antiinvariant_cohomology(&cov).unwrap();
        let h = harmonic_representative(&cov, &w, &[0.0], &basis, &SolverOptions::default()).unwrap();
        assert!(h.cochain.iter().all(|&v| v == 0.0));
        assert_eq!(h.residual, 0.0);
    }

    #[test]
    fn unlink_class_is_harmonic_and_keeps_periods() {
        let cov = unlink_cover();
        let w = MetricWeights::uniform(&cov.complex);
        let basis = antiinvariant_cohomology(&cov).unwrap();
        let opts = SolverOptions::default();
        let h = harmonic_representative(&cov, &w, &[1.0], &basis, &opts).unwrap();
        assert!(h.residual <= 1e-10);
        let cycles = cov.complex.cocycle_basis().unwrap().cycles;
        let target = periods(&cov.complex, &basis[0], &cycles).unwrap();
        for (a, b) in h.periods.iter().zip(&target) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
        let t = cov.tau_pullback(&h.cochain);
        assert!(t.iter().zip(&h.cochain).all(|(a, b)| *a == -*b));
        let again = harmonic_representative(
            &cov,
            &w,
            &[1.0],
            &basis,
            &SolverOptions { initial: InitialGuess::Random(7), ..opts },
        )
        .unwrap();
        for (a, b) in h.cochain.iter().zip(&again.cochain) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_splits_cochains() {
        let cov = unlink_cover();
        let tau = &cov.involution[1];
        let s: Vec<f64> = (0..tau.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let odd = antiinvariant_project(&s, tau);
        assert_eq!(antiinvariant_project(&odd, tau), odd);
        let even: Vec<f64> = (0..s.len()).map(|e| (s[e] + s[tau[e]]) / 2.0).collect();
        assert!(antiinvariant_project(&even, tau).iter().all(|&v| v == 0.0));
        for e in 0..s.len() {
            assert_eq!(odd[e] + even[e], s[e]);
        }
    }

    #[test]
    fn periods_reject_open_cochains() {
        let cov = unlink_cover();
        let mut x = vec![0.0; cov.complex.n_cells(1)];
        x[0] = 1.0;
        assert!(matches!(periods(&cov.complex, &x, &[]), Err(HodgeError::NotClosed(_))));
    }
}
