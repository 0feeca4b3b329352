//! Exact linear algebra helpers: sparse integer matrices, GF(2) systems and
//! integer kernels.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("integer overflow in sparse elimination")]
    Overflow,
    #[error("system too large for exact dense fallback ({0} entries)")]
    TooLarge(usize),
}

/// Column-major sparse integer matrix; columns hold `(row, value)` sorted by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn from_columns(rows: usize, cols: Vec<Vec<(usize, i64)>>) -> Self {
        SparseMatrix { rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.cols[c]
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols.len()]; self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[r][c] = v;
            }
        }
        m
    }

    /// Row-major copy as sparse rows.
    pub fn to_rows(&self) -> Vec<Vec<(usize, i64)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                rows[r].push((c, v));
            }
        }
        rows
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols(), other.rows());
        let cols = other
            .cols
            .iter()
            .map(|ocol| {
                let mut acc = std::collections::BTreeMap::new();
                for &(k, b) in ocol {
                    for &(r, a) in &self.cols[k] {
                        *acc.entry(r).or_insert(0i64) += a * b;
                    }
                }
                acc.into_iter().filter(|&(_, v)| v != 0).collect()
            })
            .collect();
        SparseMatrix { rows: self.rows, cols }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.iter().all(|&(_, v)| v == 0))
    }
}

/// Sorted sparse row `a - k * b` with overflow checks.
fn axpy_row(a: &[(usize, i64)], k: i64, b: &[(usize, i64)]) -> Result<Vec<(usize, i64)>, LinalgError> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = b[j].1.checked_mul(k).and_then(i64::checked_neg).ok_or(LinalgError::Overflow)?;
            out.push((b[j].0, v));
            j += 1;
        } else {
            let v = b[j]
                .1
                .checked_mul(k)
                .and_then(|p| a[i].1.checked_sub(p))
                .ok_or(LinalgError::Overflow)?;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

/// Sparse elimination state over rows, used for both rank/invariant factors
/// and kernels. Only unit pivots are used, so every step is unimodular.
struct UnitEliminator {
    rows: Vec<Vec<(usize, i64)>>,
    col_rows: Vec<std::collections::BTreeSet<usize>>,
    live_row: Vec<bool>,
}

impl UnitEliminator {
    fn new(rows: Vec<Vec<(usize, i64)>>, ncols: usize) -> Self {
        let mut col_rows = vec![std::collections::BTreeSet::new(); ncols];
        for (r, row) in rows.iter().enumerate() {
            for &(c, _) in row {
                col_rows[c].insert(r);
            }
        }
        let live_row = rows.iter().map(|r| !r.is_empty()).collect();
        UnitEliminator { rows, col_rows, live_row }
    }

    fn set_row(&mut self, r: usize, new: Vec<(usize, i64)>) {
        for &(c, _) in &self.rows[r] {
            self.col_rows[c].remove(&r);
        }
        for &(c, _) in &new {
            self.col_rows[c].insert(r);
        }
        self.rows[r] = new;
    }

    /// Eliminates column `c` from every row except `r` (and, when
    /// `include_dead` is false, from dead rows as well is skipped).
    fn eliminate(&mut self, r: usize, c: usize, include_dead: bool) -> Result<(), LinalgError> {
        let pv = self.rows[r].iter().find(|e| e.0 == c).unwrap().1;
        let others: Vec<usize> = self.col_rows[c].iter().copied().filter(|&o| o != r).collect();
        let pivot_row = self.rows[r].clone();
        for o in others {
            if !include_dead && !self.live_row[o] {
                continue;
            }
            let a = self.rows[o].iter().find(|e| e.0 == c).unwrap().1;
            let k = a * pv; // pv = ±1 so a / pv = a * pv
            let new = axpy_row(&self.rows[o], k, &pivot_row)?;
            self.set_row(o, new);
            if self.rows[o].is_empty() {
                self.live_row[o] = false;
            }
        }
        Ok(())
    }
}

/// Rank and nonzero invariant factors (absolute values, unordered units
/// included) of an integer matrix.
pub fn invariant_factors(m: &SparseMatrix) -> Result<Vec<BigInt>, LinalgError> {
    match invariant_factors_sparse(m) {
        Ok(f) => Ok(f),
        Err(LinalgError::Overflow) => {
            let dense = m.to_dense();
            let size = m.rows() * m.cols();
            if size > 4_000_000 {
                return Err(LinalgError::TooLarge(size));
            }
            let big = dense
                .into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect();
            Ok(dense_diagonalize(big))
        }
        Err(e) => Err(e),
    }
}

fn invariant_factors_sparse(m: &SparseMatrix) -> Result<Vec<BigInt>, LinalgError> {
    let mut el = UnitEliminator::new(m.to_rows(), m.cols());
    let mut units = 0usize;
    // lazy Markowitz queue: stale entries are re-costed when popped
    let cost = |el: &UnitEliminator, r: usize, c: usize| (el.rows[r].len() - 1) * (el.col_rows[c].len() - 1);
    let mut queue = BinaryHeap::new();
    let push_row = |el: &UnitEliminator, queue: &mut BinaryHeap<Reverse<(usize, usize, usize)>>, r: usize| {
        for &(c, v) in &el.rows[r] {
            if v.abs() == 1 {
                queue.push(Reverse((cost(el, r, c), r, c)));
            }
        }
    };
    for r in 0..el.rows.len() {
        push_row(&el, &mut queue, r);
    }
    while let Some(Reverse((k, r, c))) = queue.pop() {
        if !el.live_row[r] || !el.rows[r].iter().any(|&(cc, v)| cc == c && v.abs() == 1) {
            continue;
        }
        let now = cost(&el, r, c);
        if now > k {
            queue.push(Reverse((now, r, c)));
            continue;
        }
        let touched: Vec<usize> = el.col_rows[c].iter().copied().filter(|&o| o != r).collect();
        el.eliminate(r, c, false)?;
        for o in touched {
            if el.live_row[o] {
                push_row(&el, &mut queue, o);
            }
        }
        // after the row operations, column ops clear row r without touching
        // other rows; drop the pivot row and column
        el.set_row(r, Vec::new());
        el.live_row[r] = false;
        units += 1;
    }
    // residual block without unit entries
    let live: Vec<usize> = (0..el.rows.len()).filter(|&r| el.live_row[r]).collect();
    let mut out: Vec<BigInt> = vec![BigInt::one(); units];
    if !live.is_empty() {
        let mut cols: Vec<usize> = live.iter().flat_map(|&r| el.rows[r].iter().map(|e| e.0)).collect();
        cols.sort_unstable();
        cols.dedup();
        let pos: std::collections::HashMap<usize, usize> =
            cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let size = live.len() * cols.len();
        if size > 4_000_000 {
            return Err(LinalgError::TooLarge(size));
        }
        let mut dense = vec![vec![BigInt::zero(); cols.len()]; live.len()];
        for (i, &r) in live.iter().enumerate() {
            for &(c, v) in &el.rows[r] {
                dense[i][pos[&c]] = BigInt::from(v);
            }
        }
        out.extend(dense_diagonalize(dense));
    }
    Ok(out)
}

/// Diagonalizes a dense integer matrix by unimodular row and column
/// operations and returns the Smith invariant factors of the nonzero part.
pub fn dense_diagonalize(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let nr = a.len();
    let nc = if nr == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..nc {
                if !a[i][j].is_zero() {
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => a[i][j].abs() < a[bi][bj].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut dirty = false;
            for i in (t + 1)..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = floor_div(&a[i][t], &p);
                for j in t..nc {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in (t + 1)..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = floor_div(&a[t][j], &p);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
            // move the smallest nonzero of row/column t into the pivot
            let mut best = (t, t);
            for i in t..nr {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..nc {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    smith_from_diagonal(diag)
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

/// Normalizes a diagonal into Smith form `d_1 | d_2 | ...`.
pub fn smith_from_diagonal(mut d: Vec<BigInt>) -> Vec<BigInt> {
    use num_integer::Integer;
    d.retain(|x| !x.is_zero());
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// Solves `A x = b` over GF(2); `rows[i]` lists the columns with a one.
pub fn gf2_solve(rows: &[Vec<usize>], rhs: &[bool], ncols: usize) -> Option<Vec<bool>> {
    let words = ncols / 64 + 1;
    let rhs_bit = ncols;
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut w = vec![0u64; (ncols + 1) / 64 + 1];
            for &c in r {
                w[c / 64] ^= 1 << (c % 64);
            }
            if b {
                w[rhs_bit / 64] ^= 1 << (rhs_bit % 64);
            }
            w
        })
        .collect();
    let nw = m.first().map_or(words, Vec::len);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (row..m.len()).find(|&r| m[r][w] & bit != 0) else { continue };
        m.swap(row, p);
        let pivot = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && other[w] & bit != 0 {
                for k in 0..nw {
                    other[k] ^= pivot[k];
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let (rw, rb) = (rhs_bit / 64, 1u64 << (rhs_bit % 64));
    for r in row..m.len() {
        if m[r][rw] & rb != 0 {
            return None;
        }
    }
    let mut x = vec![false; ncols];
    for &(r, c) in &pivots {
        x[c] = m[r][rw] & rb != 0;
    }
    Some(x)
}

/// A basis of the integer kernel `{x : A x = 0}` where `A` is given by sparse
/// rows. When unit elimination completes, the basis spans the full kernel
/// lattice and `free[i]` is the coordinate where basis vector `i` is 1 and
/// all other basis vectors vanish.
#[derive(Debug, Clone)]
pub struct IntegerKernel {
    pub basis: Vec<Vec<i64>>,
    pub free: Vec<usize>,
    /// Whether `basis` is a lattice basis (otherwise only a rational basis).
    pub saturated: bool,
}

pub fn integer_kernel(rows: Vec<Vec<(usize, i64)>>, ncols: usize) -> Result<IntegerKernel, LinalgError> {
    match integer_kernel_unit(rows.clone(), ncols) {
        Ok(Some(k)) => Ok(k),
        Ok(None) | Err(LinalgError::Overflow) => rational_kernel(&rows, ncols),
        Err(e) => Err(e),
    }
}

fn integer_kernel_unit(
    rows: Vec<Vec<(usize, i64)>>,
    ncols: usize,
) -> Result<Option<IntegerKernel>, LinalgError> {
    let mut el = UnitEliminator::new(rows, ncols);
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut pivot_row = vec![false; el.rows.len()];
    loop {
        // candidate pivots only among rows not yet used as pivot rows
        let mut best: Option<(usize, usize, usize)> = None;
        for (r, row) in el.rows.iter().enumerate() {
            if pivot_row[r] || row.is_empty() {
                continue;
            }
            for &(c, v) in row {
                if v.abs() == 1 {
                    let cost = (row.len() - 1) * (el.col_rows[c].len() - 1);
                    if best.map_or(true, |b| cost < b.0) {
                        best = Some((cost, r, c));
                    }
                }
            }
            if best.map_or(false, |b| b.0 == 0) {
                break;
            }
        }
        let Some((_, r, c)) = best else { break };
        el.eliminate(r, c, true)?;
        pivot_row[r] = true;
        pivot_of_col[c] = Some(r);
    }
    let stuck = el.rows.iter().enumerate().any(|(r, row)| !pivot_row[r] && !row.is_empty());
    if stuck {
        return Ok(None);
    }
    let free: Vec<usize> = (0..ncols).filter(|&c| pivot_of_col[c].is_none()).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = vec![0i64; ncols];
        x[f] = 1;
        for (c, pr) in pivot_of_col.iter().enumerate() {
            if let Some(r) = *pr {
                let row = &el.rows[r];
                let pv = row.iter().find(|e| e.0 == c).unwrap().1;
                if let Some(&(_, a)) = row.iter().find(|e| e.0 == f) {
                    x[c] = -a * pv;
                }
            }
        }
        basis.push(x);
    }
    Ok(Some(IntegerKernel { basis, free, saturated: true }))
}

fn rational_kernel(rows: &[Vec<(usize, i64)>], ncols: usize) -> Result<IntegerKernel, LinalgError> {
    let size = rows.len() * ncols;
    if size > 2_000_000 {
        return Err(LinalgError::TooLarge(size));
    }
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            let mut d = vec![BigRational::zero(); ncols];
            for &(c, v) in r {
                d[c] = BigRational::from_integer(BigInt::from(v));
            }
            d
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let k = other[col].clone();
                for (o, pv) in other.iter_mut().zip(&pivot) {
                    *o -= &k * pv;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut x = vec![BigRational::zero(); ncols];
        x[f] = BigRational::one();
        for (r, &c) in pivot_cols.iter().enumerate() {
            x[c] = -m[r][f].clone();
        }
        // clear denominators
        let mut l = BigInt::one();
        for v in &x {
            l = num_integer::Integer::lcm(&l, v.denom());
        }
        let xi: Option<Vec<i64>> = x.iter().map(|v| (v * &l).to_integer().to_i64()).collect();
        basis.push(xi.ok_or(LinalgError::Overflow)?);
    }
    Ok(IntegerKernel { basis, free, saturated: false })
}

/// Rank of a small dense rational matrix.
pub fn rational_rank(m: &[Vec<BigRational>]) -> usize {
    independent_columns(m).len()
}

/// Indices of a maximal set of linearly independent columns (greedy, in order).
pub fn independent_columns(m: &[Vec<BigRational>]) -> Vec<usize> {
    if m.is_empty() {
        return Vec::new();
    }
    let nc = m[0].len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut chosen = Vec::new();
    let mut row = 0;
    for col in 0..nc {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let pivot = a[row].clone();
        for other in a.iter_mut().skip(row + 1) {
            if !other[col].is_zero() {
                let k = &other[col] / &pivot[col];
                for (o, pv) in other.iter_mut().zip(&pivot) {
                    *o -= &k * pv;
                }
            }
        }
        chosen.push(col);
        row += 1;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_normalizes_diagonal() {
        assert_eq!(smith_from_diagonal(big(&[4, 6])), big(&[2, 12]));
        assert_eq!(smith_from_diagonal(big(&[2, 0, 3])), big(&[1, 6]));
    }

    #[test]
    fn dense_diagonalize_small() {
        let m = vec![big(&[2, 4, 4]), big(&[-6, 6, 12]), big(&[10, -4, -16])];
        assert_eq!(dense_diagonalize(m), big(&[2, 6, 12]));
    }

    #[test]
    fn sparse_and_dense_agree_on_torsion() {
        // [[2,0],[0,3]] has factors 1, 6
        let m = SparseMatrix::from_columns(2, vec![vec![(0, 2)], vec![(1, 3)]]);
        assert_eq!(invariant_factors(&m).unwrap(), big(&[1, 6]));
    }

    #[test]
    fn gf2_consistent_and_inconsistent() {
        // x0 + x1 = 1, x1 + x2 = 0, x0 + x2 = 1
        let rows = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        let x = gf2_solve(&rows, &[true, false, true], 3).unwrap();
        assert_eq!(x[0] ^ x[1], true);
        assert_eq!(x[1] ^ x[2], false);
        assert!(gf2_solve(&rows, &[true, true, true], 3).is_none());
    }

    #[test]
    fn integer_kernel_of_cycle_constraints() {
        // x0 - x1 = 0, x1 - x2 = 0 in 4 unknowns: kernel rank 2
        let rows = vec![vec![(0, 1), (1, -1)], vec![(1, 1), (2, -1)]];
        let k = integer_kernel(rows.clone(), 4).unwrap();
        assert!(k.saturated);
        assert_eq!(k.basis.len(), 2);
        for b in &k.basis {
            for r in &rows {
                assert_eq!(r.iter().map(|&(c, v)| v * b[c]).sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn rational_fallback_for_non_unit_rows() {
        let rows = vec![vec![(0, 2), (1, 4)]];
        let k = integer_kernel(rows, 2).unwrap();
        assert_eq!(k.basis.len(), 1);
        assert_eq!(2 * k.basis[0][0] + 4 * k.basis[0][1], 0);
    }
}
