//! Data-parallel helpers with a sequential fallback.
//!
//! Reductions use fixed-size chunks summed in index order, so results are
//! bitwise identical whichever execution mode or thread count is used.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const CHUNK: usize = 1024;

/// Execution mode for the numerical kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs sequentially.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `out[i] = f(i)` for every index.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// `f(i)` for every index in `0..n`, collected in order.
    pub fn map<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Deterministic sum of `f(i)` over `0..n`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(CHUNK);
        let partial = |c: usize| {
            let mut s = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                s += f(i);
            }
            s
        };
        self.map(chunks, partial).into_iter().sum()
    }

    pub fn dot(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.sum(a.len(), |i| a[i] * b[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let a: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1000) as f64 / 997.0 - 0.4).collect();
        let b: Vec<f64> = (0..5000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let s = Exec::Sequential.dot(&a, &b);
        let p = Exec::Parallel.dot(&a, &b);
        assert_eq!(s.to_bits(), p.to_bits());
        let mut x = vec![0.0; 3000];
        let mut y = vec![0.0; 3000];
        Exec::Sequential.fill(&mut x, |i| (i as f64).sin());
        Exec::Parallel.fill(&mut y, |i| (i as f64).sin());
        assert_eq!(x, y);
    }
}
