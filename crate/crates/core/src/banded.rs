//! Banded LU factorization with partial pivoting for complex matrices.
//!
//! Row `r` keeps the columns `[r − kl, r + kl + ku]`; the extra `kl`
//! columns absorb fill-in from row interchanges.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub(crate) struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandedMatrix {
    pub(crate) fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![C64::new(0.0, 0.0); n * width] }
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.kl + self.ku, "({r}, {c}) outside band");
        r * self.width + (c + self.kl - r)
    }

    /// Adds `v` to entry (r, c), which must lie within the original band.
    pub(crate) fn add(&mut self, r: usize, c: usize, v: C64) {
        assert!(c + self.kl >= r && c <= r + self.ku, "({r}, {c}) outside band");
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    /// Replaces row `r` by the unit row e_r.
    pub(crate) fn set_unit_row(&mut self, r: usize) {
        let start = r * self.width;
        self.data[start..start + self.width].fill(C64::new(0.0, 0.0));
        let s = self.slot(r, r);
        self.data[s] = C64::new(1.0, 0.0);
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        self.data[self.slot(r, c)]
    }

    #[cfg(test)]
    fn col_range(&self, r: usize) -> (usize, usize) {
        (r.saturating_sub(self.kl), (r + self.kl + self.ku).min(self.n - 1))
    }

    pub(crate) fn factor(mut self) -> BandedLu {
        let n = self.n;
        let kl = self.kl;
        let mut pivots = vec![0usize; n];
        let mut multipliers = vec![C64::new(0.0, 0.0); n * kl.max(1)];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for r in k + 1..=last_row {
                let v = self.get(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(a, b);
                }
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            if best == 0.0 {
                continue;
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let s = self.slot(r, k);
                let l = self.data[s] / pivot;
                self.data[s] = C64::new(0.0, 0.0);
                multipliers[k * kl + (r - k - 1)] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in k + 1..=last_col {
                    let u = self.get(k, c);
                    let s = self.slot(r, c);
                    self.data[s] -= l * u;
                }
            }
        }
        BandedLu { upper: self, pivots, multipliers, min_pivot, max_pivot }
    }

    /// y = A x for the matrix as currently stored.
    #[cfg(test)]
    pub(crate) fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|r| {
                let (lo, hi) = self.col_range(r);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandedLu {
    upper: BandedMatrix,
    pivots: Vec<usize>,
    multipliers: Vec<C64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    /// Smallest over largest pivot magnitude; zero for an exactly singular matrix.
    pub(crate) fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// Solves A x = b in place. Requires a nonsingular factorization.
    pub(crate) fn solve(&self, b: &mut [C64]) {
        let u = &self.upper;
        let n = u.n;
        let kl = u.kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.multipliers[k * kl + (r - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let hi = (k + kl + u.ku).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=hi {
                acc -= u.get(k, c) * b[c];
            }
            b[k] = acc / u.get(k, k);
        }
    }
}
