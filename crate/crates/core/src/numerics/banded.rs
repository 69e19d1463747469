//! Banded linear systems solved by LU factorisation with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
/// Storage keeps `lower` extra super-diagonals for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        BandedMatrix { n, lower, upper, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.lower - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper + self.lower
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry (i, j). Panics if (i, j) lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.lower >= i && j <= i + self.upper,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper + self.lower).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b`, consuming the matrix.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = b.to_vec();
        let ext = self.upper + self.lower;
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular);
            }
            let last_col = (k + ext).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let (a, c) = (self.idx(k, j), self.idx(piv, j));
                    self.data.swap(a, c);
                }
                x.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let v = self.get(k, j);
                    let id = self.idx(i, j);
                    self.data[id] -= f * v;
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + ext).min(n - 1);
            let acc: f64 = (k + 1..=last_col).map(|j| self.get(k, j) * x[j]).sum();
            x[k] = (x[k] - acc) / self.get(k, k);
        }
        Ok(x)
    }
}
