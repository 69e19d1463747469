//! Finite-difference stencils.
//!
//! Weights come from Fornberg's recursion, so the same code serves centered
//! interior stencils and the one-sided stencils used at the grid ends.

/// Fornberg weights for derivatives of order `0..=max_order` at `z` using
/// the abscissae `xs`. Returns `w[k][j]`, the weight of `f(xs[j])` in the
/// k-th derivative.
pub fn fornberg(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One row of a difference operator: weights applied to `f[start..start+w.len()]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    #[inline]
    pub fn apply(&self, f: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&f[self.start..self.start + self.weights.len()])
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// First and second derivative operators of formal order 4 on a uniform
/// mesh of spacing `h` with `len` nodes.
///
/// Interior rows use 5-point centered stencils. The two nodes at each end use
/// one-sided stencils (5 points for the first derivative, 6 for the second),
/// which keeps the order at 4 up to the boundary.
#[derive(Clone, Debug)]
pub struct DiffOp {
    pub h: f64,
    pub first: Vec<Stencil>,
    pub second: Vec<Stencil>,
}

pub const DIFF_ORDER: usize = 4;
pub const MIN_NODES: usize = 6;

impl DiffOp {
    pub fn uniform(len: usize, h: f64) -> Self {
        assert!(len >= MIN_NODES, "difference operator needs at least {MIN_NODES} nodes");
        let mut first = Vec::with_capacity(len);
        let mut second = Vec::with_capacity(len);
        for i in 0..len {
            first.push(Self::row(i, len, h, 1, 5));
            let width = if i >= 2 && i + 2 < len { 5 } else { 6 };
            second.push(Self::row(i, len, h, 2, width));
        }
        DiffOp { h, first, second }
    }

    fn row(i: usize, len: usize, h: f64, order: usize, width: usize) -> Stencil {
        let half = width / 2;
        let start = i.saturating_sub(half).min(len - width);
        let xs: Vec<f64> = (start..start + width).map(|j| (j as f64 - i as f64) * h).collect();
        let w = fornberg(0.0, &xs, order);
        Stencil { start, weights: w[order].clone() }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        self.first.iter().map(|s| s.apply(f)).collect()
    }

    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        self.second.iter().map(|s| s.apply(f)).collect()
    }
}
