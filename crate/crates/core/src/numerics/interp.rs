//! Local Lagrange interpolation and cumulative quadrature on sampled data.

use crate::error::{Error, Result};

/// Points used by the local interpolant (degree 5, local order 6).
pub const INTERP_POINTS: usize = 6;

/// Interpolates `ys` sampled at strictly increasing `xs` at the point `x`
/// using the `INTERP_POINTS` nodes nearest to it. `x` must lie in
/// `[xs[0], xs[last]]` up to a relative slack of 1e-12.
pub fn lagrange_at(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let n = xs.len();
    let span = xs[n - 1] - xs[0];
    let slack = 1e-12 * span.abs().max(1.0);
    if x < xs[0] - slack || x > xs[n - 1] + slack {
        return Err(Error::Extrapolation { t: x });
    }
    let k = INTERP_POINTS.min(n);
    // first index with xs[i] >= x
    let pos = xs.partition_point(|&v| v < x);
    if pos < n && xs[pos] == x {
        return Ok(ys[pos]);
    }
    let start = pos.saturating_sub(k / 2).min(n - k);
    let mut acc = 0.0;
    for j in start..start + k {
        let mut l = 1.0;
        for m in start..start + k {
            if m != j {
                l *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
        acc += l * ys[j];
    }
    Ok(acc)
}

/// Derivative of the same local interpolant at `x`.
pub fn lagrange_derivative_at(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return Err(Error::Extrapolation { t: x });
    }
    let k = INTERP_POINTS.min(n);
    let pos = xs.partition_point(|&v| v < x);
    let start = pos.saturating_sub(k / 2).min(n - k);
    let w = super::stencil::fornberg(x, &xs[start..start + k], 1);
    Ok(w[1].iter().zip(&ys[start..start + k]).map(|(a, b)| a * b).sum())
}

/// Running integral `F[i] = ∫_{x_0}^{x_i} f` for samples on a uniform mesh of
/// spacing `h`, using the cubic through four neighbouring samples on every
/// interval (fourth order).
pub fn cumulative_uniform(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "cumulative quadrature needs four samples");
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if i == 0 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
        } else if i == n - 2 {
            (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]) / 24.0
        } else {
            (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) / 24.0
        };
        out[i + 1] = out[i] + h * piece;
    }
    out
}
