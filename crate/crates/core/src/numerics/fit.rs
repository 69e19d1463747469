//! The single leading-coefficient fitter used for both the Yamabe decay
//! coefficient and the mass-aspect coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings shared by every boundary fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Largest t included in the fit window.
    pub t_max: f64,
    /// Minimum number of nodes in the window.
    pub min_nodes: usize,
    /// Maximum tolerated relative drift between full and half window.
    pub max_drift: f64,
    /// Estimates below this magnitude on both windows count as zero.
    pub zero_floor: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { t_max: 1e-3, min_nodes: 8, max_drift: 0.1, zero_floor: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub window: (f64, f64),
    pub nodes: usize,
    /// Number of basis terms (t^k and t^(k+1)).
    pub terms: usize,
    pub coefficient: f64,
    pub next_coefficient: f64,
    pub half_window_coefficient: f64,
    pub relative_drift: f64,
    pub rms_residual: f64,
}

/// Least-squares fit of `y ≈ c t^k + d t^(k+1)` on the grid nodes with
/// `t <= cfg.t_max`, repeated on the first half of those nodes.
pub fn fit_leading_power(ts: &[f64], ys: &[f64], k: usize, cfg: &FitConfig) -> Result<FitDiagnostics> {
    let count = ts.iter().take_while(|&&t| t <= cfg.t_max * (1.0 + 1e-12)).count();
    if count < cfg.min_nodes {
        return Err(Error::FitWindow { needed: cfg.min_nodes, got: count });
    }
    let (c, d, rms) = two_term(&ts[..count], &ys[..count], k);
    let half = (count / 2).max(cfg.min_nodes.min(count));
    let (c_half, _, _) = two_term(&ts[..half], &ys[..half], k);
    let scale = c.abs().max(c_half.abs());
    let drift = if scale <= cfg.zero_floor { 0.0 } else { (c - c_half).abs() / scale };
    if drift > cfg.max_drift {
        return Err(Error::FitUnstable { full: c, half: c_half, drift });
    }
    Ok(FitDiagnostics {
        window: (ts[0], ts[count - 1]),
        nodes: count,
        terms: 2,
        coefficient: c,
        next_coefficient: d,
        half_window_coefficient: c_half,
        relative_drift: drift,
        rms_residual: rms,
    })
}

// Gram-Schmidt on the two scaled columns; returns (c, d, rms residual).
fn two_term(ts: &[f64], ys: &[f64], k: usize) -> (f64, f64, f64) {
    let scale = ts[ts.len() - 1];
    let a: Vec<f64> = ts.iter().map(|t| (t / scale).powi(k as i32)).collect();
    let b: Vec<f64> = ts.iter().map(|t| (t / scale).powi(k as i32 + 1)).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let na = dot(&a, &a).sqrt();
    let q1: Vec<f64> = a.iter().map(|v| v / na).collect();
    let r12 = dot(&q1, &b);
    let mut q2: Vec<f64> = b.iter().zip(&q1).map(|(v, q)| v - r12 * q).collect();
    let r22 = dot(&q2, &q2).sqrt();
    q2.iter_mut().for_each(|v| *v /= r22);
    let z1 = dot(&q1, ys);
    let z2 = dot(&q2, ys);
    let d_scaled = z2 / r22;
    let c_scaled = (z1 - r12 * d_scaled) / na;
    let rss: f64 = ts
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let r = ys[i] - c_scaled * a[i] - d_scaled * b[i];
            r * r
        })
        .sum();
    let c = c_scaled / scale.powi(k as i32);
    let d = d_scaled / scale.powi(k as i32 + 1);
    (c, d, (rss / ts.len() as f64).sqrt())
}
