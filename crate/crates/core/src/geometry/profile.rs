use crate::error::{Error, Result};
use crate::numerics::interp::lagrange_at;

use super::grid::{Dim, RadialGrid};

/// Common view of a spherically symmetric metric `p dt² + q h̊`, stored as
/// logarithmic deviations from hyperbolic space:
/// `log_radial = ln(p sinh²t)` and `log_angular = ln(q sinh²t)`.
///
/// Keeping the deviations rather than `p` and `q` preserves the digits of the
/// O(tⁿ) terms near the conformal boundary, where `sinh⁻²(t)` is huge.
pub trait RadialMetric {
    fn dim(&self) -> Dim;
    fn grid(&self) -> &RadialGrid;
    /// `ln(p sinh²t)`; `None` when the radial part is exactly `sinh⁻²(t) dt²`.
    fn log_radial(&self) -> Option<&[f64]>;
    fn log_angular(&self) -> &[f64];
}

/// A metric in normal form `sinh⁻²(t)(dt² + a(t) h̊)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricProfile {
    dim: Dim,
    grid: RadialGrid,
    log_a: Vec<f64>,
    pub meta: String,
}

impl MetricProfile {
    /// Builds a profile from `ln a` samples.
    pub fn from_log_a(dim: Dim, grid: RadialGrid, log_a: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        if log_a.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = log_a.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonPositiveProfile { t: grid.nodes()[i] });
        }
        Ok(MetricProfile { dim, grid, log_a, meta: meta.into() })
    }

    pub fn from_a(dim: Dim, grid: RadialGrid, a: &[f64], meta: impl Into<String>) -> Result<Self> {
        if a.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = a.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositiveProfile { t: grid.nodes()[i] });
        }
        Self::from_log_a(dim, grid, a.iter().map(|v| v.ln()).collect(), meta)
    }

    pub fn log_a(&self) -> &[f64] {
        &self.log_a
    }

    pub fn a(&self) -> Vec<f64> {
        self.log_a.iter().map(|v| v.exp()).collect()
    }

    /// `a(t) - 1` without cancellation.
    pub fn a_minus_one(&self) -> Vec<f64> {
        self.log_a.iter().map(|v| v.exp_m1()).collect()
    }

    /// Area radius `sqrt(a)/sinh t`.
    pub fn area_radius(&self) -> Vec<f64> {
        self.log_a
            .iter()
            .zip(self.grid.nodes())
            .map(|(la, t)| (0.5 * la).exp() / t.sinh())
            .collect()
    }

    /// Same metric viewed as a general radial profile.
    pub fn to_general(&self) -> GeneralProfile {
        GeneralProfile {
            dim: self.dim,
            grid: self.grid.clone(),
            log_p: vec![0.0; self.grid.len()],
            log_q: self.log_a.clone(),
        }
    }

    pub fn resample(&self, grid: &RadialGrid) -> Result<Self> {
        Ok(MetricProfile {
            dim: self.dim,
            grid: grid.clone(),
            log_a: resample_values(&self.grid, &self.log_a, grid)?,
            meta: self.meta.clone(),
        })
    }
}

impl RadialMetric for MetricProfile {
    fn dim(&self) -> Dim {
        self.dim
    }
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn log_radial(&self) -> Option<&[f64]> {
        None
    }
    fn log_angular(&self) -> &[f64] {
        &self.log_a
    }
}

/// A radial metric `p(t) dt² + q(t) h̊` not necessarily in normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralProfile {
    dim: Dim,
    grid: RadialGrid,
    log_p: Vec<f64>,
    log_q: Vec<f64>,
}

impl GeneralProfile {
    /// Builds from the log deviations `ln(p sinh²t)`, `ln(q sinh²t)`.
    pub fn from_logs(dim: Dim, grid: RadialGrid, log_p: Vec<f64>, log_q: Vec<f64>) -> Result<Self> {
        if log_p.len() != grid.len() || log_q.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        for (i, (lp, lq)) in log_p.iter().zip(&log_q).enumerate() {
            if !lp.is_finite() || !lq.is_finite() {
                return Err(Error::NonPositiveProfile { t: grid.nodes()[i] });
            }
        }
        Ok(GeneralProfile { dim, grid, log_p, log_q })
    }

    /// Builds from raw coefficients `p`, `q`.
    pub fn from_pq(dim: Dim, grid: RadialGrid, p: &[f64], q: &[f64]) -> Result<Self> {
        if p.len() != grid.len() || q.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let mut log_p = Vec::with_capacity(p.len());
        let mut log_q = Vec::with_capacity(q.len());
        for ((&pv, &qv), &t) in p.iter().zip(q).zip(grid.nodes()) {
            if !(pv > 0.0 && qv > 0.0) {
                return Err(Error::NonPositiveProfile { t });
            }
            let ls = 2.0 * t.sinh().ln();
            log_p.push(pv.ln() + ls);
            log_q.push(qv.ln() + ls);
        }
        Self::from_logs(dim, grid, log_p, log_q)
    }

    pub fn log_p(&self) -> &[f64] {
        &self.log_p
    }

    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    pub fn p(&self) -> Vec<f64> {
        self.log_p.iter().zip(self.grid.nodes()).map(|(l, t)| l.exp() / t.sinh().powi(2)).collect()
    }

    pub fn q(&self) -> Vec<f64> {
        self.log_q.iter().zip(self.grid.nodes()).map(|(l, t)| l.exp() / t.sinh().powi(2)).collect()
    }

    pub fn area_radius(&self) -> Vec<f64> {
        self.log_q
            .iter()
            .zip(self.grid.nodes())
            .map(|(l, t)| (0.5 * l).exp() / t.sinh())
            .collect()
    }

    pub fn resample(&self, grid: &RadialGrid) -> Result<Self> {
        Ok(GeneralProfile {
            dim: self.dim,
            grid: grid.clone(),
            log_p: resample_values(&self.grid, &self.log_p, grid)?,
            log_q: resample_values(&self.grid, &self.log_q, grid)?,
        })
    }
}

impl RadialMetric for GeneralProfile {
    fn dim(&self) -> Dim {
        self.dim
    }
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn log_radial(&self) -> Option<&[f64]> {
        Some(&self.log_p)
    }
    fn log_angular(&self) -> &[f64] {
        &self.log_q
    }
}

/// Evaluates sampled `values` at `t`: exact at nodes, otherwise the local
/// sixth-order interpolant in ln t.
pub fn sample_at(grid: &RadialGrid, values: &[f64], t: f64) -> Result<f64> {
    let nodes = grid.nodes();
    let i = nodes.partition_point(|&s| s < t);
    if i < nodes.len() && nodes[i] == t {
        return Ok(values[i]);
    }
    if !(t > 0.0) {
        return Err(Error::Extrapolation { t });
    }
    lagrange_at(grid.log_nodes(), values, t.ln()).map_err(|_| Error::Extrapolation { t })
}

fn resample_values(src: &RadialGrid, values: &[f64], dst: &RadialGrid) -> Result<Vec<f64>> {
    if dst.t_min() < src.t_min() * (1.0 - 1e-14) || dst.t_max() > src.t_max() * (1.0 + 1e-14) {
        let t = if dst.t_min() < src.t_min() { dst.t_min() } else { dst.t_max() };
        return Err(Error::Extrapolation { t });
    }
    dst.nodes()
        .iter()
        .map(|&t| sample_at(src, values, t.clamp(src.t_min(), src.t_max())))
        .collect()
}
