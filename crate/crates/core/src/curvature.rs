//! Scalar curvature, Laplace–Beltrami operator and the conformal
//! transformation law for radial metrics.
//!
//! Writing the metric as `ds² + ρ(s)² h̊` with `ρ` the area radius,
//!
//! ```text
//! R = -2(n-1) ρ''/ρ + (n-1)(n-2)(1 - ρ'²)/ρ²,     Δf = f'' + (n-1)(ρ'/ρ) f',
//! ```
//!
//! with primes for d/ds. All coefficients are evaluated from the stored
//! log-deviations plus closed-form `sinh t` factors; derivatives of the
//! samples are fourth-order differences in x = ln t.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RadialGrid, RadialMetric};
use crate::numerics::stencil::{DIFF_ORDER, MIN_NODES};

/// Sampled scalar curvature on the grid of its source metric.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    /// Formal order of the difference scheme (interior and boundary rows).
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub min: f64,
    pub max: f64,
    /// min over the grid of R + n(n-1).
    pub min_excess: f64,
    pub t_at_min: f64,
    pub order: usize,
}

impl CurvatureField {
    pub fn summary(&self, hyperbolic_curvature: f64) -> CurvatureSummary {
        let (mut imin, mut min, mut max) = (0, f64::INFINITY, f64::NEG_INFINITY);
        for (i, &r) in self.values.iter().enumerate() {
            if r < min {
                min = r;
                imin = i;
            }
            max = max.max(r);
        }
        CurvatureSummary {
            min,
            max,
            min_excess: min - hyperbolic_curvature,
            t_at_min: self.grid.nodes()[imin],
            order: self.order,
        }
    }

    /// max |R - value| over the nodes.
    pub fn max_deviation_from(&self, value: f64) -> f64 {
        self.values.iter().map(|r| (r - value).abs()).fold(0.0, f64::max)
    }
}

/// Pointwise warped-product quantities of a radial metric.
#[derive(Clone, Debug)]
pub struct RadialGeometry {
    pub n: f64,
    /// d/ds = `ds_factor` · d/dt (s is arclength increasing toward infinity).
    pub ds_factor: Vec<f64>,
    /// ρ'/ρ, which is (n-1)⁻¹ times the mean curvature of the coordinate sphere.
    pub log_rho_s: Vec<f64>,
    /// ρ''/ρ.
    pub rho_ss_over_rho: Vec<f64>,
    /// 1/ρ².
    pub inv_rho2: Vec<f64>,
    /// R + n(n-1).
    pub excess: Vec<f64>,
    /// Δf = lap_xx · f_xx + lap_x · f_x in x = ln t.
    pub lap_xx: Vec<f64>,
    pub lap_x: Vec<f64>,
}

impl RadialGeometry {
    pub fn new<M: RadialMetric + ?Sized>(metric: &M) -> Result<Self> {
        let grid = metric.grid();
        if grid.len() < MIN_NODES {
            return Err(Error::GridTooCoarse { needed: MIN_NODES, got: grid.len() });
        }
        let n = metric.dim().f();
        let lq = metric.log_angular();
        let (q_t, q_tt) = grid.derivatives(lq);
        let zeros = vec![0.0; grid.len()];
        let (lp, p_t): (&[f64], Vec<f64>) = match metric.log_radial() {
            Some(lp) => (lp, grid.derivatives(lp).0),
            None => (&zeros, zeros.clone()),
        };
        let len = grid.len();
        let mut g = RadialGeometry {
            n,
            ds_factor: Vec::with_capacity(len),
            log_rho_s: Vec::with_capacity(len),
            rho_ss_over_rho: Vec::with_capacity(len),
            inv_rho2: Vec::with_capacity(len),
            excess: Vec::with_capacity(len),
            lap_xx: Vec::with_capacity(len),
            lap_x: Vec::with_capacity(len),
        };
        for (i, &t) in grid.nodes().iter().enumerate() {
            let (sh, ch) = (t.sinh(), t.cosh());
            let omega = (-0.5 * lp[i]).exp();
            let omega_t = -0.5 * omega * p_t[i];
            let core = ch - 0.5 * sh * q_t[i];
            let lambda = omega * core;
            let core_t = sh - 0.5 * ch * q_t[i] - 0.5 * sh * q_tt[i];
            let lambda_s = -sh * omega * (omega_t * core + omega * core_t);
            let c2 = sh * sh * omega * omega;
            let c1 = c2 * (ch / sh - 0.5 * p_t[i]) - (n - 1.0) * lambda * sh * omega;
            g.ds_factor.push(-sh * omega);
            g.log_rho_s.push(lambda);
            g.rho_ss_over_rho.push(lambda_s + lambda * lambda);
            g.inv_rho2.push(sh * sh * (-lq[i]).exp());
            let excess = if metric.log_radial().is_none() {
                // Normal form: expanded so that the O(1) terms cancel exactly.
                let (s2, sc, al, be) = (sh * sh, sh * ch, q_t[i], q_tt[i]);
                (n - 1.0)
                    * (-s2 * be - 0.5 * s2 * al * al
                        + al * sc
                        + (n - 2.0) * (s2 * (-lq[i]).exp_m1() - 0.25 * s2 * al * al + al * sc))
            } else {
                let rho_ss = lambda_s + lambda * lambda;
                let ir2 = sh * sh * (-lq[i]).exp();
                -2.0 * (n - 1.0) * rho_ss + (n - 1.0) * (n - 2.0) * (ir2 - lambda * lambda) + n * (n - 1.0)
            };
            g.excess.push(excess);
            g.lap_xx.push(c2 / (t * t));
            g.lap_x.push(c1 / t - c2 / (t * t));
        }
        Ok(g)
    }

    pub fn scalar_curvature(&self) -> Vec<f64> {
        let k = self.n * (self.n - 1.0);
        self.excess.iter().map(|e| e - k).collect()
    }
}

/// Scalar curvature of a radial metric.
pub fn scalar_curvature<M: RadialMetric + ?Sized>(metric: &M) -> Result<CurvatureField> {
    let geo = RadialGeometry::new(metric)?;
    Ok(CurvatureField { grid: metric.grid().clone(), values: geo.scalar_curvature(), order: DIFF_ORDER })
}

/// Radial Laplace–Beltrami operator of `metric` applied to sampled `f`.
pub fn laplace_beltrami<M: RadialMetric + ?Sized>(metric: &M, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != metric.grid().len() {
        return Err(Error::GridMismatch);
    }
    let geo = RadialGeometry::new(metric)?;
    Ok(apply_laplacian(&geo, metric.grid(), f))
}

pub(crate) fn apply_laplacian(geo: &RadialGeometry, grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let op = grid.diff_op();
    let fx = op.d1(f);
    let fxx = op.d2(f);
    (0..f.len()).map(|i| geo.lap_xx[i] * fxx[i] + geo.lap_x[i] * fx[i]).collect()
}

/// Scalar curvature of `u^{4/(n-2)} g` from the conformal transformation law
/// `R̃ = u^{-4/(n-2)} R_g - (4(n-1)/(n-2)) u^{-(n+2)/(n-2)} Δ_g u`.
pub fn conformal_scalar_curvature<M: RadialMetric + ?Sized>(metric: &M, u: &[f64]) -> Result<CurvatureField> {
    if u.len() != metric.grid().len() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveFactor { t: metric.grid().nodes()[i] });
    }
    let n = metric.dim().f();
    let geo = RadialGeometry::new(metric)?;
    let r = geo.scalar_curvature();
    let lap = apply_laplacian(&geo, metric.grid(), u);
    let values = (0..u.len())
        .map(|i| {
            u[i].powf(-4.0 / (n - 2.0)) * r[i]
                - 4.0 * (n - 1.0) / (n - 2.0) * u[i].powf(-(n + 2.0) / (n - 2.0)) * lap[i]
        })
        .collect();
    Ok(CurvatureField { grid: metric.grid().clone(), values, order: DIFF_ORDER })
}

/// Largest node t₀ such that `values ≥ 0` on every node with t < t₀
/// (the first node where the sign fails, or the last node).
pub fn nonnegative_extent(grid: &RadialGrid, values: &[f64]) -> f64 {
    match values.iter().position(|&v| v < 0.0) {
        Some(0) => 0.0,
        Some(i) => grid.nodes()[i],
        None => grid.t_max(),
    }
}

/// log₂ of successive error ratios under grid halving.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
