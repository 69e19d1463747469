//! The Yamabe problem for prescribed scalar curvature `-n(n-1)`.
//!
//! With `u = 1 + v` the equation
//! `-(4(n-1)/(n-2)) Δu + R u + n(n-1) u^((n+2)/(n-2)) = 0` becomes
//!
//! ```text
//! -Δv + n v = f,    f = -R̂ (1 + v) - F(v),    R̂ = (n-2)/(4(n-1)) (R + n(n-1)).
//! ```
//!
//! The radial problem is collocated on the log-uniform grid and solved by
//! damped Newton with a banded LU. Near infinity the decaying solution of
//! the linearised operator behaves like tⁿ (the other indicial root is
//! t⁻¹), which is imposed as the Robin condition `v_x = n v` at the first
//! node. The inner end carries a zero Neumann condition.

use serde::{Deserialize, Serialize};

use crate::curvature::RadialGeometry;
use crate::error::{Error, Result};
use crate::geometry::{Dim, RadialGrid, RadialMetric};
use crate::numerics::fit::FitConfig;
use crate::numerics::{fit_leading_power, BandedMatrix, DiffOp, FitDiagnostics};

/// `n(n-2)/4 [(1+v)^((n+2)/(n-2)) - 1 - ((n+2)/(n-2)) v]`.
pub fn nonlinearity_f(v: f64, n: Dim) -> Result<f64> {
    if !(v > -1.0) {
        return Err(Error::Domain(format!("F(v) needs v > -1, got {v}")));
    }
    let nf = n.f();
    let p = (nf + 2.0) / (nf - 2.0);
    let c = nf * (nf - 2.0) / 4.0;
    if v.abs() < 1e-3 {
        // Binomial series from the quadratic term on; avoids cancellation.
        let (mut sum, mut term) = (0.0, p * (p - 1.0) / 2.0 * v * v);
        for k in 2..14 {
            sum += term;
            term *= (p - k as f64) / (k as f64 + 1.0) * v;
        }
        return Ok(c * sum);
    }
    Ok(c * ((p * v.ln_1p()).exp_m1() - p * v))
}

/// F'(v) = n(n+2)/4 [(1+v)^(4/(n-2)) - 1].
pub fn nonlinearity_derivative(v: f64, n: Dim) -> f64 {
    let nf = n.f();
    nf * (nf + 2.0) / 4.0 * (4.0 / (nf - 2.0) * v.ln_1p()).exp_m1()
}

/// R̂ = (n-2)/(4(n-1)) (R + n(n-1)) from samples of R + n(n-1).
pub fn normalized_excess(n: Dim, excess: &[f64]) -> Vec<f64> {
    let nf = n.f();
    let k = (nf - 2.0) / (4.0 * (nf - 1.0));
    excess.iter().map(|e| k * e).collect()
}

/// Right-hand side f = -R̂(1+v) - F(v) of the rewritten equation.
pub fn yamabe_source<M: RadialMetric + ?Sized>(metric: &M, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != metric.grid().len() {
        return Err(Error::GridMismatch);
    }
    let geo = RadialGeometry::new(metric)?;
    let r_hat = normalized_excess(metric.dim(), &geo.excess);
    v.iter()
        .zip(&r_hat)
        .map(|(&v, &rh)| Ok(-rh * (1.0 + v) - nonlinearity_f(v, metric.dim())?))
        .collect()
}

/// Two-term fit `v ≈ v_n tⁿ + c t^(n+1)` near infinity.
pub fn extract_decay(v: &[f64], grid: &RadialGrid, n: Dim, cfg: &FitConfig) -> Result<(f64, FitDiagnostics)> {
    if v.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let d = fit_leading_power(grid.nodes(), v, n.get(), cfg)?;
    Ok((d.coefficient, d))
}

/// Least-squares slope of ln|y| against ln t over nodes with `t <= t_max`
/// and `y != 0`. Returns +∞ when y vanishes on the whole window.
pub fn decay_exponent(grid: &RadialGrid, y: &[f64], t_max: f64) -> f64 {
    let pts: Vec<(f64, f64)> = grid
        .log_nodes()
        .iter()
        .zip(grid.nodes())
        .zip(y)
        .filter(|((_, &t), &y)| t <= t_max && y != 0.0)
        .map(|((&x, _), &y)| (x, y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YamabeConfig {
    /// Max-norm tolerance on the discrete residual.
    pub tol: f64,
    /// Slack allowed in the hypothesis R ≥ -n(n-1).
    pub hypothesis_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub fit: FitConfig,
}

impl Default for YamabeConfig {
    fn default() -> Self {
        YamabeConfig { tol: 1e-10, hypothesis_tol: 1e-6, max_iterations: 50, max_halvings: 30, fit: FitConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YamabeSolution {
    pub grid: RadialGrid,
    pub v: Vec<f64>,
    pub v_n: f64,
    pub residual_norm: f64,
    pub residual_history: Vec<f64>,
    /// max r_(k+1)/r_k² over the converging tail, when there is one.
    pub quadratic_constant: Option<f64>,
    pub fit: FitDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YamabeSummary {
    pub v_n: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub quadratic_constant: Option<f64>,
    pub min_v: f64,
    pub max_v: f64,
    pub fit: FitDiagnostics,
}

impl YamabeSolution {
    pub fn summary(&self) -> YamabeSummary {
        YamabeSummary {
            v_n: self.v_n,
            residual_norm: self.residual_norm,
            iterations: self.residual_history.len().saturating_sub(1),
            residual_history: self.residual_history.clone(),
            quadratic_constant: self.quadratic_constant,
            min_v: self.v.iter().copied().fold(f64::INFINITY, f64::min),
            max_v: self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            fit: self.fit.clone(),
        }
    }

    /// Conformal factor 1 + s v.
    pub fn factor(&self, s: f64) -> Vec<f64> {
        self.v.iter().map(|v| 1.0 + s * v).collect()
    }
}

struct Discretization {
    dim: Dim,
    op: DiffOp,
    lap_xx: Vec<f64>,
    lap_x: Vec<f64>,
    r_hat: Vec<f64>,
}

impl Discretization {
    fn residual(&self, v: &[f64]) -> Result<Vec<f64>> {
        let len = v.len();
        let nf = self.dim.f();
        let mut res = Vec::with_capacity(len);
        res.push(self.op.first[0].apply(v) - nf * v[0]);
        for i in 1..len - 1 {
            let lap = self.lap_xx[i] * self.op.second[i].apply(v) + self.lap_x[i] * self.op.first[i].apply(v);
            res.push(-lap + nf * v[i] + self.r_hat[i] * (1.0 + v[i]) + nonlinearity_f(v[i], self.dim)?);
        }
        res.push(self.op.first[len - 1].apply(v));
        Ok(res)
    }

    fn jacobian(&self, v: &[f64]) -> BandedMatrix {
        let len = v.len();
        let nf = self.dim.f();
        let mut jac = BandedMatrix::zeros(len, 5, 5);
        let s0 = &self.op.first[0];
        for (k, w) in s0.weights.iter().enumerate() {
            jac.add(0, s0.start + k, *w);
        }
        jac.add(0, 0, -nf);
        for (i, &vi) in v.iter().enumerate().take(len - 1).skip(1) {
            let (s1, s2) = (&self.op.first[i], &self.op.second[i]);
            for (k, w) in s2.weights.iter().enumerate() {
                jac.add(i, s2.start + k, -self.lap_xx[i] * w);
            }
            for (k, w) in s1.weights.iter().enumerate() {
                jac.add(i, s1.start + k, -self.lap_x[i] * w);
            }
            jac.add(i, i, nf + self.r_hat[i] + nonlinearity_derivative(vi, self.dim));
        }
        let sl = &self.op.first[len - 1];
        for (k, w) in sl.weights.iter().enumerate() {
            jac.add(len - 1, sl.start + k, *w);
        }
        jac
    }
}

fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves for v = u - 1 on the metric's grid, starting from v ≡ 0.
pub fn solve_yamabe<M: RadialMetric + ?Sized>(metric: &M, cfg: &YamabeConfig) -> Result<YamabeSolution> {
    let grid = metric.grid();
    let dim = metric.dim();
    let geo = RadialGeometry::new(metric)?;
    if let Some((i, excess)) = geo
        .excess
        .iter()
        .copied()
        .enumerate()
        .find(|(_, e)| *e < -cfg.hypothesis_tol)
    {
        return Err(Error::Hypothesis { t: grid.nodes()[i], excess });
    }
    let disc = Discretization {
        dim,
        op: grid.diff_op(),
        r_hat: normalized_excess(dim, &geo.excess),
        lap_xx: geo.lap_xx,
        lap_x: geo.lap_x,
    };

    let mut v = vec![0.0; grid.len()];
    let mut res = disc.residual(&v)?;
    let mut norm = max_norm(&res);
    let mut history = vec![norm];
    let mut iterations = 0;
    // Past the tolerance, keep polishing while Newton still gains a digit.
    while norm > 0.0 {
        let converged = norm <= cfg.tol;
        if iterations == cfg.max_iterations {
            if converged {
                break;
            }
            return Err(Error::NewtonDivergence { iterations, residual: norm });
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = disc.jacobian(&v).solve(&rhs)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut positivity_failure = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if let Some(i) = trial.iter().position(|&x| !(x > -1.0)) {
                positivity_failure = Some(grid.nodes()[i]);
            } else {
                let tr = disc.residual(&trial)?;
                let tn = max_norm(&tr);
                if tn < norm * (1.0 - 1e-4 * lambda) {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((nv, nr, nn)) => {
                let gain = nn / norm;
                v = nv;
                res = nr;
                norm = nn;
                iterations += 1;
                history.push(norm);
                if converged && gain > 0.1 {
                    break;
                }
            }
            None if converged => break,
            None => {
                return Err(match positivity_failure {
                    Some(t) => Error::PositivityLoss { t },
                    None => Error::NewtonDivergence { iterations, residual: norm },
                })
            }
        }
    }

    let (v_n, fit) = extract_decay(&v, grid, dim, &cfg.fit)?;
    Ok(YamabeSolution {
        grid: grid.clone(),
        v,
        v_n,
        residual_norm: norm,
        quadratic_constant: quadratic_constant(&history),
        residual_history: history,
        fit,
    })
}

// max r_(k+1)/r_k² over the last two contracting steps that end above
// the round-off floor (ten times the smallest residual seen).
fn quadratic_constant(history: &[f64]) -> Option<f64> {
    let floor = 10.0 * history.iter().copied().fold(f64::INFINITY, f64::min);
    let pairs: Vec<f64> = history
        .windows(2)
        .filter(|w| w[1] < 0.1 * w[0] && w[1] > floor)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    pairs[pairs.len().saturating_sub(2)..].iter().copied().reduce(f64::max)
}
