//! Smooth compactly supported profiles and the scalar-curvature bump generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::{Dim, RadialGrid};
use super::models::ReferenceMetric;
use super::profile::{MetricProfile, RadialMetric};

/// The exponential bump `χ(x) = exp(1 - 1/(1 - x²))` for `|x| < 1`, else 0.
/// Peak value χ(0) = 1; C^∞ with support [-1, 1].
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// C^∞ monotone step: 0 for y ≤ 0, 1 for y ≥ 1,
/// `e(y) / (e(y) + e(1 - y))` in between with `e(y) = exp(-1/y)`.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / y).exp();
        let b = (-1.0 / (1.0 - y)).exp();
        a / (a + b)
    }
}

/// A bump centred at `center` with half-width `width` and peak `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * bump((t - self.center) / self.width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    fn check_inside(&self, grid: &RadialGrid) -> Result<()> {
        let (lo, hi) = self.support();
        if !(self.width > 0.0) || lo <= grid.t_min() || hi >= grid.t_max() {
            return Err(Error::SupportOutsideGrid { lo, hi });
        }
        Ok(())
    }
}

/// Multiplies the angular profile by `1 + ε χ((t - t_c)/w)`.
///
/// A compactly supported change of this kind can never raise the scalar
/// curvature above `-n(n-1)` without lowering it elsewhere (the Hawking mass
/// is equal on both sides of the support), so this is a test generator for
/// non-constant curvature rather than an admissible perturbation.
pub fn multiply_by_bump(base: &MetricProfile, b: &Bump) -> Result<MetricProfile> {
    b.check_inside(base.grid())?;
    let log_a = base
        .log_a()
        .iter()
        .zip(base.grid().nodes())
        .map(|(la, &t)| la + b.value(t).ln_1p())
        .collect();
    MetricProfile::from_log_a(base.dim(), base.grid().clone(), log_a, format!("{} * bump", base.meta))
}

/// Target substep in ln t for the profile integration.
const MAX_SUBSTEP: f64 = 5e-4;

/// Builds the metric whose scalar curvature equals that of `reference` plus
/// the bump, `R = -n(n-1) + ε χ((t - t_c)/w)`, and which coincides with the
/// reference for `t ≤ t_c - w`.
///
/// In spherical symmetry the Hawking mass
/// `m = ½ ρ^(n-2) (1 + ρ² - ρ_s²)` obeys
/// `dm/ds = ρ^(n-1) ρ_s (R + n(n-1)) / (2(n-1))`, and ds = -dt / sinh t in
/// normal form. Integrating `(ln a, m)` inward from the start of the support
/// gives the profile; beyond the support the metric is AdS-Schwarzschild with
/// the reduced mass.
pub fn make_bumped(reference: &ReferenceMetric, grid: &RadialGrid, b: &Bump) -> Result<MetricProfile> {
    b.check_inside(grid)?;
    let dim = reference.dim();
    let (t_start, _) = b.support();
    let nodes = grid.nodes();
    let first = nodes.partition_point(|&t| t <= t_start);
    let mut log_a = Vec::with_capacity(nodes.len());
    for &t in &nodes[..first] {
        log_a.push(reference.log_a_at(t)?);
    }
    let mut state = [reference.log_a_at(t_start)?, reference.mass()];
    let mut x = t_start.ln();
    for &t in &nodes[first..] {
        let x_end = t.ln();
        let steps = ((x_end - x) / MAX_SUBSTEP).ceil().max(1.0) as usize;
        let h = (x_end - x) / steps as f64;
        for _ in 0..steps {
            state = rk4_step(dim, b, x, state, h)?;
            x += h;
        }
        x = x_end;
        log_a.push(state[0]);
    }
    MetricProfile::from_log_a(dim, grid.clone(), log_a, format!("{} + curvature bump", reference.label()))
}

fn rhs(dim: Dim, b: &Bump, x: f64, y: [f64; 2]) -> Result<[f64; 2]> {
    let n = dim.f();
    let t = x.exp();
    let (sh, ch) = (t.sinh(), t.cosh());
    let rho = (0.5 * y[0]).exp() / sh;
    let radicand = 1.0 + rho * rho - 2.0 * y[1] * rho.powf(2.0 - n);
    if !(radicand > 0.0) {
        return Err(Error::Integration(format!("minimal sphere reached at t = {t} (ln a = {}, m = {})", y[0], y[1])));
    }
    let q = radicand.sqrt();
    let da = 2.0 * (ch / sh - q * (-0.5 * y[0]).exp());
    let dm = -rho.powf(n - 1.0) * q * b.value(t) / (2.0 * (n - 1.0) * sh);
    Ok([t * da, t * dm])
}

fn rk4_step(dim: Dim, b: &Bump, x: f64, y: [f64; 2], h: f64) -> Result<[f64; 2]> {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = rhs(dim, b, x, y)?;
    let k2 = rhs(dim, b, x + 0.5 * h, add(y, k1, 0.5 * h))?;
    let k3 = rhs(dim, b, x + 0.5 * h, add(y, k2, 0.5 * h))?;
    let k4 = rhs(dim, b, x + h, add(y, k3, h))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}
