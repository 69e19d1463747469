//! Spherically symmetric asymptotically hyperbolic metrics on radial grids.
//!
//! Every metric is encoded through its normal-form profile
//! `g = sinh⁻²(t)(dt² + a(t) h̊)` or, after conformal changes, the general
//! radial form `p dt² + q h̊`.

pub mod ads;
pub mod bump;
pub mod grid;
pub mod io;
pub mod models;
pub mod profile;

pub use ads::AdsSchwarzschild;
pub use bump::{bump, make_bumped, multiply_by_bump, smooth_step, Bump};
pub use grid::{Dim, RadialGrid};
pub use io::ProfileDocument;
pub use models::{ReferenceKind, ReferenceMetric};
pub use profile::{sample_at, GeneralProfile, MetricProfile, RadialMetric};

use crate::error::{Error, Result};

/// Hyperbolic space, `a ≡ 1`.
pub fn make_hyperbolic(dim: Dim, grid: &RadialGrid) -> MetricProfile {
    MetricProfile::from_log_a(dim, grid.clone(), vec![0.0; grid.len()], format!("hyperbolic n={}", dim.get()))
        .expect("constant profile is valid")
}

/// AdS-Schwarzschild of mass parameter `m`; the grid must end before the horizon.
pub fn make_ads_schwarzschild(dim: Dim, m: f64, grid: &RadialGrid) -> Result<MetricProfile> {
    let model = AdsSchwarzschild::new(dim, m)?;
    let t_h = model.horizon_t();
    if grid.t_max() >= t_h {
        return Err(Error::PastHorizon { t_max: grid.t_max(), t_horizon: t_h });
    }
    ads_profile(&model, grid, false)
}

/// AdS-Schwarzschild continued smoothly through its minimal sphere; the
/// grid may extend past the horizon.
pub fn make_ads_schwarzschild_through_horizon(dim: Dim, m: f64, grid: &RadialGrid) -> Result<MetricProfile> {
    let model = AdsSchwarzschild::new(dim, m)?;
    ads_profile(&model, grid, true)
}

fn ads_profile(model: &AdsSchwarzschild, grid: &RadialGrid, through: bool) -> Result<MetricProfile> {
    let log_a = grid
        .nodes()
        .iter()
        .map(|&t| model.point_at(t, through).map(|(_, la)| la))
        .collect::<Result<Vec<_>>>()?;
    MetricProfile::from_log_a(
        model.dim(),
        grid.clone(),
        log_a,
        format!("ads-schwarzschild n={} m={}", model.dim().get(), model.mass()),
    )
}

/// Synthetic profile with a neck: area radius `1/sinh t + β t^(n-1)`, with β
/// chosen so that the area radius has its unique critical point at `t_star`.
pub fn make_neck(dim: Dim, grid: &RadialGrid, t_star: f64) -> Result<MetricProfile> {
    if !(t_star > grid.t_min() && t_star < grid.t_max()) {
        return Err(Error::InvalidParameter(format!("neck location {t_star} outside the grid")));
    }
    let beta = neck_coefficient(dim, t_star);
    let k = dim.get() as i32 - 1;
    let log_a = grid
        .nodes()
        .iter()
        .map(|&t| 2.0 * (beta * t.powi(k) * t.sinh()).ln_1p())
        .collect();
    MetricProfile::from_log_a(dim, grid.clone(), log_a, format!("neck n={} t*={t_star}", dim.get()))
}

/// β with `d/dt (1/sinh t + β t^(n-1)) = 0` at `t_star`.
pub fn neck_coefficient(dim: Dim, t_star: f64) -> f64 {
    let n = dim.f();
    t_star.cosh() / ((n - 1.0) * t_star.powf(n - 2.0) * t_star.sinh().powi(2))
}
