//! Normal-form coordinates and the mass aspect.
//!
//! A radial metric `p dt² + q h̊` with `p sinh²t → 1` is brought to the form
//! `sinh⁻²(τ)(dτ² + ã(τ) h̊)` by solving `dτ / sinh τ = √p dt` with τ ~ t at
//! the boundary. Writing `P = ln(p sinh²t)`,
//!
//! ```text
//! ln tanh(τ/2) = ln tanh(t/2) + J(t),    J(t) = ∫₀ᵗ (e^(P/2) - 1) / sinh t' dt',
//! ```
//!
//! so only the deviation J is integrated and τ - t is recovered without
//! cancellation. The mass aspect is `μ = (n-1) γ̄` where `ã = 1 + γ̄ τⁿ + ...`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dim, GeneralProfile, MetricProfile, RadialGrid, RadialMetric};
use crate::numerics::fit::FitConfig;
use crate::numerics::interp::{cumulative_uniform, lagrange_at};
use crate::numerics::{fit_leading_power, FitDiagnostics};
use crate::yamabe::YamabeSolution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MassConfig {
    pub fit: FitConfig,
    /// Largest accepted |ln(p sinh²t)| at the first node.
    pub asymptotic_tol: f64,
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig { fit: FitConfig::default(), asymptotic_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub mu: f64,
    pub gamma_bar: f64,
    pub total_mass: f64,
    pub fit: FitDiagnostics,
}

/// The coordinate change produced by [`normalize_with_change`], sampled on
/// the source grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChange {
    /// τ(t_i).
    pub tau: Vec<f64>,
    /// t_i - τ(t_i).
    pub t_minus_tau: Vec<f64>,
    /// ln(sinh τ / sinh t) at the source nodes.
    pub log_sinh_ratio: Vec<f64>,
}

/// Normal form of `g` on a fresh log-uniform τ grid with the same number of
/// nodes.
pub fn normalize(g: &GeneralProfile, cfg: &MassConfig) -> Result<MetricProfile> {
    normalize_with_change(g, cfg).map(|(m, _)| m)
}

pub fn normalize_with_change(g: &GeneralProfile, cfg: &MassConfig) -> Result<(MetricProfile, CoordinateChange)> {
    let grid = g.grid();
    let lp = g.log_p();
    let lq = g.log_q();
    let n = g.dim().f();
    if !(lp[0].abs() <= cfg.asymptotic_tol) {
        return Err(Error::AsymptoticMismatch { deviation: lp[0].exp_m1() });
    }
    // Integrand in x = ln t. The piece below t_min is ∫ P/(2t) dt with
    // P ∝ tⁿ, which holds for conformal factors 1 + O(tⁿ).
    let integrand: Vec<f64> =
        grid.nodes().iter().zip(lp).map(|(&t, &p)| (0.5 * p).exp_m1() * t / t.sinh()).collect();
    let tail = lp[0] / (2.0 * n);
    let j: Vec<f64> = cumulative_uniform(&integrand, grid.log_step()).iter().map(|c| c + tail).collect();

    let len = grid.len();
    let mut change = CoordinateChange {
        tau: Vec::with_capacity(len),
        t_minus_tau: Vec::with_capacity(len),
        log_sinh_ratio: Vec::with_capacity(len),
    };
    let mut log_a = Vec::with_capacity(len);
    let mut log_tau = Vec::with_capacity(len);
    for (i, &t) in grid.nodes().iter().enumerate() {
        let th = (0.5 * t).tanh();
        let denom = 1.0 - th * th * j[i].exp();
        if !(denom > 0.0) || !j[i].is_finite() {
            return Err(Error::Integration(format!("normal coordinate diverges at t = {t}")));
        }
        let shift = 2.0 * (th * j[i].exp_m1() / denom).atanh();
        let sh2 = (0.5 * t).sinh().powi(2);
        let lr = j[i] - (-sh2 * (2.0 * j[i]).exp_m1()).ln_1p();
        change.tau.push(t + shift);
        log_tau.push(grid.log_nodes()[i] + (shift / t).ln_1p());
        change.t_minus_tau.push(-shift);
        change.log_sinh_ratio.push(lr);
        log_a.push(lq[i] + 2.0 * lr);
    }
    let tau = &change.tau;
    if tau.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Integration("normal coordinate is not monotone".into()));
    }
    let fresh = if change.t_minus_tau.iter().all(|d| *d == 0.0) {
        grid.clone()
    } else {
        RadialGrid::geometric(tau[0], tau[len - 1], len - 1)?.with_level(grid.level())
    };
    let resampled = fresh
        .log_nodes()
        .iter()
        .map(|&x| lagrange_at(&log_tau, &log_a, x.clamp(log_tau[0], log_tau[len - 1])))
        .collect::<Result<Vec<f64>>>()?;
    let profile = MetricProfile::from_log_a(g.dim(), fresh, resampled, "normal form")?;
    Ok((profile, change))
}

/// Fits `a = 1 + γ̄ tⁿ + c t^(n+1)` near the boundary.
pub fn mass_aspect(m: &MetricProfile, fit: &FitConfig) -> Result<MassReport> {
    let dim = m.dim();
    let d = fit_leading_power(m.grid().nodes(), &m.a_minus_one(), dim.get(), fit)?;
    let mu = (dim.f() - 1.0) * d.coefficient;
    Ok(MassReport { mu, gamma_bar: d.coefficient, total_mass: mu * dim.sphere_area(), fit: d })
}

/// Mass aspect of an arbitrary radial metric via [`normalize`].
pub fn mass_of(g: &GeneralProfile, cfg: &MassConfig) -> Result<MassReport> {
    mass_aspect(&normalize(g, cfg)?, &cfg.fit)
}

/// μ(h_s) - μ(g) for `h_s = (1 + s v)^(4/(n-2)) g` with `v = v_n tⁿ + ...`:
/// `4 (n-1)(n+1) s v_n / (n (n-2))`.
pub fn predicted_drop(n: Dim, s: f64, v_n: f64) -> f64 {
    let nf = n.f();
    4.0 * (nf - 1.0) * (nf + 1.0) * s * v_n / (nf * (nf - 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub predicted: f64,
    pub measured: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub s: f64,
    pub v_n: f64,
    pub mu_base: f64,
    pub mu_conformal: f64,
    pub predicted_drop: f64,
    pub measured_drop: f64,
    pub absolute_error: f64,
    pub relative_error: f64,
    pub coefficients: Vec<CoefficientCheck>,
}

fn relative(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        measured.abs()
    } else {
        ((measured - predicted) / predicted).abs()
    }
}

/// Compares the measured mass of `h_s` and the leading coefficients of the
/// change of variables with their closed forms:
///
/// ```text
/// t = τ - 2 s v_n / (n(n-2)) τ^(n+1),
/// sinh²τ / sinh²t = 1 + 4 s v_n / (n(n-2)) τⁿ,
/// u_s^(4/(n-2)) = 1 + 4 s v_n / (n-2) τⁿ,
/// (dt/dτ)² = 1 - 4 (n+1) s v_n / (n(n-2)) τⁿ.
/// ```
pub fn check_lemma_coefficients(
    base: &MetricProfile,
    yamabe: &YamabeSolution,
    s: f64,
    cfg: &MassConfig,
) -> Result<LemmaReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    let dim = base.dim();
    let (n, k) = (dim.f(), dim.get());
    let v_n = yamabe.v_n;
    let log_u: Vec<f64> = yamabe.v.iter().map(|v| (s * v).ln_1p()).collect();
    let h = crate::deform::conformal_multiply_log(base, &log_u)?;
    let (normal, change) = normalize_with_change(&h, cfg)?;
    let mu_base = mass_aspect(base, &cfg.fit)?.mu;
    let mu_conformal = mass_aspect(&normal, &cfg.fit)?.mu;
    let predicted = predicted_drop(dim, s, v_n);
    let measured = mu_conformal - mu_base;

    let tau = &change.tau;
    let lp = h.log_p();
    let lr = &change.log_sinh_ratio;
    let c = s * v_n / (n * (n - 2.0));
    let series: [(&str, Vec<f64>, usize, f64); 4] = [
        ("coordinate", change.t_minus_tau.clone(), k + 1, -2.0 * c),
        ("radial_sinh", lr.iter().map(|l| (2.0 * l).exp_m1()).collect(), k, 4.0 * c),
        ("conformal_factor", lp.iter().map(|p| p.exp_m1()).collect(), k, 4.0 * s * v_n / (n - 2.0)),
        ("radial_line_element", lr.iter().zip(lp).map(|(l, p)| (-2.0 * l - p).exp_m1()).collect(), k, -4.0 * (n + 1.0) * c),
    ];
    let mut coefficients = Vec::with_capacity(series.len());
    for (name, ys, power, expected) in series {
        let d = fit_leading_power(tau, &ys, power, &cfg.fit)?;
        coefficients.push(CoefficientCheck {
            name: name.to_string(),
            predicted: expected,
            measured: d.coefficient,
            relative_error: relative(d.coefficient, expected),
        });
    }
    Ok(LemmaReport {
        s,
        v_n,
        mu_base,
        mu_conformal,
        predicted_drop: predicted,
        measured_drop: measured,
        absolute_error: (measured - predicted).abs(),
        relative_error: relative(measured, predicted),
        coefficients,
    })
}
