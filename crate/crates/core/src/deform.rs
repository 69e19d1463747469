//! The conformal family `h_s = u_s^(4/(n-2)) g` with `u_s = 1 + s v`, and the
//! glued family `g_s = (1 - φ) g + φ h_s` that agrees with `h_s` near infinity
//! and with `g` away from it.

use serde::{Deserialize, Serialize};

use crate::curvature::{laplace_beltrami, nonnegative_extent, scalar_curvature};
use crate::error::{Error, Result};
use crate::geometry::{smooth_step, GeneralProfile, MetricProfile, RadialGrid, RadialMetric};
use crate::mass::{mass_of, predicted_drop, MassConfig};
use crate::yamabe::YamabeSolution;

/// Transition region `[t0, t1]` of the cutoff φ.
///
/// φ ≡ 1 on `t ≤ t0`, φ ≡ 0 on `t ≥ t1`, and in between
/// `φ = 1 - S((ln t - ln t0) / (ln t1 - ln t0))` with the C^∞ step `S`.
/// The step is taken in ln t so that the transition is resolved by the same
/// number of grid nodes wherever it sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub t0: f64,
    pub t1: f64,
}

impl CutoffSpec {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        let c = CutoffSpec { t0, t1 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t1 > self.t0 && self.t1.is_finite()) {
            return Err(Error::InvalidCutoff(format!("need 0 < t0 < t1, got t0 = {}, t1 = {}", self.t0, self.t1)));
        }
        Ok(())
    }

    /// Checks that the transition stays clear of the region `t ≥ t_omega`.
    pub fn validate_against(&self, t_omega: f64) -> Result<()> {
        self.validate()?;
        if self.t1 >= t_omega {
            return Err(Error::InvalidCutoff(format!("t1 = {} must lie below t_omega = {t_omega}", self.t1)));
        }
        Ok(())
    }

    pub fn phi(&self, t: f64) -> f64 {
        if t <= self.t0 {
            1.0
        } else if t >= self.t1 {
            0.0
        } else {
            1.0 - smooth_step((t / self.t0).ln() / (self.t1 / self.t0).ln())
        }
    }

    /// Smoothness class of φ, reported as the number of continuous
    /// derivatives (`None` for C^∞).
    pub fn smoothness(&self) -> Option<u32> {
        None
    }
}

/// `u^(4/(n-2)) g` for positive samples `u`.
pub fn conformal_multiply<M: RadialMetric + ?Sized>(metric: &M, u: &[f64]) -> Result<GeneralProfile> {
    if u.len() != metric.grid().len() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = u.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveFactor { t: metric.grid().nodes()[i] });
    }
    let log_u: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    conformal_multiply_log(metric, &log_u)
}

/// Same as [`conformal_multiply`] but takes `ln u`, which keeps the digits
/// of factors that are within round-off of 1.
pub fn conformal_multiply_log<M: RadialMetric + ?Sized>(metric: &M, log_u: &[f64]) -> Result<GeneralProfile> {
    let grid = metric.grid();
    if log_u.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let k = 4.0 / (metric.dim().f() - 2.0);
    let w: Vec<f64> = log_u.iter().map(|l| k * l).collect();
    let log_p = match metric.log_radial() {
        Some(lp) => lp.iter().zip(&w).map(|(a, b)| a + b).collect(),
        None => w.clone(),
    };
    let log_q = metric.log_angular().iter().zip(&w).map(|(a, b)| a + b).collect();
    GeneralProfile::from_logs(metric.dim(), grid.clone(), log_p, log_q)
}

/// `(1 - φ) g + φ h` coefficient-wise in p and q. Nodes with φ = 0 copy the
/// base and nodes with φ = 1 copy `conformal`, both bitwise.
pub fn glue(base: &MetricProfile, conformal: &GeneralProfile, cutoff: &CutoffSpec) -> Result<GeneralProfile> {
    cutoff.validate()?;
    if !base.grid().same_as(conformal.grid()) {
        return Err(Error::GridMismatch);
    }
    let len = base.grid().len();
    let (mut log_p, mut log_q) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for (i, &t) in base.grid().nodes().iter().enumerate() {
        let la = base.log_a()[i];
        let (hp, hq) = (conformal.log_p()[i], conformal.log_q()[i]);
        let phi = cutoff.phi(t);
        if phi == 0.0 {
            log_p.push(0.0);
            log_q.push(la);
        } else if phi == 1.0 {
            log_p.push(hp);
            log_q.push(hq);
        } else {
            log_p.push((phi * hp.exp_m1()).ln_1p());
            log_q.push(la + (phi * (hq - la).exp_m1()).ln_1p());
        }
    }
    GeneralProfile::from_logs(base.dim(), base.grid().clone(), log_p, log_q)
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub s: f64,
    /// h_s.
    pub conformal: GeneralProfile,
    /// g_s.
    pub glued: GeneralProfile,
}

#[derive(Clone, Debug)]
pub struct DeformedFamily {
    pub base: MetricProfile,
    pub yamabe: YamabeSolution,
    pub cutoff: CutoffSpec,
    pub members: Vec<FamilyMember>,
}

impl DeformedFamily {
    pub fn s_values(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.s).collect()
    }
}

/// Assembles `h_s` and `g_s` for every `s` in `s_values` (each in (0, 1)).
pub fn build_family(
    base: &MetricProfile,
    yamabe: &YamabeSolution,
    cutoff: &CutoffSpec,
    s_values: &[f64],
) -> Result<DeformedFamily> {
    cutoff.validate()?;
    if !base.grid().same_as(&yamabe.grid) {
        return Err(Error::GridMismatch);
    }
    let mut members = Vec::with_capacity(s_values.len());
    for &s in s_values {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
        }
        let log_u: Vec<f64> = yamabe.v.iter().map(|v| (s * v).ln_1p()).collect();
        if let Some(i) = log_u.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonPositiveFactor { t: base.grid().nodes()[i] });
        }
        let conformal = conformal_multiply_log(base, &log_u)?;
        let glued = glue(base, &conformal, cutoff)?;
        members.push(FamilyMember { s, conformal, glued });
    }
    Ok(DeformedFamily { base: base.clone(), yamabe: yamabe.clone(), cutoff: *cutoff, members })
}

/// Largest log-deviation of `g` from `base` over the nodes,
/// `max(|ln(p sinh²t)|, |ln(q sinh²t) - ln a|)`.
pub fn deviation_from_base(base: &MetricProfile, g: &GeneralProfile) -> f64 {
    g.log_p()
        .iter()
        .zip(g.log_q())
        .zip(base.log_a())
        .map(|((p, q), a)| p.abs().max((q - a).abs()))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Slack on R_{g_s} + n(n-1) ≥ 0.
    pub curvature_tol: f64,
    /// Relative tolerance on the measured mass drop against the prediction.
    pub mass_rel_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { curvature_tol: 1e-6, mass_rel_tol: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub s: f64,
    pub mu_base: f64,
    /// μ(h_s).
    pub mu_conformal: f64,
    /// μ(g_s).
    pub mu_s: f64,
    pub predicted_drop: f64,
    pub measured_drop: f64,
    pub relative_error: f64,
    #[serde(rename = "minR_plus")]
    pub min_r_plus: f64,
    /// (t, R + n(n-1)) at the curvature minimum inside [t0, t1].
    pub annulus_minimum: Option<(f64, f64)>,
    pub equality_region_ok: bool,
    pub mass_decrease_ok: bool,
    pub curvature_ok: bool,
    /// |μ(g_s) - μ(h_s)| within the relative mass tolerance of the drop.
    pub glue_mass_ok: bool,
    /// Largest t₀ with -Δ_g u_s ≥ 0 on all nodes below it.
    pub superharmonic_extent: f64,
    /// Largest log-deviation of g_s from the base.
    pub deviation: f64,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// v_n = 0: no strict decrease is possible and clause (i) does not apply.
    pub degenerate: bool,
    pub v_n: f64,
    pub cutoff: CutoffSpec,
    pub members: Vec<MemberReport>,
    /// max over members of deviation / s.
    pub continuity_constant: f64,
    pub passed: bool,
}

/// Checks, for every member: strict mass decrease by at least the predicted
/// amount, the curvature bound, and bitwise agreement with the base for
/// t ≥ t1. Failures are listed in the report rather than returned as errors.
pub fn verify_family(family: &DeformedFamily, cfg: &VerifyConfig, mass_cfg: &MassConfig) -> Result<FamilyReport> {
    let base = &family.base;
    let dim = base.dim();
    let grid: &RadialGrid = base.grid();
    let hyp = dim.hyperbolic_curvature();
    let mu_base = crate::mass::mass_aspect(base, &mass_cfg.fit)?.mu;
    let v_n = family.yamabe.v_n;
    let degenerate = v_n == 0.0;
    let base_general = base.to_general();
    let tail = grid.nodes().partition_point(|&t| t < family.cutoff.t1);
    let annulus = grid.index_range(family.cutoff.t0, family.cutoff.t1);

    let lap_v = laplace_beltrami(base, &family.yamabe.v)?;
    let mut members = Vec::with_capacity(family.members.len());
    for m in &family.members {
        let mu_conformal = mass_of(&m.conformal, mass_cfg)?.mu;
        let mu_s = mass_of(&m.glued, mass_cfg)?.mu;
        let predicted = predicted_drop(dim, m.s, v_n);
        let measured = mu_s - mu_base;
        let relative_error =
            if predicted == 0.0 { measured.abs() } else { ((measured - predicted) / predicted).abs() };
        let r = scalar_curvature(&m.glued)?;
        let excess: Vec<f64> = r.values.iter().map(|x| x - hyp).collect();
        let min_r_plus = excess.iter().copied().fold(f64::INFINITY, f64::min);
        let annulus_minimum = annulus
            .clone()
            .map(|i| (grid.nodes()[i], excess[i]))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let equality_region_ok = m.glued.log_p()[tail..]
            .iter()
            .zip(&base_general.log_p()[tail..])
            .all(|(a, b)| a.to_bits() == b.to_bits())
            && m.glued.log_q()[tail..]
                .iter()
                .zip(&base_general.log_q()[tail..])
                .all(|(a, b)| a.to_bits() == b.to_bits());
        let mass_decrease_ok = !degenerate && mu_s < mu_base && -measured >= -predicted * (1.0 - cfg.mass_rel_tol);
        let curvature_ok = min_r_plus >= -cfg.curvature_tol;
        let glue_mass_ok = (mu_s - mu_conformal).abs() <= cfg.mass_rel_tol * predicted.abs().max(f64::MIN_POSITIVE)
            || (degenerate && mu_s == mu_conformal);
        // Δ(1 + s v) = s Δv; differencing the constant would only add round-off.
        let neg_lap: Vec<f64> = lap_v.iter().map(|x| -m.s * x).collect();
        let mut violations = Vec::new();
        if degenerate {
            violations.push("mass decrease: not applicable (v_n = 0)".to_string());
        } else if !mass_decrease_ok {
            violations.push(format!("mass decrease: measured {measured:e}, predicted {predicted:e}"));
        }
        if !curvature_ok {
            violations.push(format!("curvature: min R + n(n-1) = {min_r_plus:e}"));
        }
        if !equality_region_ok {
            violations.push("equality region: samples differ from the base for t >= t1".to_string());
        }
        if !glue_mass_ok {
            violations.push(format!("glued mass {mu_s:e} differs from conformal mass {mu_conformal:e}"));
        }
        members.push(MemberReport {
            s: m.s,
            mu_base,
            mu_conformal,
            mu_s,
            predicted_drop: predicted,
            measured_drop: measured,
            relative_error,
            min_r_plus,
            annulus_minimum,
            equality_region_ok,
            mass_decrease_ok,
            curvature_ok,
            glue_mass_ok,
            superharmonic_extent: nonnegative_extent(grid, &neg_lap),
            deviation: deviation_from_base(base, &m.glued),
            violations,
        });
    }
    let continuity_constant = members.iter().map(|m| m.deviation / m.s).fold(0.0, f64::max);
    let passed = !degenerate && members.iter().all(|m| m.violations.is_empty());
    Ok(FamilyReport { degenerate, v_n, cutoff: family.cutoff, members, continuity_constant, passed })
}
