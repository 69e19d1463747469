//! AdS-Schwarzschild in normal form.
//!
//! With `V(r) = 1 + r² - 2m r^(2-n)` the normal coordinate satisfies
//! `d ln tanh(t/2) = -dr / sqrt(V)`. Outside `r₁ = r_h + 1` this integrates to
//!
//! ```text
//! ln tanh(t/2) = -ln(2r) + I(r),   I(r) = ∫_0^{1/r} (1/sqrt(1 + w² - 2m wⁿ) - 1) dw / w,
//! a(t) = e^{2 I(r)} cosh⁴(t/2),
//! ```
//!
//! which fixes the matching `t ~ 1/r`. Near the horizon the proper distance
//! `ℓ(σ) = ∫_0^σ 2 dσ' / sqrt(W(r_h + σ'²))`, with `V(r) = (r - r_h) W(r)`,
//! is analytic in σ and continues through the minimal sphere (σ < 0).

use crate::error::{Error, Result};
use crate::numerics::quad::integrate;

use super::grid::Dim;

const SIGMA_MATCH: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AdsSchwarzschild {
    dim: Dim,
    mass: f64,
    r_h: f64,
    /// ln tanh(t/2) at r = r_h + 1.
    y_match: f64,
    /// ℓ at σ = 1.
    ell_match: f64,
}

impl AdsSchwarzschild {
    pub fn new(dim: Dim, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass parameter must be positive, got {mass}")));
        }
        let mut s = AdsSchwarzschild { dim, mass, r_h: 0.0, y_match: 0.0, ell_match: 0.0 };
        s.r_h = s.find_horizon()?;
        let r1 = s.r_h + SIGMA_MATCH * SIGMA_MATCH;
        s.y_match = -(2.0 * r1).ln() + s.outer_integral(r1);
        s.ell_match = s.ell(SIGMA_MATCH);
        Ok(s)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Largest (here unique) positive root of V.
    pub fn horizon_radius(&self) -> f64 {
        self.r_h
    }

    /// Normal coordinate of the horizon.
    pub fn horizon_t(&self) -> f64 {
        2.0 * (self.y_match + self.ell_match).exp().atanh()
    }

    pub fn potential(&self, r: f64) -> f64 {
        let n = self.dim.get() as i32;
        1.0 + r * r - 2.0 * self.mass * r.powi(2 - n)
    }

    fn find_horizon(&self) -> Result<f64> {
        // V is increasing on r > 0, negative near 0 and positive for large r.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while self.potential(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Integration("no horizon found".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.potential(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// W(r) = V(r) / (r - r_h), evaluated without cancellation.
    fn w_factor(&self, r: f64) -> f64 {
        let k = self.dim.get() - 2;
        let rh = self.r_h;
        let sum: f64 = (0..k).map(|j| r.powi(j as i32) * rh.powi((k - 1 - j) as i32)).sum();
        r + rh + 2.0 * self.mass * sum / (r.powi(k as i32) * rh.powi(k as i32))
    }

    fn ell(&self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        let panels = (sigma.abs() / 0.25).ceil().max(1.0) as usize;
        integrate(|s| 2.0 / self.w_factor(self.r_h + s * s).sqrt(), 0.0, sigma, panels)
    }

    fn outer_integrand(&self, w: f64) -> f64 {
        let n = self.dim.get() as i32;
        let x_over_w = w - 2.0 * self.mass * w.powi(n - 1);
        let s = (1.0 + w * w - 2.0 * self.mass * w.powi(n)).sqrt();
        -x_over_w / (s * (1.0 + s))
    }

    /// I(r) for r ≥ r_h + 1.
    fn outer_integral(&self, r: f64) -> f64 {
        integrate(|w| self.outer_integrand(w), 0.0, 1.0 / r, 4)
    }

    /// Area radius r and ln a at normal coordinate t. Points past the horizon
    /// are returned only when `through_horizon` is set.
    pub fn point_at(&self, t: f64, through_horizon: bool) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
        }
        let y = (0.5 * t).tanh().ln();
        if y <= self.y_match {
            let r = self.outer_radius(t, y)?;
            let log_a = 2.0 * self.outer_integral(r) + 2.0 * (0.5 * t).sinh().powi(2).ln_1p();
            Ok((r, log_a))
        } else {
            let target = self.ell_match - (y - self.y_match);
            if target < 0.0 && !through_horizon {
                return Err(Error::PastHorizon { t_max: t, t_horizon: self.horizon_t() });
            }
            let sigma = self.inner_sigma(target)?;
            let r = self.r_h + sigma * sigma;
            Ok((r, 2.0 * (r * t.sinh()).ln()))
        }
    }

    fn outer_radius(&self, t: f64, y: f64) -> Result<f64> {
        let r_lo = self.r_h + SIGMA_MATCH * SIGMA_MATCH;
        let mut r = (1.0 / t.sinh()).max(r_lo);
        for _ in 0..100 {
            let f = -(2.0 * r).ln() + self.outer_integral(r) - y;
            let step = f * self.potential(r).sqrt();
            let next = (r + step).max(0.5 * (r + r_lo));
            if (next - r).abs() <= 16.0 * f64::EPSILON * r {
                return Ok(next);
            }
            r = next;
        }
        Err(Error::Integration(format!("outer radius at t = {t} did not converge")))
    }

    fn inner_sigma(&self, target: f64) -> Result<f64> {
        // ℓ is increasing in σ; bracket then Newton with bisection fallback.
        let (mut lo, mut hi) = (-1.0, SIGMA_MATCH);
        while self.ell(lo) > target {
            lo *= 2.0;
            if lo < -1e8 {
                return Err(Error::Integration("inner branch bracket failed".into()));
            }
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.ell(s) - target;
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = 2.0 / self.w_factor(self.r_h + s * s).sqrt();
            let mut next = s - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::Integration("inner branch did not converge".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, m: f64) -> AdsSchwarzschild {
        AdsSchwarzschild::new(Dim::new(n).unwrap(), m).unwrap()
    }

    #[test]
    fn unit_mass_horizon_in_three_dimensions() {
        let s = model(3, 1.0);
        assert!((s.horizon_radius() - 1.0).abs() < 1e-14);
        assert!(s.potential(1.0).abs() < 1e-14);
    }

    #[test]
    fn coordinate_relation_matches_ode() {
        // dr/dt = -sqrt(V) / sinh t
        let s = model(3, 1.0);
        let th = s.horizon_t();
        for &t in &[0.05, 0.3, 0.7 * th] {
            let dt = 1e-4 * t;
            let (rp, _) = s.point_at(t + dt, false).unwrap();
            let (rm, _) = s.point_at(t - dt, false).unwrap();
            let (r, log_a) = s.point_at(t, false).unwrap();
            let drdt = (rp - rm) / (2.0 * dt);
            let expected = -s.potential(r).sqrt() / t.sinh();
            assert!(((drdt - expected) / expected).abs() < 1e-7, "t = {t}");
            assert!((log_a - 2.0 * (r * t.sinh()).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn past_horizon_needs_opt_in() {
        let s = model(3, 1.0);
        let th = s.horizon_t();
        assert!(matches!(s.point_at(th * 1.1, false), Err(Error::PastHorizon { .. })));
        let (r, _) = s.point_at(th * 1.1, true).unwrap();
        assert!(r > 1.0);
        let (r, _) = s.point_at(th, true).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_mass_approaches_hyperbolic() {
        let s = model(4, 1e-9);
        for &t in &[0.01, 0.5, 1.5] {
            let (_, log_a) = s.point_at(t, false).unwrap();
            assert!(log_a.abs() < 1e-8, "t = {t}: {log_a}");
        }
    }
}
