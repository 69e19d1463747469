//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ahlab::geometry::{make_bumped, Bump, Dim, MetricProfile, RadialGrid, ReferenceMetric};

pub struct Fixture {
    pub n: usize,
    pub bump: Bump,
    pub t_min: f64,
    pub t_max: f64,
}

pub const FIXTURE: Fixture = Fixture {
    n: 3,
    bump: Bump { center: 1.2, width: 0.4, amplitude: 0.2 },
    t_min: 1e-5,
    t_max: 2.0,
};

impl Fixture {
    pub fn grid(&self, intervals: usize) -> RadialGrid {
        RadialGrid::geometric(self.t_min, self.t_max, intervals).unwrap()
    }

    pub fn metric(&self, grid: &RadialGrid) -> MetricProfile {
        let dim = Dim::new(self.n).unwrap();
        make_bumped(&ReferenceMetric::Hyperbolic(dim), grid, &self.bump).unwrap()
    }
}

/// Shooting solution of the radial Yamabe problem on a hyperbolic metric
/// with the curvature bump, sampled at `nodes`.
///
/// Works directly with `g = sinh⁻²t (dt² + a h̊)`: the Hawking-mass
/// equations give `a`, the volume form gives
/// `Δv = sinh²t (v_tt + ((n-1)/2 · (ln a)' + (2-n) coth t) v_t)`, and the
/// conformal law for u = 1 + v reads
/// `Δu = (n-2)/(4(n-1)) R u + n(n-2)/4 u^((n+2)/(n-2))` with the exact R.
/// Integrates outward from the first node, where v = c t^n, and adjusts c
/// by the secant method until v_t vanishes at the last node.
pub fn shoot_yamabe(fx: &Fixture, nodes: &[f64], substeps: usize) -> (f64, Vec<f64>) {
    let run = |c: f64| integrate(fx, nodes, substeps, c);
    let (mut c0, mut c1) = (-1e-3, -1.1e-3);
    let (mut r0, mut r1) = (run(c0).0, run(c1).0);
    for _ in 0..60 {
        let c2 = c1 - r1 * (c1 - c0) / (r1 - r0);
        c0 = c1;
        r0 = r1;
        c1 = c2;
        r1 = run(c1).0;
        if (c1 - c0).abs() <= 1e-15 * c1.abs() || r1 == 0.0 {
            break;
        }
    }
    (c1, run(c1).1)
}

// Returns (v_t at the last node, v at every node).
fn integrate(fx: &Fixture, nodes: &[f64], substeps: usize, c: f64) -> (f64, Vec<f64>) {
    let n = fx.n as f64;
    let t0 = nodes[0];
    // state: ln a, Hawking mass, v, t v_t; independent variable x = ln t.
    let mut y = [0.0, 0.0, c * t0.powf(n), n * c * t0.powf(n)];
    let mut out = vec![y[2]];
    for w in nodes.windows(2) {
        let (xa, xb) = (w[0].ln(), w[1].ln());
        let h = (xb - xa) / substeps as f64;
        for k in 0..substeps {
            let x = xa + k as f64 * h;
            let k1 = rhs(fx, x, y);
            let k2 = rhs(fx, x + 0.5 * h, add(y, k1, 0.5 * h));
            let k3 = rhs(fx, x + 0.5 * h, add(y, k2, 0.5 * h));
            let k4 = rhs(fx, x + h, add(y, k3, h));
            for i in 0..4 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        out.push(y[2]);
    }
    let t_end = nodes[nodes.len() - 1];
    (y[3] / t_end, out)
}

fn add(y: [f64; 4], k: [f64; 4], s: f64) -> [f64; 4] {
    [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
}

fn rhs(fx: &Fixture, x: f64, y: [f64; 4]) -> [f64; 4] {
    let n = fx.n as f64;
    let t = x.exp();
    let (sh, ch) = (t.sinh(), t.cosh());
    let [la, m, v, tv_t] = y;
    let bump = fx.bump.value(t);
    // Area radius ρ = √a / sinh t and ρ_s = √(1 + ρ² - 2 m ρ^(2-n)).
    let rho = (0.5 * la).exp() / sh;
    let rho_s = (1.0 + rho * rho - 2.0 * m * rho.powf(2.0 - n)).sqrt();
    let la_t = 2.0 * (ch / sh - rho_s * (-0.5 * la).exp());
    let m_t = -rho.powf(n - 1.0) * rho_s * bump / (2.0 * (n - 1.0) * sh);
    // The -n(n-1) part of R cancels against the power at v = 0; expanding
    // it out keeps v ~ t^n from drowning in round-off near the boundary.
    let p = (n + 2.0) / (n - 2.0);
    let nonlinear = n * (n - 2.0) / 4.0 * ((p * v.ln_1p()).exp_m1() - p * v);
    let lap_u = n * v + (n - 2.0) / (4.0 * (n - 1.0)) * bump * (1.0 + v) + nonlinear;
    let v_t = tv_t / t;
    let v_tt = lap_u / (sh * sh) - ((n - 1.0) / 2.0 * la_t + (2.0 - n) * ch / sh) * v_t;
    // d/dx (t v_t) = t v_t + t² v_tt
    [t * la_t, t * m_t, tv_t, tv_t + t * t * v_tt]
}
