//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::cell::RefCell;
use std::time::{Duration, Instant};

use ahlab::analysis::{minimal_sphere_scan, static_kernel_test, CrossingDirection, StaticConfig, StaticVerdict, Verdict};
use ahlab::curvature::{observed_orders, scalar_curvature};
use ahlab::deform::{build_family, verify_family, CutoffSpec, FamilyReport, VerifyConfig};
use ahlab::geometry::{
    make_ads_schwarzschild, make_ads_schwarzschild_through_horizon, make_bumped, make_hyperbolic, make_neck,
    AdsSchwarzschild, Bump, Dim, GeneralProfile, MetricProfile, RadialGrid, RadialMetric, ReferenceMetric,
};
use ahlab::mass::{check_lemma_coefficients, mass_aspect, mass_of, MassConfig};
use ahlab::yamabe::{decay_exponent, normalized_excess, solve_yamabe, yamabe_source, YamabeConfig};
use common::{shoot_yamabe, Fixture, FIXTURE};
use rand::{Rng, SeedableRng};

const FINE: usize = 6400;
const LEVELS: [usize; 4] = [800, 1600, 3200, 6400];
const CUTOFF: CutoffSpec = CutoffSpec { t0: 1e-3, t1: 4e-3 };
const S_VALUES: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

thread_local! {
    // Every static verdict computed anywhere in the suite.
    static VERDICTS: RefCell<Vec<StaticVerdict>> = const { RefCell::new(Vec::new()) };
}

fn static_test<M: RadialMetric>(m: &M, window: (f64, f64)) -> StaticVerdict {
    let v = static_kernel_test(m, window, &StaticConfig::default()).expect("static test");
    VERDICTS.with(|all| all.borrow_mut().push(v.clone()));
    v
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Hyperbolic space seen through `τ = t exp(δ(t))`, δ a Gaussian bump; the
/// metric is exactly hyperbolic so R = -n(n-1) identically.
fn reparametrized_hyperbolic(dim: Dim, grid: &RadialGrid) -> GeneralProfile {
    let (eps, c, w) = (0.05, 1.0, 0.4);
    let mut lp = Vec::with_capacity(grid.len());
    let mut lq = Vec::with_capacity(grid.len());
    for &t in grid.nodes() {
        let y = (t - c) / w;
        let delta = eps * (-y * y).exp();
        let d_delta = delta * (-2.0 * y / w);
        let tau = t * delta.exp();
        let log_ratio = (t.sinh() / tau.sinh()).ln();
        lq.push(2.0 * log_ratio);
        lp.push(2.0 * (delta + (t * d_delta).ln_1p()) + 2.0 * log_ratio);
    }
    GeneralProfile::from_logs(dim, grid.clone(), lp, lq).unwrap()
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [3, 4, 5] {
        let start = Instant::now();
        let dim = Dim::new(n).unwrap();
        let hyp = -((n * (n - 1)) as f64);
        let grids: Vec<RadialGrid> = LEVELS.iter().map(|&k| RadialGrid::geometric(1e-5, 2.0, k).unwrap()).collect();
        let errors: Vec<f64> = grids
            .iter()
            .map(|g| scalar_curvature(&reparametrized_hyperbolic(dim, g)).unwrap().max_deviation_from(hyp))
            .collect();
        let order = *observed_orders(&errors).last().unwrap();
        let g = &grids[3];
        let h = make_hyperbolic(dim, g);
        let normal_err = scalar_curvature(&h).unwrap().max_deviation_from(hyp);
        let mu = mass_aspect(&h, &Default::default()).unwrap().mu;
        let mu_general = mass_of(&h.to_general(), &MassConfig::default()).unwrap().mu;
        let y = solve_yamabe(&h, &YamabeConfig::default()).unwrap();
        let v = static_test(&h, (0.3, 1.2));
        let elapsed = start.elapsed();
        let pass = normal_err <= 1e-6
            && errors[3] <= 1e-6
            && order >= 3.5
            && mu.abs() <= 1e-8
            && mu_general.abs() <= 1e-8
            && max_abs(&y.v) == 0.0
            && y.residual_norm <= 1e-10
            && v.verdict == Verdict::Static
            && v.residual <= 1e-6
            && elapsed < Duration::from_secs(5);
        ok &= pass;
        notes.push(format!(
            "n={n}: |R+n(n-1)| {normal_err:.1e} (reparam {:.1e}, order {order:.2}), mu {mu:.1e}, v max {:.1e} res {:.1e}, static res {:.1e}, {:.2}s",
            errors[3],
            max_abs(&y.v),
            y.residual_norm,
            v.residual,
            elapsed.as_secs_f64()
        ));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let dim = Dim::new(3).unwrap();
    let g = RadialGrid::geometric(1e-5, 1.6, FINE).unwrap();
    let ads = make_ads_schwarzschild(dim, 1.0, &g).unwrap();
    let r_err = scalar_curvature(&ads).unwrap().max_deviation_from(-6.0);
    let through = make_ads_schwarzschild_through_horizon(dim, 1.0, &RadialGrid::geometric(1e-5, 2.5, FINE).unwrap()).unwrap();
    let scan = minimal_sphere_scan(&through).unwrap();
    let horizon = AdsSchwarzschild::new(dim, 1.0).unwrap().horizon_radius();
    let horizon_ok = scan.crossings.len() == 1
        && scan.crossings[0].direction == CrossingDirection::Minimum
        && (scan.crossings[0].area_radius - 1.0).abs() <= 1e-6
        && (horizon - 1.0).abs() <= 1e-12;
    let v = static_test(&ads, (0.2, 1.3));
    let y = solve_yamabe(&ads, &YamabeConfig::default()).unwrap();
    let geo_excess: Vec<f64> = scalar_curvature(&ads).unwrap().values.iter().map(|r| r + 6.0).collect();
    let r_hat = max_abs(&normalized_excess(dim, &geo_excess));
    let elapsed = start.elapsed();
    let pass = r_err <= 1e-5
        && horizon_ok
        && v.verdict == Verdict::Static
        && max_abs(&y.v) <= 1e-8
        && r_hat <= 1e-5
        && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "|R+6| {r_err:.1e}, horizon radius {:?}, static sigma {:.1e}, v max {:.1e} (R-hat {r_hat:.1e}), {:.2}s",
            scan.crossings.iter().map(|c| c.area_radius).collect::<Vec<_>>(),
            v.smallest_singular_value,
            max_abs(&y.v),
            elapsed.as_secs_f64()
        ),
    )
}

struct FixtureRun {
    report: FamilyReport,
    metric: MetricProfile,
    family: ahlab::deform::DeformedFamily,
    elapsed: Duration,
}

fn fixture_run(fx: &Fixture) -> FixtureRun {
    let start = Instant::now();
    let grid = fx.grid(FINE);
    let metric = fx.metric(&grid);
    let y = solve_yamabe(&metric, &YamabeConfig::default()).unwrap();
    let family = build_family(&metric, &y, &CUTOFF, &S_VALUES).unwrap();
    let report = verify_family(&family, &VerifyConfig::default(), &MassConfig::default()).unwrap();
    FixtureRun { report, metric, family, elapsed: start.elapsed() }
}

fn criterion_3(run: &FixtureRun) -> Outcome {
    let m = &run.report.members;
    let worst = m.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let ratios: Vec<f64> = m.iter().map(|r| r.measured_drop / r.s).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = (hi - lo) / hi.abs().max(lo.abs());
    let pass = worst <= 0.01 && spread <= 0.02 && run.elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "v_n {:.6e}, worst drop rel err {worst:.1e}, drop/s spread {spread:.1e}, {:.2}s",
            run.report.v_n,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4(run: &FixtureRun) -> Outcome {
    let m = &run.report.members;
    let decrease = m.iter().all(|r| r.mu_s < r.mu_base);
    let min_r = m.iter().map(|r| r.min_r_plus).fold(f64::INFINITY, f64::min);
    let equal = m.iter().all(|r| r.equality_region_ok);
    let glue = m.iter().map(|r| (r.mu_s - r.mu_conformal).abs()).fold(0.0, f64::max);
    let pass = decrease && min_r >= -1e-6 && equal && glue <= 1e-8;
    outcome(
        pass,
        format!("strict decrease {decrease}, min R_s + 6 {min_r:.2e}, bitwise tail {equal}, |mu(g_s) - mu(h_s)| {glue:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut accepted = 0;
    let mut drawn = 0;
    let mut ok = true;
    let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    while accepted < 10 && drawn < 40 {
        drawn += 1;
        let n = rng.gen_range(3..=5);
        let dim = Dim::new(n).unwrap();
        let width = rng.gen_range(0.2..0.5);
        let bump = Bump { center: rng.gen_range(0.6..1.4), width, amplitude: rng.gen_range(0.05..0.5) };
        let grid = RadialGrid::geometric(1e-5, 2.0, FINE).unwrap();
        let metric = match make_bumped(&ReferenceMetric::Hyperbolic(dim), &grid, &bump) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let excess = scalar_curvature(&metric).unwrap().summary(dim.hyperbolic_curvature()).min_excess;
        if excess < -1e-6 {
            continue;
        }
        accepted += 1;
        let y = match solve_yamabe(&metric, &YamabeConfig::default()) {
            Ok(y) => y,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let f = yamabe_source(&metric, &y.v).unwrap();
        let max_v = y.v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exponent = decay_exponent(&grid, &f, 1e-3);
        ok &= max_v <= 0.0 && y.v_n < 0.0 && max_f <= 0.0 && exponent >= n as f64 + 0.5;
        worst = (worst.0.max(max_v), worst.1.max(y.v_n), worst.2.max(max_f), worst.3.min(exponent - n as f64));
    }
    ok &= accepted == 10;
    outcome(
        ok,
        format!(
            "{accepted} fixtures ({drawn} drawn): max v {:.1e}, max v_n {:.2e}, max f {:.1e}, min (exponent - n) {:.2}",
            worst.0, worst.1, worst.2, worst.3
        ),
    )
}

fn criterion_6() -> Outcome {
    let dim = Dim::new(3).unwrap();
    let g = RadialGrid::geometric(1e-5, 1.6, FINE).unwrap();
    let statics = [
        static_test(&make_hyperbolic(dim, &g), (0.3, 1.2)).smallest_singular_value,
        static_test(&make_ads_schwarzschild(dim, 1.0, &g).unwrap(), (0.2, 1.3)).smallest_singular_value,
    ];
    let bumps = [
        Bump { center: 1.1, width: 0.4, amplitude: 1.0 },
        Bump { center: 0.8, width: 0.3, amplitude: 0.5 },
        Bump { center: 1.0, width: 0.5, amplitude: -0.3 },
    ];
    let non_statics: Vec<f64> = bumps
        .iter()
        .map(|b| {
            let m = make_bumped(&ReferenceMetric::Hyperbolic(dim), &g, b).unwrap();
            static_test(&m, b.support()).smallest_singular_value
        })
        .collect();
    let max_static = statics.iter().copied().fold(0.0, f64::max);
    let min_non = non_statics.iter().copied().fold(f64::INFINITY, f64::min);
    let cfg = StaticConfig::default();
    let sound = VERDICTS.with(|all| all.borrow().iter().all(|v| v.constant_curvature || v.verdict != Verdict::Static));
    let count = VERDICTS.with(|all| all.borrow().len());
    let pass = max_static <= 1e-6
        && min_non >= 1e-2
        && min_non / max_static >= 100.0
        && max_static < cfg.static_tol
        && cfg.gap_tol < min_non
        && sound;
    outcome(
        pass,
        format!("static sigma max {max_static:.1e}, non-static sigma min {min_non:.2e}, prefilter sound on {count} verdicts: {sound}"),
    )
}

fn criterion_7(run: &FixtureRun) -> Outcome {
    let grid = run.metric.grid();
    let y = &run.family.yamabe;
    let (_, v_shoot) = shoot_yamabe(&FIXTURE, grid.nodes(), 4);
    let err = y.v.iter().zip(&v_shoot).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut names = Vec::new();
    for &s in &S_VALUES {
        let l = check_lemma_coefficients(&run.metric, y, s, &MassConfig::default()).unwrap();
        for c in &l.coefficients {
            worst = worst.max(c.relative_error);
            if s == S_VALUES[0] {
                names.push(c.name.clone());
            }
        }
    }
    outcome(
        err <= 1e-6 && worst <= 1e-4,
        format!("|v - v_shoot| {err:.1e}, worst expansion coefficient rel err {worst:.1e} over {}", names.join(", ")),
    )
}

fn criterion_8(run: &FixtureRun) -> Outcome {
    let crossings: usize = run.family.members.iter().map(|m| minimal_sphere_scan(&m.glued).unwrap().crossings.len()).sum();
    let dim = Dim::new(3).unwrap();
    let t_star = 0.9;
    let neck = make_neck(dim, &RadialGrid::geometric(1e-5, 2.0, FINE).unwrap(), t_star).unwrap();
    let scan = minimal_sphere_scan(&neck).unwrap();
    let located = scan.crossings.len() == 1 && (scan.crossings[0].t_star - t_star).abs() <= 1e-6;
    outcome(
        crossings == 0 && located,
        format!(
            "{crossings} crossings over the sweep; neck crossings {:?} (expected {t_star})",
            scan.crossings.iter().map(|c| c.t_star).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let run = fixture_run(&FIXTURE);
    let results = [
        ("1 model-space sanity", criterion_1()),
        ("2 AdS-Schwarzschild", criterion_2()),
        ("3 mass-drop law", criterion_3(&run)),
        ("4 family conclusions", criterion_4(&run)),
        ("5 maximum principle and signs", criterion_5()),
        ("6 static separation", criterion_6()),
        ("7 oracle equivalence", criterion_7(&run)),
        ("8 no-horizon persistence", criterion_8(&run)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
