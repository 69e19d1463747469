//! Run configuration, the end-to-end pipeline and its report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    admissibility_check, minimal_sphere_scan, static_kernel_test, AdmissibilityReport, HorizonScan, StaticConfig,
    StaticVerdict, Verdict,
};
use crate::curvature::{observed_orders, scalar_curvature, CurvatureSummary};
use crate::deform::{build_family, verify_family, CutoffSpec, FamilyReport, VerifyConfig};
use crate::error::{Error, Result};
use crate::geometry::io::{AnyProfile, ProfileDocument};
use crate::geometry::{
    make_ads_schwarzschild, make_bumped, make_hyperbolic, AdsSchwarzschild, Bump, Dim, MetricProfile, RadialGrid,
    RadialMetric, ReferenceMetric,
};
use crate::jsonfmt::format_f64;
use crate::mass::{check_lemma_coefficients, mass_aspect, normalize, LemmaReport, MassConfig, MassReport};
use crate::numerics::fit::FitConfig;
use crate::yamabe::{solve_yamabe, YamabeConfig, YamabeSolution, YamabeSummary};

/// Environment variable that redirects every output path into a directory.
pub const OUTPUT_DIR_ENV: &str = "AHLAB_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Hyperbolic {
        n: usize,
        t_max: f64,
        #[serde(default)]
        t_omega: Option<f64>,
    },
    AdsSchwarzschild {
        n: usize,
        m: f64,
        t_max: f64,
        #[serde(default)]
        t_omega: Option<f64>,
    },
    /// Scalar-curvature bump `ε χ((t - t_c)/w)` on hyperbolic space, or on
    /// AdS-Schwarzschild when `m > 0`.
    Bumped {
        n: usize,
        #[serde(default)]
        m: f64,
        t_c: f64,
        w: f64,
        epsilon: f64,
        t_max: f64,
        #[serde(default)]
        t_omega: Option<f64>,
    },
    /// A profile document; relative paths resolve against the config file.
    File {
        path: PathBuf,
        #[serde(default)]
        t_omega: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub base_intervals: usize,
    /// Refinement levels; level l has `base_intervals * 2^l` intervals. The
    /// finest level carries the full pipeline.
    pub levels: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Newton residual target.
    pub solver: f64,
    /// Slack on the hypothesis R ≥ -n(n-1) before solving.
    pub hypothesis: f64,
    /// Slack on R_{g_s} + n(n-1) ≥ 0, and the static prefilter range.
    pub curvature: f64,
    pub fit: FitConfig,
    pub asymptotic: f64,
    pub mass_rel: f64,
    /// Largest relative spread of measured drop / s across the sweep.
    pub drop_ratio_spread: f64,
    pub coefficient_rel: f64,
    pub static_tol: f64,
    pub gap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let st = StaticConfig::default();
        Tolerances {
            solver: 1e-10,
            hypothesis: 1e-6,
            curvature: 1e-6,
            fit: FitConfig::default(),
            asymptotic: 1e-6,
            mass_rel: 0.01,
            drop_ratio_spread: 0.02,
            coefficient_rel: 1e-4,
            static_tol: st.static_tol,
            gap_tol: st.gap_tol,
        }
    }
}

impl Tolerances {
    pub fn yamabe(&self) -> YamabeConfig {
        YamabeConfig { tol: self.solver, hypothesis_tol: self.hypothesis, fit: self.fit, ..Default::default() }
    }

    pub fn mass(&self) -> MassConfig {
        MassConfig { fit: self.fit, asymptotic_tol: self.asymptotic }
    }

    pub fn verify(&self) -> VerifyConfig {
        VerifyConfig { curvature_tol: self.curvature, mass_rel_tol: self.mass_rel }
    }

    pub fn static_test(&self) -> StaticConfig {
        StaticConfig { static_tol: self.static_tol, gap_tol: self.gap_tol, curvature_tol: self.curvature }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Directory for the CSV files.
    #[serde(default)]
    pub plots: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSpec,
    pub grid: GridSpec,
    pub cutoff: CutoffSpec,
    pub s_values: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub static_windows: Vec<(f64, f64)>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative metric paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Structural checks that need no geometry.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.metric {
            MetricSpec::Hyperbolic { n, .. } | MetricSpec::AdsSchwarzschild { n, .. } | MetricSpec::Bumped { n, .. } => {
                Dim::new(*n)?;
            }
            MetricSpec::File { .. } => {}
        }
        if let MetricSpec::AdsSchwarzschild { n, m, .. } = self.metric {
            AdsSchwarzschild::new(Dim::new(n)?, m)?;
        }
        if let MetricSpec::Bumped { m, w, t_c, .. } = self.metric {
            if !(m >= 0.0) || !(w > 0.0) || !(t_c > w) {
                return bad(format!("bump needs m >= 0, w > 0 and t_c > w, got m = {m}, w = {w}, t_c = {t_c}"));
            }
        }
        if self.grid.levels.is_empty() {
            return bad("grid.levels is empty".into());
        }
        if self.grid.levels.iter().any(|&l| l > 12) {
            return bad("grid levels above 12 are not supported".into());
        }
        if !(self.grid.t_min > 0.0) || self.grid.base_intervals < 5 {
            return bad("grid needs t_min > 0 and at least 5 base intervals".into());
        }
        self.cutoff.validate()?;
        if let Some(s) = self.s_values.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return bad(format!("s = {s} outside (0, 1)"));
        }
        if let Some(w) = self.static_windows.iter().find(|w| !(w.0 < w.1)) {
            return bad(format!("empty static window {w:?}"));
        }
        let t = &self.tolerances;
        if [t.solver, t.hypothesis, t.curvature, t.asymptotic, t.mass_rel, t.coefficient_rel, t.static_tol, t.gap_tol]
            .iter()
            .any(|x| !(*x > 0.0))
        {
            return bad("tolerances must be positive".into());
        }
        if t.static_tol >= t.gap_tol {
            return bad("static_tol must lie below gap_tol".into());
        }
        Ok(())
    }

    pub fn finest_level(&self) -> u32 {
        self.grid.levels.iter().copied().max().unwrap_or(0)
    }

    fn t_omega(&self) -> Option<f64> {
        match &self.metric {
            MetricSpec::Hyperbolic { t_omega, .. }
            | MetricSpec::AdsSchwarzschild { t_omega, .. }
            | MetricSpec::Bumped { t_omega, .. }
            | MetricSpec::File { t_omega, .. } => *t_omega,
        }
    }
}

/// The base metric at one refinement level, with the exact scalar
/// curvature when it is known in closed form.
pub struct BaseMetric {
    pub metric: MetricProfile,
    pub exact_curvature: Option<Vec<f64>>,
}

pub fn build_base(cfg: &RunConfig, level: u32) -> Result<BaseMetric> {
    let grid = |t_max: f64| RadialGrid::geometric_level(cfg.grid.t_min, t_max, cfg.grid.base_intervals, level);
    let constant = |g: &MetricProfile| Some(vec![g.dim().hyperbolic_curvature(); g.grid().len()]);
    match &cfg.metric {
        MetricSpec::Hyperbolic { n, t_max, .. } => {
            let metric = make_hyperbolic(Dim::new(*n)?, &grid(*t_max)?);
            Ok(BaseMetric { exact_curvature: constant(&metric), metric })
        }
        MetricSpec::AdsSchwarzschild { n, m, t_max, .. } => {
            let metric = make_ads_schwarzschild(Dim::new(*n)?, *m, &grid(*t_max)?)?;
            Ok(BaseMetric { exact_curvature: constant(&metric), metric })
        }
        MetricSpec::Bumped { n, m, t_c, w, epsilon, t_max, .. } => {
            let dim = Dim::new(*n)?;
            let reference = if *m == 0.0 {
                ReferenceMetric::Hyperbolic(dim)
            } else {
                ReferenceMetric::AdsSchwarzschild(AdsSchwarzschild::new(dim, *m)?)
            };
            let bump = Bump { center: *t_c, width: *w, amplitude: *epsilon };
            let g = grid(*t_max)?;
            let metric = make_bumped(&reference, &g, &bump)?;
            let exact = g.nodes().iter().map(|&t| dim.hyperbolic_curvature() + bump.value(t)).collect();
            Ok(BaseMetric { metric, exact_curvature: Some(exact) })
        }
        MetricSpec::File { path, .. } => {
            let metric = load_metric(&cfg.base_dir.join(path), &cfg.tolerances.mass())?;
            Ok(BaseMetric { metric, exact_curvature: None })
        }
    }
}

/// Reads a profile document; general profiles are brought to normal form.
pub fn load_metric(path: &Path, mass: &MassConfig) -> Result<MetricProfile> {
    match load_profile(path)? {
        AnyProfile::Normal(m) => Ok(m),
        AnyProfile::General(g) => normalize(&g, mass),
    }
}

pub fn load_profile(path: &Path) -> Result<AnyProfile> {
    ProfileDocument::from_json(&fs::read_to_string(path)?)?.into_profile()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub level: u32,
    pub intervals: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl GridInfo {
    fn of(g: &RadialGrid) -> Self {
        GridInfo { level: g.level(), intervals: g.len() - 1, t_min: g.t_min(), t_max: g.t_max() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    pub intervals: usize,
    /// max |R - R_exact| over the nodes, when R_exact is known.
    pub curvature_error: Option<f64>,
    pub v_n: Option<f64>,
    pub mu: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<LevelRow>,
    /// log2 of successive curvature-error ratios.
    pub curvature_orders: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledScan {
    /// None for the base metric, otherwise the family parameter.
    pub s: Option<f64>,
    pub scan: HorizonScan,
    pub admissibility: Option<AdmissibilityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Geometry,
    Curvature,
    Yamabe,
    Deform,
    Mass,
    Analysis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub error: String,
}

/// Sampled fields for the CSV files; not part of the JSON report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub t: Vec<f64>,
    pub curvature_base: Vec<f64>,
    pub curvature_members: Vec<(f64, Vec<f64>)>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub grid: Option<GridInfo>,
    pub curvature: Option<CurvatureSummary>,
    pub yamabe: Option<YamabeSummary>,
    pub base_mass: Option<MassReport>,
    pub family: Option<FamilyReport>,
    pub lemma: Vec<LemmaReport>,
    pub static_verdicts: Vec<StaticVerdict>,
    pub horizon_scans: Vec<LabelledScan>,
    pub convergence: ConvergenceTable,
    pub checks: Vec<Check>,
    pub failure: Option<StageFailure>,
    pub passed: bool,
    pub exit_code: i32,
    #[serde(skip)]
    pub plots: PlotData,
}

impl RunReport {
    fn new(config: RunConfig) -> Self {
        RunReport {
            config,
            grid: None,
            curvature: None,
            yamabe: None,
            base_mass: None,
            family: None,
            lemma: Vec::new(),
            static_verdicts: Vec::new(),
            horizon_scans: Vec::new(),
            convergence: ConvergenceTable::default(),
            checks: Vec::new(),
            failure: None,
            passed: false,
            exit_code: 1,
            plots: PlotData::default(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }

    pub fn to_json(&self) -> String {
        crate::jsonfmt::to_string(self)
    }

    fn finish(mut self) -> Self {
        self.passed = self.failure.is_none() && self.checks.iter().all(|c| c.passed);
        self.exit_code = match &self.failure {
            Some(f) if f.stage == Stage::Yamabe && f.error.starts_with("hypothesis") => 2,
            Some(_) => 1,
            None if self.passed => 0,
            None => 2,
        };
        self
    }
}

/// Runs geometry → curvature → yamabe → deform → mass → analysis on the
/// finest level, plus the per-level convergence table. A failing stage ends
/// the run; everything computed before it stays in the report.
pub fn run_pipeline(cfg: &RunConfig) -> RunReport {
    let mut report = RunReport::new(cfg.clone());
    if let Err(e) = cfg.validate() {
        report.failure = Some(StageFailure { stage: Stage::Config, error: e.to_string() });
        return report.finish();
    }
    if let Err((stage, e)) = run_stages(cfg, &mut report) {
        report.failure = Some(StageFailure { stage, error: e.to_string() });
    }
    report.finish()
}

fn at(stage: Stage) -> impl Fn(Error) -> (Stage, Error) {
    move |e| (stage, e)
}

fn run_stages(cfg: &RunConfig, report: &mut RunReport) -> std::result::Result<(), (Stage, Error)> {
    let tol = &cfg.tolerances;
    let finest = cfg.finest_level();
    let mut levels = cfg.grid.levels.clone();
    levels.sort_unstable();
    levels.dedup();

    let base = build_base(cfg, finest).map_err(at(Stage::Geometry))?;
    let metric = &base.metric;
    let grid = metric.grid().clone();
    let dim = metric.dim();
    report.grid = Some(GridInfo::of(&grid));
    let t_omega = cfg.t_omega().unwrap_or(grid.t_max());
    cfg.cutoff.validate_against(t_omega).map_err(at(Stage::Geometry))?;

    let r = scalar_curvature(metric).map_err(at(Stage::Curvature))?;
    let summary = r.summary(dim.hyperbolic_curvature());
    report.check(
        "curvature_hypothesis",
        summary.min_excess >= -tol.hypothesis,
        format!("min R + n(n-1) = {}", format_f64(summary.min_excess)),
    );
    report.curvature = Some(summary);
    report.plots.t = grid.nodes().to_vec();
    report.plots.curvature_base = r.values.clone();

    report.convergence = convergence_table(cfg, &levels, finest);

    let yamabe = solve_yamabe(metric, &tol.yamabe()).map_err(at(Stage::Yamabe))?;
    report.yamabe = Some(yamabe.summary());
    report.plots.v = yamabe.v.clone();

    report.base_mass = Some(mass_aspect(metric, &tol.fit).map_err(at(Stage::Mass))?);

    let family = build_family(metric, &yamabe, &cfg.cutoff, &cfg.s_values).map_err(at(Stage::Deform))?;
    let fam = verify_family(&family, &tol.verify(), &tol.mass()).map_err(at(Stage::Deform))?;
    for m in &family.members {
        let rs = scalar_curvature(&m.glued).map_err(at(Stage::Deform))?;
        report.plots.curvature_members.push((m.s, rs.values));
    }
    family_checks(report, &fam, tol);
    let degenerate = fam.degenerate;
    report.family = Some(fam);

    if !degenerate {
        lemma_stage(report, metric, &yamabe, &cfg.s_values, tol).map_err(at(Stage::Mass))?;
    }

    analysis_stage(report, cfg, metric, &family, t_omega).map_err(at(Stage::Analysis))?;
    Ok(())
}

fn convergence_table(cfg: &RunConfig, levels: &[u32], finest: u32) -> ConvergenceTable {
    let tol = &cfg.tolerances;
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut row = LevelRow { level, intervals: 0, curvature_error: None, v_n: None, mu: None, error: None };
        let outcome = (|| -> Result<()> {
            let base = build_base(cfg, level)?;
            row.intervals = base.metric.grid().len() - 1;
            let r = scalar_curvature(&base.metric)?;
            row.curvature_error = base.exact_curvature.as_ref().map(|exact| {
                r.values.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            });
            row.mu = Some(mass_aspect(&base.metric, &tol.fit)?.mu);
            // Coarse levels carry O(h⁴) curvature error into the hypothesis
            // check; only the finest level uses the configured slack.
            let mut ycfg = tol.yamabe();
            if level != finest {
                let slack = row.curvature_error.unwrap_or(0.0);
                ycfg.hypothesis_tol = ycfg.hypothesis_tol.max(2.0 * slack);
            }
            row.v_n = Some(solve_yamabe(&base.metric, &ycfg)?.v_n);
            Ok(())
        })();
        if let Err(e) = outcome {
            row.error = Some(e.to_string());
        }
        rows.push(row);
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.curvature_error.unwrap_or(f64::NAN)).collect();
    ConvergenceTable { curvature_orders: observed_orders(&errors), rows }
}

fn family_checks(report: &mut RunReport, fam: &FamilyReport, tol: &Tolerances) {
    if fam.degenerate {
        let flat = fam.members.iter().all(|m| m.measured_drop == 0.0 && m.predicted_drop == 0.0);
        report.check("family_degenerate", flat, "v_n = 0: no strict mass decrease is possible".into());
        return;
    }
    for m in &fam.members {
        report.check(
            &format!("family_member s={}", format_f64(m.s)),
            m.violations.is_empty(),
            if m.violations.is_empty() { "all clauses hold".into() } else { m.violations.join("; ") },
        );
    }
    let ratios: Vec<f64> = fam.members.iter().map(|m| m.measured_drop / m.s).collect();
    if ratios.len() >= 2 {
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        let scale = ratios.iter().map(|r| r.abs()).fold(0.0, f64::max);
        let spread = (hi - lo) / scale;
        report.check(
            "drop_ratio_constant",
            spread <= tol.drop_ratio_spread,
            format!("relative spread of drop / s = {}", format_f64(spread)),
        );
    }
}

fn lemma_stage(
    report: &mut RunReport,
    metric: &MetricProfile,
    yamabe: &YamabeSolution,
    s_values: &[f64],
    tol: &Tolerances,
) -> Result<()> {
    for &s in s_values {
        let l = check_lemma_coefficients(metric, yamabe, s, &tol.mass())?;
        let worst = l.coefficients.iter().map(|c| c.relative_error).fold(0.0, f64::max);
        report.check(
            &format!("lemma_coefficients s={}", format_f64(s)),
            worst <= tol.coefficient_rel && l.relative_error <= tol.mass_rel,
            format!("drop error {}, worst coefficient error {}", format_f64(l.relative_error), format_f64(worst)),
        );
        report.lemma.push(l);
    }
    Ok(())
}

fn analysis_stage(
    report: &mut RunReport,
    cfg: &RunConfig,
    metric: &MetricProfile,
    family: &crate::deform::DeformedFamily,
    t_omega: f64,
) -> Result<()> {
    let tol = &cfg.tolerances;
    for &w in &cfg.static_windows {
        let v = static_kernel_test(metric, w, &tol.static_test())?;
        let sound = v.constant_curvature || v.verdict != Verdict::Static;
        report.check(
            &format!("prefilter_soundness [{}, {}]", format_f64(w.0), format_f64(w.1)),
            sound,
            format!("verdict {:?}, sigma {}", v.verdict, format_f64(v.smallest_singular_value)),
        );
        report.static_verdicts.push(v);
    }
    let base_scan = LabelledScan {
        s: None,
        scan: minimal_sphere_scan(metric)?,
        admissibility: Some(admissibility_check(metric, t_omega, tol.curvature.max(tol.hypothesis), tol.fit.t_max)?),
    };
    report.horizon_scans.push(base_scan);
    for m in &family.members {
        let adm = admissibility_check(&m.glued, t_omega, tol.curvature, tol.fit.t_max)?;
        report.check(
            &format!("no_interior_horizon s={}", format_f64(m.s)),
            adm.interior_crossings.is_empty(),
            format!("{} interior crossings", adm.interior_crossings.len()),
        );
        report.horizon_scans.push(LabelledScan { s: Some(m.s), scan: minimal_sphere_scan(&m.glued)?, admissibility: Some(adm) });
    }
    Ok(())
}

/// Lemma-only run: base, Yamabe solve and coefficient checks on the finest
/// level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRun {
    pub grid: GridInfo,
    pub v_n: f64,
    pub reports: Vec<LemmaReport>,
    pub passed: bool,
}

pub fn verify_lemma(cfg: &RunConfig) -> Result<LemmaRun> {
    cfg.validate()?;
    let base = build_base(cfg, cfg.finest_level())?;
    let yamabe = solve_yamabe(&base.metric, &cfg.tolerances.yamabe())?;
    let tol = &cfg.tolerances;
    let reports = cfg
        .s_values
        .iter()
        .map(|&s| check_lemma_coefficients(&base.metric, &yamabe, s, &tol.mass()))
        .collect::<Result<Vec<_>>>()?;
    let passed = yamabe.v_n != 0.0
        && reports.iter().all(|l| {
            l.relative_error <= tol.mass_rel && l.coefficients.iter().all(|c| c.relative_error <= tol.coefficient_rel)
        });
    Ok(LemmaRun { grid: GridInfo::of(base.metric.grid()), v_n: yamabe.v_n, reports, passed })
}

/// Horizon scan of any profile document.
pub fn scan_file(path: &Path) -> Result<HorizonScan> {
    match load_profile(path)? {
        AnyProfile::Normal(m) => minimal_sphere_scan(&m),
        AnyProfile::General(g) => minimal_sphere_scan(&g),
    }
}

pub fn static_test_file(path: &Path, window: (f64, f64), cfg: &StaticConfig) -> Result<StaticVerdict> {
    match load_profile(path)? {
        AnyProfile::Normal(m) => static_kernel_test(&m, window, cfg),
        AnyProfile::General(g) => static_kernel_test(&g, window, cfg),
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Writes mass_drop.csv, curvature_profile.csv, yamabe_profile.csv and
/// convergence.csv into `dir`, returning the paths written.
pub fn emit_plots(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        files.push(p);
        Ok(())
    };

    let members = report.family.as_ref().map(|f| f.members.as_slice()).unwrap_or(&[]);
    put(
        "mass_drop.csv",
        csv(
            "s,mu_g,mu_gs,predicted,measured,rel_err",
            members.iter().map(|m| vec![m.s, m.mu_base, m.mu_s, m.predicted_drop, m.measured_drop, m.relative_error]),
        ),
    )?;

    let p = &report.plots;
    let mut header = String::from("t,R_base");
    for (s, _) in &p.curvature_members {
        let _ = write!(header, ",R_s={}", format_f64(*s));
    }
    put(
        "curvature_profile.csv",
        csv(
            &header,
            (0..p.curvature_base.len()).map(|i| {
                let mut row = vec![p.t[i], p.curvature_base[i]];
                row.extend(p.curvature_members.iter().map(|(_, r)| r[i]));
                row
            }),
        ),
    )?;

    put("yamabe_profile.csv", csv("t,v", p.v.iter().enumerate().map(|(i, v)| vec![p.t[i], *v])))?;

    let c = &report.convergence;
    let nan = f64::NAN;
    put(
        "convergence.csv",
        csv(
            "level,intervals,curvature_error,observed_order,v_n,mu",
            c.rows.iter().enumerate().map(|(k, r)| {
                let order = if k == 0 { nan } else { c.curvature_orders.get(k - 1).copied().unwrap_or(nan) };
                vec![
                    r.level as f64,
                    r.intervals as f64,
                    r.curvature_error.unwrap_or(nan),
                    order,
                    r.v_n.unwrap_or(nan),
                    r.mu.unwrap_or(nan),
                ]
            }),
        ),
    )?;
    Ok(files)
}

/// Applies the output-directory override to a configured path.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(path.file_name().unwrap_or(path.as_os_str())),
        None => path.to_path_buf(),
    }
}
