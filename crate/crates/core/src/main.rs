use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ahlab::analysis::StaticConfig;
use ahlab::cli::{emit_plots, output_path, run_pipeline, scan_file, static_test_file, verify_lemma, RunConfig};
use ahlab::jsonfmt;

#[derive(Parser)]
#[command(name = "ahlab", version, about = "Mass-decreasing deformations of radial asymptotically hyperbolic metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Run {
        config: PathBuf,
    },
    /// Check the mass-drop law and expansion coefficients only.
    VerifyLemma {
        config: PathBuf,
    },
    /// List minimal and CMC spheres of a profile document.
    ScanHorizons {
        metric: PathBuf,
    },
    /// Radial static-potential kernel test on a window of a profile document.
    StaticTest {
        metric: PathBuf,
        /// Window as `a,b` in t.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        #[arg(long, default_value_t = StaticConfig::default().static_tol)]
        static_tol: f64,
        #[arg(long, default_value_t = StaticConfig::default().gap_tol)]
        gap_tol: f64,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let report = run_pipeline(&cfg);
            let json = report.to_json();
            match &cfg.output.report {
                Some(p) => {
                    if let Err(e) = fs::write(output_path(p), &json) {
                        return fail(e);
                    }
                }
                None => print!("{json}"),
            }
            if let Some(dir) = &cfg.output.plots {
                if let Err(e) = emit_plots(&report, &output_path(dir)) {
                    return fail(e);
                }
            }
            if let Some(f) = &report.failure {
                eprintln!("stage {:?} failed: {}", f.stage, f.error);
            }
            ExitCode::from(report.exit_code as u8)
        }
        Command::VerifyLemma { config } => match RunConfig::load(&config).and_then(|c| verify_lemma(&c)) {
            Ok(run) => {
                print!("{}", jsonfmt::to_string(&run));
                ExitCode::from(if run.passed { 0 } else { 2 })
            }
            Err(e) => fail(e),
        },
        Command::ScanHorizons { metric } => match scan_file(&metric) {
            Ok(scan) => {
                print!("{}", jsonfmt::to_string(&scan));
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::StaticTest { metric, window, static_tol, gap_tol } => {
            let cfg = StaticConfig { static_tol, gap_tol, ..StaticConfig::default() };
            match static_test_file(&metric, window, &cfg) {
                Ok(v) => {
                    print!("{}", jsonfmt::to_string(&v));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
