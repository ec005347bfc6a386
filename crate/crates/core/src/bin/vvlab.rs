use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vvlab::euler::{euler_residual, Family};
use vvlab::geometry::Clustering;
use vvlab::layer::{solve_layer, write_snapshots};
use vvlab::ns::{bc_residual, solve_ns_channel, solve_ns_swirl};
use vvlab::study::{export_report, run_checks, run_convergence_study, StudyConfig};
use vvlab::{Error, Result};

#[derive(Parser)]
#[command(name = "vvlab", version, about = "Vanishing-viscosity boundary-layer laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration: rigid-annulus, vortex-annulus or flat-shear
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides study.output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite, plus a preset's study chain when given
    Check {
        #[arg(long)]
        preset: Option<String>,
    },
    /// Boundary-layer profile solver
    Layer {
        #[command(subcommand)]
        action: LayerAction,
    },
    /// Viscous reference solver
    Ns {
        #[command(subcommand)]
        action: NsAction,
    },
    /// Convergence studies
    Study {
        #[command(subcommand)]
        action: StudyAction,
    },
    /// Base-flow diagnostics
    Euler {
        #[command(subcommand)]
        action: EulerAction,
    },
}

#[derive(Subcommand)]
enum LayerAction {
    Solve(Source),
}

#[derive(Subcommand)]
enum NsAction {
    Solve {
        #[command(flatten)]
        source: Source,
        /// Viscosity; defaults to the first entry of study.nu_list
        #[arg(long)]
        nu: Option<f64>,
    },
}

#[derive(Subcommand)]
enum StudyAction {
    Rates {
        #[command(flatten)]
        source: Source,
        /// Worker threads for the viscosity sweep
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Subcommand)]
enum EulerAction {
    Residual {
        #[command(flatten)]
        source: Source,
        /// Grid points for the residual sampling
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
}

fn load(source: &Source) -> Result<(StudyConfig, PathBuf)> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --config or --preset, not both".into())),
        (Some(p), None) => StudyConfig::load(p)?,
        (None, Some(name)) => StudyConfig::preset(name)?,
        (None, None) => return Err(Error::Config("missing --config or --preset".into())),
    };
    if let Some(out) = &source.out {
        cfg.study.output_dir = out.clone();
    }
    let dir = cfg.study.output_dir.clone();
    Ok((cfg, dir))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn layer_solve(source: &Source) -> Result<bool> {
    let (cfg, dir) = load(source)?;
    let geometry = cfg.geometry.build()?;
    let flow = cfg.euler.family.parse::<Family>()?.build(&geometry)?;
    let mut settings = cfg.layer.clone();
    settings.t_end = cfg.study.t_end;
    let profile = solve_layer(&flow, &settings)?;
    let mut summary = Vec::new();
    for w in &profile.walls {
        let name = w.wall.name();
        let mut out = create(&dir, &format!("layer_{name}.dat"))?;
        write_snapshots(&mut out, &format!("u^b {name} wall"), &profile.times, &w.ub)?;
        out.flush()?;
        let last = w.ub.last().map_or(0.0, |f| f.max_abs());
        println!("{name} wall: {} snapshots, max |u^b| at t_end {last:.6e}", profile.times.len());
        summary.push(json!({"wall": name, "max_abs_final": last, "g": w.g_used(), "f": w.f_used()}));
    }
    let mut out = create(&dir, "layer_summary.json")?;
    writeln!(out, "{}", serde_json::to_string_pretty(&json!({"times": profile.times, "walls": summary})).expect("json"))?;
    println!("wrote {}", dir.display());
    Ok(profile.walls.iter().all(|w| w.ub.iter().all(|f| f.is_finite())))
}

fn ns_solve(source: &Source, nu: Option<f64>) -> Result<bool> {
    let (cfg, dir) = load(source)?;
    let study = cfg.resolve()?;
    let nu = nu.unwrap_or(study.nu_list[0]);
    if nu.is_nan() || nu <= 0.0 {
        return Err(Error::Config(format!("viscosity must be positive, got {nu}")));
    }
    let profile = study.flow.profile().expect("resolved flows carry a profile");
    let sol = if study.geometry.is_annulus() {
        solve_ns_swirl(&study.geometry, profile, nu, &study.ns)?
    } else {
        solve_ns_channel(&study.geometry, profile, nu, &study.ns)?
    };
    let mut out = create(&dir, "ns.csv")?;
    writeln!(out, "t,q,u")?;
    for (t, u) in sol.times.iter().zip(&sol.u) {
        for (q, v) in sol.grid.nodes.iter().zip(u) {
            writeln!(out, "{t},{q},{v}")?;
        }
    }
    out.flush()?;
    // the initial data need not satisfy the slip condition
    let bc = bc_residual(&sol).into_iter().zip(&sol.times).filter(|(_, t)| **t > 0.0).map(|(r, _)| r).fold(0.0, f64::max);
    println!("nu = {nu}: {} stored times, max wall-vorticity residual for t > 0 {bc:.3e}", sol.times.len());
    println!("wrote {}", dir.join("ns.csv").display());
    Ok(sol.u.iter().all(|u| u.iter().all(|v| v.is_finite())))
}

fn study_rates(source: &Source, jobs: Option<usize>) -> Result<bool> {
    let (cfg, dir) = load(source)?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let start = Instant::now();
    let report = run_convergence_study(&cfg, jobs)?;
    let wall = start.elapsed().as_secs_f64();
    let files = export_report(&report, &cfg, &dir, wall, jobs)?;
    if report.exact_regime {
        println!("exact regime, no fit");
    }
    for r in &report.rates {
        let slope = r.fit.map_or("-".to_string(), |f| format!("{:.4}", f.slope));
        let theory = r.theory.map_or("-".to_string(), |t| format!("{t:.4}"));
        let tag = if r.super_convergent { " (super-convergent)" } else { "" };
        println!("{:<6} slope {slope:>8} theory {theory:>8} {}{tag}", r.norm, if r.pass { "PASS" } else { "FAIL" });
    }
    if let Some(c) = &report.remainder_check {
        println!(
            "remainder: sup|R|_4 ratio {:.3}, sqrt(nu) sup|R|_H1 growth {:.3} {}",
            c.lp4_ratio,
            c.h1_scaled_growth,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    println!("{} in {wall:.1} s", if report.pass { "PASS" } else { "FAIL" });
    Ok(report.pass)
}

fn euler_check(source: &Source, n: usize) -> Result<bool> {
    let (cfg, _) = load(source)?;
    let geometry = cfg.geometry.build()?;
    let flow = cfg.euler.family.parse::<Family>()?.build(&geometry)?;
    let grid = geometry.volume_grid(n, Clustering::Uniform)?;
    let mut worst = 0.0f64;
    for k in 0..=4 {
        let t = cfg.study.t_end * k as f64 / 4.0;
        let r = euler_residual(&flow, &grid, t)?;
        println!("t = {t:<8} residual {r:.3e}");
        worst = worst.max(r);
    }
    let pass = worst < 1e-10;
    println!("{} (max {worst:.3e}, tolerance 1e-10)", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn check(preset: Option<&str>) -> Result<bool> {
    let start = Instant::now();
    let outcomes = run_checks(preset)?;
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    println!("{} in {:.1} s", if pass { "all checks passed" } else { "checks failed" }, start.elapsed().as_secs_f64());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { preset } => check(preset.as_deref()),
        Command::Layer { action: LayerAction::Solve(s) } => layer_solve(s),
        Command::Ns { action: NsAction::Solve { source, nu } } => ns_solve(source, *nu),
        Command::Study { action: StudyAction::Rates { source, jobs } } => study_rates(source, *jobs),
        Command::Euler { action: EulerAction::Residual { source, n } } => euler_check(source, *n),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
