//! `hhdr` — config-driven command line front end for the coupled two-spin
//! Hartmann-Hahn analysis library.
//!
//! Subcommands map onto the library's operations; every run writes its
//! outputs plus a `manifest.txt` (config hash, seed, version, wall time)
//! into the output directory. Identical configurations produce
//! byte-identical data files regardless of the worker count, which can be
//! capped with the `HHDR_THREADS` environment variable.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::{ConfigError, RunConfig};
use hhdr_core::contour::contour_level;
use hhdr_core::dynamics::{
    integrate, seo_amplitude, sweep_amplitude, AmplitudeSweepSettings, IntegrationSpec,
};
use hhdr_core::feasibility::{feasibility_report, nv_p1_preset, PresetOverrides};
use hhdr_core::lme::{
    build_linear_form, lme_stability_report, random_campaign, su_basis, LmeSystem,
};
use hhdr_core::model::theta;
use hhdr_core::stability::stability_point;
use hhdr_core::steady::{coupled_fixed_point, FixedPointMode};
use hhdr_core::sweep::{sweep_alpha, SweepSpec};
use hhdr_core::{C64, Error};

#[derive(Parser)]
#[command(name = "hhdr", version, about = "Coupled two-spin Hartmann-Hahn stability toolkit")]
struct Cli {
    /// Configuration file (flat key = value); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Grid override ROWSxCOLS for sweep subcommands, e.g. 61x81.
    #[arg(long, global = true, value_name = "RxC")]
    grid: Option<String>,
    /// Seed override for randomized campaigns.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Relative-tolerance override for integration.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Final-time override for integration, in units of 1/omega_a0.
    #[arg(long = "t-end", global = true, value_name = "X")]
    t_end: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Fixed point of the coupled equations (closed form and refined).
    FixedPoint,
    /// Back-action shift, damping coefficient and eigenvalues at one point.
    Alpha,
    /// Damping-coefficient map over the drive plane.
    SweepAlpha,
    /// Level set of the damping-coefficient map.
    Contour,
    /// Time-domain trajectory and oscillation estimate at one point.
    Simulate,
    /// Steady oscillation amplitude map over the drive plane.
    SweepSeo,
    /// Master-equation stability report (canonical system + random campaign).
    LmeReport,
    /// Instability-threshold estimates for the NV-/P1 preset.
    Feasibility,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FixedPoint => "fixed-point",
            Command::Alpha => "alpha",
            Command::SweepAlpha => "sweep-alpha",
            Command::Contour => "contour",
            Command::Simulate => "simulate",
            Command::SweepSeo => "sweep-seo",
            Command::LmeReport => "lme-report",
            Command::Feasibility => "feasibility",
        }
    }
}

/// Exit codes: 0 success, 2 config error, 3 numeric degeneracy,
/// 4 non-convergence.
fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) | RunError::Io(_) => 2,
        RunError::Core(err) => match err {
            Error::InvalidInput(_) | Error::WindowTooShort(_) => 2,
            Error::Degenerate { .. }
            | Error::NonFinite(_)
            | Error::ConjugacyViolation { .. }
            | Error::NoSteadyState(_) => 3,
            Error::NonConvergence { .. } | Error::StepBudgetExceeded { .. } => 4,
        },
    }
}

#[derive(Debug)]
enum RunError {
    Config(ConfigError),
    Core(Error),
    Io(std::io::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}
impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}
impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

fn kind(e: &RunError) -> &'static str {
    match e {
        RunError::Config(_) => "config",
        RunError::Io(_) => "io",
        RunError::Core(err) => match err {
            Error::InvalidInput(_) => "invalid-input",
            Error::WindowTooShort(_) => "window-too-short",
            Error::Degenerate { .. } => "degenerate",
            Error::NonFinite(_) => "non-finite",
            Error::ConjugacyViolation { .. } => "conjugacy",
            Error::NoSteadyState(_) => "no-steady-state",
            Error::NonConvergence { .. } => "non-convergence",
            Error::StepBudgetExceeded { .. } => "step-budget",
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("HHDR_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("hhdr-error: code={code} kind={} message=\"{e}\"", kind(&e));
            ExitCode::from(code)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(grid) = &cli.grid {
        let Some((r, c)) = grid.split_once('x') else {
            return Err(RunError::Config(ConfigError {
                line: None,
                message: format!("--grid expects ROWSxCOLS, got {grid:?}"),
            }));
        };
        let parse = |s: &str| -> Result<usize, RunError> {
            s.trim().parse().map_err(|_| {
                RunError::Config(ConfigError {
                    line: None,
                    message: format!("--grid expects integers, got {grid:?}"),
                })
            })
        };
        let (rows, cols) = (parse(r)?, parse(c)?);
        cfg.delta_count = rows;
        cfg.omega_b1_count = cols;
        cfg.seo_delta_count = rows;
        cfg.seo_omega_b1_count = cols;
    }
    if let Some(seed) = cli.seed {
        cfg.lme_seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.rel_tol = tol;
    }
    if let Some(t_end) = cli.t_end {
        cfg.t_end = t_end;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let started = Instant::now();
    let cfg = load_config(cli)?;
    let config_hash = hex::encode(Sha256::digest(cfg.serialize().as_bytes()));
    let out = &cli.out;

    match cli.command {
        Command::FixedPoint => {
            let params = cfg.system_params()?.normalized();
            let mut text = String::new();
            for (mode, label) in [
                (FixedPointMode::ZerothOrder, "zeroth_order"),
                (FixedPointMode::Newton, "newton"),
            ] {
                let state = coupled_fixed_point(&params, mode)?;
                let residual = theta(&state, &params)?
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                text.push_str(&output::fixed_point_text(&state, residual, label));
            }
            output::write_file(out, "fixed_point.txt", &text)?;
        }
        Command::Alpha => {
            let params = cfg.system_params()?.normalized();
            let pt = stability_point(&params, cfg.include_d0)?;
            output::write_file(
                out,
                "stability.txt",
                &output::stability_text(&pt, cfg.include_d0),
            )?;
        }
        Command::SweepAlpha => {
            let grid = sweep_alpha(&alpha_sweep_spec(&cfg)?)?;
            output::write_file(out, "alpha_grid.csv", &output::grid_text(&grid))?;
        }
        Command::Contour => {
            let grid = sweep_alpha(&alpha_sweep_spec(&cfg)?)?;
            let lines = contour_level(&grid, cfg.contour_level);
            output::write_file(
                out,
                "alpha_contour.csv",
                &output::contour_text(&lines, cfg.contour_level),
            )?;
        }
        Command::Simulate => {
            let params = cfg.system_params()?.normalized();
            let mut spec = IntegrationSpec::seo_default(&params, cfg.seed_amplitude)?;
            spec.t_end = cfg.t_end;
            spec.rel_tol = cfg.rel_tol;
            spec.abs_tol = cfg.abs_tol;
            spec.max_steps = cfg.max_steps;
            spec.record_stride = cfg.record_stride;
            let traj = integrate(&params, &spec)?;
            let est = seo_amplitude(&traj, cfg.tail_fraction, &params)?;
            output::write_file(out, "trajectory.csv", &output::trajectory_text(&traj))?;
            output::write_file(out, "seo.txt", &output::seo_text(&est, &traj))?;
        }
        Command::SweepSeo => {
            let params = cfg.system_params()?.normalized();
            let (delta, omega_b1) = cfg.seo_axes()?;
            let spec = SweepSpec {
                delta,
                omega_b1,
                base: params,
                include_d0_term: cfg.sweep_include_d0,
            };
            let settings = AmplitudeSweepSettings {
                t_end: cfg.t_end,
                rel_tol: cfg.rel_tol,
                abs_tol: cfg.abs_tol,
                max_steps: cfg.max_steps,
                record_stride: cfg.record_stride,
                seed: cfg.seed_amplitude,
                tail_fraction: cfg.tail_fraction,
            };
            let grid = sweep_amplitude(&spec, &settings)?;
            output::write_file(out, "seo_grid.csv", &output::grid_text(&grid))?;
        }
        Command::LmeReport => {
            let basis = su_basis(2)?;
            let z = basis.matrices[2].clone();
            let sys = LmeSystem {
                omega_h: &z * C64::from(cfg.lme_omega0 / 2.0),
                q: z,
                gamma_e: cfg.lme_gamma_e,
                eta_e: 0.0,
            };
            let canonical = lme_stability_report(&build_linear_form(&sys, &basis)?);
            let campaign = random_campaign(&cfg.lme_dims, cfg.lme_instances, cfg.lme_seed)?;
            output::write_file(
                out,
                "lme_report.txt",
                &output::lme_text(&canonical, cfg.lme_omega0, cfg.lme_gamma_e, &campaign),
            )?;
        }
        Command::Feasibility => {
            let params = nv_p1_preset(
                cfg.b_field,
                cfg.temperature,
                PresetOverrides {
                    p_az: cfg.p_az_override,
                    p_bz: None,
                    g: None,
                },
            )?;
            let report = feasibility_report(&params)?;
            output::write_file(out, "feasibility.txt", &output::feasibility_text(&report))?;
        }
    }

    let manifest = output::manifest_text(
        cli.command.name(),
        &config_hash,
        cfg.lme_seed,
        rayon::current_num_threads(),
        started.elapsed().as_millis(),
    );
    output::write_file(out, "manifest.txt", &manifest)?;
    Ok(())
}

fn alpha_sweep_spec(cfg: &RunConfig) -> Result<SweepSpec, RunError> {
    let params = cfg.system_params()?.normalized();
    let (delta, omega_b1) = cfg.sweep_axes()?;
    Ok(SweepSpec {
        delta,
        omega_b1,
        base: params,
        include_d0_term: cfg.sweep_include_d0,
    })
}
