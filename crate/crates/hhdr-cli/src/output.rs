//! Deterministic text outputs: grids, contours, trajectories, reports and
//! the run manifest. Numbers are written with 12 significant digits;
//! degenerate cells print as `nan`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hhdr_core::contour::Polyline;
use hhdr_core::dynamics::{SeoEstimate, Trajectory};
use hhdr_core::feasibility::FeasibilityReport;
use hhdr_core::lme::{CampaignSummary, LmeStabilityReport};
use hhdr_core::stability::StabilityPoint;
use hhdr_core::sweep::SweepGrid;
use hhdr_core::BlochState;

/// 12 significant digits; `nan` for degenerate cells.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.11e}")
    }
}

pub fn grid_text(grid: &SweepGrid) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-grid v1");
    let _ = writeln!(s, "# quantity: {}", grid.quantity);
    let _ = writeln!(
        s,
        "# axis delta_b_norm: min={} max={} count={}",
        num(grid.delta_values[0]),
        num(*grid.delta_values.last().unwrap()),
        grid.rows()
    );
    let _ = writeln!(
        s,
        "# axis omega_b1_norm: min={} max={} count={}",
        num(grid.omega_b1_values[0]),
        num(*grid.omega_b1_values.last().unwrap()),
        grid.columns()
    );
    let _ = writeln!(s, "# nan_cells: {}", grid.nan_cells);
    let _ = writeln!(s, "# units: frequencies in omega_a0");
    let _ = writeln!(s, "# columns: delta_b_norm,omega_b1_norm,value");
    for r in 0..grid.rows() {
        for c in 0..grid.columns() {
            let _ = writeln!(
                s,
                "{},{},{}",
                num(grid.delta_values[r]),
                num(grid.omega_b1_values[c]),
                num(grid.value(r, c))
            );
        }
    }
    s
}

pub fn contour_text(lines: &[Polyline], level: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-contour v1");
    let _ = writeln!(s, "# level: {}", num(level));
    let _ = writeln!(s, "# units: frequencies in omega_a0");
    let _ = writeln!(s, "# columns: delta_b_norm,omega_b1_norm");
    let _ = writeln!(s, "# polylines: {}", lines.len());
    for line in lines {
        let _ = writeln!(s);
        if line.closed {
            let _ = writeln!(s, "# closed");
        }
        for &(x, y) in &line.points {
            let _ = writeln!(s, "{},{}", num(x), num(y));
        }
    }
    s
}

pub fn trajectory_text(traj: &Trajectory) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-trajectory v1");
    let _ = writeln!(s, "# units: time in 1/omega_a0, polarizations dimensionless");
    let _ = writeln!(
        s,
        "# columns: t,pa_plus_re,pa_plus_im,pa_z,pb_plus_re,pb_plus_im,pb_z"
    );
    let _ = writeln!(
        s,
        "# steps: accepted={} rejected={}",
        traj.stats.accepted, traj.stats.rejected
    );
    for (t, st) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(*t),
            num(st.pa_plus.re),
            num(st.pa_plus.im),
            num(st.pa_z),
            num(st.pb_plus.re),
            num(st.pb_plus.im),
            num(st.pb_z)
        );
    }
    s
}

pub fn fixed_point_text(state: &BlochState, residual: f64, mode: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-fixed-point v1");
    let _ = writeln!(s, "# units: polarizations dimensionless");
    let _ = writeln!(s, "mode = {mode}");
    let _ = writeln!(s, "pa_plus_re = {}", num(state.pa_plus.re));
    let _ = writeln!(s, "pa_plus_im = {}", num(state.pa_plus.im));
    let _ = writeln!(s, "pa_z = {}", num(state.pa_z));
    let _ = writeln!(s, "pb_plus_re = {}", num(state.pb_plus.re));
    let _ = writeln!(s, "pb_plus_im = {}", num(state.pb_plus.im));
    let _ = writeln!(s, "pb_z = {}", num(state.pb_z));
    let _ = writeln!(s, "residual = {}", num(residual));
    s
}

pub fn stability_text(pt: &StabilityPoint, include_d0: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-stability v1");
    let _ = writeln!(s, "# units: frequencies and rates in omega_a0");
    let _ = writeln!(s, "include_d0 = {include_d0}");
    let _ = writeln!(s, "upsilon_re = {}", num(pt.upsilon.re));
    let _ = writeln!(s, "upsilon_im = {}", num(pt.upsilon.im));
    let _ = writeln!(s, "alpha = {}", num(pt.alpha));
    let _ = writeln!(s, "hh_mismatch = {}", num(pt.hh_mismatch));
    let _ = writeln!(s, "unstable = {}", pt.unstable);
    let _ = writeln!(s, "eta_re = {}", num(pt.denominators.eta.re));
    let _ = writeln!(s, "eta_im = {}", num(pt.denominators.eta.im));
    let _ = writeln!(s, "omega_r = {}", num(pt.denominators.omega_r));
    for (k, ev) in pt.eigenvalues.iter().enumerate() {
        let _ = writeln!(s, "eigenvalue_{k} = {},{}", num(ev.re), num(ev.im));
    }
    s
}

pub fn seo_text(est: &SeoEstimate, traj: &Trajectory) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-seo v1");
    let _ = writeln!(s, "# units: polarization amplitude dimensionless");
    let _ = writeln!(s, "amplitude = {}", num(est.amplitude));
    let _ = writeln!(s, "oscillating = {}", est.oscillating);
    let _ = writeln!(s, "threshold = {}", num(est.threshold));
    let _ = writeln!(s, "max_abs_longitudinal = {}", num(traj.max_abs_longitudinal()));
    let _ = writeln!(s, "accepted_steps = {}", traj.stats.accepted);
    let _ = writeln!(s, "rejected_steps = {}", traj.stats.rejected);
    s
}

pub fn lme_text(
    canonical: &LmeStabilityReport,
    omega0: f64,
    gamma_e: f64,
    campaign: &CampaignSummary,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-lme v1");
    let _ = writeln!(s, "# canonical dephasing system: omega_h = (omega0/2) sigma_z, q = sigma_z");
    let _ = writeln!(s, "canonical_omega0 = {}", num(omega0));
    let _ = writeln!(s, "canonical_gamma_e = {}", num(gamma_e));
    for (k, ev) in canonical.eigenvalues.iter().enumerate() {
        let _ = writeln!(s, "canonical_eigenvalue_{k} = {},{}", num(ev.re), num(ev.im));
    }
    let _ = writeln!(s, "canonical_max_re = {}", num(canonical.max_re));
    let _ = writeln!(s, "instances = {}", campaign.instances.len());
    let _ = writeln!(s, "sym_bound_failures = {}", campaign.sym_bound_failures);
    let _ = writeln!(s, "diag_bound_failures = {}", campaign.diag_bound_failures);
    let worst = campaign
        .instances
        .iter()
        .map(|i| i.report.max_re + i.report.lambda_min_sym_g)
        .fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(s, "worst_sym_bound_margin = {}", num(worst));
    s
}

pub fn feasibility_text(report: &FeasibilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-feasibility v1");
    let _ = writeln!(s, "# units: SI (m, K, rad/s)");
    let _ = writeln!(s, "g_required_rad_per_s = {}", num(report.g_required));
    let _ = writeln!(s, "g_required_over_2pi_hz = {}", num(report.g_required / (2.0 * std::f64::consts::PI)));
    let _ = writeln!(s, "r_threshold_m = {}", num(report.r_threshold));
    let _ = writeln!(s, "r_threshold_nm = {}", num(report.r_threshold * 1e9));
    let _ = writeln!(s, "kappa_at_threshold = {}", num(report.kappa_at_threshold));
    let _ = writeln!(s, "t_critical_k = {}", num(report.t_critical));
    let _ = writeln!(s, "p_az = {}", num(report.p_az));
    let _ = writeln!(s, "p_bz = {}", num(report.p_bz));
    s
}

pub fn manifest_text(
    command: &str,
    config_sha256: &str,
    seed: u64,
    threads: usize,
    wall_ms: u128,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# hhdr-manifest v1");
    let _ = writeln!(s, "command = {command}");
    let _ = writeln!(s, "config_sha256 = {config_sha256}");
    let _ = writeln!(s, "seed = {seed}");
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "threads = {threads}");
    let _ = writeln!(s, "wall_ms = {wall_ms}");
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
