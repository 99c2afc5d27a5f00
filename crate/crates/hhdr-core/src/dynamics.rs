//! Time-domain integration of the nonlinear mean-field equations and
//! self-excited-oscillation (SEO) detection.
//!
//! Integration runs on the six real degrees of freedom
//! `(Re P_a+, Im P_a+, P_az, Re P_b+, Im P_b+, P_bz)`, so the
//! conjugate-pair structure of the expanded state holds exactly along the
//! whole trajectory. Spin 'a' is integrated in the lab frame; the adaptive
//! step control resolves its fast precession.

use crate::error::{Error, Result};
use crate::ode::{DormandPrince5, OdeFailure, StepStats};
use crate::params::SystemParams;
use crate::state::BlochState;
use crate::steady::{coupled_fixed_point, FixedPointMode};
use crate::sweep::{sweep_map, SweepGrid, SweepSpec};
use crate::C64;

/// Settings for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    /// Final time, in units of `1/w_a0`.
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_state: BlochState,
    /// Record every n-th accepted step (the initial and final states are
    /// always recorded).
    pub record_stride: usize,
}

impl IntegrationSpec {
    /// Defaults for SEO detection: start at the zeroth-order fixed point
    /// with a small transverse seed on spin 'a', integrate for 40
    /// transverse lifetimes of spin 'a'.
    pub fn seo_default(params: &SystemParams, seed: f64) -> Result<Self> {
        let p = params.normalized();
        let mut state = coupled_fixed_point(&p, FixedPointMode::ZerothOrder)?;
        state.pa_plus += C64::from(seed);
        Ok(Self {
            t_end: 40.0 / p.spin_a.gamma2,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_steps: 20_000_000,
            initial_state: state,
            record_stride: 4,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput("t_end must be positive".into()));
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1e-2] (got {tol})"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidInput("record_stride must be positive".into()));
        }
        if !self.initial_state.is_finite() {
            return Err(Error::NonFinite("initial state".into()));
        }
        Ok(())
    }
}

/// Recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub stats: StepStats,
}

impl Trajectory {
    /// Largest `max(|P_az|, |P_bz|)` seen along the recorded samples;
    /// physical trajectories stay at or below one up to integration error.
    pub fn max_abs_longitudinal(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.pa_z.abs().max(s.pb_z.abs()))
            .fold(0.0, f64::max)
    }
}

fn rhs_real(u: &[f64; 6], p: &SystemParams) -> [f64; 6] {
    // Inlined equations of motion on real coordinates; the complex form is
    // cross-checked against `model::theta` in the tests.
    let (ga1, ga2) = (p.spin_a.gamma1, p.spin_a.gamma2);
    let (gb1, gb2) = (p.spin_b.gamma1, p.spin_b.gamma2);
    let (wb1, db) = (p.drive.omega_b1, p.drive.delta_b);
    let w_a0 = p.spin_a.omega0;
    let g = p.g;
    let (xar, xai, paz, xbr, xbi, pbz) = (u[0], u[1], u[2], u[3], u[4], u[5]);

    // dP_a+/dt = -(ga2 - i w_a0) P_a+ - i g P_az P_bz
    let dxar = -(ga2 * xar + w_a0 * xai);
    let dxai = -(ga2 * xai - w_a0 * xar) - g * paz * pbz;
    // dP_az/dt = -ga1 (P_az - eq) + 4 g Im(P_a+) P_bz
    let dpaz = -ga1 * (paz - p.spin_a.pz_eq) + 4.0 * g * xai * pbz;
    // dP_b+/dt = -(gb2 + i db) P_b+ - i wb1 P_bz + 4 i g Re(P_a+) P_b+
    let dxbr = -(gb2 * xbr - db * xbi) - 4.0 * g * xar * xbi;
    let dxbi = -(gb2 * xbi + db * xbr) - wb1 * pbz + 4.0 * g * xar * xbr;
    // dP_bz/dt = -gb1 (P_bz - eq) + 4 wb1 Im(P_b+)
    let dpbz = -gb1 * (pbz - p.spin_b.pz_eq) + 4.0 * wb1 * xbi;
    [dxar, dxai, dpaz, dxbr, dxbi, dpbz]
}

/// Integrate the nonlinear equations of motion.
pub fn integrate(params: &SystemParams, spec: &IntegrationSpec) -> Result<Trajectory> {
    let p = params.normalized();
    p.validate()?;
    spec.validate()?;
    let s0 = spec.initial_state;
    let u0 = [
        s0.pa_plus.re,
        s0.pa_plus.im,
        s0.pa_z,
        s0.pb_plus.re,
        s0.pb_plus.im,
        s0.pb_z,
    ];
    let solver = DormandPrince5 {
        rel_tol: spec.rel_tol,
        abs_tol: spec.abs_tol,
        max_steps: spec.max_steps,
        h_initial: None,
    };
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut step_index = 0usize;
    let stride = spec.record_stride;
    let mut record = |t: f64, u: &[f64; 6]| {
        let take = step_index % stride == 0 || t >= spec.t_end;
        step_index += 1;
        if take {
            times.push(t);
            states.push(BlochState::new(
                C64::new(u[0], u[1]),
                u[2],
                C64::new(u[3], u[4]),
                u[5],
            ));
        }
    };
    let result = solver.integrate(
        |_, u: &[f64; 6]| rhs_real(u, &p),
        0.0,
        spec.t_end,
        u0,
        &mut record,
    );
    match result {
        Ok((_, stats)) => Ok(Trajectory {
            times,
            states,
            stats,
        }),
        Err((OdeFailure::StepBudget { t_reached }, stats))
        | Err((OdeFailure::StepUnderflow { t_reached, .. }, stats)) => {
            Err(Error::StepBudgetExceeded {
                t_reached,
                partial: Box::new(Trajectory {
                    times,
                    states,
                    stats,
                }),
            })
        }
    }
}

/// Result of the SEO amplitude estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeoEstimate {
    /// `sqrt(2)` times the RMS of the mean-removed `Re P_a+` over the tail
    /// window; equals the phasor magnitude for a clean tone.
    pub amplitude: f64,
    /// Amplitude exceeds ten times the static-offset scale of the forced
    /// response.
    pub oscillating: bool,
    /// The threshold the verdict was taken against.
    pub threshold: f64,
}

/// Minimum samples in the tail window.
pub const MIN_TAIL_SAMPLES: usize = 100;
/// Minimum number of precession periods of spin 'a' the window must span.
pub const MIN_TAIL_PERIODS: f64 = 20.0;

/// Estimate the steady oscillation amplitude of `P_a+` from the trailing
/// `tail_fraction` of a trajectory.
///
/// The oscillation verdict compares the amplitude against ten times the
/// static-offset scale `g |P_az,eq P_bz0| / w_a0`, where `P_bz0` is the
/// driven steady-state longitudinal polarization of spin 'b': the coupling
/// displaces the transverse fixed point of spin 'a' by that amount, and an
/// oscillation must stand clear of it.
pub fn seo_amplitude(
    traj: &Trajectory,
    tail_fraction: f64,
    params: &SystemParams,
) -> Result<SeoEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "tail_fraction must lie in (0, 1] (got {tail_fraction})"
        )));
    }
    let n = traj.times.len();
    if n == 0 {
        return Err(Error::WindowTooShort("empty trajectory".into()));
    }
    let t_end = *traj.times.last().unwrap();
    let t_start = t_end - tail_fraction * (t_end - traj.times[0]);
    let first = traj.times.partition_point(|&t| t < t_start);
    let window = &traj.states[first..];
    let times = &traj.times[first..];
    if window.len() < MIN_TAIL_SAMPLES {
        return Err(Error::WindowTooShort(format!(
            "{} tail samples, need at least {MIN_TAIL_SAMPLES}",
            window.len()
        )));
    }
    let p = params.normalized();
    let span = times.last().unwrap() - times.first().unwrap();
    let period = 2.0 * std::f64::consts::PI / p.spin_a.omega0;
    if span < MIN_TAIL_PERIODS * period {
        return Err(Error::WindowTooShort(format!(
            "tail spans {:.1} precession periods, need at least {MIN_TAIL_PERIODS}",
            span / period
        )));
    }

    let m = window.len() as f64;
    let mean = window.iter().map(|s| s.pa_plus.re).sum::<f64>() / m;
    let var = window
        .iter()
        .map(|s| (s.pa_plus.re - mean).powi(2))
        .sum::<f64>()
        / m;
    let amplitude = (2.0 * var).sqrt();

    let fp = coupled_fixed_point(&p, FixedPointMode::ZerothOrder)?;
    let offset_scale = p.g * (p.spin_a.pz_eq * fp.pb_z).abs() / p.spin_a.omega0;
    let threshold = 10.0 * offset_scale;
    Ok(SeoEstimate {
        amplitude,
        oscillating: amplitude > threshold,
        threshold,
    })
}

/// Integration settings for an amplitude sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSweepSettings {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub record_stride: usize,
    /// Transverse seed added to the fixed point of spin 'a'.
    pub seed: f64,
    pub tail_fraction: f64,
}

impl AmplitudeSweepSettings {
    pub fn defaults(params: &SystemParams) -> Self {
        let p = params.normalized();
        Self {
            t_end: 40.0 / p.spin_a.gamma2,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_steps: 20_000_000,
            record_stride: 4,
            seed: 1e-6,
            tail_fraction: 0.2,
        }
    }
}

/// Map of SEO amplitudes over the drive plane. Cells where the integrator
/// or the estimator fails are NaN and counted.
pub fn sweep_amplitude(spec: &SweepSpec, settings: &AmplitudeSweepSettings) -> Result<SweepGrid> {
    sweep_map(spec, "seo_amplitude", move |params| {
        let mut ispec = IntegrationSpec::seo_default(params, settings.seed)?;
        ispec.t_end = settings.t_end;
        ispec.rel_tol = settings.rel_tol;
        ispec.abs_tol = settings.abs_tol;
        ispec.max_steps = settings.max_steps;
        ispec.record_stride = settings.record_stride;
        let traj = integrate(params, &ispec)?;
        let est = seo_amplitude(&traj, settings.tail_fraction, params)?;
        Ok(est.amplitude)
    })
}

/// Oscillation verdict map over the drive plane (1.0 oscillating, 0.0 not).
pub fn sweep_oscillating(
    spec: &SweepSpec,
    settings: &AmplitudeSweepSettings,
) -> Result<SweepGrid> {
    sweep_map(spec, "seo_oscillating", move |params| {
        let mut ispec = IntegrationSpec::seo_default(params, settings.seed)?;
        ispec.t_end = settings.t_end;
        ispec.rel_tol = settings.rel_tol;
        ispec.abs_tol = settings.abs_tol;
        ispec.max_steps = settings.max_steps;
        ispec.record_stride = settings.record_stride;
        let traj = integrate(params, &ispec)?;
        let est = seo_amplitude(&traj, settings.tail_fraction, params)?;
        Ok(if est.oscillating { 1.0 } else { 0.0 })
    })
}
