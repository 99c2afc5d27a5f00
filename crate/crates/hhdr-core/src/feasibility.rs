//! Experimental feasibility estimates for reaching the instability
//! threshold with a dipolar-coupled defect pair in diamond (an NV- center
//! as the undriven spin and a P1 center as the driven ancilla).
//!
//! Near the Hartmann-Hahn matching condition, with
//! `gamma_b1 << gamma_b2 << |delta_b|` and `|delta_b| ~ w_b1 ~ w_a0`, the
//! threshold `alpha_a = -1` reduces to `kappa |P_az P_bz| ~ 1` with the
//! cooperativity `kappa = g^2 gamma_b1 / (gamma_a2 gamma_b2^2)`.

use crate::error::{Error, Result};
use crate::params::{DriveParams, SpinParams, SystemParams, UnitsMode};

/// Fixed physical constants (2018 CODATA where applicable).
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Electron spin gyromagnetic ratio, rad/s/T.
    pub const GAMMA_E: f64 = 2.0 * std::f64::consts::PI * 28.03e9;
    /// Diamond lattice constant, m.
    pub const A_D: f64 = 3.57e-10;
    /// Dipolar coupling at one lattice-constant separation, Hz
    /// (`g / 2 pi` at `r = a_d`); empirical prefactor for the aligned
    /// electron-electron pair.
    pub const DIPOLAR_PREFACTOR_HZ: f64 = 3.6e9;
}

use constants::*;

/// Cooperativity `kappa = g^2 gamma_b1 / (gamma_a2 gamma_b2^2)`.
pub fn cooperativity(g: f64, gamma_a2: f64, gamma_b1: f64, gamma_b2: f64) -> Result<f64> {
    if !(gamma_a2 > 0.0 && gamma_b1 > 0.0 && gamma_b2 > 0.0) {
        return Err(Error::InvalidInput(
            "cooperativity: relaxation rates must be positive".into(),
        ));
    }
    if !(g >= 0.0) {
        return Err(Error::InvalidInput("cooperativity: g must be non-negative".into()));
    }
    Ok(g * g * gamma_b1 / (gamma_a2 * gamma_b2 * gamma_b2))
}

/// Dipolar coupling (rad/s) of two aligned electron spins at distance `r`
/// (m): `g / 2 pi = 3.6 GHz (r / a_d)^-3`.
pub fn dipolar_coupling(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "dipolar coupling distance must be positive (got {r})"
        )));
    }
    let ratio = r / A_D;
    Ok(2.0 * std::f64::consts::PI * DIPOLAR_PREFACTOR_HZ / (ratio * ratio * ratio))
}

/// Distance (m) at which the threshold `kappa |p_a p_b| = 1` is reached.
/// Inverse of [`dipolar_coupling`] composed with [`cooperativity`].
pub fn threshold_distance(
    gamma_a2: f64,
    gamma_b1: f64,
    gamma_b2: f64,
    p_a: f64,
    p_b: f64,
) -> Result<f64> {
    if !(gamma_a2 > 0.0 && gamma_b1 > 0.0 && gamma_b2 > 0.0) {
        return Err(Error::InvalidInput(
            "threshold distance: relaxation rates must be positive".into(),
        ));
    }
    let pol = (p_a * p_b).abs();
    if pol == 0.0 {
        return Err(Error::InvalidInput(
            "threshold distance: unreachable with vanishing polarization product".into(),
        ));
    }
    let g_required = (gamma_a2 * gamma_b2 * gamma_b2 / (gamma_b1 * pol)).sqrt();
    let base = 2.0 * std::f64::consts::PI * DIPOLAR_PREFACTOR_HZ;
    Ok(A_D * (base / g_required).cbrt())
}

/// Thermal equilibrium polarization `-tanh(hbar w0 / 2 kB T)`.
pub fn thermal_polarization(omega0: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidInput(format!(
            "temperature must be positive (got {temperature})"
        )));
    }
    if !(omega0 >= 0.0) {
        return Err(Error::InvalidInput("omega0 must be non-negative".into()));
    }
    Ok(-f64::tanh(HBAR * omega0 / (2.0 * K_B * temperature)))
}

/// Critical temperature `T_c = hbar g / kB` below which steady-state
/// entanglement of the pair could survive; mean-field analysis assumes
/// operation far above it.
pub fn critical_temperature(g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::InvalidInput(format!("g must be positive (got {g})")));
    }
    Ok(HBAR * g / K_B)
}

/// Optional overrides for [`nv_p1_preset`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOverrides {
    /// Polarization of the undriven spin, e.g. pushed toward -1 by
    /// optically-induced spin polarization. Thermal value when `None`.
    pub p_az: Option<f64>,
    /// Polarization of the driven spin. Thermal value when `None`.
    pub p_bz: Option<f64>,
    /// Coupling, rad/s. Zero when `None` (set it from
    /// [`dipolar_coupling`] for a concrete pair distance).
    pub g: Option<f64>,
}

/// Absolute-units parameter set for an NV-/P1 pair at magnetic field
/// `b_field` (T) and temperature (K).
///
/// The NV transition is taken at the microwave-resonator-limited value
/// `w_a0 = 2 pi x 50 MHz`; the P1 Larmor frequency is `gamma_e B`. Rates
/// default to `gamma_a2 = gamma_b2 = 2 pi x 0.1 MHz`,
/// `gamma_b1 = 2 pi x 0.01 MHz` and `gamma_a1 = 10 gamma_a2`. The drive
/// sits on the blue Hartmann-Hahn branch at `w_b1 = 0.35 w_a0`.
pub fn nv_p1_preset(
    b_field: f64,
    temperature: f64,
    overrides: PresetOverrides,
) -> Result<SystemParams> {
    if !(b_field > 0.0 && b_field <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "b_field must lie in (0, 1] T (got {b_field})"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let omega_a0 = two_pi * 50e6;
    let omega_b0 = GAMMA_E * b_field;
    let p_az = match overrides.p_az {
        Some(v) => v,
        None => thermal_polarization(omega_a0, temperature)?,
    };
    let p_bz = match overrides.p_bz {
        Some(v) => v,
        None => thermal_polarization(omega_b0, temperature)?,
    };
    let omega_b1 = 0.35 * omega_a0;
    let delta_b = (omega_a0 * omega_a0 - 4.0 * omega_b1 * omega_b1).sqrt();
    SystemParams::new(
        SpinParams {
            omega0: omega_a0,
            gamma1: two_pi * 1e6,
            gamma2: two_pi * 0.1e6,
            pz_eq: p_az,
        },
        SpinParams {
            omega0: omega_b0,
            gamma1: two_pi * 0.01e6,
            gamma2: two_pi * 0.1e6,
            pz_eq: p_bz,
        },
        DriveParams { omega_b1, delta_b },
        overrides.g.unwrap_or(0.0),
        UnitsMode::AbsoluteRadPerSec,
    )
}

/// Threshold summary for a given parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// Coupling needed to reach `alpha_a = -1`, rad/s.
    pub g_required: f64,
    /// Defect separation realizing `g_required`, m.
    pub r_threshold: f64,
    /// Cooperativity at `g_required` (times `|p_a p_b|` it equals one).
    pub kappa_at_threshold: f64,
    /// Entanglement critical temperature at `g_required`, K.
    pub t_critical: f64,
    pub p_az: f64,
    pub p_bz: f64,
}

/// Compose the threshold estimates for an absolute-units parameter set.
pub fn feasibility_report(params: &SystemParams) -> Result<FeasibilityReport> {
    if params.units_mode != UnitsMode::AbsoluteRadPerSec {
        return Err(Error::InvalidInput(
            "feasibility report needs absolute units".into(),
        ));
    }
    params.validate()?;
    let (p_az, p_bz) = (params.spin_a.pz_eq, params.spin_b.pz_eq);
    let r_threshold = threshold_distance(
        params.spin_a.gamma2,
        params.spin_b.gamma1,
        params.spin_b.gamma2,
        p_az,
        p_bz,
    )?;
    let g_required = dipolar_coupling(r_threshold)?;
    let kappa_at_threshold = cooperativity(
        g_required,
        params.spin_a.gamma2,
        params.spin_b.gamma1,
        params.spin_b.gamma2,
    )?;
    let t_critical = critical_temperature(g_required)?;
    Ok(FeasibilityReport {
        g_required,
        r_threshold,
        kappa_at_threshold,
        t_critical,
        p_az,
        p_bz,
    })
}
