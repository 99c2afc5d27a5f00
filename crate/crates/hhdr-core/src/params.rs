//! Physical parameter records for the coupled two-spin system.

use crate::error::{Error, Result};

/// Unit system of a [`SystemParams`] record.
///
/// Internally every computation runs in normalized units where the Larmor
/// frequency of the undriven spin equals one; absolute records are divided
/// through on construction via [`SystemParams::normalized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitsMode {
    /// All rates and frequencies in units of the undriven spin's Larmor
    /// frequency; `spin_a.omega0 == 1` exactly.
    Normalized,
    /// All rates and frequencies in rad/s.
    AbsoluteRadPerSec,
}

/// Relaxation and equilibrium data for one spin species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Larmor angular frequency.
    pub omega0: f64,
    /// Longitudinal relaxation rate (1/T1).
    pub gamma1: f64,
    /// Transverse relaxation rate (1/T2).
    pub gamma2: f64,
    /// Equilibrium longitudinal polarization, in [-1, 1].
    pub pz_eq: f64,
}

impl SpinParams {
    pub fn validate(&self, label: &str) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.gamma1.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{label}: gamma1 must be positive (got {})",
                self.gamma1
            )));
        }
        if !(self.gamma2 > 0.0 && self.gamma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{label}: gamma2 must be positive (got {})",
                self.gamma2
            )));
        }
        if !(self.pz_eq.abs() <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "{label}: pz_eq must lie in [-1, 1] (got {})",
                self.pz_eq
            )));
        }
        if !self.omega0.is_finite() || self.omega0 < 0.0 {
            return Err(Error::InvalidInput(format!(
                "{label}: omega0 must be finite and non-negative (got {})",
                self.omega0
            )));
        }
        Ok(())
    }
}

/// External drive applied to spin 'b', in its rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Drive amplitude.
    pub omega_b1: f64,
    /// Drive detuning, signed: positive means blue-detuned.
    pub delta_b: f64,
}

impl DriveParams {
    /// Drive angular frequency given the Larmor frequency of spin 'b'.
    pub fn omega_p(&self, omega_b0: f64) -> f64 {
        omega_b0 + self.delta_b
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_b1 >= 0.0 && self.omega_b1.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "drive: omega_b1 must be non-negative (got {})",
                self.omega_b1
            )));
        }
        if !self.delta_b.is_finite() {
            return Err(Error::InvalidInput("drive: delta_b must be finite".into()));
        }
        Ok(())
    }
}

/// Full parameter set of the coupled pair.
///
/// Spin 'a' is undriven and slow; spin 'b' is externally driven. The Larmor
/// frequency of spin 'b' is carried for feasibility estimates but never
/// enters the rotating-frame equations of motion (only `delta_b` does).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub spin_a: SpinParams,
    pub spin_b: SpinParams,
    pub drive: DriveParams,
    /// Dipolar coupling coefficient.
    pub g: f64,
    pub units_mode: UnitsMode,
}

impl SystemParams {
    /// Validating constructor.
    pub fn new(
        spin_a: SpinParams,
        spin_b: SpinParams,
        drive: DriveParams,
        g: f64,
        units_mode: UnitsMode,
    ) -> Result<Self> {
        let p = Self {
            spin_a,
            spin_b,
            drive,
            g,
            units_mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.spin_a.validate("spin_a")?;
        self.spin_b.validate("spin_b")?;
        self.drive.validate()?;
        if !(self.spin_a.omega0 > 0.0) {
            return Err(Error::InvalidInput(
                "spin_a: omega0 must be strictly positive".into(),
            ));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "g must be non-negative (got {})",
                self.g
            )));
        }
        if self.units_mode == UnitsMode::Normalized && self.spin_a.omega0 != 1.0 {
            return Err(Error::InvalidInput(format!(
                "normalized mode requires spin_a.omega0 == 1 exactly (got {})",
                self.spin_a.omega0
            )));
        }
        Ok(())
    }

    /// Convert to normalized units (all rates and frequencies divided by
    /// the Larmor frequency of spin 'a'). Idempotent.
    pub fn normalized(&self) -> Self {
        if self.units_mode == UnitsMode::Normalized {
            return *self;
        }
        let w = self.spin_a.omega0;
        let scale = |s: &SpinParams| SpinParams {
            omega0: s.omega0 / w,
            gamma1: s.gamma1 / w,
            gamma2: s.gamma2 / w,
            pz_eq: s.pz_eq,
        };
        SystemParams {
            spin_a: SpinParams {
                omega0: 1.0,
                ..scale(&self.spin_a)
            },
            spin_b: scale(&self.spin_b),
            drive: DriveParams {
                omega_b1: self.drive.omega_b1 / w,
                delta_b: self.drive.delta_b / w,
            },
            g: self.g / w,
            units_mode: UnitsMode::Normalized,
        }
    }

    /// Same parameters with a different drive point. Handy for sweeps.
    pub fn with_drive(&self, omega_b1: f64, delta_b: f64) -> Self {
        SystemParams {
            drive: DriveParams { omega_b1, delta_b },
            ..*self
        }
    }

    /// Same parameters with a different coupling.
    pub fn with_coupling(&self, g: f64) -> Self {
        SystemParams { g, ..*self }
    }
}

/// Reference parameter set used throughout the tests and as the shipped
/// default configuration: normalized rates
/// `gamma_a1 = 1e-2`, `gamma_a2 = 1e-4`, `gamma_b1 = 3.7e-3`,
/// `gamma_b2 = 3.7e-2`, polarizations `-5e-4` and `-1`, coupling `g = 1`,
/// drive at the blue Hartmann-Hahn point for `omega_b1 = 0.35`.
pub fn reference_params() -> SystemParams {
    let omega_b1 = 0.35;
    SystemParams {
        spin_a: SpinParams {
            omega0: 1.0,
            gamma1: 1e-2,
            gamma2: 1e-4,
            pz_eq: -5e-4,
        },
        spin_b: SpinParams {
            omega0: 0.0,
            gamma1: 3.7e-3,
            gamma2: 3.7e-2,
            pz_eq: -1.0,
        },
        drive: DriveParams {
            omega_b1,
            delta_b: (1.0 - 4.0 * omega_b1 * omega_b1).sqrt(),
        },
        g: 1.0,
        units_mode: UnitsMode::Normalized,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_rates() {
        let mut p = reference_params();
        p.spin_a.gamma2 = -1.0;
        assert!(p.validate().is_err());
        p.spin_a.gamma2 = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_out_of_range_polarization() {
        let mut p = reference_params();
        p.spin_b.pz_eq = -1.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn normalized_mode_pins_omega_a0() {
        let mut p = reference_params();
        p.spin_a.omega0 = 2.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn absolute_record_normalizes() {
        let w = 2.0 * std::f64::consts::PI * 50e6;
        let p = SystemParams {
            spin_a: SpinParams {
                omega0: w,
                gamma1: 1e-2 * w,
                gamma2: 1e-4 * w,
                pz_eq: -5e-4,
            },
            spin_b: SpinParams {
                omega0: 57.2 * w,
                gamma1: 3.7e-3 * w,
                gamma2: 3.7e-2 * w,
                pz_eq: -1.0,
            },
            drive: DriveParams {
                omega_b1: 0.35 * w,
                delta_b: 0.714 * w,
            },
            g: w,
            units_mode: UnitsMode::AbsoluteRadPerSec,
        };
        let n = p.normalized();
        assert_eq!(n.units_mode, UnitsMode::Normalized);
        assert_eq!(n.spin_a.omega0, 1.0);
        assert!((n.spin_b.gamma2 - 3.7e-2).abs() < 1e-15);
        assert!((n.g - 1.0).abs() < 1e-15);
        assert!((n.spin_b.omega0 - 57.2).abs() < 1e-12);
        // idempotent
        assert_eq!(n.normalized(), n);
    }
}
