//! Mean-field state of the coupled pair.
//!
//! The state is stored in a canonical reduced form: one complex transverse
//! and one real longitudinal component per spin. The conjugate-pair
//! relations `P_- = conj(P_+)` of the expanded 6-vector are therefore
//! structural and cannot drift during integration.

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance for accepting an expanded 6-vector as conjugate-symmetric.
pub const CONJUGACY_TOL: f64 = 1e-9;

/// Canonical reduced state: `(P_a+, P_az, P_b+, P_bz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub pa_plus: C64,
    pub pa_z: f64,
    pub pb_plus: C64,
    pub pb_z: f64,
}

impl BlochState {
    pub fn new(pa_plus: C64, pa_z: f64, pb_plus: C64, pb_z: f64) -> Self {
        Self {
            pa_plus,
            pa_z,
            pb_plus,
            pb_z,
        }
    }

    /// Expanded 6-component view `(P_a+, P_a-, P_az, P_b+, P_b-, P_bz)`.
    pub fn expand(&self) -> [C64; 6] {
        [
            self.pa_plus,
            self.pa_plus.conj(),
            C64::new(self.pa_z, 0.0),
            self.pb_plus,
            self.pb_plus.conj(),
            C64::new(self.pb_z, 0.0),
        ]
    }

    /// Rebuild the reduced state from an expanded 6-vector, enforcing the
    /// conjugate-pair structure within `tol`.
    pub fn reduce(full: &[C64; 6], tol: f64) -> Result<Self> {
        let scale = full.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let checks: [(&'static str, f64); 4] = [
            ("P_a- != conj(P_a+)", (full[1] - full[0].conj()).norm()),
            ("P_b- != conj(P_b+)", (full[4] - full[3].conj()).norm()),
            ("P_az not real", full[2].im.abs()),
            ("P_bz not real", full[5].im.abs()),
        ];
        for (what, residual) in checks {
            if residual > tol * scale {
                return Err(Error::ConjugacyViolation {
                    what,
                    residual,
                    tol: tol * scale,
                });
            }
        }
        Ok(Self {
            pa_plus: full[0],
            pa_z: full[2].re,
            pb_plus: full[3],
            pb_z: full[5].re,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.pa_plus.re.is_finite()
            && self.pa_plus.im.is_finite()
            && self.pa_z.is_finite()
            && self.pb_plus.re.is_finite()
            && self.pb_plus.im.is_finite()
            && self.pb_z.is_finite()
    }
}

/// Lab-frame transverse components of a rotating-frame coherence:
/// `P_x = 2 Re(p_+ e^{i w t})`, `P_y = 2 Im(p_+ e^{i w t})`, so that
/// `P_x^2 + P_y^2 = 4 |p_+|^2` at all times.
pub fn lab_frame_transverse(p_plus: C64, omega: f64, t: f64) -> (f64, f64) {
    let z = p_plus * C64::from_polar(1.0, omega * t);
    (2.0 * z.re, 2.0 * z.im)
}

/// Inverse of [`lab_frame_transverse`].
pub fn rotating_frame_coherence(px: f64, py: f64, omega: f64, t: f64) -> C64 {
    0.5 * C64::new(px, py) * C64::from_polar(1.0, -omega * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_matches_reduced_fields() {
        let s = BlochState::new(C64::new(1.0, 2.0), 0.5, C64::new(0.0, 0.0), -1.0);
        let e = s.expand();
        assert_eq!(e[0], C64::new(1.0, 2.0));
        assert_eq!(e[1], C64::new(1.0, -2.0));
        assert_eq!(e[2], C64::new(0.5, 0.0));
        assert_eq!(e[5], C64::new(-1.0, 0.0));
    }

    #[test]
    fn reduce_rejects_conjugacy_violation() {
        let s = BlochState::new(C64::new(0.3, -0.1), 0.2, C64::new(0.05, 0.02), -0.9);
        let mut e = s.expand();
        e[1] += C64::new(1e-3, 0.0);
        match BlochState::reduce(&e, CONJUGACY_TOL) {
            Err(Error::ConjugacyViolation { .. }) => {}
            other => panic!("expected conjugacy violation, got {other:?}"),
        }
    }

    #[test]
    fn lab_frame_magnitude_is_time_invariant() {
        let p = C64::new(0.21, -0.08);
        let m0 = {
            let (x, y) = lab_frame_transverse(p, 1.0, 0.0);
            x * x + y * y
        };
        for &t in &[0.1, 1.7, 42.0] {
            let (x, y) = lab_frame_transverse(p, 1.0, t);
            assert!((x * x + y * y - m0).abs() < 1e-14);
            assert!((x * x + y * y - 4.0 * p.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn lab_frame_round_trip() {
        let p = C64::new(-0.11, 0.37);
        let (x, y) = lab_frame_transverse(p, 0.83, 5.5);
        let back = rotating_frame_coherence(x, y, 0.83, 5.5);
        assert!((back - p).norm() < 1e-14);
    }

    #[test]
    fn lab_frame_real_coherence_at_t0() {
        let (x, y) = lab_frame_transverse(C64::new(0.4, 0.0), 1.0, 0.0);
        assert_eq!(x, 0.8);
        assert_eq!(y, 0.0);
    }
}
