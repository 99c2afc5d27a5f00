//! Rotating-frame steady states of a single driven spin and fixed points of
//! the coupled system.
//!
//! A single damped spin driven at detuning `delta` with amplitude `omega1`
//! obeys, in the rotating frame and coordinates `(P_+, P_-, P_z)`,
//! `dP/dt + J P = (0, 0, gamma1 * pz_eq)` with the constant matrix of
//! [`single_spin_matrix`]. Its unique steady state is available in closed
//! form and doubles as the zeroth-order fixed point of the coupled pair.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{assemble_full_jacobian, jacobian_blocks, theta};
use crate::params::SystemParams;
use crate::state::BlochState;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Drive record for one spin in its rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSpinDrive {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Detuning of the drive from the Larmor frequency.
    pub delta: f64,
    /// Drive amplitude.
    pub omega1: f64,
    /// Equilibrium longitudinal polarization.
    pub pz_eq: f64,
}

impl SingleSpinDrive {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::InvalidInput(
                "single-spin drive: relaxation rates must be positive".into(),
            ));
        }
        if !(self.delta.is_finite() && self.omega1.is_finite() && self.pz_eq.is_finite()) {
            return Err(Error::InvalidInput(
                "single-spin drive: all fields must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Saturation denominator `1 + 4 w1^2/(g1 g2) + delta^2/g2^2`, always
    /// at least one.
    pub fn saturation_denominator(&self) -> f64 {
        1.0 + 4.0 * self.omega1 * self.omega1 / (self.gamma1 * self.gamma2)
            + self.delta * self.delta / (self.gamma2 * self.gamma2)
    }
}

/// Steady state of a single driven spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState3 {
    pub p_plus: C64,
    pub p_z: f64,
}

impl SteadyState3 {
    pub fn p_minus(&self) -> C64 {
        self.p_plus.conj()
    }
}

/// Rotating-frame evolution matrix in coordinates `(P_+, P_-, P_z)`.
pub fn single_spin_matrix(d: &SingleSpinDrive) -> Result<Matrix3<C64>> {
    d.validate()?;
    let zero = C64::from(0.0);
    Ok(Matrix3::new(
        C64::new(d.gamma2, -d.delta),
        zero,
        I * d.omega1,
        zero,
        C64::new(d.gamma2, d.delta),
        -I * d.omega1,
        2.0 * I * d.omega1,
        -2.0 * I * d.omega1,
        C64::from(d.gamma1),
    ))
}

/// Closed-form steady state, the exact solution of
/// `single_spin_matrix(d) * P = (0, 0, gamma1 * pz_eq)`.
pub fn single_spin_steady_state(d: &SingleSpinDrive) -> Result<SteadyState3> {
    d.validate()?;
    let den = d.saturation_denominator();
    let r2 = d.delta / d.gamma2;
    let p_z = (1.0 + r2 * r2) * d.pz_eq / den;
    let p_plus = (d.omega1 / d.gamma2) * C64::new(r2, -1.0) * d.pz_eq / den;
    Ok(SteadyState3 { p_plus, p_z })
}

/// Drive record of spin 'b' inside a coupled system.
///
/// The coupled model's rotating frame carries the opposite detuning sign
/// from [`single_spin_matrix`] (its `P_+` row reads `gamma2 + i delta_b`),
/// hence the negation here.
pub fn spin_b_drive(params: &SystemParams) -> SingleSpinDrive {
    let p = params.normalized();
    SingleSpinDrive {
        gamma1: p.spin_b.gamma1,
        gamma2: p.spin_b.gamma2,
        delta: -p.drive.delta_b,
        omega1: p.drive.omega_b1,
        pz_eq: p.spin_b.pz_eq,
    }
}

/// How to compute the fixed point of the coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMode {
    /// Closed form at zeroth order in the coupling: spin 'a' at thermal
    /// equilibrium with no coherence, spin 'b' at its driven steady state.
    ZerothOrder,
    /// Newton refinement of the zeroth-order seed using the analytic
    /// Jacobian, to residual `NEWTON_RESIDUAL_TOL`.
    Newton,
}

/// Residual tolerance for Newton refinement (normalized units).
pub const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERATIONS: usize = 50;

/// Fixed point of the coupled equations of motion.
pub fn coupled_fixed_point(params: &SystemParams, mode: FixedPointMode) -> Result<BlochState> {
    let p = params.normalized();
    p.validate()?;
    let ss = single_spin_steady_state(&spin_b_drive(&p))?;
    let seed = BlochState::new(C64::from(0.0), p.spin_a.pz_eq, ss.p_plus, ss.p_z);
    match mode {
        FixedPointMode::ZerothOrder => Ok(seed),
        FixedPointMode::Newton => newton_refine(&p, seed),
    }
}

fn residual_norm(th: &[C64; 6]) -> f64 {
    th.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn newton_refine(params: &SystemParams, seed: BlochState) -> Result<BlochState> {
    let mut state = seed;
    let mut res = residual_norm(&theta(&state, params)?);
    for iteration in 0..NEWTON_MAX_ITERATIONS {
        if res <= NEWTON_RESIDUAL_TOL {
            return Ok(state);
        }
        let j = assemble_full_jacobian(&jacobian_blocks(params, &state)?);
        let th = theta(&state, params)?;
        let rhs = nalgebra::Vector6::from_iterator(th.iter().copied());
        let delta = j.lu().solve(&rhs).ok_or(Error::Degenerate {
            what: "newton jacobian solve",
            det_abs: 0.0,
        })?;
        let mut full = state.expand();
        for n in 0..6 {
            full[n] -= delta[n];
        }
        // Re-symmetrize: roundoff in the complex solve can leave the pair
        // structure off by machine epsilon.
        state = BlochState::new(
            0.5 * (full[0] + full[1].conj()),
            full[2].re,
            0.5 * (full[3] + full[4].conj()),
            full[5].re,
        );
        res = residual_norm(&theta(&state, params)?);
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                residual: res,
                iterations: iteration + 1,
            });
        }
    }
    if res <= NEWTON_RESIDUAL_TOL {
        Ok(state)
    } else {
        Err(Error::NonConvergence {
            residual: res,
            iterations: NEWTON_MAX_ITERATIONS,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::reference_params;
    use nalgebra::Vector3;

    fn demo_drive() -> SingleSpinDrive {
        SingleSpinDrive {
            gamma1: 3.7e-3,
            gamma2: 3.7e-2,
            delta: -0.714,
            omega1: 0.35,
            pz_eq: -1.0,
        }
    }

    #[test]
    fn undriven_matrix_is_diagonal() {
        let d = SingleSpinDrive {
            omega1: 0.0,
            ..demo_drive()
        };
        let j = single_spin_matrix(&d).unwrap();
        assert_eq!(j[(0, 0)], C64::new(d.gamma2, -d.delta));
        assert_eq!(j[(1, 1)], C64::new(d.gamma2, d.delta));
        assert_eq!(j[(2, 2)], C64::from(d.gamma1));
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(j[(r, c)], C64::from(0.0));
                }
            }
        }
    }

    #[test]
    fn matrix_has_conjugation_symmetry() {
        // Swapping the two transverse rows/columns and conjugating
        // reproduces the matrix.
        let j = single_spin_matrix(&demo_drive()).unwrap();
        let perm = [1usize, 0, 2];
        for r in 0..3 {
            for c in 0..3 {
                let other = j[(perm[r], perm[c])].conj();
                assert!((j[(r, c)] - other).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn undriven_steady_state_is_thermal() {
        let d = SingleSpinDrive {
            omega1: 0.0,
            ..demo_drive()
        };
        let ss = single_spin_steady_state(&d).unwrap();
        assert_eq!(ss.p_plus, C64::from(0.0));
        assert!((ss.p_z - d.pz_eq).abs() < 1e-15);
    }

    #[test]
    fn resonant_half_saturation_point() {
        // delta = 0 and 4 w1^2 = g1 g2 halve the longitudinal polarization.
        let gamma1 = 2e-3;
        let gamma2 = 5e-2;
        let d = SingleSpinDrive {
            gamma1,
            gamma2,
            delta: 0.0,
            omega1: 0.5 * (gamma1 * gamma2).sqrt(),
            pz_eq: -0.8,
        };
        let ss = single_spin_steady_state(&d).unwrap();
        assert!((ss.p_z - d.pz_eq / 2.0).abs() < 1e-15);
        let expect = -I * (d.omega1 / d.gamma2) * d.pz_eq / 2.0;
        assert!((ss.p_plus - expect).norm() < 1e-15);
    }

    #[test]
    fn steady_state_solves_the_linear_system() {
        // 1000 random drive records against a numeric 3x3 solve.
        let mut rng = 0x853c49e6748fea9b_u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            // gamma2 >= gamma1/2 keeps the draws in the physical regime
            // (T2 <= 2 T1), where saturation cannot amplify polarization.
            let gamma1 = 1e-4_f64.powf(next());
            let d = SingleSpinDrive {
                gamma1,
                gamma2: gamma1 * 0.5 * 1e3_f64.powf(next()),
                delta: 4.0 * next() - 2.0,
                omega1: 2.0 * next(),
                pz_eq: 2.0 * next() - 1.0,
            };
            let j = single_spin_matrix(&d).unwrap();
            let rhs = Vector3::new(
                C64::from(0.0),
                C64::from(0.0),
                C64::from(d.gamma1 * d.pz_eq),
            );
            let x = j.lu().solve(&rhs).expect("well-conditioned solve");
            let ss = single_spin_steady_state(&d).unwrap();
            let scale = d.pz_eq.abs().max(1e-3);
            assert!((ss.p_plus - x[0]).norm() <= 1e-12 * scale);
            assert!((ss.p_minus() - x[1]).norm() <= 1e-12 * scale);
            assert!((C64::from(ss.p_z) - x[2]).norm() <= 1e-12 * scale);
            // saturation never amplifies polarization
            assert!(ss.p_z.abs() <= d.pz_eq.abs() + 1e-15);
            assert!(ss.p_plus.norm() <= d.pz_eq.abs() + 1e-15);
        }
    }

    #[test]
    fn spin_b_specialization_matches_coupled_model_closed_form() {
        // The driven-spin fixed point written in the coupled model's own
        // detuning convention:
        //   P_bz0 = (1 + d^2/g2^2) pz_eq / den
        //   P_b+0 = (w1/g2) (-d/g2 - i) pz_eq / den
        let params = reference_params();
        let p = params.normalized();
        let ss = single_spin_steady_state(&spin_b_drive(&p)).unwrap();
        let (g1, g2) = (p.spin_b.gamma1, p.spin_b.gamma2);
        let (w1, db) = (p.drive.omega_b1, p.drive.delta_b);
        let den = 1.0 + 4.0 * w1 * w1 / (g1 * g2) + db * db / (g2 * g2);
        let pbz0 = (1.0 + db * db / (g2 * g2)) * p.spin_b.pz_eq / den;
        let pbp0 = (w1 / g2) * C64::new(-db / g2, -1.0) * p.spin_b.pz_eq / den;
        assert!((ss.p_z - pbz0).abs() < 1e-15);
        assert!((ss.p_plus - pbp0).norm() < 1e-15);
    }

    #[test]
    fn zeroth_order_fixed_point_reference_values() {
        let params = reference_params();
        let fp = coupled_fixed_point(&params, FixedPointMode::ZerothOrder).unwrap();
        assert_eq!(fp.pa_plus, C64::from(0.0));
        assert_eq!(fp.pa_z, -5e-4);
        // frozen from the closed form at (delta_b, omega_b1) = (sqrt(0.51), 0.35)
        assert!((fp.pb_z - (-0.094_499_007_552_432_69)).abs() < 1e-15);
        assert!((fp.pb_plus - C64::new(0.046_189_789_496_705_88, 0.002_393_109_765_754_285_5)).norm() < 1e-15);
    }

    #[test]
    fn newton_converges_and_scales_linearly_in_g() {
        let params = reference_params().with_coupling(0.01);
        let seed = coupled_fixed_point(&params, FixedPointMode::ZerothOrder).unwrap();
        let fp = coupled_fixed_point(&params, FixedPointMode::Newton).unwrap();
        let res = residual_norm(&theta(&fp, &params).unwrap());
        assert!(res <= NEWTON_RESIDUAL_TOL, "residual {res}");

        let dist = |a: &BlochState, b: &BlochState| {
            ((a.pa_plus - b.pa_plus).norm_sqr()
                + (a.pa_z - b.pa_z).powi(2)
                + (a.pb_plus - b.pb_plus).norm_sqr()
                + (a.pb_z - b.pb_z).powi(2))
            .sqrt()
        };
        let d1 = dist(&fp, &seed);

        let params2 = params.with_coupling(0.005);
        let seed2 = coupled_fixed_point(&params2, FixedPointMode::ZerothOrder).unwrap();
        let fp2 = coupled_fixed_point(&params2, FixedPointMode::Newton).unwrap();
        let d2 = dist(&fp2, &seed2);
        // distance from the seed scales as O(g)
        let ratio = d1 / d2;
        assert!(
            (ratio - 2.0).abs() < 0.2,
            "expected O(g) scaling, ratio {ratio}"
        );
    }

    #[test]
    fn zeroth_order_residual_scales_linearly_in_g() {
        let params1 = reference_params().with_coupling(0.02);
        let params2 = reference_params().with_coupling(0.01);
        let r1 = residual_norm(
            &theta(
                &coupled_fixed_point(&params1, FixedPointMode::ZerothOrder).unwrap(),
                &params1,
            )
            .unwrap(),
        );
        let r2 = residual_norm(
            &theta(
                &coupled_fixed_point(&params2, FixedPointMode::ZerothOrder).unwrap(),
                &params2,
            )
            .unwrap(),
        );
        assert!(((r1 / r2) - 2.0).abs() < 1e-6, "ratio {}", r1 / r2);
    }
}
