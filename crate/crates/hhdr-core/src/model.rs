//! Mean-field equations of motion and their analytic linearization.
//!
//! The coupled pair evolves as `dP/dt = -Theta(P)` with
//!
//! ```text
//! Theta_1 = conj(Theta_2) = (gamma_a2 - i w_a0) P_a+ + i g P_az P_bz
//! Theta_3 = gamma_a1 (P_az - P_az,eq) + 2 i g (P_a+ - P_a-) P_bz
//! Theta_4 = conj(Theta_5) = (gamma_b2 + i d_b) P_b+ + i w_b1 P_bz
//!                           - 2 i g (P_a+ + P_a-) P_b+
//! Theta_6 = gamma_b1 (P_bz - P_bz,eq) + 2 i w_b1 (P_b+ - P_b-)
//! ```
//!
//! in the frame rotating with the drive of spin 'b'. The Jacobian
//! `J_mn = dTheta_m/dP_n` splits into a 2x2 system block `J_x` (transverse
//! coordinates of spin 'a'), a 4x4 ancilla block `J_y`
//! (`P_az, P_b+, P_b-, P_bz`), and coupling blocks `g V_xy`, `g V_yx`.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Matrix6};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::state::BlochState;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// `Theta(P)`: the left-hand-side functions of the equations of motion,
/// so that `dP/dt = -Theta(P)` (noise forcing fixed to zero).
pub fn theta(state: &BlochState, params: &SystemParams) -> Result<[C64; 6]> {
    if !state.is_finite() {
        return Err(Error::NonFinite("theta input state".into()));
    }
    let p = params.normalized();
    let w_a0 = p.spin_a.omega0;
    let (ga1, ga2) = (p.spin_a.gamma1, p.spin_a.gamma2);
    let (gb1, gb2) = (p.spin_b.gamma1, p.spin_b.gamma2);
    let (wb1, db) = (p.drive.omega_b1, p.drive.delta_b);
    let g = p.g;

    let [pap, pam, paz, pbp, pbm, pbz] = state.expand();

    let th1 = C64::new(ga2, -w_a0) * pap + I * g * paz * pbz;
    let th3 = ga1 * (paz - C64::from(p.spin_a.pz_eq)) + 2.0 * I * g * (pap - pam) * pbz;
    let th4 = C64::new(gb2, db) * pbp + I * wb1 * pbz - 2.0 * I * g * (pap + pam) * pbp;
    let th6 = gb1 * (pbz - C64::from(p.spin_b.pz_eq)) + 2.0 * I * wb1 * (pbp - pbm);
    Ok([th1, th1.conj(), th3, th4, th4.conj(), th6])
}

/// Right-hand side of the equations of motion, `dP/dt = -Theta(P)`.
pub fn theta_rhs(state: &BlochState, params: &SystemParams) -> Result<[C64; 6]> {
    let th = theta(state, params)?;
    Ok(th.map(|z| -z))
}

/// Jacobian blocks of `Theta` at a given state.
///
/// The coupling blocks are stored without the factor `g`; assembly scales
/// them. At states with vanishing `P_a+` (every zeroth-order fixed point)
/// `jy` reduces to the closed fixed-point form; away from such states the
/// exact coupling-dependent entries of `jy` are kept so that Newton steps
/// use the true linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub jx: Matrix2<C64>,
    pub jy: Matrix4<C64>,
    pub vxy: Matrix2x4<C64>,
    pub vyx: Matrix4x2<C64>,
    /// Coupling used for assembly.
    pub g: f64,
}

pub fn jacobian_blocks(params: &SystemParams, point: &BlochState) -> Result<JacobianBlocks> {
    if !point.is_finite() {
        return Err(Error::NonFinite("jacobian evaluation point".into()));
    }
    let p = params.normalized();
    let w_a0 = p.spin_a.omega0;
    let (ga1, ga2) = (p.spin_a.gamma1, p.spin_a.gamma2);
    let (gb1, gb2) = (p.spin_b.gamma1, p.spin_b.gamma2);
    let (wb1, db) = (p.drive.omega_b1, p.drive.delta_b);
    let g = p.g;

    let [pap, pam, paz, pbp, pbm, pbz] = point.expand();
    let zero = C64::from(0.0);

    let jx = Matrix2::new(C64::new(ga2, -w_a0), zero, zero, C64::new(ga2, w_a0));

    // Ancilla block, rows/cols ordered (P_az, P_b+, P_b-, P_bz).
    let jy = Matrix4::new(
        C64::from(ga1),
        zero,
        zero,
        2.0 * I * g * (pap - pam),
        zero,
        C64::new(gb2, db) - 2.0 * I * g * (pap + pam),
        zero,
        I * wb1,
        zero,
        zero,
        C64::new(gb2, -db) + 2.0 * I * g * (pap + pam),
        -I * wb1,
        zero,
        2.0 * I * wb1,
        -2.0 * I * wb1,
        C64::from(gb1),
    );

    let vxy = Matrix2x4::new(
        I * pbz,
        zero,
        zero,
        I * paz,
        -I * pbz,
        zero,
        zero,
        -I * paz,
    );

    let vyx = Matrix4x2::new(
        2.0 * I * pbz,
        -2.0 * I * pbz,
        -2.0 * I * pbp,
        -2.0 * I * pbp,
        2.0 * I * pbm,
        2.0 * I * pbm,
        zero,
        zero,
    );

    Ok(JacobianBlocks {
        jx,
        jy,
        vxy,
        vyx,
        g,
    })
}

/// Assemble the full 6x6 Jacobian in the expanded coordinate order
/// `(P_a+, P_a-, P_az, P_b+, P_b-, P_bz)`; off-diagonal blocks scale
/// linearly with the coupling.
pub fn assemble_full_jacobian(blocks: &JacobianBlocks) -> Matrix6<C64> {
    let g = C64::from(blocks.g);
    let mut j = Matrix6::zeros();
    j.view_mut((0, 0), (2, 2)).copy_from(&blocks.jx);
    j.view_mut((2, 2), (4, 4)).copy_from(&blocks.jy);
    j.view_mut((0, 2), (2, 4)).copy_from(&(blocks.vxy * g));
    j.view_mut((2, 0), (4, 2)).copy_from(&(blocks.vyx * g));
    j
}

/// Map the complex 6x6 Jacobian to the equivalent real matrix acting on
/// `(Re P_a+, Im P_a+, P_az, Re P_b+, Im P_b+, P_bz)`. The two matrices are
/// similar, so eigenvalues are preserved; the imaginary residue of the
/// transform is a consistency check on the conjugate-pair structure.
pub fn real_representation(j: &Matrix6<C64>) -> Result<nalgebra::Matrix6<f64>> {
    // Change of basis P = C u with per-pair blocks [[1, i], [1, -i]] and
    // identity on the longitudinal coordinates.
    let mut c = Matrix6::<C64>::zeros();
    let one = C64::from(1.0);
    for &(r0, r1) in &[(0usize, 1usize), (3, 4)] {
        c[(r0, r0)] = one;
        c[(r0, r1)] = I;
        c[(r1, r0)] = one;
        c[(r1, r1)] = -I;
    }
    c[(2, 2)] = one;
    c[(5, 5)] = one;
    let c_inv = c
        .try_inverse()
        .expect("fixed change-of-basis matrix is invertible");
    let r = c_inv * j * c;
    let mut out = nalgebra::Matrix6::<f64>::zeros();
    let mut worst = 0.0_f64;
    let scale = j.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    for row in 0..6 {
        for col in 0..6 {
            worst = worst.max(r[(row, col)].im.abs());
            out[(row, col)] = r[(row, col)].re;
        }
    }
    if worst > 1e-10 * scale {
        return Err(Error::ConjugacyViolation {
            what: "jacobian lacks conjugate-pair symmetry",
            residual: worst,
            tol: 1e-10 * scale,
        });
    }
    Ok(out)
}
