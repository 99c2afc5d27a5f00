//! Stability analysis of linear master equations over SU(d) generator
//! bases.
//!
//! A density matrix of a d-level system is coordinatized as
//! `rho = 1/d + k . lambda` over d^2-1 Hermitian traceless generators with
//! `Tr(lambda_a lambda_b) = 2 delta_ab`. A master equation of the form
//!
//! ```text
//! drho/dt = i [rho, Omega] - gamma_e [Q, [Q, rho]] - eta_e gamma_e [Q, [Q, Omega]]
//! ```
//!
//! becomes the linear flow `dk/dt = (M - G) k + k0` with `M` real
//! antisymmetric (unitary part) and `G` real symmetric positive
//! semidefinite (damping part, a Gram matrix of commutators). Eigenvalues
//! of `M - G` therefore satisfy `Re xi <= -lambda_min(sym G)`, which is the
//! bound this module asserts; the per-instance statistics for the stronger
//! `Re xi <= -min diag G` bound are reported but never asserted, since the
//! quadratic-form argument only supports the symmetric-part version.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expm, min_symmetric_part_eigenvalue, real_matrix_eigenvalues, solve_possibly_singular};
use crate::C64;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 12;

/// Orthogonal Hermitian traceless generator basis of SU(d).
#[derive(Debug, Clone, PartialEq)]
pub struct SuBasis {
    pub dim: usize,
    /// `dim^2 - 1` matrices: symmetric pairs in lexicographic (row, col)
    /// order, then antisymmetric pairs, then the diagonal ladder.
    pub matrices: Vec<DMatrix<C64>>,
}

/// Generalized Gell-Mann construction, scaled to `Tr(l_a l_b) = 2 d_ab`.
pub fn su_basis(dim: usize) -> Result<SuBasis> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "su_basis dimension must lie in 2..={MAX_DIM} (got {dim})"
        )));
    }
    let mut matrices = Vec::with_capacity(dim * dim - 1);
    let i = C64::new(0.0, 1.0);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            m[(j, k)] = C64::from(1.0);
            m[(k, j)] = C64::from(1.0);
            matrices.push(m);
        }
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            m[(j, k)] = -i;
            m[(k, j)] = i;
            matrices.push(m);
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = C64::from(norm);
        }
        m[(l, l)] = C64::from(-(l as f64) * norm);
        matrices.push(m);
    }
    Ok(SuBasis { dim, matrices })
}

fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows()).map(|k| m[(k, k)]).sum()
}

fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Bloch coordinates `k_a = Tr(rho lambda_a) / 2` of a density matrix.
pub fn bloch_coordinates(rho: &DMatrix<C64>, basis: &SuBasis) -> Result<DVector<f64>> {
    if rho.nrows() != basis.dim || rho.ncols() != basis.dim {
        return Err(Error::InvalidInput(format!(
            "density matrix is {}x{}, basis dimension {}",
            rho.nrows(),
            rho.ncols(),
            basis.dim
        )));
    }
    let tr = trace(rho);
    if (tr - C64::from(1.0)).norm() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "density matrix trace {tr} differs from one"
        )));
    }
    if hermiticity_residual(rho) > 1e-9 {
        return Err(Error::InvalidInput("density matrix is not Hermitian".into()));
    }
    let mut k = DVector::zeros(basis.matrices.len());
    for (a, lam) in basis.matrices.iter().enumerate() {
        let t = trace(&(rho * lam));
        k[a] = 0.5 * t.re;
    }
    Ok(k)
}

/// Rebuild `rho = 1/d + k . lambda` from Bloch coordinates.
pub fn density_from_coordinates(k: &DVector<f64>, basis: &SuBasis) -> Result<DMatrix<C64>> {
    if k.len() != basis.matrices.len() {
        return Err(Error::InvalidInput(format!(
            "coordinate vector length {} does not match basis size {}",
            k.len(),
            basis.matrices.len()
        )));
    }
    let d = basis.dim;
    let mut rho = DMatrix::<C64>::identity(d, d) / C64::from(d as f64);
    for (a, lam) in basis.matrices.iter().enumerate() {
        rho += lam * C64::from(k[a]);
    }
    Ok(rho)
}

/// Ingredients of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LmeSystem {
    /// Hamiltonian over hbar; Hermitian.
    pub omega_h: DMatrix<C64>,
    /// Dimensionless Hermitian environment-coupling matrix.
    pub q: DMatrix<C64>,
    /// Damping rate, positive.
    pub gamma_e: f64,
    /// Dimensionless drift coefficient, non-negative.
    pub eta_e: f64,
}

impl LmeSystem {
    pub fn validate(&self) -> Result<()> {
        if self.omega_h.nrows() != self.omega_h.ncols() || self.q.nrows() != self.q.ncols() {
            return Err(Error::InvalidInput("system matrices must be square".into()));
        }
        if self.omega_h.nrows() != self.q.nrows() {
            return Err(Error::InvalidInput(
                "omega_h and q must share a dimension".into(),
            ));
        }
        if hermiticity_residual(&self.omega_h) > 1e-12 * (1.0 + self.omega_h.norm()) {
            return Err(Error::InvalidInput("omega_h is not Hermitian".into()));
        }
        if hermiticity_residual(&self.q) > 1e-12 * (1.0 + self.q.norm()) {
            return Err(Error::InvalidInput("q is not Hermitian".into()));
        }
        if !(self.gamma_e > 0.0) {
            return Err(Error::InvalidInput("gamma_e must be positive".into()));
        }
        if !(self.eta_e >= 0.0) {
            return Err(Error::InvalidInput("eta_e must be non-negative".into()));
        }
        Ok(())
    }
}

/// The Bloch-coordinate form `dk/dt = (M - G) k + k0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmeLinearForm {
    pub m: DMatrix<f64>,
    pub g_mat: DMatrix<f64>,
    pub k0: DVector<f64>,
}

/// Project the master equation onto the generator basis:
/// `M_ab = (i/2) Tr(Omega [l_a, l_b])`,
/// `G_ab = (gamma_e/2) Tr(-[Q, l_b][Q, l_a])`,
/// `k0_a = (-eta_e gamma_e/2) Tr([Q, [Q, Omega]] l_a)`.
pub fn build_linear_form(sys: &LmeSystem, basis: &SuBasis) -> Result<LmeLinearForm> {
    sys.validate()?;
    if sys.omega_h.nrows() != basis.dim {
        return Err(Error::InvalidInput(format!(
            "system dimension {} does not match basis dimension {}",
            sys.omega_h.nrows(),
            basis.dim
        )));
    }
    let n = basis.matrices.len();
    let commutators: Vec<DMatrix<C64>> = basis
        .matrices
        .iter()
        .map(|lam| &sys.q * lam - lam * &sys.q)
        .collect();
    let omega_products: Vec<DMatrix<C64>> = basis
        .matrices
        .iter()
        .map(|lam| &sys.omega_h * lam)
        .collect();

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut g = DMatrix::<f64>::zeros(n, n);
    let half_i = C64::new(0.0, 0.5);
    for a in 0..n {
        for b in 0..n {
            // Tr(Omega l_a l_b) via the precomputed Omega l_a.
            let t_ab = trace(&(&omega_products[a] * &basis.matrices[b]));
            let t_ba = trace(&(&omega_products[b] * &basis.matrices[a]));
            let m_ab = half_i * (t_ab - t_ba);
            m[(a, b)] = m_ab.re;
            let g_ab = -0.5 * sys.gamma_e * trace(&(&commutators[b] * &commutators[a]));
            g[(a, b)] = g_ab.re;
        }
    }

    let double_comm = {
        let inner = &sys.q * &sys.omega_h - &sys.omega_h * &sys.q;
        &sys.q * &inner - &inner * &sys.q
    };
    let mut k0 = DVector::<f64>::zeros(n);
    for a in 0..n {
        let t = trace(&(&double_comm * &basis.matrices[a]));
        k0[a] = -0.5 * sys.eta_e * sys.gamma_e * t.re;
    }
    Ok(LmeLinearForm { m, g_mat: g, k0 })
}

/// Propagate `dk/dt = (M - G) k + k0` for time `t >= 0` by the exponential
/// of the augmented matrix `[[M - G, k0], [0, 0]]`, which evaluates both
/// the homogeneous flow and the drive convolution exactly (up to the
/// exponential itself), including singular `M - G`.
pub fn lme_propagate(form: &LmeLinearForm, k_init: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "propagation time must be finite and non-negative (got {t})"
        )));
    }
    let n = form.m.nrows();
    if k_init.len() != n {
        return Err(Error::InvalidInput(
            "initial coordinate vector has the wrong length".into(),
        ));
    }
    if t == 0.0 {
        return Ok(k_init.clone());
    }
    let a = &form.m - &form.g_mat;
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&a * t));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&form.k0 * t));
    let e = expm(&aug);
    let mut out = DVector::zeros(n);
    for r in 0..n {
        let mut v = e[(r, n)];
        for c in 0..n {
            v += e[(r, c)] * k_init[c];
        }
        out[r] = v;
    }
    Ok(out)
}

/// Steady state `-(M - G)^{-1} k0`, with a consistency diagnostic when
/// `M - G` is singular.
pub fn lme_steady_state(form: &LmeLinearForm) -> Result<DVector<f64>> {
    let a = &form.m - &form.g_mat;
    solve_possibly_singular(&a, &(-&form.k0), "lme steady state")
}

/// Stability facts about one linear form.
#[derive(Debug, Clone, PartialEq)]
pub struct LmeStabilityReport {
    pub eigenvalues: Vec<C64>,
    pub max_re: f64,
    /// Smallest eigenvalue of the symmetric part of `G`.
    pub lambda_min_sym_g: f64,
    pub min_diag_g: f64,
    /// `max Re xi <= -lambda_min(sym G) + 1e-9`; guaranteed by the
    /// quadratic-form argument.
    pub sym_bound_holds: bool,
    /// `max Re xi <= -min diag G + 1e-9`; tallied only, not guaranteed.
    pub diag_bound_holds: bool,
}

pub const STABILITY_BOUND_SLACK: f64 = 1e-9;

pub fn lme_stability_report(form: &LmeLinearForm) -> LmeStabilityReport {
    let a = &form.m - &form.g_mat;
    let eigenvalues = real_matrix_eigenvalues(&a);
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let lambda_min_sym_g = min_symmetric_part_eigenvalue(&form.g_mat);
    let min_diag_g = (0..form.g_mat.nrows())
        .map(|k| form.g_mat[(k, k)])
        .fold(f64::INFINITY, f64::min);
    LmeStabilityReport {
        max_re,
        lambda_min_sym_g,
        min_diag_g,
        sym_bound_holds: max_re <= -lambda_min_sym_g + STABILITY_BOUND_SLACK,
        diag_bound_holds: max_re <= -min_diag_g + STABILITY_BOUND_SLACK,
        eigenvalues,
    }
}

/// Split `G = A + T + D` with `A` antisymmetric, `T` strictly upper
/// triangular and `D` diagonal; the eigenvalues of `T + D` are exactly
/// `diag(G)`.
pub fn decompose_damping(g: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = g.nrows();
    assert_eq!(n, g.ncols(), "decompose_damping requires a square matrix");
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut t = DMatrix::<f64>::zeros(n, n);
    let mut d = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            match r.cmp(&c) {
                std::cmp::Ordering::Greater => a[(r, c)] = g[(r, c)],
                std::cmp::Ordering::Less => {
                    a[(r, c)] = -g[(c, r)];
                    t[(r, c)] = g[(r, c)] + g[(c, r)];
                }
                std::cmp::Ordering::Equal => d[(r, r)] = g[(r, r)],
            }
        }
    }
    (a, t, d)
}

/// Deterministic random Hermitian matrix with independent standard normal
/// real and imaginary parts, symmetrized.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    // Box-Muller transform keeps the dependency surface small and the
    // stream reproducible.
    let mut normal = || {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            m[(r, c)] = C64::new(normal(), normal());
        }
    }
    let herm = (&m + &m.adjoint()) * C64::from(0.5);
    herm
}

/// One instance of the randomized stability campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignInstance {
    pub dim: usize,
    pub seed: u64,
    pub report: LmeStabilityReport,
}

/// Aggregate of a randomized campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub instances: Vec<CampaignInstance>,
    pub sym_bound_failures: usize,
    pub diag_bound_failures: usize,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Run `count` random instances cycling through `dims`, with per-instance
/// seeds derived deterministically from `master_seed`. Instances evaluate
/// in parallel; the output order is fixed by the instance index.
pub fn random_campaign(dims: &[usize], count: usize, master_seed: u64) -> Result<CampaignSummary> {
    if dims.is_empty() {
        return Err(Error::InvalidInput("campaign needs at least one dimension".into()));
    }
    for &d in dims {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidInput(format!("campaign dimension {d} out of range")));
        }
    }
    let instances: Vec<CampaignInstance> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let dim = dims[idx % dims.len()];
            let seed = splitmix64(master_seed ^ (idx as u64).wrapping_mul(0xa076_1d64_78bd_642f));
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let basis = su_basis(dim).expect("dimension already validated");
            let omega_h = random_hermitian(dim, &mut rng);
            let q = random_hermitian(dim, &mut rng);
            let gamma_e = rng.random::<f64>() + 0.1;
            let eta_e = rng.random::<f64>();
            let sys = LmeSystem {
                omega_h,
                q,
                gamma_e,
                eta_e,
            };
            let form = build_linear_form(&sys, &basis).expect("validated inputs");
            CampaignInstance {
                dim,
                seed,
                report: lme_stability_report(&form),
            }
        })
        .collect();
    let sym_bound_failures = instances.iter().filter(|i| !i.report.sym_bound_holds).count();
    let diag_bound_failures = instances.iter().filter(|i| !i.report.diag_bound_holds).count();
    Ok(CampaignSummary {
        instances,
        sym_bound_failures,
        diag_bound_failures,
    })
}

/// Smallest eigenvalue of the density matrix rebuilt from `k`; negative
/// values flag loss of positivity (monitored, never asserted).
pub fn min_density_eigenvalue(k: &DVector<f64>, basis: &SuBasis) -> Result<f64> {
    let rho = density_from_coordinates(k, basis)?;
    let eig = rho.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}
