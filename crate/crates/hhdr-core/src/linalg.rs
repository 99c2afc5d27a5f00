//! Thin dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector, Matrix6};

use crate::error::{Error, Result};
use crate::model::real_representation;
use crate::C64;

/// Eigenvalues of a 6x6 complex matrix with the conjugate-pair symmetry of
/// the coupled-model Jacobian, computed through its similar real
/// representation (real Schur form).
pub fn conjugate_pair_eigenvalues(j: &Matrix6<C64>) -> Result<[C64; 6]> {
    let r = real_representation(j)?;
    let ev = r.complex_eigenvalues();
    let mut out = [C64::from(0.0); 6];
    for (k, z) in ev.iter().enumerate() {
        out[k] = C64::new(z.re, z.im);
    }
    // Deterministic order: by real part, then imaginary part.
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(out)
}

/// Eigenvalues of a general real square matrix.
pub fn real_matrix_eigenvalues(m: &DMatrix<f64>) -> Vec<C64> {
    let ev = m.clone().complex_eigenvalues();
    let mut out: Vec<C64> = ev.iter().map(|z| C64::new(z.re, z.im)).collect();
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    out
}

/// Smallest eigenvalue of the symmetric part `(M + M^T)/2`.
pub fn min_symmetric_part_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Matrix exponential of a real square matrix by scaling and squaring with
/// a 13th-order Pade approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    // Scale so the Pade approximant converges comfortably.
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a_scaled = a / 2f64.powi(s as i32);

    // Pade(13) coefficients.
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9])
        + &a6 * B[7]
        + &a4 * B[5]
        + &a2 * B[3]
        + &id * B[1];
    let u = &a_scaled * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8])
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &id * B[0];
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is well conditioned after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Solve `A x = b` through a rank-revealing SVD, reporting whether the
/// system is consistent. Used for steady states of possibly singular
/// linear evolutions.
pub fn solve_possibly_singular(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    what: &'static str,
) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = smax * 1e-12 * a.nrows() as f64;
    let x = svd
        .solve(b, tol)
        .map_err(|e| Error::InvalidInput(format!("{what}: {e}")))?;
    let residual = (a * &x - b).norm();
    if residual > 1e-9 * b.norm().max(1.0) {
        return Err(Error::NoSteadyState(format!(
            "{what}: inconsistent singular system (residual {residual:.3e})"
        )));
    }
    Ok(x)
}
