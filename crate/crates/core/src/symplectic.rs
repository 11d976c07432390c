//! Ground state of the quadratic Hamiltonian via its symplectic
//! (Williamson) normal form, working in the real quadrature picture.
//!
//! For `H = ½ zᵀ K z` with K positive definite and `[z_i, z_j] = i J_ij`, the
//! ground-state covariance is
//! `V = ½ K^(−1/2) |A| K^(−1/2)` with `A = K^(1/2) J K^(1/2)`. The symmetric
//! matrix `AᵀA` has only the two eigenvalues ω₊², ω₋², so
//! `|A| = (AᵀA + ω₊ω₋)/(ω₊ + ω₋)` and the square roots cancel:
//!
//! ```text
//! V = (Jᵀ K J + ω₊ω₋ K⁻¹) / (2(ω₊ + ω₋))
//! ```
//!
//! ω₊ comes from a symmetric eigensolve of AᵀA and ω₋ from
//! `det K = ω₊² ω₋²`, so nothing here touches the drift-matrix mode vectors.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fluctuations::{GroundStateStats, QuadraticCoeffs};

/// Symplectic form over `(x_a, p_a, x_b, p_b)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

fn symmetric_sqrt(m: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = SymmetricEigen::new(*m);
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * Matrix4::from_diagonal(&d) * eig.eigenvectors.transpose()
}

struct Williamson {
    k: Matrix4<f64>,
    k_inv: Matrix4<f64>,
    omega_plus: f64,
    omega_minus: f64,
}

fn williamson(q: &QuadraticCoeffs) -> Result<Williamson> {
    let k = q.quadrature_matrix();
    let chol = k.cholesky().ok_or_else(|| {
        Error::Unstable(format!(
            "quadrature Hamiltonian not positive definite (smallest eigenvalue {:e})",
            SymmetricEigen::new(k).eigenvalues.min()
        ))
    })?;
    let k_inv = chol.inverse();
    let sqrt_k = symmetric_sqrt(&k);
    let a = sqrt_k * symplectic_form() * sqrt_k;
    let omega_plus = SymmetricEigen::new(a.transpose() * a).eigenvalues.max().sqrt();
    let omega_minus = k.determinant().max(0.0).sqrt() / omega_plus;
    Ok(Williamson {
        k,
        k_inv,
        omega_plus,
        omega_minus,
    })
}

/// Symmetrized ground-state covariance `½⟨{z_i, z_j}⟩` over
/// `(x_a, p_a, x_b, p_b)`.
pub fn ground_state_covariance(q: &QuadraticCoeffs) -> Result<Matrix4<f64>> {
    let w = williamson(q)?;
    let j = symplectic_form();
    let (wp, wm) = (w.omega_plus, w.omega_minus);
    Ok((j.transpose() * w.k * j + w.k_inv * (wp * wm)) / (2.0 * (wp + wm)))
}

/// Symplectic eigenvalues in ascending order (ω₋, ω₊).
pub fn symplectic_eigenvalues(q: &QuadraticCoeffs) -> Result<(f64, f64)> {
    let w = williamson(q)?;
    Ok((w.omega_minus, w.omega_plus))
}

/// ⟨a†a⟩ and ⟨b†b⟩ from the Williamson covariance, using
/// `a†a = (x² + p² − 1)/2`.
pub fn ground_state_populations(q: &QuadraticCoeffs) -> Result<GroundStateStats> {
    let v = ground_state_covariance(q)?;
    Ok(GroundStateStats {
        n_photon: 0.5 * (v[(0, 0)] + v[(1, 1)] - 1.0),
        n_atom: 0.5 * (v[(2, 2)] + v[(3, 3)] - 1.0),
    })
}
