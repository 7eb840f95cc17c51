use super::state::{c, DensityMatrix, Mat4, Observable, C64, DECOMP_TOL};
use crate::error::{QetError, Result};

/// `exp(-i H t)` from the Hermitian eigendecomposition `H = V D V†`.
pub fn propagator(hamiltonian: &Observable, t: f64) -> Result<Mat4> {
    let h = hamiltonian.matrix();
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QetError::Eigendecomposition(
            "non-finite Hamiltonian entry".into(),
        ));
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let orthogonality = (v.adjoint() * v - Mat4::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if orthogonality > DECOMP_TOL {
        return Err(QetError::Eigendecomposition(format!(
            "eigenvectors not orthonormal (deviation {orthogonality:e})"
        )));
    }
    let reconstruction = (v * Mat4::from_diagonal(&eig.eigenvalues.map(c)) * v.adjoint() - h)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if reconstruction > DECOMP_TOL * scale {
        return Err(QetError::Eigendecomposition(format!(
            "reconstruction error {reconstruction:e}"
        )));
    }
    let phases = eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t));
    Ok(v * Mat4::from_diagonal(&phases) * v.adjoint())
}

/// Schrödinger-picture evolution `e^{-iHt} rho e^{iHt}`.
pub fn evolve(rho: &DensityMatrix, hamiltonian: &Observable, t: f64) -> Result<DensityMatrix> {
    let u = propagator(hamiltonian, t)?;
    let out = u * rho.matrix() * u.adjoint();
    // Remove rounding-level anti-Hermitian residue before validation.
    DensityMatrix::new((out + out.adjoint()) * c(0.5))
}
