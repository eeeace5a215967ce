//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Unconditionally accurate for the small dense matrices this crate works
//! with (d <= 64), and deterministic: fixed sweep order, no pivot search.

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::matrix::{C64, ComplexSquareMatrix};
use crate::tol;

const MAX_SWEEPS: usize = 60;

/// Spectral decomposition of a Hermitian matrix.
///
/// Returns energies sorted ascending with matching orthonormal eigenvectors,
/// packaged as a [`HamiltonianSpec`]. Input must be Hermitian within 1e-9
/// (max-entry deviation); it is symmetrized before iterating so the rotations
/// see an exactly Hermitian operator.
pub fn eigh(m: &ComplexSquareMatrix) -> Result<HamiltonianSpec> {
    let dev = m.hermiticity_deviation();
    if dev > tol::effective(tol::EIGH_INPUT) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (values, vectors) = jacobi_hermitian(&m.hermitize())?;
    HamiltonianSpec::new(values, vectors)
}

/// Eigenvalues only, sorted ascending.
pub fn eigenvalues(m: &ComplexSquareMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.energies().to_vec())
}

/// Largest singular value of an arbitrary square matrix.
pub fn spectral_norm(m: &ComplexSquareMatrix) -> f64 {
    // sigma_max(M)^2 is the top eigenvalue of the Hermitian PSD matrix M^dag M.
    let gram = m.adjoint().matmul(m);
    let (values, _) = jacobi_hermitian(&gram.hermitize()).expect("Jacobi on PSD Gram matrix");
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Largest singular value of AB - BA.
pub fn commutator_norm(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    let comm = a.matmul(b).sub(&b.matmul(a));
    Ok(spectral_norm(&comm))
}

/// Cyclic-by-rows Jacobi for an exactly Hermitian matrix.
///
/// Returns eigenvalues sorted ascending and eigenvectors as rows of the
/// returned Vec (each entry is one unit eigenvector).
fn jacobi_hermitian(m: &ComplexSquareMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = ComplexSquareMatrix::identity(d);
    let scale = a.max_abs_entry();
    let target = f64::EPSILON * scale * d as f64;

    if scale == 0.0 || d == 1 {
        return Ok(extract(&a, &v));
    }

    for sweep in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= target {
            return Ok(extract(&a, &v));
        }
        if sweep == MAX_SWEEPS - 1 {
            return Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS, off });
        }

        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= f64::EPSILON * scale * 1e-3 {
                    continue;
                }
                // Phase that makes the pivot real, then a classical rotation.
                let phase = apq / b; // e^{i phi}
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary J restricted to the (p, q) plane:
                //   J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();

                // A <- J^dag A J, applied as column then row updates.
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                // The pivot is annihilated by construction; pin the
                // analytically known entries to keep the matrix Hermitian.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                // Accumulate eigenvectors: V <- V J.
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    unreachable!("loop either converges or errors on the final sweep");
}

fn extract(a: &ComplexSquareMatrix, v: &ComplexSquareMatrix) -> (Vec<f64>, Vec<Vec<C64>>) {
    let d = a.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..d).map(|i| v[(i, j)]).collect())
        .collect();
    (values, vectors)
}
