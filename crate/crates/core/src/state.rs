//! Density matrices and the state-level operations (validation, dephasing,
//! unitary evolution).

use serde::{Deserialize, Serialize};

use crate::eigh::eigh;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::matrix::{normalized, C64, ComplexSquareMatrix};
use crate::tol;
use crate::unitary::{time_ordered_unitary, UnitarySpec};

/// A positive unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    matrix: ComplexSquareMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    /// Pure state |psi><psi| from a (not necessarily normalized) vector.
    pub fn from_pure(psi: &[C64]) -> Self {
        let v = normalized(psi);
        Self { matrix: ComplexSquareMatrix::outer(&v, &v) }
    }

    /// identity / d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexSquareMatrix::identity(dim).scale_re(1.0 / dim as f64) }
    }

    /// Wraps a matrix that is known to satisfy the invariants by
    /// construction (outputs of dephasing, evolution, Gibbs weights).
    pub(crate) fn from_trusted(matrix: ComplexSquareMatrix) -> Self {
        Self { matrix }
    }

    /// <i|rho|i> in the eigenbasis of `h`.
    pub fn population(&self, h: &HamiltonianSpec, i: usize) -> f64 {
        self.matrix.sandwich(h.eigenvector(i), h.eigenvector(i)).re
    }

    /// tr(rho * op).
    pub fn expectation(&self, op: &ComplexSquareMatrix) -> C64 {
        self.matrix.trace_product(op)
    }
}

/// Checks the density-matrix invariants and wraps the input.
///
/// Hermiticity and trace are max-entry checks at 1e-10; the spectrum may dip
/// to -1e-10. Each failure reports the measured deviation.
pub fn validate_density(m: &ComplexSquareMatrix) -> Result<DensityMatrix> {
    let herm_dev = m.hermiticity_deviation();
    if herm_dev > tol::effective(tol::DENSITY_HERMITIAN) {
        return Err(Error::NotHermitian { deviation: herm_dev });
    }
    let trace_dev = (m.trace() - C64::new(1.0, 0.0)).norm();
    if trace_dev > tol::effective(tol::DENSITY_TRACE) {
        return Err(Error::NotUnitTrace { deviation: trace_dev });
    }
    let spectrum = eigh(m)?;
    let min_eigenvalue = spectrum.energy(0);
    if min_eigenvalue < -tol::effective(tol::DENSITY_POSITIVITY) {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix::from_trusted(m.clone()))
}

/// Removes all coherences between distinct eigenspaces of `h`:
/// rho -> sum_i P_i rho P_i over the (degeneracy-merged) eigenprojectors.
pub fn dephase(rho: &DensityMatrix, h: &HamiltonianSpec) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: h.dim() });
    }
    let mut out = ComplexSquareMatrix::zeros(rho.dim());
    for (proj, _) in h.eigenspace_projectors() {
        out = out.add(&proj.matmul(rho.matrix()).matmul(&proj));
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// U rho U^dag for the drive described by `u`.
pub fn evolve(rho: &DensityMatrix, u: &UnitarySpec) -> Result<DensityMatrix> {
    let um = time_ordered_unitary(u)?;
    if rho.dim() != um.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: um.dim() });
    }
    Ok(DensityMatrix::from_trusted(
        um.matmul(rho.matrix()).matmul(&um.adjoint()),
    ))
}
