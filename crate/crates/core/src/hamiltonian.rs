//! Hamiltonians as explicit spectral data.

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{inner, pairs_to_vector, vector_to_pairs, C64, ComplexSquareMatrix};
use crate::tol;

/// Eigenvalues and orthonormal eigenvectors of a Hamiltonian.
///
/// Energies are sorted ascending (hbar = 1, k_B = 1); `eigenvectors[i]` is the
/// unit eigenvector for `energies[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    energies: Vec<f64>,
    eigenvectors: Vec<Vec<C64>>,
    degenerate: bool,
}

impl HamiltonianSpec {
    /// Validates orthonormality, sorts by energy and flags degeneracies.
    pub fn new(energies: Vec<f64>, eigenvectors: Vec<Vec<C64>>) -> Result<Self> {
        let d = energies.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if eigenvectors.len() != d {
            return Err(Error::InvalidInput(format!(
                "{d} energies but {} eigenvectors",
                eigenvectors.len()
            )));
        }
        for v in &eigenvectors {
            if v.len() != d {
                return Err(Error::InvalidInput(
                    "eigenvector length must equal the spectrum size".into(),
                ));
            }
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("energies must be finite".into()));
        }

        let ortho_tol = tol::effective(tol::ORTHONORMALITY);
        for i in 0..d {
            for j in i..d {
                let overlap = inner(&eigenvectors[i], &eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (overlap - C64::new(target, 0.0)).norm();
                if dev > ortho_tol {
                    return Err(Error::InvalidInput(format!(
                        "eigenvectors {i} and {j} not orthonormal: deviation {dev:.3e}"
                    )));
                }
            }
        }

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let energies: Vec<f64> = order.iter().map(|&k| energies[k]).collect();
        let eigenvectors: Vec<Vec<C64>> =
            order.iter().map(|&k| eigenvectors[k].clone()).collect();

        let dtol = degeneracy_tol(&energies);
        let degenerate = energies.windows(2).any(|w| (w[1] - w[0]).abs() <= dtol);

        Ok(Self { energies, eigenvectors, degenerate })
    }

    /// Diagonal Hamiltonian in the standard basis.
    pub fn from_diagonal(energies: &[f64]) -> Result<Self> {
        let d = energies.len();
        let vectors = (0..d).map(|k| crate::matrix::basis_vector(d, k)).collect();
        Self::new(energies.to_vec(), vectors)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.energies[i]
    }

    pub fn eigenvectors(&self) -> &[Vec<C64>] {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> &[C64] {
        &self.eigenvectors[i]
    }

    /// Whether any two levels sit closer than the degeneracy tolerance.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Scale-aware tolerance below which two energies count as one level.
    pub fn degeneracy_tol(&self) -> f64 {
        degeneracy_tol(&self.energies)
    }

    /// Rank-1 projector |i><i| onto a single eigenvector.
    pub fn projector(&self, i: usize) -> ComplexSquareMatrix {
        ComplexSquareMatrix::outer(&self.eigenvectors[i], &self.eigenvectors[i])
    }

    /// Eigenspace projectors, one per energy level, degenerate levels merged.
    ///
    /// Returns `(projector, member indices)` per level, in ascending energy order.
    pub fn eigenspace_projectors(&self) -> Vec<(ComplexSquareMatrix, Vec<usize>)> {
        let dtol = self.degeneracy_tol();
        let d = self.dim();
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < d {
            let mut end = start + 1;
            while end < d && (self.energies[end] - self.energies[end - 1]).abs() <= dtol {
                end += 1;
            }
            let mut proj = ComplexSquareMatrix::zeros(d);
            for k in start..end {
                proj = proj.add(&self.projector(k));
            }
            blocks.push((proj, (start..end).collect()));
            start = end;
        }
        blocks
    }

    /// Sum_i E_i |i><i|.
    pub fn reconstruct(&self) -> ComplexSquareMatrix {
        let d = self.dim();
        let mut m = ComplexSquareMatrix::zeros(d);
        for i in 0..d {
            m = m.add(&self.projector(i).scale_re(self.energies[i]));
        }
        m
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.energies.iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }
}

fn degeneracy_tol(energies: &[f64]) -> f64 {
    let scale = energies.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    tol::effective(tol::DEGENERACY_REL) * scale.max(1.0)
}

impl Serialize for HamiltonianSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("HamiltonianSpec", 2)?;
        st.serialize_field("energies", &self.energies)?;
        let vectors: Vec<Vec<[f64; 2]>> =
            self.eigenvectors.iter().map(|v| vector_to_pairs(v)).collect();
        st.serialize_field("eigenvectors", &vectors)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for HamiltonianSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            energies: Vec<f64>,
            eigenvectors: Vec<Vec<[f64; 2]>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let vectors = raw.eigenvectors.iter().map(|v| pairs_to_vector(v)).collect();
        HamiltonianSpec::new(raw.energies, vectors).map_err(D::Error::custom)
    }
}
