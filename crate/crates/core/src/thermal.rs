//! Thermal (Gibbs) states and partition functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::matrix::ComplexSquareMatrix;
use crate::state::DensityMatrix;

/// Inverse temperature beta = 1/T (k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    pub beta: f64,
}

impl ThermalConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be a positive finite real, got {beta}"
            )));
        }
        Ok(Self { beta })
    }
}

/// log Z = log sum_i exp(-beta E_i), stabilized by shifting out the
/// dominant (lowest) energy.
pub fn log_partition_function(h: &HamiltonianSpec, t: ThermalConfig) -> f64 {
    // Energies are sorted ascending, so energies[0] carries the largest weight.
    let e_min = h.energy(0);
    let sum: f64 = h
        .energies()
        .iter()
        .map(|&e| (-t.beta * (e - e_min)).exp())
        .sum();
    -t.beta * e_min + sum.ln()
}

/// Z = sum_i exp(-beta E_i).
pub fn partition_function(h: &HamiltonianSpec, t: ThermalConfig) -> f64 {
    log_partition_function(h, t).exp()
}

/// gamma = exp(-beta H) / Z, assembled in the eigenbasis of `h`.
pub fn gibbs_state(h: &HamiltonianSpec, t: ThermalConfig) -> DensityMatrix {
    let weights = boltzmann_weights(h, t);
    let mut m = ComplexSquareMatrix::zeros(h.dim());
    for (i, w) in weights.iter().enumerate() {
        m = m.add(&h.projector(i).scale_re(*w));
    }
    DensityMatrix::from_trusted(m)
}

/// Normalized Boltzmann weights exp(-beta E_i) / Z.
pub fn boltzmann_weights(h: &HamiltonianSpec, t: ThermalConfig) -> Vec<f64> {
    let e_min = h.energy(0);
    let unnorm: Vec<f64> = h
        .energies()
        .iter()
        .map(|&e| (-t.beta * (e - e_min)).exp())
        .collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|w| w / z).collect()
}
