//! Discretized Gaussian-pointer simulation of the measurement model.
//!
//! A pointer prepared in a Gaussian of spread `s` couples to a projector E
//! so that the E branch of the state is translated by one pointer unit. The
//! coupling is applied analytically (the Gaussian center shifts, the pointer
//! momentum operator is never materialized) and the pointer position is read
//! out on a grid. Everything here serves as an independent numerical check
//! of the closed-form expressions used elsewhere in the crate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ComplexSquareMatrix;
use crate::state::DensityMatrix;
use crate::tol;

/// Grid and spread for the pointer readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerConfig {
    s: f64,
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl PointerConfig {
    /// Validates that the grid covers both Gaussian centers (0 and 1) and
    /// resolves the spread: dx <= s/8.
    pub fn new(s: f64, x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidInput(format!("spread s must be positive, got {s}")));
        }
        if n_points < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points".into()));
        }
        if !(x_min < 0.0 && x_max > 1.0) {
            return Err(Error::GridDoesNotCoverCenters { x_min, x_max });
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        let limit = s / 8.0;
        if dx > limit {
            return Err(Error::ResolutionTooCoarse { dx, limit });
        }
        Ok(Self { s, x_min, x_max, n_points })
    }

    /// Default grid: 10 sigma of margin around both branch centers,
    /// 4096 points. Satisfies the resolution rule for s >= 0.05.
    pub fn default_for_spread(s: f64) -> Result<Self> {
        Self::new(s, -10.0 * s - 1.0, 10.0 * s + 2.0, 4096)
    }

    /// Same grid bounds with twice the points (for convergence checks).
    pub fn doubled(&self) -> Self {
        Self { n_points: self.n_points * 2, ..*self }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |k| self.x_min + k as f64 * dx)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
}

/// Postselected pointer statistics from the grid simulation.
#[derive(Debug, Clone, Serialize)]
pub struct PointerOracleResult {
    /// Postselection probability (trapezoid integral of the density).
    pub q_j: f64,
    /// Conditional mean pointer position.
    pub mean_x: f64,
    /// The readout density on the grid.
    pub per_x_density: Vec<(f64, f64)>,
}

impl PointerOracleResult {
    /// CSV rows `x,density` (no header).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (x, d) in &self.per_x_density {
            out.push_str(&format!("{x},{d}\n"));
        }
        out
    }

    /// Full document: a JSON header line `# {"s":..,"q_j":..,"mean_x":..}`,
    /// the column header, then the `x,density` rows.
    pub fn to_csv_document(&self, s: f64) -> String {
        let mut out = format!(
            "# {{\"s\":{s},\"q_j\":{},\"mean_x\":{}}}\nx,density\n",
            self.q_j, self.mean_x
        );
        out.push_str(&self.csv_rows());
        out
    }
}

/// G_s(x) = (pi s^2)^{-1/4} exp(-x^2 / (2 s^2)); the squared amplitude
/// integrates to 1.
pub fn gaussian_amplitude(s: f64, x: f64) -> f64 {
    (std::f64::consts::PI * s * s).powf(-0.25) * (-x * x / (2.0 * s * s)).exp()
}

fn check_projector(m: &ComplexSquareMatrix) -> Result<()> {
    let dev = m.projector_deviation();
    if dev > tol::effective(tol::PROJECTOR) {
        return Err(Error::NotProjector { deviation: dev });
    }
    Ok(())
}

/// The Kraus operator of the pointer readout at position x:
/// N^s_x = G_s(x - 1) E + G_s(x) (1 - E).
pub fn kraus_nx(e: &ComplexSquareMatrix, s: f64, x: f64) -> Result<ComplexSquareMatrix> {
    check_projector(e)?;
    Ok(kraus_nx_unchecked(e, s, x))
}

fn kraus_nx_unchecked(e: &ComplexSquareMatrix, s: f64, x: f64) -> ComplexSquareMatrix {
    let shifted = gaussian_amplitude(s, x - 1.0);
    let centered = gaussian_amplitude(s, x);
    let complement = ComplexSquareMatrix::identity(e.dim()).sub(e);
    e.scale_re(shifted).add(&complement.scale_re(centered))
}

/// Pairwise summation: deterministic and more accurate than left-to-right.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Composite trapezoid over uniformly spaced samples.
fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let mut weighted = values.to_vec();
    weighted[0] *= 0.5;
    let last = weighted.len() - 1;
    weighted[last] *= 0.5;
    pairwise_sum(&weighted) * dx
}

fn readout_density(
    rho: &DensityMatrix,
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
    s: f64,
    x: f64,
) -> f64 {
    let n = kraus_nx_unchecked(e, s, x);
    let conditional = n.matmul(rho.matrix()).matmul(&n.adjoint());
    pi.trace_product(&conditional).re
}

fn check_dims(
    rho: &DensityMatrix,
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
) -> Result<()> {
    rho.matrix().check_same_dim(e)?;
    e.check_same_dim(pi)?;
    check_projector(e)?;
    check_projector(pi)?;
    Ok(())
}

/// Grid simulation of the postselected pointer mean.
///
/// Computes the readout density tr(Pi N^s_x rho N^{s dag}_x) on the grid,
/// integrates it to the postselection probability q_j and forms the
/// conditional mean (1/q_j) * int x density dx.
pub fn postselected_pointer_mean(
    rho: &DensityMatrix,
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
    cfg: &PointerConfig,
) -> Result<PointerOracleResult> {
    check_dims(rho, e, pi)?;
    let per_x_density: Vec<(f64, f64)> = cfg
        .grid()
        .map(|x| (x, readout_density(rho, e, pi, cfg.s, x)))
        .collect();
    let dx = cfg.dx();
    let densities: Vec<f64> = per_x_density.iter().map(|&(_, d)| d).collect();
    let q_j = trapezoid(&densities, dx);
    if q_j < tol::POSTSELECTION_MIN {
        return Err(Error::PostselectionImpossible { p: q_j, min: tol::POSTSELECTION_MIN });
    }
    let weighted: Vec<f64> = per_x_density.iter().map(|&(x, d)| x * d).collect();
    let mean_x = trapezoid(&weighted, dx) / q_j;
    Ok(PointerOracleResult { q_j, mean_x, per_x_density })
}

/// Closed form of the postselected pointer statistics.
///
/// With k = e^{-1/(4 s^2)}, rho11 = E rho E and rho10 = E rho (1-E):
///   q_j    = tr(Pi rho) - 2 (1-k) Re tr(Pi rho10)
///   mean_x = [tr(Pi rho11) + k Re tr(Pi rho10)] / q_j
pub fn closed_form_pointer_mean(
    rho: &DensityMatrix,
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
    s: f64,
) -> Result<(f64, f64)> {
    check_dims(rho, e, pi)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidInput(format!("spread s must be positive, got {s}")));
    }
    let k = (-1.0 / (4.0 * s * s)).exp();
    let one_minus_k = -(-1.0 / (4.0 * s * s)).exp_m1();
    let complement = ComplexSquareMatrix::identity(e.dim()).sub(e);
    let e_rho = e.matmul(rho.matrix());
    let rho11 = e_rho.matmul(e);
    let rho10 = e_rho.matmul(&complement);
    let t11 = pi.trace_product(&rho11).re;
    let t10 = pi.trace_product(&rho10).re;
    let p_pi = pi.trace_product(rho.matrix()).re;
    let q_j = p_pi - 2.0 * one_minus_k * t10;
    if q_j < tol::POSTSELECTION_MIN {
        return Err(Error::PostselectionImpossible { p: q_j, min: tol::POSTSELECTION_MIN });
    }
    Ok((q_j, (t11 + k * t10) / q_j))
}

/// Trapezoid integral of N^dag N over the grid; completeness check target.
pub fn grid_povm_completeness(
    e: &ComplexSquareMatrix,
    cfg: &PointerConfig,
) -> Result<ComplexSquareMatrix> {
    check_projector(e)?;
    grid_matrix_integral(cfg, |n| n.adjoint().matmul(n), e)
}

/// Trapezoid integral of N^dag Pi N over the grid; the finite-s effective
/// postselection operator.
pub fn grid_s_matrix(
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
    cfg: &PointerConfig,
) -> Result<ComplexSquareMatrix> {
    check_projector(e)?;
    check_projector(pi)?;
    e.check_same_dim(pi)?;
    grid_matrix_integral(cfg, |n| n.adjoint().matmul(pi).matmul(n), e)
}

fn grid_matrix_integral(
    cfg: &PointerConfig,
    f: impl Fn(&ComplexSquareMatrix) -> ComplexSquareMatrix,
    e: &ComplexSquareMatrix,
) -> Result<ComplexSquareMatrix> {
    let dx = cfg.dx();
    let mut acc = ComplexSquareMatrix::zeros(e.dim());
    let last = cfg.n_points - 1;
    for (k, x) in cfg.grid().enumerate() {
        let n = kraus_nx_unchecked(e, cfg.s, x);
        let term = f(&n);
        let weight = if k == 0 || k == last { 0.5 * dx } else { dx };
        acc = acc.add(&term.scale_re(weight));
    }
    Ok(acc)
}

/// Trapezoid integral of the readout density over x <= 0, on a dedicated
/// half-line grid `[-10s - 1, 0]` whose right endpoint is exactly 0.
///
/// This is the unnormalized negative-readout mass; dividing by tr(Pi rho)
/// gives the conditional probability of a negative pointer readout.
pub fn negative_readout_mass(
    rho: &DensityMatrix,
    e: &ComplexSquareMatrix,
    pi: &ComplexSquareMatrix,
    s: f64,
    n_points: usize,
) -> Result<f64> {
    check_dims(rho, e, pi)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidInput(format!("spread s must be positive, got {s}")));
    }
    if n_points < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points".into()));
    }
    let x_min = -10.0 * s - 1.0;
    let dx = -x_min / (n_points - 1) as f64;
    let densities: Vec<f64> = (0..n_points)
        .map(|k| {
            let x = x_min + k as f64 * dx;
            readout_density(rho, e, pi, s, x)
        })
        .collect();
    Ok(trapezoid(&densities, dx))
}
