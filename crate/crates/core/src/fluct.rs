//! Free-energy differences and fluctuation-theorem checks, plus the seeded
//! random-instance suites used for batch verification.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::matrix::ComplexSquareMatrix;
use crate::random::{
    derive_seed, random_density, random_diagonal_density, random_protocol, rng_from_seed,
};
use crate::state::DensityMatrix;
use crate::thermal::{gibbs_state, log_partition_function, ThermalConfig};
use crate::tol;
use crate::work::{
    average_work, tpm_distribution, weak_distribution, Kind, ProtocolSpec, WorkDistribution,
};

/// Outcome of one fluctuation-theorem identity check.
#[derive(Debug, Clone, Serialize)]
pub struct FtReport {
    /// The exponentiated-work average.
    pub lhs: f64,
    /// The free-energy side of the equality (including Upsilon when present).
    pub rhs: f64,
    pub residual: f64,
    /// |residual| / max(1, |rhs|): the scale-free figure, since rhs spans
    /// orders of magnitude.
    pub relative_residual: f64,
    /// The correction factor of the weak-measurement equality, when relevant.
    pub upsilon: Option<f64>,
    /// Whether the initial state was (numerically) the Gibbs state, i.e.
    /// whether the plain equality is actually claimed for this instance.
    pub thermal_initial: bool,
    pub passed: bool,
    /// Present for suite-generated instances.
    pub seed: Option<u64>,
}

/// Free energy difference -(1/beta) log(Z_final / Z_initial), evaluated in
/// log space.
pub fn delta_f(h0: &HamiltonianSpec, ht: &HamiltonianSpec, t: ThermalConfig) -> f64 {
    -(log_partition_function(ht, t) - log_partition_function(h0, t)) / t.beta
}

/// sum_w p(w) e^{-beta w}; quasi-probability weights are allowed.
pub fn exp_beta_work(d: &WorkDistribution, t: ThermalConfig) -> f64 {
    d.points.iter().map(|p| p.value * (-t.beta * p.w).exp()).sum()
}

fn is_thermal_initial(rho: &DensityMatrix, p: &ProtocolSpec, t: ThermalConfig) -> bool {
    let gamma = gibbs_state(p.h_initial(), t);
    rho.matrix().max_abs_diff(gamma.matrix()) <= 1e-10
}

/// Checks <e^{-beta W}>_tpm = e^{-beta dF}.
///
/// The equality is only claimed when rho is the initial Gibbs state; the
/// report's `thermal_initial` flag records whether that held, and `passed`
/// simply states whether the residual met `tol` relative to rhs.
pub fn jarzynski_check(
    rho: &DensityMatrix,
    p: &ProtocolSpec,
    t: ThermalConfig,
    tol: f64,
) -> Result<FtReport> {
    let dist = tpm_distribution(rho, p)?;
    let lhs = exp_beta_work(&dist, t);
    let rhs = (-t.beta * delta_f(p.h_initial(), p.h_final(), t)).exp();
    let residual = lhs - rhs;
    Ok(FtReport {
        lhs,
        rhs,
        residual,
        relative_residual: residual.abs() / rhs.abs().max(1.0),
        upsilon: None,
        thermal_initial: is_thermal_initial(rho, p, t),
        passed: residual.abs() <= tol * rhs.abs(),
        seed: None,
    })
}

/// gamma(0)^{-1} assembled in the H(0) eigenbasis as Z * diag(e^{beta E_i}).
///
/// Rejects instances whose Boltzmann factors would overflow rather than
/// returning a silently inaccurate inverse.
fn inverse_gibbs(h: &HamiltonianSpec, t: ThermalConfig) -> Result<ComplexSquareMatrix> {
    let log_z = log_partition_function(h, t);
    let max_log_weight = h
        .energies()
        .iter()
        .map(|&e| t.beta * e + log_z)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_log_weight > tol::GIBBS_INVERT_MAX_BETA_E {
        return Err(Error::SingularGibbsState { beta_e: max_log_weight });
    }
    let mut m = ComplexSquareMatrix::zeros(h.dim());
    for i in 0..h.dim() {
        m = m.add(&h.projector(i).scale_re((t.beta * h.energy(i) + log_z).exp()));
    }
    Ok(m)
}

/// The Upsilon correction Re tr(U^dag gamma(tau) U gamma(0)^{-1} rho).
pub fn upsilon(rho: &DensityMatrix, p: &ProtocolSpec, t: ThermalConfig) -> Result<f64> {
    let gamma_tau = gibbs_state(p.h_final(), t);
    let gamma0_inv = inverse_gibbs(p.h_initial(), t)?;
    let u = p.drive_matrix();
    let heisenberg_gamma = u.adjoint().matmul(gamma_tau.matrix()).matmul(u);
    Ok(heisenberg_gamma.matmul(&gamma0_inv).trace_product(rho.matrix()).re)
}

/// Checks the weak-measurement equality <e^{-beta W}>_weak = e^{-beta dF} * Upsilon,
/// valid for arbitrary initial states.
pub fn allahverdyan_check(
    rho: &DensityMatrix,
    p: &ProtocolSpec,
    t: ThermalConfig,
    tol: f64,
) -> Result<FtReport> {
    let dist = weak_distribution(rho, p)?;
    let lhs = exp_beta_work(&dist, t);
    let ups = upsilon(rho, p, t)?;
    let rhs = (-t.beta * delta_f(p.h_initial(), p.h_final(), t)).exp() * ups;
    let residual = lhs - rhs;
    Ok(FtReport {
        lhs,
        rhs,
        residual,
        relative_residual: residual.abs() / rhs.abs().max(1.0),
        upsilon: Some(ups),
        thermal_initial: is_thermal_initial(rho, p, t),
        passed: residual.abs() <= tol * rhs.abs().max(1.0),
        seed: None,
    })
}

/// One side-by-side check of measured average work against the undisturbed
/// energy change.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AverageWorkReport {
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Compares sum_w p(w) w against tr(U rho U^dag H(tau)) - tr(rho H(0)).
pub fn average_work_check(
    rho: &DensityMatrix,
    p: &ProtocolSpec,
    kind: Kind,
    tol: f64,
) -> Result<AverageWorkReport> {
    let dist = match kind {
        Kind::Tpm => tpm_distribution(rho, p)?,
        Kind::Weak => weak_distribution(rho, p)?,
        Kind::FiniteS(s) => crate::work::finite_s_distribution(rho, p, s)?,
    };
    let lhs = average_work(&dist);
    let u = p.drive_matrix();
    let evolved = u.matmul(rho.matrix()).matmul(&u.adjoint());
    let rhs = evolved.trace_product(&p.h_final().reconstruct()).re
        - rho.matrix().trace_product(&p.h_initial().reconstruct()).re;
    Ok(AverageWorkReport { lhs, rhs, passed: (lhs - rhs).abs() <= tol })
}

/// Tail estimate for a TPM work distribution: the probability of
/// w > dF + x against the bound e^{-beta x}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBoundReport {
    pub prob: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Sums the work probability above `df + x` and compares with e^{-beta x}.
/// The bound is only claimed for genuine probability distributions, so any
/// negative weight is rejected.
pub fn tail_bound_check(
    d: &WorkDistribution,
    t: ThermalConfig,
    df: f64,
    x: f64,
) -> Result<TailBoundReport> {
    let min = d.min_value();
    if min < -1e-12 {
        return Err(Error::NotAProbability { min_value: min });
    }
    let prob: f64 = d
        .points
        .iter()
        .filter(|p| p.w > df + x)
        .map(|p| p.value)
        .sum();
    let bound = (-t.beta * x).exp();
    Ok(TailBoundReport { prob, bound, holds: prob <= bound + 1e-12 })
}

/// One row of a batch-verification run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub seed: u64,
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub passed: bool,
}

impl SuiteRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}\n",
            self.seed, self.beta, self.lhs, self.rhs, self.residual, self.passed
        )
    }
}

/// Aggregate of a batch run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub rows: Vec<SuiteRow>,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub all_passed: bool,
}

impl SuiteOutcome {
    fn from_rows(rows: Vec<SuiteRow>, rel: impl Fn(&SuiteRow) -> f64) -> Self {
        let max_abs_residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
        let max_rel_residual = rows.iter().map(&rel).fold(0.0, f64::max);
        let all_passed = rows.iter().all(|r| r.passed);
        Self { rows, max_abs_residual, max_rel_residual, all_passed }
    }
}

fn random_instance_dims(rng: &mut rand_chacha::ChaCha8Rng) -> usize {
    rng.gen_range(2..=8)
}

fn random_beta(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    rng.gen_range(0.1..=5.0)
}

/// Random protocol with a non-degenerate initial spectrum (resampled in the
/// astronomically unlikely event of a near-degeneracy).
pub fn random_nondegenerate_protocol(
    dim: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> ProtocolSpec {
    for _ in 0..16 {
        let p = random_protocol(dim, rng);
        if !p.h_initial().is_degenerate() {
            return p;
        }
    }
    panic!("could not draw a non-degenerate random spectrum in 16 tries");
}

/// Jarzynski batch: thermal initial states, TPM distribution, relative
/// residual against e^{-beta dF} at tolerance `tol`.
pub fn jarzynski_suite(count: usize, master_seed: u64, tol: f64) -> SuiteOutcome {
    let rows = (0..count)
        .map(|idx| {
            let seed = derive_seed(master_seed, idx as u64);
            let mut rng = rng_from_seed(seed);
            let dim = random_instance_dims(&mut rng);
            let beta = random_beta(&mut rng);
            let t = ThermalConfig::new(beta).expect("beta > 0");
            let p = random_protocol(dim, &mut rng);
            let rho = gibbs_state(p.h_initial(), t);
            let report = jarzynski_check(&rho, &p, t, tol).expect("dims match");
            SuiteRow {
                seed,
                beta,
                lhs: report.lhs,
                rhs: report.rhs,
                residual: report.residual,
                passed: report.passed,
            }
        })
        .collect();
    SuiteOutcome::from_rows(rows, |r| (r.residual / r.rhs).abs())
}

/// Weak-measurement equality batch: arbitrary random initial states.
pub fn allahverdyan_suite(count: usize, master_seed: u64, tol: f64) -> SuiteOutcome {
    let rows = (0..count)
        .map(|idx| {
            let seed = derive_seed(master_seed, idx as u64);
            let mut rng = rng_from_seed(seed);
            let dim = random_instance_dims(&mut rng);
            let beta = random_beta(&mut rng);
            let t = ThermalConfig::new(beta).expect("beta > 0");
            let p = random_nondegenerate_protocol(dim, &mut rng);
            let rho = random_density(dim, &mut rng);
            let report = allahverdyan_check(&rho, &p, t, tol).expect("valid random instance");
            SuiteRow {
                seed,
                beta,
                lhs: report.lhs,
                rhs: report.rhs,
                residual: report.residual,
                passed: report.passed,
            }
        })
        .collect();
    SuiteOutcome::from_rows(rows, |r| (r.residual / r.rhs.abs().max(1.0)).abs())
}

/// Average-work identity batch for the weak distribution (absolute
/// tolerance): the weak scheme reproduces the undisturbed energy change.
pub fn average_work_suite(count: usize, master_seed: u64, tol: f64) -> SuiteOutcome {
    let rows = (0..count)
        .map(|idx| {
            let seed = derive_seed(master_seed, idx as u64);
            let mut rng = rng_from_seed(seed);
            let dim = random_instance_dims(&mut rng);
            let p = random_nondegenerate_protocol(dim, &mut rng);
            let rho = random_density(dim, &mut rng);
            let report = average_work_check(&rho, &p, Kind::Weak, tol).expect("dims match");
            SuiteRow {
                seed,
                beta: f64::NAN, // no thermal parameter in this identity
                lhs: report.lhs,
                rhs: report.rhs,
                residual: report.lhs - report.rhs,
                passed: report.passed,
            }
        })
        .collect();
    SuiteOutcome::from_rows(rows, |r| r.residual.abs())
}

/// Diagonal-state batch: [rho, H(0)] = 0 with rho != gamma(0); the weak
/// equality must still hold, generally with Upsilon != 1.
pub fn diagonal_state_suite(count: usize, master_seed: u64, tol: f64) -> SuiteOutcome {
    let rows = (0..count)
        .map(|idx| {
            let seed = derive_seed(master_seed, idx as u64);
            let mut rng = rng_from_seed(seed);
            let dim = random_instance_dims(&mut rng);
            let beta = random_beta(&mut rng);
            let t = ThermalConfig::new(beta).expect("beta > 0");
            let p = random_nondegenerate_protocol(dim, &mut rng);
            let rho = random_diagonal_density(p.h_initial(), &mut rng);
            let report = allahverdyan_check(&rho, &p, t, tol).expect("valid random instance");
            SuiteRow {
                seed,
                beta,
                lhs: report.lhs,
                rhs: report.rhs,
                residual: report.residual,
                passed: report.passed,
            }
        })
        .collect();
    SuiteOutcome::from_rows(rows, |r| (r.residual / r.rhs.abs().max(1.0)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{basis_vector, C64};
    use crate::unitary::UnitarySpec;

    fn hadamard() -> ComplexSquareMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexSquareMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    fn qubit_protocol(drive: ComplexSquareMatrix) -> ProtocolSpec {
        ProtocolSpec::new(
            HamiltonianSpec::from_diagonal(&[0.0, 1.0]).unwrap(),
            UnitarySpec::Explicit(drive),
            HamiltonianSpec::from_diagonal(&[0.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn delta_f_examples() {
        let t = ThermalConfig::new(1.0).unwrap();
        let h = HamiltonianSpec::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(delta_f(&h, &h, t).abs() < 1e-15);

        // Z_0 = 1 + 1/3 = 4/3, Z_t = 2: dF = -ln(3/2) by scalar arithmetic.
        let h0 = HamiltonianSpec::from_diagonal(&[0.0, 3.0_f64.ln()]).unwrap();
        let ht = HamiltonianSpec::from_diagonal(&[0.0, 0.0]).unwrap();
        assert!((delta_f(&h0, &ht, t) + 1.5_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn delta_f_shift_covariance() {
        let h0 = HamiltonianSpec::from_diagonal(&[0.0, 0.7, 1.9]).unwrap();
        let ht = HamiltonianSpec::from_diagonal(&[0.2, 0.5, 2.2]).unwrap();
        let c = 0.83;
        let ht_shifted =
            HamiltonianSpec::from_diagonal(&[0.2 + c, 0.5 + c, 2.2 + c]).unwrap();
        for beta in [0.3, 1.0, 4.0] {
            let t = ThermalConfig::new(beta).unwrap();
            let base = delta_f(&h0, &ht, t);
            let shifted = delta_f(&h0, &ht_shifted, t);
            assert!((shifted - base - c).abs() < 1e-12, "beta = {beta}");
        }
    }

    #[test]
    fn exp_beta_work_trivial_cases() {
        let t = ThermalConfig::new(2.0).unwrap();
        let single = WorkDistribution {
            kind: Kind::Tpm,
            points: vec![crate::work::WorkPoint { w: 0.0, i: 0, j: 0, value: 1.0 }],
            aggregated: false,
        };
        assert!((exp_beta_work(&single, t) - 1.0).abs() < 1e-15);

        // beta -> 0+ limit direction: the average collapses to the total.
        let mut rng = rng_from_seed(71);
        let p = random_nondegenerate_protocol(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let dist = weak_distribution(&rho, &p).unwrap();
        let tiny = ThermalConfig::new(1e-12).unwrap();
        assert!((exp_beta_work(&dist, tiny) - dist.total()).abs() < 1e-11);
    }

    #[test]
    fn thermal_qubit_jarzynski_is_exact() {
        // Brute-force over the four outcomes this reduces to Z_t / Z_0 = 1.
        let t = ThermalConfig::new(1.0).unwrap();
        let p = qubit_protocol(hadamard());
        let rho = gibbs_state(p.h_initial(), t);
        let report = jarzynski_check(&rho, &p, t, 1e-10).unwrap();
        assert!(report.thermal_initial);
        assert!(report.passed);
        assert!((report.lhs - 1.0).abs() < 1e-12);
        assert!((report.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_thermal_state_reports_without_claim() {
        let t = ThermalConfig::new(1.0).unwrap();
        let p = qubit_protocol(hadamard());
        let rho = DensityMatrix::from_pure(&basis_vector(2, 0));
        let report = jarzynski_check(&rho, &p, t, 1e-10).unwrap();
        assert!(!report.thermal_initial);
        assert!(!report.passed); // generically fails; no claim is made
    }

    #[test]
    fn trivial_drive_gives_unit_both_sides() {
        let t = ThermalConfig::new(0.7).unwrap();
        let p = qubit_protocol(ComplexSquareMatrix::identity(2));
        let rho = gibbs_state(p.h_initial(), t);
        let report = jarzynski_check(&rho, &p, t, 1e-12).unwrap();
        assert!((report.lhs - 1.0).abs() < 1e-14);
        assert!((report.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn upsilon_is_one_for_thermal_states() {
        let t = ThermalConfig::new(1.3).unwrap();
        let mut rng = rng_from_seed(3);
        let p = random_nondegenerate_protocol(4, &mut rng);
        let rho = gibbs_state(p.h_initial(), t);
        let ups = upsilon(&rho, &p, t).unwrap();
        assert!((ups - 1.0).abs() <= 1e-12);
        let report = allahverdyan_check(&rho, &p, t, 1e-10).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn weak_equality_holds_for_coherent_states() {
        let t = ThermalConfig::new(0.9).unwrap();
        let mut rng = rng_from_seed(17);
        let p = random_nondegenerate_protocol(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let report = allahverdyan_check(&rho, &p, t, 1e-10).unwrap();
        assert!(report.passed, "residual {}", report.residual);
    }

    #[test]
    fn diagonal_non_thermal_states_keep_the_equality() {
        let outcome = diagonal_state_suite(32, 99, 1e-10);
        assert!(outcome.all_passed, "max rel {}", outcome.max_rel_residual);
        // Upsilon is generally away from 1 for these states.
        let mut rng = rng_from_seed(derive_seed(99, 0));
        let dim = random_instance_dims(&mut rng);
        let beta = random_beta(&mut rng);
        let t = ThermalConfig::new(beta).unwrap();
        let p = random_nondegenerate_protocol(dim, &mut rng);
        let rho = random_diagonal_density(p.h_initial(), &mut rng);
        let ups = upsilon(&rho, &p, t).unwrap();
        assert!((ups - 1.0).abs() > 1e-6, "degenerate draw: upsilon = {ups}");
    }

    #[test]
    fn gibbs_inverse_rejects_overflowing_spectra() {
        let t = ThermalConfig::new(1.0).unwrap();
        let h = HamiltonianSpec::from_diagonal(&[0.0, 800.0]).unwrap();
        assert!(matches!(
            inverse_gibbs(&h, t),
            Err(Error::SingularGibbsState { .. })
        ));
    }

    #[test]
    fn average_work_weak_matches_energy_change() {
        let mut rng = rng_from_seed(23);
        let p = random_nondegenerate_protocol(4, &mut rng);
        let rho = random_density(4, &mut rng);
        let report = average_work_check(&rho, &p, Kind::Weak, 1e-10).unwrap();
        assert!(report.passed, "lhs {} rhs {}", report.lhs, report.rhs);
    }

    #[test]
    fn average_work_tpm_holds_for_commuting_states() {
        let mut rng = rng_from_seed(29);
        let p = random_nondegenerate_protocol(3, &mut rng);
        let rho = random_diagonal_density(p.h_initial(), &mut rng);
        let report = average_work_check(&rho, &p, Kind::Tpm, 1e-10).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn average_work_tpm_counterexample() {
        // Coherent state, non-matching gaps: |+><+| with H(tau) = diag(0, 2)
        // and a Hadamard drive. TPM average is +0.5, true energy change -0.5.
        let p = ProtocolSpec::new(
            HamiltonianSpec::from_diagonal(&[0.0, 1.0]).unwrap(),
            UnitarySpec::Explicit(hadamard()),
            HamiltonianSpec::from_diagonal(&[0.0, 2.0]).unwrap(),
        )
        .unwrap();
        let rho = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let report = average_work_check(&rho, &p, Kind::Tpm, 1e-3).unwrap();
        assert!(!report.passed);
        assert!((report.lhs - 0.5).abs() < 1e-12);
        assert!((report.rhs + 0.5).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_on_thermal_qubit() {
        let t = ThermalConfig::new(1.0).unwrap();
        let p = qubit_protocol(hadamard());
        let rho = gibbs_state(p.h_initial(), t);
        let dist = tpm_distribution(&rho, &p).unwrap();
        let df = delta_f(p.h_initial(), p.h_final(), t);

        // x = 0: bound is 1, trivially holds.
        let r0 = tail_bound_check(&dist, t, df, 0.0).unwrap();
        assert!((r0.bound - 1.0).abs() < 1e-15);
        assert!(r0.holds);

        // x = 0.5: enumerating the outcomes gives prob <= e^{-1/2}.
        let r = tail_bound_check(&dist, t, df, 0.5).unwrap();
        assert!((r.bound - (-0.5_f64).exp()).abs() < 1e-15);
        assert!(r.holds);

        // large x: the tail empties out.
        let rl = tail_bound_check(&dist, t, df, 50.0).unwrap();
        assert!(rl.prob == 0.0);
        assert!(rl.holds);
    }

    #[test]
    fn tail_bound_rejects_quasi_probabilities() {
        let t = ThermalConfig::new(1.0).unwrap();
        let quasi = WorkDistribution {
            kind: Kind::Weak,
            points: vec![
                crate::work::WorkPoint { w: 0.0, i: 0, j: 0, value: 1.2 },
                crate::work::WorkPoint { w: 1.0, i: 0, j: 1, value: -0.2 },
            ],
            aggregated: false,
        };
        assert!(matches!(
            tail_bound_check(&quasi, t, 0.0, 0.1),
            Err(Error::NotAProbability { .. })
        ));
    }

    #[test]
    fn suites_are_reproducible() {
        let a = jarzynski_suite(8, 42, 1e-10);
        let b = jarzynski_suite(8, 42, 1e-10);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.csv_row(), rb.csv_row());
        }
        assert!(a.all_passed);
    }
}
