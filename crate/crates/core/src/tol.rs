//! Validation tolerances.
//!
//! Every invariant check in the crate pulls its threshold from here.
//! Setting `WORKFLUCT_STRICT=1` halves all of them.

use std::sync::OnceLock;

/// Hermiticity of a density matrix (max-entry deviation from A^dag).
pub const DENSITY_HERMITIAN: f64 = 1e-10;
/// Unit trace of a density matrix.
pub const DENSITY_TRACE: f64 = 1e-10;
/// Lowest admissible density-matrix eigenvalue.
pub const DENSITY_POSITIVITY: f64 = 1e-10;
/// Hermiticity required of an eigensolver input.
pub const EIGH_INPUT: f64 = 1e-9;
/// Unitarity of an explicit drive.
pub const UNITARY: f64 = 1e-9;
/// Projector check (idempotence and hermiticity).
pub const PROJECTOR: f64 = 1e-10;
/// Eigenvector orthonormality in a Hamiltonian spec.
pub const ORTHONORMALITY: f64 = 1e-10;
/// Relative degeneracy threshold; scaled by max(1, max |E|).
pub const DEGENERACY_REL: f64 = 1e-9;
/// Postselection probabilities below this have no conditional mean.
pub const POSTSELECTION_MIN: f64 = 1e-14;
/// Work values closer than this (times the energy scale) merge.
pub const MERGE_REL: f64 = 1e-9;
/// beta * E beyond this would overflow exp() when inverting a Gibbs state.
pub const GIBBS_INVERT_MAX_BETA_E: f64 = 690.0;

fn strict() -> bool {
    static STRICT: OnceLock<bool> = OnceLock::new();
    *STRICT.get_or_init(|| strict_from_env(std::env::var("WORKFLUCT_STRICT").ok().as_deref()))
}

pub(crate) fn strict_from_env(value: Option<&str>) -> bool {
    matches!(value, Some("1"))
}

/// Effective tolerance: the stated one, or half of it in strict mode.
pub fn effective(base: f64) -> f64 {
    if strict() {
        base / 2.0
    } else {
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_flag_parses() {
        assert!(strict_from_env(Some("1")));
        assert!(!strict_from_env(Some("0")));
        assert!(!strict_from_env(Some("yes")));
        assert!(!strict_from_env(None));
    }
}
