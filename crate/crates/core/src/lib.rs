//! Work statistics for driven finite-dimensional quantum systems.
//!
//! The crate builds up from dense complex linear algebra ([`matrix`],
//! [`eigh`]) to quantum states and drives ([`state`], [`hamiltonian`],
//! [`unitary`], [`thermal`]), the work distributions of the two-point
//! measurement scheme and its weak-measurement generalization ([`work`]),
//! a discretized Gaussian-pointer simulation that independently validates
//! the closed-form expressions ([`mod@pointer`]), fluctuation-theorem checks
//! ([`fluct`]) and the contextuality witness built from anomalous weak
//! values ([`contextuality`], [`witness_search`]).
//!
//! All operations are pure functions over immutable values; batch drivers
//! may fan instances out across threads freely.

pub mod contextuality;
pub mod digest;
pub mod eigh;
pub mod error;
pub mod fluct;
pub mod hamiltonian;
pub mod matrix;
pub mod pointer;
pub mod random;
pub mod special;
pub mod state;
pub mod thermal;
pub mod tol;
pub mod unitary;
pub mod witness_search;
pub mod work;

pub use error::{Error, Result};
pub use matrix::{C64, ComplexSquareMatrix};
pub use state::DensityMatrix;
