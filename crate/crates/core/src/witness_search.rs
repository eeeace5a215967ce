//! Heuristic search for projector pairs with strongly negative witnesses.
//!
//! [`crate::contextuality::find_negative_state`] is
//! exact in the state for a fixed pair (E, Pi); optimizing over the pair
//! itself is a non-convex problem, handled here by seeded Nelder-Mead over a
//! vector parametrization of rank-1 projectors. Heuristic: the result is a
//! good pair, not a certified optimum.

use rand::Rng;
use serde::Serialize;

use crate::contextuality::find_negative_state;
use crate::error::Result;
use crate::matrix::{normalized, C64, ComplexSquareMatrix};
use crate::random::rng_from_seed;
use crate::state::DensityMatrix;

/// Outcome of a witness search: the pair found, the exact minimizing state
/// for that pair, and the witness value it attains.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSearchResult {
    pub e: ComplexSquareMatrix,
    pub pi: ComplexSquareMatrix,
    pub rho: DensityMatrix,
    pub witness_min: f64,
    pub iterations: usize,
}

fn projector_from_params(dim: usize, params: &[f64]) -> ComplexSquareMatrix {
    let v: Vec<C64> = (0..dim)
        .map(|k| C64::new(params[2 * k], params[2 * k + 1]))
        .collect();
    let u = normalized(&v);
    ComplexSquareMatrix::outer(&u, &u)
}

fn pair_from_params(dim: usize, params: &[f64]) -> (ComplexSquareMatrix, ComplexSquareMatrix) {
    let half = 2 * dim;
    (
        projector_from_params(dim, &params[..half]),
        projector_from_params(dim, &params[half..]),
    )
}

/// Witness of the exact minimizing state for the parametrized pair.
fn objective(dim: usize, params: &[f64]) -> f64 {
    let (e, pi) = pair_from_params(dim, params);
    match find_negative_state(&e, &pi) {
        Ok((_, witness_min)) => witness_min,
        // A parametrization can momentarily degenerate (zero vector); score
        // it as useless rather than failing the search.
        Err(_) => 0.0,
    }
}

/// Seeded Nelder-Mead over rank-1 projector pairs, minimizing the exact
/// per-pair witness minimum.
///
/// The initial simplex perturbs one coordinate at a time around a random
/// start. For qubits the optimum is -1/8, reached when the projectors sit at
/// a 60-degree principal angle; higher dimensions reduce to the same planar
/// bound for rank-1 pairs.
pub fn witness_search(dim: usize, seed: u64, max_iterations: usize) -> Result<WitnessSearchResult> {
    let n = 4 * dim; // two complex vectors, re/im interleaved
    let mut rng = rng_from_seed(seed);

    // Nelder-Mead coefficients: reflection, expansion, contraction, shrink.
    let (alpha, gamma, rho_c, sigma) = (1.0, 2.0, 0.5, 0.5);

    let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.clone(), objective(dim, &start)));
    for k in 0..n {
        let mut vertex = start.clone();
        vertex[k] += 0.35;
        let value = objective(dim, &vertex);
        simplex.push((vertex, value));
    }

    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() < 1e-12 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(v, _)| v[k]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + alpha * (centroid[k] - simplex[n].0[k]))
            .collect();
        let f_reflect = objective(dim, &reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + gamma * (reflect[k] - centroid[k]))
                .collect();
            let f_expand = objective(dim, &expand);
            simplex[n] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[n - 1].1 {
            simplex[n] = (reflect, f_reflect);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|k| centroid[k] + rho_c * (simplex[n].0[k] - centroid[k]))
                .collect();
            let f_contract = objective(dim, &contract);
            if f_contract < simplex[n].1 {
                simplex[n] = (contract, f_contract);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (coord, &base) in vertex.0.iter_mut().zip(&anchor) {
                        *coord = base + sigma * (*coord - base);
                    }
                    vertex.1 = objective(dim, &vertex.0);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (e, pi) = pair_from_params(dim, &simplex[0].0);
    let (rho, witness_min) = find_negative_state(&e, &pi)?;
    Ok(WitnessSearchResult { e, pi, rho, witness_min, iterations })
}
