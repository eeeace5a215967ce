//! The four subcommands: run, scan-s, verify, witness.

use serde_json::json;
use workfluct_core::contextuality::{
    condition_flips, find_negative_state, witness_report, s_threshold,
};
use workfluct_core::digest::sha256_hex_json;
use workfluct_core::fluct::{
    allahverdyan_check, allahverdyan_suite, average_work_suite, jarzynski_check, jarzynski_suite,
    SuiteOutcome,
};
use workfluct_core::matrix::ComplexSquareMatrix;
use workfluct_core::pointer::{postselected_pointer_mean, closed_form_pointer_mean, PointerConfig};
use workfluct_core::state::DensityMatrix;
use workfluct_core::thermal::ThermalConfig;
use workfluct_core::work::{
    finite_s_distribution, tpm_distribution, weak_distribution, Kind, ProtocolSpec,
    WorkDistribution,
};

use crate::config::Resolved;
use crate::output::{write_csv, write_json};
use crate::CliError;

fn compute_distribution(
    rho: &DensityMatrix,
    protocol: &ProtocolSpec,
    kind: Kind,
) -> Result<WorkDistribution, CliError> {
    let dist = match kind {
        Kind::Tpm => tpm_distribution(rho, protocol),
        Kind::Weak => weak_distribution(rho, protocol),
        Kind::FiniteS(s) => finite_s_distribution(rho, protocol, s),
    }
    .map_err(CliError::from_core)?;
    dist.validate().map_err(CliError::from_core)?;
    Ok(dist)
}

fn distribution_file_stem(kind: Kind) -> String {
    match kind {
        Kind::Tpm => "dist_tpm".to_string(),
        Kind::Weak => "dist_weak".to_string(),
        Kind::FiniteS(s) => format!("dist_finite_s_{s}"),
    }
}

/// `run`: compute the requested distributions and, when beta is known, the
/// fluctuation-theorem reports.
pub fn cmd_run(cfg: &Resolved) -> Result<(), CliError> {
    let protocol = cfg.require_protocol()?;
    let (rho, state_beta) = cfg.build_state(protocol)?;
    if cfg.kinds.is_empty() {
        return Err(CliError::config("run needs at least one kind in `kinds`".into()));
    }
    let digest = effective_digest(cfg, &json!({"command": "run"}));

    for &kind in &cfg.kinds {
        let dist = compute_distribution(&rho, protocol, kind)?;
        let stem = distribution_file_stem(kind);
        write_csv(
            &cfg.out.join(format!("{stem}.csv")),
            &digest,
            cfg.seed,
            "w,i,j,value",
            &dist.csv_rows(),
        )?;
        let payload = json!({
            "config_digest": digest,
            "seed": cfg.seed,
            "distribution": dist,
        });
        write_json(&cfg.out.join(format!("{stem}.json")), &payload)?;
    }

    let beta = cfg.effective_beta().or(state_beta);
    if let Some(beta) = beta {
        let t = ThermalConfig::new(beta).map_err(CliError::from_core)?;
        let jarzynski =
            jarzynski_check(&rho, protocol, t, cfg.tol).map_err(CliError::from_core)?;
        let allahverdyan = if cfg.kinds.iter().any(|k| matches!(k, Kind::Weak)) {
            Some(allahverdyan_check(&rho, protocol, t, cfg.tol).map_err(CliError::from_core)?)
        } else {
            None
        };
        let payload = json!({
            "config_digest": digest,
            "seed": cfg.seed,
            "beta": beta,
            "jarzynski": jarzynski,
            "allahverdyan": allahverdyan,
        });
        write_json(&cfg.out.join("ft_report.json"), &payload)?;
    }
    Ok(())
}

/// Resolves the witness triple (rho, E, Pi) from the config. The state
/// defaults to the exact witness-minimizing state when not given.
fn witness_triple(
    cfg: &Resolved,
) -> Result<(DensityMatrix, ComplexSquareMatrix, ComplexSquareMatrix), CliError> {
    let spec = cfg
        .witness
        .as_ref()
        .ok_or_else(|| CliError::config("config needs a `witness` section".into()))?;
    let (e, pi) = match (&spec.e, &spec.pi, spec.i, spec.j) {
        (Some(e), Some(pi), _, _) => (e.clone(), pi.clone()),
        (None, None, Some(i), Some(j)) => {
            let protocol = cfg.require_protocol()?;
            if i >= protocol.dim() || j >= protocol.dim() {
                return Err(CliError::config(format!(
                    "witness pair ({i}, {j}) out of range for dimension {}",
                    protocol.dim()
                )));
            }
            (
                protocol.h_initial().projector(i),
                protocol.heisenberg_projector(j),
            )
        }
        _ => {
            return Err(CliError::config(
                "witness needs either explicit `e` and `pi` or indices `i` and `j`".into(),
            ))
        }
    };
    let rho = match &cfg.state {
        Some(_) => {
            let protocol_for_state = cfg.protocol.as_ref();
            match protocol_for_state {
                Some(p) => cfg.build_state(p)?.0,
                None => {
                    // No protocol: only an explicit density can define the state.
                    let spec = cfg.state.as_ref().unwrap();
                    match &spec.density {
                        Some(m) => workfluct_core::state::validate_density(m)
                            .map_err(CliError::from_core)?,
                        None => {
                            return Err(CliError::config(
                                "a thermal state needs a `protocol` for its Hamiltonian".into(),
                            ))
                        }
                    }
                }
            }
        }
        None => find_negative_state(&e, &pi).map_err(CliError::from_core)?.0,
    };
    Ok((rho, e, pi))
}

/// `scan-s`: witness conditions over a grid of spreads.
pub fn cmd_scan_s(cfg: &Resolved) -> Result<(), CliError> {
    if cfg.spreads.is_empty() {
        return Err(CliError::config("scan-s needs spreads in `s`".into()));
    }
    let (rho, e, pi) = witness_triple(cfg)?;
    let digest = effective_digest(cfg, &json!({"command": "scan-s"}));

    let mut rows = String::new();
    for &s in &cfg.spreads {
        let report = witness_report(&rho, &e, &pi, s).map_err(CliError::from_core)?;
        let (q_closed, mean_closed) =
            closed_form_pointer_mean(&rho, &e, &pi, s).map_err(CliError::from_core)?;
        let closed = q_closed * mean_closed;
        if cfg.no_oracle {
            rows.push_str(&format!(
                "{s},{},{},{},{},{closed}\n",
                report.p_d,
                report.p_minus,
                report.gap(),
                report.condition_2c
            ));
        } else {
            let grid_cfg = PointerConfig::default_for_spread(s).map_err(CliError::from_core)?;
            let grid = postselected_pointer_mean(&rho, &e, &pi, &grid_cfg)
                .map_err(CliError::from_core)?;
            let grid_product = grid.q_j * grid.mean_x;
            rows.push_str(&format!(
                "{s},{},{},{},{},{closed},{grid_product}\n",
                report.p_d,
                report.p_minus,
                report.gap(),
                report.condition_2c
            ));
        }
    }

    let columns = if cfg.no_oracle {
        "s,p_d,p_minus,gap,condition_2c,qj_mean_x_closed"
    } else {
        "s,p_d,p_minus,gap,condition_2c,qj_mean_x_closed,qj_mean_x_grid"
    };
    write_csv(&cfg.out.join("scan_s.csv"), &digest, cfg.seed, columns, &rows)
}

fn suite_rows(name: &str, outcome: &SuiteOutcome, rows: &mut String) {
    for row in &outcome.rows {
        rows.push_str(&format!("{name},{}", row.csv_row()));
    }
}

fn suite_summary(name: &str, count: usize, outcome: &SuiteOutcome) -> String {
    format!(
        "# summary suite={name} instances={count} max_abs_residual={} max_rel_residual={} all_passed={}\n",
        outcome.max_abs_residual, outcome.max_rel_residual, outcome.all_passed
    )
}

/// `verify`: the seeded random-instance batches; exit 0 iff all passed.
pub fn cmd_verify(cfg: &Resolved) -> Result<(), CliError> {
    let n_jarzynski = cfg.instances.unwrap_or(200);
    let n_allahverdyan = cfg.instances.unwrap_or(500);
    let n_average = cfg.instances.unwrap_or(500);
    let digest = effective_digest(cfg, &json!({"command": "verify"}));

    // Distinct sub-master seeds so the suites draw independent instances.
    let jar_seed = workfluct_core::random::derive_seed(cfg.seed, 0xA1);
    let alla_seed = workfluct_core::random::derive_seed(cfg.seed, 0xA2);
    let avg_seed = workfluct_core::random::derive_seed(cfg.seed, 0xA3);

    let jarzynski = jarzynski_suite(n_jarzynski, jar_seed, cfg.tol);
    let allahverdyan = allahverdyan_suite(n_allahverdyan, alla_seed, cfg.tol);
    let average = average_work_suite(n_average, avg_seed, cfg.tol);

    let mut rows = String::new();
    suite_rows("jarzynski", &jarzynski, &mut rows);
    suite_rows("allahverdyan", &allahverdyan, &mut rows);
    suite_rows("average_work", &average, &mut rows);
    rows.push_str(&suite_summary("jarzynski", n_jarzynski, &jarzynski));
    rows.push_str(&suite_summary("allahverdyan", n_allahverdyan, &allahverdyan));
    rows.push_str(&suite_summary("average_work", n_average, &average));

    write_csv(
        &cfg.out.join("verify.csv"),
        &digest,
        cfg.seed,
        "suite,seed,beta,lhs,rhs,residual,passed",
        &rows,
    )?;

    if jarzynski.all_passed && allahverdyan.all_passed && average.all_passed {
        Ok(())
    } else {
        Err(CliError::numeric(format!(
            "verification failed: max relative residuals jarzynski={} allahverdyan={} average_work={}",
            jarzynski.max_rel_residual, allahverdyan.max_rel_residual, average.max_rel_residual
        )))
    }
}

/// `witness`: exact minimizer, spread threshold and the witness conditions
/// at and above the threshold.
pub fn cmd_witness(cfg: &Resolved) -> Result<(), CliError> {
    let (_, e, pi) = witness_triple(cfg)?;
    let (rho_min, witness_min) = find_negative_state(&e, &pi).map_err(CliError::from_core)?;
    let digest = effective_digest(cfg, &json!({"command": "witness"}));
    let out_path = cfg.out.join("witness.json");

    if witness_min >= -1e-12 {
        let payload = json!({
            "config_digest": digest,
            "seed": cfg.seed,
            "status": "no_witness",
            "witness_min": witness_min,
            "s_star": null,
        });
        return write_json(&out_path, &payload);
    }

    let s_star = s_threshold(&rho_min, &e, &pi)
        .map_err(CliError::from_core)?
        .expect("negative witness implies a threshold search");
    let mut at_star = witness_report(&rho_min, &e, &pi, s_star).map_err(CliError::from_core)?;
    let mut at_10_star =
        witness_report(&rho_min, &e, &pi, 10.0 * s_star).map_err(CliError::from_core)?;
    at_star.seed = Some(cfg.seed);
    at_10_star.seed = Some(cfg.seed);

    // Non-monotonicity is not assumed away: flag every flip on a log grid
    // around the found threshold.
    let flips = condition_flips(&rho_min, &e, &pi, (s_star / 100.0).max(0.01), 100.0 * s_star, 64)
        .map_err(CliError::from_core)?;

    let payload = json!({
        "config_digest": digest,
        "seed": cfg.seed,
        "status": "witness_found",
        "witness_min": witness_min,
        "minimizing_state": rho_min,
        "s_star": s_star,
        "report_at_s_star": at_star,
        "report_at_10_s_star": at_10_star,
        "condition_flips": flips,
        "non_monotone": flips.len() > 1,
    });
    write_json(&out_path, &payload)
}

/// Digest of the effective (post-override) inputs a command ran with.
fn effective_digest(cfg: &Resolved, extra: &serde_json::Value) -> String {
    let kinds: Vec<String> = cfg
        .kinds
        .iter()
        .map(|k| match k {
            Kind::FiniteS(s) => format!("finite_s({s})"),
            other => other.label().to_string(),
        })
        .collect();
    sha256_hex_json(&json!({
        "extra": extra,
        "seed": cfg.seed,
        "protocol": cfg.protocol,
        "state": cfg.state,
        "beta": cfg.beta,
        "kinds": kinds,
        "s": cfg.spreads,
        "witness": cfg.witness,
        "tol": cfg.tol,
        "instances": cfg.instances,
        "no_oracle": cfg.no_oracle,
    }))
}
