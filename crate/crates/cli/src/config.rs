//! Config file schema and flag overrides.
//!
//! A single JSON document configures every command; command-line flags take
//! precedence over config fields.

use serde::{Deserialize, Serialize};
use workfluct_core::matrix::ComplexSquareMatrix;
use workfluct_core::state::{validate_density, DensityMatrix};
use workfluct_core::thermal::{gibbs_state, ThermalConfig};
use workfluct_core::work::{Kind, ProtocolSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct StateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<ComplexSquareMatrix>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SpreadSpec {
    List(Vec<f64>),
    /// `logspace(a,b,n)`: n points log-uniform between a and b.
    Expr(String),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct WitnessSpec {
    /// Initial level index selecting E = |i><i| from H(0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    /// Final level index selecting Pi = U^dag |j'><j'| U.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    /// Explicit projector E (alternative to i/j + protocol).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<ComplexSquareMatrix>,
    /// Explicit projector Pi.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<ComplexSquareMatrix>,
}

/// The raw config file; every field optional so flags can fill the gaps.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<SpreadSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_oracle: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {path}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config {path} does not parse: {e}")))
    }
}

/// Flags shared by all subcommands; any set flag overrides the config field.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonFlags {
    /// Path to the JSON config document.
    #[arg(long)]
    pub config: Option<String>,
    /// Master seed for every stochastic routine (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated distribution kinds: tpm,weak,finite_s.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Pointer spreads: comma-separated list or logspace(a,b,n).
    #[arg(long)]
    pub s: Option<String>,
    /// Skip the grid-oracle columns/checks.
    #[arg(long)]
    pub no_oracle: bool,
    /// Tolerance for pass/fail verdicts.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of random instances per verification suite.
    #[arg(long)]
    pub instances: Option<usize>,
}

/// Config after merging file fields with flag overrides.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub out: std::path::PathBuf,
    pub protocol: Option<ProtocolSpec>,
    pub state: Option<StateSpec>,
    pub beta: Option<f64>,
    pub kinds: Vec<Kind>,
    pub spreads: Vec<f64>,
    pub witness: Option<WitnessSpec>,
    pub tol: f64,
    pub instances: Option<usize>,
    pub no_oracle: bool,
}

pub fn resolve(flags: &CommonFlags) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let spreads_spec = match (&flags.s, &file.s) {
        (Some(expr), _) => Some(SpreadSpec::Expr(expr.clone())),
        (None, Some(spec)) => Some(spec.clone()),
        (None, None) => None,
    };
    let spreads = match spreads_spec {
        Some(spec) => parse_spreads(&spec)?,
        None => Vec::new(),
    };

    let kind_names = flags.kinds.clone().or(file.kinds).unwrap_or_default();
    let kinds = parse_kinds(&kind_names, &spreads)?;

    Ok(Resolved {
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| ".".to_string())
            .into(),
        protocol: file.protocol,
        state: file.state,
        beta: file.beta,
        kinds,
        spreads,
        witness: file.witness,
        tol: flags.tol.or(file.tol).unwrap_or(1e-10),
        instances: flags.instances.or(file.instances),
        no_oracle: flags.no_oracle || file.no_oracle.unwrap_or(false),
    })
}

fn parse_kinds(names: &[String], spreads: &[f64]) -> Result<Vec<Kind>, CliError> {
    let mut kinds = Vec::new();
    for name in names {
        match name.as_str() {
            "tpm" => kinds.push(Kind::Tpm),
            "weak" => kinds.push(Kind::Weak),
            "finite_s" => {
                if spreads.is_empty() {
                    return Err(CliError::config(
                        "kind finite_s needs at least one spread in `s`".into(),
                    ));
                }
                for &s in spreads {
                    kinds.push(Kind::FiniteS(s));
                }
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown distribution kind `{other}` (expected tpm, weak, finite_s)"
                )))
            }
        }
    }
    Ok(kinds)
}

pub fn parse_spreads(spec: &SpreadSpec) -> Result<Vec<f64>, CliError> {
    let values = match spec {
        SpreadSpec::List(values) => values.clone(),
        SpreadSpec::Expr(expr) => parse_spread_expr(expr)?,
    };
    if values.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(CliError::config("every spread must be a positive real".into()));
    }
    Ok(values)
}

/// Accepts `logspace(a,b,n)` or a comma-separated list of reals.
fn parse_spread_expr(expr: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = expr.trim();
    if let Some(args) = trimmed
        .strip_prefix("logspace(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(CliError::config(format!(
                "logspace takes three arguments, got `{trimmed}`"
            )));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::config(format!("bad logspace start `{}`", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::config(format!("bad logspace end `{}`", parts[1])))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| CliError::config(format!("bad logspace count `{}`", parts[2])))?;
        if !(a > 0.0 && b > a && n >= 2) {
            return Err(CliError::config(
                "logspace needs 0 < a < b and n >= 2".into(),
            ));
        }
        return Ok((0..n)
            .map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64))
            .collect());
    }
    trimmed
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("bad spread value `{p}`")))
        })
        .collect()
}

impl Resolved {
    pub fn require_protocol(&self) -> Result<&ProtocolSpec, CliError> {
        self.protocol
            .as_ref()
            .ok_or_else(|| CliError::config("config needs a `protocol`".into()))
    }

    /// Builds the initial state: explicit density (validated) or thermal.
    pub fn build_state(&self, protocol: &ProtocolSpec) -> Result<(DensityMatrix, Option<f64>), CliError> {
        let spec = self
            .state
            .as_ref()
            .ok_or_else(|| CliError::config("config needs a `state`".into()))?;
        match (&spec.thermal, &spec.density) {
            (Some(t), None) => Ok((gibbs_state(protocol.h_initial(), *t), Some(t.beta))),
            (None, Some(m)) => {
                let rho = validate_density(m).map_err(CliError::from_core)?;
                Ok((rho, self.beta))
            }
            _ => Err(CliError::config(
                "state must have exactly one of `thermal` or `density`".into(),
            )),
        }
    }

    /// The effective beta: explicit field, or the thermal state's.
    pub fn effective_beta(&self) -> Option<f64> {
        self.beta
            .or_else(|| self.state.as_ref().and_then(|s| s.thermal.map(|t| t.beta)))
    }
}
