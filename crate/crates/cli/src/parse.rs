//! Flag value parsers.

use exphist::theory::DistributionSpec;
use exphist::SketchConfig;

use crate::error::{usage, CliError};

fn number(text: &str, what: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("cannot parse {what} {text:?}")))
}

/// A count written as an integer or an integral decimal such as `1e6`.
pub fn count(text: &str) -> Result<u64, String> {
    let text = text.trim();
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    match text.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => Ok(x as u64),
        _ => Err(format!("expected a non-negative integer, got {text:?}")),
    }
}

/// Parses `exp:λ`, `pareto:ν:β`, `gumbel:μ:σ`, `geom:p`, `f0:λ` or `f1:λ`.
/// The split laws take ρ from `config`.
pub fn distribution(text: &str, config: &SketchConfig) -> Result<DistributionSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let params = |k: usize| -> Result<Vec<f64>, CliError> {
        if parts.len() != k + 1 {
            return Err(usage(format!(
                "{} takes {k} parameter(s), got {text:?}",
                parts[0]
            )));
        }
        parts[1..].iter().map(|p| number(p, "parameter")).collect()
    };
    let spec = match parts[0] {
        "exp" => DistributionSpec::Exp {
            lambda: params(1)?[0],
        },
        "pareto" => {
            let p = params(2)?;
            DistributionSpec::Pareto {
                nu: p[0],
                beta: p[1],
            }
        }
        "gumbel" => {
            let p = params(2)?;
            DistributionSpec::Gumbel {
                mu: p[0],
                sigma: p[1],
            }
        }
        "geom" => DistributionSpec::Geometric { p: params(1)?[0] },
        "f0" => DistributionSpec::F0 {
            lambda: params(1)?[0],
            rho: config.rho(),
        },
        "f1" => DistributionSpec::F1 {
            lambda: params(1)?[0],
            rho: config.rho(),
        },
        other => {
            return Err(usage(format!(
                "unknown distribution {other:?}; expected exp, pareto, gumbel, geom, f0 or f1"
            )))
        }
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

pub fn epsilon(text: &str) -> Result<SketchConfig, CliError> {
    SketchConfig::from_decimal(text).map_err(|e| usage(e.to_string()))
}
