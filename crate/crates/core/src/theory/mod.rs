//! Closed-form laws for the sketch under i.i.d. input: the distribution of
//! its size, the mass beyond its largest bin, the number of occupied and
//! empty bins, and the longest run of empty bins.

mod gap;
mod occupancy;
mod size;
mod tail;

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::special::{SpecialError, EULER_GAMMA, ZETA3};

pub use gap::{applied_gap_bounds, geometric_gap_bounds, AppliedGapLaw, GapLaw, GapQualifier};
pub use occupancy::{
    exact_expected_occupancy, exp_occupancy, exp_occupancy_mixture, exp_split, f0_occupancy,
    f1_occupancy, geometric_occupancy, pareto_occupancy, ExpOccupancy, ExpSplit, OccupancyLaw,
    MIXTURE_MAX_N,
};
pub use size::{
    exp_size_cdf, exp_size_gumbel, exp_size_moment_bounds, exp_size_pdf, exp_size_quantile,
    exp_size_quantile_approx, pareto_size_gumbel, pareto_size_law, pareto_size_moments,
    ExpQuantileApprox, ExpSizeMomentBounds, ParetoSizeLaw, ParetoSizeMoments, SizeVariant,
};
pub use tail::{exp_tail_bounds, pareto_tail_bounds, TailMassBounds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("outside the asymptotic regime: {0}")]
    NotAsymptotic(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

pub(crate) fn domain(msg: impl Into<String>) -> TheoryError {
    TheoryError::Domain(msg.into())
}

pub(crate) fn check_rho(rho: f64) -> Result<(), TheoryError> {
    if rho > 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("rho must exceed 1, got {rho}")))
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<(), TheoryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {v}")))
    }
}

/// An interval for a moment; `asymptotic` marks bounds that hold only as n grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub asymptotic: bool,
}

impl BoundPair {
    pub fn new(lower: f64, upper: f64, asymptotic: bool) -> Self {
        debug_assert!(lower <= upper, "bound pair out of order: {lower} > {upper}");
        Self {
            lower,
            upper,
            asymptotic,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Gumbel(μ, σ) approximation to a size law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelApprox {
    pub mu: f64,
    pub sigma: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

impl GumbelApprox {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Self {
            mu,
            sigma,
            mean: mu + EULER_GAMMA * sigma,
            variance: PI * PI * sigma * sigma / 6.0,
            skewness: 12.0 * 6f64.sqrt() * ZETA3 / (PI * PI * PI),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-(-(x - self.mu) / self.sigma).exp()).exp()
    }

    pub fn quantile(&self, q: f64) -> f64 {
        self.mu - self.sigma * (-q.ln()).ln()
    }
}

/// Input distributions covered by the theory and the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Exp {
        lambda: f64,
    },
    Pareto {
        nu: f64,
        beta: f64,
    },
    Gumbel {
        mu: f64,
        sigma: f64,
    },
    /// `Pr(Y = k) = (1−p)^k p` for `k ≥ 0`.
    Geometric {
        p: f64,
    },
    /// Exp(λ) conditioned to lie below the split point.
    F0 {
        lambda: f64,
        rho: f64,
    },
    /// Exp(λ) conditioned to lie above the split point.
    F1 {
        lambda: f64,
        rho: f64,
    },
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Exp { lambda } => write!(f, "exp:{lambda}"),
            DistributionSpec::Pareto { nu, beta } => write!(f, "pareto:{nu}:{beta}"),
            DistributionSpec::Gumbel { mu, sigma } => write!(f, "gumbel:{mu}:{sigma}"),
            DistributionSpec::Geometric { p } => write!(f, "geom:{p}"),
            DistributionSpec::F0 { lambda, .. } => write!(f, "f0:{lambda}"),
            DistributionSpec::F1 { lambda, .. } => write!(f, "f1:{lambda}"),
        }
    }
}

/// Split point `ρ ln ρ/(λ(ρ−1))` of Exp(λ) and the mass `p₀` below it.
pub fn split_point(lambda: f64, rho: f64) -> (f64, f64) {
    let log_rho = rho.ln();
    let cutoff = rho * log_rho / (lambda * (rho - 1.0));
    let p0 = -(-lambda * cutoff).exp_m1();
    (cutoff, p0)
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), TheoryError> {
        match *self {
            DistributionSpec::Exp { lambda } => check_positive("lambda", lambda),
            DistributionSpec::Pareto { nu, beta } => {
                check_positive("nu", nu)?;
                check_positive("beta", beta)
            }
            DistributionSpec::Gumbel { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(domain(format!("mu must be finite, got {mu}")));
                }
                check_positive("sigma", sigma)
            }
            DistributionSpec::Geometric { p } => {
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(domain(format!("p must lie in (0, 1), got {p}")))
                }
            }
            DistributionSpec::F0 { lambda, rho } | DistributionSpec::F1 { lambda, rho } => {
                check_positive("lambda", lambda)?;
                check_rho(rho)
            }
        }
    }

    /// `Pr(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Gumbel { mu, sigma } => (-(-(x - mu) / sigma).exp()).exp(),
            _ => 1.0 - self.survival(x),
        }
    }

    /// `Pr(X > x)`, computed without cancellation in the right tail.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Exp { lambda } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            DistributionSpec::Pareto { nu, beta } => {
                if x <= nu {
                    1.0
                } else {
                    (nu / x).powf(beta)
                }
            }
            DistributionSpec::Gumbel { mu, sigma } => -(-(-(x - mu) / sigma).exp()).exp_m1(),
            DistributionSpec::Geometric { p } => {
                if x < 0.0 {
                    1.0
                } else {
                    ((x.floor() + 1.0) * (-p).ln_1p()).exp()
                }
            }
            DistributionSpec::F0 { lambda, rho } => {
                let (cutoff, p0) = split_point(lambda, rho);
                if x <= 0.0 {
                    1.0
                } else if x >= cutoff {
                    0.0
                } else {
                    ((-lambda * x).exp() - (-lambda * cutoff).exp()) / p0
                }
            }
            DistributionSpec::F1 { lambda, rho } => {
                let (cutoff, _) = split_point(lambda, rho);
                if x <= cutoff {
                    1.0
                } else {
                    (-lambda * (x - cutoff)).exp()
                }
            }
        }
    }

    /// Whether every draw is strictly positive.
    pub fn is_positive(&self) -> bool {
        !matches!(
            self,
            DistributionSpec::Gumbel { .. } | DistributionSpec::Geometric { .. }
        )
    }
}
