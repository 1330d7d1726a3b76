//! Seeded inverse-CDF samplers and sample statistics.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::SimulationError;
use crate::theory::{split_point, DistributionSpec};

/// Generator for replication `rep` at sample size `n` under `master_seed`.
pub fn replication_rng(master_seed: u64, n: u64, rep: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&n.to_le_bytes());
    seed[16..24].copy_from_slice(&rep.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Uniform draw on the open interval (0, 1).
pub fn open_uniform<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sampler for one distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    spec: DistributionSpec,
    /// Split point for F0/F1, zero otherwise.
    cutoff: f64,
    /// Mass below the split for F0, zero otherwise.
    p0: f64,
    /// `ln(1−p)` for Geometric, zero otherwise.
    log_q: f64,
}

impl Sampler {
    pub fn new(spec: DistributionSpec) -> Result<Self, SimulationError> {
        spec.validate()?;
        let (cutoff, p0) = match spec {
            DistributionSpec::F0 { lambda, rho } | DistributionSpec::F1 { lambda, rho } => {
                split_point(lambda, rho)
            }
            _ => (0.0, 0.0),
        };
        let log_q = match spec {
            DistributionSpec::Geometric { p } => (-p).ln_1p(),
            _ => 0.0,
        };
        Ok(Self {
            spec,
            cutoff,
            p0,
            log_q,
        })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Split point of an F0/F1 spec.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Value at uniform level `u ∈ (0, 1)`. Monotone in `u`.
    pub fn transform(&self, u: f64) -> f64 {
        match self.spec {
            DistributionSpec::Exp { lambda } => -u.ln() / lambda,
            DistributionSpec::Pareto { nu, beta } => nu * u.powf(-1.0 / beta),
            DistributionSpec::Gumbel { mu, sigma } => mu - sigma * (-u.ln()).ln(),
            DistributionSpec::Geometric { .. } => (u.ln() / self.log_q).floor(),
            DistributionSpec::F0 { lambda, .. } => -(-u * self.p0).ln_1p() / lambda,
            DistributionSpec::F1 { lambda, .. } => self.cutoff - u.ln() / lambda,
        }
    }

    pub fn draw<R: RngCore>(&self, rng: &mut R) -> f64 {
        self.transform(open_uniform(rng))
    }
}

/// `n` draws from `spec`; the stream equals replication 0 of an experiment seeded with `seed`.
pub fn sample(spec: &DistributionSpec, n: u64, seed: u64) -> Result<Vec<f64>, SimulationError> {
    if n < 1 {
        return Err(SimulationError::Plan(
            "sample size must be at least 1".into(),
        ));
    }
    let sampler = Sampler::new(*spec)?;
    let mut rng = replication_rng(seed, n, 0);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

/// The `⌊1 + (n−1)q⌋`-th smallest value.
pub fn exact_quantile_oracle(stream: &[f64], q: f64) -> Result<f64, SimulationError> {
    if stream.is_empty() {
        return Err(SimulationError::EmptyStream);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(SimulationError::Plan(format!(
            "q must lie in [0, 1], got {q}"
        )));
    }
    let mut sorted = stream.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[lower_rank(sorted.len(), q) - 1])
}

/// `⌊1 + (n−1)q⌋` clamped to `1..=n`.
pub(crate) fn lower_rank(n: usize, q: f64) -> usize {
    ((1.0 + (n - 1) as f64 * q).floor() as usize).clamp(1, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("skewness is undefined for zero variance")]
    ZeroVariance,
}

/// Sample mean, unbiased variance and bias-adjusted skewness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: Result<f64, MomentError>,
}

pub fn empirical_moments(samples: &[f64]) -> Result<Moments, MomentError> {
    let n = samples.len();
    if n < 2 {
        return Err(MomentError::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    let variance = m2 / (nf - 1.0);
    let skewness = if n < 3 {
        Err(MomentError::TooFewSamples { needed: 3, got: n })
    } else if variance == 0.0 {
        Err(MomentError::ZeroVariance)
    } else {
        Ok(nf * nf / ((nf - 1.0) * (nf - 2.0)) * (m3 / nf) / variance.powf(1.5))
    };
    Ok(Moments {
        count: n,
        mean,
        variance,
        skewness,
    })
}
