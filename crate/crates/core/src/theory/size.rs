//! Size laws: the continuous size `M_n = log_ρ(X_(n)/X_(1)) + 1` and, for
//! Pareto input, the anchored size `A_n = log_ρ(X_(n)/ν) + 1`.

use std::f64::consts::PI;

use super::{check_positive, check_rho, domain, BoundPair, GumbelApprox, TheoryError};
use crate::special::{digamma, dilog, log_beta, polygamma, EULER_GAMMA, ZETA3};

fn check_n(n: u64, min: u64) -> Result<(), TheoryError> {
    if n >= min {
        Ok(())
    } else {
        Err(domain(format!(
            "sample size must be at least {min}, got {n}"
        )))
    }
}

fn check_q(q: f64) -> Result<(), TheoryError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("probability must lie in (0, 1), got {q}")))
    }
}

/// CDF of `M_n` for Exp input.
pub fn exp_size_cdf(n: u64, rho: f64, mu: f64) -> Result<f64, TheoryError> {
    check_n(n, 2)?;
    check_rho(rho)?;
    if mu.is_nan() {
        return Err(domain("mu is NaN"));
    }
    if mu <= 1.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let a1 = ((mu - 1.0) * rho.ln()).exp_m1();
    let x = 1.0 + nf / a1;
    if !x.is_finite() {
        return Ok(0.0);
    }
    let log_f = (nf - 1.0).ln() + log_beta(x, nf - 1.0)?;
    Ok(log_f.exp().min(1.0))
}

/// Density of `M_n` for Exp input.
pub fn exp_size_pdf(n: u64, rho: f64, mu: f64) -> Result<f64, TheoryError> {
    let f = exp_size_cdf(n, rho, mu)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let log_rho = rho.ln();
    let a1 = ((mu - 1.0) * log_rho).exp_m1();
    if !a1.is_finite() {
        return Ok(0.0);
    }
    let x = 1.0 + nf / a1;
    let dpsi = digamma(x + nf - 1.0)? - digamma(x)?;
    let density = nf * (1.0 + a1) / a1 * f * log_rho / a1 * dpsi;
    Ok(density.max(0.0))
}

/// Closed-form approximations to quantiles of `M_n` for Exp input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpQuantileApprox {
    /// `log_ρ((n ln(n−1) + ln(1/q))/ln(1/q)) + 1`.
    pub primary: f64,
    /// `log_ρ n − log_ρ(−ln q)`.
    pub summary: f64,
}

pub fn exp_size_quantile_approx(
    n: u64,
    rho: f64,
    q: f64,
) -> Result<ExpQuantileApprox, TheoryError> {
    check_n(n, 2)?;
    check_rho(rho)?;
    check_q(q)?;
    let nf = n as f64;
    let log_rho = rho.ln();
    let l = -q.ln();
    Ok(ExpQuantileApprox {
        primary: ((nf * (nf - 1.0).ln() + l) / l).ln() / log_rho + 1.0,
        summary: (nf.ln() - l.ln()) / log_rho,
    })
}

/// Quantile of `M_n` for Exp input, by bisection on the CDF to 1e−10.
pub fn exp_size_quantile(n: u64, rho: f64, q: f64) -> Result<f64, TheoryError> {
    check_q(q)?;
    let mut lo = 1.0;
    let mut hi = 1.0 + 64.0 / rho.ln();
    while exp_size_cdf(n, rho, hi)? < q {
        lo = hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exp_size_cdf(n, rho, mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bounds on the mean and variance of `M_n` for Exp input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSizeMomentBounds {
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub mean: BoundPair,
    /// Raw variance bounds; the lower end may be negative.
    pub variance: BoundPair,
    pub variance_lower_floored: f64,
}

pub fn exp_size_moment_bounds(n: u64, rho: f64) -> Result<ExpSizeMomentBounds, TheoryError> {
    check_n(n, 2)?;
    check_rho(rho)?;
    let nf = n as f64;
    let log_rho = rho.ln();
    let lambda1 = nf * nf.ln() / (nf - 1.0);
    let ln_nm1 = (nf - 1.0).ln();
    let lambda2 =
        nf * (ln_nm1 * ln_nm1 + PI * PI / 3.0 + 2.0 * dilog(nf / (nf - 1.0))?) / (nf - 1.0);
    let s1 = (2.0 * nf - 1.0).sqrt();
    let s3 = (2.0 * nf - 3.0).sqrt();
    let delta1 = nf * (nf - 2.0) * (PI * (s1 - 1.0) - 2.0 * ((nf - 1.0) / s1).atan())
        / (2.0 * s1 * s3 * (nf - 1.0));
    let delta2 =
        4.0 * nf * (nf - 2.0) * (((nf - 1.0) / 4.0).ln() + 2.0 * (1.0 / (nf - 1.0).sqrt()).asinh())
            / (s3 * (nf - 1.0));
    let mean = BoundPair::new(
        1.0 + lambda1 / log_rho,
        1.0 + (lambda1 + delta1) / log_rho,
        false,
    );
    let l2 = log_rho * log_rho;
    let var_lo = (lambda2 - (lambda1 + delta1).powi(2)) / l2;
    let var_hi = (lambda2 + delta2 - lambda1 * lambda1) / l2;
    Ok(ExpSizeMomentBounds {
        lambda1,
        lambda2,
        delta1,
        delta2,
        mean,
        variance: BoundPair::new(var_lo, var_hi, false),
        variance_lower_floored: var_lo.max(0.0),
    })
}

/// Gumbel approximation to `M_n` for Exp input.
pub fn exp_size_gumbel(n: u64, rho: f64) -> Result<GumbelApprox, TheoryError> {
    check_n(n, 3)?;
    check_rho(rho)?;
    let nf = n as f64;
    let log_rho = rho.ln();
    Ok(GumbelApprox::new(
        1.0 + (nf.ln() + nf.ln().ln()) / log_rho,
        1.0 / log_rho,
    ))
}

/// `M_n` (extremes of the whole sample) or `A_n` (maximum against the known location ν).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeVariant {
    Max,
    Anchored,
}

/// Exact size law for Pareto input: `F(μ) = (1 − ρ^{−β(μ−1)})^m` with
/// `m = n − 1` for `M_n` and `m = n` for `A_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSizeLaw {
    pub n: u64,
    pub rho: f64,
    pub beta: f64,
    pub variant: SizeVariant,
    exponent: f64,
    scale: f64,
}

pub fn pareto_size_law(
    n: u64,
    rho: f64,
    beta: f64,
    variant: SizeVariant,
) -> Result<ParetoSizeLaw, TheoryError> {
    let m = match variant {
        SizeVariant::Max => {
            check_n(n, 2)?;
            n - 1
        }
        SizeVariant::Anchored => {
            check_n(n, 1)?;
            n
        }
    };
    check_rho(rho)?;
    check_positive("beta", beta)?;
    Ok(ParetoSizeLaw {
        n,
        rho,
        beta,
        variant,
        exponent: m as f64,
        scale: beta * rho.ln(),
    })
}

impl ParetoSizeLaw {
    /// Number of exponential maxima making up the law.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn cdf(&self, mu: f64) -> f64 {
        if mu <= 1.0 {
            return 0.0;
        }
        let r = -(mu - 1.0) * self.scale;
        (self.exponent * (-r.exp()).ln_1p()).exp()
    }

    pub fn pdf(&self, mu: f64) -> f64 {
        if mu <= 1.0 {
            return 0.0;
        }
        let m = self.exponent;
        let r = (-(mu - 1.0) * self.scale).exp();
        self.scale * m * ((m - 1.0) * (-r).ln_1p()).exp() * r
    }

    pub fn quantile(&self, q: f64) -> Result<f64, TheoryError> {
        check_q(q)?;
        let tail = -(q.ln() / self.exponent).exp_m1();
        Ok(1.0 - tail.ln() / self.scale)
    }

    /// `(ln n − ln(−ln q))/(β ln ρ)`.
    pub fn quantile_asymptotic(&self, q: f64) -> Result<f64, TheoryError> {
        check_q(q)?;
        Ok(((self.n as f64).ln() - (-q.ln()).ln()) / self.scale)
    }
}

/// Exact moments of a Pareto size law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSizeMoments {
    pub law: ParetoSizeLaw,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

pub fn pareto_size_moments(
    n: u64,
    rho: f64,
    beta: f64,
    variant: SizeVariant,
) -> Result<ParetoSizeMoments, TheoryError> {
    let law = pareto_size_law(n, rho, beta, variant)?;
    // (size − 1)·β ln ρ is the maximum of `m` standard exponentials, whose
    // cumulants are ψ(m+1)+γ, π²/6 − ψ₁(m+1) and 2ζ(3) + ψ₂(m+1).
    let a = law.exponent + 1.0;
    let k1 = digamma(a)? + EULER_GAMMA;
    let k2 = PI * PI / 6.0 - polygamma(1, a)?;
    let k3 = 2.0 * ZETA3 + polygamma(2, a)?;
    Ok(ParetoSizeMoments {
        law,
        mean: 1.0 + k1 / law.scale,
        variance: k2 / (law.scale * law.scale),
        skewness: k3 / k2.powf(1.5),
    })
}

impl ParetoSizeMoments {
    /// Moment generating function `E e^{t·size}` for `t < β ln ρ`.
    pub fn mgf(&self, t: f64) -> Result<f64, TheoryError> {
        if t.is_nan() || t >= self.law.scale {
            return Err(domain(format!(
                "mgf argument {t} must be below beta*ln(rho) = {}",
                self.law.scale
            )));
        }
        let m = self.law.exponent;
        Ok((m.ln() + t + log_beta(1.0 - t / self.law.scale, m)?).exp())
    }
}

/// Gumbel approximation `μ = 1 + ln n/(β ln ρ)`, `σ = 1/(β ln ρ)` for Pareto input.
pub fn pareto_size_gumbel(
    n: u64,
    rho: f64,
    beta: f64,
    variant: SizeVariant,
) -> Result<GumbelApprox, TheoryError> {
    check_n(n, 2)?;
    let law = pareto_size_law(n, rho, beta, variant)?;
    Ok(GumbelApprox::new(
        1.0 + (n as f64).ln() / law.scale,
        1.0 / law.scale,
    ))
}
