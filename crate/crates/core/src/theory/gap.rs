//! The longest run of empty bins between the smallest and largest occupied bin.

use super::{check_rho, domain, BoundPair, DistributionSpec, TheoryError};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Geometric {
        n: u64,
        tau: f64,
    },
    /// The gap is zero.
    Degenerate,
}

/// Bounds on the distribution and moments of the longest gap `L_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapLaw {
    shape: Shape,
    pub mean_bounds: BoundPair,
    pub second_moment_bounds: BoundPair,
    pub variance_bounds: BoundPair,
}

const PRODUCT_CUTOFF: f64 = 1e-18;

/// `Π_{i=1}^{terms} (1 − e^{−i·rate})`, stopping once factors are within 1e−18 of one.
fn product(rate: f64, terms: u64) -> f64 {
    if rate <= 0.0 {
        return if terms == 0 { 1.0 } else { 0.0 };
    }
    let mut log_sum = 0.0;
    let mut i = 1u64;
    while i <= terms {
        let deficit = (-(i as f64) * rate).exp();
        if deficit < PRODUCT_CUTOFF {
            break;
        }
        log_sum += (-deficit).ln_1p();
        i += 1;
    }
    log_sum.exp()
}

impl GapLaw {
    fn check_l(l: u64) -> Result<(), TheoryError> {
        if l >= 1 {
            Ok(())
        } else {
            Err(domain("gap length must be at least 1"))
        }
    }

    /// Lower bound on `Pr(L_n ≤ l)`.
    pub fn cdf_lower(&self, l: u64) -> Result<f64, TheoryError> {
        Self::check_l(l)?;
        Ok(match self.shape {
            Shape::Geometric { tau, .. } => product((l - 1) as f64 * tau, u64::MAX),
            Shape::Degenerate => 1.0,
        })
    }

    /// Upper bound on `Pr(L_n ≤ l)`.
    pub fn cdf_upper(&self, l: u64) -> Result<f64, TheoryError> {
        Self::check_l(l)?;
        Ok(match self.shape {
            Shape::Geometric { n, tau } => product((l + 1) as f64 * tau, n - 1),
            Shape::Degenerate => 1.0,
        })
    }

    fn degenerate() -> Self {
        let zero = BoundPair::new(0.0, 0.0, true);
        Self {
            shape: Shape::Degenerate,
            mean_bounds: zero,
            second_moment_bounds: zero,
            variance_bounds: zero,
        }
    }
}

/// Gap bounds for `n` Geometric(p) indices. A very large `n` gives the `n → ∞` bounds.
pub fn geometric_gap_bounds(n: u64, p: f64) -> Result<GapLaw, TheoryError> {
    if n < 1 {
        return Err(domain("sample size must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0, 1), got {p}")));
    }
    let tau = -(-p).ln_1p();
    let q = (-tau).exp();
    let qn = (n as f64 * -tau).exp();
    let mean_lower = q * q / p - qn * qn / (1.0 - qn);
    let mean_upper = 1.5 / p + 1.0;
    let second_lower = 2.0 * q * q / (p * p) - 2.0 * qn * qn / ((1.0 - qn) * (1.0 - qn));
    let second_upper = 3.3 / (p * p) + 1.5 / p + 2.0;
    Ok(GapLaw {
        shape: Shape::Geometric { n, tau },
        mean_bounds: BoundPair::new(mean_lower, mean_upper, false),
        second_moment_bounds: BoundPair::new(second_lower, second_upper, false),
        variance_bounds: BoundPair::new(0.0, second_upper - mean_lower * mean_lower, false),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapQualifier {
    /// Bounds hold for every n.
    Proven,
    /// Bounds rest on an unproven approximation.
    Conjectured,
    /// The gap vanishes almost surely as n grows.
    AlmostSureZero,
}

/// Gap bounds for sketch input, with the `n → ∞` limits of the mean and variance bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedGapLaw {
    pub law: GapLaw,
    pub limit_mean: BoundPair,
    pub limit_variance: BoundPair,
    pub qualifier: GapQualifier,
}

/// Limits `[1/(r(r−1)), (2.5r−1)/(r−1)]` and `[0, r(7.8r−5.5)/(r−1)²]` for bin ratio `r`.
fn limits(r: f64) -> (BoundPair, BoundPair) {
    (
        BoundPair::new(1.0 / (r * (r - 1.0)), (2.5 * r - 1.0) / (r - 1.0), true),
        BoundPair::new(0.0, r * (7.8 * r - 5.5) / ((r - 1.0) * (r - 1.0)), true),
    )
}

pub fn applied_gap_bounds(
    spec: &DistributionSpec,
    n: u64,
    rho: f64,
) -> Result<AppliedGapLaw, TheoryError> {
    check_rho(rho)?;
    spec.validate()?;
    match *spec {
        DistributionSpec::F0 { .. } => {
            let (limit_mean, limit_variance) = limits(rho);
            Ok(AppliedGapLaw {
                law: geometric_gap_bounds(n, 1.0 - 1.0 / rho)?,
                limit_mean,
                limit_variance,
                qualifier: GapQualifier::Conjectured,
            })
        }
        DistributionSpec::F1 { .. } => {
            let zero = BoundPair::new(0.0, 0.0, true);
            Ok(AppliedGapLaw {
                law: GapLaw::degenerate(),
                limit_mean: zero,
                limit_variance: zero,
                qualifier: GapQualifier::AlmostSureZero,
            })
        }
        DistributionSpec::Pareto { beta, .. } => {
            let tau = beta * rho.ln();
            let (limit_mean, limit_variance) = limits(tau.exp());
            Ok(AppliedGapLaw {
                law: geometric_gap_bounds(n, -(-tau).exp_m1())?,
                limit_mean,
                limit_variance,
                qualifier: GapQualifier::Proven,
            })
        }
        other => Err(domain(format!("no gap law for {other}"))),
    }
}
