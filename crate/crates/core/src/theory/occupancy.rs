//! Occupied-bin counts `K_n` and empty-bin counts `E_n = M_n − K_n`.
//!
//! Exp(λ) input is analysed by splitting it at the boundary of its most
//! likely bin into a truncated part F0, whose bin masses grow geometrically
//! towards the split, and a shifted part F1, whose bin masses decay doubly
//! exponentially above it.

use super::{check_positive, check_rho, domain, BoundPair, TheoryError};
use crate::special::{lambert_w, log_beta, WBranch, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyLaw {
    /// Approximation to `E K_n`.
    pub expected_occupancy: f64,
    /// Asymptotic bounds on `Var K_n`.
    pub variance_bound: BoundPair,
    /// Set when the variance bound is attained as a limit rather than only bounding it.
    pub variance_is_limit: bool,
    /// Asymptotic upper bound on `E E_n`.
    pub empty_bins_bound: f64,
}

/// The split of Exp(λ) at `ρ^κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSplit {
    pub kappa: f64,
    pub p0: f64,
    pub cutoff: f64,
    rho: f64,
    log_rho: f64,
}

pub fn exp_split(lambda: f64, rho: f64) -> Result<ExpSplit, TheoryError> {
    check_positive("lambda", lambda)?;
    check_rho(rho)?;
    let log_rho = rho.ln();
    let kappa = 1.0 + (log_rho / (lambda * (rho - 1.0))).ln() / log_rho;
    let (cutoff, p0) = super::split_point(lambda, rho);
    Ok(ExpSplit {
        kappa,
        p0,
        cutoff,
        rho,
        log_rho,
    })
}

impl ExpSplit {
    /// `e^{−a} − e^{−(a+d)}` without cancellation.
    fn gap(a: f64, d: f64) -> f64 {
        (-a).exp() * -(-d).exp_m1()
    }

    /// Mass of F0 in `(ρ^{κ+k−1}, ρ^{κ+k}]`, `k ≤ 0`; zero for `k > 0`.
    pub fn f0_bin_mass(&self, k: i64) -> f64 {
        if k > 0 {
            return 0.0;
        }
        let rk = self.rho.powi(k as i32);
        Self::gap(self.log_rho * rk / (self.rho - 1.0), self.log_rho * rk) / self.p0
    }

    /// Mass of F1 in `(ρ^{κ+k−1}, ρ^{κ+k}]`, `k ≥ 1`; zero for `k < 1`.
    pub fn f1_bin_mass(&self, k: i64) -> f64 {
        if k < 1 {
            return 0.0;
        }
        let rk = self.rho.powf(k as f64);
        if !rk.is_finite() {
            return 0.0;
        }
        Self::gap(
            self.log_rho * (rk - self.rho) / (self.rho - 1.0),
            self.log_rho * rk,
        )
    }

    /// Non-negligible F0 bin masses, from `k = 0` downwards.
    pub fn f0_masses(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0i64;
        loop {
            let m = self.f0_bin_mass(k);
            if m < 1e-20 && k < -10 {
                break;
            }
            out.push(m);
            k -= 1;
        }
        out
    }

    /// Non-negligible F1 bin masses, from `k = 1` upwards.
    pub fn f1_masses(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 1i64;
        loop {
            let m = self.f1_bin_mass(k);
            if m == 0.0 || (m < 1e-300 && k > 10) {
                break;
            }
            out.push(m);
            k += 1;
        }
        out
    }
}

/// `E K_n = Σ_k 1 − (1 − p_k)^n` for the given bin masses.
pub fn exact_expected_occupancy(masses: &[f64], n: f64) -> f64 {
    masses.iter().map(|&p| -(n * (-p).ln_1p()).exp_m1()).sum()
}

fn ceil_log2(log_rho: f64) -> f64 {
    (2f64.ln() / log_rho).ceil()
}

fn e0k(m: f64, rho: f64, log_rho: f64, p0: f64) -> Result<f64, TheoryError> {
    let arg = -p0 * rho.sqrt() / ((rho - 1.0) * m);
    let w = lambert_w(WBranch::Principal, arg).map_err(|_| {
        TheoryError::NotAsymptotic(format!(
            "{m} draws below the split are too few for the approximation"
        ))
    })?;
    Ok((m * log_rho / p0).ln() / log_rho + w / log_rho)
}

fn e1k(m: f64, rho: f64, log_rho: f64) -> Result<f64, TheoryError> {
    let arg = -(-rho * log_rho / (rho - 1.0)).exp() / (m * log_rho);
    let w = lambert_w(WBranch::MinusOne, arg).map_err(|_| {
        TheoryError::NotAsymptotic(format!(
            "{m} draws above the split are too few for the approximation"
        ))
    })?;
    Ok((-(rho - 1.0) / log_rho * w).ln() / log_rho)
}

fn f0_law(m: f64, rho: f64) -> Result<OccupancyLaw, TheoryError> {
    let log_rho = rho.ln();
    let p0 = -(-rho * log_rho / (rho - 1.0)).exp_m1();
    Ok(OccupancyLaw {
        expected_occupancy: e0k(m, rho, log_rho, p0)?,
        variance_bound: BoundPair::new(0.0, ceil_log2(log_rho), true),
        variance_is_limit: false,
        empty_bins_bound: (rho / (rho - 1.0)).ln() / log_rho + EULER_GAMMA / log_rho + 1.0,
    })
}

fn f1_law(m: f64, rho: f64) -> Result<OccupancyLaw, TheoryError> {
    let log_rho = rho.ln();
    Ok(OccupancyLaw {
        expected_occupancy: e1k(m, rho, log_rho)?,
        variance_bound: BoundPair::new(0.0, 1.0, true),
        variance_is_limit: false,
        empty_bins_bound: 1.5f64.ln() / log_rho,
    })
}

fn check_n(n: u64) -> Result<(), TheoryError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(domain("sample size must be at least 2"))
    }
}

/// Occupancy of `n` draws from F0 (bins aligned at the split point).
pub fn f0_occupancy(n: u64, rho: f64) -> Result<OccupancyLaw, TheoryError> {
    check_n(n)?;
    check_rho(rho)?;
    f0_law(n as f64, rho)
}

/// Occupancy of `n` draws from F1 (bins aligned at the split point).
pub fn f1_occupancy(n: u64, rho: f64) -> Result<OccupancyLaw, TheoryError> {
    check_n(n)?;
    check_rho(rho)?;
    f1_law(n as f64, rho)
}

/// Occupancy of Exp input together with the contributions of both sides of the split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpOccupancy {
    pub law: OccupancyLaw,
    pub below: OccupancyLaw,
    pub above: OccupancyLaw,
    pub n0: f64,
    pub n1: f64,
}

pub fn exp_occupancy(n: u64, lambda: f64, rho: f64) -> Result<ExpOccupancy, TheoryError> {
    check_n(n)?;
    let split = exp_split(lambda, rho)?;
    let n0 = n as f64 * split.p0;
    let n1 = n as f64 * (1.0 - split.p0);
    let below = f0_law(n0, rho)?;
    let above = f1_law(n1, rho)?;
    let log_rho = split.log_rho;
    let law = OccupancyLaw {
        expected_occupancy: below.expected_occupancy + above.expected_occupancy,
        variance_bound: BoundPair::new(0.0, ceil_log2(log_rho) + 1.0, true),
        variance_is_limit: false,
        empty_bins_bound: (3.0 * rho / (2.0 * (rho - 1.0))).ln() / log_rho
            + EULER_GAMMA / log_rho
            + 1.0,
    };
    Ok(ExpOccupancy {
        law,
        below,
        above,
        n0,
        n1,
    })
}

/// Largest `n` accepted by [`exp_occupancy_mixture`].
pub const MIXTURE_MAX_N: u64 = 10_000;

/// `E K_n` for Exp input with bins aligned at the split point, as the
/// binomial mixture over the number of draws falling below the split.
pub fn exp_occupancy_mixture(n: u64, lambda: f64, rho: f64) -> Result<f64, TheoryError> {
    check_n(n)?;
    if n > MIXTURE_MAX_N {
        return Err(domain(format!(
            "mixture is evaluated only for n <= {MIXTURE_MAX_N}"
        )));
    }
    let split = exp_split(lambda, rho)?;
    let f0 = split.f0_masses();
    let f1 = split.f1_masses();
    let nf = n as f64;
    let (lp0, lp1) = (split.p0.ln(), (1.0 - split.p0).ln());
    let mut total = 0.0;
    for j in 0..=n {
        let jf = j as f64;
        let log_choose = -(nf + 1.0).ln() - log_beta(jf + 1.0, nf - jf + 1.0)?;
        let w = (log_choose + jf * lp0 + (nf - jf) * lp1).exp();
        if w < 1e-300 {
            continue;
        }
        total += w * (exact_expected_occupancy(&f0, jf) + exact_expected_occupancy(&f1, nf - jf));
    }
    Ok(total)
}

/// Occupancy of geometric bin masses `p(1−p)^{k}`, written with `τ = −ln(1−p)`.
fn geometric_law(n: u64, p: f64, tau: f64) -> OccupancyLaw {
    let xi = 2f64.ln() / tau;
    let (upper, exact) = if (xi - xi.round()).abs() <= 1e-9 {
        (xi.round(), true)
    } else {
        (xi.ceil(), false)
    };
    OccupancyLaw {
        expected_occupancy: (1.0 + (p * n as f64).ln() / tau).max(1.0),
        variance_bound: BoundPair::new(0.0, upper, true),
        variance_is_limit: exact,
        empty_bins_bound: (-p.ln() + EULER_GAMMA) / tau,
    }
}

/// Occupancy of Geometric(p) indices.
pub fn geometric_occupancy(n: u64, p: f64) -> Result<OccupancyLaw, TheoryError> {
    check_n(n)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(geometric_law(n, p, -(-p).ln_1p()))
}

/// Occupancy of Pareto(ν, β) input.
pub fn pareto_occupancy(n: u64, rho: f64, beta: f64) -> Result<OccupancyLaw, TheoryError> {
    check_n(n)?;
    check_rho(rho)?;
    check_positive("beta", beta)?;
    let tau = beta * rho.ln();
    Ok(geometric_law(n, -(-tau).exp_m1(), tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO: f64 = 1.01 / 0.99;

    #[test]
    fn bound_components() {
        let o = exp_occupancy(1_000_000, 1.0, RHO).unwrap();
        assert_eq!(o.below.variance_bound.upper, 35.0);
        assert_eq!(o.above.variance_bound.upper, 1.0);
        assert_eq!(o.law.variance_bound.upper, 36.0);
        assert!((o.law.empty_bins_bound - 247.0).abs() < 1.0);
        assert!((o.below.empty_bins_bound - 226.0).abs() < 0.5);
        assert!((o.above.empty_bins_bound - 21.0).abs() < 1.0);
        let total = o.below.empty_bins_bound + o.above.empty_bins_bound;
        assert!((total - o.law.empty_bins_bound).abs() < 1e-9);
    }

    #[test]
    fn pareto_values() {
        let o = pareto_occupancy(1000, RHO, 1.0).unwrap();
        assert!((o.empty_bins_bound - 225.0).abs() < 0.5);
        assert_eq!(o.variance_bound.upper, 35.0);
        assert!(!o.variance_is_limit);
        // ξ = log_ρ 2 / β is an integer for β = log_ρ 2 / 20.
        let beta = 2f64.ln() / RHO.ln() / 20.0;
        let o = pareto_occupancy(1000, RHO, beta).unwrap();
        assert_eq!(o.variance_bound.upper, 20.0);
        assert!(o.variance_is_limit);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        assert!(matches!(
            exp_occupancy(10, 1.0, RHO),
            Err(TheoryError::NotAsymptotic(_))
        ));
        assert!(exp_occupancy(1, 1.0, RHO).is_err());
        assert!(exp_occupancy_mixture(MIXTURE_MAX_N + 1, 1.0, RHO).is_err());
    }

    #[test]
    fn split_masses_outside_support() {
        let s = exp_split(1.0, RHO).unwrap();
        assert_eq!(s.f0_bin_mass(1), 0.0);
        assert_eq!(s.f1_bin_mass(0), 0.0);
    }
}
