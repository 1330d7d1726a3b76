//! Bounds on the expected probability mass in, and beyond, the bin holding
//! the sample maximum.

use super::{check_positive, check_rho, domain, TheoryError};
use crate::special::log_beta;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMassBounds {
    /// Upper bound on the expected mass of the bin holding the maximum.
    pub p_last_upper: f64,
    /// Bounds on the expected mass above that bin.
    pub p_tail_lower: f64,
    pub p_tail_upper: f64,
    /// `1 − p_tail_lower`: an upper bound on the expected quantile level of the bin's top edge.
    pub q_max_upper: f64,
}

fn check_n(n: u64) -> Result<(), TheoryError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(domain("sample size must be at least 1"))
    }
}

/// Tail bounds for Exp input.
pub fn exp_tail_bounds(n: u64, rho: f64) -> Result<TailMassBounds, TheoryError> {
    check_n(n)?;
    check_rho(rho)?;
    let nf = n as f64;
    let upper_edge = (nf.ln() + log_beta(1.0 + 1.0 / rho, nf)?).exp();
    let p_tail_lower = (nf.ln() + log_beta(1.0 + rho, nf)?).exp();
    Ok(TailMassBounds {
        p_last_upper: (upper_edge - p_tail_lower).max(0.0),
        p_tail_lower,
        p_tail_upper: 1.0 / (nf + 1.0),
        q_max_upper: 1.0 - p_tail_lower,
    })
}

/// Tail bounds for Pareto(ν, β) input.
pub fn pareto_tail_bounds(n: u64, rho: f64, beta: f64) -> Result<TailMassBounds, TheoryError> {
    check_n(n)?;
    check_rho(rho)?;
    check_positive("beta", beta)?;
    let nf = n as f64;
    let rb = rho.powf(beta);
    let p_tail_lower = 1.0 / (rb * (nf + 1.0));
    Ok(TailMassBounds {
        p_last_upper: (rb - 1.0 / rb) / (nf + 1.0),
        p_tail_lower,
        p_tail_upper: 1.0 / (nf + 1.0),
        q_max_upper: 1.0 - p_tail_lower,
    })
}
