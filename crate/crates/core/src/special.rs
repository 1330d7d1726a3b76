//! Real-valued special functions: log-Gamma and log-Beta, digamma and
//! polygamma of orders 1 and 2, a dilogarithm and both real branches of the
//! Lambert W function.

use std::f64::consts::{E, PI};

use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Apéry's constant ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SHIFT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument {value} outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error("polygamma of order {0} is not supported (orders 0, 1 and 2 only)")]
    UnsupportedOrder(u32),
}

fn require_positive(function: &'static str, x: f64) -> Result<(), SpecialError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SpecialError::Domain { function, value: x })
    }
}

/// Remainder of Stirling's series, `ln Γ(x) − [(x − ½) ln x − x + ln √(2π)]`, for `x ≥ 10`.
fn stirling_remainder(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let z = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * z + c;
    }
    acc / x
}

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialError> {
    require_positive("ln_gamma", x)?;
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x >= SHIFT {
        return Ok((x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_remainder(x));
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < SHIFT {
        prod *= y;
        y += 1.0;
    }
    Ok((y - 0.5) * y.ln() - y + LN_SQRT_2PI + stirling_remainder(y) - prod.ln())
}

/// Natural logarithm of the Beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y).
///
/// Large arguments are handled through Stirling remainders so that the
/// cancellation between the three log-Gamma terms does not destroy accuracy.
pub fn log_beta(x: f64, y: f64) -> Result<f64, SpecialError> {
    require_positive("log_beta", x)?;
    require_positive("log_beta", y)?;
    let (p, q) = if x <= y { (x, y) } else { (y, x) };
    let s = p + q;
    if p >= SHIFT {
        let corr = stirling_remainder(p) + stirling_remainder(q) - stirling_remainder(s);
        Ok(-0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / s).ln() + q * (-p / s).ln_1p())
    } else if q >= SHIFT {
        let corr = stirling_remainder(q) - stirling_remainder(s);
        Ok(ln_gamma(p)? + corr + p - p * s.ln() + (q - 0.5) * (-p / s).ln_1p())
    } else {
        Ok(ln_gamma(p)? + ln_gamma(q)? - ln_gamma(s)?)
    }
}

/// The Beta function B(x, y).
pub fn beta(x: f64, y: f64) -> Result<f64, SpecialError> {
    log_beta(x, y).map(f64::exp)
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64, SpecialError> {
    require_positive("digamma", x)?;
    let mut y = x;
    let mut acc = 0.0;
    while y < SHIFT {
        acc -= 1.0 / y;
        y += 1.0;
    }
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
    ];
    let z = 1.0 / (y * y);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * z + c;
    }
    Ok(acc + y.ln() - 0.5 / y - series * z)
}

fn trigamma(x: f64) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    while y < SHIFT {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    const C: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let z = 1.0 / (y * y);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * z + c;
    }
    acc + 1.0 / y + 0.5 * z + series * z / y
}

fn tetragamma(x: f64) -> f64 {
    const START: f64 = 15.0;
    let mut y = x;
    let mut acc = 0.0;
    while y < START {
        acc -= 2.0 / (y * y * y);
        y += 1.0;
    }
    const C: [f64; 8] = [
        -0.5,
        1.0 / 6.0,
        -1.0 / 6.0,
        3.0 / 10.0,
        -5.0 / 6.0,
        691.0 / 210.0,
        -35.0 / 2.0,
        3617.0 / 30.0,
    ];
    let z = 1.0 / (y * y);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * z + c;
    }
    acc - z - z / y + series * z * z
}

/// Polygamma function ψ⁽ᵐ⁾(x) for `m ∈ {0, 1, 2}` and `x > 0`.
pub fn polygamma(m: u32, x: f64) -> Result<f64, SpecialError> {
    match m {
        0 => digamma(x),
        1 => {
            require_positive("polygamma", x)?;
            Ok(trigamma(x))
        }
        2 => {
            require_positive("polygamma", x)?;
            Ok(tetragamma(x))
        }
        _ => Err(SpecialError::UnsupportedOrder(m)),
    }
}

/// Standard dilogarithm Li₂(z) for real `z ≤ 1`.
fn li2(z: f64) -> f64 {
    const PI2_6: f64 = PI * PI / 6.0;
    if z == 1.0 {
        return PI2_6;
    }
    if z < -1.0 {
        let l = (-z).ln();
        return -PI2_6 - 0.5 * l * l - li2(1.0 / z);
    }
    if z > 0.5 {
        return PI2_6 - z.ln() * (-z).ln_1p() - li2(1.0 - z);
    }
    #[allow(clippy::excessive_precision)]
    const B: [f64; 10] = [
        2.777_777_777_777_777_8e-2,
        -2.777_777_777_777_777_8e-4,
        4.724_111_866_969_009_8e-6,
        -9.185_773_074_661_963_6e-8,
        1.897_886_998_897_099_9e-9,
        -4.064_761_645_144_225_5e-11,
        8.921_691_020_456_452_6e-13,
        -1.993_929_586_072_107_6e-14,
        4.518_980_029_619_918_2e-16,
        -1.035_651_761_218_124_7e-17,
    ];
    let u = -(-z).ln_1p();
    let u2 = u * u;
    let mut series = 0.0;
    for b in B.iter().rev() {
        series = series * u2 + b;
    }
    u - 0.25 * u2 + series * u2 * u
}

/// The dilogarithm `∫₁ˣ ln t / (1 − t) dt` for `x > 0`.
///
/// In terms of the standard polylogarithm this equals `Li₂(1 − x)`.
pub fn dilog(x: f64) -> Result<f64, SpecialError> {
    require_positive("dilog", x)?;
    if x == 1.0 {
        return Ok(0.0);
    }
    Ok(li2(1.0 - x))
}

/// Real branch of the Lambert W function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WBranch {
    /// W₀, defined on `[−1/e, ∞)` with values `≥ −1`.
    Principal,
    /// W₋₁, defined on `[−1/e, 0)` with values `≤ −1`.
    MinusOne,
}

const BRANCH_POINT: f64 = -1.0 / E;

/// Solves `w·e^w = x` on the requested branch.
pub fn lambert_w(branch: WBranch, x: f64) -> Result<f64, SpecialError> {
    let domain = SpecialError::Domain {
        function: "lambert_w",
        value: x,
    };
    if !x.is_finite() || x < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(domain);
    }
    if branch == WBranch::MinusOne && x >= 0.0 {
        return Err(domain);
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let near_branch = x < -0.25;
    let w = match branch {
        WBranch::Principal if near_branch => halley(x, branch_series(x, 1.0)),
        WBranch::Principal if x <= E => halley(x, x.ln_1p()),
        WBranch::Principal => {
            let l1 = x.ln();
            let l2 = l1.ln();
            log_newton(x.ln(), l1 - l2 + l2 / l1, 1.0)
        }
        WBranch::MinusOne if near_branch => halley(x, branch_series(x, -1.0)),
        WBranch::MinusOne => {
            let u = -(-x).ln() - 1.0;
            let start = -1.0 - (2.0 * u).sqrt() - 5.0 * u / 6.0;
            log_newton((-x).ln(), start, -1.0)
        }
    };
    Ok(w)
}

/// Series about the branch point in `p = ±√(2(ex + 1))`.
fn branch_series(x: f64, sign: f64) -> f64 {
    let p = sign * (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Newton iteration on `w + ln(sign·w) = ln|x|`, used away from the branch point.
fn log_newton(ln_abs_x: f64, mut w: f64, sign: f64) -> f64 {
    for _ in 0..64 {
        let g = w + (sign * w).ln() - ln_abs_x;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    w
}
