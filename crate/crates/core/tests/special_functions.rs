mod common;

use std::f64::consts::{E, PI};

use common::{close, integrate};
use exphist::simulation::{open_uniform, replication_rng};
use exphist::special::{
    beta, digamma, dilog, lambert_w, ln_gamma, log_beta, polygamma, SpecialError, WBranch,
    EULER_GAMMA, ZETA3,
};
use proptest::prelude::*;

fn dilog_by_quadrature(x: f64) -> f64 {
    let f = |t: f64| {
        let d = 1.0 - t;
        if d.abs() < 1e-6 {
            // ln t/(1−t) = −1 − d/2 − d²/3 − … near t = 1.
            -1.0 - d / 2.0 - d * d / 3.0
        } else {
            t.ln() / d
        }
    };
    integrate(&f, 1.0, x, 1e-14)
}

/// ln B(m, n) = ln((m−1)!) − Σ_{k<m} ln(n+k) for positive integers.
fn ln_beta_integer(m: u64, n: u64) -> f64 {
    let (m, n) = (m.min(n), m.max(n));
    (1..m).map(|k| (k as f64).ln()).sum::<f64>()
        - (0..m).map(|k| ((n + k) as f64).ln()).sum::<f64>()
}

#[test]
fn log_beta_examples() {
    for y in [0.3, 1.0, 7.5, 1e4, 1e8] {
        assert!(close(log_beta(1.0, y).unwrap(), -y.ln(), 1e-12));
    }
    for n in 1..=100u32 {
        let n = n as f64;
        let b = log_beta(2.0, n).unwrap().exp();
        assert!((b - 1.0 / (n * (n + 1.0))).abs() <= 1e-12 * b);
    }
    assert!(log_beta(0.0, 1.0).is_err());
    assert!(log_beta(1.0, -2.0).is_err());
}

#[test]
fn log_beta_matches_factorials() {
    for &(m, n) in &[
        (3u64, 4u64),
        (10, 250),
        (1000, 1000),
        (17, 5000),
        (2, 90_000),
        (40, 10_000_000),
    ] {
        let exact = ln_beta_integer(m, n);
        let got = log_beta(m as f64, n as f64).unwrap();
        assert!(close(got, exact, 1e-12), "B({m},{n}): {got} vs {exact}");
    }
}

#[test]
fn beta_inequality_grid() {
    let a = |x: f64| (x - 1.0) / (x * (2.0 * x - 1.0).sqrt());
    let grid: Vec<f64> = (1..=80)
        .map(|i| 1.0 + 99.0 * (i as f64 / 80.0).powi(2))
        .collect();
    for &x in &grid {
        for &y in &grid {
            let gap = 1.0 / (x * y) - beta(x, y).unwrap();
            let bound = a(x) * a(y);
            assert!(gap >= -1e-15, "x={x} y={y} gap={gap}");
            assert!(gap <= bound + 1e-15, "x={x} y={y} gap={gap} bound={bound}");
            assert!(bound <= 0.09017);
        }
    }
}

#[test]
fn beta_large_argument_asymptotics() {
    let n = 1e6;
    for c in [0.5, 1.0, 2.0, 3.3] {
        let b = log_beta(c, n).unwrap();
        let approx = ln_gamma(c).unwrap() - c * n.ln();
        assert!(((b - approx).exp() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn digamma_and_polygamma_examples() {
    assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
    assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
    assert!((polygamma(1, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
    assert!((polygamma(2, 1.0).unwrap() + 2.0 * ZETA3).abs() < 1e-13);
    assert_eq!(polygamma(0, 3.0).unwrap(), digamma(3.0).unwrap());
    assert_eq!(polygamma(3, 1.0), Err(SpecialError::UnsupportedOrder(3)));
    assert!(digamma(0.0).is_err());
    assert!(polygamma(1, -1.0).is_err());
}

#[test]
fn digamma_large_argument() {
    let x = 1e6;
    assert!((digamma(x).unwrap() - (x.ln() - 0.5 / x)).abs() < 1e-12);
}

#[test]
fn dilog_examples() {
    assert_eq!(dilog(1.0).unwrap(), 0.0);
    let two = dilog(2.0).unwrap();
    assert!((two - dilog_by_quadrature(2.0)).abs() < 1e-10);
    // Li₂(−1) = −π²/12.
    assert!((two + PI * PI / 12.0).abs() < 1e-12);
    for n in [2.0, 10.0, 100.0] {
        let x = n / (n - 1.0);
        assert!((dilog(x).unwrap() - dilog_by_quadrature(x)).abs() < 1e-10);
    }
    assert!(dilog(0.0).is_err());
}

#[test]
fn lambert_examples() {
    assert_eq!(lambert_w(WBranch::Principal, 0.0).unwrap(), 0.0);
    assert!((lambert_w(WBranch::Principal, E).unwrap() - 1.0).abs() < 1e-15);
    assert!((lambert_w(WBranch::MinusOne, -1.0 / E).unwrap() + 1.0).abs() < 1e-7);
    assert!(lambert_w(WBranch::MinusOne, 0.0).is_err());
    assert!(lambert_w(WBranch::MinusOne, 0.5).is_err());
    assert!(lambert_w(WBranch::Principal, -0.4).is_err());
}

#[test]
fn lambert_residuals_on_random_arguments() {
    let mut rng = replication_rng(7, 0, 0);
    let e_inv = 1.0 / E;
    for _ in 0..10_000 {
        let u = open_uniform(&mut rng);
        let v = -3.0 + 15.0 * open_uniform(&mut rng);
        // Principal branch: [−1/e, 10^12]; minus-one branch: [−1/e, 0).
        let x0 = if u < 0.5 {
            -e_inv + 2.0 * u * e_inv
        } else {
            10f64.powf(v)
        };
        let x1 = -e_inv * (1.0 - u);
        for (branch, x) in [(WBranch::Principal, x0), (WBranch::MinusOne, x1)] {
            if branch == WBranch::MinusOne && x >= 0.0 {
                continue;
            }
            let w = lambert_w(branch, x).unwrap();
            let residual = (w * w.exp() - x).abs();
            assert!(
                residual <= 1e-12 * x.abs().max(1.0),
                "{branch:?} x={x} w={w}"
            );
        }
    }
}

proptest! {
    #[test]
    fn digamma_recurrence(lx in -6.0f64..4.0) {
        let x = 10f64.powf(lx);
        let (a, b) = (digamma(x + 1.0).unwrap(), digamma(x).unwrap());
        let scale = a.abs().max(b.abs()).max(1.0 / x).max(1.0);
        prop_assert!((a - b - 1.0 / x).abs() <= 1e-11 * scale);
    }

    #[test]
    fn trigamma_recurrence(lx in -6.0f64..4.0) {
        let x = 10f64.powf(lx);
        let (a, b) = (polygamma(1, x + 1.0).unwrap(), polygamma(1, x).unwrap());
        let scale = b.abs().max(1.0);
        prop_assert!((a - b + 1.0 / (x * x)).abs() <= 1e-11 * scale);
    }

    #[test]
    fn tetragamma_recurrence(lx in -6.0f64..4.0) {
        let x = 10f64.powf(lx);
        let (a, b) = (polygamma(2, x + 1.0).unwrap(), polygamma(2, x).unwrap());
        let scale = b.abs().max(1.0);
        prop_assert!((a - b - 2.0 / (x * x * x)).abs() <= 1e-11 * scale);
    }

    #[test]
    fn ln_gamma_recurrence(lx in -6.0f64..8.0) {
        let x = 10f64.powf(lx);
        let (a, b) = (ln_gamma(x + 1.0).unwrap(), ln_gamma(x).unwrap());
        prop_assert!(close(a, b + x.ln(), 1e-12));
    }

    #[test]
    fn log_beta_symmetry_and_recurrence(lx in -3.0f64..8.0, ly in -3.0f64..8.0) {
        let (x, y) = (10f64.powf(lx), 10f64.powf(ly));
        let b = log_beta(x, y).unwrap();
        prop_assert_eq!(b, log_beta(y, x).unwrap());
        // B(x+1, y) = B(x, y)·x/(x+y).
        let next = log_beta(x + 1.0, y).unwrap();
        let expect = b + (x / (x + y)).ln();
        prop_assert!(close(next, expect, 1e-12 * (1.0 + expect.abs().log10().max(0.0))));
    }

    #[test]
    fn lambert_branch_ordering(t in 1e-9f64..1.0) {
        let x = -t / E;
        let w0 = lambert_w(WBranch::Principal, x).unwrap();
        let wm = lambert_w(WBranch::MinusOne, x).unwrap();
        prop_assert!(wm <= -1.0 && -1.0 <= w0);
    }
}
