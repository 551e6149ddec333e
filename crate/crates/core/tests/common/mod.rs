//! Helpers shared by the integration tests.
#![allow(dead_code)]

use mprcap::analytic::{saturation_tau, throughput_pps, operating_point};
use mprcap::capacity::capacity_report;
use mprcap::{AccessModel, Scenario};

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Reference network with binary backoff.
pub fn table1(model: AccessModel, n: u32, m: u32) -> Scenario {
    Scenario::table1(model, n, m, 2.0).unwrap()
}

/// The equal-slot reference network: 50 stations, single reception.
pub fn scenario1() -> Scenario {
    table1(AccessModel::EqualSlot, 50, 1)
}

/// `scenario` carrying `frac` of its mean-delay-safe throughput.
pub fn at_sbdj_fraction(scenario: &Scenario, frac: f64) -> Scenario {
    let c = capacity_report(scenario).unwrap();
    scenario.with_offered_load(frac * c.pps(c.s_sbdj)).unwrap()
}

/// Operating transmit probability of a loaded scenario.
pub fn op_tau(scenario: &Scenario) -> f64 {
    operating_point(scenario).unwrap().expect("stable operating point").tau
}

pub fn saturation_pps(scenario: &Scenario) -> f64 {
    throughput_pps(saturation_tau(scenario).unwrap(), scenario)
}

/// Solve a small dense linear system by Gaussian elimination with partial
/// pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// First three moments from forward differences of a Laplace transform
/// near zero, given its complement `c(s) = 1 - F*(s)`.
///
/// `c(h)/h = m1 - m2 h/2 + m3 h^2/6 - ...`, so the moments are the low
/// coefficients of the polynomial interpolating `c(h)/h` at the steps
/// `h0, h0/2, ..., h0/2^degree` (a Richardson table in closed form).
pub fn fd_moments(c: impl Fn(f64) -> f64, h0: f64, degree: usize) -> [f64; 3] {
    let xs: Vec<f64> = (0..=degree).map(|k| 0.5f64.powi(k as i32)).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| c(x * h0) / (x * h0)).collect();
    let a: Vec<Vec<f64>> = xs.iter().map(|&x| (0..=degree).map(|k| x.powi(k as i32)).collect()).collect();
    let coef = solve(a, ys);
    [coef[0], -2.0 * coef[1] / h0, 6.0 * coef[2] / (h0 * h0)]
}

/// [`fd_moments`] with the step chosen automatically: several base steps
/// are tried, each extrapolated with two polynomial degrees, and the step
/// whose two estimates agree best is used. The disagreement is returned as
/// an error estimate.
pub fn fd_moments_auto(c: impl Fn(f64) -> f64) -> ([f64; 3], f64) {
    let mut best = ([f64::NAN; 3], f64::INFINITY);
    for level in [0.003, 0.01, 0.03, 0.1, 0.2, 0.4] {
        let h0 = step_for_level(&c, level);
        let a = fd_moments(&c, h0, 7);
        let b = fd_moments(&c, h0, 8);
        let err = (0..3).map(|k| rel(a[k], b[k])).fold(0.0, f64::max);
        if err < best.1 {
            best = (a, err);
        }
    }
    best
}

/// Step at which `c(h)` reaches `level`, found by bisection on a log scale.
pub fn step_for_level(c: impl Fn(f64) -> f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (1e-15f64, 1.0f64);
    while c(hi) < level {
        hi *= 10.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if c(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
