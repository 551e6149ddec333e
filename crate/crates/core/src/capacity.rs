//! Capacity under bounded delay moments.
//!
//! The mean access delay stays finite while `p_c < 1/r^2`, and its variance
//! while `p_c < 1/r^3`. The transmit probabilities at which `p_c` reaches
//! those limits are the BBMD and BBDJ boundaries. The safe throughputs
//! SBMD/SBDJ are the smaller of the boundary throughput and the saturation
//! throughput.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    optimal_tau, saturation_tau, tau_for_collision_prob, throughput,
};
use crate::delay::rho_tilde_on_curve;
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::numeric;
use crate::table::{fmt_num, CsvRow};

/// Solution of `p_c(tau) = 1/r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTau {
    pub tau: f64,
    /// False when even `tau = 1` keeps `p_c` below the limit; `tau` is then 1.
    pub reachable: bool,
}

/// Transmit probability at which the conditional collision probability
/// reaches `1/r^exponent`. Exponent 2 bounds the mean delay, 3 the jitter.
pub fn boundary_tau(scenario: &Scenario, exponent: u32) -> Result<BoundaryTau> {
    if !(2..=3).contains(&exponent) {
        return Err(Error::invalid("exponent", "must be 2 or 3"));
    }
    Ok(boundary_at(scenario.mac.r.powi(exponent as i32).recip(), scenario))
}

fn boundary_at(target: f64, scenario: &Scenario) -> BoundaryTau {
    match tau_for_collision_prob(target, scenario.n, scenario.m) {
        Some(tau) => BoundaryTau { tau, reachable: true },
        None => BoundaryTau { tau: 1.0, reachable: false },
    }
}

/// Saturation point, throughput peak, delay boundaries and safe throughputs.
/// Throughputs are in bits per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityReport {
    pub tau_s: f64,
    pub s_s: f64,
    pub tau_star: f64,
    pub s_star: f64,
    pub tau_bbmd: f64,
    pub s_bbmd: f64,
    pub tau_bbdj: f64,
    pub s_bbdj: f64,
    pub s_sbmd: f64,
    pub s_sbdj: f64,
    pub scenario_class: u8,
    /// The utilisation limit binds before the mean-delay boundary, so
    /// the boundary point was replaced by the saturation point.
    pub bbmd_at_saturation: bool,
    pub bbdj_at_saturation: bool,
    pub payload_bits: f64,
}

impl CapacityReport {
    /// Convert one of the throughput fields to packets per second.
    pub fn pps(&self, bps: f64) -> f64 {
        bps / self.payload_bits
    }
}

/// A delay boundary after the small-N check.
#[derive(Debug, Clone, Copy)]
struct Boundary {
    tau: f64,
    s: f64,
    at_saturation: bool,
}

/// Locate the boundary for `p_c = target`. When the queue would already be
/// unstable there (`rho_tilde >= 1` with the load the point carries), or the
/// limit is never reached, the saturation point takes its place.
fn resolve_boundary(scenario: &Scenario, target: f64, tau_s: f64, s_s: f64) -> Result<Boundary> {
    let b = boundary_at(target, scenario);
    let saturated = Boundary {
        tau: tau_s,
        s: s_s,
        at_saturation: true,
    };
    if !b.reachable || b.tau >= tau_s {
        return Ok(saturated);
    }
    if rho_tilde_on_curve(scenario, b.tau)? >= 1.0 {
        return Ok(saturated);
    }
    Ok(Boundary {
        tau: b.tau,
        s: throughput(b.tau, scenario),
        at_saturation: false,
    })
}

/// Assign one of the four orderings of the boundary, peak and saturation
/// points. Ties go to the lower class number.
pub fn classify(tau_bbmd: f64, s_bbmd: f64, tau_star: f64, tau_s: f64, s_s: f64) -> u8 {
    if tau_s <= tau_star {
        1
    } else if tau_bbmd <= tau_star {
        if s_bbmd <= s_s {
            2
        } else {
            3
        }
    } else {
        4
    }
}

pub fn capacity_report(scenario: &Scenario) -> Result<CapacityReport> {
    scenario.validate()?;
    let tau_s = saturation_tau(scenario)?;
    let s_s = throughput(tau_s, scenario);
    let (tau_star, s_star) = optimal_tau(scenario);
    let r = scenario.mac.r;
    let md = resolve_boundary(scenario, r.powi(-2), tau_s, s_s)?;
    let dj = resolve_boundary(scenario, r.powi(-3), tau_s, s_s)?;
    Ok(CapacityReport {
        tau_s,
        s_s,
        tau_star,
        s_star,
        tau_bbmd: md.tau,
        s_bbmd: md.s,
        tau_bbdj: dj.tau,
        s_bbdj: dj.s,
        s_sbmd: md.s.min(s_s),
        s_sbdj: dj.s.min(s_s),
        scenario_class: classify(md.tau, md.s, tau_star, tau_s, s_s),
        bbmd_at_saturation: md.at_saturation,
        bbdj_at_saturation: dj.at_saturation,
        payload_bits: scenario.payload_bits,
    })
}

/// Which delay moment must stay bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MeanDelay,
    Jitter,
}

impl Objective {
    pub fn exponent(self) -> u32 {
        match self {
            Objective::MeanDelay => 2,
            Objective::Jitter => 3,
        }
    }
}

/// How the backoff factor is optimised.
///
/// `LargeN` uses the asymptotic saturation condition `p_c = 1/r` and solves
/// for the `r` at which boundary and saturation throughputs coincide.
/// `Exact` maximises the safe throughput with the full fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizeMode {
    LargeN,
    Exact,
}

/// Search interval for `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSearch {
    pub lo: f64,
    pub hi: f64,
    /// Grid used to seed the bracket.
    pub grid: usize,
    pub tol: f64,
}

impl Default for RSearch {
    fn default() -> Self {
        RSearch {
            lo: 1.0 + 1e-3,
            hi: 16.0,
            grid: 256,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub objective: Objective,
    pub mode: OptimizeMode,
    pub r_star: f64,
    /// `min(S_boundary, S_s)` at `r_star`, bits per second.
    pub s_safe: f64,
    pub s_boundary: f64,
    pub s_s: f64,
    /// `r_star` sits on an end of the search interval, so the true optimum
    /// may lie outside it.
    pub at_search_limit: bool,
}

/// Boundary and saturation throughputs for a given `r` in large-n mode.
/// The offered load appears on both sides of the balance and cancels.
fn large_n_pair(scenario: &Scenario, r: f64, exponent: u32) -> (f64, f64) {
    let sat = boundary_at(1.0 / r, scenario);
    let bnd = boundary_at(r.powi(-(exponent as i32)), scenario);
    (throughput(bnd.tau, scenario), throughput(sat.tau, scenario))
}

/// Boundary and saturation throughputs for a given `r` with the exact
/// fixed point and the small-N rule.
fn exact_pair(scenario: &Scenario, r: f64, exponent: u32) -> Result<(f64, f64)> {
    let s = scenario.with_r(r)?;
    let tau_s = saturation_tau(&s)?;
    let s_s = throughput(tau_s, &s);
    let b = resolve_boundary(&s, r.powi(-(exponent as i32)), tau_s, s_s)?;
    Ok((b.s, s_s))
}

pub fn optimize_r(scenario: &Scenario, objective: Objective, mode: OptimizeMode) -> Result<OptimizeResult> {
    optimize_r_in(scenario, objective, mode, &RSearch::default())
}

pub fn optimize_r_in(
    scenario: &Scenario,
    objective: Objective,
    mode: OptimizeMode,
    search: &RSearch,
) -> Result<OptimizeResult> {
    scenario.validate()?;
    if !(search.lo > 1.0 && search.hi > search.lo && search.grid >= 3) {
        return Err(Error::invalid("r search", "need 1 < lo < hi and at least 3 grid points"));
    }
    let e = objective.exponent();
    let (r_star, interior) = match mode {
        OptimizeMode::LargeN => {
            let gap = |r: f64| {
                let (b, s) = large_n_pair(scenario, r, e);
                b - s
            };
            match first_crossing(gap, search) {
                Some(r) => (r, true),
                None => {
                    let safe = |r: f64| {
                        let (b, s) = large_n_pair(scenario, r, e);
                        b.min(s)
                    };
                    let best = if safe(search.lo) >= safe(search.hi) { search.lo } else { search.hi };
                    (best, false)
                }
            }
        }
        OptimizeMode::Exact => {
            // errors in single evaluations count as zero throughput
            let safe = |r: f64| exact_pair(scenario, r, e).map(|(b, s)| b.min(s)).unwrap_or(0.0);
            let r = numeric::maximise(safe, search.lo, search.hi, search.grid, search.tol);
            let edge = 1e3 * search.tol.max(f64::EPSILON * search.hi);
            (r, r - search.lo > edge && search.hi - r > edge)
        }
    };
    let (s_boundary, s_s) = match mode {
        OptimizeMode::LargeN => large_n_pair(scenario, r_star, e),
        OptimizeMode::Exact => exact_pair(scenario, r_star, e)?,
    };
    Ok(OptimizeResult {
        objective,
        mode,
        r_star,
        s_safe: s_boundary.min(s_s),
        s_boundary,
        s_s,
        at_search_limit: !interior,
    })
}

/// First sign change of `f` on the search grid, refined by bisection.
fn first_crossing<F: Fn(f64) -> f64>(f: F, search: &RSearch) -> Option<f64> {
    let step = (search.hi - search.lo) / (search.grid - 1) as f64;
    let mut prev = (search.lo, f(search.lo));
    for k in 1..search.grid {
        let r = if k + 1 == search.grid { search.hi } else { search.lo + step * k as f64 };
        let v = f(r);
        if prev.1 == 0.0 {
            return Some(prev.0);
        }
        if (prev.1 < 0.0) != (v < 0.0) {
            return Some(numeric::bisect(&f, prev.0, r, search.tol));
        }
        prev = (r, v);
    }
    None
}

/// One row of the scaling table: optimal `r` and normalised safe throughput
/// for each objective at a given reception capability `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub m: u32,
    pub r_sbmd: f64,
    pub s_sbmd_per_m: f64,
    pub sbmd_at_search_limit: bool,
    pub r_sbdj: f64,
    pub s_sbdj_per_m: f64,
    pub sbdj_at_search_limit: bool,
    pub error: Option<String>,
}

impl CsvRow for ScalingRow {
    fn header() -> &'static [&'static str] {
        &[
            "m",
            "r_sbmd",
            "s_sbmd_per_m_bps",
            "sbmd_at_search_limit",
            "r_sbdj",
            "s_sbdj_per_m_bps",
            "sbdj_at_search_limit",
            "error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            fmt_num(self.r_sbmd),
            fmt_num(self.s_sbmd_per_m),
            self.sbmd_at_search_limit.to_string(),
            fmt_num(self.r_sbdj),
            fmt_num(self.s_sbdj_per_m),
            self.sbdj_at_search_limit.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn scaling_row(base: &Scenario, m: u32, mode: OptimizeMode, search: &RSearch) -> ScalingRow {
    let run = || -> Result<(OptimizeResult, OptimizeResult)> {
        let s = base.with_m(m)?;
        Ok((
            optimize_r_in(&s, Objective::MeanDelay, mode, search)?,
            optimize_r_in(&s, Objective::Jitter, mode, search)?,
        ))
    };
    let mf = f64::from(m);
    match run() {
        Ok((md, dj)) => ScalingRow {
            m,
            r_sbmd: md.r_star,
            s_sbmd_per_m: md.s_safe / mf,
            sbmd_at_search_limit: md.at_search_limit,
            r_sbdj: dj.r_star,
            s_sbdj_per_m: dj.s_safe / mf,
            sbdj_at_search_limit: dj.at_search_limit,
            error: None,
        },
        Err(e) => ScalingRow {
            m,
            r_sbmd: f64::NAN,
            s_sbmd_per_m: f64::NAN,
            sbmd_at_search_limit: false,
            r_sbdj: f64::NAN,
            s_sbdj_per_m: f64::NAN,
            sbdj_at_search_limit: false,
            error: Some(e.to_string()),
        },
    }
}

/// Optimal safe throughput per unit of reception capability, for each `m`.
/// Rows are returned in input order.
pub fn scaling_sweep(base: &Scenario, m_values: &[u32], mode: OptimizeMode) -> Result<Vec<ScalingRow>> {
    scaling_sweep_in(base, m_values, mode, &RSearch::default())
}

pub fn scaling_sweep_in(
    base: &Scenario,
    m_values: &[u32],
    mode: OptimizeMode,
    search: &RSearch,
) -> Result<Vec<ScalingRow>> {
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("m_values", "must be strictly ascending"));
    }
    if m_values.first() == Some(&0) {
        return Err(Error::invalid("m_values", "must be at least 1"));
    }
    Ok(m_values.par_iter().map(|&m| scaling_row(base, m, mode, search)).collect())
}

/// Saturation and safe throughputs at one backoff factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub r: f64,
    pub s_s: f64,
    pub s_sbmd: f64,
    pub s_sbdj: f64,
    pub error: Option<String>,
}

impl CsvRow for SensitivityRow {
    fn header() -> &'static [&'static str] {
        &["r", "s_s_bps", "s_sbmd_bps", "s_sbdj_bps", "error"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.r),
            fmt_num(self.s_s),
            fmt_num(self.s_sbmd),
            fmt_num(self.s_sbdj),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Throughputs over a grid of backoff factors, in input order. Points with
/// no solution carry an error message and NaN values.
pub fn sensitivity_curve(scenario: &Scenario, r_grid: &[f64]) -> Vec<SensitivityRow> {
    r_grid
        .par_iter()
        .map(|&r| {
            match scenario.with_r(r).and_then(|s| capacity_report(&s)) {
                Ok(c) => SensitivityRow {
                    r,
                    s_s: c.s_s,
                    s_sbmd: c.s_sbmd,
                    s_sbdj: c.s_sbdj,
                    error: None,
                },
                Err(e) => SensitivityRow {
                    r,
                    s_s: f64::NAN,
                    s_sbmd: f64::NAN,
                    s_sbdj: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// `(max - min) / max` over the finite entries; NaN when there are none.
pub fn relative_range(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi < lo {
        return f64::NAN;
    }
    (hi - lo) / hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::conditional_collision_prob;
    use crate::model::{AccessModel, MacParams};
    use proptest::prelude::*;

    fn eq50(m: u32) -> Scenario {
        Scenario::table1(AccessModel::EqualSlot, 50, m, 2.0).unwrap()
    }

    #[test]
    fn two_stations_boundary_is_quarter() {
        let s = Scenario::table1(AccessModel::EqualSlot, 2, 1, 2.0).unwrap();
        let b = boundary_tau(&s, 2).unwrap();
        assert!(b.reachable);
        assert!((b.tau - 0.25).abs() < 1e-14);
        assert!(boundary_tau(&s, 3).unwrap().tau < b.tau);
    }

    #[test]
    fn boundary_matches_grid_inversion() {
        let s = eq50(1);
        let b = boundary_tau(&s, 2).unwrap();
        // coarse grid bracket followed by a fine grid inside it
        let pc = |t: f64| conditional_collision_prob(t, 50, 1);
        let coarse = (0..=100_000).map(|k| k as f64 / 100_000.0).find(|&t| pc(t) >= 0.25).unwrap();
        let mut lo = coarse - 1e-5;
        let mut step = 1e-5;
        for _ in 0..6 {
            step /= 100.0;
            while pc(lo + step) < 0.25 {
                lo += step;
            }
        }
        assert!((b.tau - lo).abs() < 1e-10, "{} vs {}", b.tau, lo);
        assert!((pc(b.tau) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn boundary_unreachable_when_m_covers_everyone() {
        let s = Scenario::table1(AccessModel::EqualSlot, 4, 4, 2.0).unwrap();
        let b = boundary_tau(&s, 2).unwrap();
        assert!(!b.reachable);
        assert_eq!(b.tau, 1.0);
        let c = capacity_report(&s).unwrap();
        assert_eq!(c.s_sbmd, c.s_s);
        assert_eq!(c.s_sbdj, c.s_s);
    }

    #[test]
    fn bad_exponent_rejected() {
        assert!(boundary_tau(&eq50(1), 4).is_err());
    }

    #[test]
    fn classify_is_total_and_ties_go_low() {
        assert_eq!(classify(0.1, 1.0, 0.3, 0.3, 1.0), 1);
        assert_eq!(classify(0.3, 1.0, 0.3, 0.4, 1.0), 2);
        assert_eq!(classify(0.2, 1.5, 0.3, 0.4, 1.0), 3);
        assert_eq!(classify(0.35, 1.5, 0.3, 0.4, 1.0), 4);
    }

    #[test]
    fn equal_slot_reference_is_class_one() {
        let c = capacity_report(&eq50(1)).unwrap();
        assert_eq!(c.scenario_class, 1);
        assert!(c.s_bbdj < c.s_bbmd && c.s_bbmd <= c.s_s);
        assert!(c.tau_bbdj < c.tau_bbmd && c.tau_bbmd < c.tau_s);
    }

    #[test]
    fn basic_reference_is_class_four() {
        let s = Scenario::table1(AccessModel::Basic, 50, 1, 2.0).unwrap();
        let c = capacity_report(&s).unwrap();
        assert_eq!(c.scenario_class, 4);
        assert!(c.s_s < c.s_bbmd);
        assert_eq!(c.s_sbmd, c.s_s);
    }

    #[test]
    fn small_n_rule_falls_back_to_saturation() {
        // with few stations the backoff keeps p_c low; the queue saturates
        // before the collision limit is reached
        let s = Scenario::table1(AccessModel::EqualSlot, 3, 1, 2.0).unwrap();
        let c = capacity_report(&s).unwrap();
        if c.bbmd_at_saturation {
            assert_eq!(c.tau_bbmd, c.tau_s);
            assert_eq!(c.s_bbmd, c.s_s);
        } else {
            assert!(c.tau_bbmd < c.tau_s);
            assert!(rho_tilde_on_curve(&s, c.tau_bbmd).unwrap() < 1.0);
        }
    }

    #[test]
    fn large_n_optimum_balances_the_two_throughputs() {
        let s = eq50(1);
        let o = optimize_r(&s, Objective::MeanDelay, OptimizeMode::LargeN).unwrap();
        assert!(!o.at_search_limit);
        assert!((o.s_boundary - o.s_s).abs() / o.s_s < 1e-6);
    }

    #[test]
    fn large_n_optimum_matches_grid_scan() {
        let s = eq50(1);
        let o = optimize_r(&s, Objective::MeanDelay, OptimizeMode::LargeN).unwrap();
        let (lo, hi) = (1.001, 16.0);
        let n = 10_000;
        let best = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .map(|r| {
                let (b, s) = large_n_pair(&s, r, 2);
                (r, b.min(s))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((best.0 - o.r_star).abs() < 1e-3, "{} vs {}", best.0, o.r_star);
    }

    #[test]
    fn exact_optimum_beats_binary_backoff() {
        let s = eq50(1);
        let o = optimize_r(&s, Objective::MeanDelay, OptimizeMode::Exact).unwrap();
        let at2 = capacity_report(&s).unwrap().s_sbmd;
        assert!(o.s_safe > at2, "{} vs {}", o.s_safe, at2);
    }

    #[test]
    fn search_limit_is_flagged() {
        let s = eq50(1);
        let narrow = RSearch { lo: 1.001, hi: 1.05, grid: 16, tol: 1e-10 };
        let o = optimize_r_in(&s, Objective::MeanDelay, OptimizeMode::Exact, &narrow).unwrap();
        assert!(o.at_search_limit);
        assert!((o.r_star - 1.05).abs() < 1e-6);
    }

    #[test]
    fn scaling_first_row_matches_direct_optimisation() {
        let base = eq50(1);
        let rows = scaling_sweep(&base, &[1, 2], OptimizeMode::Exact).unwrap();
        assert_eq!(rows[0].m, 1);
        let md = optimize_r(&base, Objective::MeanDelay, OptimizeMode::Exact).unwrap();
        let dj = optimize_r(&base, Objective::Jitter, OptimizeMode::Exact).unwrap();
        assert_eq!(rows[0].r_sbmd, md.r_star);
        assert_eq!(rows[0].s_sbmd_per_m, md.s_safe);
        assert_eq!(rows[0].s_sbdj_per_m, dj.s_safe);
        let at_r = capacity_report(&base.with_r(md.r_star).unwrap()).unwrap();
        assert!((at_r.s_sbmd - md.s_safe).abs() <= 1e-9 * md.s_safe);
        assert!(scaling_sweep(&base, &[2, 1], OptimizeMode::Exact).is_err());
    }

    #[test]
    fn sensitivity_rows_keep_input_order() {
        let grid = [3.0, 1.5, 2.0];
        let rows = sensitivity_curve(&eq50(1), &grid);
        let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
        assert_eq!(rs, grid);
        assert!(rows.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn sensitivity_peak_near_optimum() {
        let s = eq50(1);
        let o = optimize_r(&s, Objective::MeanDelay, OptimizeMode::Exact).unwrap();
        let step = 0.05;
        let grid: Vec<f64> = (0..200).map(|k| 1.05 + step * k as f64).collect();
        let rows = sensitivity_curve(&s, &grid);
        let peak = rows.iter().max_by(|a, b| a.s_sbmd.total_cmp(&b.s_sbmd)).unwrap();
        assert!((peak.r - o.r_star).abs() <= step, "{} vs {}", peak.r, o.r_star);
    }

    #[test]
    fn relative_range_basics() {
        assert_eq!(relative_range([1.0, 2.0, 4.0]), 0.75);
        assert!(relative_range([f64::NAN]).is_nan());
    }

    fn scenario_strategy() -> impl Strategy<Value = Scenario> {
        (
            prop_oneof![Just(AccessModel::EqualSlot), Just(AccessModel::Basic), Just(AccessModel::RtsCts)],
            5u32..120,
            1u32..5,
            1.2f64..6.0,
            prop_oneof![Just(8u32), Just(16), Just(32), Just(64)],
        )
            .prop_map(|(model, n, m, r, w0)| {
                Scenario::table1(model, n, m, r)
                    .unwrap()
                    .with_mac(MacParams::unlimited(w0, r).unwrap())
                    .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn min_rule_ordering_and_total_class(s in scenario_strategy()) {
            let c = capacity_report(&s).unwrap();
            prop_assert!(c.s_sbmd <= c.s_s && c.s_sbmd <= c.s_bbmd);
            prop_assert!(c.s_sbdj <= c.s_s && c.s_sbdj <= c.s_bbdj);
            prop_assert!(c.s_sbmd == c.s_s.min(c.s_bbmd));
            prop_assert!((1..=4).contains(&c.scenario_class));
            if !c.bbmd_at_saturation && !c.bbdj_at_saturation {
                prop_assert!(c.tau_bbdj < c.tau_bbmd && c.tau_bbmd < c.tau_s);
            }
            prop_assert!(c.tau_bbdj <= c.tau_bbmd);
        }
    }
}
