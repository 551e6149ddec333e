//! Generic-slot probabilities, the throughput curve `S(tau)`, the saturation
//! fixed point and the non-saturation operating points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MacParams, Scenario, SlotTiming};
use crate::numeric;

/// Probabilities of an idle, collided and successful slot as seen by an
/// outside observer, for per-station transmit probability `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericSlotProbs {
    pub tau: f64,
    pub p_idle: f64,
    pub p_coll: f64,
    pub p_succ: f64,
}

impl GenericSlotProbs {
    /// Mean slot length in microseconds.
    pub fn mean_slot_us(&self, timing: &SlotTiming) -> f64 {
        self.p_idle * timing.t_idle_us + self.p_coll * timing.t_coll_us + self.p_succ * timing.t_succ_us
    }
}

/// Binomial(n, tau) probabilities for k = 0..=n.
///
/// Terms are built outward from the mode with ratio recurrences so that no
/// factorials or large powers are formed.
pub fn binomial_pmf(n: u32, tau: f64) -> Vec<f64> {
    let n_us = n as usize;
    let mut pmf = vec![0.0; n_us + 1];
    if tau <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if tau >= 1.0 {
        pmf[n_us] = 1.0;
        return pmf;
    }
    let nf = f64::from(n);
    let mode = (((nf + 1.0) * tau).floor() as usize).min(n_us);
    let q = 1.0 - tau;
    // ln C(n, mode) tau^mode (1-tau)^(n-mode)
    let mut ln_mode = mode as f64 * tau.ln() + (nf - mode as f64) * (-tau).ln_1p();
    for i in 0..mode {
        ln_mode += ((nf - i as f64) / (i as f64 + 1.0)).ln();
    }
    pmf[mode] = ln_mode.exp();
    let odds = tau / q;
    for k in mode..n_us {
        pmf[k + 1] = pmf[k] * (nf - k as f64) / (k as f64 + 1.0) * odds;
    }
    for k in (1..=mode).rev() {
        pmf[k - 1] = pmf[k] * k as f64 / (nf - k as f64 + 1.0) / odds;
    }
    let total: f64 = pmf.iter().sum();
    for v in &mut pmf {
        *v /= total;
    }
    pmf
}

/// `Pr{X = k}`: probability that exactly `k` of `n` stations transmit.
pub fn prob_x_eq_k(tau: f64, n: u32, k: u32) -> Result<f64> {
    check_tau(tau)?;
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    Ok(binomial_pmf(n, tau)[k as usize])
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, 1]")));
    }
    Ok(())
}

/// Slot-outcome probabilities over `n` stations with reception capacity `m`.
pub fn slot_probs(tau: f64, n: u32, m: u32) -> GenericSlotProbs {
    let pmf = binomial_pmf(n, tau);
    let m = m.min(n) as usize;
    let p_idle = pmf[0];
    let p_succ: f64 = pmf[1..=m].iter().sum::<f64>().min(1.0);
    let p_coll: f64 = pmf[m + 1..].iter().sum::<f64>().min(1.0);
    GenericSlotProbs {
        tau,
        p_idle,
        p_coll,
        p_succ,
    }
}

pub fn generic_slot_probs(tau: f64, scenario: &Scenario) -> Result<GenericSlotProbs> {
    check_tau(tau)?;
    Ok(slot_probs(tau, scenario.n, scenario.m))
}

/// Expected number of packets delivered per slot.
pub fn packets_per_slot(tau: f64, n: u32, m: u32) -> f64 {
    let pmf = binomial_pmf(n, tau);
    let m = m.min(n) as usize;
    pmf.iter().enumerate().take(m + 1).map(|(k, p)| k as f64 * p).sum()
}

/// Throughput in bits per second at transmit probability `tau`.
pub fn throughput(tau: f64, scenario: &Scenario) -> f64 {
    let tau = tau.clamp(0.0, 1.0);
    let probs = slot_probs(tau, scenario.n, scenario.m);
    let pkts = packets_per_slot(tau, scenario.n, scenario.m);
    scenario.payload_bits * pkts / probs.mean_slot_us(&scenario.timing) * 1e6
}

/// Throughput in packets per second.
pub fn throughput_pps(tau: f64, scenario: &Scenario) -> f64 {
    throughput(tau, scenario) / scenario.payload_bits
}

/// Per-station arrival rate (packets per second) that an operating point
/// `tau` carries when throughput equals offered load.
pub fn station_rate_pps(tau: f64, scenario: &Scenario) -> f64 {
    throughput_pps(tau, scenario) / f64::from(scenario.n)
}

const TAU_GRID: usize = 2048;

/// Throughput-maximising transmit probability `tau*` and `S* = S(tau*)`
/// (bits per second).
pub fn optimal_tau(scenario: &Scenario) -> (f64, f64) {
    let f = |t: f64| throughput(t, scenario);
    let (a, b) = numeric::grid_max_bracket(f, 0.0, 1.0, TAU_GRID);
    let mut best = numeric::golden_max(f, a, b, 1e-10);
    for edge in [a, b] {
        if f(edge) > f(best) {
            best = edge;
        }
    }
    (best, f(best))
}

/// Probability that a transmission by a given station collides: more than
/// `m - 1` of the other `n - 1` stations transmit in the same slot.
pub fn conditional_collision_prob(tau: f64, n: u32, m: u32) -> f64 {
    if m >= n || tau <= 0.0 {
        return 0.0;
    }
    let pmf = binomial_pmf(n - 1, tau.min(1.0));
    let head: f64 = pmf[..m as usize].iter().sum();
    // sum whichever side is smaller to avoid cancellation
    let pc = if head < 0.5 {
        1.0 - head
    } else {
        pmf[m as usize..].iter().sum()
    };
    pc.clamp(0.0, 1.0)
}

/// Inverse of `conditional_collision_prob` in `tau`. Returns `None` when the
/// target exceeds `p_c(1)`.
pub fn tau_for_collision_prob(target: f64, n: u32, m: u32) -> Option<f64> {
    let pc = |t: f64| conditional_collision_prob(t, n, m);
    if target <= 0.0 {
        return Some(0.0);
    }
    if pc(1.0) < target {
        return None;
    }
    Some(numeric::bisect(|t| pc(t) - target, 0.0, 1.0, 1e-15))
}

/// Expected attempts and expected backoff countdown slots per packet at
/// collision probability `p`, for possibly limited backoff. `None` when the
/// countdown expectation diverges.
fn renewal_terms(p: f64, mac: &MacParams) -> Option<(f64, f64)> {
    let w0 = f64::from(mac.w0);
    let r = mac.r;
    let stages = mac.retry_limit.map(|k| k + 1);
    match (stages, mac.cap_stage()) {
        (None, None) => {
            if r * p >= 1.0 {
                return None;
            }
            let attempts = 1.0 / (1.0 - p);
            Some((attempts, 0.5 * (w0 / (1.0 - r * p) - attempts)))
        }
        (None, Some(j)) => {
            // stages 0..j double, then the window stays at cw_max forever
            let mut backoff = 0.0;
            let mut reach = 1.0;
            for i in 0..j {
                backoff += reach * (mac.window(i) - 1.0) / 2.0;
                reach *= p;
            }
            if p >= 1.0 {
                return None;
            }
            let attempts = 1.0 / (1.0 - p);
            backoff += reach / (1.0 - p) * (mac.window(j) - 1.0) / 2.0;
            Some((attempts, backoff))
        }
        (Some(k1), _) => {
            let mut attempts = 0.0;
            let mut backoff = 0.0;
            let mut reach = 1.0;
            for i in 0..k1 {
                attempts += reach;
                backoff += reach * (mac.window(i) - 1.0) / 2.0;
                reach *= p;
            }
            Some((attempts, backoff))
        }
    }
}

/// Right-hand side of the saturation fixed point: per-slot transmit
/// probability of a saturated station facing collision probability `p`.
pub fn saturation_map(p: f64, mac: &MacParams) -> Option<f64> {
    renewal_terms(p, mac).map(|(attempts, backoff)| attempts / (attempts + backoff))
}

/// Saturation transmit probability `tau_s`.
pub fn saturation_tau(scenario: &Scenario) -> Result<f64> {
    let n = scenario.n;
    let m = scenario.m;
    let mac = &scenario.mac;
    let rhs = |t: f64| saturation_map(conditional_collision_prob(t, n, m), mac);

    // Upper end of the region where the map is defined.
    let hi = if mac.has_limits() {
        1.0
    } else {
        tau_for_collision_prob(1.0 / mac.r, n, m).unwrap_or(1.0)
    };

    let mut tau = rhs(0.0).ok_or_else(|| Error::NoFixedPoint("map undefined at tau = 0".into()))?;
    let mut converged = false;
    for _ in 0..20_000 {
        let Some(next) = rhs(tau) else { break };
        let next = 0.5 * tau + 0.5 * next;
        if (next - tau).abs() < 1e-12 {
            tau = next;
            converged = true;
            break;
        }
        tau = next;
    }
    let residual = |t: f64| match rhs(t) {
        Some(v) => t - v,
        None => 1.0,
    };
    if !converged || residual(tau).abs() >= 1e-10 {
        if residual(hi) <= 0.0 {
            // the map stays above the diagonal up to tau = 1 (w0 = 1)
            if hi >= 1.0 {
                return Ok(1.0);
            }
            return Err(Error::NoFixedPoint(format!(
                "residual does not change sign on (0, {hi})"
            )));
        }
        tau = numeric::bisect(residual, 0.0, hi, 1e-15);
    }
    if !(tau > 0.0 && tau <= 1.0) || residual(tau).abs() >= 1e-10 {
        return Err(Error::NoFixedPoint(format!(
            "solver ended at tau = {tau} with residual {}",
            residual(tau)
        )));
    }
    Ok(tau)
}

/// Which solution of the throughput balance an operating point is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    Left,
    Right,
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub tau: f64,
    pub root_kind: RootKind,
    /// True iff `tau < tau_s`.
    pub stable: bool,
}

/// All `tau` in (0, 1] with `S(tau) = N * lambda * PL`, ascending.
///
/// An empty list means the offered load exceeds the peak throughput.
pub fn nonsaturation_roots(scenario: &Scenario) -> Result<Vec<OperatingPoint>> {
    if scenario.lambda_pps <= 0.0 {
        return Err(Error::Precondition("nonsaturation roots need lambda_pps > 0".into()));
    }
    let tau_s = saturation_tau(scenario)?;
    let taus = throughput_roots(scenario, scenario.offered_load_bps());
    Ok(taus
        .into_iter()
        .enumerate()
        .map(|(i, tau)| OperatingPoint {
            tau,
            root_kind: if i == 0 { RootKind::Left } else { RootKind::Right },
            stable: tau < tau_s,
        })
        .collect())
}

/// Solutions of `S(tau) = target_bps`.
pub fn throughput_roots(scenario: &Scenario, target_bps: f64) -> Vec<f64> {
    let (tau_star, s_star) = optimal_tau(scenario);
    if target_bps > s_star * (1.0 + 1e-12) {
        return Vec::new();
    }
    if (s_star - target_bps).abs() <= 1e-10 * s_star {
        return vec![tau_star];
    }
    let f = |t: f64| throughput(t, scenario) - target_bps;
    let mut grid: Vec<f64> = (0..TAU_GRID).map(|k| k as f64 / (TAU_GRID - 1) as f64).collect();
    grid.push(tau_star);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut roots = Vec::new();
    let mut prev_t = grid[0];
    let mut prev_f = f(prev_t);
    for &t in &grid[1..] {
        let ft = f(t);
        if ft == 0.0 {
            roots.push(t);
        } else if prev_f != 0.0 && (prev_f < 0.0) != (ft < 0.0) {
            roots.push(numeric::bisect(f, prev_t, t, 1e-14));
        }
        prev_t = t;
        prev_f = ft;
    }
    roots
}

/// The steady-state operating point: the smallest root below `tau_s`.
/// `None` when no such root exists (the load cannot be carried stably).
pub fn operating_point(scenario: &Scenario) -> Result<Option<OperatingPoint>> {
    Ok(nonsaturation_roots(scenario)?.into_iter().find(|p| p.stable))
}
