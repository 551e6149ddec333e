//! Access delay of a tagged station and the resulting packet delay of its
//! queue, modelled as an M/G/1 queue with multiple vacations.
//!
//! Times are microseconds. Arrival rates inside this module are converted to
//! packets per microsecond before entering any formula.

pub mod closed_form;
pub mod stages;

use serde::{Serialize, Serializer};

use crate::analytic::{self, binomial_pmf};
use crate::error::{Error, Result};
use crate::model::{MacParams, Scenario, SlotTiming};

use closed_form::MomentInputs;
use stages::Moments3;

/// Default number of backoff stages summed when evaluating transforms.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Slot statistics seen by a station while it counts down: outcomes of the
/// other `N - 1` stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackoffView {
    pub tau: f64,
    pub p_idle_b: f64,
    pub p_coll_b: f64,
    pub p_succ_b: f64,
    /// Probability that a transmission of the tagged station collides.
    pub p_c: f64,
    pub a1_us: f64,
    pub a2_us2: f64,
    pub a3_us3: f64,
    #[serde(skip)]
    pub timing: SlotTiming,
}

impl BackoffView {
    pub fn slot_moments(&self) -> Moments3 {
        [self.a1_us, self.a2_us2, self.a3_us3]
    }

    fn weighted(&self) -> [(f64, f64); 3] {
        [
            (self.p_idle_b, self.timing.t_idle_us),
            (self.p_coll_b, self.timing.t_coll_us),
            (self.p_succ_b, self.timing.t_succ_us),
        ]
    }

    /// Laplace transform of a countdown-slot length, `L*(s)`.
    pub fn slot_transform(&self, s: f64) -> f64 {
        self.weighted().iter().map(|(p, t)| p * (-s * t).exp()).sum()
    }

    /// `1 - L*(s)`, accurate for small `s`.
    pub fn slot_transform_complement(&self, s: f64) -> f64 {
        self.weighted().iter().map(|(p, t)| -p * (-s * t).exp_m1()).sum()
    }
}

/// Tagged-station view at transmit probability `tau`.
pub fn backoff_view(tau: f64, scenario: &Scenario) -> Result<BackoffView> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, 1]")));
    }
    let others = scenario.n - 1;
    let pmf = binomial_pmf(others, tau);
    let m = scenario.m.min(others) as usize;
    let p_idle_b = pmf[0];
    let p_succ_b: f64 = pmf[1..=m].iter().sum();
    let p_coll_b: f64 = pmf[m + 1..].iter().sum();
    let t = scenario.timing;
    let moment = |n: i32| {
        p_idle_b * t.t_idle_us.powi(n) + p_coll_b * t.t_coll_us.powi(n) + p_succ_b * t.t_succ_us.powi(n)
    };
    Ok(BackoffView {
        tau,
        p_idle_b,
        p_coll_b,
        p_succ_b,
        p_c: analytic::conditional_collision_prob(tau, scenario.n, scenario.m),
        a1_us: moment(1),
        a2_us2: moment(2),
        a3_us3: moment(3),
        timing: t,
    })
}

/// A moment that is either finite or divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Divergent,
}

impl MomentValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }

    /// The value, with divergence mapped to `+inf`.
    pub fn value(&self) -> f64 {
        match self {
            MomentValue::Finite(v) => *v,
            MomentValue::Divergent => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(*v),
            MomentValue::Divergent => None,
        }
    }
}

impl Serialize for MomentValue {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentValue::Finite(v) => ser.serialize_f64(*v),
            MomentValue::Divergent => ser.serialize_str("inf"),
        }
    }
}

impl std::fmt::Display for MomentValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentValue::Finite(v) => write!(f, "{v}"),
            MomentValue::Divergent => f.write_str("inf"),
        }
    }
}

/// Countdown PGF `E[z^B]` for 1-based backoff stage `stage`, with `B`
/// uniform on `0..W` and `W = r^(stage-1) W0` (capped at `cw_max`).
pub fn countdown_pgf(stage: u32, mac: &MacParams, z: f64) -> Result<f64> {
    if stage < 1 {
        return Err(Error::Domain("backoff stages are numbered from 1".into()));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("z = {z} outside [0, 1]")));
    }
    let w = mac.window(stage - 1);
    let u = 1.0 - z;
    if w * u < 0.05 {
        return Ok(1.0 - pgf_complement(w, u));
    }
    Ok(-(w * (-u).ln_1p()).exp_m1() / (w * u))
}

/// `1 - E[(1-u)^B]` for `B` uniform on `0..W`.
///
/// Uses the binomial series when `W u` is small so that no cancellation
/// occurs near `u = 0`. `W` is never raised to a power directly, so windows
/// beyond the integer range are handled in floating point.
fn pgf_complement(w: f64, u: f64) -> f64 {
    if u <= 0.0 || w <= 1.0 {
        return 0.0;
    }
    if w * u < 0.05 {
        // sum_{n>=1} (-1)^(n+1) u^n C(W, n+1) / W
        let mut term = u * (w - 1.0) / 2.0;
        let mut sum = 0.0;
        let mut sign = 1.0;
        for n in 1..200 {
            sum += sign * term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            let nf = f64::from(n);
            term *= u * (w - nf - 1.0) / (nf + 2.0);
            sign = -sign;
        }
        return sum;
    }
    let pgf = -(w * (-u).ln_1p()).exp_m1() / (w * u);
    1.0 - pgf
}

/// A truncated transform evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: f64,
    /// `1 - value`, computed without cancellation.
    pub complement: f64,
    /// Upper bound on the probability mass of the omitted stages.
    pub tail_bound: f64,
}

/// Laplace transform of the non-empty-queue access delay, summed over the
/// first `truncation` transmission attempts.
///
/// With a retry limit the sum stops after the last permitted attempt and
/// covers delivered packets only, so the value at `s = 0` is the delivery
/// probability.
pub fn xne_transform(s: f64, view: &BackoffView, mac: &MacParams, truncation: usize) -> Result<TransformValue> {
    access_transform(s, view, mac, truncation, false)
}

/// Transform of the head-of-line holding time of every packet, including
/// the time spent on packets that are eventually dropped.
pub fn service_transform(s: f64, view: &BackoffView, mac: &MacParams, truncation: usize) -> Result<TransformValue> {
    access_transform(s, view, mac, truncation, true)
}

fn access_transform(
    s: f64,
    view: &BackoffView,
    mac: &MacParams,
    truncation: usize,
    include_drops: bool,
) -> Result<TransformValue> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("transform argument s = {s} must be >= 0")));
    }
    if truncation < 1 {
        return Err(Error::Domain("truncation must be >= 1".into()));
    }
    let p = view.p_c;
    let attempts = match mac.retry_limit {
        Some(k) => (k as usize + 1).min(truncation),
        None => {
            if p >= 1.0 {
                return Err(Error::Truncation(format!(
                    "collision probability {p} gives no geometric decay over stages"
                )));
            }
            truncation
        }
    };
    let complete = mac.retry_limit.is_some_and(|k| (k as usize) < truncation);

    let u = view.slot_transform_complement(s);
    let ce_coll = -(-s * view.timing.t_coll_us).exp_m1();
    let ce_succ = -(-s * view.timing.t_succ_us).exp_m1();
    let times = |c: f64, f: f64| c + (1.0 - c) * f;

    // running product over stages of the countdown transforms and the
    // collision slots between them, as value and complement
    let mut cg = 0.0;
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut weight_sum = 0.0;
    let mut reach = 1.0;
    for j in 1..=attempts {
        let cb = pgf_complement(mac.window(j as u32 - 1), u);
        let factor = if j == 1 { cb } else { times(ce_coll, cb) };
        cg = times(cg, factor);
        let w = (1.0 - p) * reach;
        let cp = times(cg, ce_succ);
        value += w * (1.0 - cp);
        comp += w * cp;
        weight_sum += w;
        reach *= p;
    }
    // `reach` is now p^attempts
    let (value, comp, tail_bound) = if complete {
        if include_drops {
            let cd = times(cg, ce_coll);
            (value + reach * (1.0 - cd), comp + reach * cd, 0.0)
        } else {
            (value, comp + (1.0 - weight_sum), 0.0)
        }
    } else {
        (value, comp + (1.0 - weight_sum), reach)
    };
    Ok(TransformValue {
        value,
        complement: comp,
        tail_bound,
    })
}

fn moment_inputs(view: &BackoffView, mac: &MacParams) -> MomentInputs {
    MomentInputs {
        a1: view.a1_us,
        a2: view.a2_us2,
        a3: view.a3_us3,
        tc: view.timing.t_coll_us,
        ts: view.timing.t_succ_us,
        w0: f64::from(mac.w0),
        r: mac.r,
        p: view.p_c,
    }
}

/// First three moments of the non-empty-queue access delay.
///
/// For unlimited backoff the `n`-th moment is finite iff `p_c r^n < 1`.
/// With a retry limit these are the moments of delivered packets; with a
/// capped window they are always finite for `p_c < 1`.
pub fn xne_moments(view: &BackoffView, mac: &MacParams) -> [MomentValue; 3] {
    if mac.has_limits() {
        return match stages::stage_moments(&view.slot_moments(), view.timing.t_coll_us, view.timing.t_succ_us, view.p_c, mac) {
            Some(m) => m.delivered.map(MomentValue::Finite),
            None => [MomentValue::Divergent; 3],
        };
    }
    let x = moment_inputs(view, mac);
    let fns: [fn(&MomentInputs) -> f64; 3] = [closed_form::first, closed_form::second, closed_form::third];
    std::array::from_fn(|i| {
        if view.p_c * mac.r.powi(i as i32 + 1) < 1.0 {
            MomentValue::Finite(fns[i](&x))
        } else {
            MomentValue::Divergent
        }
    })
}

/// Moments under a retry limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetryMoments {
    /// Moments of the access delay of delivered packets.
    pub delivered: Moments3,
    /// Moments of the head-of-line holding time over all packets.
    pub service: Moments3,
    /// Drop probability `p_c^(K+1)`.
    pub loss_rate: f64,
}

pub fn xne_moments_retry(view: &BackoffView, mac: &MacParams) -> Result<RetryMoments> {
    if mac.retry_limit.is_none() {
        return Err(Error::Precondition("xne_moments_retry needs a retry limit".into()));
    }
    let m = stages::stage_moments(&view.slot_moments(), view.timing.t_coll_us, view.timing.t_succ_us, view.p_c, mac)
        .expect("retry-limited moments always exist");
    Ok(RetryMoments {
        delivered: m.delivered,
        service: m.service,
        loss_rate: m.loss_rate,
    })
}

pub fn xne_moments_cwmax(view: &BackoffView, mac: &MacParams) -> Result<Moments3> {
    if mac.cw_max.is_none() {
        return Err(Error::Precondition("xne_moments_cwmax needs cw_max".into()));
    }
    let plain = MacParams { retry_limit: None, ..*mac };
    stages::stage_moments(&view.slot_moments(), view.timing.t_coll_us, view.timing.t_succ_us, view.p_c, &plain)
        .map(|m| m.delivered)
        .ok_or_else(|| Error::Domain(format!("p_c = {} leaves the capped series undefined", view.p_c)))
}

/// Delivered-packet and queue-service moments for any MAC variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceMoments {
    pub delivered: [MomentValue; 3],
    pub service: [MomentValue; 3],
    pub loss_rate: f64,
}

pub fn service_moments(view: &BackoffView, mac: &MacParams) -> ServiceMoments {
    if mac.has_limits() {
        if let Some(m) = stages::stage_moments(&view.slot_moments(), view.timing.t_coll_us, view.timing.t_succ_us, view.p_c, mac) {
            return ServiceMoments {
                delivered: m.delivered.map(MomentValue::Finite),
                service: m.service.map(MomentValue::Finite),
                loss_rate: m.loss_rate,
            };
        }
    }
    let m = xne_moments(view, mac);
    ServiceMoments {
        delivered: m,
        service: m,
        loss_rate: 0.0,
    }
}

/// `(E[Y], E[Y^2])` of the residual vacation slot.
pub fn vacation_moments(view: &BackoffView) -> (f64, f64) {
    (view.a2_us2 / (2.0 * view.a1_us), view.a3_us3 / (3.0 * view.a1_us))
}

/// Server utilisation, or a marker that the queue is unstable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utilization {
    Stable(f64),
    Unstable,
}

impl Utilization {
    pub fn value(&self) -> Option<f64> {
        match self {
            Utilization::Stable(v) => Some(*v),
            Utilization::Unstable => None,
        }
    }
}

impl Serialize for Utilization {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Utilization::Stable(v) => ser.serialize_f64(*v),
            Utilization::Unstable => ser.serialize_str("unstable"),
        }
    }
}

/// Delay and utilisation at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayReport {
    pub tau: f64,
    pub lambda_pps: f64,
    pub p_c: f64,
    pub xne_m1: MomentValue,
    pub xne_m2: MomentValue,
    pub xne_m3: MomentValue,
    pub e_y_us: f64,
    pub e_y2_us2: f64,
    pub rho_tilde: f64,
    pub rho: Utilization,
    pub e_d_us: MomentValue,
    pub var_d_us2: MomentValue,
    /// Drop probability under a retry limit, otherwise 0.
    pub loss_rate: f64,
}

impl DelayReport {
    pub fn sd_d_us(&self) -> MomentValue {
        match self.var_d_us2 {
            MomentValue::Finite(v) => MomentValue::Finite(v.max(0.0).sqrt()),
            MomentValue::Divergent => MomentValue::Divergent,
        }
    }
}

/// Delay statistics at transmit probability `tau` with the scenario's own
/// arrival rate.
pub fn delay_stats(scenario: &Scenario, tau: f64) -> Result<DelayReport> {
    let view = backoff_view(tau, scenario)?;
    let lambda = scenario.lambda_per_us();
    let sm = service_moments(&view, &scenario.mac);
    let (e_y, e_y2) = vacation_moments(&view);

    let rho_tilde = lambda * sm.service[0].value();
    let stable = rho_tilde < 1.0;
    let rho = if stable {
        let idle_share = if lambda > 0.0 {
            view.slot_transform_complement(lambda) / (lambda * view.a1_us)
        } else {
            1.0
        };
        Utilization::Stable(1.0 - (1.0 - rho_tilde) * idle_share)
    } else {
        Utilization::Unstable
    };

    let own = sm.delivered;
    let srv = sm.service;
    let e_d = match (stable, own[0], srv[1]) {
        (true, MomentValue::Finite(x1), MomentValue::Finite(s2)) => {
            MomentValue::Finite(x1 + e_y + lambda * s2 / (2.0 * (1.0 - rho_tilde)))
        }
        _ => MomentValue::Divergent,
    };
    let var_d = match (stable, own[0], own[1], srv[1], srv[2]) {
        (
            true,
            MomentValue::Finite(x1),
            MomentValue::Finite(x2),
            MomentValue::Finite(s2),
            MomentValue::Finite(s3),
        ) => {
            let one = 1.0 - rho_tilde;
            MomentValue::Finite(
                (x2 - x1 * x1)
                    + (e_y2 - e_y * e_y)
                    + lambda * lambda * s2 * s2 / (4.0 * one * one)
                    + lambda * s3 / (3.0 * one),
            )
        }
        _ => MomentValue::Divergent,
    };
    Ok(DelayReport {
        tau,
        lambda_pps: scenario.lambda_pps,
        p_c: view.p_c,
        xne_m1: own[0],
        xne_m2: own[1],
        xne_m3: own[2],
        e_y_us: e_y,
        e_y2_us2: e_y2,
        rho_tilde,
        rho,
        e_d_us: e_d,
        var_d_us2: var_d,
        loss_rate: sm.loss_rate,
    })
}

/// Delay statistics at `tau` with the arrival rate that `tau` carries on
/// the throughput curve.
pub fn delay_stats_on_curve(scenario: &Scenario, tau: f64) -> Result<DelayReport> {
    let s = scenario.with_lambda(analytic::station_rate_pps(tau, scenario))?;
    delay_stats(&s, tau)
}

/// `rho_tilde = lambda E[X]` along the throughput curve (infinite when the
/// mean access delay diverges).
pub fn rho_tilde_on_curve(scenario: &Scenario, tau: f64) -> Result<f64> {
    let view = backoff_view(tau, scenario)?;
    let lambda = analytic::station_rate_pps(tau, scenario) * 1e-6;
    Ok(lambda * service_moments(&view, &scenario.mac).service[0].value())
}

/// Laplace transform of the packet delay `D*(s)`.
///
/// Under a retry limit this is the system time of every packet, dropped
/// ones included, which is what the queue-length identity needs.
pub fn delay_transform(s: f64, scenario: &Scenario, tau: f64, truncation: usize) -> Result<f64> {
    if s == 0.0 {
        return Ok(1.0);
    }
    let view = backoff_view(tau, scenario)?;
    let lambda = scenario.lambda_per_us();
    let rho_tilde = lambda * service_moments(&view, &scenario.mac).service[0].value();
    if rho_tilde >= 1.0 {
        return Err(Error::Precondition(format!("rho_tilde = {rho_tilde} >= 1")));
    }
    let srv = service_transform(s, &view, &scenario.mac, truncation)?;
    let s_y = view.slot_transform_complement(s) / view.a1_us;
    // s - lambda (1 - X*(s)) written through the complement
    let denom = s - lambda * srv.complement;
    Ok((1.0 - rho_tilde) * srv.value * s_y / denom)
}

/// Queue-length PGF `Q(z) = D*(lambda - lambda z)`.
pub fn queue_length_pgf(z: f64, scenario: &Scenario, tau: f64, truncation: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("z = {z} outside [0, 1]")));
    }
    let lambda = scenario.lambda_per_us();
    delay_transform(lambda * (1.0 - z), scenario, tau, truncation)
}

#[cfg(test)]
mod tests;
