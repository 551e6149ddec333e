//! Exact access-delay moments by recursion over backoff stages, for backoff
//! with a retry limit and/or a capped contention window.
//!
//! `V_i` is the time from the start of stage `i` (0-based) until the packet
//! leaves the head of the queue:
//!
//! `V_i = C_i + T_succ` with probability `1 - p`, otherwise
//! `V_i = C_i + T_coll + V_{i+1}` (or the packet is dropped after the last
//! permitted stage). `C_i` is the stage-`i` countdown, a compound sum of a
//! uniform number of slot lengths.

use crate::model::MacParams;

/// Raw moments `[E[Z], E[Z^2], E[Z^3]]` with `E[Z^0] = 1` implied.
pub type Moments3 = [f64; 3];

fn with_zero(m: &Moments3) -> [f64; 4] {
    [1.0, m[0], m[1], m[2]]
}

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// Moments of `X + Y` for independent `X`, `Y`.
pub fn convolve(x: &Moments3, y: &Moments3) -> Moments3 {
    let (x, y) = (with_zero(x), with_zero(y));
    let mut out = [0.0; 3];
    for n in 1..=3 {
        out[n - 1] = (0..=n).map(|k| BINOM[n][k] * x[k] * y[n - k]).sum();
    }
    out
}

/// Moments of the constant `t`.
pub fn constant(t: f64) -> Moments3 {
    [t, t * t, t * t * t]
}

/// Moments of a countdown of `B` slots, `B` uniform on `0..W` (real `W`
/// allowed through the factorial-moment polynomials), each slot having raw
/// moments `a = [A1, A2, A3]`.
pub fn countdown_moments(w: f64, a: &Moments3) -> Moments3 {
    let f1 = (w - 1.0) / 2.0;
    let f2 = (w - 1.0) * (w - 2.0) / 3.0;
    let f3 = (w - 1.0) * (w - 2.0) * (w - 3.0) / 4.0;
    [
        f1 * a[0],
        f1 * a[1] + f2 * a[0] * a[0],
        f1 * a[2] + 3.0 * f2 * a[0] * a[1] + f3 * a[0].powi(3),
    ]
}

/// Partial moments `E[Z^n; event]` for n = 0..=3.
type Partial = [f64; 4];

fn mix(weight_a: f64, a: &Partial, weight_b: f64, b: &Partial) -> Partial {
    std::array::from_fn(|n| weight_a * a[n] + weight_b * b[n])
}

fn shift(partial: &Partial, c: &Moments3) -> Partial {
    // E[(C + Z)^n; event] for C independent of (Z, event)
    let c = with_zero(c);
    std::array::from_fn(|n| (0..=n).map(|k| BINOM[n][k] * c[k] * partial[n - k]).sum())
}

fn point(t: f64, mass: f64) -> Partial {
    [mass, mass * t, mass * t * t, mass * t.powi(3)]
}

/// Moments of the stage-limited access delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageMoments {
    /// Moments of the delay of packets that are eventually delivered.
    pub delivered: Moments3,
    /// Moments of the head-of-line holding time of every packet, delivered
    /// or dropped; this is the service time seen by the queue.
    pub service: Moments3,
    /// Probability that a packet is dropped after exhausting its retries.
    pub loss_rate: f64,
}

/// Exact moments for a MAC with a retry limit and/or window cap.
///
/// Returns `None` for unlimited backoff or when the window is capped but the
/// collision probability is 1.
pub fn stage_moments(a: &Moments3, tc: f64, ts: f64, p: f64, mac: &MacParams) -> Option<StageMoments> {
    match mac.retry_limit {
        Some(k) => Some(retry_limited(a, tc, ts, p, mac, k)),
        None => {
            let j = mac.cap_stage()?;
            capped(a, tc, ts, p, mac, j)
        }
    }
}

fn retry_limited(a: &Moments3, tc: f64, ts: f64, p: f64, mac: &MacParams, k: u32) -> StageMoments {
    // Back-recursion from the last permitted stage. `all` tracks
    // E[V_i^n] including drops, `del` tracks E[V_i^n; delivered].
    let mut all: Partial = [0.0; 4];
    let mut del: Partial = [0.0; 4];
    for stage in (0..=k).rev() {
        let c = countdown_moments(mac.window(stage), a);
        let succ = point(ts, 1.0);
        let (next_all, next_del) = if stage == k {
            (mix(1.0 - p, &succ, p, &point(tc, 1.0)), mix(1.0 - p, &succ, 0.0, &succ))
        } else {
            let tc_m = constant(tc);
            (
                mix(1.0 - p, &succ, p, &shift(&all, &tc_m)),
                mix(1.0 - p, &succ, p, &shift(&del, &tc_m)),
            )
        };
        all = shift(&next_all, &c);
        del = shift(&next_del, &c);
    }
    let delivered_mass = del[0];
    StageMoments {
        delivered: [del[1] / delivered_mass, del[2] / delivered_mass, del[3] / delivered_mass],
        service: [all[1], all[2], all[3]],
        loss_rate: p.powi(k as i32 + 1),
    }
}

fn capped(a: &Moments3, tc: f64, ts: f64, p: f64, mac: &MacParams, j: u32) -> Option<StageMoments> {
    if p >= 1.0 {
        return None;
    }
    // Stationary tail: V = C + (T_succ | T_coll + V), solved order by order.
    let c = with_zero(&countdown_moments(mac.window(j), a));
    let mut v = [1.0, 0.0, 0.0, 0.0];
    for n in 1..=3 {
        // E[(T_coll + V)^k] with the not-yet-known E[V^n] term left out
        let tail = |k: usize, v: &[f64; 4]| -> f64 {
            (0..k.min(n)).map(|b| BINOM[k][b] * tc.powi((k - b) as i32) * v[b]).sum::<f64>()
                + if k < n { v[k] } else { 0.0 }
        };
        let mut rhs = 0.0;
        for a_ord in 0..=n {
            let k = n - a_ord;
            let next = (1.0 - p) * ts.powi(k as i32) + p * tail(k, &v);
            rhs += BINOM[n][a_ord] * c[a_ord] * next;
        }
        v[n] = rhs / (1.0 - p);
    }
    let mut all: Partial = v;
    for stage in (0..j).rev() {
        let c = countdown_moments(mac.window(stage), a);
        let next = mix(1.0 - p, &point(ts, 1.0), p, &shift(&all, &constant(tc)));
        all = shift(&next, &c);
    }
    let m = [all[1], all[2], all[3]];
    Some(StageMoments {
        delivered: m,
        service: m,
        loss_rate: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolve_constants() {
        let m = convolve(&constant(2.0), &constant(3.0));
        assert_eq!(m, constant(5.0));
    }

    #[test]
    fn countdown_moments_match_enumeration() {
        // slot length: 1 w.p. 0.5, 5 w.p. 0.5 has moments 3, 13, 63
        let a_real = [3.0, 13.0, 63.0];
        let w = 6u32;
        let got = countdown_moments(f64::from(w), &a_real);
        // brute force: mixture over B of B-fold convolutions
        let mut want = [0.0; 3];
        for b in 0..w {
            let mut m = [0.0; 3];
            for _ in 0..b {
                m = convolve(&m, &a_real);
            }
            for n in 0..3 {
                want[n] += m[n] / f64::from(w);
            }
        }
        for n in 0..3 {
            assert!((got[n] - want[n]).abs() < 1e-9 * want[n], "{n}");
        }
    }

    #[test]
    fn zero_retries_is_single_attempt() {
        let mac = MacParams::new(16, 2.0, Some(0), None).unwrap();
        let a = [10.0, 150.0, 3000.0];
        let s = stage_moments(&a, 50.0, 60.0, 0.3, &mac).unwrap();
        assert!((s.delivered[0] - (10.0 * 7.5 + 60.0)).abs() < 1e-12);
        assert!((s.service[0] - (10.0 * 7.5 + 0.7 * 60.0 + 0.3 * 50.0)).abs() < 1e-12);
        assert!((s.loss_rate - 0.3).abs() < 1e-15);
    }
}
