//! Closed-form first three moments of the non-empty-queue access delay for
//! unlimited exponential backoff.
//!
//! Each function takes the slot moments `A1..A3`, the collision and success
//! slot lengths, `W0`, `r` and the conditional collision probability `p`,
//! and is only meaningful while `p * r^n < 1` for the order `n` involved.

/// Inputs shared by the moment expressions.
#[derive(Debug, Clone, Copy)]
pub struct MomentInputs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub tc: f64,
    pub ts: f64,
    pub w0: f64,
    pub r: f64,
    pub p: f64,
}

pub fn first(x: &MomentInputs) -> f64 {
    let MomentInputs { a1, tc, ts, w0, r, p, .. } = *x;
    a1 * (w0 * (1.0 - p) - (1.0 - r * p)) / (2.0 * (1.0 - p) * (1.0 - r * p))
        + tc * p / (1.0 - p)
        + ts
}

pub fn second(x: &MomentInputs) -> f64 {
    let MomentInputs { a1, a2, tc, ts, w0, r, p, .. } = *x;
    let q = 1.0 - p;
    let q1 = 1.0 - r * p;
    let q2 = 1.0 - r * r * p;
    let w2 = w0 * w0;
    let base = (w0 * q - q1) / (q1 * q);

    let t1 = a1
        * a1
        * (w2 / (12.0 * q2) - w0 / (2.0 * q1) + 5.0 / (12.0 * q)
            + w2 * (1.0 + r * p) / (4.0 * q1 * q2)
            - w0 * (1.0 - r * p * p) / (2.0 * q * q1 * q1)
            + (1.0 + p) / (4.0 * q * q));
    let t2 = a2 * base / 2.0
        + tc * tc * p * (1.0 + p) / (q * q)
        + ts * ts
        + 2.0 * a1 * tc * p * (w0 * (1.0 + r - 2.0 * r * p) / (2.0 * q * q1 * q1) - 1.0 / (q * q));
    let t3 = a1 * ts * base + 2.0 * tc * ts * p / q;
    t1 + t2 + t3
}

pub fn theta1(x: &MomentInputs) -> f64 {
    let MomentInputs { a1, a2, a3, w0, r, p, .. } = *x;
    let q = 1.0 - p;
    let q1 = 1.0 - r * p;
    let q2 = 1.0 - r * r * p;
    let w2 = w0 * w0;
    a1.powi(3) / 4.0 * (-w2 / q2 + 4.0 * w0 / q1 - 3.0 / q)
        + a1 * a2 / 4.0 * (w2 / q2 - 6.0 * w0 / q1 + 5.0 / q)
        + a3 / 2.0 * (w0 / q1 - 1.0 / q)
}

pub fn theta2(x: &MomentInputs) -> f64 {
    let MomentInputs { a1, a2, tc, ts, w0, r, p, .. } = *x;
    let q = 1.0 - p;
    let q1 = 1.0 - r * p;
    let q2 = 1.0 - r * r * p;
    let q3 = 1.0 - r.powi(3) * p;
    let w2 = w0 * w0;
    let w3 = w2 * w0;
    let r2 = r * r;

    let cube = a1.powi(3) / 12.0
        * (w3 * (1.0 - r.powi(3) * p * p) / (2.0 * q1 * q2 * q3)
            - 3.0 * w2 * (1.0 + r * p) / (q1 * q2)
            + 11.0 * w0 * (1.0 - r * p * p) / (2.0 * q * q1 * q1)
            - w2 * (1.0 - r2 * p * p) / (2.0 * q * q2 * q2)
            - 5.0 * (1.0 + p) / (2.0 * q * q));
    let square = a1 * a1 / 12.0
        * (tc * (w2 * p * (1.0 + r2 - 2.0 * r2 * p) / (q * q2 * q2)
            - 6.0 * w0 * p * (1.0 + r - 2.0 * r * p) / (q * q1 * q1)
            + 10.0 * p / (q * q))
            + ts * (w2 / q2 - 6.0 * w0 / q1 + 5.0 / q));
    let mixed = a1
        * a2
        * (w2 / 4.0 * (1.0 + r * p) / (q1 * q2) - w0 / 2.0 * (1.0 - r * p * p) / (q * q1 * q1)
            + (1.0 + p) / (4.0 * q * q));
    let linear = a2
        * (tc * p / 2.0 * (w0 * (1.0 + r - 2.0 * r * p) * q - 2.0 * q1 * q1) / (q * q * q1 * q1)
            + ts / 2.0 * (w0 * q - q1) / (q * q1));
    cube + square + mixed + linear
}

pub fn theta3(x: &MomentInputs) -> f64 {
    let MomentInputs { a1, tc, ts, w0, r, p, .. } = *x;
    let q = 1.0 - p;
    let q1 = 1.0 - r * p;
    let q2 = 1.0 - r * r * p;
    let q3 = 1.0 - r.powi(3) * p;
    let w2 = w0 * w0;
    let w3 = w2 * w0;
    let (r2, r3, r4) = (r * r, r.powi(3), r.powi(4));
    let (p2, p3, p4) = (p * p, p.powi(3), p.powi(4));

    let quartic = 1.0 + 2.0 * r * p - 2.0 * r * p2 - 2.0 * r2 * p2 - 2.0 * r3 * p2
        + 2.0 * r3 * p3
        + r4 * p4;
    let cube = a1.powi(3)
        * (w3 / 8.0 * (1.0 + 2.0 * r * p + 2.0 * r2 * p + r3 * p2) / (q3 * q2 * q1)
            - 3.0 * w2 / 8.0 * quartic / (q * q1 * q1 * q2 * q2)
            + 3.0 * w0 / 8.0 * (1.0 - 6.0 * r * p2 + p * (1.0 + r) + r * p3 * (1.0 + r) + r2 * p4)
                / (q * q * q1.powi(3))
            - (p2 + 4.0 * p + 1.0) / (8.0 * q.powi(3)));
    let fixed = tc.powi(3) * p * (p2 + 4.0 * p + 1.0) / q.powi(3)
        + 3.0 * tc * tc * ts * p * (1.0 + p) / (q * q)
        + 3.0 * tc * ts * ts * p / q
        + ts.powi(3);
    let square = 3.0
        * a1
        * a1
        * (tc * w2 / 4.0
            * (p * (1.0 - r2 * p2) * (1.0 - 2.0 * r2 * p + r2) + 2.0 * r * p * q * q2)
            / (q * q1 * q1 * q2 * q2)
            - tc * w0 * (p + r * p - 3.0 * r * p2 + r2 * p4) / (q * q * q1.powi(3))
            + tc / 2.0 * (p2 + 2.0 * p) / q.powi(3)
            + ts * w2 / 4.0 * (1.0 + r * p) / (q1 * q2)
            - ts * w0 / 2.0 * (1.0 - r * p2) / (q * q1 * q1)
            + ts / 4.0 * (1.0 + p) / (q * q));
    let linear = 3.0
        * a1
        * (tc * tc * w0 / 2.0
            * (r * p - 2.0 * r * p2 - 3.0 * r * p3 + r2 * p2 + p + p2 - 3.0 * r2 * p3
                + 4.0 * r2 * p4)
            / (q * q * q1.powi(3))
            + ts * tc * w0 * p * (1.0 + r - 2.0 * r * p) / (q * q1 * q1)
            + ts * ts * w0 / 2.0 / q1
            - tc * tc / 2.0 * (4.0 * p2 + 2.0 * p) / q.powi(3)
            - tc * ts * 2.0 * p / (q * q)
            - ts * ts / 2.0 / q);
    cube + fixed + square + linear
}

pub fn third(x: &MomentInputs) -> f64 {
    theta1(x) + 3.0 * theta2(x) + theta3(x)
}
