//! Accumulators used by the simulator.

use serde::Serialize;

/// Streaming raw moments of a sample, optionally keeping the first
/// `cap` observations.
#[derive(Debug, Clone, Default)]
pub(crate) struct MomentAccumulator {
    count: u64,
    sums: [f64; 3],
    samples: Vec<f64>,
    cap: usize,
}

impl MomentAccumulator {
    pub fn new(cap: usize) -> Self {
        MomentAccumulator {
            cap,
            ..Default::default()
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sums[0] += x;
        self.sums[1] += x * x;
        self.sums[2] += x * x * x;
        if self.samples.len() < self.cap {
            self.samples.push(x);
        }
    }

    pub fn summary(&self) -> MomentSummary {
        let n = self.count as f64;
        let raw = self.sums.map(|s| if self.count > 0 { s / n } else { f64::NAN });
        let var = raw[1] - raw[0] * raw[0];
        MomentSummary {
            count: self.count,
            mean: raw[0],
            m2: raw[1],
            m3: raw[2],
            sd: var.max(0.0).sqrt(),
        }
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Sample raw moments and standard deviation (µs, µs², µs³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub sd: f64,
}

/// Minimum observations for a bucket to count as reliable.
pub const MIN_BUCKET_OBSERVATIONS: u64 = 100;

/// Collision frequency in one bucket (backoff stage or queue length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bucket {
    pub key: u32,
    pub attempts: u64,
    pub collisions: u64,
    pub p_c: f64,
    /// Fewer than [`MIN_BUCKET_OBSERVATIONS`] attempts.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct BucketCounter {
    attempts: Vec<u64>,
    collisions: Vec<u64>,
    max_key: usize,
}

impl BucketCounter {
    /// Keys above `max_key` are folded into the last bucket.
    pub fn new(max_key: usize) -> Self {
        BucketCounter {
            attempts: vec![0; max_key + 1],
            collisions: vec![0; max_key + 1],
            max_key,
        }
    }

    pub fn record(&mut self, key: usize, collided: bool) {
        let k = key.min(self.max_key);
        self.attempts[k] += 1;
        self.collisions[k] += u64::from(collided);
    }

    pub fn buckets(&self) -> Vec<Bucket> {
        self.attempts
            .iter()
            .zip(&self.collisions)
            .enumerate()
            .filter(|(_, (&a, _))| a > 0)
            .map(|(k, (&a, &c))| Bucket {
                key: k as u32,
                attempts: a,
                collisions: c,
                p_c: c as f64 / a as f64,
                low_confidence: a < MIN_BUCKET_OBSERVATIONS,
            })
            .collect()
    }
}

/// Attempt-weighted variance of `p_c` across the reliable buckets. NaN when
/// no bucket is reliable.
pub fn across_bucket_variance(buckets: &[Bucket]) -> f64 {
    let reliable: Vec<&Bucket> = buckets.iter().filter(|b| !b.low_confidence).collect();
    let total: f64 = reliable.iter().map(|b| b.attempts as f64).sum();
    if total == 0.0 {
        return f64::NAN;
    }
    let mean = reliable.iter().map(|b| b.attempts as f64 * b.p_c).sum::<f64>() / total;
    reliable
        .iter()
        .map(|b| b.attempts as f64 * (b.p_c - mean).powi(2))
        .sum::<f64>()
        / total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let mut acc = MomentAccumulator::new(2);
        for x in [1.0, 2.0, 3.0] {
            acc.push(x);
        }
        let s = acc.summary();
        assert_eq!(s.count, 3);
        assert!((s.mean - 2.0).abs() < 1e-15);
        assert!((s.m2 - 14.0 / 3.0).abs() < 1e-15);
        assert!((s.m3 - 12.0).abs() < 1e-15);
        assert_eq!(acc.into_samples(), vec![1.0, 2.0]);
    }

    #[test]
    fn variance_ignores_thin_buckets() {
        let mut c = BucketCounter::new(4);
        for i in 0..1000 {
            c.record(0, i % 10 == 0);
            c.record(1, i % 5 == 0);
        }
        c.record(9, true);
        let b = c.buckets();
        assert_eq!(b.len(), 3);
        assert!(b[2].low_confidence && b[2].key == 4);
        // equal weights, p = 0.1 and 0.2
        assert!((across_bucket_variance(&b) - 0.0025).abs() < 1e-12);
    }
}
