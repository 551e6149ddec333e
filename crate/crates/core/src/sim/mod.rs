//! Slotted discrete-event simulator.
//!
//! Time advances one channel slot at a time. At the start of a slot every
//! station whose head-of-line packet has a zero backoff counter transmits.
//! Up to `m` simultaneous transmissions succeed; more collide, and each
//! colliding station moves to the next backoff stage. Stations that did not
//! transmit decrement their counters. A packet reaching an empty queue
//! starts stage-0 backoff at the end of the slot in progress.
//!
//! Randomness comes from ChaCha8 generators seeded with the run seed:
//! stream 0 drives arrivals, stream `i + 1` the backoff draws of station
//! `i`. Results are bit-identical for identical inputs on every platform.
//!
//! Runs of consecutive idle slots with no arrivals are processed in one
//! step, which keeps lightly loaded runs cheap.

mod engine;
mod experiments;
mod stats;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::table::{fmt_num, fmt_opt, CsvRow};

pub use experiments::{
    collapse_experiment, dispersion, immeasurability_probe, measure_pc_by_state, read_delay_dump,
    run_many, write_delay_dump, CollapseRow, Dispersion, PcByState, ProbeReport, DUMP_MAGIC,
};
pub use stats::{across_bucket_variance, Bucket, MomentSummary, MIN_BUCKET_OBSERVATIONS};

/// What a run records beyond the always-on counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Collect {
    /// Keep raw delay samples (up to [`SimConfig::sample_cap`]).
    pub delay_samples: bool,
    /// Collision frequencies by backoff stage and queue length.
    pub pc_by_state: bool,
    /// Queue length seen by arrivals.
    pub queue_samples: bool,
}

impl Default for Collect {
    fn default() -> Self {
        Collect {
            delay_samples: false,
            pc_by_state: false,
            queue_samples: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Slots simulated, warmup included.
    pub total_slots: u64,
    /// Slots discarded before statistics start.
    pub warmup_slots: u64,
    pub collect: Collect,
    /// Every station always has a packet; arrivals are ignored.
    pub saturated: bool,
    /// Per-station buffer limit in packets; arrivals beyond it are lost.
    pub buffer: Option<usize>,
    /// End the run once this many measured packets have been delivered.
    pub stop_after_delivered: Option<u64>,
    /// Most raw samples kept per delay series.
    pub sample_cap: usize,
}

impl SimConfig {
    pub fn new(seed: u64, total_slots: u64, warmup_slots: u64) -> Self {
        SimConfig {
            seed,
            total_slots,
            warmup_slots,
            collect: Collect::default(),
            saturated: false,
            buffer: None,
            stop_after_delivered: None,
            sample_cap: 2_000_000,
        }
    }

    pub fn saturated(mut self) -> Self {
        self.saturated = true;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_collect(mut self, collect: Collect) -> Self {
        self.collect = collect;
        self
    }

    pub fn stop_after(mut self, delivered: u64) -> Self {
        self.stop_after_delivered = Some(delivered);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_slots == 0 {
            return Err(Error::invalid("total_slots", "must be positive"));
        }
        if self.warmup_slots >= self.total_slots {
            return Err(Error::invalid("warmup_slots", "must be below total_slots"));
        }
        if self.buffer == Some(0) {
            return Err(Error::invalid("buffer", "must hold at least one packet"));
        }
        Ok(())
    }
}

/// Totals over the whole run, warmup included, for checking that no packet
/// is lost by the bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conservation {
    pub arrivals: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub blocked: u64,
    pub queued_at_end: u64,
}

impl Conservation {
    pub fn balanced(&self) -> bool {
        self.arrivals == self.delivered + self.dropped + self.blocked + self.queued_at_end
    }
}

/// Measurements of one run. Rates and ratios cover the slots after warmup;
/// delay statistics cover packets that arrived after warmup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub seed: u64,
    /// Measured slots and their total duration.
    pub slots: u64,
    pub elapsed_us: f64,
    /// Packets delivered during the measured slots.
    pub delivered: u64,
    pub throughput_pps: f64,
    pub throughput_bps: f64,
    pub packets_per_slot: f64,
    /// Transmissions per station per slot.
    pub tau_measured: f64,
    /// Fraction of station-slots that start with a non-empty queue.
    pub rho_measured: f64,
    /// Fraction of time a station's queue is non-empty.
    pub rho_time_measured: f64,
    /// Transmission probability in a slot given a non-empty queue.
    pub p_t_measured: f64,
    pub p_c_overall: f64,
    pub p_c_by_stage: Vec<Bucket>,
    pub p_c_by_occupancy: Vec<Bucket>,
    /// Arrival to delivery.
    pub delay: MomentSummary,
    /// Start of backoff at the head of the queue to delivery.
    pub access_delay: MomentSummary,
    #[serde(skip)]
    pub delay_samples: Vec<f64>,
    #[serde(skip)]
    pub access_delay_samples: Vec<f64>,
    /// Mean of `0.5^q` over the queue lengths `q` seen by arrivals.
    pub queue_pgf_half: Option<f64>,
    /// Empirical distribution of the queue length seen by arrivals; the
    /// last entry collects longer queues.
    pub queue_histogram: Vec<u64>,
    /// Dropped over delivered-plus-dropped, when a retry limit is set.
    pub loss_rate: Option<f64>,
    pub conservation: Conservation,
}

impl SimResult {
    /// Empirical queue-length PGF at `z` from the arrival histogram.
    /// Queues longer than the histogram are counted at the last bin, so this
    /// is exact only for `z` near 1 or short queues.
    pub fn queue_pgf(&self, z: f64) -> Option<f64> {
        let total: u64 = self.queue_histogram.iter().sum();
        if total == 0 {
            return None;
        }
        let s: f64 = self
            .queue_histogram
            .iter()
            .enumerate()
            .map(|(q, &c)| c as f64 * z.powi(q as i32))
            .sum();
        Some(s / total as f64)
    }
}

impl CsvRow for SimResult {
    fn header() -> &'static [&'static str] {
        &[
            "seed",
            "slots",
            "elapsed_us",
            "delivered",
            "throughput_pps",
            "packets_per_slot",
            "tau",
            "rho",
            "rho_time",
            "p_t",
            "p_c",
            "p_c_var_stage",
            "p_c_var_occupancy",
            "delay_mean_us",
            "delay_sd_us",
            "access_mean_us",
            "access_m2_us2",
            "access_m3_us3",
            "queue_pgf_half",
            "loss_rate",
            "arrivals",
            "dropped",
            "blocked",
            "queued_at_end",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let c = &self.conservation;
        // empty unless collision frequencies by state were collected
        let var = |b: &[Bucket]| fmt_opt((!b.is_empty()).then(|| across_bucket_variance(b)));
        vec![
            self.seed.to_string(),
            self.slots.to_string(),
            fmt_num(self.elapsed_us),
            self.delivered.to_string(),
            fmt_num(self.throughput_pps),
            fmt_num(self.packets_per_slot),
            fmt_num(self.tau_measured),
            fmt_num(self.rho_measured),
            fmt_num(self.rho_time_measured),
            fmt_num(self.p_t_measured),
            fmt_num(self.p_c_overall),
            var(&self.p_c_by_stage),
            var(&self.p_c_by_occupancy),
            fmt_num(self.delay.mean),
            fmt_num(self.delay.sd),
            fmt_num(self.access_delay.mean),
            fmt_num(self.access_delay.m2),
            fmt_num(self.access_delay.m3),
            fmt_opt(self.queue_pgf_half),
            fmt_opt(self.loss_rate),
            c.arrivals.to_string(),
            c.dropped.to_string(),
            c.blocked.to_string(),
            c.queued_at_end.to_string(),
        ]
    }
}

/// Simulate one run.
pub fn run(scenario: &Scenario, config: &SimConfig) -> Result<SimResult> {
    scenario.validate()?;
    config.validate()?;
    if !config.saturated && scenario.lambda_pps <= 0.0 {
        return Err(Error::Precondition(
            "an unsaturated run needs lambda_pps > 0".into(),
        ));
    }
    Ok(engine::Engine::new(scenario, config).run())
}
