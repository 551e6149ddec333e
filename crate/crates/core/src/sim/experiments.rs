//! Multi-run experiments built on the single-run engine.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{across_bucket_variance, Bucket};
use super::{run, SimConfig, SimResult};
use crate::analytic::{conditional_collision_prob, operating_point};
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::table::{fmt_num, CsvRow};

/// Run several configurations in parallel. Results follow input order.
pub fn run_many(scenario: &Scenario, configs: &[SimConfig]) -> Result<Vec<SimResult>> {
    configs.par_iter().map(|c| run(scenario, c)).collect()
}

/// Collision frequencies split by backoff stage and by queue length at the
/// moment of transmission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcByState {
    pub p_c_overall: f64,
    pub by_stage: Vec<Bucket>,
    pub by_occupancy: Vec<Bucket>,
    /// Attempt-weighted variance across buckets with enough observations.
    pub var_stage: f64,
    pub var_occupancy: f64,
}

pub fn measure_pc_by_state(scenario: &Scenario, config: &SimConfig) -> Result<PcByState> {
    let mut cfg = *config;
    cfg.collect.pc_by_state = true;
    let r = run(scenario, &cfg)?;
    Ok(PcByState {
        p_c_overall: r.p_c_overall,
        var_stage: across_bucket_variance(&r.p_c_by_stage),
        var_occupancy: across_bucket_variance(&r.p_c_by_occupancy),
        by_stage: r.p_c_by_stage,
        by_occupancy: r.p_c_by_occupancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseRow {
    pub offered_pps: f64,
    pub run_slots: u64,
    pub seed: u64,
    pub throughput_pps: f64,
}

impl CsvRow for CollapseRow {
    fn header() -> &'static [&'static str] {
        &["offered_pps", "run_slots", "seed", "throughput_pps"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.offered_pps),
            self.run_slots.to_string(),
            self.seed.to_string(),
            fmt_num(self.throughput_pps),
        ]
    }
}

/// Measured throughput for every combination of total offered load
/// (packets per second), run length and seed, ordered load-major.
/// Statistics start after `warmup_slots`, which must be below every run
/// length.
pub fn collapse_experiment(
    scenario: &Scenario,
    loads_pps: &[f64],
    run_lengths: &[u64],
    seeds: &[u64],
    warmup_slots: u64,
) -> Result<Vec<CollapseRow>> {
    let mut cells = Vec::new();
    for &load in loads_pps {
        let s = scenario.with_offered_load(load)?;
        for &len in run_lengths {
            for &seed in seeds {
                cells.push((s, load, SimConfig::new(seed, len, warmup_slots)));
            }
        }
    }
    cells
        .par_iter()
        .map(|(s, load, cfg)| {
            let r = run(s, cfg)?;
            Ok(CollapseRow {
                offered_pps: *load,
                run_slots: cfg.total_slots,
                seed: cfg.seed,
                throughput_pps: r.throughput_pps,
            })
        })
        .collect()
}

/// Spread of per-run mean access delay across independent runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    pub means_us: Vec<f64>,
    pub mean_us: f64,
    pub sd_us: f64,
    /// Coefficient of variation, `sd / mean`.
    pub cov: f64,
}

pub fn dispersion(scenario: &Scenario, configs: &[SimConfig]) -> Result<Dispersion> {
    let means: Vec<f64> = run_many(scenario, configs)?
        .iter()
        .map(|r| r.access_delay.mean)
        .collect();
    let n = means.len() as f64;
    if n < 2.0 {
        return Err(Error::invalid("configs", "need at least two runs"));
    }
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Dispersion {
        sd_us: var.sqrt(),
        cov: var.sqrt() / mean,
        mean_us: mean,
        means_us: means,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub probe_p_c: f64,
    pub control_p_c: f64,
    pub probe: Dispersion,
    pub control: Dispersion,
    /// `probe.cov / control.cov`.
    pub cov_ratio: f64,
}

fn analytic_pc(s: &Scenario) -> Result<f64> {
    let op = operating_point(s)?
        .ok_or_else(|| Error::Precondition("offered load has no stable operating point".into()))?;
    Ok(conditional_collision_prob(op.tau, s.n, s.m))
}

/// Compare run-to-run scatter of the mean access delay at a load where the
/// delay variance is infinite (`p_c r^2 > 1`) against a control load where
/// the third moment is finite (`p_c r^3 < 1`).
pub fn immeasurability_probe(probe: &Scenario, control: &Scenario, configs: &[SimConfig]) -> Result<ProbeReport> {
    let probe_p_c = analytic_pc(probe)?;
    let control_p_c = analytic_pc(control)?;
    if probe_p_c * probe.mac.r.powi(2) <= 1.0 {
        return Err(Error::Precondition(format!(
            "probe load has p_c = {probe_p_c}, need p_c r^2 > 1"
        )));
    }
    if control_p_c * control.mac.r.powi(3) >= 1.0 {
        return Err(Error::Precondition(format!(
            "control load has p_c = {control_p_c}, need p_c r^3 < 1"
        )));
    }
    let p = dispersion(probe, configs)?;
    let c = dispersion(control, configs)?;
    Ok(ProbeReport {
        probe_p_c,
        control_p_c,
        cov_ratio: p.cov / c.cov,
        probe: p,
        control: c,
    })
}

/// Leading bytes of a delay-sample dump. The magic is followed by a
/// little-endian `u64` count and that many little-endian `f64` values in µs.
pub const DUMP_MAGIC: &[u8; 8] = b"MPRDLY01";

pub fn write_delay_dump<W: Write>(mut out: W, samples: &[f64]) -> Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&(samples.len() as u64).to_le_bytes())?;
    for x in samples {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_delay_dump<R: Read>(mut input: R) -> Result<Vec<f64>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Domain("not a delay dump: bad magic".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word);
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    for _ in 0..n {
        input.read_exact(&mut word)?;
        out.push(f64::from_le_bytes(word));
    }
    Ok(out)
}
