use clap::{Args, ValueEnum};
use mprcap::sim::{run_many, write_delay_dump, Bucket, Collect, SimConfig, SimResult};
use mprcap::table::{fmt_num, write_csv};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::{scenario, Format, Global, Report};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollectKind {
    /// Keep raw delay samples.
    DelaySamples,
    /// Collision frequency by backoff stage and queue length.
    PcByState,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Run seed; repeat or comma-separate for several runs.
    #[arg(long = "seed", value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    /// Slots per run, warmup included [default: 1000000, or unlimited
    /// with --packets].
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub warmup: u64,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub collect: Vec<CollectKind>,
    /// Every station always has a packet.
    #[arg(long)]
    pub saturated: bool,
    /// Per-station buffer limit, packets.
    #[arg(long)]
    pub buffer: Option<usize>,
    /// Stop each run after this many measured deliveries.
    #[arg(long)]
    pub packets: Option<u64>,
    /// Aggregate offered load, packets/s; replaces the scenario's rate.
    #[arg(long)]
    pub load_pps: Option<f64>,
    /// Write the delay samples of each run to `simulate-seed<N>.dly`.
    #[arg(long)]
    pub dump: bool,
}

impl SimulateArgs {
    fn config(&self, seed: u64) -> CliResult<SimConfig> {
        let slots = match (self.slots, self.packets) {
            (Some(s), _) => s,
            (None, Some(_)) => u64::MAX,
            (None, None) => 1_000_000,
        };
        let mut cfg = SimConfig::new(seed, slots, self.warmup).with_collect(Collect {
            delay_samples: self.dump || self.collect.contains(&CollectKind::DelaySamples),
            pc_by_state: self.collect.contains(&CollectKind::PcByState),
            queue_samples: true,
        });
        cfg.saturated = self.saturated;
        cfg.buffer = self.buffer;
        cfg.stop_after_delivered = self.packets;
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }
}

fn bucket_rows(results: &[SimResult]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut push = |seed: u64, kind: &str, b: &Bucket| {
        rows.push(vec![
            seed.to_string(),
            kind.to_string(),
            b.key.to_string(),
            b.attempts.to_string(),
            b.collisions.to_string(),
            fmt_num(b.p_c),
            b.low_confidence.to_string(),
        ])
    };
    for r in results {
        r.p_c_by_stage.iter().for_each(|b| push(r.seed, "stage", b));
        r.p_c_by_occupancy.iter().for_each(|b| push(r.seed, "occupancy", b));
    }
    rows
}

pub fn run(g: &Global, args: &SimulateArgs, out: &mut Outputs) -> CliResult<Report> {
    let mut s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    if let Some(load) = args.load_pps {
        s = s.with_offered_load(load)?;
    }
    if args.seeds.is_empty() {
        return Err(CliError::Input("need at least one --seed".into()));
    }
    let configs = args.seeds.iter().map(|&k| args.config(k)).collect::<CliResult<Vec<_>>>()?;
    let results = run_many(&s, &configs)?;
    out.rows("simulate", &results)?;
    if args.collect.contains(&CollectKind::PcByState) {
        let header = ["seed", "by", "key", "attempts", "collisions", "p_c", "low_confidence"];
        let rows = bucket_rows(&results);
        match g.format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_csv(&mut buf, &header, rows)?;
                out.write("simulate-pc-by-state.csv", &buf)?;
            }
            Format::Json => {
                let by_seed: Vec<_> = results
                    .iter()
                    .map(|r| serde_json::json!({"seed": r.seed, "by_stage": r.p_c_by_stage, "by_occupancy": r.p_c_by_occupancy}))
                    .collect();
                out.write("simulate-pc-by-state.json", &crate::output::to_json(&by_seed)?)?;
            }
        }
    }
    if args.dump {
        for r in &results {
            let mut buf = Vec::new();
            write_delay_dump(&mut buf, &r.delay_samples)?;
            out.write(&format!("simulate-seed{}.dly", r.seed), &buf)?;
        }
    }
    if !g.quiet {
        println!("{:>8} {:>12} {:>10} {:>10} {:>12}", "seed", "pkt/s", "pkt/slot", "p_c", "E[D] ms");
        for r in &results {
            println!(
                "{:>8} {:>12.3} {:>10.5} {:>10.5} {:>12.4}",
                r.seed,
                r.throughput_pps,
                r.packets_per_slot,
                r.p_c_overall,
                r.delay.mean * 1e-3
            );
        }
    }
    Ok(Report {
        seeds: args.seeds.clone(),
        failure: None,
    })
}
