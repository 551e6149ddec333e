use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mprcap::analytic::operating_point;
use mprcap::capacity::{capacity_report, CapacityReport};
use mprcap::delay::{delay_stats, DelayReport, MomentValue};
use mprcap::sim::{run_many, SimConfig, SimResult};
use mprcap::table::{fmt_opt, CsvRow};
use mprcap::Scenario;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::{grid, scenario, Global, Report};

/// Relative tolerances, read from a JSON object such as
/// `{"mean": 0.05, "sd": 0.1, "rho": 0.03, "tau": 0.02}`. Missing keys keep
/// their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Mean packet delay.
    pub mean: f64,
    /// Standard deviation of the packet delay.
    pub sd: f64,
    /// Utilisation.
    pub rho: f64,
    /// Attempt rate per station and slot.
    pub tau: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean: 0.05,
            sd: 0.10,
            rho: 0.03,
            tau: 0.02,
        }
    }
}

impl Tolerances {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Tolerances::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read tolerances {}: {e}", path.display())))?;
        let t: Tolerances =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for (name, v) in [("mean", t.mean), ("sd", t.sd), ("rho", t.rho), ("tau", t.tau)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!("{}: `{name}` must be finite and > 0", path.display())));
            }
        }
        Ok(t)
    }
}

/// Reference throughput that `--fractions` scales.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    SS,
    SBbmd,
    SBbdj,
    SSbmd,
    SSbdj,
}

impl Reference {
    fn pps(self, c: &CapacityReport) -> f64 {
        c.pps(match self {
            Reference::SS => c.s_s,
            Reference::SBbmd => c.s_bbmd,
            Reference::SBbdj => c.s_bbdj,
            Reference::SSbmd => c.s_sbmd,
            Reference::SSbdj => c.s_sbdj,
        })
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ValidateArgs {
    /// Loads as fractions of the reference throughput.
    #[arg(long, default_value = "0.3,0.6", conflicts_with = "loads_pps")]
    pub fractions: String,
    #[arg(long, value_enum, default_value_t = Reference::SSbdj)]
    pub of: Reference,
    /// Aggregate loads in packets/s, instead of fractions.
    #[arg(long)]
    pub loads_pps: Option<String>,
    #[arg(long = "seed", value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    /// Measured deliveries per run.
    #[arg(long, default_value_t = 200_000)]
    pub packets: u64,
    #[arg(long, default_value_t = 100_000)]
    pub warmup: u64,
    /// JSON file overriding the default tolerances.
    #[arg(long, value_name = "PATH")]
    pub tolerances: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub load_pps: f64,
    pub quantity: &'static str,
    pub analytic: Option<f64>,
    pub simulated: Option<f64>,
    pub rel_gap: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    pub reason: Option<String>,
}

impl CsvRow for Comparison {
    fn header() -> &'static [&'static str] {
        &["load_pps", "quantity", "analytic", "simulated", "rel_gap", "tolerance", "status", "reason"]
    }

    fn fields(&self) -> Vec<String> {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
            Status::Error => "error",
        };
        vec![
            mprcap::table::fmt_num(self.load_pps),
            self.quantity.into(),
            fmt_opt(self.analytic),
            fmt_opt(self.simulated),
            fmt_opt(self.rel_gap),
            mprcap::table::fmt_num(self.tolerance),
            status.into(),
            self.reason.clone().unwrap_or_default(),
        ]
    }
}

/// Delay moments over all runs, weighting each run by its sample count.
fn pooled(results: &[SimResult]) -> (f64, f64) {
    let n: f64 = results.iter().map(|r| r.delay.count as f64).sum();
    let m1 = results.iter().map(|r| r.delay.mean * r.delay.count as f64).sum::<f64>() / n;
    let m2 = results.iter().map(|r| r.delay.m2 * r.delay.count as f64).sum::<f64>() / n;
    (m1, (m2 - m1 * m1).max(0.0).sqrt())
}

fn average(results: &[SimResult], f: impl Fn(&SimResult) -> f64) -> f64 {
    results.iter().map(f).sum::<f64>() / results.len() as f64
}

fn compare(load: f64, quantity: &'static str, analytic: f64, simulated: f64, tol: f64) -> Comparison {
    let gap = (simulated - analytic).abs() / analytic.abs();
    Comparison {
        load_pps: load,
        quantity,
        analytic: Some(analytic),
        simulated: Some(simulated),
        rel_gap: Some(gap),
        tolerance: tol,
        status: if gap <= tol { Status::Pass } else { Status::Fail },
        reason: None,
    }
}

fn moment(load: f64, quantity: &'static str, analytic: MomentValue, simulated: f64, tol: f64, why: &str) -> Comparison {
    match analytic {
        MomentValue::Finite(a) => compare(load, quantity, a, simulated, tol),
        MomentValue::Divergent => Comparison {
            load_pps: load,
            quantity,
            analytic: None,
            simulated: Some(simulated),
            rel_gap: None,
            tolerance: tol,
            status: Status::Skip,
            reason: Some(why.into()),
        },
    }
}

fn errors(load: f64, tol: &Tolerances, reason: String) -> Vec<Comparison> {
    [("mean_delay_us", tol.mean), ("sd_delay_us", tol.sd), ("rho", tol.rho), ("tau", tol.tau)]
        .into_iter()
        .map(|(quantity, tolerance)| Comparison {
            load_pps: load,
            quantity,
            analytic: None,
            simulated: None,
            rel_gap: None,
            tolerance,
            status: Status::Error,
            reason: Some(reason.clone()),
        })
        .collect()
}

fn analytic_at(s: &Scenario) -> mprcap::Result<Option<DelayReport>> {
    operating_point(s)?.map(|op| delay_stats(s, op.tau)).transpose()
}

fn compare_at(base: &Scenario, load: f64, args: &ValidateArgs, tol: &Tolerances) -> Vec<Comparison> {
    let s = match base.with_offered_load(load) {
        Ok(s) => s,
        Err(e) => return errors(load, tol, e.to_string()),
    };
    let d = match analytic_at(&s) {
        Ok(Some(d)) => d,
        Ok(None) => return errors(load, tol, "offered load infeasible".into()),
        Err(e) => return errors(load, tol, e.to_string()),
    };
    let configs: Vec<SimConfig> = args
        .seeds
        .iter()
        .map(|&k| SimConfig::new(k, u64::MAX, args.warmup).stop_after(args.packets))
        .collect();
    let results = match run_many(&s, &configs) {
        Ok(r) => r,
        Err(e) => return errors(load, tol, e.to_string()),
    };
    let (mean, sd) = pooled(&results);
    let mut rows = vec![
        moment(load, "mean_delay_us", d.e_d_us, mean, tol.mean, "analytic mean divergent"),
        moment(load, "sd_delay_us", d.sd_d_us(), sd, tol.sd, "analytic variance divergent"),
    ];
    match d.rho.value() {
        Some(rho) => rows.push(compare(load, "rho", rho, average(&results, |r| r.rho_time_measured), tol.rho)),
        None => rows.push(Comparison {
            load_pps: load,
            quantity: "rho",
            analytic: None,
            simulated: None,
            rel_gap: None,
            tolerance: tol.rho,
            status: Status::Error,
            reason: Some("queue unstable".into()),
        }),
    }
    rows.push(compare(load, "tau", d.tau, average(&results, |r| r.tau_measured), tol.tau));
    rows
}

pub fn run(g: &Global, args: &ValidateArgs, out: &mut Outputs) -> CliResult<Report> {
    let tol = Tolerances::load(args.tolerances.as_ref())?;
    let s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    if args.seeds.is_empty() {
        return Err(CliError::Input("need at least one --seed".into()));
    }
    if args.packets == 0 {
        return Err(CliError::Input("--packets must be positive".into()));
    }
    let loads = match &args.loads_pps {
        Some(l) => grid::parse(l)?,
        None => {
            let c = capacity_report(&s)?;
            let reference = args.of.pps(&c);
            grid::parse(&args.fractions)?.into_iter().map(|f| f * reference).collect()
        }
    };
    let rows: Vec<Comparison> = loads.iter().flat_map(|&l| compare_at(&s, l, args, &tol)).collect();
    out.rows("validate", &rows)?;
    let failed = rows
        .iter()
        .filter(|r| matches!(r.status, Status::Fail | Status::Error))
        .count();
    if !g.quiet {
        for r in &rows {
            let gap = r.rel_gap.map(|x| format!("{:.2}%", 100.0 * x)).unwrap_or("-".into());
            let status = format!("{:?}", r.status).to_lowercase();
            let reason = r.reason.as_deref().unwrap_or("");
            println!("{:>10.3} pkt/s {:<14} {:>8} {:<5} {}", r.load_pps, r.quantity, gap, status, reason);
        }
    }
    Ok(Report {
        seeds: args.seeds.clone(),
        failure: (failed > 0).then(|| CliError::Failed(format!("{failed} of {} comparisons failed", rows.len()))),
    })
}
