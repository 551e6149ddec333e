use clap::Args;
use mprcap::analytic::{operating_point, OperatingPoint};
use mprcap::capacity::{capacity_report, CapacityReport};
use mprcap::delay::{delay_stats, DelayReport, MomentValue};
use mprcap::Scenario;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::{scenario, Global, Report};

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Aggregate offered load for the delay report, packets/s
    /// [default: N times the scenario's per-station rate].
    #[arg(long)]
    pub load_pps: Option<f64>,
}

/// Capacity figures converted to packets per second.
#[derive(Debug, Serialize)]
struct CapacityPps {
    s_s: f64,
    s_star: f64,
    s_bbmd: f64,
    s_bbdj: f64,
    s_sbmd: f64,
    s_sbdj: f64,
}

impl From<&CapacityReport> for CapacityPps {
    fn from(c: &CapacityReport) -> Self {
        CapacityPps {
            s_s: c.pps(c.s_s),
            s_star: c.pps(c.s_star),
            s_bbmd: c.pps(c.s_bbmd),
            s_bbdj: c.pps(c.s_bbdj),
            s_sbmd: c.pps(c.s_sbmd),
            s_sbdj: c.pps(c.s_sbdj),
        }
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    scenario: Scenario,
    capacity: CapacityReport,
    capacity_pps: CapacityPps,
    offered_load_pps: f64,
    operating_point: Option<OperatingPoint>,
    delay: Option<DelayReport>,
}

fn show(v: MomentValue, scale: f64) -> String {
    match v {
        MomentValue::Finite(x) => format!("{:.4}", x * scale),
        MomentValue::Divergent => "inf".into(),
    }
}

fn print_table(r: &SolveReport) {
    let c = &r.capacity;
    let p = &r.capacity_pps;
    println!("scenario class      {}", c.scenario_class);
    println!("{:<19} {:>12} {:>14} {:>10}", "point", "pkt/s", "bit/s", "tau");
    let rows = [
        ("saturation S_s", p.s_s, c.s_s, Some(c.tau_s)),
        ("peak S*", p.s_star, c.s_star, Some(c.tau_star)),
        ("boundary S_BBMD", p.s_bbmd, c.s_bbmd, Some(c.tau_bbmd)),
        ("boundary S_BBDJ", p.s_bbdj, c.s_bbdj, Some(c.tau_bbdj)),
        ("safe S_SBMD", p.s_sbmd, c.s_sbmd, None),
        ("safe S_SBDJ", p.s_sbdj, c.s_sbdj, None),
    ];
    for (name, pps, bps, tau) in rows {
        let tau = tau.map(|t| format!("{t:.6}")).unwrap_or_default();
        println!("{name:<19} {pps:>12.3} {bps:>14.1} {tau:>10}");
    }
    if let (Some(op), Some(d)) = (&r.operating_point, &r.delay) {
        println!("offered load        {:.3} pkt/s at tau {:.6}", r.offered_load_pps, op.tau);
        println!("p_c                 {:.6}", d.p_c);
        println!("rho                 {}", d.rho.value().map(|v| format!("{v:.6}")).unwrap_or("unstable".into()));
        println!("E[Xne] (ms)         {}", show(d.xne_m1, 1e-3));
        println!("E[D] (ms)           {}", show(d.e_d_us, 1e-3));
        println!("sd[D] (ms)          {}", show(d.sd_d_us(), 1e-3));
    }
}

pub fn run(g: &Global, args: &SolveArgs, out: &mut Outputs) -> CliResult<Report> {
    let mut s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    if let Some(load) = args.load_pps {
        s = s.with_offered_load(load)?;
    }
    let capacity = capacity_report(&s)?;
    let load = s.offered_load_pps();
    let (operating_point, delay) = if load > 0.0 {
        let op = operating_point(&s)?.ok_or_else(|| {
            CliError::Infeasible(format!(
                "offered load infeasible: {load:.3} pkt/s has no stable operating point (peak {:.3} pkt/s)",
                capacity.pps(capacity.s_star)
            ))
        })?;
        (Some(op), Some(delay_stats(&s, op.tau)?))
    } else {
        (None, None)
    };
    let report = SolveReport {
        scenario: s,
        capacity_pps: CapacityPps::from(&capacity),
        capacity,
        offered_load_pps: load,
        operating_point,
        delay,
    };
    out.record("solve", &report)?;
    if !g.quiet {
        print_table(&report);
    }
    Ok(Report::default())
}
