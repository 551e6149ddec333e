use clap::{Args, ValueEnum};
use mprcap::capacity::{optimize_r_in, scaling_sweep_in, Objective, OptimizeMode, OptimizeResult, RSearch};
use mprcap::table::{fmt_num, CsvRow};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::output::Outputs;
use crate::{grid, scenario, Global, Report};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    /// Bounded mean delay.
    MeanDelay,
    /// Bounded delay variance.
    Jitter,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    /// Asymptotic saturation condition `p_c = 1/r`.
    LargeN,
    /// Full fixed point.
    Exact,
}

impl From<ModeArg> for OptimizeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::LargeN => OptimizeMode::LargeN,
            ModeArg::Exact => OptimizeMode::Exact,
        }
    }
}

/// Search interval for the backoff factor.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1.001)]
    pub r_min: f64,
    #[arg(long, default_value_t = 16.0)]
    pub r_max: f64,
    /// Points of the grid that seeds the bracket.
    #[arg(long, default_value_t = 256)]
    pub r_grid: usize,
}

impl SearchArgs {
    fn search(&self) -> RSearch {
        RSearch {
            lo: self.r_min,
            hi: self.r_max,
            grid: self.r_grid,
            ..RSearch::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MeanDelay)]
    pub objective: ObjectiveArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScalingArgs {
    /// Reception capabilities, `a,b,c` or `start:stop:count`, ascending.
    #[arg(long, default_value = "1:8:8")]
    pub m_values: String,
    #[arg(long, value_enum, default_value_t = ModeArg::LargeN)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Serialize)]
struct OptimizeRow {
    #[serde(flatten)]
    result: OptimizeResult,
    s_safe_pps: f64,
}

impl CsvRow for OptimizeRow {
    fn header() -> &'static [&'static str] {
        &["objective", "mode", "r_star", "s_safe_bps", "s_safe_pps", "s_boundary_bps", "s_s_bps", "at_search_limit"]
    }

    fn fields(&self) -> Vec<String> {
        let r = &self.result;
        let objective = match r.objective {
            Objective::MeanDelay => "mean-delay",
            Objective::Jitter => "jitter",
        };
        let mode = match r.mode {
            OptimizeMode::LargeN => "large-n",
            OptimizeMode::Exact => "exact",
        };
        vec![
            objective.into(),
            mode.into(),
            fmt_num(r.r_star),
            fmt_num(r.s_safe),
            fmt_num(self.s_safe_pps),
            fmt_num(r.s_boundary),
            fmt_num(r.s_s),
            r.at_search_limit.to_string(),
        ]
    }
}

pub fn run_optimize(g: &Global, args: &OptimizeArgs, out: &mut Outputs) -> CliResult<Report> {
    let s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    let objective = match args.objective {
        ObjectiveArg::MeanDelay => Objective::MeanDelay,
        ObjectiveArg::Jitter => Objective::Jitter,
    };
    let result = optimize_r_in(&s, objective, args.mode.into(), &args.search.search())?;
    let row = OptimizeRow {
        s_safe_pps: result.s_safe / s.payload_bits,
        result,
    };
    out.rows("optimize-r", std::slice::from_ref(&row))?;
    if !g.quiet {
        println!(
            "r* = {:.6}, safe throughput {:.3} pkt/s{}",
            result.r_star,
            row.s_safe_pps,
            if result.at_search_limit { " (at the search limit)" } else { "" }
        );
    }
    Ok(Report::default())
}

pub fn run_scaling(g: &Global, args: &ScalingArgs, out: &mut Outputs) -> CliResult<Report> {
    let s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    let ms = grid::parse_counts(&args.m_values)?;
    let rows = scaling_sweep_in(&s, &ms, args.mode.into(), &args.search.search())?;
    out.rows("scaling", &rows)?;
    if !g.quiet {
        println!("{:>4} {:>10} {:>14} {:>10} {:>14}", "M", "r_SBMD", "SBMD/M pkt/s", "r_SBDJ", "SBDJ/M pkt/s");
        for r in &rows {
            println!(
                "{:>4} {:>10.4} {:>14.3} {:>10.4} {:>14.3}",
                r.m,
                r.r_sbmd,
                r.s_sbmd_per_m / s.payload_bits,
                r.r_sbdj,
                r.s_sbdj_per_m / s.payload_bits
            );
        }
    }
    Ok(Report::default())
}
