use clap::{Args, ValueEnum};
use mprcap::analytic::operating_point;
use mprcap::capacity::{capacity_report, sensitivity_curve};
use mprcap::delay::{delay_stats, MomentValue};
use mprcap::table::{fmt_num, fmt_opt, CsvRow};
use mprcap::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::output::Outputs;
use crate::{grid, scenario, Global, Report};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Aggregate offered load, packets/s.
    Load,
    /// Backoff factor.
    R,
    /// Reception capability.
    M,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// `a,b,c` or `start:stop:count`; may be empty.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
}

/// Delay statistics at one offered load.
#[derive(Debug, Clone, Serialize)]
pub struct LoadRow {
    pub load_pps: f64,
    pub tau: Option<f64>,
    pub p_c: Option<f64>,
    pub rho: Option<f64>,
    pub e_xne_us: Option<MomentValue>,
    pub e_d_us: Option<MomentValue>,
    pub sd_d_us: Option<MomentValue>,
    pub loss_rate: Option<f64>,
    pub error: Option<String>,
}

fn fmt_moment(v: Option<MomentValue>) -> String {
    v.map(|m| fmt_num(m.value())).unwrap_or_default()
}

impl CsvRow for LoadRow {
    fn header() -> &'static [&'static str] {
        &["load_pps", "tau", "p_c", "rho", "e_xne_us", "e_d_us", "sd_d_us", "loss_rate", "error"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.load_pps),
            fmt_opt(self.tau),
            fmt_opt(self.p_c),
            fmt_opt(self.rho),
            fmt_moment(self.e_xne_us),
            fmt_moment(self.e_d_us),
            fmt_moment(self.sd_d_us),
            fmt_opt(self.loss_rate),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn load_row(base: &Scenario, load: f64) -> LoadRow {
    let mut row = LoadRow {
        load_pps: load,
        tau: None,
        p_c: None,
        rho: None,
        e_xne_us: None,
        e_d_us: None,
        sd_d_us: None,
        loss_rate: None,
        error: None,
    };
    let result = base.with_offered_load(load).and_then(|s| {
        let op = operating_point(&s)?;
        op.map(|op| delay_stats(&s, op.tau)).transpose()
    });
    match result {
        Ok(Some(d)) => {
            row.tau = Some(d.tau);
            row.p_c = Some(d.p_c);
            row.rho = d.rho.value();
            row.e_xne_us = Some(d.xne_m1);
            row.e_d_us = Some(d.e_d_us);
            row.sd_d_us = Some(d.sd_d_us());
            row.loss_rate = Some(d.loss_rate);
        }
        Ok(None) => row.error = Some("offered load infeasible".into()),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Capacity figures at one reception capability.
#[derive(Debug, Clone, Serialize)]
pub struct MRow {
    pub m: u32,
    pub scenario_class: Option<u8>,
    pub tau_s: Option<f64>,
    pub s_s_bps: Option<f64>,
    pub s_star_bps: Option<f64>,
    pub s_sbmd_bps: Option<f64>,
    pub s_sbdj_bps: Option<f64>,
    pub error: Option<String>,
}

impl CsvRow for MRow {
    fn header() -> &'static [&'static str] {
        &["m", "scenario_class", "tau_s", "s_s_bps", "s_star_bps", "s_sbmd_bps", "s_sbdj_bps", "error"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.scenario_class.map(|c| c.to_string()).unwrap_or_default(),
            fmt_opt(self.tau_s),
            fmt_opt(self.s_s_bps),
            fmt_opt(self.s_star_bps),
            fmt_opt(self.s_sbmd_bps),
            fmt_opt(self.s_sbdj_bps),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn m_row(base: &Scenario, m: u32) -> MRow {
    match base.with_m(m).and_then(|s| capacity_report(&s)) {
        Ok(c) => MRow {
            m,
            scenario_class: Some(c.scenario_class),
            tau_s: Some(c.tau_s),
            s_s_bps: Some(c.s_s),
            s_star_bps: Some(c.s_star),
            s_sbmd_bps: Some(c.s_sbmd),
            s_sbdj_bps: Some(c.s_sbdj),
            error: None,
        },
        Err(e) => MRow {
            m,
            scenario_class: None,
            tau_s: None,
            s_s_bps: None,
            s_star_bps: None,
            s_sbmd_bps: None,
            s_sbdj_bps: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn run(g: &Global, args: &SweepArgs, out: &mut Outputs) -> CliResult<Report> {
    let s = scenario::load(g.scenario.as_deref(), &g.overrides)?;
    let (stem, errors) = match args.axis {
        Axis::Load => {
            let grid = grid::parse(&args.grid)?;
            let rows: Vec<LoadRow> = grid.par_iter().map(|&l| load_row(&s, l)).collect();
            out.rows("sweep-load", &rows)?;
            ("load", rows.iter().filter(|r| r.error.is_some()).count())
        }
        Axis::R => {
            let rows = sensitivity_curve(&s, &grid::parse(&args.grid)?);
            out.rows("sweep-r", &rows)?;
            ("r", rows.iter().filter(|r| r.error.is_some()).count())
        }
        Axis::M => {
            let grid = grid::parse_counts(&args.grid)?;
            let rows: Vec<MRow> = grid.par_iter().map(|&m| m_row(&s, m)).collect();
            out.rows("sweep-m", &rows)?;
            ("m", rows.iter().filter(|r| r.error.is_some()).count())
        }
    };
    if !g.quiet {
        println!("{stem} sweep done; {errors} row(s) with errors");
    }
    Ok(Report::default())
}
