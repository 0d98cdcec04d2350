//! CSV emission of the analytic curves (comma-delimited, `.` decimals,
//! one header row).

use std::io::Write;
use std::str::FromStr;

use super::pareto::pareto_front;
use super::regularity::{RegularityModel, HOURS_PER_WEEK};
use super::success::{BetaGeometricModel, FirstOrderModel, SuccessModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Zero-order success CDF.
    Fig2,
    /// First-order success CDF with night and day curves.
    Fig3,
    /// Latency-increase pmf under serial delivery.
    Fig4,
    /// Traffic-overhead pmf under serial delivery.
    Fig5,
    /// Latency/traffic Pareto fronts.
    Fig7,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig7,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2.csv",
            Figure::Fig3 => "fig3.csv",
            Figure::Fig4 => "fig4.csv",
            Figure::Fig5 => "fig5.csv",
            Figure::Fig7 => "fig7.csv",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig7" => Ok(Figure::Fig7),
            other => Err(Error::invalid(
                "figure",
                format!("unknown figure `{other}`"),
            )),
        }
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// `k,cdf` for `k = 1..=max_k`.
pub fn write_fig2<W: Write>(out: W, model: &BetaGeometricModel, max_k: u32) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["k", "cdf"])?;
    for k in 1..=max_k {
        w.write_record([k.to_string(), num(model.cdf(k))])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,avg,night,day`; night and day are the hours of highest and lowest
/// regularity.
pub fn write_fig3<W: Write>(out: W, model: &FirstOrderModel, max_k: u32) -> Result<()> {
    let mid = model.regularity().hourly_midpoints();
    let argmax = (0..HOURS_PER_WEEK)
        .max_by(|&a, &b| mid[a].total_cmp(&mid[b]))
        .unwrap_or(0);
    let argmin = (0..HOURS_PER_WEEK)
        .min_by(|&a, &b| mid[a].total_cmp(&mid[b]))
        .unwrap_or(0);
    let night = BetaGeometricModel::new(mid[argmax])?;
    let day = BetaGeometricModel::new(mid[argmin])?;
    let mut w = writer(out);
    w.write_record(["k", "avg", "night", "day"])?;
    for k in 1..=max_k {
        w.write_record([
            k.to_string(),
            num(model.cdf(k)),
            num(night.cdf(k)),
            num(day.cdf(k)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_pmf<W: Write>(out: W, model: &impl SuccessModel, max_k: u32) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["k", "pmf"])?;
    for k in 1..=max_k {
        w.write_record([k.to_string(), num(model.pmf(k))])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,pmf` of the latency factor when locations are tried one by one.
pub fn write_fig4<W: Write>(out: W, model: &FirstOrderModel, max_k: u32) -> Result<()> {
    write_pmf(out, model, max_k)
}

/// `k,pmf` of the traffic factor when locations are tried one by one.
pub fn write_fig5<W: Write>(out: W, model: &FirstOrderModel, max_k: u32) -> Result<()> {
    write_pmf(out, model, max_k)
}

/// `success_rate,latency,traffic,grouping`, one block per entry of `ks`.
pub fn write_fig7<W: Write>(out: W, model: &FirstOrderModel, ks: &[u32]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["success_rate", "latency", "traffic", "grouping"])?;
    for &k in ks {
        let rate = model.cdf(k);
        for p in pareto_front(k, model)? {
            w.write_record([
                num(rate),
                num(p.latency),
                num(p.traffic),
                p.grouping.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `hour,regularity` at each integer hour of the week.
pub fn write_regularity<W: Write>(out: W, model: &RegularityModel) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["hour", "regularity"])?;
    for h in 0..HOURS_PER_WEEK {
        w.write_record([h.to_string(), num(model.at(h as f64)?)])?;
    }
    w.flush()?;
    Ok(())
}
