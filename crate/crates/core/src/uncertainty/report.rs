use std::io::Write;
use std::path::Path;

use super::{PeriodStats, RemainingNpv, ReplayResult, Summary};
use crate::csvio;
use crate::error::{Error, Result};

/// Integral values without a decimal point, others in shortest form.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

/// Dollar amount scaled to B, M or K with at most three decimals,
/// trailing zeros dropped: `$1.585B`, `$1.84B`, `-$12.5M`.
pub fn format_money(v: f64) -> String {
    let (scale, suffix) = match v.abs() {
        a if a >= 1e9 => (1e9, "B"),
        a if a >= 1e6 => (1e6, "M"),
        a if a >= 1e3 => (1e3, "K"),
        _ => (1.0, ""),
    };
    let text = format!("{:.3}", v.abs() / scale);
    let text = text.trim_end_matches('0').trim_end_matches('.');
    let sign = if v < 0.0 && text != "0" { "-" } else { "" };
    format!("{sign}${text}{suffix}")
}

pub fn summary_statement(summary: &Summary) -> String {
    format!(
        "average NPV of {}, total profit range of {}",
        format_money(summary.average_npv),
        format_money(summary.total_profit_range)
    )
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut out = csvio::create(path)?;
    body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

/// Writes `profit_by_member.csv`, `period_stats.csv`, `remaining_npv.csv`,
/// `remaining_npv_quantiles.csv` and `summary.txt` into `dir`. The
/// aggregate's series is listed under member `aggregate`; statistics cover
/// the ensemble members only.
pub fn write_reports(
    dir: &Path,
    aggregate: &[f64],
    result: &ReplayResult,
    stats: &[PeriodStats],
    remaining: &RemainingNpv,
    summary: &Summary,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let aggregate_rnpv = super::remaining_series(aggregate, result.discount_rate);

    write_file(&dir.join("profit_by_member.csv"), |out| {
        writeln!(out, "period,member,cashflow")?;
        for t in 0..result.t_max() {
            writeln!(out, "{},aggregate,{}", t + 1, format_number(aggregate[t]))?;
            for (m, cf) in result.cashflows.iter().enumerate() {
                writeln!(out, "{},{m},{}", t + 1, format_number(cf[t]))?;
            }
        }
        Ok(())
    })?;

    write_file(&dir.join("period_stats.csv"), |out| {
        writeln!(out, "period,max,min,mean,std")?;
        for s in stats {
            writeln!(
                out,
                "{},{},{},{},{:?}",
                s.period,
                format_number(s.max),
                format_number(s.min),
                format_number(s.mean),
                s.std
            )?;
        }
        Ok(())
    })?;

    write_file(&dir.join("remaining_npv.csv"), |out| {
        writeln!(out, "period,member,rnpv")?;
        for t in 0..result.t_max() {
            writeln!(out, "{},aggregate,{}", t + 1, format_number(aggregate_rnpv[t]))?;
            for (m, r) in remaining.values.iter().enumerate() {
                writeln!(out, "{},{m},{}", t + 1, format_number(r[t]))?;
            }
        }
        Ok(())
    })?;

    write_file(&dir.join("remaining_npv_quantiles.csv"), |out| {
        writeln!(out, "period,min,q1,median,q3,max")?;
        for q in &remaining.quantiles {
            let cells: Vec<String> = [q.min, q.q1, q.median, q.q3, q.max].iter().map(|v| format_number(*v)).collect();
            writeln!(out, "{},{}", q.period, cells.join(","))?;
        }
        Ok(())
    })?;

    write_file(&dir.join("summary.txt"), |out| {
        writeln!(out, "average_npv={}", summary.average_npv)?;
        writeln!(out, "total_profit_range={}", summary.total_profit_range)?;
        writeln!(out, "min_total_profit={}", summary.min_total_profit)?;
        writeln!(out, "max_total_profit={}", summary.max_total_profit)?;
        writeln!(out, "aggregate_npv={}", crate::scheduler::npv(aggregate, result.discount_rate))?;
        writeln!(out, "members={}", result.n_members())?;
        writeln!(out, "statement={}", summary_statement(summary))
    })
}
