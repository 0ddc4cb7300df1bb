use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{Chromosome, MiningPlan, Schedule, UnitExtraction};
use crate::block_model::{BlockEconomics, Calendar};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};
use crate::staging::{StageBenchUnit, UnitPrecedence};

pub const SCHEDULE_HEADER: &str =
    "period,unit_stage,unit_bench,fraction,tonnes_mined,tonnes_milled,tonnes_wasted,tonnes_stockpiled,tonnes_reclaimed,cashflow";

/// One row per unit extraction and one per period with reclaim, whose unit
/// fields are empty. Row cash flows of a period add up to its cash flow.
pub fn save_schedule(schedule: &Schedule, units: &[StageBenchUnit], econ: &BlockEconomics, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{SCHEDULE_HEADER}")?;
        for (idx, period) in schedule.periods.iter().enumerate() {
            let t = idx + 1;
            for e in &period.mining {
                let (mut mined, mut milled, mut wasted, mut stocked, mut cash) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for p in period.parcels.iter().filter(|p| p.unit == e.unit) {
                    mined += p.tonnes;
                    milled += p.milled;
                    wasted += p.wasted;
                    stocked += p.stockpiled;
                    cash += p.milled * econ.process_per_tonne[p.block] + (p.wasted + p.stockpiled) * econ.waste_per_tonne;
                }
                let unit = &units[e.unit];
                writeln!(
                    out,
                    "{t},{},{},{},{mined},{milled},{wasted},{stocked},0,{cash}",
                    unit.stage, unit.bench, e.fraction
                )?;
            }
            if !period.reclaims.is_empty() {
                let tonnes: f64 = period.reclaims.iter().map(|r| r.tonnes).sum();
                let cash: f64 = period.reclaims.iter().map(|r| r.tonnes * econ.reclaim_per_tonne(r.block)).sum();
                writeln!(out, "{t},,,,0,0,0,0,{tonnes},{cash}")?;
            }
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Rebuilds the mining plan of a schedule CSV against the given units.
/// Fractions are read back exactly, so replaying the plan reproduces the
/// schedule's tonnages.
pub fn load_mining_plan(path: &Path, units: &[StageBenchUnit], calendar: &Calendar) -> Result<MiningPlan> {
    let table = Table::read_path(path)?;
    let cols: Vec<usize> = ["period", "unit_stage", "unit_bench", "fraction"]
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<_>>()?;
    let lookup: std::collections::BTreeMap<(usize, usize), usize> =
        units.iter().enumerate().map(|(u, unit)| ((unit.stage, unit.bench), u)).collect();
    let mut periods = vec![Vec::new(); calendar.t_max()];
    for row in &table.rows {
        if table.raw(row, cols[1]).is_empty() {
            continue;
        }
        let t = table.usize(row, cols[0])?;
        if t == 0 || t > calendar.t_max() {
            return Err(table.error(row, format!("period {t} outside 1..={}", calendar.t_max())));
        }
        let key = (table.usize(row, cols[1])?, table.usize(row, cols[2])?);
        let unit = *lookup
            .get(&key)
            .ok_or_else(|| table.error(row, format!("no unit for stage {} bench {}", key.0, key.1)))?;
        let fraction = table.f64(row, cols[3])?;
        periods[t - 1].push(UnitExtraction { unit, fraction });
    }
    Ok(MiningPlan { periods })
}

/// One unit id per line.
pub fn save_chromosome(order: &Chromosome, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        for u in &order.0 {
            writeln!(out, "{u}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn load_chromosome(path: &Path, precedence: &UnitPrecedence) -> Result<Chromosome> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut order = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        order.push(
            text.parse::<usize>()
                .map_err(|_| Error::parse(path, n + 1, format!("`{text}` is not a unit id")))?,
        );
    }
    Chromosome::new(order, precedence).map_err(|e| Error::parse(path, 0, e.to_string()))
}

/// `generation,best_npv` per line.
pub fn save_trace(trace: &[f64], path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "generation,best_npv")?;
        for (g, v) in trace.iter().enumerate() {
            writeln!(out, "{g},{v}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
