use super::{Chromosome, Parcel, PeriodSchedule, Reclaim, Schedule};
use crate::block_model::{BlockEconomics, Calendar};
use crate::staging::StageBenchUnit;

/// Fraction of a unit removed in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitExtraction {
    pub unit: usize,
    pub fraction: f64,
}

/// Unit extractions of every period `1..=t_max`, at position `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiningPlan {
    pub periods: Vec<Vec<UnitExtraction>>,
}

/// A unit counts as finished once less than this fraction is left.
const COMPLETE: f64 = 1e-12;

/// Mines units strictly in `order`, each one fractionally as far as the
/// period's mining capacity allows before moving on. A unit never starts
/// before the previous one in the order has started, nor finishes before it.
pub fn mining_plan(order: &Chromosome, units: &[StageBenchUnit], calendar: &Calendar) -> MiningPlan {
    let order = &order.0;
    let mut periods = Vec::with_capacity(calendar.t_max());
    let mut cursor = 0;
    let mut remaining: f64 = 1.0;
    for t in 1..=calendar.t_max() {
        let capacity = calendar.period(t).mining_capacity;
        let mut left = capacity;
        let mut mined = Vec::new();
        while cursor < order.len() {
            let unit = order[cursor];
            let tonnage = units[unit].tonnage;
            let fraction = if tonnage > 0.0 { remaining.min(left / tonnage) } else { remaining };
            // Skip rounding slivers of capacity.
            if fraction <= 0.0 || (fraction < remaining && fraction * tonnage <= capacity * 1e-12) {
                break;
            }
            mined.push(UnitExtraction { unit, fraction });
            left -= fraction * tonnage;
            remaining -= fraction;
            if remaining <= COMPLETE {
                cursor += 1;
                remaining = 1.0;
            } else {
                break;
            }
        }
        periods.push(mined);
    }
    MiningPlan { periods }
}

struct StockpileEntry {
    block: usize,
    mined_in: usize,
    tonnes: f64,
}

/// Sends each period's parcels to mill, stockpile or waste and reclaims
/// stockpiled ore into spare plant capacity.
///
/// Ore (per `econ.is_ore`) is milled highest grade first, ties by block
/// id; ore that does not fit goes to the stockpile when `stockpiling` is
/// set and to waste otherwise. Everything else is waste. Reclaim takes
/// the highest-grade stockpile material first and continues after mining
/// has finished.
pub fn assign_destinations(
    plan: &MiningPlan,
    units: &[StageBenchUnit],
    econ: &BlockEconomics,
    calendar: &Calendar,
    stockpiling: bool,
) -> Schedule {
    let mut stockpile: Vec<StockpileEntry> = Vec::new();
    let mut periods = Vec::with_capacity(plan.periods.len());
    for (idx, mining) in plan.periods.iter().enumerate() {
        let t = idx + 1;
        let plant = calendar.period(t).plant_capacity;
        let mut parcels: Vec<Parcel> = Vec::new();
        for e in mining {
            for &block in &units[e.unit].blocks {
                parcels.push(Parcel {
                    block,
                    unit: e.unit,
                    tonnes: econ.tonnage[block] * e.fraction,
                    milled: 0.0,
                    wasted: 0.0,
                    stockpiled: 0.0,
                });
            }
        }

        let mut ore: Vec<usize> = (0..parcels.len()).filter(|&p| econ.is_ore(parcels[p].block)).collect();
        ore.sort_by(|&a, &b| {
            let (ba, bb) = (parcels[a].block, parcels[b].block);
            econ.grade[bb].total_cmp(&econ.grade[ba]).then(ba.cmp(&bb)).then(a.cmp(&b))
        });
        let mut mill_left = plant;
        let mut is_ore = vec![false; parcels.len()];
        for &p in &ore {
            is_ore[p] = true;
            let parcel = &mut parcels[p];
            let take = parcel.tonnes.min(mill_left);
            parcel.milled = take;
            mill_left -= take;
            let rest = parcel.tonnes - take;
            if rest > 0.0 {
                if stockpiling {
                    parcel.stockpiled = rest;
                    stockpile.push(StockpileEntry {
                        block: parcel.block,
                        mined_in: t,
                        tonnes: rest,
                    });
                } else {
                    parcel.wasted = rest;
                }
            }
        }
        for (p, parcel) in parcels.iter_mut().enumerate() {
            if !is_ore[p] {
                parcel.wasted = parcel.tonnes;
            }
        }

        let mut reclaims = Vec::new();
        if mill_left > 0.0 && !stockpile.is_empty() {
            stockpile.sort_by(|a, b| {
                econ.grade[b.block]
                    .total_cmp(&econ.grade[a.block])
                    .then(a.block.cmp(&b.block))
                    .then(a.mined_in.cmp(&b.mined_in))
            });
            for entry in stockpile.iter_mut() {
                if mill_left <= 0.0 {
                    break;
                }
                let take = entry.tonnes.min(mill_left);
                entry.tonnes -= take;
                mill_left -= take;
                reclaims.push(Reclaim {
                    block: entry.block,
                    mined_in: entry.mined_in,
                    tonnes: take,
                    grade: econ.grade[entry.block],
                });
            }
            stockpile.retain(|e| e.tonnes > 0.0);
        }

        let mut cashflow = 0.0;
        for p in &parcels {
            cashflow += p.milled * econ.process_per_tonne[p.block] + (p.wasted + p.stockpiled) * econ.waste_per_tonne;
        }
        for r in &reclaims {
            cashflow += r.tonnes * econ.reclaim_per_tonne(r.block);
        }
        let stockpile_tonnes: f64 = stockpile.iter().map(|e| e.tonnes).sum();
        let stockpile_grade = if stockpile_tonnes > 0.0 {
            stockpile.iter().map(|e| e.tonnes * econ.grade[e.block]).sum::<f64>() / stockpile_tonnes
        } else {
            0.0
        };
        periods.push(PeriodSchedule {
            mining: mining.clone(),
            parcels,
            reclaims,
            stockpile_tonnes,
            stockpile_grade,
            cashflow,
        });
    }
    Schedule { periods, stockpiling }
}

/// Mining plan from the order, then destinations from `econ`.
pub fn decode(
    order: &Chromosome,
    units: &[StageBenchUnit],
    econ: &BlockEconomics,
    calendar: &Calendar,
    stockpiling: bool,
) -> Schedule {
    assign_destinations(&mining_plan(order, units, calendar), units, econ, calendar, stockpiling)
}
