//! Replays a fixed extraction sequence on every ensemble member and
//! summarises the spread of the resulting cash flows.

mod report;

pub use report::{format_money, format_number, summary_statement, write_reports};

use rayon::prelude::*;

use crate::block_model::{BlockEconomics, BlockModel, EconomicModel};
use crate::error::{Error, Result};
use crate::scheduler::{assign_destinations, npv, MiningPlan, Schedule, SchedulingProblem};
use crate::stats;

/// Re-runs the destination rule on `member` for the plan's fixed unit
/// fractions. Tonnages, grades and domains all come from the member.
pub fn replay(plan: &MiningPlan, problem: &SchedulingProblem, member: &BlockModel, econ: &EconomicModel) -> Result<Schedule> {
    if member.len() != problem.economics.len() {
        return Err(Error::Geometry(format!(
            "member has {} blocks, the scheduled model {}",
            member.len(),
            problem.economics.len()
        )));
    }
    if plan.periods.len() != problem.calendar.t_max() {
        return Err(Error::Invalid(format!(
            "plan covers {} periods, calendar {}",
            plan.periods.len(),
            problem.calendar.t_max()
        )));
    }
    if let Some(e) = plan.periods.iter().flatten().find(|e| e.unit >= problem.units.len()) {
        return Err(Error::Invalid(format!("plan refers to unknown unit {}", e.unit)));
    }
    let be = BlockEconomics::new(member, econ)?;
    Ok(assign_destinations(plan, &problem.units, &be, &problem.calendar, problem.stockpiling))
}

/// Per-period cash flows of every member, all of length `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayResult {
    pub cashflows: Vec<Vec<f64>>,
    pub discount_rate: f64,
}

impl ReplayResult {
    pub fn new(cashflows: Vec<Vec<f64>>, discount_rate: f64) -> Result<Self> {
        let t_max = cashflows.first().map_or(0, Vec::len);
        if cashflows.is_empty() || cashflows.iter().any(|c| c.len() != t_max) {
            return Err(Error::Invalid("replay needs at least one member and equal-length series".to_string()));
        }
        Ok(ReplayResult {
            cashflows,
            discount_rate,
        })
    }

    pub fn n_members(&self) -> usize {
        self.cashflows.len()
    }

    pub fn t_max(&self) -> usize {
        self.cashflows[0].len()
    }

    /// Undiscounted sum of a member's cash flows.
    pub fn total_profit(&self, member: usize) -> f64 {
        self.cashflows[member].iter().sum()
    }

    pub fn npv(&self, member: usize) -> f64 {
        npv(&self.cashflows[member], self.discount_rate)
    }

    fn period_values(&self, t: usize) -> Vec<f64> {
        self.cashflows.iter().map(|c| c[t]).collect()
    }
}

/// Replays the plan on every member in parallel; results keep member order.
pub fn replay_ensemble(
    plan: &MiningPlan,
    problem: &SchedulingProblem,
    members: &[BlockModel],
    econ: &EconomicModel,
) -> Result<ReplayResult> {
    let cashflows = members
        .par_iter()
        .map(|m| replay(plan, problem, m, econ).map(|s| s.cashflows()))
        .collect::<Result<Vec<_>>>()?;
    ReplayResult::new(cashflows, econ.discount_rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodStats {
    pub period: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub std: f64,
}

/// Population statistics of profit across members, per period.
pub fn period_stats(result: &ReplayResult) -> Vec<PeriodStats> {
    (0..result.t_max())
        .map(|t| {
            let v = result.period_values(t);
            let (min, max) = (stats::min(&v), stats::max(&v));
            PeriodStats {
                period: t + 1,
                max,
                min,
                mean: stats::mean(&v).clamp(min, max),
                std: stats::population_std(&v),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub period: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Remaining NPV of every member at every period and its spread.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainingNpv {
    /// `values[member][t - 1]`: discounted value of periods `t..` seen from `t`.
    pub values: Vec<Vec<f64>>,
    pub quantiles: Vec<Quantiles>,
}

/// Backward recurrence `r(t) = cf(t) + r(t + 1) / (1 + d)`.
pub fn remaining_series(cashflows: &[f64], discount_rate: f64) -> Vec<f64> {
    let mut out = vec![0.0; cashflows.len()];
    let mut next = 0.0;
    for t in (0..cashflows.len()).rev() {
        next = cashflows[t] + next / (1.0 + discount_rate);
        out[t] = next;
    }
    out
}

pub fn remaining_npv(result: &ReplayResult, discount_rate: f64) -> RemainingNpv {
    let values: Vec<Vec<f64>> = result
        .cashflows
        .iter()
        .map(|c| remaining_series(c, discount_rate))
        .collect();
    let quantiles = (0..result.t_max())
        .map(|t| {
            let mut v: Vec<f64> = values.iter().map(|r| r[t]).collect();
            v.sort_by(f64::total_cmp);
            Quantiles {
                period: t + 1,
                min: v[0],
                q1: stats::quantile_sorted(&v, 0.25),
                median: stats::quantile_sorted(&v, 0.5),
                q3: stats::quantile_sorted(&v, 0.75),
                max: v[v.len() - 1],
            }
        })
        .collect();
    RemainingNpv { values, quantiles }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub average_npv: f64,
    pub min_total_profit: f64,
    pub max_total_profit: f64,
    /// Highest minus lowest member total profit.
    pub total_profit_range: f64,
}

pub fn summary(result: &ReplayResult) -> Summary {
    let npvs: Vec<f64> = (0..result.n_members()).map(|m| result.npv(m)).collect();
    let totals: Vec<f64> = (0..result.n_members()).map(|m| result.total_profit(m)).collect();
    let (min, max) = (stats::min(&totals), stats::max(&totals));
    Summary {
        average_npv: stats::mean(&npvs),
        min_total_profit: min,
        max_total_profit: max,
        total_profit_range: max - min,
    }
}
