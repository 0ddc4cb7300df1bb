//! Stage/bench extraction sequencing: a validity-preserving decoder from
//! unit orders to period schedules, a constraint validator, an
//! evolutionary search over orders and an exhaustive oracle for small
//! instances.

mod decode;
mod evolve;
mod io;
mod oracle;
mod validate;

pub use decode::{assign_destinations, decode, mining_plan, MiningPlan, UnitExtraction};
pub use evolve::{crossover, evolve, mutate, random_order, repair, EaConfig, Evolution};
pub use io::{load_chromosome, load_mining_plan, save_chromosome, save_schedule, save_trace};
pub use oracle::{brute_force_best, count_orders, BRUTE_FORCE_LIMIT};
pub use validate::{validate, Constraint, Violation};

use crate::block_model::{BlockEconomics, BlockModel, Calendar, EconomicModel, PrecedenceGraph};
use crate::error::{Error, Result};
use crate::staging::{build_units, StageBenchUnit, Staging, UnitPrecedence};

/// A priority order over unit ids that respects unit precedence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome(pub Vec<usize>);

impl Chromosome {
    pub fn new(order: Vec<usize>, precedence: &UnitPrecedence) -> Result<Self> {
        if !precedence.is_topological(&order) {
            return Err(Error::Invalid(format!(
                "unit order {order:?} is not a precedence-respecting permutation of {} units",
                precedence.n_units
            )));
        }
        Ok(Chromosome(order))
    }
}

/// Tonnes of one block mined in one period, and where they went.
#[derive(Debug, Clone, PartialEq)]
pub struct Parcel {
    pub block: usize,
    pub unit: usize,
    pub tonnes: f64,
    pub milled: f64,
    pub wasted: f64,
    pub stockpiled: f64,
}

/// Tonnes taken back from the stockpile to the mill.
#[derive(Debug, Clone, PartialEq)]
pub struct Reclaim {
    pub block: usize,
    /// Period in which the material was mined.
    pub mined_in: usize,
    pub tonnes: f64,
    pub grade: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSchedule {
    pub mining: Vec<UnitExtraction>,
    pub parcels: Vec<Parcel>,
    pub reclaims: Vec<Reclaim>,
    /// Stockpile tonnes and tonnage-weighted grade at period end.
    pub stockpile_tonnes: f64,
    pub stockpile_grade: f64,
    pub cashflow: f64,
}

impl PeriodSchedule {
    pub fn tonnes_mined(&self) -> f64 {
        self.parcels.iter().map(|p| p.tonnes).sum()
    }

    pub fn tonnes_milled(&self) -> f64 {
        self.parcels.iter().map(|p| p.milled).sum::<f64>() + self.reclaims.iter().map(|r| r.tonnes).sum::<f64>()
    }
}

/// Period-by-period extraction, destinations and undiscounted cash flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub periods: Vec<PeriodSchedule>,
    pub stockpiling: bool,
}

impl Schedule {
    pub fn cashflows(&self) -> Vec<f64> {
        self.periods.iter().map(|p| p.cashflow).collect()
    }

    pub fn plan(&self) -> MiningPlan {
        MiningPlan {
            periods: self.periods.iter().map(|p| p.mining.clone()).collect(),
        }
    }
}

/// Discounted sum with the first period undiscounted.
pub fn npv(cashflows: &[f64], discount_rate: f64) -> f64 {
    let mut factor = 1.0;
    let mut total = 0.0;
    for cf in cashflows {
        total += cf * factor;
        factor /= 1.0 + discount_rate;
    }
    total
}

/// Everything the decoder needs besides the order.
#[derive(Debug, Clone)]
pub struct SchedulingProblem {
    pub units: Vec<StageBenchUnit>,
    pub precedence: UnitPrecedence,
    pub economics: BlockEconomics,
    pub calendar: Calendar,
    pub discount_rate: f64,
    pub stockpiling: bool,
}

impl SchedulingProblem {
    pub fn new(
        model: &BlockModel,
        staging: &Staging,
        block_precedence: &PrecedenceGraph,
        calendar: &Calendar,
        econ: &EconomicModel,
        stockpiling: bool,
    ) -> Result<Self> {
        let (units, precedence) = build_units(model, staging, block_precedence)?;
        Self::from_units(units, precedence, BlockEconomics::new(model, econ)?, calendar.clone(), econ.discount_rate, stockpiling)
    }

    pub fn from_units(
        units: Vec<StageBenchUnit>,
        precedence: UnitPrecedence,
        economics: BlockEconomics,
        calendar: Calendar,
        discount_rate: f64,
        stockpiling: bool,
    ) -> Result<Self> {
        if precedence.n_units != units.len() {
            return Err(Error::Invalid("unit precedence and unit list differ in size".to_string()));
        }
        if units.iter().flat_map(|u| &u.blocks).any(|&b| b >= economics.len()) {
            return Err(Error::Invalid("unit refers to a block outside the model".to_string()));
        }
        calendar.validate()?;
        if !(discount_rate.is_finite() && discount_rate > -1.0) {
            return Err(Error::Invalid(format!("discount rate {discount_rate} must exceed -1")));
        }
        Ok(SchedulingProblem {
            units,
            precedence,
            economics,
            calendar,
            discount_rate,
            stockpiling,
        })
    }

    pub fn decode(&self, order: &Chromosome) -> Schedule {
        decode(order, &self.units, &self.economics, &self.calendar, self.stockpiling)
    }

    pub fn npv(&self, schedule: &Schedule) -> f64 {
        npv(&schedule.cashflows(), self.discount_rate)
    }

    pub fn fitness(&self, order: &Chromosome) -> f64 {
        self.npv(&self.decode(order))
    }
}
