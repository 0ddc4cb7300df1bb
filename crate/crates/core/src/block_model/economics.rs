use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{Block, BlockModel};

/// Where a mined parcel of material is sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Destination {
    Process,
    Waste,
}

/// Price, unit costs, cut-off, recoveries and discount rate.
///
/// Costs are per tonne. Mining and rehabilitation apply to every tonne
/// mined; processing and selling apply only to tonnes processed.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomicModel {
    pub price_per_tonne_metal: f64,
    pub mining_cost: f64,
    pub processing_cost: f64,
    pub selling_cost: f64,
    pub rehab_cost: f64,
    pub cutoff_grade: f64,
    pub recovery_by_domain: BTreeMap<u32, f64>,
    pub discount_rate: f64,
}

impl EconomicModel {
    /// Copper economics with the given per-domain recoveries and discount rate.
    pub fn copper(recovery_by_domain: BTreeMap<u32, f64>, discount_rate: f64) -> Self {
        EconomicModel {
            price_per_tonne_metal: 7673.0,
            mining_cost: 4.20,
            processing_cost: 15.0,
            selling_cost: 1.0,
            rehab_cost: 1.0,
            cutoff_grade: 0.0025,
            recovery_by_domain,
            discount_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let costs = [
            ("price_per_tonne_metal", self.price_per_tonne_metal),
            ("mining_cost", self.mining_cost),
            ("processing_cost", self.processing_cost),
            ("selling_cost", self.selling_cost),
            ("rehab_cost", self.rehab_cost),
            ("discount_rate", self.discount_rate),
        ];
        for (name, value) in costs {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Invalid(format!("{name} = {value} must be finite and >= 0")));
            }
        }
        if !(self.cutoff_grade.is_finite() && (0.0..1.0).contains(&self.cutoff_grade)) {
            return Err(Error::Invalid(format!("cutoff_grade = {} outside [0, 1)", self.cutoff_grade)));
        }
        if self.recovery_by_domain.is_empty() {
            return Err(Error::Invalid("no domain recoveries given".to_string()));
        }
        for (domain, rec) in &self.recovery_by_domain {
            if !(rec.is_finite() && *rec > 0.0 && *rec <= 1.0) {
                return Err(Error::Invalid(format!("recovery of domain {domain} = {rec} outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn recovery(&self, domain: u32) -> Option<f64> {
        self.recovery_by_domain.get(&domain).copied()
    }

    /// Cost of every tonne mined, whatever its destination.
    pub fn mined_cost_per_tonne(&self) -> f64 {
        self.mining_cost + self.rehab_cost
    }

    pub fn waste_value_per_tonne(&self) -> f64 {
        -self.mined_cost_per_tonne()
    }

    /// Net value of processing one tonne, mining-side costs included.
    pub fn process_value_per_tonne(&self, grade: f64, recovery: f64, price_factor: f64) -> f64 {
        grade * recovery * self.price_per_tonne_metal * price_factor
            - (self.mined_cost_per_tonne() + self.processing_cost + self.selling_cost)
    }

    pub fn discount_factor(&self, period: usize) -> f64 {
        (1.0 + self.discount_rate).powi(-(period as i32 - 1))
    }
}

/// Undiscounted value of sending a whole block to `destination`.
pub fn block_value(block: &Block, econ: &EconomicModel, destination: Destination) -> Result<f64> {
    let recovery = econ.recovery(block.domain).ok_or(Error::UnknownDomain {
        index: block.index,
        domain: block.domain,
    })?;
    let per_tonne = match destination {
        Destination::Waste => econ.waste_value_per_tonne(),
        Destination::Process => econ.process_value_per_tonne(block.grade, recovery, 1.0),
    };
    Ok(block.tonnage * per_tonne)
}

/// Per-tonne values of every block of a model, resolved once.
#[derive(Debug, Clone)]
pub struct BlockEconomics {
    pub tonnage: Vec<f64>,
    pub grade: Vec<f64>,
    pub domain: Vec<u32>,
    pub process_per_tonne: Vec<f64>,
    pub waste_per_tonne: f64,
    pub cutoff_grade: f64,
}

impl BlockEconomics {
    pub fn new(model: &BlockModel, econ: &EconomicModel) -> Result<Self> {
        Self::with_price_factor(model, econ, 1.0)
    }

    pub fn with_price_factor(model: &BlockModel, econ: &EconomicModel, price_factor: f64) -> Result<Self> {
        let mut process_per_tonne = Vec::with_capacity(model.len());
        for block in &model.blocks {
            let recovery = econ.recovery(block.domain).ok_or(Error::UnknownDomain {
                index: block.index,
                domain: block.domain,
            })?;
            process_per_tonne.push(econ.process_value_per_tonne(block.grade, recovery, price_factor));
        }
        Ok(BlockEconomics {
            tonnage: model.blocks.iter().map(|b| b.tonnage).collect(),
            grade: model.blocks.iter().map(|b| b.grade).collect(),
            domain: model.blocks.iter().map(|b| b.domain).collect(),
            process_per_tonne,
            waste_per_tonne: econ.waste_value_per_tonne(),
            cutoff_grade: econ.cutoff_grade,
        })
    }

    pub fn len(&self) -> usize {
        self.tonnage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tonnage.is_empty()
    }

    /// Mill candidate: at or above cut-off and worth more processed than wasted.
    pub fn is_ore(&self, block: usize) -> bool {
        self.grade[block] >= self.cutoff_grade && self.process_per_tonne[block] > self.waste_per_tonne
    }

    /// Value of the block under its better destination.
    pub fn best_value(&self, block: usize) -> f64 {
        let per_tonne = if self.is_ore(block) {
            self.process_per_tonne[block]
        } else {
            self.waste_per_tonne
        };
        per_tonne * self.tonnage[block]
    }

    /// Revenue less processing-side costs of one tonne reclaimed from stockpile.
    pub fn reclaim_per_tonne(&self, block: usize) -> f64 {
        self.process_per_tonne[block] - self.waste_per_tonne
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodCapacity {
    /// Maximum tonnes mined.
    pub mining_capacity: f64,
    /// Maximum tonnes milled, fresh and reclaimed together.
    pub plant_capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calendar {
    pub periods: Vec<PeriodCapacity>,
}

impl Calendar {
    pub fn new(periods: Vec<PeriodCapacity>) -> Result<Self> {
        let calendar = Calendar { periods };
        calendar.validate()?;
        Ok(calendar)
    }

    /// Constant mining capacity; plant capacity steps up from `step_period` (1-based).
    pub fn stepped(
        t_max: usize,
        mining_capacity: f64,
        plant_before: f64,
        plant_after: f64,
        step_period: usize,
    ) -> Result<Self> {
        let periods = (1..=t_max)
            .map(|t| PeriodCapacity {
                mining_capacity,
                plant_capacity: if t < step_period { plant_before } else { plant_after },
            })
            .collect();
        Calendar::new(periods)
    }

    pub fn validate(&self) -> Result<()> {
        if self.periods.is_empty() {
            return Err(Error::Invalid("calendar needs at least one period".to_string()));
        }
        for (t, p) in self.periods.iter().enumerate() {
            if !(p.mining_capacity.is_finite() && p.mining_capacity >= 0.0) {
                return Err(Error::Invalid(format!("period {} mining capacity {} < 0", t + 1, p.mining_capacity)));
            }
            if !(p.plant_capacity.is_finite() && p.plant_capacity >= 0.0) {
                return Err(Error::Invalid(format!("period {} plant capacity {} < 0", t + 1, p.plant_capacity)));
            }
        }
        Ok(())
    }

    pub fn t_max(&self) -> usize {
        self.periods.len()
    }

    /// Capacities of 1-based period `t`.
    pub fn period(&self, t: usize) -> PeriodCapacity {
        self.periods[t - 1]
    }
}
