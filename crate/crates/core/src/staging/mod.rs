//! Partitions of the ultimate pit into sequential stages, and the
//! stage/bench units the scheduler orders.

mod io;
mod strategies;
mod units;

pub use io::{load_staging, save_staging};
pub use strategies::{
    lazy_staging, levelled_staging, shell_uncertainty_mass, worst_case_staging, StagingStrategy,
    DEFAULT_STAGES, DEFAULT_STD_THRESHOLD,
};
pub use units::{build_units, StageBenchUnit, UnitPrecedence};

use crate::block_model::{BlockIndex, BlockModel};
use crate::error::{Error, Result};

/// Stage number `1..=k` per block, 0 for blocks outside the pit.
#[derive(Debug, Clone, PartialEq)]
pub struct Staging {
    pub stage: Vec<usize>,
    pub k: usize,
    /// Set when a strategy could not apply its rule and staged lazily instead.
    pub fallback: bool,
}

impl Staging {
    /// Checks that stages `1..=k` are all used and nothing exceeds `k`.
    pub fn new(stage: Vec<usize>, k: usize) -> Result<Self> {
        let staging = Staging {
            stage,
            k,
            fallback: false,
        };
        staging.validate()?;
        Ok(staging)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Staging("at least one stage is required".to_string()));
        }
        let mut used = vec![false; self.k + 1];
        for &s in &self.stage {
            if s > self.k {
                return Err(Error::Staging(format!("stage {s} exceeds k = {}", self.k)));
            }
            used[s] = true;
        }
        if let Some(s) = (1..=self.k).find(|&s| !used[s]) {
            return Err(Error::Staging(format!("stage {s} is empty")));
        }
        Ok(())
    }

    pub fn in_pit(&self, block: usize) -> bool {
        self.stage[block] > 0
    }

    pub fn blocks_in(&self, s: usize) -> Vec<usize> {
        (0..self.stage.len()).filter(|&b| self.stage[b] == s).collect()
    }

    /// Tonnage of stages `1..=k` at position `s - 1`.
    pub fn stage_tonnages(&self, model: &BlockModel) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (b, &s) in self.stage.iter().enumerate() {
            if s > 0 {
                out[s - 1] += model.blocks[b].tonnage;
            }
        }
        out
    }

    /// The staged blocks are exactly `pit`; names the first offending block.
    pub fn check_covers(&self, pit: &[bool], dims: crate::block_model::Dims) -> Result<()> {
        if pit.len() != self.stage.len() {
            return Err(Error::Staging("pit mask size differs from the staging".to_string()));
        }
        for (b, &inside) in pit.iter().enumerate() {
            let index: BlockIndex = dims.index_of(b);
            match (inside, self.in_pit(b)) {
                (true, false) => return Err(Error::Staging(format!("pit block {index} has no stage"))),
                (false, true) => return Err(Error::Staging(format!("block {index} is staged but outside the pit"))),
                _ => {}
            }
        }
        Ok(())
    }
}
