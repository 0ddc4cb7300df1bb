//! Regular 3-D block models, drill samples, economics and slope precedence.
//!
//! Blocks are stored densely with `i` varying fastest, then `j`, then `k`.
//! Level `k = 0` is the top bench; world `z` decreases with `k`.

mod economics;
mod io;
mod precedence;
mod synthetic;

use std::fmt;

pub use economics::{block_value, BlockEconomics, Calendar, Destination, EconomicModel, PeriodCapacity};
pub use io::{
    load_block_model, load_calendar, load_economics, load_samples, read_block_model,
    save_block_model, save_calendar, save_economics, save_samples, write_block_model,
};
pub use precedence::{derive_precedence, PrecedenceGraph, SlopePattern};
pub use synthetic::{generate_synthetic_deposit, SyntheticConfig, SyntheticDeposit};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl BlockIndex {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        BlockIndex { i, j, k }
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Dims { nx, ny, nz }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: BlockIndex) -> bool {
        index.i < self.nx && index.j < self.ny && index.k < self.nz
    }

    pub fn linear(&self, index: BlockIndex) -> usize {
        index.i + self.nx * (index.j + self.ny * index.k)
    }

    pub fn index_of(&self, id: usize) -> BlockIndex {
        let i = id % self.nx;
        let j = (id / self.nx) % self.ny;
        let k = id / (self.nx * self.ny);
        BlockIndex { i, j, k }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub index: BlockIndex,
    /// Tonnes.
    pub tonnage: f64,
    /// Mass fraction of metal, e.g. 0.01 for 1 %.
    pub grade: f64,
    pub domain: u32,
}

impl Block {
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.tonnage.is_finite() && self.tonnage > 0.0) {
            return Err(format!("block {} tonnage {} must be positive", self.index, self.tonnage));
        }
        if !(self.grade.is_finite() && (0.0..=1.0).contains(&self.grade)) {
            return Err(format!("block {} grade {} outside [0, 1]", self.index, self.grade));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    pub dims: Dims,
    /// Block edge lengths in metres along x, y, z.
    pub block_size: [f64; 3],
    /// World coordinates of the top-left-upper corner of block (0, 0, 0).
    pub origin: [f64; 3],
    pub blocks: Vec<Block>,
    pub element_name: String,
}

impl BlockModel {
    /// Builds a model with uniform tonnage, zero grade and domain 0.
    pub fn uniform(dims: Dims, block_size: [f64; 3], origin: [f64; 3], tonnage: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Invalid(format!("block model dims {dims} must be positive")));
        }
        let blocks = (0..dims.len())
            .map(|id| Block {
                index: dims.index_of(id),
                tonnage,
                grade: 0.0,
                domain: 0,
            })
            .collect();
        let model = BlockModel {
            dims,
            block_size,
            origin,
            blocks,
            element_name: "Cu".to_string(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Invalid(format!("block model dims {} must be positive", self.dims)));
        }
        if self.blocks.len() != self.dims.len() {
            return Err(Error::Invalid(format!(
                "block model has {} blocks, dims {} require {}",
                self.blocks.len(),
                self.dims,
                self.dims.len()
            )));
        }
        if self.block_size.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Invalid(format!("block size {:?} must be positive", self.block_size)));
        }
        for (id, block) in self.blocks.iter().enumerate() {
            if self.dims.index_of(id) != block.index {
                return Err(Error::Invalid(format!("block {} stored at position {id}", block.index)));
            }
            block.check().map_err(Error::Invalid)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, index: BlockIndex) -> &Block {
        &self.blocks[self.dims.linear(index)]
    }

    pub fn centroid(&self, id: usize) -> [f64; 3] {
        let idx = self.dims.index_of(id);
        [
            self.origin[0] + (idx.i as f64 + 0.5) * self.block_size[0],
            self.origin[1] + (idx.j as f64 + 0.5) * self.block_size[1],
            self.origin[2] - (idx.k as f64 + 0.5) * self.block_size[2],
        ]
    }

    /// Linear id of the block containing a world point, if inside the model.
    pub fn locate(&self, point: [f64; 3]) -> Option<usize> {
        let fx = (point[0] - self.origin[0]) / self.block_size[0];
        let fy = (point[1] - self.origin[1]) / self.block_size[1];
        let fz = (self.origin[2] - point[2]) / self.block_size[2];
        if fx < 0.0 || fy < 0.0 || fz < 0.0 {
            return None;
        }
        let index = BlockIndex::new(fx.floor() as usize, fy.floor() as usize, fz.floor() as usize);
        self.dims.contains(index).then(|| self.dims.linear(index))
    }

    pub fn same_geometry(&self, other: &BlockModel) -> bool {
        self.dims == other.dims
            && self.block_size == other.block_size
            && self.origin == other.origin
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.tonnage == b.tonnage)
    }

    pub fn total_tonnage(&self) -> f64 {
        self.blocks.iter().map(|b| b.tonnage).sum()
    }

    /// Sorted distinct domain ids present in the model.
    pub fn domains(&self) -> Vec<u32> {
        let mut domains: Vec<u32> = self.blocks.iter().map(|b| b.domain).collect();
        domains.sort_unstable();
        domains.dedup();
        domains
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrillSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub grade: f64,
    pub domain: u32,
}

impl DrillSample {
    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err("sample coordinates must be finite".to_string());
        }
        if !(self.grade.is_finite() && (0.0..=1.0).contains(&self.grade)) {
            return Err(format!("sample grade {} outside [0, 1]", self.grade));
        }
        Ok(())
    }
}
