use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::Staging;
use crate::block_model::{BlockIndex, BlockModel};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};

/// `i,j,k,stage` for every staged block.
pub fn save_staging(staging: &Staging, model: &BlockModel, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "i,j,k,stage")?;
        for (b, &s) in staging.stage.iter().enumerate() {
            if s > 0 {
                let BlockIndex { i, j, k } = model.blocks[b].index;
                writeln!(out, "{i},{j},{k},{s}")?;
            }
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Reads `i,j,k,stage`. Stage ids are renumbered `1..=k` in ascending
/// order. With `pit` given, the file must stage exactly those blocks.
pub fn load_staging(path: &Path, model: &BlockModel, pit: Option<&[bool]>) -> Result<Staging> {
    let table = Table::read_path(path)?;
    let cols: Vec<usize> = ["i", "j", "k", "stage"]
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<_>>()?;
    let mut raw = vec![0usize; model.len()];
    for row in &table.rows {
        let index = BlockIndex::new(table.usize(row, cols[0])?, table.usize(row, cols[1])?, table.usize(row, cols[2])?);
        if !model.dims.contains(index) {
            return Err(table.error(row, format!("block {index} outside model {}", model.dims)));
        }
        let stage = table.usize(row, cols[3])?;
        if stage == 0 {
            return Err(table.error(row, "stage ids start at 1"));
        }
        let id = model.dims.linear(index);
        if raw[id] != 0 {
            return Err(table.error(row, format!("duplicate block {index}")));
        }
        raw[id] = stage;
    }
    let ids: BTreeMap<usize, usize> = raw
        .iter()
        .copied()
        .filter(|s| *s > 0)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(n, s)| (s, n + 1))
        .collect();
    if ids.is_empty() {
        return Err(Error::parse(path, 1, "no staged blocks"));
    }
    let stage: Vec<usize> = raw.iter().map(|s| if *s == 0 { 0 } else { ids[s] }).collect();
    let staging = Staging::new(stage, ids.len())?;
    if let Some(pit) = pit {
        staging
            .check_covers(pit, model.dims)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    }
    Ok(staging)
}
