use std::io::Write;
use std::path::Path;

use super::closure::{is_closed, max_closure_containing, ClosureProblem};
use crate::block_model::{BlockEconomics, BlockIndex, BlockModel, EconomicModel, PrecedenceGraph};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};

/// Shell number per block (0 outside the ultimate pit) and the price
/// factors that generated the shells.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellAssignment {
    pub shell_index: Vec<usize>,
    pub revenue_factors: Vec<f64>,
}

impl ShellAssignment {
    pub fn n_shells(&self) -> usize {
        self.revenue_factors.len()
    }

    pub fn in_pit(&self, block: usize) -> bool {
        self.shell_index[block] > 0
    }

    pub fn pit_blocks(&self) -> Vec<usize> {
        (0..self.shell_index.len()).filter(|&b| self.in_pit(b)).collect()
    }

    /// Tonnage of shells `1..=n_shells`, at position `s - 1`.
    pub fn shell_tonnages(&self, model: &BlockModel) -> Vec<f64> {
        let mut out = vec![0.0; self.n_shells()];
        for (b, &s) in self.shell_index.iter().enumerate() {
            if s > 0 {
                out[s - 1] += model.blocks[b].tonnage;
            }
        }
        out
    }

    /// Blocks with shell index in `1..=s`.
    pub fn up_to(&self, s: usize) -> Vec<bool> {
        self.shell_index.iter().map(|&x| x > 0 && x <= s).collect()
    }

    /// Factor ordering, index range, and closure of every nested pit.
    pub fn validate(&self, precedence: &PrecedenceGraph) -> Result<()> {
        check_factors(&self.revenue_factors)?;
        if self.shell_index.len() != precedence.dims.len() {
            return Err(Error::Invalid("shell assignment size differs from the model".to_string()));
        }
        if let Some(s) = self.shell_index.iter().find(|s| **s > self.n_shells()) {
            return Err(Error::Invalid(format!("shell {s} exceeds {} shells", self.n_shells())));
        }
        for s in 1..=self.n_shells() {
            if !is_closed(&self.up_to(s), &precedence.arcs) {
                return Err(Error::Invalid(format!("shells 1..={s} do not form a closed pit")));
            }
        }
        Ok(())
    }
}

/// 21 factors evenly spaced over [0.5, 1.5].
pub fn default_revenue_factors() -> Vec<f64> {
    (0..21).map(|i| 0.5 + i as f64 / 20.0).collect()
}

fn check_factors(factors: &[f64]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::Invalid("at least one revenue factor is required".to_string()));
    }
    if factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(Error::Invalid("revenue factors must be positive".to_string()));
    }
    if factors.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("revenue factors must be strictly increasing".to_string()));
    }
    Ok(())
}

/// Solves one closure per factor, each with the previous pit forced in,
/// so shell `s` holds the blocks first taken at factor `s`.
pub fn nested_shells(
    model: &BlockModel,
    econ: &EconomicModel,
    precedence: &PrecedenceGraph,
    revenue_factors: &[f64],
) -> Result<ShellAssignment> {
    check_factors(revenue_factors)?;
    if precedence.dims != model.dims {
        return Err(Error::Geometry("precedence graph and model differ in dims".to_string()));
    }
    let n = model.len();
    let mut shell_index = vec![0; n];
    let mut pit = vec![false; n];
    for (s, &factor) in revenue_factors.iter().enumerate() {
        let be = BlockEconomics::with_price_factor(model, econ, factor)?;
        let problem = ClosureProblem {
            values: (0..n).map(|b| be.best_value(b)).collect(),
            arcs: precedence.arcs.clone(),
        };
        let closure = max_closure_containing(&problem, &pit)?;
        for b in 0..n {
            if closure.selected[b] && !pit[b] {
                shell_index[b] = s + 1;
            }
        }
        pit = closure.selected;
        log::debug!("shell {} at factor {factor}: pit of {} blocks", s + 1, pit.iter().filter(|x| **x).count());
    }
    Ok(ShellAssignment {
        shell_index,
        revenue_factors: revenue_factors.to_vec(),
    })
}

/// `i,j,k,shell` for every block, with the factors in a header comment.
pub fn save_shells(shells: &ShellAssignment, model: &BlockModel, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let factors: Vec<String> = shells.revenue_factors.iter().map(f64::to_string).collect();
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "# revenue_factors = {}", factors.join(" "))?;
        writeln!(out, "i,j,k,shell")?;
        for (b, block) in model.blocks.iter().enumerate() {
            let BlockIndex { i, j, k } = block.index;
            writeln!(out, "{i},{j},{k},{}", shells.shell_index[b])?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Reads `i,j,k,shell`. Unlisted blocks are outside the pit. Without a
/// `revenue_factors` header the factors default to `1..=max shell`.
pub fn load_shells(path: &Path, model: &BlockModel) -> Result<ShellAssignment> {
    let table = Table::read_path(path)?;
    let cols: Vec<usize> = ["i", "j", "k", "shell"]
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<_>>()?;
    let mut shell_index = vec![0; model.len()];
    let mut seen = vec![false; model.len()];
    for row in &table.rows {
        let index = BlockIndex::new(table.usize(row, cols[0])?, table.usize(row, cols[1])?, table.usize(row, cols[2])?);
        if !model.dims.contains(index) {
            return Err(table.error(row, format!("block {index} outside model {}", model.dims)));
        }
        let id = model.dims.linear(index);
        if std::mem::replace(&mut seen[id], true) {
            return Err(table.error(row, format!("duplicate block {index}")));
        }
        shell_index[id] = table.usize(row, cols[3])?;
    }
    let max_shell = shell_index.iter().copied().max().unwrap_or(0);
    let revenue_factors = match table.metadata.get("revenue_factors") {
        Some(raw) => raw
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(path, 1, format!("bad revenue_factors `{raw}`")))?,
        None => (1..=max_shell.max(1)).map(|s| s as f64).collect(),
    };
    check_factors(&revenue_factors).map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if max_shell > revenue_factors.len() {
        return Err(Error::parse(
            path,
            1,
            format!("shell {max_shell} exceeds the {} revenue factors", revenue_factors.len()),
        ));
    }
    Ok(ShellAssignment {
        shell_index,
        revenue_factors,
    })
}
