use std::collections::BTreeMap;

use super::Staging;
use crate::block_model::{BlockEconomics, BlockModel, PrecedenceGraph};
use crate::error::{Error, Result};
use crate::graph;

/// All blocks of one stage on one bench; mined as a single chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct StageBenchUnit {
    pub stage: usize,
    pub bench: usize,
    /// Linear block ids in ascending order.
    pub blocks: Vec<usize>,
    pub tonnage: f64,
}

impl StageBenchUnit {
    /// Tonnes of blocks that qualify as ore under `econ`.
    pub fn ore_tonnes(&self, econ: &BlockEconomics) -> f64 {
        self.blocks.iter().filter(|&&b| econ.is_ore(b)).map(|&b| econ.tonnage[b]).sum()
    }

    /// Undiscounted value with every block sent to its better destination.
    pub fn value(&self, econ: &BlockEconomics) -> f64 {
        self.blocks.iter().map(|&b| econ.best_value(b)).sum()
    }
}

/// Arcs `(u, v)` between unit ids: `v` may not start before `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPrecedence {
    pub n_units: usize,
    pub arcs: Vec<(usize, usize)>,
    predecessors: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
}

impl UnitPrecedence {
    pub fn new(n_units: usize, mut arcs: Vec<(usize, usize)>) -> Result<Self> {
        arcs.sort_unstable();
        arcs.dedup();
        if let Some(&(a, b)) = arcs.iter().find(|&&(a, b)| a >= n_units || b >= n_units) {
            return Err(Error::Invalid(format!("unit arc ({a}, {b}) outside {n_units} units")));
        }
        graph::topological_order(n_units, &arcs).map_err(Error::Cycle)?;
        Ok(UnitPrecedence {
            n_units,
            predecessors: graph::predecessors(n_units, &arcs),
            successors: graph::successors(n_units, &arcs),
            arcs,
        })
    }

    pub fn predecessors(&self, unit: usize) -> &[usize] {
        &self.predecessors[unit]
    }

    pub fn successors(&self, unit: usize) -> &[usize] {
        &self.successors[unit]
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.arcs.binary_search(&(a, b)).is_ok()
    }

    /// True when `order` lists every unit once with predecessors first.
    pub fn is_topological(&self, order: &[usize]) -> bool {
        if order.len() != self.n_units {
            return false;
        }
        let mut position = vec![usize::MAX; self.n_units];
        for (p, &u) in order.iter().enumerate() {
            if u >= self.n_units || position[u] != usize::MAX {
                return false;
            }
            position[u] = p;
        }
        self.arcs.iter().all(|&(a, b)| position[a] < position[b])
    }
}

/// One unit per nonempty (stage, bench), ordered by stage then bench,
/// with block precedence lifted to units plus the bench chain inside
/// every stage.
pub fn build_units(
    model: &BlockModel,
    staging: &Staging,
    precedence: &PrecedenceGraph,
) -> Result<(Vec<StageBenchUnit>, UnitPrecedence)> {
    if staging.stage.len() != model.len() || precedence.dims != model.dims {
        return Err(Error::Geometry("staging, precedence and model sizes differ".to_string()));
    }
    staging.validate()?;
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (b, &s) in staging.stage.iter().enumerate() {
        if s > 0 {
            groups.entry((s, model.blocks[b].index.k)).or_default().push(b);
        }
    }
    let mut unit_of = vec![usize::MAX; model.len()];
    let mut id_of = BTreeMap::new();
    let units: Vec<StageBenchUnit> = groups
        .into_iter()
        .enumerate()
        .map(|(u, ((stage, bench), blocks))| {
            for &b in &blocks {
                unit_of[b] = u;
            }
            id_of.insert((stage, bench), u);
            StageBenchUnit {
                stage,
                bench,
                tonnage: blocks.iter().map(|&b| model.blocks[b].tonnage).sum(),
                blocks,
            }
        })
        .collect();

    let mut arcs = Vec::new();
    for &(a, b) in &precedence.arcs {
        let (ua, ub) = (unit_of[a], unit_of[b]);
        if ub == usize::MAX {
            continue;
        }
        if ua == usize::MAX {
            let (ia, ib) = (model.dims.index_of(a), model.dims.index_of(b));
            return Err(Error::Staging(format!("staged block {ib} depends on unstaged block {ia}")));
        }
        if ua != ub {
            arcs.push((ua, ub));
        }
    }
    for (u, unit) in units.iter().enumerate() {
        if unit.bench > 0 {
            if let Some(&above) = id_of.get(&(unit.stage, unit.bench - 1)) {
                arcs.push((above, u));
            }
        }
    }
    let unit_precedence = UnitPrecedence::new(units.len(), arcs)?;
    Ok((units, unit_precedence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{derive_precedence, Dims, SlopePattern};

    fn model(nx: usize, ny: usize, nz: usize) -> BlockModel {
        BlockModel::uniform(Dims::new(nx, ny, nz), [1.0; 3], [0.0; 3], 2.0).unwrap()
    }

    #[test]
    fn single_stage_is_a_chain() {
        let m = model(2, 2, 4);
        let staging = Staging::new(vec![1; m.len()], 1).unwrap();
        let (units, prec) = build_units(&m, &staging, &derive_precedence(&m, SlopePattern::NinePoint)).unwrap();
        assert_eq!(units.len(), 4);
        assert_eq!(prec.arcs, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(units.iter().all(|u| u.tonnage == 8.0));
    }

    #[test]
    fn nested_stages_lift_block_arcs() {
        // Stage 1 is the centre column, stage 2 everything else.
        let m = model(3, 3, 2);
        let stage: Vec<usize> = (0..m.len())
            .map(|b| {
                let idx = m.dims.index_of(b);
                if idx.i == 1 && idx.j == 1 { 1 } else { 2 }
            })
            .collect();
        let staging = Staging::new(stage.clone(), 2).unwrap();
        let prec = derive_precedence(&m, SlopePattern::NinePoint);
        let (units, up) = build_units(&m, &staging, &prec).unwrap();
        assert_eq!(units.len(), 4);
        let id = |s, k| units.iter().position(|u| u.stage == s && u.bench == k).unwrap();

        // Independent lift: every block arc whose ends sit in different units.
        let mut expected: Vec<(usize, usize)> = prec
            .arcs
            .iter()
            .map(|&(a, b)| {
                let (ia, ib) = (m.dims.index_of(a), m.dims.index_of(b));
                (id(stage[a], ia.k), id(stage[b], ib.k))
            })
            .filter(|(x, y)| x != y)
            .collect();
        expected.sort_unstable();
        expected.dedup();
        assert_eq!(up.arcs, expected);
        assert!(up.has_arc(id(1, 0), id(2, 1)));
        assert!(up.has_arc(id(2, 0), id(1, 1)));
    }

    #[test]
    fn unit_count_matches_distinct_pairs() {
        let m = model(4, 3, 3);
        let stage: Vec<usize> = (0..m.len()).map(|b| if m.dims.index_of(b).i < 2 { 1 } else { 2 }).collect();
        let staging = Staging::new(stage, 2).unwrap();
        let (units, up) = build_units(&m, &staging, &derive_precedence(&m, SlopePattern::FivePoint)).unwrap();
        assert_eq!(units.len(), 6);
        let total: usize = units.iter().map(|u| u.blocks.len()).sum();
        assert_eq!(total, m.len());
        let order = graph::topological_order(units.len(), &up.arcs).unwrap();
        assert!(up.is_topological(&order));
        assert!(!up.is_topological(&order[1..]));
    }

    #[test]
    fn unstaged_predecessor_is_an_error() {
        let m = model(1, 1, 2);
        let staging = Staging::new(vec![0, 1], 1).unwrap();
        let err = build_units(&m, &staging, &derive_precedence(&m, SlopePattern::NinePoint)).unwrap_err();
        assert!(err.to_string().contains("(0,0,0)"), "{err}");
    }
}
