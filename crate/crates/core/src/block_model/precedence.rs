use super::{BlockIndex, BlockModel, Dims};
use crate::graph;

/// Which blocks on the level above must be removed before a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopePattern {
    /// Block directly above plus its four edge neighbours.
    FivePoint,
    /// Block directly above plus all eight neighbours (about 45 degrees on cubes).
    #[default]
    NinePoint,
}

/// Arcs `(a, b)` between linear block ids: `a` must be mined no later than `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecedenceGraph {
    pub dims: Dims,
    pub arcs: Vec<(usize, usize)>,
    predecessors: Vec<Vec<usize>>,
}

impl PrecedenceGraph {
    pub fn from_arcs(dims: Dims, arcs: Vec<(usize, usize)>) -> Self {
        let predecessors = graph::predecessors(dims.len(), &arcs);
        PrecedenceGraph {
            dims,
            arcs,
            predecessors,
        }
    }

    pub fn predecessors(&self, block: usize) -> &[usize] {
        &self.predecessors[block]
    }

    pub fn index_arcs(&self) -> impl Iterator<Item = (BlockIndex, BlockIndex)> + '_ {
        self.arcs
            .iter()
            .map(|&(a, b)| (self.dims.index_of(a), self.dims.index_of(b)))
    }

    pub fn is_acyclic(&self) -> bool {
        graph::topological_order(self.dims.len(), &self.arcs).is_ok()
    }
}

pub fn derive_precedence(model: &BlockModel, pattern: SlopePattern) -> PrecedenceGraph {
    let dims = model.dims;
    let offsets: &[(isize, isize)] = match pattern {
        SlopePattern::FivePoint => &[(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)],
        SlopePattern::NinePoint => &[
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (0, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ],
    };
    let mut arcs = Vec::new();
    for k in 1..dims.nz {
        for j in 0..dims.ny {
            for i in 0..dims.nx {
                let below = dims.linear(BlockIndex::new(i, j, k));
                for &(di, dj) in offsets {
                    let (Some(ai), Some(aj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                        continue;
                    };
                    if ai < dims.nx && aj < dims.ny {
                        arcs.push((dims.linear(BlockIndex::new(ai, aj, k - 1)), below));
                    }
                }
            }
        }
    }
    arcs.sort_unstable();
    PrecedenceGraph::from_arcs(dims, arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(nx: usize, ny: usize, nz: usize) -> BlockModel {
        BlockModel::uniform(Dims::new(nx, ny, nz), [1.0; 3], [0.0; 3], 1.0).unwrap()
    }

    fn parents(g: &PrecedenceGraph, child: BlockIndex) -> Vec<BlockIndex> {
        let mut p: Vec<_> = g.index_arcs().filter(|(_, b)| *b == child).map(|(a, _)| a).collect();
        p.sort();
        p
    }

    #[test]
    fn single_column_five_point() {
        let g = derive_precedence(&model(1, 1, 2), SlopePattern::FivePoint);
        assert_eq!(
            g.index_arcs().collect::<Vec<_>>(),
            vec![(BlockIndex::new(0, 0, 0), BlockIndex::new(0, 0, 1))]
        );
    }

    #[test]
    fn nine_point_center_has_all_top_blocks() {
        let g = derive_precedence(&model(3, 3, 2), SlopePattern::NinePoint);
        let p = parents(&g, BlockIndex::new(1, 1, 1));
        assert_eq!(p.len(), 9);
        assert!(p.iter().all(|b| b.k == 0));
    }

    #[test]
    fn five_point_corner_is_clipped() {
        let g = derive_precedence(&model(3, 3, 2), SlopePattern::FivePoint);
        let p = parents(&g, BlockIndex::new(0, 0, 1));
        assert_eq!(
            p,
            vec![BlockIndex::new(0, 0, 0), BlockIndex::new(0, 1, 0), BlockIndex::new(1, 0, 0)]
        );
    }

    proptest! {
        #[test]
        fn arcs_go_one_level_down_and_graph_is_acyclic(
            nx in 1usize..6, ny in 1usize..6, nz in 1usize..5, nine in any::<bool>()
        ) {
            let pattern = if nine { SlopePattern::NinePoint } else { SlopePattern::FivePoint };
            let g = derive_precedence(&model(nx, ny, nz), pattern);
            prop_assert!(g.is_acyclic());
            for (a, b) in g.index_arcs() {
                prop_assert_eq!(a.k + 1, b.k);
                prop_assert!(a.i.abs_diff(b.i) <= 1 && a.j.abs_diff(b.j) <= 1);
            }
        }
    }
}
