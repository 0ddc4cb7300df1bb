//! Small directed-graph helpers shared by the pit, staging and scheduling code.

use std::collections::BinaryHeap;
use std::cmp::Reverse;

/// Successor lists of a graph on `n` nodes.
pub fn successors(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in arcs {
        succ[a].push(b);
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    succ
}

pub fn predecessors(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); n];
    for &(a, b) in arcs {
        pred[b].push(a);
    }
    for p in &mut pred {
        p.sort_unstable();
        p.dedup();
    }
    pred
}

/// Kahn's algorithm, always taking the smallest available node.
///
/// On failure returns one cycle as a node list with the first node repeated
/// at the end.
pub fn topological_order(n: usize, arcs: &[(usize, usize)]) -> Result<Vec<usize>, Vec<usize>> {
    let succ = successors(n, arcs);
    let mut indegree = vec![0usize; n];
    for s in &succ {
        for &b in s {
            indegree[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(find_cycle(&succ, &indegree))
    }
}

// Nodes with remaining indegree all lie on or behind a cycle; walking
// backwards along unresolved predecessors must revisit a node.
fn find_cycle(succ: &[Vec<usize>], indegree: &[usize]) -> Vec<usize> {
    let n = succ.len();
    let mut pred_in_residual = vec![None; n];
    for (a, s) in succ.iter().enumerate() {
        if indegree[a] == 0 {
            continue;
        }
        for &b in s {
            if indegree[b] > 0 && pred_in_residual[b].is_none() {
                pred_in_residual[b] = Some(a);
            }
        }
    }
    let start = (0..n).find(|&v| indegree[v] > 0).expect("cycle exists");
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut v = start;
    while seen[v] == usize::MAX {
        seen[v] = path.len();
        path.push(v);
        v = pred_in_residual[v].expect("residual node has residual predecessor");
    }
    let mut cycle: Vec<usize> = path[seen[v]..].to_vec();
    cycle.reverse();
    cycle.push(cycle[0]);
    cycle
}
