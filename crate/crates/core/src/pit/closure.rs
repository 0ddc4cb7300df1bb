use super::maxflow::FlowNetwork;
use crate::error::{Error, Result};
use crate::graph;

/// Node values and arcs `(a, b)` meaning `b` may only be taken with `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureProblem {
    pub values: Vec<f64>,
    pub arcs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Closure {
    pub selected: Vec<bool>,
    /// Sum of the original node values over the selected set.
    pub value: f64,
}

impl Closure {
    pub fn blocks(&self) -> Vec<usize> {
        (0..self.selected.len()).filter(|&b| self.selected[b]).collect()
    }

    pub fn len(&self) -> usize {
        self.selected.iter().filter(|s| **s).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.selected.iter().any(|s| *s)
    }
}

/// Currency rounded to integer cents for the cut computation.
pub fn to_cents(value: f64) -> i64 {
    (value * 100.0).round() as i64
}

/// True when every arc whose head is selected also has its tail selected.
pub fn is_closed(selected: &[bool], arcs: &[(usize, usize)]) -> bool {
    arcs.iter().all(|&(a, b)| !selected[b] || selected[a])
}

impl ClosureProblem {
    fn validate(&self) -> Result<()> {
        let n = self.values.len();
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("closure node value {v} is not finite")));
        }
        if let Some(&(a, b)) = self.arcs.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::Invalid(format!("closure arc ({a}, {b}) outside {n} nodes")));
        }
        graph::topological_order(n, &self.arcs).map_err(Error::Cycle)?;
        Ok(())
    }
}

/// Maximum-value closed set; among optimal sets the smallest one.
pub fn max_closure(problem: &ClosureProblem) -> Result<Closure> {
    max_closure_containing(problem, &vec![false; problem.values.len()])
}

/// Maximum-value closed set that contains every `forced` node.
///
/// `forced` must itself be closed. Optimality and minimality are in integer
/// cents; the reported value sums the unrounded node values.
pub fn max_closure_containing(problem: &ClosureProblem, forced: &[bool]) -> Result<Closure> {
    problem.validate()?;
    let n = problem.values.len();
    if forced.len() != n {
        return Err(Error::Invalid(format!("forced set has {} entries for {n} nodes", forced.len())));
    }
    let cents: Vec<i64> = problem.values.iter().map(|v| to_cents(*v)).collect();
    let positive: i64 = cents.iter().filter(|c| **c > 0).sum();
    let negative: i64 = cents.iter().filter(|c| **c < 0).map(|c| -c).sum();
    let infinite = positive
        .checked_add(negative)
        .and_then(|s| s.checked_add(1))
        .ok_or_else(|| Error::Invalid("closure values overflow integer cents".to_string()))?;

    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for (b, &c) in cents.iter().enumerate() {
        if forced[b] {
            net.add_edge(source, b, infinite);
        } else if c > 0 {
            net.add_edge(source, b, c);
        }
        if c < 0 {
            net.add_edge(b, sink, -c);
        }
    }
    for &(a, b) in &problem.arcs {
        net.add_edge(b, a, infinite);
    }
    net.max_flow(source, sink);
    let side = net.source_side(source);
    let selected: Vec<bool> = side[..n].to_vec();
    let value = (0..n).filter(|&b| selected[b]).map(|b| problem.values[b]).sum();
    Ok(Closure { selected, value })
}
