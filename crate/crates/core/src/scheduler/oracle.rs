use super::{Chromosome, SchedulingProblem};
use crate::error::{Error, Result};
use crate::staging::UnitPrecedence;

pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Visits every topological order in lexicographic order.
fn for_each_order(precedence: &UnitPrecedence, visit: &mut impl FnMut(&[usize])) {
    fn go(
        precedence: &UnitPrecedence,
        indegree: &mut Vec<usize>,
        used: &mut Vec<bool>,
        order: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        let n = precedence.n_units;
        if order.len() == n {
            visit(order);
            return;
        }
        for u in 0..n {
            if used[u] || indegree[u] > 0 {
                continue;
            }
            used[u] = true;
            order.push(u);
            for &v in precedence.successors(u) {
                indegree[v] -= 1;
            }
            go(precedence, indegree, used, order, visit);
            for &v in precedence.successors(u) {
                indegree[v] += 1;
            }
            order.pop();
            used[u] = false;
        }
    }
    let n = precedence.n_units;
    let mut indegree: Vec<usize> = (0..n).map(|u| precedence.predecessors(u).len()).collect();
    go(precedence, &mut indegree, &mut vec![false; n], &mut Vec::with_capacity(n), visit);
}

/// Number of topological orders.
pub fn count_orders(precedence: &UnitPrecedence) -> usize {
    let mut count = 0;
    for_each_order(precedence, &mut |_| count += 1);
    count
}

/// Highest-NPV order by exhaustive enumeration; ties go to the
/// lexicographically smallest order.
pub fn brute_force_best(problem: &SchedulingProblem, limit: usize) -> Result<(Chromosome, f64)> {
    let n = problem.units.len();
    if n > limit {
        return Err(Error::TooManyUnits { units: n, limit });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_order(&problem.precedence, &mut |order| {
        let value = problem.fitness(&Chromosome(order.to_vec()));
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((order.to_vec(), value));
        }
    });
    let (order, value) = best.expect("an acyclic graph has at least one order");
    Ok((Chromosome(order), value))
}
