use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Chromosome, Schedule, SchedulingProblem};
use crate::error::{Error, Result};
use crate::staging::UnitPrecedence;

#[derive(Debug, Clone, PartialEq)]
pub struct EaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Chance that each adjacent pair of a child is offered a swap.
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elitism_count: usize,
    pub seed: u64,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population_size: 50,
            generations: 200,
            tournament_size: 3,
            mutation_rate: 0.3,
            crossover_rate: 0.9,
            elitism_count: 2,
            seed: 0,
        }
    }
}

impl EaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Invalid("population size must be >= 2".to_string()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Invalid("tournament size must be >= 1".to_string()));
        }
        if self.elitism_count == 0 || self.elitism_count > self.population_size {
            return Err(Error::Invalid(format!(
                "elitism count must be within 1..={}",
                self.population_size
            )));
        }
        for (name, rate) in [("mutation", self.mutation_rate), ("crossover", self.crossover_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Invalid(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: Chromosome,
    pub schedule: Schedule,
    pub npv: f64,
    /// Best fitness after generation 0 (the initial population) through the last.
    pub trace: Vec<f64>,
}

/// Topological order built by repeatedly picking a uniformly random ready unit.
pub fn random_order(precedence: &UnitPrecedence, rng: &mut impl Rng) -> Chromosome {
    let n = precedence.n_units;
    let mut indegree: Vec<usize> = (0..n).map(|u| precedence.predecessors(u).len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&u| indegree[u] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let u = ready.swap_remove(rng.gen_range(0..ready.len()));
        order.push(u);
        for &v in precedence.successors(u) {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.push(v);
            }
        }
    }
    Chromosome(order)
}

/// Nearest topological order to a permutation: Kahn's algorithm always
/// taking the ready unit that sits earliest in `order`.
pub fn repair(order: &[usize], precedence: &UnitPrecedence) -> Chromosome {
    let n = precedence.n_units;
    let mut position = vec![0; n];
    for (p, &u) in order.iter().enumerate() {
        position[u] = p;
    }
    let mut indegree: Vec<usize> = (0..n).map(|u| precedence.predecessors(u).len()).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).filter(|&u| indegree[u] == 0).map(|u| Reverse((position[u], u))).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(Reverse((_, u))) = heap.pop() {
        out.push(u);
        for &v in precedence.successors(u) {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                heap.push(Reverse((position[v], v)));
            }
        }
    }
    Chromosome(out)
}

/// Order crossover: the child keeps a random slice of `a` in place, fills
/// the other positions with the remaining units in `b`'s order, and is then
/// repaired to a topological order.
pub fn crossover(a: &Chromosome, b: &Chromosome, precedence: &UnitPrecedence, rng: &mut impl Rng) -> Chromosome {
    let n = a.0.len();
    if n < 2 {
        return a.clone();
    }
    let i = rng.gen_range(0..n);
    let j = rng.gen_range(0..n);
    let (lo, hi) = (i.min(j), i.max(j) + 1);
    let mut kept = vec![false; n];
    for &u in &a.0[lo..hi] {
        kept[u] = true;
    }
    let mut fill = b.0.iter().copied().filter(|&u| !kept[u]);
    let child: Vec<usize> = (0..n)
        .map(|p| if (lo..hi).contains(&p) { a.0[p] } else { fill.next().expect("fill covers the rest") })
        .collect();
    repair(&child, precedence)
}

/// Offers every adjacent pair, left to right, a swap with probability
/// `rate`; pairs joined by an arc stay put.
pub fn mutate(order: &mut Chromosome, precedence: &UnitPrecedence, rate: f64, rng: &mut impl Rng) {
    for i in 0..order.0.len().saturating_sub(1) {
        if rng.gen_bool(rate) {
            let (u, v) = (order.0[i], order.0[i + 1]);
            if !precedence.has_arc(u, v) {
                order.0.swap(i, i + 1);
            }
        }
    }
}

fn tournament(fitness: &[f64], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Indices sorted by fitness, best first, ties by index.
fn ranking(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    idx
}

/// Generational search over unit orders with NPV as fitness. Variation
/// is sequential from one seeded generator; fitness is evaluated in
/// parallel, so results do not depend on thread count.
pub fn evolve(problem: &SchedulingProblem, config: &EaConfig) -> Result<Evolution> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let evaluate = |pop: &[Chromosome]| -> Vec<f64> { pop.par_iter().map(|c| problem.fitness(c)).collect() };

    let mut population: Vec<Chromosome> = (0..config.population_size)
        .map(|_| random_order(&problem.precedence, &mut rng))
        .collect();
    let mut fitness = evaluate(&population);
    let mut trace = Vec::with_capacity(config.generations + 1);
    trace.push(fitness[ranking(&fitness)[0]]);

    for generation in 1..=config.generations {
        let ranked = ranking(&fitness);
        let mut next: Vec<Chromosome> = ranked[..config.elitism_count].iter().map(|&i| population[i].clone()).collect();
        let mut next_fitness: Vec<f64> = ranked[..config.elitism_count].iter().map(|&i| fitness[i]).collect();
        let mut offspring = Vec::with_capacity(config.population_size - next.len());
        while next.len() + offspring.len() < config.population_size {
            let a = tournament(&fitness, config.tournament_size, &mut rng);
            let b = tournament(&fitness, config.tournament_size, &mut rng);
            let mut child = if rng.gen_bool(config.crossover_rate) {
                crossover(&population[a], &population[b], &problem.precedence, &mut rng)
            } else {
                population[a].clone()
            };
            mutate(&mut child, &problem.precedence, config.mutation_rate, &mut rng);
            offspring.push(child);
        }
        next_fitness.extend(evaluate(&offspring));
        next.extend(offspring);
        population = next;
        fitness = next_fitness;
        let best = fitness[ranking(&fitness)[0]];
        log::trace!("generation {generation}: best {best}");
        trace.push(best);
    }

    let best_idx = ranking(&fitness)[0];
    let best = population[best_idx].clone();
    let schedule = problem.decode(&best);
    let npv = problem.npv(&schedule);
    Ok(Evolution {
        best,
        schedule,
        npv,
        trace,
    })
}

/// Shuffles the candidate list; used by tests to draw arbitrary permutations.
#[cfg(test)]
pub(crate) fn shuffled(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}
