use std::collections::BTreeMap;

use super::InterpolatorConfig;
use crate::block_model::DrillSample;
use crate::error::{Error, Result};

const SNAP_DISTANCE: f64 = 1e-9;

/// Inverse-distance weighting over the nearest samples.
#[derive(Debug, Clone)]
pub struct Idw<'a> {
    samples: Vec<&'a DrillSample>,
    power: f64,
    max_neighbors: usize,
}

impl<'a> Idw<'a> {
    pub fn new(samples: Vec<&'a DrillSample>, power: f64, max_neighbors: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Invalid("inverse-distance weighting needs at least one sample".to_string()));
        }
        Ok(Idw {
            samples,
            power,
            max_neighbors: max_neighbors.max(1),
        })
    }

    /// Indices (into this interpolator's samples) of the neighbours used at
    /// `point`, nearest first, ties by sample order.
    pub fn neighbors(&self, point: [f64; 3]) -> Vec<(f64, usize)> {
        let mut dist: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(n, s)| (distance(s.position(), point), n))
            .collect();
        let k = self.max_neighbors.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_by(cmp);
        dist
    }

    /// Grade and domain at `point`.
    pub fn evaluate(&self, point: [f64; 3]) -> (f64, u32) {
        let neighbors = self.neighbors(point);
        let (nearest_d, nearest) = neighbors[0];
        if nearest_d < SNAP_DISTANCE {
            let s = self.samples[nearest];
            return (s.grade, s.domain);
        }
        let mut weighted = 0.0;
        let mut total = 0.0;
        let mut votes: BTreeMap<u32, f64> = BTreeMap::new();
        for &(d, n) in &neighbors {
            let s = self.samples[n];
            let w = d.powf(-self.power);
            weighted += w * s.grade;
            total += w;
            *votes.entry(s.domain).or_default() += w;
        }
        // Ascending ids, replace only on a strictly larger vote: ties keep the lowest id.
        let mut domain = 0;
        let mut best = f64::NEG_INFINITY;
        for (&d, &w) in &votes {
            if w > best {
                best = w;
                domain = d;
            }
        }
        ((weighted / total).clamp(0.0, 1.0), domain)
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Inverse-distance-weighted grade and plurality domain at `point` using
/// `config.idw_power` and `config.idw_max_neighbors`.
pub fn idw_interpolate(samples: &[DrillSample], config: &InterpolatorConfig, point: [f64; 3]) -> Result<(f64, u32)> {
    let idw = Idw::new(samples.iter().collect(), config.idw_power, config.idw_max_neighbors)?;
    Ok(idw.evaluate(point))
}
