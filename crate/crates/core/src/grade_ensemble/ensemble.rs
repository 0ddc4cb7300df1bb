use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{train_network, Idw, InterpolationMethod, InterpolatorConfig};
use crate::block_model::{BlockModel, DrillSample};
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<BlockModel>,
    pub member_seeds: Vec<u64>,
    pub config: InterpolatorConfig,
}

impl Ensemble {
    pub fn new(members: Vec<BlockModel>, member_seeds: Vec<u64>, config: InterpolatorConfig) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Invalid("an ensemble needs at least one member".to_string()));
        }
        if member_seeds.len() != members.len() {
            return Err(Error::Invalid("one seed per ensemble member required".to_string()));
        }
        if let Some(m) = members.iter().position(|m| !m.same_geometry(&members[0])) {
            return Err(Error::Geometry(format!("member {m} differs in geometry from member 0")));
        }
        Ok(Ensemble {
            members,
            member_seeds,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-member interpolation parameters derived from the member seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberPlan {
    pub seed: u64,
    pub power: f64,
    /// Sorted indices of the samples the member interpolates from.
    pub sample_indices: Vec<usize>,
}

/// Drillholes as sample index lists, holes in order of first appearance.
/// Samples sharing a collar position (x, y) belong to one hole.
pub fn drillholes(samples: &[DrillSample]) -> Vec<Vec<usize>> {
    let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut holes: Vec<Vec<usize>> = Vec::new();
    for (n, s) in samples.iter().enumerate() {
        let key = (s.x.to_bits(), s.y.to_bits());
        let h = *index.entry(key).or_insert_with(|| {
            holes.push(Vec::new());
            holes.len() - 1
        });
        holes[h].push(n);
    }
    holes
}

/// IDW members draw their power jitter and then `ceil(fraction * holes)`
/// whole drillholes without replacement; network members use every sample.
pub fn member_plan(config: &InterpolatorConfig, base_seed: u64, member: usize, samples: &[DrillSample]) -> MemberPlan {
    let seed = base_seed.wrapping_add(member as u64);
    match config.method {
        InterpolationMethod::Network => MemberPlan {
            seed,
            power: config.idw_power,
            sample_indices: (0..samples.len()).collect(),
        },
        InterpolationMethod::Idw => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let jitter = if config.idw_power_jitter > 0.0 {
                rng.gen_range(-config.idw_power_jitter..=config.idw_power_jitter)
            } else {
                0.0
            };
            let holes = drillholes(samples);
            let n = holes.len();
            let take = ((config.bootstrap_fraction * n as f64).ceil() as usize).clamp(1.min(n), n);
            let chosen: Vec<usize> = if take == n {
                (0..n).collect()
            } else {
                rand::seq::index::sample(&mut rng, n, take).into_vec()
            };
            let mut sample_indices: Vec<usize> = chosen.iter().flat_map(|&h| holes[h].iter().copied()).collect();
            sample_indices.sort_unstable();
            MemberPlan {
                seed,
                power: config.idw_power * (1.0 + jitter),
                sample_indices,
            }
        }
    }
}

/// Interpolates `n_members` block models at the block centroids of
/// `geometry`, member `m` seeded with `base_seed + m`.
pub fn build_ensemble(
    samples: &[DrillSample],
    config: &InterpolatorConfig,
    n_members: usize,
    base_seed: u64,
    geometry: &BlockModel,
) -> Result<Ensemble> {
    config.validate()?;
    if n_members == 0 {
        return Err(Error::Invalid("an ensemble needs at least one member".to_string()));
    }
    if samples.is_empty() {
        return Err(Error::Invalid("no drill samples to interpolate".to_string()));
    }
    let centroids: Vec<[f64; 3]> = (0..geometry.len()).map(|id| geometry.centroid(id)).collect();

    let members: Vec<BlockModel> = (0..n_members)
        .into_par_iter()
        .map(|m| {
            let plan = member_plan(config, base_seed, m, samples);
            let values: Vec<(f64, u32)> = match config.method {
                InterpolationMethod::Idw => {
                    let subset = plan.sample_indices.iter().map(|&n| &samples[n]).collect();
                    let idw = Idw::new(subset, plan.power, config.idw_max_neighbors)?;
                    centroids.iter().map(|&c| idw.evaluate(c)).collect()
                }
                InterpolationMethod::Network => {
                    let net = train_network(samples, config, plan.seed)?;
                    log::debug!("member {m}: loss {:.5} after {} epochs", net.final_loss, net.epochs_run);
                    centroids.iter().map(|&c| net.predict(c)).collect()
                }
            };
            let mut model = geometry.clone();
            for (block, (grade, domain)) in model.blocks.iter_mut().zip(values) {
                block.grade = grade;
                block.domain = domain;
            }
            Ok(model)
        })
        .collect::<Result<_>>()?;

    let member_seeds = (0..n_members).map(|m| base_seed.wrapping_add(m as u64)).collect();
    Ensemble::new(members, member_seeds, config.clone())
}

/// Plurality domain per block (ties to the lowest id) with the mean grade of
/// the members that agree with it.
pub fn aggregate(ensemble: &Ensemble) -> BlockModel {
    let mut out = ensemble.members[0].clone();
    let mut grades = Vec::with_capacity(ensemble.len());
    for (id, block) in out.blocks.iter_mut().enumerate() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for m in &ensemble.members {
            *counts.entry(m.blocks[id].domain).or_default() += 1;
        }
        let mut domain = 0;
        let mut best = 0;
        for (&d, &c) in &counts {
            if c > best {
                best = c;
                domain = d;
            }
        }
        grades.clear();
        grades.extend(
            ensemble
                .members
                .iter()
                .map(|m| &m.blocks[id])
                .filter(|b| b.domain == domain)
                .map(|b| b.grade),
        );
        block.domain = domain;
        block.grade = stats::mean(&grades);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyField {
    /// Population standard deviation of grade across members.
    pub grade_std: Vec<f64>,
    /// Fraction of members whose domain differs from the aggregate's.
    pub domain_disagreement: Vec<f64>,
}

pub fn uncertainty_field(ensemble: &Ensemble, aggregate: &BlockModel) -> UncertaintyField {
    let n = ensemble.len() as f64;
    let mut grades = Vec::with_capacity(ensemble.len());
    let mut grade_std = Vec::with_capacity(aggregate.len());
    let mut domain_disagreement = Vec::with_capacity(aggregate.len());
    for (id, agg) in aggregate.blocks.iter().enumerate() {
        grades.clear();
        grades.extend(ensemble.members.iter().map(|m| m.blocks[id].grade));
        grade_std.push(stats::population_std(&grades));
        let differing = ensemble
            .members
            .iter()
            .filter(|m| m.blocks[id].domain != agg.domain)
            .count();
        domain_disagreement.push(differing as f64 / n);
    }
    UncertaintyField {
        grade_std,
        domain_disagreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{generate_synthetic_deposit, Dims, SyntheticConfig};
    use crate::grade_ensemble::idw_interpolate;

    fn deposit() -> crate::block_model::SyntheticDeposit {
        generate_synthetic_deposit(&SyntheticConfig::new(7, Dims::new(8, 8, 5), 10)).unwrap()
    }

    fn with_values(base: &BlockModel, values: &[(f64, u32)]) -> BlockModel {
        let mut m = base.clone();
        for (b, &(g, d)) in m.blocks.iter_mut().zip(values) {
            b.grade = g;
            b.domain = d;
        }
        m
    }

    fn one_block_ensemble(values: &[(f64, u32)]) -> Ensemble {
        let base = BlockModel::uniform(Dims::new(1, 1, 1), [1.0; 3], [0.0; 3], 1.0).unwrap();
        let members = values.iter().map(|v| with_values(&base, &[*v])).collect();
        Ensemble::new(members, (0..values.len() as u64).collect(), InterpolatorConfig::default()).unwrap()
    }

    #[test]
    fn single_member_without_jitter_is_plain_idw() {
        let d = deposit();
        let config = InterpolatorConfig {
            bootstrap_fraction: 1.0,
            idw_power_jitter: 0.0,
            ..Default::default()
        };
        let e = build_ensemble(&d.samples, &config, 1, 99, &d.truth).unwrap();
        for id in 0..d.truth.len() {
            let expected = idw_interpolate(&d.samples, &config, d.truth.centroid(id)).unwrap();
            let b = &e.members[0].blocks[id];
            assert_eq!((b.grade, b.domain), expected);
        }
        assert_eq!(aggregate(&e), e.members[0]);
    }

    #[test]
    fn ensembles_are_deterministic() {
        let d = deposit();
        let config = InterpolatorConfig::default();
        let a = build_ensemble(&d.samples, &config, 10, 5, &d.truth).unwrap();
        let b = build_ensemble(&d.samples, &config, 10, 5, &d.truth).unwrap();
        assert_eq!(a, b);
        assert_eq!(aggregate(&a), aggregate(&b));
        assert_ne!(a.members[0], a.members[1]);
        assert_eq!(a.member_seeds, (5..15).collect::<Vec<u64>>());
    }

    #[test]
    fn dense_sampling_stays_within_neighbor_bounds() {
        let d = generate_synthetic_deposit(&SyntheticConfig::new(3, Dims::new(5, 5, 4), 0)).unwrap();
        let samples: Vec<DrillSample> = (0..d.truth.len())
            .map(|id| {
                let c = d.truth.centroid(id);
                let b = &d.truth.blocks[id];
                DrillSample { x: c[0], y: c[1], z: c[2], grade: b.grade, domain: b.domain }
            })
            .collect();
        let config = InterpolatorConfig {
            idw_max_neighbors: 6,
            bootstrap_fraction: 0.6,
            ..Default::default()
        };
        let e = build_ensemble(&samples, &config, 4, 17, &d.truth).unwrap();
        for (m, member) in e.members.iter().enumerate() {
            let plan = member_plan(&config, 17, m, &samples);
            for id in 0..d.truth.len() {
                // Brute-force neighbour set: all subset samples sorted by distance.
                let c = d.truth.centroid(id);
                let mut by_dist: Vec<(f64, usize)> = plan
                    .sample_indices
                    .iter()
                    .map(|&n| {
                        let s = &samples[n];
                        let dd = ((s.x - c[0]).powi(2) + (s.y - c[1]).powi(2) + (s.z - c[2]).powi(2)).sqrt();
                        (dd, n)
                    })
                    .collect();
                by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let used = &by_dist[..6];
                let lo = used.iter().map(|&(_, n)| samples[n].grade).fold(f64::INFINITY, f64::min);
                let hi = used.iter().map(|&(_, n)| samples[n].grade).fold(f64::NEG_INFINITY, f64::max);
                let g = member.blocks[id].grade;
                assert!(g >= lo - 1e-15 && g <= hi + 1e-15, "member {m} block {id}");
            }
        }
    }

    #[test]
    fn power_jitter_stays_in_band() {
        let config = InterpolatorConfig::default();
        // Ten holes of four samples: each member keeps eight whole holes.
        let samples: Vec<DrillSample> = (0..40)
            .map(|n| DrillSample { x: (n / 4) as f64, y: 0.0, z: (n % 4) as f64, grade: 0.01, domain: 0 })
            .collect();
        for m in 0..50 {
            let p = member_plan(&config, 1, m, &samples);
            let holes: std::collections::BTreeSet<usize> = p.sample_indices.iter().map(|n| n / 4).collect();
            assert_eq!(holes.len(), 8);
            assert!(p.power >= 1.5 && p.power <= 2.5);
            assert_eq!(p.sample_indices.len(), 32);
        }
    }

    #[test]
    fn aggregate_majority_domain_and_mean_grade() {
        let e = one_block_ensemble(&[(0.3, 1), (0.5, 1), (0.9, 2)]);
        let agg = aggregate(&e);
        assert_eq!(agg.blocks[0].domain, 1);
        assert!((agg.blocks[0].grade - 0.4).abs() < 1e-15);
    }

    #[test]
    fn aggregate_tie_goes_to_lowest_domain() {
        let e = one_block_ensemble(&[(0.1, 4), (0.2, 7), (0.3, 7), (0.5, 4)]);
        let agg = aggregate(&e);
        assert_eq!(agg.blocks[0].domain, 4);
        assert!((agg.blocks[0].grade - 0.3).abs() < 1e-15);
    }

    #[test]
    fn identical_members_aggregate_to_themselves() {
        let d = deposit();
        let e = Ensemble::new(vec![d.truth.clone(); 4], vec![0, 1, 2, 3], InterpolatorConfig::default()).unwrap();
        let agg = aggregate(&e);
        assert_eq!(agg, d.truth);
        let u = uncertainty_field(&e, &agg);
        assert!(u.grade_std.iter().all(|s| *s == 0.0));
        assert!(u.domain_disagreement.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn uncertainty_of_two_grades() {
        let e = one_block_ensemble(&[(0.2, 0), (0.4, 0)]);
        let u = uncertainty_field(&e, &aggregate(&e));
        assert_eq!(u.grade_std[0], 0.1);
    }

    #[test]
    fn disagreement_counts_members() {
        let mut values = vec![(0.01, 3); 9];
        values.push((0.01, 5));
        let e = one_block_ensemble(&values);
        let u = uncertainty_field(&e, &aggregate(&e));
        assert!((u.domain_disagreement[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn network_members_differ_only_by_seed() {
        let d = generate_synthetic_deposit(&SyntheticConfig::new(2, Dims::new(4, 4, 3), 4)).unwrap();
        let config = InterpolatorConfig {
            method: InterpolationMethod::Network,
            net_hidden_layers: vec![6],
            net_max_epochs: 40,
            ..Default::default()
        };
        let e = build_ensemble(&d.samples, &config, 2, 0, &d.truth).unwrap();
        assert_ne!(e.members[0], e.members[1]);
        assert_eq!(member_plan(&config, 0, 1, &d.samples).sample_indices.len(), d.samples.len());
        let again = build_ensemble(&d.samples, &config, 2, 0, &d.truth).unwrap();
        assert_eq!(e, again);
    }
}
