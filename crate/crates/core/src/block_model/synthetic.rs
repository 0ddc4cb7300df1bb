use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Block, BlockModel, Dims, DrillSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub dims: Dims,
    pub block_size: [f64; 3],
    pub n_domains: u32,
    pub n_drillholes: usize,
    /// Tonnes per cubic metre.
    pub density: f64,
}

impl SyntheticConfig {
    pub fn new(seed: u64, dims: Dims, n_drillholes: usize) -> Self {
        SyntheticConfig {
            seed,
            dims,
            block_size: [10.0, 10.0, 10.0],
            n_domains: 3,
            n_drillholes,
            density: 2.7,
        }
    }
}

const BODIES: std::ops::RangeInclusive<usize> = 2..=4;
const PEAK: std::ops::Range<f64> = 0.03..0.08;
/// Wavelength of the in-body texture, in blocks.
const TEXTURE_BLOCKS: std::ops::Range<f64> = 2.5..5.0;
const TEXTURE_AMPLITUDE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDeposit {
    pub truth: BlockModel,
    pub samples: Vec<DrillSample>,
}

struct OreBody {
    center: [f64; 3],
    radii: [f64; 3],
    peak: f64,
    /// Short-range grade variation inside the body.
    texture: Wave,
}

struct Wave {
    freq: [f64; 3],
    phase: f64,
}

/// Seeded ground-truth copper deposit plus vertical drillhole samples.
///
/// Grade is a low background with smooth undulation plus two to four
/// ellipsoidal high-grade bodies with short-range texture; domains are depth bands with wavy
/// boundaries. Each drillhole samples every bench at its centroid height.
pub fn generate_synthetic_deposit(config: &SyntheticConfig) -> Result<SyntheticDeposit> {
    let dims = config.dims;
    if dims.is_empty() {
        return Err(Error::Invalid(format!("synthetic deposit dims {dims} must be positive")));
    }
    if config.n_domains == 0 {
        return Err(Error::Invalid("synthetic deposit needs at least one domain".to_string()));
    }
    if config.block_size.iter().any(|s| !(s.is_finite() && *s > 0.0)) || config.density.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Invalid("block size and density must be positive".to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let extent = [
        dims.nx as f64 * config.block_size[0],
        dims.ny as f64 * config.block_size[1],
        dims.nz as f64 * config.block_size[2],
    ];

    let n_bodies = rng.gen_range(BODIES);
    let bodies: Vec<OreBody> = (0..n_bodies)
        .map(|_| OreBody {
            center: [
                rng.gen_range(0.25..0.75) * extent[0],
                rng.gen_range(0.25..0.75) * extent[1],
                rng.gen_range(0.35..0.7) * extent[2],
            ],
            radii: [
                rng.gen_range(0.15..0.35) * extent[0],
                rng.gen_range(0.15..0.35) * extent[1],
                rng.gen_range(0.2..0.4) * extent[2],
            ],
            peak: rng.gen_range(PEAK),
            texture: Wave {
                freq: [
                    std::f64::consts::TAU / (rng.gen_range(TEXTURE_BLOCKS) * config.block_size[0]),
                    std::f64::consts::TAU / (rng.gen_range(TEXTURE_BLOCKS) * config.block_size[1]),
                    std::f64::consts::TAU / (rng.gen_range(TEXTURE_BLOCKS) * config.block_size[2]),
                ],
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            },
        })
        .collect();
    let waves: Vec<Wave> = (0..3)
        .map(|_| Wave {
            freq: [
                rng.gen_range(0.5..2.0) * std::f64::consts::TAU / extent[0],
                rng.gen_range(0.5..2.0) * std::f64::consts::TAU / extent[1],
                rng.gen_range(0.5..2.0) * std::f64::consts::TAU / extent[2],
            ],
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    let boundary_phase = rng.gen_range(0.0..std::f64::consts::TAU);

    let volume: f64 = config.block_size.iter().product();
    let tonnage = volume * config.density;
    let origin = [0.0, 0.0, extent[2]];

    let mut blocks = Vec::with_capacity(dims.len());
    for id in 0..dims.len() {
        let index = dims.index_of(id);
        // Local coordinates with depth measured down from the surface.
        let local = [
            (index.i as f64 + 0.5) * config.block_size[0],
            (index.j as f64 + 0.5) * config.block_size[1],
            (index.k as f64 + 0.5) * config.block_size[2],
        ];
        let undulation: f64 = waves
            .iter()
            .map(|w| (w.freq[0] * local[0] + w.freq[1] * local[1] + w.freq[2] * local[2] + w.phase).sin())
            .sum::<f64>()
            / waves.len() as f64;
        let mut grade = 0.0015 + 0.0009 * undulation;
        for body in &bodies {
            let r2: f64 = (0..3)
                .map(|a| ((local[a] - body.center[a]) / body.radii[a]).powi(2))
                .sum();
            if r2 < 1.0 {
                let t = &body.texture;
                let texture = (t.freq[0] * local[0] + t.phase).sin()
                    * (t.freq[1] * local[1] + 0.5 * t.phase).sin()
                    * (t.freq[2] * local[2] + 0.25 * t.phase).sin();
                grade += body.peak * (1.0 - r2).powf(1.5) * (1.0 + TEXTURE_AMPLITUDE * texture);
            }
        }
        let depth_frac = local[2] / extent[2]
            + 0.08 * (std::f64::consts::TAU * local[0] / extent[0] + boundary_phase).sin();
        let domain = ((depth_frac * config.n_domains as f64).floor().max(0.0) as u32).min(config.n_domains - 1);
        blocks.push(Block {
            index,
            tonnage,
            grade: grade.clamp(0.0, 1.0),
            domain,
        });
    }
    let truth = BlockModel {
        dims,
        block_size: config.block_size,
        origin,
        blocks,
        element_name: "Cu".to_string(),
    };

    let mut samples = Vec::with_capacity(config.n_drillholes * dims.nz);
    for _ in 0..config.n_drillholes {
        let x = rng.gen_range(0.0..extent[0]);
        let y = rng.gen_range(0.0..extent[1]);
        for k in 0..dims.nz {
            let z = origin[2] - (k as f64 + 0.5) * config.block_size[2];
            let id = truth.locate([x, y, z]).expect("drillhole inside model");
            let block = &truth.blocks[id];
            samples.push(DrillSample {
                x,
                y,
                z,
                grade: block.grade,
                domain: block.domain,
            });
        }
    }
    Ok(SyntheticDeposit { truth, samples })
}
