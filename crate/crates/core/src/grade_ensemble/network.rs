use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InterpolatorConfig;
use crate::block_model::DrillSample;
use crate::error::{Error, Result};

/// Fully connected tanh network mapping normalised (x, y, z) to a grade
/// regression output and one logit per domain.
///
/// Parameters live in one flat vector, layer by layer: the `out × in`
/// weight matrix in row-major order followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInterpolator {
    sizes: Vec<usize>,
    params: Vec<f64>,
    domains: Vec<u32>,
    lower: [f64; 3],
    upper: [f64; 3],
    grade_mean: f64,
    grade_scale: f64,
    pub epochs_run: usize,
    pub final_loss: f64,
}

/// Samples in network coordinates: normalised inputs, standardised grades
/// and domain class indices.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    inputs: Vec<[f64; 3]>,
    targets: Vec<f64>,
    classes: Vec<usize>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

impl NetworkInterpolator {
    /// Untrained network with seeded Xavier-uniform weights and zero biases.
    pub fn initialize(samples: &[DrillSample], hidden: &[usize], seed: u64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid("network training needs at least two samples".to_string()));
        }
        if hidden.contains(&0) {
            return Err(Error::Invalid("hidden layer widths must be >= 1".to_string()));
        }
        let mut domains: Vec<u32> = samples.iter().map(|s| s.domain).collect();
        domains.sort_unstable();
        domains.dedup();

        let mut lower = [f64::INFINITY; 3];
        let mut upper = [f64::NEG_INFINITY; 3];
        for s in samples {
            for (a, v) in s.position().into_iter().enumerate() {
                lower[a] = lower[a].min(v);
                upper[a] = upper[a].max(v);
            }
        }
        let grades: Vec<f64> = samples.iter().map(|s| s.grade).collect();
        let grade_mean = crate::stats::mean(&grades);
        let std = crate::stats::population_std(&grades);
        let grade_scale = if std > 1e-12 { std } else { 1.0 };

        let mut sizes = vec![3];
        sizes.extend_from_slice(hidden);
        sizes.push(1 + domains.len());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }

        Ok(NetworkInterpolator {
            sizes,
            params,
            domains,
            lower,
            upper,
            grade_mean,
            grade_scale,
            epochs_run: 0,
            final_loss: f64::NAN,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    fn normalize(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in 0..3 {
            let span = self.upper[a] - self.lower[a];
            out[a] = if span > 0.0 {
                2.0 * (p[a] - self.lower[a]) / span - 1.0
            } else {
                0.0
            };
        }
        out
    }

    pub fn training_set(&self, samples: &[DrillSample]) -> TrainingSet {
        TrainingSet {
            inputs: samples.iter().map(|s| self.normalize(s.position())).collect(),
            targets: samples
                .iter()
                .map(|s| (s.grade - self.grade_mean) / self.grade_scale)
                .collect(),
            classes: samples
                .iter()
                .map(|s| self.domains.binary_search(&s.domain).unwrap_or(0))
                .collect(),
        }
    }

    /// Activations of every layer; the last layer is linear.
    fn forward(&self, input: [f64; 3], acts: &mut Vec<Vec<f64>>) {
        acts.clear();
        acts.push(input.to_vec());
        let mut offset = 0;
        let n_layers = self.sizes.len() - 1;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let weights = &self.params[offset..offset + fan_in * fan_out];
            let biases = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let prev = &acts[l];
            let mut next: Vec<f64> = (0..fan_out)
                .map(|o| {
                    let row = &weights[o * fan_in..(o + 1) * fan_in];
                    biases[o] + row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>()
                })
                .collect();
            if l + 1 < n_layers {
                next.iter_mut().for_each(|z| *z = z.tanh());
            }
            acts.push(next);
            offset += fan_in * fan_out + fan_out;
        }
    }

    /// Mean squared grade error plus mean domain cross-entropy, with its
    /// gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, data: &TrainingSet) -> (f64, Vec<f64>) {
        let n = data.len() as f64;
        let n_layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }

        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let mut acts = Vec::new();
        for s in 0..data.len() {
            self.forward(data.inputs[s], &mut acts);
            let out = &acts[n_layers];
            let (grade_loss, mut delta) = output_loss(out, data.targets[s], data.classes[s]);
            loss += grade_loss;
            delta.iter_mut().for_each(|d| *d /= n);

            for l in (0..n_layers).rev() {
                let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
                let base = offsets[l];
                let prev = &acts[l];
                for o in 0..fan_out {
                    let row = base + o * fan_in;
                    for i in 0..fan_in {
                        grad[row + i] += delta[o] * prev[i];
                    }
                    grad[base + fan_in * fan_out + o] += delta[o];
                }
                if l > 0 {
                    let weights = &self.params[base..base + fan_in * fan_out];
                    delta = (0..fan_in)
                        .map(|i| {
                            let back: f64 = (0..fan_out).map(|o| weights[o * fan_in + i] * delta[o]).sum();
                            back * (1.0 - prev[i] * prev[i])
                        })
                        .collect();
                }
            }
        }
        (loss / n, grad)
    }

    pub fn loss(&self, data: &TrainingSet) -> f64 {
        let mut acts = Vec::new();
        let total: f64 = (0..data.len())
            .map(|s| {
                self.forward(data.inputs[s], &mut acts);
                output_loss(&acts[self.sizes.len() - 1], data.targets[s], data.classes[s]).0
            })
            .sum();
        total / data.len() as f64
    }

    /// Grade (clamped to [0, 1]) and most likely domain at a world point.
    pub fn predict(&self, point: [f64; 3]) -> (f64, u32) {
        let mut acts = Vec::new();
        self.forward(self.normalize(point), &mut acts);
        let out = &acts[self.sizes.len() - 1];
        let grade = (self.grade_mean + self.grade_scale * out[0]).clamp(0.0, 1.0);
        let mut best = 0;
        for c in 1..self.domains.len() {
            if out[1 + c] > out[1 + best] {
                best = c;
            }
        }
        (grade, self.domains[best])
    }
}

/// Loss of one sample and its derivative with respect to the outputs.
fn output_loss(out: &[f64], target: f64, class: usize) -> (f64, Vec<f64>) {
    let logits = &out[1..];
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    let err = out[0] - target;
    let cross_entropy = -(logits[class] - max - sum.ln());
    let mut delta = Vec::with_capacity(out.len());
    delta.push(2.0 * err);
    delta.extend(exp.iter().enumerate().map(|(c, e)| e / sum - if c == class { 1.0 } else { 0.0 }));
    (err * err + cross_entropy, delta)
}

/// Full-batch gradient descent from seeded initial weights until the loss
/// reaches `net_fit_tolerance` or `net_max_epochs` is exhausted.
pub fn train_network(samples: &[DrillSample], config: &InterpolatorConfig, seed: u64) -> Result<NetworkInterpolator> {
    let mut net = NetworkInterpolator::initialize(samples, &config.net_hidden_layers, seed)?;
    let data = net.training_set(samples);
    let mut epoch = 0;
    loop {
        let (loss, grad) = net.loss_and_gradient(&data);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        net.final_loss = loss;
        if loss <= config.net_fit_tolerance || epoch >= config.net_max_epochs {
            break;
        }
        for (p, g) in net.params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        epoch += 1;
    }
    net.epochs_run = epoch;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, seed: u64) -> Vec<DrillSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| DrillSample {
                x: rng.gen_range(0.0..100.0),
                y: rng.gen_range(0.0..100.0),
                z: rng.gen_range(0.0..50.0),
                grade: rng.gen_range(0.0..0.02),
                domain: rng.gen_range(0..3),
            })
            .collect()
    }

    #[test]
    fn constant_target_converges() {
        let s: Vec<_> = samples(12, 1)
            .into_iter()
            .map(|s| DrillSample { grade: 0.01, domain: 2, ..s })
            .collect();
        let config = InterpolatorConfig {
            net_hidden_layers: vec![6],
            net_fit_tolerance: 1e-7,
            net_max_epochs: 200_000,
            learning_rate: 0.1,
            ..Default::default()
        };
        let net = train_network(&s, &config, 3).unwrap();
        assert!(net.final_loss <= 1e-7, "loss {}", net.final_loss);
        assert!(net.epochs_run < 200_000);
        // Each squared residual is bounded by n times the mean loss.
        let bound = (s.len() as f64 * net.final_loss).sqrt() + 1e-12;
        for p in &s {
            let (g, d) = net.predict(p.position());
            assert!((g - 0.01).abs() <= bound);
            assert_eq!(d, 2);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let s = samples(20, 2);
        let config = InterpolatorConfig {
            net_hidden_layers: vec![5, 4],
            net_max_epochs: 50,
            ..Default::default()
        };
        let a = train_network(&s, &config, 11).unwrap();
        let b = train_network(&s, &config, 11).unwrap();
        assert_eq!(a, b);
        let c = train_network(&s, &config, 12).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn training_lowers_the_loss() {
        let s = samples(30, 4);
        let config = InterpolatorConfig {
            net_hidden_layers: vec![8],
            net_fit_tolerance: 0.0,
            net_max_epochs: 300,
            ..Default::default()
        };
        let init = NetworkInterpolator::initialize(&s, &[8], 5).unwrap();
        let before = init.loss(&init.training_set(&s));
        let trained = train_network(&s, &config, 5).unwrap();
        assert!(trained.final_loss < before);
        assert_eq!(trained.epochs_run, 300);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let s = samples(1, 0);
        assert!(train_network(&s, &InterpolatorConfig::default(), 0).is_err());
        let s = samples(3, 0);
        assert!(NetworkInterpolator::initialize(&s, &[4, 0], 0).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let s = samples(10, 6);
        let config = InterpolatorConfig {
            net_hidden_layers: vec![4],
            net_fit_tolerance: 0.0,
            net_max_epochs: 500,
            learning_rate: 1e200,
            ..Default::default()
        };
        match train_network(&s, &config, 1) {
            Err(Error::Diverged { epoch }) => assert!(epoch > 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = samples(5, 9);
        let net = NetworkInterpolator::initialize(&s, &[4, 3], 21).unwrap();
        let data = net.training_set(&s);
        let (_, grad) = net.loss_and_gradient(&data);
        let h = 1e-5;
        for p in 0..grad.len() {
            let mut plus = net.clone();
            plus.params_mut()[p] += h;
            let mut minus = net.clone();
            minus.params_mut()[p] -= h;
            let numeric = (plus.loss(&data) - minus.loss(&data)) / (2.0 * h);
            let denom = grad[p].abs().max(numeric.abs()).max(1e-7);
            assert!((grad[p] - numeric).abs() / denom < 1e-4, "param {p}: {} vs {numeric}", grad[p]);
        }
    }
}
