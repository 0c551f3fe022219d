//! Continuous occupancy model.
//!
//! A random-Fourier-feature map approximates the RBF kernel
//! `k(x, x') = exp(-γ‖x - x'‖²)`, and a logistic-regression classifier
//! trained on `±1`-labeled positions turns the feature space into a
//! continuous occupancy field. Occupancy probability and its spatial
//! gradient are both closed-form queries, which is what the planner needs.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::worlds::dataset::LabeledPointCloud;

/// Numerically stable logistic sigmoid.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Random Fourier feature map for the RBF kernel.
///
/// Feature `j` of a point `x` is `sqrt(2/m)·cos(ω_j·x + b_j)` with
/// frequencies `ω_j ~ Normal(0, 2γ·I)` and phases `b_j ~ Uniform[0, 2π)`,
/// so that feature dot products approximate the kernel in expectation.
/// Construction is fully determined by `(gamma, num_features, dim, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    gamma: f64,
    num_features: usize,
    dim: usize,
    seed: u64,
    /// Row-major `num_features × dim` spectral samples.
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    scale: f64,
}

impl FeatureMap {
    /// Draws a feature map. Frequencies are sampled feature-by-feature
    /// (all components of `ω_0`, then `ω_1`, ...), then all phases, so the
    /// layout is reproducible bit-for-bit from the seed.
    pub fn new(gamma: f64, num_features: usize, dim: usize, seed: u64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if num_features == 0 {
            return Err(Error::invalid("num_features must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // exp(-γ‖δ‖²) matches E[cos(ω·δ)] when ω has variance 2γ per component.
        let normal = Normal::new(0.0, (2.0 * gamma).sqrt())
            .map_err(|e| Error::invalid(format!("bad spectral distribution: {e}")))?;
        let mut frequencies = Vec::with_capacity(num_features * dim);
        for _ in 0..num_features {
            for _ in 0..dim {
                frequencies.push(normal.sample(&mut rng));
            }
        }
        let phases: Vec<f64> = (0..num_features).map(|_| rng.random::<f64>() * TAU).collect();
        Ok(FeatureMap {
            gamma,
            num_features,
            dim,
            seed,
            frequencies,
            phases,
            scale: (2.0 / num_features as f64).sqrt(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point dimension {} does not match feature map dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn angle(&self, j: usize, x: &[f64]) -> f64 {
        let row = &self.frequencies[j * self.dim..(j + 1) * self.dim];
        let mut a = self.phases[j];
        for (w, xi) in row.iter().zip(x) {
            a += w * xi;
        }
        a
    }

    /// The explicit feature vector `Φ̂(x)`; every entry is bounded by
    /// `sqrt(2/m)` so the vector norm never exceeds `sqrt(2)`.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok((0..self.num_features)
            .map(|j| self.scale * self.angle(j, x).cos())
            .collect())
    }

    /// Kernel estimate between two points.
    ///
    /// Evaluated in the phase-marginalised form `(1/m)·Σ_j cos(ω_j·(x - x2))`,
    /// which equals the expectation of the feature dot product over the random
    /// phases. Unlike the raw dot product it depends on `x - x2` only, so
    /// symmetry, joint-translation invariance, and `k(x, x) = 1` hold exactly
    /// rather than statistically.
    pub fn approximate_kernel(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x2)?;
        let delta: Vec<f64> = x.iter().zip(x2).map(|(a, b)| a - b).collect();
        let mut total = 0.0;
        for j in 0..self.num_features {
            let row = &self.frequencies[j * self.dim..(j + 1) * self.dim];
            let mut a = 0.0;
            for (w, d) in row.iter().zip(&delta) {
                a += w * d;
            }
            total += a.cos();
        }
        Ok(total / self.num_features as f64)
    }

    /// Exact RBF kernel `exp(-γ‖x - x2‖²)` this map approximates.
    pub fn exact_kernel(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(x2)?;
        let sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((-self.gamma * sq).exp())
    }
}

/// Training hyperparameters for the occupancy classifier.
///
/// Plain SGD with mini-batch size 1 and an elastic-net penalty; the step
/// size for global update `i` is `step0 / (1 + step_decay·i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub step0: f64,
    pub step_decay: f64,
    pub l1: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            step0: 0.1,
            step_decay: 0.01,
            l1: 1e-4,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// Recorded facts about how a model was fitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub step0: f64,
    pub step_decay: f64,
    pub l1: f64,
    pub l2: f64,
    pub train_seed: u64,
    /// Feature construction variant, for reproduction by other tooling.
    pub feature_form: String,
    /// Regularised NLL after each epoch.
    pub epoch_nll: Vec<f64>,
    pub final_nll: f64,
}

impl TrainingMeta {
    fn manual() -> Self {
        TrainingMeta {
            epochs: 0,
            step0: 0.0,
            step_decay: 0.0,
            l1: 0.0,
            l2: 0.0,
            train_seed: 0,
            feature_form: FEATURE_FORM.to_string(),
            epoch_nll: Vec::new(),
            final_nll: f64::NAN,
        }
    }
}

const FEATURE_FORM: &str = "single-cosine-random-phase";
const SNAPSHOT_VERSION: u32 = 1;

/// probabilities are clamped to this range for log-likelihood evaluation
/// only; predictions are never clamped.
const NLL_CLAMP: f64 = 1e-12;

/// Trained occupancy model: a feature map plus a weight vector.
///
/// Immutable after training; queries are safe to share across threads.
#[derive(Debug, Clone)]
pub struct OccupancyModel {
    feature_map: FeatureMap,
    weights: Vec<f64>,
    meta: TrainingMeta,
}

/// Serialized model snapshot. The feature map is reconstructed from its
/// scalars, so the file stays small and the round trip is exact.
#[derive(Debug, Serialize, Deserialize)]
struct ModelSnapshot {
    version: u32,
    gamma: f64,
    num_features: usize,
    dim: usize,
    feature_seed: u64,
    weights: Vec<f64>,
    meta: TrainingMeta,
}

impl OccupancyModel {
    /// Fits weights by SGD on the regularised negative log-likelihood.
    ///
    /// Deterministic given the data order and `config.seed`: samples are
    /// visited in a seeded shuffle each epoch, and the per-epoch NLL is
    /// recorded so training health can be audited later.
    pub fn train(
        data: &LabeledPointCloud,
        feature_map: FeatureMap,
        config: &TrainConfig,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("cannot train on an empty dataset"));
        }
        if !(config.step0 > 0.0) {
            return Err(Error::invalid("training step size must be positive"));
        }
        for s in data.samples() {
            feature_map.check_dim(&s.position)?;
        }

        let n = data.len();
        let m = feature_map.num_features;
        let mut weights = vec![0.0; m];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let mut features = vec![0.0; m];
        let mut step_index: u64 = 0;
        let mut epoch_nll = Vec::with_capacity(config.epochs);

        for _epoch in 0..config.epochs {
            shuffle(&mut order, &mut rng);
            for &idx in &order {
                let sample = &data.samples()[idx];
                for (j, f) in features.iter_mut().enumerate() {
                    *f = feature_map.scale * feature_map.angle(j, &sample.position).cos();
                }
                let z: f64 = weights.iter().zip(&features).map(|(w, f)| w * f).sum();
                let target = if sample.label > 0 { 1.0 } else { 0.0 };
                let residual = sigmoid(z) - target;
                let eta = config.step0 / (1.0 + config.step_decay * step_index as f64);
                let reg_scale = 1.0 / n as f64;
                for (w, f) in weights.iter_mut().zip(&features) {
                    let reg = reg_scale * (2.0 * config.l2 * *w + config.l1 * w.signum());
                    *w -= eta * (residual * f + reg);
                }
                step_index += 1;
            }
            let nll = regularised_nll(&weights, &feature_map, data, config.l1, config.l2);
            if !nll.is_finite() {
                return Err(Error::numeric(format!(
                    "training diverged: non-finite NLL after epoch {_epoch}"
                )));
            }
            epoch_nll.push(nll);
        }

        let final_nll = *epoch_nll.last().unwrap_or(&f64::NAN);
        Ok(OccupancyModel {
            feature_map,
            weights,
            meta: TrainingMeta {
                epochs: config.epochs,
                step0: config.step0,
                step_decay: config.step_decay,
                l1: config.l1,
                l2: config.l2,
                train_seed: config.seed,
                feature_form: FEATURE_FORM.to_string(),
                epoch_nll,
                final_nll,
            },
        })
    }

    /// Wraps explicit weights around a feature map (model files, tests).
    pub fn with_weights(feature_map: FeatureMap, weights: Vec<f64>) -> Result<Self> {
        Self::from_parts(feature_map, weights, TrainingMeta::manual())
    }

    fn from_parts(feature_map: FeatureMap, weights: Vec<f64>, meta: TrainingMeta) -> Result<Self> {
        if weights.len() != feature_map.num_features {
            return Err(Error::invalid(format!(
                "weight vector length {} does not match {} features",
                weights.len(),
                feature_map.num_features
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        Ok(OccupancyModel { feature_map, weights, meta })
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.feature_map.dim
    }

    fn linear_score(&self, x: &[f64]) -> f64 {
        let mut z = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            z += w * self.feature_map.angle(j, x).cos();
        }
        z * self.feature_map.scale
    }

    /// Occupancy probability `p(y = +1 | x) = σ(w·Φ̂(x))`.
    ///
    /// The complement `p(y = -1 | x) = 1 - p(y = +1 | x)` holds by
    /// construction; 0.5 denotes unknown space.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.feature_map.check_dim(x)?;
        Ok(sigmoid(self.linear_score(x)))
    }

    /// Spatial gradient of the occupancy probability:
    /// `σ(z)(1-σ(z)) · (∂Φ̂/∂x)ᵀ w` with
    /// `∂φ_j/∂x = -sqrt(2/m)·sin(ω_j·x + b_j)·ω_j`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.feature_map.check_dim(x)?;
        let dim = self.feature_map.dim;
        let mut z = 0.0;
        let mut acc = vec![0.0; dim];
        for (j, w) in self.weights.iter().enumerate() {
            let (sin, cos) = self.feature_map.angle(j, x).sin_cos();
            z += w * cos;
            let row = &self.feature_map.frequencies[j * dim..(j + 1) * dim];
            for (a, omega) in acc.iter_mut().zip(row) {
                *a += w * sin * omega;
            }
        }
        z *= self.feature_map.scale;
        let p = sigmoid(z);
        let factor = -p * (1.0 - p) * self.feature_map.scale;
        for a in acc.iter_mut() {
            *a *= factor;
        }
        Ok(acc)
    }

    /// Fraction of samples classified on the correct side of 0.5.
    pub fn accuracy(&self, data: &LabeledPointCloud) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::invalid("accuracy of an empty dataset is undefined"));
        }
        let mut correct = 0usize;
        for s in data.samples() {
            let p = self.predict(&s.position)?;
            if (p > 0.5) == (s.label > 0) {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        let snapshot = ModelSnapshot {
            version: SNAPSHOT_VERSION,
            gamma: self.feature_map.gamma,
            num_features: self.feature_map.num_features,
            dim: self.feature_map.dim,
            feature_seed: self.feature_map.seed,
            weights: self.weights.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&snapshot)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snapshot: ModelSnapshot = serde_json::from_str(text)?;
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model snapshot version {}",
                snapshot.version
            )));
        }
        let fm = FeatureMap::new(
            snapshot.gamma,
            snapshot.num_features,
            snapshot.dim,
            snapshot.feature_seed,
        )?;
        Self::from_parts(fm, snapshot.weights, snapshot.meta)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// Full-dataset regularised NLL with the probability clamped away from
/// 0 and 1 for the logarithm only.
pub fn regularised_nll(
    weights: &[f64],
    fm: &FeatureMap,
    data: &LabeledPointCloud,
    l1: f64,
    l2: f64,
) -> f64 {
    let mut nll = 0.0;
    for s in data.samples() {
        let mut z = 0.0;
        for (j, w) in weights.iter().enumerate() {
            z += w * fm.angle(j, &s.position).cos();
        }
        z *= fm.scale;
        let p = sigmoid(z).clamp(NLL_CLAMP, 1.0 - NLL_CLAMP);
        nll -= if s.label > 0 { p.ln() } else { (1.0 - p).ln() };
    }
    let l1_term: f64 = weights.iter().map(|w| w.abs()).sum();
    let l2_term: f64 = weights.iter().map(|w| w * w).sum();
    nll + l1 * l1_term + l2 * l2_term
}

/// Fisher-Yates shuffle driven by the caller's RNG.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}
