//! Supervised feature learning by alternating minimization.
//!
//! For a fixed problem `(L, π, T)` the feature gap of `φ: X → Z` is the
//! expected regret between the data posteriors `T*(x)` and the feature
//! posteriors. Relaxing the feature posteriors to free centroids `Û(z)` and
//! adding `β·I(X; Z)` in its variational form gives
//!
//! ```text
//! E_x E_{z∼φ(x)} D(T*(x), Û(z)) + β E_x KL(φ(x) ‖ π̂_Z)
//! ```
//!
//! which is minimized one block at a time: centroids are posterior means,
//! `π̂_Z` is the pushforward of `π_X`, and the encoder is a Gibbs
//! distribution (or a hard assignment when `β = 0`). Each block update is
//! exact, so the objective never increases.
//!
//! The KL term is measured in nats so that the Gibbs update is the exact
//! minimizer; reported mutual information is in bits.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decision::{feature_gap, kl_divergence_nats, mutual_information, LossMatrix};
use crate::error::{Error, Result};
use crate::kernels::{argmin, bayes_inverse, ensure_same, Distribution, FiniteSpace, MarkovKernel};

/// Improvement below which the iteration stops.
pub const IB_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct IbConfig {
    pub latent_size: usize,
    pub beta: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl IbConfig {
    pub fn new(latent_size: usize, beta: f64) -> Self {
        Self {
            latent_size,
            beta,
            max_iters: 500,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Encoder, centroid posteriors and latent prior of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct IbState {
    pub encoder: MarkovKernel,
    /// `Û: Z → Θ`.
    pub centroids: MarkovKernel,
    /// `π̂_Z`.
    pub latent_prior: Distribution,
    pub beta: f64,
    pub objective_trace: Vec<f64>,
}

/// Problem data shared by every step: `π_X` and the posteriors `T*(x)`.
#[derive(Clone, Debug)]
pub struct IbProblem {
    loss: LossMatrix,
    prior: Distribution,
    experiment: MarkovKernel,
    data: Vec<f64>,
    posteriors: Vec<Vec<f64>>,
}

/// Plain-vector working copy of an [`IbState`].
#[derive(Clone, Debug)]
pub struct IbWork {
    /// `encoder[x][z]`.
    pub encoder: Vec<Vec<f64>>,
    /// `centroids[z][θ]`.
    pub centroids: Vec<Vec<f64>>,
    pub latent_prior: Vec<f64>,
    pub beta: f64,
}

impl IbProblem {
    pub fn new(loss: &LossMatrix, prior: &Distribution, experiment: &MarkovKernel) -> Result<Self> {
        ensure_same(loss.theta(), experiment.from())?;
        let inv = bayes_inverse(experiment, prior)?;
        let posteriors = (0..experiment.to().len())
            .map(|x| inv.kernel.matrix().column(x).iter().copied().collect())
            .collect();
        Ok(Self {
            loss: loss.clone(),
            prior: prior.clone(),
            experiment: experiment.clone(),
            data: inv.marginal.as_slice().to_vec(),
            posteriors,
        })
    }

    pub fn data_marginal(&self) -> &[f64] {
        &self.data
    }

    pub fn posteriors(&self) -> &[Vec<f64>] {
        &self.posteriors
    }

    fn regret(&self, x: usize, centroid: &[f64]) -> f64 {
        self.loss.regret_slices(&self.posteriors[x], centroid)
    }

    /// `E_x E_{z∼φ(x)} D(T*(x), Û(z))`.
    pub fn distortion(&self, w: &IbWork) -> f64 {
        let mut total = 0.0;
        for (x, &px) in self.data.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (z, &q) in w.encoder[x].iter().enumerate() {
                if q > 0.0 {
                    total += px * q * self.regret(x, &w.centroids[z]);
                }
            }
        }
        total
    }

    /// `E_x KL(φ(x) ‖ π̂_Z)` in nats.
    pub fn rate(&self, w: &IbWork) -> f64 {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &px)| px > 0.0)
            .map(|(x, &px)| px * kl_divergence_nats(&w.encoder[x], &w.latent_prior))
            .sum()
    }

    pub fn objective(&self, w: &IbWork) -> f64 {
        let d = self.distortion(w);
        if w.beta == 0.0 {
            d
        } else {
            d + w.beta * self.rate(w)
        }
    }

    /// `Û(z) := E[T*(x) | z]`; symbols without mass keep their centroid.
    pub fn centroid_step(&self, w: &mut IbWork) {
        let nt = self.prior.len();
        for z in 0..w.centroids.len() {
            let mut acc = vec![0.0; nt];
            let mut mass = 0.0;
            for (x, &px) in self.data.iter().enumerate() {
                let wgt = px * w.encoder[x][z];
                if wgt > 0.0 {
                    mass += wgt;
                    for (a, p) in acc.iter_mut().zip(&self.posteriors[x]) {
                        *a += wgt * p;
                    }
                }
            }
            if mass > 0.0 {
                acc.iter_mut().for_each(|a| *a /= mass);
                w.centroids[z] = acc;
            }
        }
    }

    /// `π̂_Z := φ(π_X)`.
    pub fn prior_step(&self, w: &mut IbWork) {
        let k = w.latent_prior.len();
        let mut p = vec![0.0; k];
        for (x, &px) in self.data.iter().enumerate() {
            for (slot, q) in p.iter_mut().zip(&w.encoder[x]) {
                *slot += px * q;
            }
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        w.latent_prior = p;
    }

    /// Gibbs update `φ(z|x) ∝ π̂_Z(z) exp(−D(T*(x), Û(z)) / β)`, or the
    /// lowest-index regret minimizer when `β = 0`.
    pub fn encoder_step(&self, w: &mut IbWork) {
        let k = w.centroids.len();
        for x in 0..self.data.len() {
            let regrets: Vec<f64> = (0..k).map(|z| self.regret(x, &w.centroids[z])).collect();
            let row = &mut w.encoder[x];
            if w.beta == 0.0 {
                let z = argmin(regrets.iter().copied());
                row.iter_mut().for_each(|v| *v = 0.0);
                row[z] = 1.0;
                continue;
            }
            let logits: Vec<f64> = (0..k)
                .map(|z| {
                    if w.latent_prior[z] > 0.0 {
                        w.latent_prior[z].ln() - regrets[z] / w.beta
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (v, l) in row.iter_mut().zip(&logits) {
                *v = (l - top).exp();
                total += *v;
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
    }

    /// Seeds centroids at data posteriors, each new one drawn with
    /// probability proportional to `π_X(x)` times its regret against the
    /// closest centroid so far.
    fn seed_centroids(&self, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
        let first = sample(&self.data, rng);
        centroids.push(self.posteriors[first].clone());
        while centroids.len() < k {
            let weights: Vec<f64> = self
                .data
                .iter()
                .enumerate()
                .map(|(x, &px)| {
                    let r = centroids
                        .iter()
                        .map(|c| self.regret(x, c))
                        .fold(f64::INFINITY, f64::min);
                    px * r.max(0.0)
                })
                .collect();
            let pick = if weights.iter().sum::<f64>() > 1e-15 {
                sample(&weights, rng)
            } else {
                sample(&self.data, rng)
            };
            centroids.push(self.posteriors[pick].clone());
        }
        centroids
    }

    fn initial(&self, config: &IbConfig) -> IbWork {
        let k = config.latent_size;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut w = IbWork {
            encoder: vec![vec![1.0 / k as f64; k]; self.data.len()],
            centroids: self.seed_centroids(k, &mut rng),
            latent_prior: vec![1.0 / k as f64; k],
            beta: config.beta,
        };
        self.encoder_step(&mut w);
        w
    }

    /// Converts a kernel-valued state into working vectors.
    pub fn work_from_state(&self, state: &IbState) -> Result<IbWork> {
        ensure_same(state.encoder.from(), self.experiment.to())?;
        ensure_same(state.centroids.to(), self.experiment.from())?;
        ensure_same(state.centroids.from(), state.encoder.to())?;
        ensure_same(state.latent_prior.space(), state.encoder.to())?;
        let enc = state.encoder.matrix();
        let cen = state.centroids.matrix();
        Ok(IbWork {
            encoder: (0..enc.ncols())
                .map(|x| enc.column(x).iter().copied().collect())
                .collect(),
            centroids: (0..cen.ncols())
                .map(|z| cen.column(z).iter().copied().collect())
                .collect(),
            latent_prior: state.latent_prior.as_slice().to_vec(),
            beta: state.beta,
        })
    }

    fn state_from_work(&self, w: &IbWork, trace: Vec<f64>) -> IbState {
        let k = w.latent_prior.len();
        let latent = FiniteSpace::indexed("z", k).with_name("Z");
        let nx = self.data.len();
        let nt = self.prior.len();
        let enc = DMatrix::from_fn(k, nx, |z, x| w.encoder[x][z]);
        let cen = DMatrix::from_fn(nt, k, |t, z| w.centroids[z][t]);
        IbState {
            encoder: MarkovKernel::from_computed(self.experiment.to().clone(), latent.clone(), enc),
            centroids: MarkovKernel::from_computed(
                latent.clone(),
                self.experiment.from().clone(),
                cen,
            ),
            latent_prior: Distribution::from_computed(latent, w.latent_prior.clone().into()),
            beta: w.beta,
            objective_trace: trace,
        }
    }

    /// Alternating minimization from a seeded start.
    pub fn learn(&self, config: &IbConfig) -> Result<IbState> {
        if config.latent_size == 0 {
            return Err(Error::InvalidArgument(
                "latent size must be at least 1".into(),
            ));
        }
        if !(config.beta >= 0.0 && config.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be a finite nonnegative number, got {}",
                config.beta
            )));
        }
        let mut w = self.initial(config);
        let mut trace = vec![self.objective(&w)];
        for _ in 0..config.max_iters {
            self.centroid_step(&mut w);
            self.prior_step(&mut w);
            self.encoder_step(&mut w);
            let obj = self.objective(&w);
            let prev = *trace.last().expect("non-empty trace");
            trace.push(obj);
            if prev - obj < IB_TOL {
                break;
            }
        }
        // Leave centroids and latent prior consistent with the final encoder.
        self.centroid_step(&mut w);
        self.prior_step(&mut w);
        trace.push(self.objective(&w));
        Ok(self.state_from_work(&w, trace))
    }

    /// Feature gap `V(φ∘T) − V(T)` of the learned encoder.
    pub fn feature_gap(&self, state: &IbState) -> Result<f64> {
        feature_gap(&self.loss, &self.prior, &self.experiment, &state.encoder)
    }

    /// `I(X; Z)` in bits under `π_X`.
    pub fn mutual_information(&self, state: &IbState) -> Result<f64> {
        let data =
            Distribution::from_computed(self.experiment.to().clone(), self.data.clone().into());
        mutual_information(&data, &state.encoder)
    }
}

fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Objective of a state for the problem `(L, π, T)`; `+∞` when the encoder
/// puts mass where `π̂_Z` has none and `β > 0`.
pub fn ib_objective(
    state: &IbState,
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
) -> Result<f64> {
    let p = IbProblem::new(loss, prior, experiment)?;
    let w = p.work_from_state(state)?;
    Ok(p.objective(&w))
}

pub fn ib_learn(
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
    config: &IbConfig,
) -> Result<IbState> {
    IbProblem::new(loss, prior, experiment)?.learn(config)
}
