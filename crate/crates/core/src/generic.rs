//! Generic features and the reconstruction problem.
//!
//! An encoder `φ: X → Z` is certified against every learning problem that is
//! consistent with the data marginal `π_X` by one number: twice the smallest
//! probability of failing to reconstruct `x` from `φ(x)`. The optimal decoder
//! is the deterministic MAP rule, so the certificate is cheap to compute.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decision::conditional_entropy;
use crate::error::{Error, Result};
use crate::kernels::{
    argmax, compose, ensure_same, pushforward, Distribution, FiniteSpace, MarkovKernel,
};

/// MAP decoder `Z → X`: each `z` decodes to `argmax_x π_X(x) φ(z|x)`, lowest
/// index on ties. Symbols with zero marginal decode to the prior mode.
pub fn optimal_decoder(features: &MarkovKernel, data: &Distribution) -> Result<MarkovKernel> {
    ensure_same(features.from(), data.space())?;
    let mode = data.mode();
    let targets: Vec<usize> = (0..features.to().len())
        .map(|z| {
            let weights = (0..data.len()).map(|x| data.get(x) * features.get(z, x));
            let best = argmax(weights.clone());
            if weights.fold(0.0, f64::max) > 0.0 {
                best
            } else {
                mode
            }
        })
        .collect();
    MarkovKernel::deterministic(features.to().clone(), data.space().clone(), &targets)
}

/// Probability that `d(φ(x)) ≠ x` for `x ∼ π_X`.
pub fn reconstruction_error(
    features: &MarkovKernel,
    decoder: &MarkovKernel,
    data: &Distribution,
) -> Result<f64> {
    ensure_same(features.from(), data.space())?;
    ensure_same(decoder.to(), data.space())?;
    let round_trip = compose(decoder, features)?;
    let miss: f64 = (0..data.len())
        .map(|x| data.get(x) * (1.0 - round_trip.get(x, x)))
        .sum();
    Ok(miss.clamp(0.0, 1.0))
}

/// Quality `ε ∈ [0, 2]` of `φ` as generic features for `π_X`.
pub fn generic_quality(features: &MarkovKernel, data: &Distribution) -> Result<f64> {
    let d = optimal_decoder(features, data)?;
    Ok(2.0 * reconstruction_error(features, &d, data)?)
}

/// Settings for [`autoencode`].
#[derive(Clone, Debug, PartialEq)]
pub struct AutoencoderConfig {
    pub latent_size: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl AutoencoderConfig {
    pub fn new(latent_size: usize) -> Self {
        Self {
            latent_size,
            max_iters: 1000,
            restarts: 16,
            seed: 0,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
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

#[derive(Clone, Debug, PartialEq)]
pub struct AutoencoderResult {
    pub encoder: MarkovKernel,
    pub decoder: MarkovKernel,
    /// `2 (1 − reconstruction probability)` of the returned pair.
    pub epsilon: f64,
    /// Reconstruction probability after each sweep of the winning restart.
    pub trace: Vec<f64>,
    pub restarts_used: usize,
    /// Index of the restart that produced the result.
    pub best_restart: usize,
    pub seed: u64,
}

/// One restart's deterministic encoder/decoder pair.
struct Run {
    encoder: Vec<usize>,
    decoder: Vec<usize>,
    trace: Vec<f64>,
}

fn map_decode(encoder: &[usize], data: &[f64], k: usize, mode: usize) -> Vec<usize> {
    (0..k)
        .map(|z| {
            let mut best = None;
            let mut best_mass = 0.0;
            for (x, &e) in encoder.iter().enumerate() {
                if e == z && data[x] > best_mass {
                    best_mass = data[x];
                    best = Some(x);
                }
            }
            best.unwrap_or(mode)
        })
        .collect()
}

fn hit_probability(encoder: &[usize], decoder: &[usize], data: &[f64]) -> f64 {
    encoder
        .iter()
        .enumerate()
        .filter(|&(x, &z)| decoder[z] == x)
        .map(|(x, _)| data[x])
        .sum()
}

/// Best encoder for a fixed decoder. Every `x` goes to a symbol that decodes
/// back to it, staying put when it already does. Points that no symbol
/// decodes to score zero wherever they go; they move to an unused symbol if
/// one is left so the next decoder step can pick them up.
fn encode_step(encoder: &mut [usize], decoder: &[usize], data: &[f64], k: usize) {
    let mut used = vec![false; k];
    for (x, &z) in encoder.iter().enumerate() {
        if data[x] > 0.0 {
            used[z] = true;
        }
    }
    for x in 0..encoder.len() {
        if data[x] == 0.0 {
            continue;
        }
        let current = encoder[x];
        if decoder[current] == x {
            continue;
        }
        if let Some(z) = (0..k).find(|&z| decoder[z] == x) {
            encoder[x] = z;
            used[z] = true;
        } else if let Some(z) = (0..k).find(|&z| !used[z]) {
            encoder[x] = z;
            used[z] = true;
        }
    }
}

fn alternate(
    mut encoder: Vec<usize>,
    data: &[f64],
    k: usize,
    mode: usize,
    max_iters: usize,
) -> Run {
    let mut decoder = map_decode(&encoder, data, k, mode);
    let mut trace = vec![hit_probability(&encoder, &decoder, data)];
    for _ in 0..max_iters {
        encode_step(&mut encoder, &decoder, data, k);
        decoder = map_decode(&encoder, data, k, mode);
        let p = hit_probability(&encoder, &decoder, data);
        let last = *trace.last().expect("trace starts non-empty");
        if p <= last + 1e-15 {
            break;
        }
        trace.push(p);
    }
    Run {
        encoder,
        decoder,
        trace,
    }
}

/// Alternating minimization of reconstruction error over deterministic
/// encoder/decoder pairs, best of `restarts` seeded random starts.
///
/// Among restarts with the same reconstruction probability (to 1e-12) the
/// one with the smaller `H(X|Z)` wins, then the lowest restart index.
pub fn autoencode(data: &Distribution, config: &AutoencoderConfig) -> Result<AutoencoderResult> {
    let k = config.latent_size;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "latent size must be at least 1".into(),
        ));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidArgument(
            "at least one restart is required".into(),
        ));
    }
    let n = data.len();
    let mass = data.as_slice();
    let mode = data.mode();
    let latent = FiniteSpace::indexed("z", k).with_name("Z");

    let mut best: Option<(usize, Run, f64)> = None;
    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let init: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let run = alternate(init, mass, k, mode, config.max_iters);
        let p = *run.trace.last().expect("non-empty trace");
        let enc = MarkovKernel::deterministic(data.space().clone(), latent.clone(), &run.encoder)?;
        let h = conditional_entropy(data, &enc)?;
        let replace = match &best {
            None => true,
            Some((_, b, bh)) => {
                let bp = *b.trace.last().expect("non-empty trace");
                p > bp + 1e-12 || (p >= bp - 1e-12 && h < bh - 1e-12)
            }
        };
        if replace {
            best = Some((r, run, h));
        }
    }
    let (best_restart, run, _) = best.expect("restarts >= 1");
    let encoder = MarkovKernel::deterministic(data.space().clone(), latent.clone(), &run.encoder)?;
    let decoder = MarkovKernel::deterministic(latent, data.space().clone(), &run.decoder)?;
    let miss: f64 = (0..n)
        .filter(|&x| run.decoder[run.encoder[x]] != x)
        .map(|x| mass[x])
        .sum();
    Ok(AutoencoderResult {
        encoder,
        decoder,
        epsilon: 2.0 * miss,
        trace: run.trace,
        restarts_used: config.restarts,
        best_restart,
        seed: config.seed,
    })
}

/// A greedily learned chain `X → Z₁ → … → Zₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureChain {
    pub layers: Vec<MarkovKernel>,
    pub decoders: Vec<MarkovKernel>,
    /// `ε_i` of layer `i` against the prior it was trained on.
    pub layer_quality: Vec<f64>,
    /// `ε` of the composed encoder against the data prior.
    pub total_quality: f64,
    /// Prior seen by each layer: `π_X`, then its successive pushforwards.
    pub layer_priors: Vec<Distribution>,
    pub composed: MarkovKernel,
}

impl FeatureChain {
    /// `Σ ε_i`, an upper bound on `total_quality`.
    pub fn quality_bound(&self) -> f64 {
        self.layer_quality.iter().sum()
    }

    pub fn bound_holds(&self) -> bool {
        self.total_quality <= self.quality_bound() + 1e-6
    }
}

/// Learns one autoencoder per entry of `sizes`, each against the pushforward
/// of the previous layer. Layer `i` uses seed `config.seed + i`.
pub fn stack(
    data: &Distribution,
    sizes: &[usize],
    config: &AutoencoderConfig,
) -> Result<FeatureChain> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one layer size is required".into(),
        ));
    }
    let mut layers = Vec::with_capacity(sizes.len());
    let mut decoders = Vec::with_capacity(sizes.len());
    let mut layer_quality = Vec::with_capacity(sizes.len());
    let mut layer_priors = vec![data.clone()];
    let mut composed = MarkovKernel::identity(data.space().clone());
    for (i, &k) in sizes.iter().enumerate() {
        let prior = layer_priors.last().expect("non-empty").clone();
        let cfg = AutoencoderConfig {
            latent_size: k,
            seed: config.seed.wrapping_add(i as u64),
            ..config.clone()
        };
        let res = autoencode(&prior, &cfg)?;
        let name = format!("Z{}", i + 1);
        let to = res.encoder.to().clone().with_name(&name);
        let enc = res.encoder.relabel(prior.space().clone(), to.clone())?;
        let dec = res.decoder.relabel(to, prior.space().clone())?;
        layer_priors.push(pushforward(&enc, &prior)?);
        composed = compose(&enc, &composed)?;
        layer_quality.push(res.epsilon);
        layers.push(enc);
        decoders.push(dec);
    }
    layer_priors.pop();
    let total_quality = generic_quality(&composed, data)?;
    let chain = FeatureChain {
        layers,
        decoders,
        layer_quality,
        total_quality,
        layer_priors,
        composed,
    };
    debug_assert!(chain.bound_holds(), "stacking bound violated");
    Ok(chain)
}

/// Both sides of `ε ≤ H(X|Z)` for an encoder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HellmanRaviv {
    pub epsilon: f64,
    /// `H(X|Z)` in bits.
    pub conditional_entropy: f64,
    pub holds: bool,
}

pub fn hellman_raviv_check(features: &MarkovKernel, data: &Distribution) -> Result<HellmanRaviv> {
    let epsilon = generic_quality(features, data)?;
    let h = conditional_entropy(data, features)?;
    Ok(HellmanRaviv {
        epsilon,
        conditional_entropy: h,
        holds: epsilon <= h + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Distribution {
        Distribution::new(
            FiniteSpace::new(["a", "b", "c"]).unwrap(),
            vec![0.5, 0.3, 0.2],
        )
        .unwrap()
    }

    fn merge_ab(data: &Distribution) -> MarkovKernel {
        MarkovKernel::deterministic(
            data.space().clone(),
            FiniteSpace::new(["z1", "z2"]).unwrap(),
            &[0, 0, 1],
        )
        .unwrap()
    }

    #[test]
    fn decoder_of_identity_is_identity() {
        let d = abc();
        let id = MarkovKernel::identity(d.space().clone());
        assert_eq!(optimal_decoder(&id, &d).unwrap(), id);
        assert_eq!(generic_quality(&id, &d).unwrap(), 0.0);
    }

    #[test]
    fn merge_example() {
        let d = abc();
        let phi = merge_ab(&d);
        let dec = optimal_decoder(&phi, &d).unwrap();
        assert_eq!(dec.deterministic_targets(), Some(vec![0, 2]));
        assert!((reconstruction_error(&phi, &dec, &d).unwrap() - 0.3).abs() < 1e-15);
        assert!((generic_quality(&phi, &d).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn merge_example_against_all_decoders() {
        let d = abc();
        let phi = merge_ab(&d);
        let mut best = f64::INFINITY;
        for a in 0..3 {
            for b in 0..3 {
                let dec = MarkovKernel::deterministic(phi.to().clone(), d.space().clone(), &[a, b])
                    .unwrap();
                best = best.min(reconstruction_error(&phi, &dec, &d).unwrap());
            }
        }
        assert!((best - 0.3).abs() < 1e-15);
    }

    #[test]
    fn uninformative_encoder_decodes_to_mode() {
        let d = abc();
        let bullet = MarkovKernel::uninformative(d.space().clone());
        let dec = optimal_decoder(&bullet, &d).unwrap();
        assert_eq!(dec.deterministic_targets(), Some(vec![0]));
        let u = Distribution::uniform(FiniteSpace::range(5));
        let b5 = MarkovKernel::uninformative(u.space().clone());
        let e = reconstruction_error(&b5, &optimal_decoder(&b5, &u).unwrap(), &u).unwrap();
        assert!((e - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_symbol_decodes_to_mode() {
        let d = abc();
        let phi = MarkovKernel::deterministic(d.space().clone(), FiniteSpace::range(3), &[1, 1, 1])
            .unwrap();
        let dec = optimal_decoder(&phi, &d).unwrap();
        assert_eq!(dec.deterministic_targets(), Some(vec![0, 0, 0]));
    }

    #[test]
    fn autoencoder_examples() {
        let d = abc();
        let r = autoencode(&d, &AutoencoderConfig::new(3)).unwrap();
        assert_eq!(r.epsilon, 0.0);
        let r = autoencode(&d, &AutoencoderConfig::new(1)).unwrap();
        assert!((r.epsilon - 2.0 * (1.0 - 0.5)).abs() < 1e-12);
        let u4 = Distribution::uniform(FiniteSpace::range(4));
        for seed in 0..20 {
            let r = autoencode(&u4, &AutoencoderConfig::new(2).with_seed(seed)).unwrap();
            assert!((r.epsilon - 1.0).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn autoencoder_single_restart_fills_unused_symbols() {
        // With k ≥ |support| every restart reaches zero error.
        let d =
            Distribution::new(FiniteSpace::range(6), vec![0.3, 0.0, 0.2, 0.25, 0.15, 0.1]).unwrap();
        for seed in 0..50 {
            let cfg = AutoencoderConfig::new(5).with_restarts(1).with_seed(seed);
            let r = autoencode(&d, &cfg).unwrap();
            assert!(r.epsilon.abs() < 1e-12, "seed {seed}: {}", r.epsilon);
        }
    }

    #[test]
    fn autoencoder_trace_and_epsilon_agree() {
        let d = Distribution::new(FiniteSpace::range(5), vec![0.1, 0.3, 0.2, 0.25, 0.15]).unwrap();
        let r = autoencode(&d, &AutoencoderConfig::new(2).with_seed(3)).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.trace.len() <= 5 * 2 + 2);
        let p = *r.trace.last().unwrap();
        assert!((r.epsilon - 2.0 * (1.0 - p)).abs() < 1e-9);
        let direct = 2.0 * reconstruction_error(&r.encoder, &r.decoder, &d).unwrap();
        assert!((direct - r.epsilon).abs() < 1e-9);
    }

    #[test]
    fn autoencoder_rejects_bad_config() {
        let d = abc();
        assert!(autoencode(&d, &AutoencoderConfig::new(0)).is_err());
        assert!(autoencode(&d, &AutoencoderConfig::new(2).with_restarts(0)).is_err());
    }

    #[test]
    fn stack_uniform_four() {
        let u4 = Distribution::uniform(FiniteSpace::range(4));
        let chain = stack(&u4, &[2, 1], &AutoencoderConfig::new(2)).unwrap();
        assert!((chain.layer_quality[0] - 1.0).abs() < 1e-12);
        // The entropy tie-break keeps the balanced split, so the second layer
        // sees (1/2, 1/2).
        assert_eq!(chain.layer_priors[1].as_slice(), &[0.5, 0.5]);
        assert!((chain.layer_quality[1] - 1.0).abs() < 1e-12);
        assert!((chain.total_quality - 1.5).abs() < 1e-12);
        assert!(chain.bound_holds());
    }

    #[test]
    fn stack_full_width_is_lossless() {
        let d = abc();
        let chain = stack(&d, &[3], &AutoencoderConfig::new(3)).unwrap();
        assert_eq!(chain.layer_quality, vec![0.0]);
        assert_eq!(chain.total_quality, 0.0);
        assert!(stack(&d, &[], &AutoencoderConfig::new(1)).is_err());
    }

    #[test]
    fn hellman_raviv_examples() {
        let d = abc();
        let id = MarkovKernel::identity(d.space().clone());
        let hr = hellman_raviv_check(&id, &d).unwrap();
        assert_eq!(
            (hr.epsilon, hr.conditional_entropy, hr.holds),
            (0.0, 0.0, true)
        );
        let u2 = Distribution::uniform(FiniteSpace::range(2));
        let hr =
            hellman_raviv_check(&MarkovKernel::uninformative(u2.space().clone()), &u2).unwrap();
        assert!((hr.epsilon - 1.0).abs() < 1e-15 && (hr.conditional_entropy - 1.0).abs() < 1e-12);
        assert!(hr.holds);
    }
}
