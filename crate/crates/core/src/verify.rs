//! Seeded property suites over random finite instances.
//!
//! Every trial draws from its own ChaCha8 stream keyed by the run seed, the
//! suite and the trial index, so results do not depend on thread count or
//! on which other suites run. Trials are evaluated in parallel and merged in
//! index order.
//!
//! A check records a slack per trial, `bound + tolerance − observed`; a
//! trial passes when its slack is nonnegative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decision::{bayes_rule, conditional_entropy, feature_gap, value, LossMatrix};
use crate::deficiency::{transported_risk, weighted_deficiency, weighted_directed_deficiency};
use crate::error::{Error, Result};
use crate::generic::{autoencode, generic_quality, stack, AutoencoderConfig};
use crate::ib::{IbConfig, IbProblem};
use crate::kernels::{
    bayes_inverse, compose, pushforward, Distribution, FiniteSpace, MarkovKernel,
};

/// Random instances used by the suites.
pub mod random {
    use super::*;

    /// Size in `lo..=max(lo, hi)`.
    pub fn dim(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
        rng.random_range(lo..=hi.max(lo))
    }

    /// Flat-Dirichlet draw; with `sparse`, entries are zeroed with
    /// probability 0.15 while keeping at least one positive.
    pub fn weights(rng: &mut impl Rng, n: usize, sparse: bool) -> Vec<f64> {
        let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        if sparse && n > 1 {
            let keep = rng.random_range(0..n);
            for (i, v) in w.iter_mut().enumerate() {
                if i != keep && rng.random::<f64>() < 0.15 {
                    *v = 0.0;
                }
            }
        }
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    }

    pub fn distribution(rng: &mut impl Rng, space: &FiniteSpace, sparse: bool) -> Distribution {
        Distribution::new(space.clone(), weights(rng, space.len(), sparse))
            .expect("normalized weights form a distribution")
    }

    pub fn kernel(rng: &mut impl Rng, from: &FiniteSpace, to: &FiniteSpace) -> MarkovKernel {
        let cols: Vec<Vec<f64>> = (0..from.len())
            .map(|_| weights(rng, to.len(), true))
            .collect();
        MarkovKernel::from_columns(from.clone(), to.clone(), &cols).expect("columns are stochastic")
    }

    pub fn deterministic(rng: &mut impl Rng, from: &FiniteSpace, to: &FiniteSpace) -> MarkovKernel {
        let targets: Vec<usize> = (0..from.len())
            .map(|_| rng.random_range(0..to.len()))
            .collect();
        MarkovKernel::deterministic(from.clone(), to.clone(), &targets).expect("targets in range")
    }

    /// Deterministic half of the time, otherwise a random kernel.
    pub fn encoder(rng: &mut impl Rng, from: &FiniteSpace, to: &FiniteSpace) -> MarkovKernel {
        if rng.random_bool(0.5) {
            deterministic(rng, from, to)
        } else {
            kernel(rng, from, to)
        }
    }

    /// Uniform entries in `[-s, s]` with `s` log-uniform in `[0.1, 10]`.
    pub fn loss(rng: &mut impl Rng, theta: &FiniteSpace, actions: &FiniteSpace) -> LossMatrix {
        let scale = 10f64.powf(rng.random_range(-1.0..=1.0));
        let rows: Vec<Vec<f64>> = (0..theta.len())
            .map(|_| {
                (0..actions.len())
                    .map(|_| scale * rng.random_range(-1.0..=1.0))
                    .collect()
            })
            .collect();
        LossMatrix::from_rows(theta.clone(), actions.clone(), &rows).expect("finite entries")
    }

    pub fn space(prefix: &str, n: usize) -> FiniteSpace {
        FiniteSpace::indexed(prefix, n)
    }
}

use random::{dim, space};

/// Brute-force reference computations that avoid the library's shortcuts.
pub mod oracle {
    use super::*;

    /// Minimum Bayes risk over all `|A|^|X|` deterministic rules.
    pub fn value_by_rules(
        loss: &LossMatrix,
        prior: &Distribution,
        experiment: &MarkovKernel,
    ) -> f64 {
        let nx = experiment.to().len();
        let na = loss.actions().len();
        let nt = prior.len();
        let mut rule = vec![0usize; nx];
        let mut best = f64::INFINITY;
        loop {
            let mut risk = 0.0;
            for th in 0..nt {
                for (x, &a) in rule.iter().enumerate() {
                    risk += prior.get(th) * experiment.get(x, th) * loss.get(th, a);
                }
            }
            best = best.min(risk);
            if !advance(&mut rule, na) {
                return best;
            }
        }
    }

    /// Best reconstruction error `2(1 − P[x̂ = x])` over every
    /// deterministic encoder `X → k` and decoder `k → X`.
    pub fn best_reconstruction(data: &[f64], k: usize) -> f64 {
        let n = data.len();
        let mut enc = vec![0usize; n];
        let mut best = 0.0f64;
        loop {
            let mut dec = vec![0usize; k];
            loop {
                let p: f64 = (0..n).filter(|&x| dec[enc[x]] == x).map(|x| data[x]).sum();
                best = best.max(p);
                if !advance(&mut dec, n) {
                    break;
                }
            }
            if !advance(&mut enc, k) {
                return 2.0 * (1.0 - best);
            }
        }
    }

    /// `E_x E_{z∼φ(x)}` of the regret of acting on the feature posterior
    /// when the data posterior is true.
    pub fn expected_regret(
        loss: &LossMatrix,
        prior: &Distribution,
        experiment: &MarkovKernel,
        features: &MarkovKernel,
    ) -> f64 {
        let nt = prior.len();
        let nx = experiment.to().len();
        let nz = features.to().len();
        let na = loss.actions().len();
        // Unnormalized joints are enough: the acts only depend on direction.
        let joint_x = |x: usize| -> Vec<f64> {
            (0..nt)
                .map(|t| experiment.get(x, t) * prior.get(t))
                .collect()
        };
        let joint_z = |z: usize| -> Vec<f64> {
            (0..nt)
                .map(|t| {
                    (0..nx)
                        .map(|x| features.get(z, x) * experiment.get(x, t))
                        .sum::<f64>()
                        * prior.get(t)
                })
                .collect()
        };
        let risk = |w: &[f64], a: usize| -> f64 { (0..nt).map(|t| w[t] * loss.get(t, a)).sum() };
        let best_act = |w: &[f64]| -> usize {
            let mut best = 0;
            for a in 1..na {
                if risk(w, a) < risk(w, best) {
                    best = a;
                }
            }
            best
        };
        let z_acts: Vec<usize> = (0..nz).map(|z| best_act(&joint_z(z))).collect();
        let mut total = 0.0;
        for x in 0..nx {
            let w = joint_x(x);
            let own = risk(&w, best_act(&w));
            for (z, &a) in z_acts.iter().enumerate() {
                total += features.get(z, x) * (risk(&w, a) - own);
            }
        }
        total
    }

    /// Odometer increment over digits in `0..base`; false after the last.
    fn advance(digits: &mut [usize], base: usize) -> bool {
        for d in digits.iter_mut() {
            *d += 1;
            if *d < base {
                return true;
            }
            *d = 0;
        }
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Randomization,
    ValueGap,
    FeatureDeficiency,
    GenericFeatures,
    Stacking,
    Triangle,
    RegretIdentity,
    Ib,
    HellmanRaviv,
    Oracles,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Randomization,
        Suite::ValueGap,
        Suite::FeatureDeficiency,
        Suite::GenericFeatures,
        Suite::Stacking,
        Suite::Triangle,
        Suite::RegretIdentity,
        Suite::Ib,
        Suite::HellmanRaviv,
        Suite::Oracles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Randomization => "randomization",
            Suite::ValueGap => "value-gap",
            Suite::FeatureDeficiency => "feature-deficiency",
            Suite::GenericFeatures => "generic-features",
            Suite::Stacking => "stacking",
            Suite::Triangle => "triangle",
            Suite::RegretIdentity => "regret-identity",
            Suite::Ib => "ib",
            Suite::HellmanRaviv => "hellman-raviv",
            Suite::Oracles => "oracles",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Trial count used when none is given.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Randomization | Suite::Triangle => 200,
            Suite::HellmanRaviv => 1000,
            _ => 100,
        }
    }

    pub fn run(self, config: &VerifyConfig) -> SuiteReport {
        let checks = match self {
            Suite::Randomization => randomization(config),
            Suite::ValueGap => value_gap(config),
            Suite::FeatureDeficiency => feature_deficiency(config),
            Suite::GenericFeatures => generic_features(config),
            Suite::Stacking => stacking(config),
            Suite::Triangle => triangle(config),
            Suite::RegretIdentity => regret_identity(config),
            Suite::Ib => ib(config),
            Suite::HellmanRaviv => hellman_raviv(config),
            Suite::Oracles => oracles(config),
        };
        SuiteReport {
            suite: self.name(),
            passed: checks.iter().all(CheckReport::ok),
            checks,
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Overrides each suite's default trial count.
    pub trials: Option<usize>,
    pub seed: u64,
    /// Largest space size drawn.
    pub max_dim: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: None,
            seed: 0,
            max_dim: 6,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.max_dim < 2 {
            return Err(Error::InvalidArgument(
                "max dimension must be at least 2".into(),
            ));
        }
        Ok(())
    }

    fn trials_for(&self, suite: Suite) -> usize {
        self.trials.unwrap_or_else(|| suite.default_trials())
    }

    fn rng(&self, suite: Suite, trial: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(suite as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(trial as u64);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub trials: usize,
    pub passed: usize,
    /// Passing trials needed for the check to hold.
    pub required: usize,
    pub tolerance: f64,
    /// Smallest `bound + tolerance − observed` seen.
    pub worst_slack: f64,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.passed >= self.required
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

/// Runs every suite in order.
pub fn run_all(config: &VerifyConfig) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|s| s.run(config)).collect()
}

struct CheckSpec {
    name: &'static str,
    tolerance: f64,
    /// Fraction of trials that must pass.
    required: f64,
}

const fn check(name: &'static str, tolerance: f64) -> CheckSpec {
    CheckSpec {
        name,
        tolerance,
        required: 1.0,
    }
}

/// Runs `trial` for each index and folds its per-check slacks. A trial
/// returning an error fails every check.
fn run_trials<F>(
    config: &VerifyConfig,
    suite: Suite,
    specs: &[CheckSpec],
    trial: F,
) -> Vec<CheckReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    let n = config.trials_for(suite);
    let slacks: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = config.rng(suite, i);
            match trial(&mut rng) {
                Ok(s) => {
                    debug_assert_eq!(s.len(), specs.len());
                    s
                }
                Err(_) => vec![f64::NEG_INFINITY; specs.len()],
            }
        })
        .collect();
    specs
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let column = slacks.iter().map(|s| s[c]);
            CheckReport {
                check: spec.name,
                trials: n,
                passed: column.clone().filter(|s| *s >= 0.0).count(),
                required: (spec.required * n as f64).ceil() as usize,
                tolerance: spec.tolerance,
                worst_slack: column.fold(f64::INFINITY, f64::min),
            }
        })
        .collect()
}

fn randomization(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    let specs = [check("value-bound", TOL), check("transported-rule", TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::Randomization, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let xs = space("x", dim(rng, 2, d));
        let ys = space("y", dim(rng, 2, d));
        let acts = space("a", dim(rng, 2, d));
        let t = random::kernel(rng, &theta, &xs);
        let u = random::kernel(rng, &theta, &ys);
        let prior = random::distribution(rng, &theta, true);
        let loss = random::loss(rng, &theta, &acts);
        let delta = weighted_directed_deficiency(&t, &u, &prior)?;
        let bound = value(&loss, &prior, &u)? + delta.delta * loss.sup_norm();
        let value_slack = bound + TOL - value(&loss, &prior, &t)?;
        let rule = bayes_rule(&loss, &prior, &u)?;
        let (risk, risk_bound) = transported_risk(&loss, &prior, &t, &u, &rule, &delta.witness)?;
        Ok(vec![value_slack, risk_bound + TOL - risk])
    })
}

/// Two-action losses `[[0, c0], [c1, 0]]` with each row shifted to be
/// centered, which minimizes the sup norm without changing value gaps.
fn centered_cost_loss(theta: &FiniteSpace, acts: &FiniteSpace, c0: f64, c1: f64) -> LossMatrix {
    let rows = vec![vec![-c0 / 2.0, c0 / 2.0], vec![c1 / 2.0, -c1 / 2.0]];
    LossMatrix::from_rows(theta.clone(), acts.clone(), &rows).expect("finite entries")
}

/// Grid point `i` of `n` in the open unit interval.
fn grid(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

fn value_gap(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    const LOSSES: usize = 500;
    const GRID: usize = 200;
    const TIGHT_TOL: f64 = 0.05;
    let specs = [
        check("upper-bound", TOL),
        check("binary-near-tight", TIGHT_TOL),
    ];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::ValueGap, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let xs = space("x", dim(rng, 2, d));
        let ys = space("y", dim(rng, 2, d));
        let t = random::kernel(rng, &theta, &xs);
        let u = random::kernel(rng, &theta, &ys);
        let prior = random::distribution(rng, &theta, true);
        let big = weighted_deficiency(&t, &u, &prior)?;
        let mut worst = 0.0f64;
        for _ in 0..LOSSES {
            let acts = space("a", dim(rng, 2, d));
            let loss = random::loss(rng, &theta, &acts);
            let gap = (value(&loss, &prior, &t)? - value(&loss, &prior, &u)?).abs();
            worst = worst.max(gap / loss.sup_norm());
        }
        let upper = big + TOL - worst;

        let theta = space("t", 2);
        let acts = space("a", 2);
        let small = d.min(4);
        let xs = space("x", dim(rng, 2, small));
        let ys = space("y", dim(rng, 2, small));
        let t = random::kernel(rng, &theta, &xs);
        let u = random::kernel(rng, &theta, &ys);
        let prior = random::distribution(rng, &theta, false);
        let big = weighted_deficiency(&t, &u, &prior)?;
        let mut sup = 0.0f64;
        for i in 0..GRID {
            let c = grid(i, GRID);
            let loss = centered_cost_loss(&theta, &acts, c, 1.0 - c);
            let gap = (value(&loss, &prior, &t)? - value(&loss, &prior, &u)?).abs();
            sup = sup.max(gap / loss.sup_norm());
        }
        Ok(vec![upper, sup - (big - TIGHT_TOL)])
    })
}

fn feature_deficiency(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    let specs = [check("feature-deficiency", TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::FeatureDeficiency, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let xs = space("x", dim(rng, 2, d));
        let zs = space("z", dim(rng, 1, d));
        let t = random::kernel(rng, &theta, &xs);
        let prior = random::distribution(rng, &theta, true);
        let phi = random::encoder(rng, &xs, &zs);
        let big = weighted_deficiency(&t, &compose(&phi, &t)?, &prior)?;
        let eps = generic_quality(&phi, &pushforward(&t, &prior)?)?;
        Ok(vec![eps + TOL - big])
    })
}

fn generic_features(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    const PROBLEMS: usize = 100;
    let specs = [
        check("feature-gap-bound", TOL),
        check("quality-is-deficiency", TOL),
    ];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::GenericFeatures, &specs, |rng| {
        let xs = space("x", dim(rng, 2, d));
        let zs = space("z", dim(rng, 1, d));
        let phi = random::encoder(rng, &xs, &zs);
        let mut worst = f64::INFINITY;
        let mut converse = f64::INFINITY;
        for p in 0..PROBLEMS {
            let theta = space("t", dim(rng, 2, d));
            let acts = space("a", dim(rng, 2, d));
            let t = random::kernel(rng, &theta, &xs);
            let prior = random::distribution(rng, &theta, true);
            let loss = random::loss(rng, &theta, &acts);
            let data = pushforward(&t, &prior)?;
            let eps = generic_quality(&phi, &data)?;
            let gap = feature_gap(&loss, &prior, &t, &phi)?;
            worst = worst.min(eps * loss.sup_norm() + TOL - gap);
            if p == 0 {
                let id = MarkovKernel::identity(xs.clone());
                let lp = weighted_directed_deficiency(&phi, &id, &data)?.delta;
                converse = TOL - (eps - lp).abs();
            }
        }
        Ok(vec![worst, converse])
    })
}

fn stacking(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    let specs = [check("sum-bound", TOL)];
    let d = cfg.max_dim;
    let mut reports = run_trials(cfg, Suite::Stacking, &specs, |rng| {
        let n = dim(rng, 2, d);
        let xs = space("x", n);
        let data = random::distribution(rng, &xs, true);
        let k1 = dim(rng, 1, n);
        let k2 = dim(rng, 1, k1);
        let config = AutoencoderConfig::new(k1)
            .with_restarts(4)
            .with_seed(rng.random());
        let chain = stack(&data, &[k1, k2], &config)?;
        Ok(vec![chain.quality_bound() + TOL - chain.total_quality])
    });

    // Uniform mass on four symbols: the first layer of a [2, 1] chain must
    // match the exhaustive optimum exactly.
    let uniform = Distribution::uniform(space("x", 4));
    let config = AutoencoderConfig::new(2).with_seed(cfg.seed);
    let slack = match stack(&uniform, &[2, 1], &config) {
        Ok(chain) => {
            0.0 - (chain.layer_quality[0] - oracle::best_reconstruction(uniform.as_slice(), 2))
                .abs()
        }
        Err(_) => f64::NEG_INFINITY,
    };
    reports.push(CheckReport {
        check: "uniform4-first-layer-exact",
        trials: 1,
        passed: usize::from(slack >= 0.0),
        required: 1,
        tolerance: 0.0,
        worst_slack: slack,
    });
    reports
}

fn triangle(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-6;
    const SELF_TOL: f64 = 1e-7;
    let specs = [check("triangle", TOL), check("self-distance", SELF_TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::Triangle, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let prior = random::distribution(rng, &theta, true);
        let ks: Vec<MarkovKernel> = (0..3)
            .map(|i| {
                let out = space(&format!("x{i}_"), dim(rng, 2, d));
                random::kernel(rng, &theta, &out)
            })
            .collect();
        let d12 = weighted_deficiency(&ks[0], &ks[1], &prior)?;
        let d23 = weighted_deficiency(&ks[1], &ks[2], &prior)?;
        let d13 = weighted_deficiency(&ks[0], &ks[2], &prior)?;
        let own = weighted_deficiency(&ks[0], &ks[0], &prior)?;
        Ok(vec![d12 + d23 + TOL - d13, SELF_TOL - own])
    })
}

fn regret_identity(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-9;
    let specs = [check("regret-identity", TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::RegretIdentity, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let xs = space("x", dim(rng, 2, d));
        let zs = space("z", dim(rng, 1, d));
        let acts = space("a", dim(rng, 2, d));
        let t = random::kernel(rng, &theta, &xs);
        let prior = random::distribution(rng, &theta, true);
        let phi = random::encoder(rng, &xs, &zs);
        let loss = random::loss(rng, &theta, &acts);
        let gap = feature_gap(&loss, &prior, &t, &phi)?;
        let regret = oracle::expected_regret(&loss, &prior, &t, &phi);
        // Relative to the loss scale so both sides are compared at unit size.
        Ok(vec![TOL - (gap - regret).abs() / loss.sup_norm()])
    })
}

/// Number of distinct posteriors among data symbols with positive mass.
fn distinct_posteriors(t: &MarkovKernel, prior: &Distribution) -> Result<usize> {
    let inv = bayes_inverse(t, prior)?;
    let mut seen: Vec<Distribution> = Vec::new();
    for x in inv.marginal.support() {
        let p = inv.kernel.column(x);
        let new = seen.iter().all(|q| {
            p.as_slice()
                .iter()
                .zip(q.as_slice())
                .any(|(a, b)| (a - b).abs() > 1e-12)
        });
        if new {
            seen.push(p);
        }
    }
    Ok(seen.len())
}

fn ib(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-9;
    const BETAS: [f64; 7] = [0.0, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0];
    let specs = [check("monotone-trace", TOL), check("beta0-zero-gap", TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::Ib, &specs, |rng| {
        let theta = space("t", dim(rng, 2, d));
        let xs = space("x", dim(rng, 2, d));
        let acts = space("a", dim(rng, 2, d));
        let t = random::kernel(rng, &theta, &xs);
        let prior = random::distribution(rng, &theta, true);
        let loss = random::loss(rng, &theta, &acts);
        let problem = IbProblem::new(&loss, &prior, &t)?;
        let beta = BETAS[rng.random_range(0..BETAS.len())];
        let config = IbConfig::new(dim(rng, 1, d), beta).with_seed(rng.random());
        let state = problem.learn(&config)?;
        let rise = state
            .objective_trace
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let monotone = TOL - rise.max(0.0);

        let k = distinct_posteriors(&t, &prior)? + rng.random_range(0..=1);
        let config = IbConfig::new(k, 0.0).with_seed(rng.random());
        let state = problem.learn(&config)?;
        let distortion = *state.objective_trace.last().expect("non-empty trace");
        let gap = problem.feature_gap(&state)?;
        Ok(vec![monotone, TOL - distortion.max(gap) / loss.sup_norm()])
    })
}

fn hellman_raviv(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const TOL: f64 = 1e-9;
    let specs = [check("quality-below-entropy", TOL)];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::HellmanRaviv, &specs, |rng| {
        let xs = space("x", dim(rng, 2, d));
        let zs = space("z", dim(rng, 1, d));
        let phi = random::encoder(rng, &xs, &zs);
        let data = random::distribution(rng, &xs, true);
        let eps = generic_quality(&phi, &data)?;
        let h = conditional_entropy(&data, &phi)?;
        Ok(vec![h + TOL - eps])
    })
}

fn oracles(cfg: &VerifyConfig) -> Vec<CheckReport> {
    const VALUE_TOL: f64 = 1e-9;
    const LP_TOL: f64 = 1e-6;
    const AE_TOL: f64 = 1e-9;
    let specs = [
        check("value-vs-rules", VALUE_TOL),
        check("map-vs-lp", LP_TOL),
        CheckSpec {
            name: "autoencoder-finds-optimum",
            tolerance: AE_TOL,
            required: 0.95,
        },
        check("autoencoder-never-beats-optimum", AE_TOL),
    ];
    let d = cfg.max_dim;
    run_trials(cfg, Suite::Oracles, &specs, |rng| {
        let small = d.min(4);
        let theta = space("t", dim(rng, 2, small));
        let xs = space("x", dim(rng, 2, small));
        let acts = space("a", dim(rng, 2, small));
        let t = random::kernel(rng, &theta, &xs);
        let prior = random::distribution(rng, &theta, true);
        let loss = random::loss(rng, &theta, &acts);
        let v = value(&loss, &prior, &t)?;
        let brute = oracle::value_by_rules(&loss, &prior, &t);
        let value_slack = VALUE_TOL - (v - brute).abs() / loss.sup_norm();

        let xs = space("x", dim(rng, 2, d));
        let zs = space("z", dim(rng, 1, d));
        let phi = random::encoder(rng, &xs, &zs);
        let data = random::distribution(rng, &xs, true);
        let map = generic_quality(&phi, &data)?;
        let id = MarkovKernel::identity(xs.clone());
        let lp = weighted_directed_deficiency(&phi, &id, &data)?.delta;
        let lp_slack = LP_TOL - (map - lp).abs();

        let xs = space("x", dim(rng, 2, d.min(5)));
        let k = dim(rng, 1, 3);
        let data = random::distribution(rng, &xs, true);
        let best = oracle::best_reconstruction(data.as_slice(), k);
        let config = AutoencoderConfig::new(k)
            .with_restarts(16)
            .with_seed(rng.random());
        let found = autoencode(&data, &config)?.epsilon;
        Ok(vec![
            value_slack,
            lp_slack,
            AE_TOL - (found - best).abs(),
            found - best + AE_TOL,
        ])
    })
}
