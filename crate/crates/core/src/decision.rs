//! Losses, risk, value and the information measures built on them.
//!
//! The Bayes risk function `L̄(P) = min_a E_{θ∼P} L(θ, a)` is never stored;
//! every use evaluates the minimum over actions at a given posterior.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{
    argmin, bayes_inverse, compose, ensure_same, pushforward, Distribution, FiniteSpace,
    MarkovKernel,
};

/// A bounded loss `L: Θ × A → ℝ`, stored as a `|Θ| × |A|` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LossMatrix {
    theta: FiniteSpace,
    actions: FiniteSpace,
    values: DMatrix<f64>,
    sup_norm: f64,
}

impl LossMatrix {
    pub fn new(theta: FiniteSpace, actions: FiniteSpace, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != (theta.len(), actions.len()) {
            return Err(Error::InvalidLoss(format!(
                "loss is {}×{}, expected {}×{} (hypotheses × actions)",
                values.nrows(),
                values.ncols(),
                theta.len(),
                actions.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidLoss(format!("non-finite entry {v}")));
        }
        let sup_norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(Self {
            theta,
            actions,
            values,
            sup_norm,
        })
    }

    /// `rows[θ][a]`.
    pub fn from_rows(theta: FiniteSpace, actions: FiniteSpace, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != theta.len() || rows.iter().any(|r| r.len() != actions.len()) {
            return Err(Error::InvalidLoss(format!(
                "expected {} rows of {} entries",
                theta.len(),
                actions.len()
            )));
        }
        let m = DMatrix::from_fn(theta.len(), actions.len(), |t, a| rows[t][a]);
        Self::new(theta, actions, m)
    }

    /// 0-1 loss with the hypotheses as actions.
    pub fn zero_one(space: FiniteSpace) -> Self {
        let n = space.len();
        let m = DMatrix::from_fn(n, n, |t, a| if t == a { 0.0 } else { 1.0 });
        Self::new(space.clone(), space, m).expect("0-1 loss is finite")
    }

    pub fn theta(&self) -> &FiniteSpace {
        &self.theta
    }

    pub fn actions(&self) -> &FiniteSpace {
        &self.actions
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, theta: usize, action: usize) -> f64 {
        self.values[(theta, action)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `α L + c`.
    pub fn affine(&self, alpha: f64, shift: f64) -> Result<Self> {
        Self::new(
            self.theta.clone(),
            self.actions.clone(),
            self.values.map(|v| alpha * v + shift),
        )
    }

    /// `E_{θ∼w} L(θ, a)` for an arbitrary nonnegative weight vector `w`.
    pub(crate) fn expected(&self, weights: &[f64], action: usize) -> f64 {
        weights
            .iter()
            .enumerate()
            .map(|(t, w)| w * self.values[(t, action)])
            .sum()
    }

    /// Lowest-index minimizer of the expected loss under `weights`.
    pub(crate) fn act(&self, weights: &[f64]) -> usize {
        argmin((0..self.actions.len()).map(|a| self.expected(weights, a)))
    }

    /// `min_a E_{θ∼w} L(θ, a)`; 1-homogeneous in `w`.
    pub(crate) fn min_expected(&self, weights: &[f64]) -> f64 {
        (0..self.actions.len())
            .map(|a| self.expected(weights, a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Regret of acting for `q` when the truth is drawn from `p`.
    pub(crate) fn regret_slices(&self, p: &[f64], q: &[f64]) -> f64 {
        self.expected(p, self.act(q)) - self.min_expected(p)
    }
}

/// The quintuple `(Θ, X, T, A, L)` together with a prior on `Θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningProblem {
    pub experiment: MarkovKernel,
    pub loss: LossMatrix,
    pub prior: Distribution,
}

impl LearningProblem {
    pub fn new(experiment: MarkovKernel, loss: LossMatrix, prior: Distribution) -> Result<Self> {
        ensure_same(experiment.from(), loss.theta())?;
        ensure_same(experiment.from(), prior.space())?;
        Ok(Self {
            experiment,
            loss,
            prior,
        })
    }

    pub fn theta(&self) -> &FiniteSpace {
        self.experiment.from()
    }

    pub fn data_space(&self) -> &FiniteSpace {
        self.experiment.to()
    }

    pub fn value(&self) -> f64 {
        value(&self.loss, &self.prior, &self.experiment)
            .expect("conformance checked on construction")
    }

    pub fn bayes_rule(&self) -> MarkovKernel {
        bayes_rule(&self.loss, &self.prior, &self.experiment)
            .expect("conformance checked on construction")
    }
}

/// Full Bayes risk `E_{θ∼π} E_{a∼D(θ)} L(θ, a)` of a rule `D: Θ → A`.
pub fn bayes_risk(loss: &LossMatrix, prior: &Distribution, rule: &MarkovKernel) -> Result<f64> {
    ensure_same(loss.theta(), prior.space())?;
    ensure_same(loss.theta(), rule.from())?;
    ensure_same(loss.actions(), rule.to())?;
    let mut total = 0.0;
    for t in 0..prior.len() {
        let inner: f64 = (0..loss.actions().len())
            .map(|a| rule.get(a, t) * loss.get(t, a))
            .sum();
        total += prior.get(t) * inner;
    }
    Ok(total)
}

/// Action minimizing posterior expected loss, lowest index on ties.
pub fn bayes_act(loss: &LossMatrix, posterior: &Distribution) -> Result<usize> {
    posterior_on(loss, posterior)?;
    Ok(loss.act(posterior.as_slice()))
}

/// `L̄(P) = min_a E_{θ∼P} L(θ, a)`.
pub fn bayes_risk_function(loss: &LossMatrix, p: &Distribution) -> Result<f64> {
    posterior_on(loss, p)?;
    Ok(loss.min_expected(p.as_slice()))
}

fn posterior_on(loss: &LossMatrix, p: &Distribution) -> Result<()> {
    ensure_same(loss.theta(), p.space())
}

/// Value `V_L(π, T) = E_{x∼π_X} L̄(T*(x))`; lower is better.
pub fn value(loss: &LossMatrix, prior: &Distribution, experiment: &MarkovKernel) -> Result<f64> {
    ensure_same(loss.theta(), prior.space())?;
    ensure_same(loss.theta(), experiment.from())?;
    // L̄ is 1-homogeneous, so π_X(x) L̄(T*(x)) = L̄(joint column x).
    let n_theta = prior.len();
    let mut weights = vec![0.0; n_theta];
    let mut total = 0.0;
    for x in 0..experiment.to().len() {
        for (t, w) in weights.iter_mut().enumerate() {
            *w = experiment.get(x, t) * prior.get(t);
        }
        total += loss.min_expected(&weights);
    }
    Ok(total)
}

/// The deterministic Bayes rule `X → A` for the problem `(L, π, T)`.
///
/// Data points with zero marginal act for the uniform posterior.
pub fn bayes_rule(
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
) -> Result<MarkovKernel> {
    ensure_same(loss.theta(), experiment.from())?;
    let post = bayes_inverse(experiment, prior)?;
    let targets: Vec<usize> = (0..experiment.to().len())
        .map(|x| loss.act(post.kernel.column(x).as_slice()))
        .collect();
    MarkovKernel::deterministic(experiment.to().clone(), loss.actions().clone(), &targets)
}

/// Regret `E_{θ∼P} L(θ, a*(Q)) − L̄(P)` where `a*(Q)` is the Bayes act for `Q`.
pub fn regret(loss: &LossMatrix, p: &Distribution, q: &Distribution) -> Result<f64> {
    posterior_on(loss, p)?;
    posterior_on(loss, q)?;
    Ok(loss.regret_slices(p.as_slice(), q.as_slice()))
}

/// `V_L(π, φ∘T) − V_L(π, T)`.
pub fn feature_gap(
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
    features: &MarkovKernel,
) -> Result<f64> {
    let composed = compose(features, experiment)?;
    Ok(value(loss, prior, &composed)? - value(loss, prior, experiment)?)
}

/// Feature gap as the expected regret between data and feature posteriors,
/// `E_{x∼π_X} E_{z∼φ(x)} D(T*(x), (φ∘T)*(z))`.
pub fn feature_gap_as_regret(
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
    features: &MarkovKernel,
) -> Result<f64> {
    ensure_same(loss.theta(), experiment.from())?;
    let composed = compose(features, experiment)?;
    let data_post = bayes_inverse(experiment, prior)?;
    let feat_post = bayes_inverse(&composed, prior)?;
    let mut total = 0.0;
    for x in 0..experiment.to().len() {
        let px = data_post.marginal.get(x);
        if px == 0.0 {
            continue;
        }
        let p = data_post.kernel.column(x);
        for z in 0..features.to().len() {
            let w = features.get(z, x);
            if w == 0.0 {
                continue;
            }
            let q = feat_post.kernel.column(z);
            total += px * w * loss.regret_slices(p.as_slice(), q.as_slice());
        }
    }
    Ok(total)
}

/// `L̄(π) − V_L(π, T)`: the value gained over the uninformative experiment.
pub fn information_gap(
    loss: &LossMatrix,
    prior: &Distribution,
    experiment: &MarkovKernel,
) -> Result<f64> {
    let v = value(loss, prior, experiment)?;
    Ok(bayes_risk_function(loss, prior)? - v)
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

/// KL divergence in bits; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence_bits(p: &[f64], q: &[f64]) -> f64 {
    kl_divergence_nats(p, q) / std::f64::consts::LN_2
}

/// KL divergence in nats; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence_nats(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).ln();
        }
    }
    // Rounding can push a true zero slightly negative.
    total.max(0.0)
}

/// `H(X | Z)` in bits under the joint `π_X ⊗ φ`.
pub fn conditional_entropy(data: &Distribution, features: &MarkovKernel) -> Result<f64> {
    ensure_same(features.from(), data.space())?;
    let n_z = features.to().len();
    let mut h_xz = 0.0;
    let mut pz = vec![0.0; n_z];
    for x in 0..data.len() {
        for (z, slot) in pz.iter_mut().enumerate() {
            let p = data.get(x) * features.get(z, x);
            *slot += p;
            if p > 0.0 {
                h_xz -= p * p.log2();
            }
        }
    }
    Ok((h_xz - entropy(&pz)).max(0.0))
}

/// `I(X; Z) = E_x KL(φ(x) ‖ φ(π_X))` in bits.
pub fn mutual_information(data: &Distribution, features: &MarkovKernel) -> Result<f64> {
    let pz = pushforward(features, data)?;
    let mut total = 0.0;
    for x in 0..data.len() {
        let w = data.get(x);
        if w == 0.0 {
            continue;
        }
        let col: Vec<f64> = features.matrix().column(x).iter().copied().collect();
        total += w * kl_divergence_bits(&col, pz.as_slice());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> FiniteSpace {
        FiniteSpace::range(2)
    }

    fn bsc(p: f64) -> MarkovKernel {
        MarkovKernel::from_rows(two(), two(), &[vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(FiniteSpace::range(v.len()), v.to_vec()).unwrap()
    }

    #[test]
    fn bayes_risk_examples() {
        let u = Distribution::uniform(two());
        let zero = LossMatrix::from_rows(two(), two(), &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(bayes_risk(&zero, &u, &bsc(0.3)).unwrap(), 0.0);
        let l01 = LossMatrix::zero_one(two());
        assert_eq!(
            bayes_risk(&l01, &u, &MarkovKernel::identity(two())).unwrap(),
            0.0
        );
    }

    #[test]
    fn bayes_risk_double_sum() {
        let theta = FiniteSpace::range(3);
        let acts = FiniteSpace::range(2);
        let l = LossMatrix::from_rows(
            theta.clone(),
            acts.clone(),
            &[vec![0.3, -1.0], vec![2.0, 0.5], vec![0.0, 1.5]],
        )
        .unwrap();
        let pi = Distribution::new(theta.clone(), vec![0.2, 0.5, 0.3]).unwrap();
        let d = MarkovKernel::from_columns(
            theta,
            acts,
            &[vec![0.6, 0.4], vec![0.1, 0.9], vec![1.0, 0.0]],
        )
        .unwrap();
        // 0.2(0.6·0.3 + 0.4·−1) + 0.5(0.1·2 + 0.9·0.5) + 0.3(1·0)
        let want = 0.2 * (0.18 - 0.4) + 0.5 * (0.2 + 0.45);
        assert!((bayes_risk(&l, &pi, &d).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn bayes_act_examples() {
        let l01 = LossMatrix::zero_one(two());
        assert_eq!(bayes_act(&l01, &dist(&[0.8, 0.2])).unwrap(), 0);
        assert_eq!(bayes_act(&l01, &dist(&[0.5, 0.5])).unwrap(), 0);
        // E[a=0] = 0.2·10 = 2, E[a=1] = 0.8·1 = 0.8.
        let cost = LossMatrix::from_rows(two(), two(), &[vec![0.0, 1.0], vec![10.0, 0.0]]).unwrap();
        assert_eq!(bayes_act(&cost, &dist(&[0.8, 0.2])).unwrap(), 1);
    }

    #[test]
    fn value_examples() {
        let l01 = LossMatrix::zero_one(two());
        let u = Distribution::uniform(two());
        assert_eq!(
            value(&l01, &u, &MarkovKernel::identity(two())).unwrap(),
            0.0
        );
        assert!(
            (value(&l01, &u, &MarkovKernel::uninformative(two())).unwrap() - 0.5).abs() < 1e-15
        );
        assert!((value(&l01, &u, &bsc(0.1)).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bayes_rule_for_bsc_is_identity() {
        let l01 = LossMatrix::zero_one(two());
        let rule = bayes_rule(&l01, &Distribution::uniform(two()), &bsc(0.1)).unwrap();
        assert_eq!(rule.deterministic_targets(), Some(vec![0, 1]));
    }

    #[test]
    fn regret_examples() {
        let l01 = LossMatrix::zero_one(two());
        let p = dist(&[0.8, 0.2]);
        let q = dist(&[0.3, 0.7]);
        assert_eq!(regret(&l01, &p, &p).unwrap(), 0.0);
        assert!((regret(&l01, &p, &q).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn gaps_with_trivial_features() {
        let l01 = LossMatrix::zero_one(two());
        let u = Distribution::uniform(two());
        let t = bsc(0.2);
        assert_eq!(
            feature_gap(&l01, &u, &t, &MarkovKernel::identity(two())).unwrap(),
            0.0
        );
        let fg = feature_gap(&l01, &u, &t, &MarkovKernel::uninformative(two())).unwrap();
        let ig = information_gap(&l01, &u, &t).unwrap();
        assert!((fg - ig).abs() < 1e-15);
        assert_eq!(
            information_gap(&l01, &u, &MarkovKernel::uninformative(two())).unwrap(),
            0.0
        );
        assert!(
            (information_gap(&l01, &u, &MarkovKernel::identity(two())).unwrap() - 0.5).abs()
                < 1e-15
        );
    }

    #[test]
    fn log_loss_information_gap_approaches_entropy() {
        // Actions are grid distributions q = (k/n, 1 − k/n); L(θ, q) = −log2 q_θ.
        let pi = dist(&[0.3, 0.7]);
        let h = entropy(pi.as_slice());
        let mut prev_err = f64::INFINITY;
        for n in [10usize, 100, 1000] {
            let acts = FiniteSpace::range(n - 1);
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|t| {
                    (1..n)
                        .map(|k| {
                            let q0 = k as f64 / n as f64;
                            -(if t == 0 { q0 } else { 1.0 - q0 }).log2()
                        })
                        .collect()
                })
                .collect();
            let l = LossMatrix::from_rows(two(), acts, &rows).unwrap();
            let gap = information_gap(&l, &pi, &MarkovKernel::identity(two())).unwrap();
            // The id value is −log2(1 − 1/n); the prior term is within a grid step of H(π).
            let err = (gap - h).abs();
            assert!(
                err <= 2.0 * (-(1.0 - 1.0 / n as f64).log2()) + 1e-12,
                "n={n} err={err}"
            );
            assert!(err < prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn entropy_examples() {
        let four = Distribution::uniform(FiniteSpace::range(4));
        let pairs =
            MarkovKernel::deterministic(FiniteSpace::range(4), two(), &[0, 0, 1, 1]).unwrap();
        assert!((conditional_entropy(&four, &pairs).unwrap() - 1.0).abs() < 1e-12);
        assert!((mutual_information(&four, &pairs).unwrap() - 1.0).abs() < 1e-12);
        let id4 = MarkovKernel::identity(FiniteSpace::range(4));
        assert_eq!(conditional_entropy(&four, &id4).unwrap(), 0.0);
        let bullet = MarkovKernel::uninformative(FiniteSpace::range(4));
        assert!((conditional_entropy(&four, &bullet).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(mutual_information(&four, &bullet).unwrap(), 0.0);
        let u2 = Distribution::uniform(two());
        assert!(
            (mutual_information(&u2, &MarkovKernel::identity(two())).unwrap() - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn kl_reports_infinity_off_support() {
        assert_eq!(kl_divergence_bits(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence_bits(&[1.0, 0.0], &[0.5, 0.5]), 1.0);
    }

    #[test]
    fn learning_problem_checks_spaces() {
        let l = LossMatrix::zero_one(FiniteSpace::range(3));
        let err = LearningProblem::new(bsc(0.1), l, Distribution::uniform(two())).unwrap_err();
        assert!(err.is_conformance());
        let p = LearningProblem::new(
            bsc(0.1),
            LossMatrix::zero_one(two()),
            Distribution::uniform(two()),
        )
        .unwrap();
        assert!((p.value() - 0.1).abs() < 1e-15);
    }
}
