//! Le Cam deficiencies between experiments on a shared hypothesis space.
//!
//! `δ_π(T, U) = min_V E_{θ∼π} ‖U(θ) − V∘T(θ)‖₁` over Markov kernels
//! `V: X → Y` is an l1 regression and is solved exactly as a linear program.
//! The sup over priors is the minimax program `min_V max_θ ‖U(θ) − V∘T(θ)‖₁`.

use nalgebra::DMatrix;

use crate::decision::{bayes_risk, LossMatrix};
use crate::error::{Error, Result};
use crate::kernels::{compose, ensure_same, l1_distance, Distribution, MarkovKernel};
use crate::lp::LinearProgram;

/// Default threshold below which a weighted deficiency counts as zero.
pub const FACTOR_TOL: f64 = 1e-6;

/// A deficiency together with a kernel attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct DeficiencyResult {
    /// Objective recomputed at `witness`.
    pub delta: f64,
    /// `V: X → Y` with `V∘T` closest to `U`.
    pub witness: MarkovKernel,
    /// Absolute difference between the solver's optimum and `delta`.
    pub objective_gap: f64,
}

/// Per-hypothesis l1 residuals `‖U(θ) − V∘T(θ)‖₁`.
pub fn residuals(t: &MarkovKernel, u: &MarkovKernel, v: &MarkovKernel) -> Result<Vec<f64>> {
    ensure_same(t.from(), u.from())?;
    ensure_same(v.to(), u.to())?;
    let vt = compose(v, t)?;
    Ok((0..t.from().len())
        .map(|th| {
            let a: Vec<f64> = u.matrix().column(th).iter().copied().collect();
            let b: Vec<f64> = vt.matrix().column(th).iter().copied().collect();
            l1_distance(&a, &b)
        })
        .collect())
}

/// Layout of the shared part of both programs.
struct Layout {
    nx: usize,
    ny: usize,
    nt: usize,
}

impl Layout {
    fn v(&self, y: usize, x: usize) -> usize {
        x * self.ny + y
    }
    fn n_v(&self) -> usize {
        self.nx * self.ny
    }
    fn plus(&self, y: usize, th: usize) -> usize {
        self.n_v() + th * self.ny + y
    }
    fn minus(&self, y: usize, th: usize) -> usize {
        self.n_v() + self.nt * self.ny + th * self.ny + y
    }
    fn n_shared(&self) -> usize {
        self.n_v() + 2 * self.nt * self.ny
    }
}

/// Adds `(V T)(y|θ) + s⁺ − s⁻ = U(y|θ)` and the column-sum rows of `V`.
fn shared_program(
    t: &MarkovKernel,
    u: &MarkovKernel,
    extra_vars: usize,
) -> (Layout, LinearProgram) {
    let lay = Layout {
        nx: t.to().len(),
        ny: u.to().len(),
        nt: t.from().len(),
    };
    let mut lp = LinearProgram::new(lay.n_shared() + extra_vars);
    for th in 0..lay.nt {
        for y in 0..lay.ny {
            let mut terms: Vec<(usize, f64)> = (0..lay.nx)
                .filter(|&x| t.get(x, th) != 0.0)
                .map(|x| (lay.v(y, x), t.get(x, th)))
                .collect();
            terms.push((lay.plus(y, th), 1.0));
            terms.push((lay.minus(y, th), -1.0));
            lp.add_equality(&terms, u.get(y, th));
        }
    }
    for x in 0..lay.nx {
        let terms: Vec<(usize, f64)> = (0..lay.ny).map(|y| (lay.v(y, x), 1.0)).collect();
        lp.add_equality(&terms, 1.0);
    }
    (lay, lp)
}

fn witness_from(lay: &Layout, x: &[f64], t: &MarkovKernel, u: &MarkovKernel) -> MarkovKernel {
    let mut m = DMatrix::from_fn(lay.ny, lay.nx, |y, xi| x[lay.v(y, xi)].max(0.0));
    for mut col in m.column_iter_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        } else {
            col.fill(1.0 / lay.ny as f64);
        }
    }
    MarkovKernel::from_computed(t.to().clone(), u.to().clone(), m)
}

fn check_experiments(t: &MarkovKernel, u: &MarkovKernel) -> Result<()> {
    ensure_same(t.from(), u.from())
}

/// Weighted directed deficiency `δ_π(T, U)`: how far `U` is from factoring
/// through `T` on average under `π`. Entries with `π(θ) = 0` drop out.
pub fn weighted_directed_deficiency(
    t: &MarkovKernel,
    u: &MarkovKernel,
    prior: &Distribution,
) -> Result<DeficiencyResult> {
    check_experiments(t, u)?;
    ensure_same(t.from(), prior.space())?;
    let (lay, mut lp) = shared_program(t, u, 0);
    for th in 0..lay.nt {
        for y in 0..lay.ny {
            lp.set_cost(lay.plus(y, th), prior.get(th));
            lp.set_cost(lay.minus(y, th), prior.get(th));
        }
    }
    let sol = lp.solve()?;
    let witness = witness_from(&lay, &sol.x, t, u);
    let delta: f64 = residuals(t, u, &witness)?
        .iter()
        .zip(prior.as_slice())
        .map(|(r, p)| r * p)
        .sum();
    Ok(DeficiencyResult {
        delta,
        witness,
        objective_gap: (delta - sol.objective).abs(),
    })
}

/// `Δ_π(T, U) = max(δ_π(T, U), δ_π(U, T))`.
pub fn weighted_deficiency(
    t: &MarkovKernel,
    u: &MarkovKernel,
    prior: &Distribution,
) -> Result<f64> {
    let a = weighted_directed_deficiency(t, u, prior)?;
    let b = weighted_directed_deficiency(u, t, prior)?;
    Ok(a.delta.max(b.delta))
}

/// Directed deficiency `δ(T, U) = sup_π δ_π(T, U)`, computed as the
/// minimax program over the worst hypothesis.
pub fn directed_deficiency(t: &MarkovKernel, u: &MarkovKernel) -> Result<DeficiencyResult> {
    check_experiments(t, u)?;
    let nt = t.from().len();
    // Extra variables: the bound `τ`, then one slack per hypothesis.
    let (lay, mut lp) = shared_program(t, u, 1 + nt);
    let tau = lay.n_shared();
    for th in 0..nt {
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(2 * lay.ny + 2);
        for y in 0..lay.ny {
            terms.push((lay.plus(y, th), 1.0));
            terms.push((lay.minus(y, th), 1.0));
        }
        terms.push((tau, -1.0));
        terms.push((tau + 1 + th, 1.0));
        lp.add_equality(&terms, 0.0);
    }
    lp.set_cost(tau, 1.0);
    let sol = lp.solve()?;
    let witness = witness_from(&lay, &sol.x, t, u);
    let delta = residuals(t, u, &witness)?
        .into_iter()
        .fold(0.0_f64, f64::max);
    Ok(DeficiencyResult {
        delta,
        witness,
        objective_gap: (delta - sol.objective).abs(),
    })
}

/// `Δ(T, U)`: the larger of the two directed sup-deficiencies.
pub fn deficiency(t: &MarkovKernel, u: &MarkovKernel) -> Result<f64> {
    Ok(directed_deficiency(t, u)?
        .delta
        .max(directed_deficiency(u, t)?.delta))
}

/// Outcome of testing whether `U` factors through `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorCheck {
    pub factors: bool,
    pub deficiency: DeficiencyResult,
}

impl FactorCheck {
    /// `U/T` when the factorization holds.
    pub fn witness(&self) -> Option<&MarkovKernel> {
        self.factors.then_some(&self.deficiency.witness)
    }
}

/// Tests `T | U` through `δ_π(T, U) ≤ tol`; `π` must be strictly positive.
pub fn factors_through(
    t: &MarkovKernel,
    u: &MarkovKernel,
    prior: &Distribution,
    tol: f64,
) -> Result<FactorCheck> {
    if !prior.is_strictly_positive() {
        return Err(Error::InvalidArgument(
            "factorization test needs a prior with full support".into(),
        ));
    }
    let d = weighted_directed_deficiency(t, u, prior)?;
    Ok(FactorCheck {
        factors: d.delta <= tol,
        deficiency: d,
    })
}

/// Transports a rule built on `U` to one built on `T`: `(D_U/U) ∘ V ∘ T`.
///
/// `rule_on_u` is the data-level rule `Y → A`; the result is the full rule
/// `Θ → A`.
pub fn transport_rule(
    rule_on_u: &MarkovKernel,
    witness: &MarkovKernel,
    t: &MarkovKernel,
) -> Result<MarkovKernel> {
    compose(&compose(rule_on_u, witness)?, t)
}

/// Risk of the transported rule and the guaranteed bound
/// `R_L(π, D_U) + ε ‖L‖∞` where `ε = E_π ‖U(θ) − V∘T(θ)‖`.
pub fn transported_risk(
    loss: &LossMatrix,
    prior: &Distribution,
    t: &MarkovKernel,
    u: &MarkovKernel,
    rule_on_u: &MarkovKernel,
    witness: &MarkovKernel,
) -> Result<(f64, f64)> {
    let transported = transport_rule(rule_on_u, witness, t)?;
    let risk = bayes_risk(loss, prior, &transported)?;
    let base = bayes_risk(loss, prior, &compose(rule_on_u, u)?)?;
    let eps: f64 = residuals(t, u, witness)?
        .iter()
        .zip(prior.as_slice())
        .map(|(r, p)| r * p)
        .sum();
    Ok((risk, base + eps * loss.sup_norm()))
}
