use lecam::decision::{
    conditional_entropy, entropy, feature_gap, feature_gap_as_regret, mutual_information, value,
    LossMatrix,
};
use lecam::deficiency::weighted_directed_deficiency;
use lecam::generic::{autoencode, AutoencoderConfig};
use lecam::ib::{IbConfig, IbProblem};
use lecam::kernels::{compose, joint, pushforward, variational_divergence};
use lecam::verify::random;
use lecam::{Distribution, FiniteSpace, MarkovKernel};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (2usize..=5, 2usize..=5, 1usize..=5, 2usize..=5)
}

/// Random problem with the given numbers of hypotheses, outcomes and actions.
struct Instance {
    theta: FiniteSpace,
    xs: FiniteSpace,
    t: MarkovKernel,
    prior: Distribution,
    loss: LossMatrix,
}

fn instance(seed: u64, (nt, nx, _, na): (usize, usize, usize, usize)) -> Instance {
    let mut r = rng(seed);
    let theta = random::space("t", nt);
    let xs = random::space("x", nx);
    let acts = random::space("a", na);
    Instance {
        t: random::kernel(&mut r, &theta, &xs),
        prior: random::distribution(&mut r, &theta, true),
        loss: random::loss(&mut r, &theta, &acts),
        theta,
        xs,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_is_associative(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let s: Vec<FiniteSpace> = [d.0, d.1, d.2, d.3].iter().enumerate()
            .map(|(i, &n)| random::space(&format!("s{i}_"), n)).collect();
        let a = random::kernel(&mut r, &s[0], &s[1]);
        let b = random::kernel(&mut r, &s[1], &s[2]);
        let c = random::kernel(&mut r, &s[2], &s[3]);
        let left = compose(&c, &compose(&b, &a).unwrap()).unwrap();
        let right = compose(&compose(&c, &b).unwrap(), &a).unwrap();
        prop_assert!(max_abs(left.matrix(), right.matrix()) <= 1e-12);
    }

    #[test]
    fn pushforward_respects_composition(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let (s0, s1, s2) = (random::space("a", d.0), random::space("b", d.1), random::space("c", d.2));
        let t1 = random::kernel(&mut r, &s0, &s1);
        let t2 = random::kernel(&mut r, &s1, &s2);
        let p = random::distribution(&mut r, &s0, true);
        let direct = pushforward(&compose(&t2, &t1).unwrap(), &p).unwrap();
        let stepwise = pushforward(&t2, &pushforward(&t1, &p).unwrap()).unwrap();
        prop_assert!((direct.mass() - stepwise.mass()).abs().max() <= 1e-12);
    }

    #[test]
    fn variational_divergence_contracts(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let (s0, s1) = (random::space("a", d.0), random::space("b", d.2));
        let t = random::kernel(&mut r, &s0, &s1);
        let p = random::distribution(&mut r, &s0, true);
        let q = random::distribution(&mut r, &s0, true);
        let before = variational_divergence(&p, &q).unwrap();
        let after = variational_divergence(&pushforward(&t, &p).unwrap(), &pushforward(&t, &q).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&before));
    }

    #[test]
    fn joint_distance_is_average_column_distance(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let (theta, xs) = (random::space("t", d.0), random::space("x", d.1));
        let t = random::kernel(&mut r, &theta, &xs);
        let u = random::kernel(&mut r, &theta, &xs);
        let prior = random::distribution(&mut r, &theta, true);
        let jt = joint(&t, &prior).unwrap();
        let ju = joint(&u, &prior).unwrap();
        let lhs = (jt.matrix() - ju.matrix()).abs().sum();
        let rhs: f64 = (0..theta.len())
            .map(|th| prior.get(th) * variational_divergence(&t.column(th), &u.column(th)).unwrap())
            .sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn features_never_help(seed in any::<u64>(), d in dims()) {
        let inst = instance(seed, d);
        let mut r = rng(seed ^ 0x5eed);
        let zs = random::space("z", d.2);
        let phi = random::encoder(&mut r, &inst.xs, &zs);
        let gap = feature_gap(&inst.loss, &inst.prior, &inst.t, &phi).unwrap();
        prop_assert!(gap >= -1e-9);
        let regret = feature_gap_as_regret(&inst.loss, &inst.prior, &inst.t, &phi).unwrap();
        prop_assert!((gap - regret).abs() <= 1e-9 * inst.loss.sup_norm().max(1.0));
    }

    #[test]
    fn duplicated_action_leaves_value_unchanged(seed in any::<u64>(), d in dims()) {
        let inst = instance(seed, d);
        let mut rows = inst.loss.rows();
        for row in rows.iter_mut() {
            row.push(row[0]);
        }
        let acts = random::space("a", rows[0].len());
        let wider = LossMatrix::from_rows(inst.theta.clone(), acts, &rows).unwrap();
        let a = value(&inst.loss, &inst.prior, &inst.t).unwrap();
        let b = value(&wider, &inst.prior, &inst.t).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn value_is_affine_equivariant(seed in any::<u64>(), d in dims(), alpha in 0.0f64..5.0, shift in -3.0f64..3.0) {
        let inst = instance(seed, d);
        let moved = inst.loss.affine(alpha, shift).unwrap();
        let a = value(&moved, &inst.prior, &inst.t).unwrap();
        let b = alpha * value(&inst.loss, &inst.prior, &inst.t).unwrap() + shift;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + alpha * inst.loss.sup_norm() + shift.abs()) * 10.0);
    }

    #[test]
    fn conditional_entropy_is_entropy_minus_information(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let (xs, zs) = (random::space("x", d.1), random::space("z", d.2));
        let phi = random::encoder(&mut r, &xs, &zs);
        let data = random::distribution(&mut r, &xs, true);
        let h = conditional_entropy(&data, &phi).unwrap();
        let i = mutual_information(&data, &phi).unwrap();
        prop_assert!((h - (entropy(data.as_slice()) - i)).abs() <= 1e-9);
    }

    #[test]
    fn deficiency_witness_is_stochastic(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let (theta, xs, ys) = (random::space("t", d.0), random::space("x", d.1), random::space("y", d.3));
        let t = random::kernel(&mut r, &theta, &xs);
        let u = random::kernel(&mut r, &theta, &ys);
        let prior = random::distribution(&mut r, &theta, true);
        let res = weighted_directed_deficiency(&t, &u, &prior).unwrap();
        let v = res.witness.matrix();
        prop_assert!(v.iter().all(|&e| e >= 0.0));
        for col in v.column_iter() {
            prop_assert!((col.sum() - 1.0).abs() <= 1e-9);
        }
        prop_assert!(res.objective_gap <= 1e-7);
        prop_assert!((0.0..=2.0 + 1e-9).contains(&res.delta));
    }

    #[test]
    fn autoencoder_trace_rises_and_stops_early(seed in any::<u64>(), n in 2usize..=8, k in 1usize..=4) {
        let mut r = rng(seed);
        let xs = random::space("x", n);
        let data = random::distribution(&mut r, &xs, true);
        let res = autoencode(&data, &AutoencoderConfig::new(k).with_restarts(4).with_seed(seed)).unwrap();
        prop_assert!(res.trace.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(res.trace.len() <= n * k + 2);
        prop_assert!((0.0..=2.0).contains(&res.epsilon));
        let dec = res.decoder.deterministic_targets().unwrap();
        let enc = res.encoder.deterministic_targets().unwrap();
        let lossless = (0..n).all(|x| data.get(x) == 0.0 || dec[enc[x]] == x);
        prop_assert_eq!(res.epsilon == 0.0, lossless);
    }

    #[test]
    fn ib_steps_each_decrease_objective(seed in any::<u64>(), d in dims(), beta in prop::sample::select(vec![0.0, 0.05, 0.5, 2.0])) {
        let inst = instance(seed, d);
        let problem = IbProblem::new(&inst.loss, &inst.prior, &inst.t).unwrap();
        let state = problem.learn(&IbConfig::new(d.2, beta).with_seed(seed).with_max_iters(1)).unwrap();
        let mut w = problem.work_from_state(&state).unwrap();
        for _ in 0..20 {
            let before = problem.objective(&w);
            problem.centroid_step(&mut w);
            let c = problem.objective(&w);
            problem.prior_step(&mut w);
            let p = problem.objective(&w);
            problem.encoder_step(&mut w);
            let e = problem.objective(&w);
            prop_assert!(c <= before + 1e-9 && p <= c + 1e-9 && e <= p + 1e-9, "{before} {c} {p} {e}");
        }
    }

    #[test]
    fn ib_fixed_point_is_consistent(seed in any::<u64>(), d in dims(), beta in prop::sample::select(vec![0.0, 0.1, 1.0])) {
        let inst = instance(seed, d);
        let problem = IbProblem::new(&inst.loss, &inst.prior, &inst.t).unwrap();
        let state = problem.learn(&IbConfig::new(d.2, beta).with_seed(seed)).unwrap();
        let data = Distribution::new(inst.xs.clone(), problem.data_marginal().to_vec()).unwrap();
        let pushed = pushforward(&state.encoder, &data).unwrap();
        prop_assert!((pushed.mass() - state.latent_prior.mass()).abs().max() <= 1e-9);
        let w = problem.work_from_state(&state).unwrap();
        for z in 0..d.2 {
            let mass: f64 = (0..d.1).map(|x| data.get(x) * w.encoder[x][z]).sum();
            if mass <= 1e-12 {
                continue;
            }
            for th in 0..d.0 {
                let mean: f64 = (0..d.1)
                    .map(|x| data.get(x) * w.encoder[x][z] * problem.posteriors()[x][th])
                    .sum::<f64>() / mass;
                prop_assert!((mean - w.centroids[z][th]).abs() <= 1e-9);
            }
        }
    }
}

/// Best hard clustering of data posteriors under 0-1 loss, by enumeration.
fn best_clustering(data: &[f64], posteriors: &[Vec<f64>], k: usize) -> f64 {
    let n = data.len();
    let regret = |p: &[f64], q: &[f64]| {
        let act = if q[1] > q[0] { 1 } else { 0 };
        p[0].max(p[1]) - p[act]
    };
    let mut assign = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut cost = 0.0;
        for z in 0..k {
            let mass: f64 = (0..n).filter(|&x| assign[x] == z).map(|x| data[x]).sum();
            if mass == 0.0 {
                continue;
            }
            let centroid: Vec<f64> = (0..2)
                .map(|t| {
                    (0..n)
                        .filter(|&x| assign[x] == z)
                        .map(|x| data[x] * posteriors[x][t])
                        .sum::<f64>()
                        / mass
                })
                .collect();
            cost += (0..n)
                .filter(|&x| assign[x] == z)
                .map(|x| data[x] * regret(&posteriors[x], &centroid))
                .sum::<f64>();
        }
        best = best.min(cost);
        let mut i = 0;
        while i < n {
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

#[test]
fn hard_ib_matches_best_binary_clustering() {
    let two = FiniteSpace::range(2);
    let loss = LossMatrix::zero_one(two.clone());
    let mut misses = Vec::new();
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let n = random::dim(&mut r, 2, 8);
        let k = random::dim(&mut r, 1, 3);
        let xs = random::space("x", n);
        let t = random::kernel(&mut r, &two, &xs);
        let prior = random::distribution(&mut r, &two, false);
        let problem = IbProblem::new(&loss, &prior, &t).unwrap();
        let state = problem
            .learn(&IbConfig::new(k, 0.0).with_seed(seed))
            .unwrap();
        let found = *state.objective_trace.last().unwrap();
        let best = best_clustering(problem.data_marginal(), problem.posteriors(), k);
        assert!(found >= best - 1e-12, "seed {seed}: beat the enumeration");
        if found > best + 1e-9 {
            misses.push((seed, found, best));
        }
    }
    assert!(misses.is_empty(), "{misses:?}");
}
