use std::path::Path;

use lecam::decision::{bayes_rule, mutual_information, value as bayes_value};
use lecam::deficiency::{directed_deficiency, weighted_directed_deficiency};
use lecam::generic::{autoencode as learn_autoencoder, stack as learn_stack, AutoencoderConfig};
use lecam::ib::{IbConfig, IbProblem};
use lecam::io::ExperimentSet;
use lecam::kernels::pushforward;
use lecam::verify::{run_all, Suite, VerifyConfig};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report;
use crate::DIM_CAP;

pub struct Limits {
    pub allow_large: bool,
}

impl Limits {
    fn check_size(&self, what: &str, n: usize) -> Result<(), CliError> {
        if n <= DIM_CAP {
            return Ok(());
        }
        if self.allow_large {
            eprintln!("lecam: warning: {what} has {n} symbols, above the usual cap of {DIM_CAP}");
            Ok(())
        } else {
            Err(CliError::Input(format!(
                "{what} has {n} symbols; the cap is {DIM_CAP} (pass --allow-large to override)"
            )))
        }
    }

    fn load(&self, path: &Path) -> Result<ExperimentSet, CliError> {
        let set = ExperimentSet::load(path)?;
        for (name, space) in &set.spaces {
            self.check_size(&format!("space `{name}`"), space.len())?;
        }
        Ok(set)
    }
}

pub struct Training {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Training {
    fn config(&self, latent: usize) -> AutoencoderConfig {
        AutoencoderConfig::new(latent)
            .with_restarts(self.restarts)
            .with_max_iters(self.iters)
            .with_seed(self.seed)
    }
}

pub struct IbRefs<'a> {
    pub experiment: &'a str,
    pub prior: &'a str,
    pub loss: &'a str,
}

pub fn value(
    limits: &Limits,
    file: &Path,
    experiment: &str,
    prior: &str,
    loss: &str,
) -> Result<Value, CliError> {
    let set = limits.load(file)?;
    let t = set.kernel(experiment)?;
    let p = set.distribution(prior)?;
    let l = set.loss(loss)?;
    let context = format!("loss `{loss}`, prior `{prior}` and experiment `{experiment}`");
    let v = bayes_value(l, p, t).map_err(|e| CliError::from_lib(&context, e))?;
    let rule = bayes_rule(l, p, t).map_err(|e| CliError::from_lib(&context, e))?;
    Ok(json!({
        "value": v,
        "bayes_rule": report::rule(&rule),
    }))
}

pub fn deficiency(
    limits: &Limits,
    file: &Path,
    from: &str,
    to: &str,
    prior: Option<&str>,
    factor_tol: f64,
) -> Result<Value, CliError> {
    if factor_tol.is_nan() || factor_tol < 0.0 {
        return Err(CliError::Input(format!(
            "--factor-tol must be nonnegative, got {factor_tol}"
        )));
    }
    let set = limits.load(file)?;
    let t = set.kernel(from)?;
    let u = set.kernel(to)?;
    let context = format!("experiments `{from}` and `{to}`");
    let (res, factors, weighting) = match prior {
        Some(name) => {
            let p = set.distribution(name)?;
            let res = weighted_directed_deficiency(t, u, p)
                .map_err(|e| CliError::from_lib(format!("{context} with prior `{name}`"), e))?;
            // Factorization is only meaningful when every hypothesis counts.
            let factors = p.is_strictly_positive().then_some(res.delta <= factor_tol);
            (res, factors, json!({ "prior": name }))
        }
        None => {
            let res = directed_deficiency(t, u).map_err(|e| CliError::from_lib(&context, e))?;
            let factors = Some(res.delta <= factor_tol);
            (res, factors, json!("sup"))
        }
    };
    Ok(json!({
        "delta": res.delta,
        "weighting": weighting,
        "witness": report::kernel(&res.witness),
        "factors_through": factors,
        "factor_tol": factor_tol,
        "objective_gap": res.objective_gap,
    }))
}

pub fn autoencode(
    limits: &Limits,
    file: &Path,
    prior: &str,
    latent: usize,
    train: &Training,
) -> Result<Value, CliError> {
    limits.check_size("latent space", latent)?;
    let set = limits.load(file)?;
    let data = set.distribution(prior)?;
    let res = learn_autoencoder(data, &train.config(latent))
        .map_err(|e| CliError::from_lib(format!("autoencoder for `{prior}`"), e))?;
    Ok(json!({
        "encoder": report::rule(&res.encoder),
        "decoder": report::rule(&res.decoder),
        "epsilon": res.epsilon,
        "trace": res.trace,
        "restarts": res.restarts_used,
        "best_restart": res.best_restart,
        "seed": res.seed,
    }))
}

pub fn stack(
    limits: &Limits,
    file: &Path,
    prior: &str,
    sizes: &[usize],
    train: &Training,
) -> Result<Value, CliError> {
    for &k in sizes {
        limits.check_size("latent space", k)?;
    }
    let set = limits.load(file)?;
    let data = set.distribution(prior)?;
    let config = train.config(sizes.first().copied().unwrap_or(1));
    let chain = learn_stack(data, sizes, &config)
        .map_err(|e| CliError::from_lib(format!("stack for `{prior}`"), e))?;
    let layers: Vec<Value> = (0..chain.layers.len())
        .map(|i| {
            json!({
                "latent_size": sizes[i],
                "encoder": report::rule(&chain.layers[i]),
                "decoder": report::rule(&chain.decoders[i]),
                "epsilon": chain.layer_quality[i],
            })
        })
        .collect();
    Ok(json!({
        "layers": layers,
        "total_epsilon": chain.total_quality,
        "bound": chain.quality_bound(),
        "bound_holds": chain.bound_holds(),
        "composed": report::rule(&chain.composed),
        "seed": train.seed,
    }))
}

pub fn ib(
    limits: &Limits,
    file: &Path,
    refs: IbRefs<'_>,
    latent: usize,
    beta: f64,
    iters: usize,
    seed: u64,
) -> Result<Value, CliError> {
    limits.check_size("latent space", latent)?;
    let set = limits.load(file)?;
    let t = set.kernel(refs.experiment)?;
    let p = set.distribution(refs.prior)?;
    let l = set.loss(refs.loss)?;
    let context = format!(
        "loss `{}`, prior `{}` and experiment `{}`",
        refs.loss, refs.prior, refs.experiment
    );
    let lib = |e| CliError::from_lib(&context, e);
    let problem = IbProblem::new(l, p, t).map_err(lib)?;
    let config = IbConfig::new(latent, beta)
        .with_max_iters(iters)
        .with_seed(seed);
    let state = problem.learn(&config).map_err(lib)?;
    let gap = problem.feature_gap(&state).map_err(lib)?;
    let data = pushforward(t, p).map_err(lib)?;
    let info = mutual_information(&data, &state.encoder).map_err(lib)?;
    let monotone = state
        .objective_trace
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-9);
    Ok(json!({
        "encoder": report::kernel(&state.encoder),
        "centroids": report::kernel(&state.centroids),
        "latent_prior": report::distribution(&state.latent_prior),
        "beta": beta,
        "objective_trace": state.objective_trace,
        "trace_non_increasing": monotone,
        "feature_gap": gap,
        "mutual_information_bits": info,
        "seed": seed,
    }))
}

pub fn verify(
    limits: &Limits,
    suite: &str,
    trials: Option<usize>,
    seed: u64,
    max_dim: usize,
) -> Result<Value, CliError> {
    limits.check_size("--max-dim", max_dim)?;
    let config = VerifyConfig {
        trials,
        seed,
        max_dim,
    };
    config
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let reports = if suite == "all" {
        run_all(&config)
    } else {
        let s = Suite::from_name(suite).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            CliError::Input(format!(
                "unknown suite `{suite}`; expected `all` or one of {}",
                names.join(", ")
            ))
        })?;
        vec![s.run(&config)]
    };
    let passed = reports.iter().all(|r| r.passed);
    let out = json!({
        "seed": seed,
        "max_dim": max_dim,
        "trials": trials,
        "passed": passed,
        "suites": reports,
    });
    if passed {
        Ok(out)
    } else {
        Err(CliError::PropertyFailure(out))
    }
}
