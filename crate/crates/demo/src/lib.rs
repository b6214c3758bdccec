//! Browser bindings for a few small computations on binary channels and
//! data distributions. Every export returns a JSON string; the page in
//! `www/` draws the results.

use lecam::decision::value;
use lecam::deficiency::weighted_directed_deficiency;
use lecam::generic::{autoencode as learn, AutoencoderConfig};
use lecam::{Distribution, FiniteSpace, LossMatrix, MarkovKernel};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] lecam::Error),
}

type Result<T> = std::result::Result<T, DemoError>;

fn hypotheses() -> FiniteSpace {
    FiniteSpace::named("H", ["h0", "h1"]).expect("distinct labels")
}

/// Binary symmetric channel that flips its input with probability `flip`.
fn channel(flip: f64, name: &str) -> Result<MarkovKernel> {
    if !(0.0..=1.0).contains(&flip) {
        return Err(DemoError::Input(format!(
            "flip probability must lie in [0, 1], got {flip}"
        )));
    }
    let out = FiniteSpace::named(name, ["0", "1"]).expect("distinct labels");
    let rows = [vec![1.0 - flip, flip], vec![flip, 1.0 - flip]];
    Ok(MarkovKernel::from_rows(hypotheses(), out, &rows)?)
}

fn prior(first: f64) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&first) {
        return Err(DemoError::Input(format!(
            "prior mass must lie in [0, 1], got {first}"
        )));
    }
    Ok(Distribution::new(hypotheses(), vec![first, 1.0 - first])?)
}

fn compare(flip_a: f64, flip_b: f64, prior_h0: f64) -> Result<Value> {
    let a = channel(flip_a, "A")?;
    let b = channel(flip_b, "B")?;
    let p = prior(prior_h0)?;
    let ab = weighted_directed_deficiency(&a, &b, &p)?;
    let ba = weighted_directed_deficiency(&b, &a, &p)?;
    Ok(json!({
        "a_to_b": { "delta": ab.delta, "witness": ab.witness.rows() },
        "b_to_a": { "delta": ba.delta, "witness": ba.witness.rows() },
        "distance": ab.delta.max(ba.delta),
    }))
}

fn curve(flip_a: f64, flip_b: f64, prior_h0: f64, points: usize) -> Result<Value> {
    if points < 2 {
        return Err(DemoError::Input("need at least two points".into()));
    }
    let a = channel(flip_a, "A")?;
    let b = channel(flip_b, "B")?;
    let p = prior(prior_h0)?;
    let distance = weighted_directed_deficiency(&a, &b, &p)?
        .delta
        .max(weighted_directed_deficiency(&b, &a, &p)?.delta);
    let acts = FiniteSpace::named("act", ["say h0", "say h1"]).expect("distinct labels");
    let mut costs = Vec::with_capacity(points);
    let mut values_a = Vec::with_capacity(points);
    let mut values_b = Vec::with_capacity(points);
    let mut bound = Vec::with_capacity(points);
    for i in 0..points {
        let c = i as f64 / (points - 1) as f64;
        let loss = LossMatrix::from_rows(
            hypotheses(),
            acts.clone(),
            &[vec![0.0, c], vec![1.0 - c, 0.0]],
        )?;
        costs.push(c);
        values_a.push(value(&loss, &p, &a)?);
        values_b.push(value(&loss, &p, &b)?);
        // Gaps ignore per-hypothesis shifts, so the centered norm applies.
        bound.push(distance * c.max(1.0 - c) / 2.0);
    }
    Ok(json!({
        "costs": costs,
        "value_a": values_a,
        "value_b": values_b,
        "bound": bound,
        "distance": distance,
    }))
}

/// Parses masses separated by commas or whitespace and normalizes them.
pub fn parse_masses(text: &str) -> Result<Vec<f64>> {
    let mass = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| DemoError::Input(format!("`{s}` is not a nonnegative number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = mass.iter().sum();
    if mass.is_empty() || total <= 0.0 {
        return Err(DemoError::Input("masses must have a positive total".into()));
    }
    Ok(mass.into_iter().map(|m| m / total).collect())
}

fn encode(masses: &str, latent: usize, seed: u64) -> Result<Value> {
    let mass = parse_masses(masses)?;
    if mass.len() > 32 || latent > 32 {
        return Err(DemoError::Input("at most 32 symbols".into()));
    }
    let data = Distribution::new(FiniteSpace::indexed("x", mass.len()), mass)?;
    let res = learn(&data, &AutoencoderConfig::new(latent).with_seed(seed))?;
    Ok(json!({
        "mass": data.as_slice(),
        "encoder": res.encoder.deterministic_targets(),
        "decoder": res.decoder.deterministic_targets(),
        "epsilon": res.epsilon,
        "trace": res.trace,
        "best_restart": res.best_restart,
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string())
        .map_err(|e| JsError::new(&e.to_string()))
}

/// Directed and symmetric deficiencies between two binary symmetric
/// channels under a prior on the hypotheses.
#[wasm_bindgen]
pub fn compare_channels(
    flip_a: f64,
    flip_b: f64,
    prior_h0: f64,
) -> std::result::Result<String, JsError> {
    to_js(compare(flip_a, flip_b, prior_h0))
}

/// Bayes values of both channels over the losses `[[0, c], [1 − c, 0]]`,
/// with the deficiency bound on their gap.
#[wasm_bindgen]
pub fn value_curve(
    flip_a: f64,
    flip_b: f64,
    prior_h0: f64,
    points: usize,
) -> std::result::Result<String, JsError> {
    to_js(curve(flip_a, flip_b, prior_h0, points))
}

#[wasm_bindgen]
pub fn autoencode(masses: &str, latent: usize, seed: u64) -> std::result::Result<String, JsError> {
    to_js(encode(masses, latent, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: &Value) -> f64 {
        v.as_f64().unwrap()
    }

    #[test]
    fn clean_channel_simulates_noisy_one() {
        let r = compare(0.0, 0.2, 0.5).unwrap();
        assert!(num(&r["a_to_b"]["delta"]).abs() < 1e-9);
        // Best guess of A from B's output misses on 20% of inputs: 2 * 0.2.
        assert!((num(&r["b_to_a"]["delta"]) - 0.4).abs() < 1e-9);
        assert!((num(&r["distance"]) - 0.4).abs() < 1e-9);
    }

    #[test]
    fn fair_coin_channel_carries_nothing() {
        let r = compare(0.5, 0.1, 0.3).unwrap();
        assert!(num(&r["b_to_a"]["delta"]).abs() < 1e-9);
        assert!(num(&r["a_to_b"]["delta"]) > 0.1);
    }

    #[test]
    fn curve_respects_bound() {
        let r = curve(0.1, 0.3, 0.6, 51).unwrap();
        let costs = r["costs"].as_array().unwrap();
        assert_eq!(costs.len(), 51);
        assert_eq!(num(&costs[0]), 0.0);
        assert_eq!(num(&costs[50]), 1.0);
        for i in 0..51 {
            let gap = (num(&r["value_a"][i]) - num(&r["value_b"][i])).abs();
            assert!(gap <= num(&r["bound"][i]) + 1e-9, "point {i}");
        }
        // Zero-one loss at c = 1/2: values are half the error rates.
        let mid = 25;
        assert!((num(&r["value_a"][mid]) - 0.05).abs() < 1e-12);
        assert!((num(&r["value_b"][mid]) - 0.15).abs() < 1e-12);
    }

    #[test]
    fn autoencodes_four_uniform_symbols() {
        let r = encode("1 1 1 1", 2, 0).unwrap();
        assert_eq!(num(&r["epsilon"]), 1.0);
        let r = encode("0.5, 0.3, 0.2", 3, 0).unwrap();
        assert_eq!(num(&r["epsilon"]), 0.0);
        assert_eq!(r["encoder"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_masses("").is_err());
        assert!(parse_masses("0 0").is_err());
        assert!(parse_masses("1, -2").is_err());
        assert!(parse_masses("1, x").is_err());
        assert_eq!(parse_masses("1,3").unwrap(), vec![0.25, 0.75]);
        assert!(compare(1.5, 0.1, 0.5).is_err());
        assert!(curve(0.1, 0.1, 0.5, 1).is_err());
    }
}
