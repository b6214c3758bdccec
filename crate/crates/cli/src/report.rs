//! JSON renderings of library values.

use lecam::{Distribution, MarkovKernel};
use serde_json::{json, Map, Value};

/// Kernel with its space labels; `matrix` rows are outputs, as in
/// experiment files.
pub fn kernel(k: &MarkovKernel) -> Value {
    json!({
        "from": k.from().name(),
        "to": k.to().name(),
        "from_labels": k.from().labels(),
        "to_labels": k.to().labels(),
        "matrix": k.rows(),
    })
}

/// Input label → output label for a deterministic kernel, otherwise the
/// full matrix.
pub fn rule(k: &MarkovKernel) -> Value {
    match k.deterministic_targets() {
        Some(targets) => {
            let map: Map<String, Value> = targets
                .iter()
                .enumerate()
                .map(|(x, &y)| (k.from().label(x).to_string(), Value::from(k.to().label(y))))
                .collect();
            Value::Object(map)
        }
        None => kernel(k),
    }
}

pub fn distribution(d: &Distribution) -> Value {
    json!({
        "labels": d.space().labels(),
        "mass": d.as_slice(),
    })
}
