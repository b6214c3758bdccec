//! JSON experiment files.
//!
//! A file names its spaces and refers to them by name from kernels,
//! distributions and losses. Matrices are row-major; kernel rows are
//! outputs, so each column of `matrix` is one conditional distribution.
//!
//! ```json
//! {
//!   "spaces": { "Theta": ["h0", "h1"], "X": ["x0", "x1"] },
//!   "kernels": { "T": { "from": "Theta", "to": "X", "matrix": [[0.9, 0.1], [0.1, 0.9]] } },
//!   "distributions": { "pi": { "space": "Theta", "mass": [0.5, 0.5] } },
//!   "losses": { "L": { "theta": "Theta", "actions": "Theta", "values": [[0, 1], [1, 0]] } }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decision::LossMatrix;
use crate::error::Error;
use crate::kernels::{Distribution, FiniteSpace, MarkovKernel};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub spaces: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub kernels: BTreeMap<String, KernelSpec>,
    #[serde(default)]
    pub distributions: BTreeMap<String, DistributionSpec>,
    #[serde(default)]
    pub losses: BTreeMap<String, LossSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub from: String,
    pub to: String,
    /// `matrix[y][x]`.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub space: String,
    pub mass: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub theta: String,
    pub actions: String,
    /// `values[θ][a]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed experiment file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{kind} `{name}` is not defined")]
    Unresolved { kind: &'static str, name: String },
    #[error("{kind} `{name}`: {source}")]
    Invalid {
        kind: &'static str,
        name: String,
        source: Error,
    },
}

/// A validated file with every reference resolved.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentSet {
    pub spaces: BTreeMap<String, FiniteSpace>,
    pub kernels: BTreeMap<String, MarkovKernel>,
    pub distributions: BTreeMap<String, Distribution>,
    pub losses: BTreeMap<String, LossMatrix>,
}

impl ExperimentFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("experiment files always serialize")
    }

    pub fn resolve(&self) -> Result<ExperimentSet, FileError> {
        let mut set = ExperimentSet::default();
        for (name, labels) in &self.spaces {
            let s = FiniteSpace::named(name, labels.iter().cloned()).map_err(|source| {
                FileError::Invalid {
                    kind: "space",
                    name: name.clone(),
                    source,
                }
            })?;
            set.spaces.insert(name.clone(), s);
        }
        for (name, k) in &self.kernels {
            let invalid = |source| FileError::Invalid {
                kind: "kernel",
                name: name.clone(),
                source,
            };
            let from = set.space(&k.from)?.clone();
            let to = set.space(&k.to)?.clone();
            let kernel = MarkovKernel::from_rows(from, to, &k.matrix).map_err(invalid)?;
            set.kernels.insert(name.clone(), kernel);
        }
        for (name, d) in &self.distributions {
            let space = set.space(&d.space)?.clone();
            let dist =
                Distribution::new(space, d.mass.clone()).map_err(|source| FileError::Invalid {
                    kind: "distribution",
                    name: name.clone(),
                    source,
                })?;
            set.distributions.insert(name.clone(), dist);
        }
        for (name, l) in &self.losses {
            let theta = set.space(&l.theta)?.clone();
            let actions = set.space(&l.actions)?.clone();
            let loss = LossMatrix::from_rows(theta, actions, &l.values).map_err(|source| {
                FileError::Invalid {
                    kind: "loss",
                    name: name.clone(),
                    source,
                }
            })?;
            set.losses.insert(name.clone(), loss);
        }
        Ok(set)
    }
}

impl ExperimentSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ExperimentFile::from_json(&text)?.resolve()
    }

    pub fn space(&self, name: &str) -> Result<&FiniteSpace, FileError> {
        self.spaces.get(name).ok_or_else(|| FileError::Unresolved {
            kind: "space",
            name: name.into(),
        })
    }

    pub fn kernel(&self, name: &str) -> Result<&MarkovKernel, FileError> {
        self.kernels.get(name).ok_or_else(|| FileError::Unresolved {
            kind: "kernel",
            name: name.into(),
        })
    }

    pub fn distribution(&self, name: &str) -> Result<&Distribution, FileError> {
        self.distributions
            .get(name)
            .ok_or_else(|| FileError::Unresolved {
                kind: "distribution",
                name: name.into(),
            })
    }

    pub fn loss(&self, name: &str) -> Result<&LossMatrix, FileError> {
        self.losses.get(name).ok_or_else(|| FileError::Unresolved {
            kind: "loss",
            name: name.into(),
        })
    }

    /// Name under which an equal space is registered, if any.
    fn space_name<'a>(&'a self, space: &FiniteSpace) -> Option<&'a str> {
        if let Some((n, s)) = space.name().and_then(|n| self.spaces.get_key_value(n)) {
            if s == space {
                return Some(n);
            }
        }
        self.spaces
            .iter()
            .find(|(_, s)| *s == space)
            .map(|(n, _)| n.as_str())
    }

    /// Serializable form. Spaces that are used but not registered are
    /// added under their own name, or `space<i>` when anonymous.
    pub fn to_file(&self) -> ExperimentFile {
        let mut set = self.clone();
        let mut fresh = 0;
        let mut register = |set: &mut ExperimentSet, s: &FiniteSpace| -> String {
            if let Some(n) = set.space_name(s) {
                return n.to_string();
            }
            let mut name = s.name().map(str::to_string).unwrap_or_default();
            while name.is_empty() || set.spaces.contains_key(&name) {
                name = format!("space{fresh}");
                fresh += 1;
            }
            set.spaces.insert(name.clone(), s.clone());
            name
        };
        let mut file = ExperimentFile::default();
        for (name, k) in &self.kernels {
            let from = register(&mut set, k.from());
            let to = register(&mut set, k.to());
            file.kernels.insert(
                name.clone(),
                KernelSpec {
                    from,
                    to,
                    matrix: k.rows(),
                },
            );
        }
        for (name, d) in &self.distributions {
            let space = register(&mut set, d.space());
            file.distributions.insert(
                name.clone(),
                DistributionSpec {
                    space,
                    mass: d.as_slice().to_vec(),
                },
            );
        }
        for (name, l) in &self.losses {
            let theta = register(&mut set, l.theta());
            let actions = register(&mut set, l.actions());
            file.losses.insert(
                name.clone(),
                LossSpec {
                    theta,
                    actions,
                    values: l.rows(),
                },
            );
        }
        file.spaces = set
            .spaces
            .iter()
            .map(|(n, s)| (n.clone(), s.labels().to_vec()))
            .collect();
        file
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_file().to_json())
    }
}
