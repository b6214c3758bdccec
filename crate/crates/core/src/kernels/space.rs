use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An ordered set of distinct labels.
///
/// Two spaces are equal when they carry the same labels in the same order;
/// the optional name is only used in diagnostics.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    name: Option<Arc<str>>,
    labels: Arc<[String]>,
}

impl FiniteSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace(
                "a space needs at least one label".into(),
            ));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self {
            name: None,
            labels: labels.into(),
        })
    }

    pub fn named<I, S>(name: &str, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Ok(Self::new(labels)?.with_name(name))
    }

    /// Labels `prefix0, prefix1, ...`.
    pub fn indexed(prefix: &str, n: usize) -> Self {
        assert!(n >= 1, "a space needs at least one label");
        Self {
            name: None,
            labels: (0..n).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    /// Labels `0, 1, ..., n-1`.
    pub fn range(n: usize) -> Self {
        Self::indexed("", n)
    }

    /// The one-point space that uninformative kernels map into.
    pub fn singleton() -> Self {
        Self {
            name: Some("•".into()),
            labels: vec!["•".to_string()].into(),
        }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for FiniteSpace {}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            write!(f, "`{name}` ")?;
        }
        const SHOWN: usize = 6;
        write!(f, "{{")?;
        for (i, l) in self.labels.iter().take(SHOWN).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        if self.labels.len() > SHOWN {
            write!(f, ", … ({} labels)", self.labels.len())?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn ensure_same(expected: &FiniteSpace, found: &FiniteSpace) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::mismatch(expected, found))
    }
}
