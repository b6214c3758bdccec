use nalgebra::DVector;

use super::space::{ensure_same, FiniteSpace};
use crate::error::{Error, Result};

/// Tolerance on total mass (and on column sums of kernels) accepted at
/// construction. Inputs inside the tolerance are renormalized exactly.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A probability vector over a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    space: FiniteSpace,
    mass: DVector<f64>,
}

impl Distribution {
    pub fn new(space: FiniteSpace, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} entries given for space {space} of size {}",
                mass.len(),
                space.len()
            )));
        }
        let mass = normalize_probability(mass).map_err(Error::InvalidDistribution)?;
        Ok(Self {
            space,
            mass: DVector::from_vec(mass),
        })
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let n = space.len();
        Self {
            space,
            mass: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    pub fn point_mass(space: FiniteSpace, index: usize) -> Self {
        let mut mass = DVector::zeros(space.len());
        mass[index] = 1.0;
        Self { space, mass }
    }

    /// Used for vectors produced by exact operations on validated inputs.
    pub(crate) fn from_computed(space: FiniteSpace, mass: DVector<f64>) -> Self {
        let v = normalize_probability(mass.iter().copied().collect())
            .unwrap_or_else(|e| panic!("internal distribution invariant broken: {e}"));
        Self {
            space,
            mass: DVector::from_vec(v),
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    pub fn as_slice(&self) -> &[f64] {
        self.mass.as_slice()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> f64 {
        self.mass[index]
    }

    /// Indices carrying positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mass[i] > 0.0).collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.mass.iter().all(|&p| p > 0.0)
    }

    /// Index of the largest mass, lowest index on ties.
    pub fn mode(&self) -> usize {
        argmax(self.mass.iter().copied())
    }

    pub(crate) fn ensure_on(&self, space: &FiniteSpace) -> Result<()> {
        ensure_same(space, &self.space)
    }
}

/// Checks nonnegativity and unit mass, renormalizing within tolerance.
pub(crate) fn normalize_probability(mut v: Vec<f64>) -> std::result::Result<Vec<f64>, String> {
    for (i, p) in v.iter().enumerate() {
        if !p.is_finite() {
            return Err(format!("entry {i} is not finite"));
        }
        if *p < 0.0 {
            return Err(format!("entry {i} is negative ({p})"));
        }
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("entries sum to {total}, not 1"));
    }
    // Sums within rounding of 1 are kept verbatim so that save/load is exact.
    if (total - 1.0).abs() > 1e-12 {
        v.iter_mut().for_each(|p| *p /= total);
    }
    Ok(v)
}

/// First index of the maximum.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// First index of the minimum.
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> usize {
    argmax(values.map(|v| -v))
}

/// Total l1 distance between two distributions on the same space, in `[0, 2]`.
pub fn variational_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    ensure_same(&p.space, &q.space)?;
    Ok(l1_distance(p.as_slice(), q.as_slice()))
}

pub(crate) fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}
