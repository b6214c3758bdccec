use nalgebra::{DMatrix, DVector};

use super::distribution::{argmax, normalize_probability, Distribution};
use super::space::{ensure_same, FiniteSpace};
use crate::error::{Error, Result};

/// A column-stochastic matrix from `from` to `to`.
///
/// The matrix is `|to| × |from|`: column `x` is the output distribution
/// for input `x`. Experiments, feature maps, decoders and randomized
/// decision rules are all values of this type.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovKernel {
    from: FiniteSpace,
    to: FiniteSpace,
    matrix: DMatrix<f64>,
}

impl MarkovKernel {
    pub fn new(from: FiniteSpace, to: FiniteSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != to.len() || matrix.ncols() != from.len() {
            return Err(Error::InvalidKernel(format!(
                "matrix is {}×{}, expected {}×{} (outputs × inputs) for {from} → {to}",
                matrix.nrows(),
                matrix.ncols(),
                to.len(),
                from.len()
            )));
        }
        let mut matrix = matrix;
        for x in 0..matrix.ncols() {
            let col: Vec<f64> = matrix.column(x).iter().copied().collect();
            let col = normalize_probability(col).map_err(|e| {
                Error::InvalidKernel(format!("column `{}` of {from} → {to}: {e}", from.label(x)))
            })?;
            matrix.set_column(x, &DVector::from_vec(col));
        }
        Ok(Self { from, to, matrix })
    }

    /// Row-major input: `rows[y][x]` is the probability of output `y` given input `x`.
    pub fn from_rows(from: FiniteSpace, to: FiniteSpace, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != to.len() || rows.iter().any(|r| r.len() != from.len()) {
            return Err(Error::InvalidKernel(format!(
                "expected {} rows of {} entries for {from} → {to}",
                to.len(),
                from.len()
            )));
        }
        let m = DMatrix::from_fn(to.len(), from.len(), |y, x| rows[y][x]);
        Self::new(from, to, m)
    }

    /// `columns[x]` is the output distribution for input `x`.
    pub fn from_columns(from: FiniteSpace, to: FiniteSpace, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.len() != from.len() || columns.iter().any(|c| c.len() != to.len()) {
            return Err(Error::InvalidKernel(format!(
                "expected {} columns of {} entries for {from} → {to}",
                from.len(),
                to.len()
            )));
        }
        let m = DMatrix::from_fn(to.len(), from.len(), |y, x| columns[x][y]);
        Self::new(from, to, m)
    }

    pub(crate) fn from_computed(from: FiniteSpace, to: FiniteSpace, matrix: DMatrix<f64>) -> Self {
        Self::new(from, to, matrix)
            .unwrap_or_else(|e| panic!("internal kernel invariant broken: {e}"))
    }

    pub fn identity(space: FiniteSpace) -> Self {
        let n = space.len();
        Self {
            from: space.clone(),
            to: space,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// The kernel `X → •` that forgets its input.
    pub fn uninformative(space: FiniteSpace) -> Self {
        let n = space.len();
        Self {
            from: space,
            to: FiniteSpace::singleton(),
            matrix: DMatrix::from_element(1, n, 1.0),
        }
    }

    /// Every input mapped to the same output distribution.
    pub fn constant(from: FiniteSpace, output: &Distribution) -> Self {
        let n = from.len();
        let col = output.mass();
        Self {
            from,
            to: output.space().clone(),
            matrix: DMatrix::from_fn(col.len(), n, |y, _| col[y]),
        }
    }

    /// The kernel of a function given by output indices, `targets[x] = f(x)`.
    pub fn deterministic(from: FiniteSpace, to: FiniteSpace, targets: &[usize]) -> Result<Self> {
        if targets.len() != from.len() {
            return Err(Error::InvalidKernel(format!(
                "function must be total on {from}: {} targets for {} inputs",
                targets.len(),
                from.len()
            )));
        }
        let mut m = DMatrix::zeros(to.len(), from.len());
        for (x, &y) in targets.iter().enumerate() {
            if y >= to.len() {
                return Err(Error::InvalidKernel(format!(
                    "`{}` is mapped to index {y}, outside {to}",
                    from.label(x)
                )));
            }
            m[(y, x)] = 1.0;
        }
        Ok(Self {
            from,
            to,
            matrix: m,
        })
    }

    /// The kernel of a function given on labels.
    pub fn from_label_map<F>(from: FiniteSpace, to: FiniteSpace, f: F) -> Result<Self>
    where
        F: Fn(&str) -> String,
    {
        let targets = from
            .labels()
            .iter()
            .map(|x| {
                let y = f(x);
                to.index_of(&y).ok_or_else(|| {
                    Error::InvalidKernel(format!("`{x}` is mapped to `{y}`, which is not in {to}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::deterministic(from, to, &targets)
    }

    pub fn from(&self) -> &FiniteSpace {
        &self.from
    }

    pub fn to(&self) -> &FiniteSpace {
        &self.to
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Probability of output `y` given input `x`.
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.matrix[(y, x)]
    }

    pub fn column(&self, x: usize) -> Distribution {
        Distribution::from_computed(self.to.clone(), self.matrix.column(x).into_owned())
    }

    /// Row-major copy, rows indexed by output.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `Some(f)` when every column is a point mass.
    pub fn deterministic_targets(&self) -> Option<Vec<usize>> {
        (0..self.from.len())
            .map(|x| {
                let col = self.matrix.column(x);
                let y = argmax(col.iter().copied());
                (col[y] == 1.0).then_some(y)
            })
            .collect()
    }

    /// Same kernel, relabelled onto equal-sized spaces.
    pub fn relabel(&self, from: FiniteSpace, to: FiniteSpace) -> Result<Self> {
        Self::new(from, to, self.matrix.clone())
    }
}

/// `outer ∘ inner`, i.e. the matrix product `outer · inner`.
pub fn compose(outer: &MarkovKernel, inner: &MarkovKernel) -> Result<MarkovKernel> {
    ensure_same(&outer.from, &inner.to)?;
    Ok(MarkovKernel::from_computed(
        inner.from.clone(),
        outer.to.clone(),
        &outer.matrix * &inner.matrix,
    ))
}

/// Image of a distribution under a kernel.
pub fn pushforward(kernel: &MarkovKernel, p: &Distribution) -> Result<Distribution> {
    p.ensure_on(&kernel.from)?;
    Ok(Distribution::from_computed(
        kernel.to.clone(),
        &kernel.matrix * p.mass(),
    ))
}

/// Joint distribution on `Θ × X` stored as an `|X| × |Θ|` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    theta: FiniteSpace,
    data: FiniteSpace,
    matrix: DMatrix<f64>,
}

impl JointDistribution {
    pub fn theta(&self) -> &FiniteSpace {
        &self.theta
    }

    pub fn data(&self) -> &FiniteSpace {
        &self.data
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Mass at `(x, θ)`.
    pub fn get(&self, x: usize, theta: usize) -> f64 {
        self.matrix[(x, theta)]
    }

    pub fn total(&self) -> f64 {
        self.matrix.sum()
    }

    pub fn marginal_data(&self) -> Distribution {
        Distribution::from_computed(self.data.clone(), self.row_sums())
    }

    pub fn marginal_theta(&self) -> Distribution {
        let m =
            DVector::from_iterator(self.theta.len(), self.matrix.column_iter().map(|c| c.sum()));
        Distribution::from_computed(self.theta.clone(), m)
    }

    fn row_sums(&self) -> DVector<f64> {
        DVector::from_iterator(self.data.len(), self.matrix.row_iter().map(|r| r.sum()))
    }
}

/// `T ⊗ π = T diag(π)`.
pub fn joint(kernel: &MarkovKernel, prior: &Distribution) -> Result<JointDistribution> {
    prior.ensure_on(&kernel.from)?;
    let mut m = kernel.matrix.clone();
    for (theta, mut col) in m.column_iter_mut().enumerate() {
        col *= prior.get(theta);
    }
    Ok(JointDistribution {
        theta: kernel.from.clone(),
        data: kernel.to.clone(),
        matrix: m,
    })
}

/// Posterior kernel `T*: X → Θ` together with the data marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesInverse {
    pub kernel: MarkovKernel,
    pub marginal: Distribution,
    /// Data points with zero marginal mass; their posterior is set to uniform.
    pub zero_marginal: Vec<usize>,
}

pub fn bayes_inverse(kernel: &MarkovKernel, prior: &Distribution) -> Result<BayesInverse> {
    let j = joint(kernel, prior)?;
    let n_theta = kernel.from.len();
    let n_x = kernel.to.len();
    let marginal = j.row_sums();
    let mut post = DMatrix::zeros(n_theta, n_x);
    let mut zero_marginal = Vec::new();
    for x in 0..n_x {
        if marginal[x] > 0.0 {
            for theta in 0..n_theta {
                post[(theta, x)] = j.matrix[(x, theta)] / marginal[x];
            }
        } else {
            zero_marginal.push(x);
            post.column_mut(x).fill(1.0 / n_theta as f64);
        }
    }
    Ok(BayesInverse {
        kernel: MarkovKernel::from_computed(kernel.to.clone(), kernel.from.clone(), post),
        marginal: Distribution::from_computed(kernel.to.clone(), marginal),
        zero_marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::variational_divergence;

    fn bsc(p: f64) -> MarkovKernel {
        MarkovKernel::from_rows(
            FiniteSpace::range(2),
            FiniteSpace::range(2),
            &[vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
        .unwrap()
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).abs().max() <= tol
    }

    #[test]
    fn rejects_non_stochastic() {
        let two = FiniteSpace::range(2);
        let r =
            MarkovKernel::from_rows(two.clone(), two.clone(), &[vec![0.9, 0.5], vec![0.0, 0.5]]);
        assert!(matches!(r, Err(Error::InvalidKernel(_))));
        let r = MarkovKernel::from_rows(two.clone(), two, &[vec![1.2, 0.5], vec![-0.2, 0.5]]);
        assert!(r.is_err());
    }

    #[test]
    fn compose_examples() {
        let t = MarkovKernel::from_rows(
            FiniteSpace::range(2),
            FiniteSpace::range(2),
            &[vec![0.9, 0.2], vec![0.1, 0.8]],
        )
        .unwrap();
        let id = MarkovKernel::identity(FiniteSpace::range(2));
        assert_eq!(compose(&id, &t).unwrap(), t);

        let swap =
            MarkovKernel::deterministic(FiniteSpace::range(2), FiniteSpace::range(2), &[1, 0])
                .unwrap();
        let got = compose(&swap, &t).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.1, 0.8, 0.9, 0.2]);
        assert!(close(got.matrix(), &want, 1e-15));

        let bullet = MarkovKernel::uninformative(FiniteSpace::range(2));
        let c = compose(&bullet, &t).unwrap();
        assert_eq!(c, MarkovKernel::uninformative(FiniteSpace::range(2)));
    }

    #[test]
    fn compose_mismatch_names_both_spaces() {
        let a = MarkovKernel::identity(FiniteSpace::named("X", ["a", "b"]).unwrap());
        let b = MarkovKernel::identity(FiniteSpace::named("Y", ["c", "d"]).unwrap());
        let msg = compose(&a, &b).unwrap_err().to_string();
        assert!(msg.contains("`X`") && msg.contains("`Y`"), "{msg}");
    }

    #[test]
    fn pushforward_examples() {
        let u = Distribution::uniform(FiniteSpace::range(2));
        let got = pushforward(&bsc(0.1), &u).unwrap();
        assert!((got.get(0) - 0.5).abs() < 1e-15);
        let pi = Distribution::new(FiniteSpace::range(2), vec![0.3, 0.7]).unwrap();
        assert_eq!(
            pushforward(&MarkovKernel::identity(FiniteSpace::range(2)), &pi).unwrap(),
            pi
        );
        let pt = pushforward(&MarkovKernel::uninformative(FiniteSpace::range(2)), &pi).unwrap();
        assert_eq!(pt.as_slice(), &[1.0]);
    }

    #[test]
    fn joint_examples() {
        let u = Distribution::uniform(FiniteSpace::range(2));
        let j = joint(&MarkovKernel::identity(FiniteSpace::range(2)), &u).unwrap();
        assert!(close(
            j.matrix(),
            &DMatrix::from_diagonal_element(2, 2, 0.5),
            0.0
        ));
        let j = joint(&bsc(0.1), &u).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.45, 0.05, 0.05, 0.45]);
        assert!(close(j.matrix(), &want, 1e-15));
        assert!((j.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bayes_inverse_examples() {
        let u = Distribution::uniform(FiniteSpace::range(2));
        let id = MarkovKernel::identity(FiniteSpace::range(2));
        assert_eq!(bayes_inverse(&id, &u).unwrap().kernel, id);
        let inv = bayes_inverse(&bsc(0.1), &u).unwrap();
        assert!(close(inv.kernel.matrix(), bsc(0.1).matrix(), 1e-15));
        assert!(inv.zero_marginal.is_empty());
    }

    #[test]
    fn bayes_inverse_flags_zero_marginal() {
        let t = MarkovKernel::from_rows(
            FiniteSpace::range(2),
            FiniteSpace::range(3),
            &[vec![0.5, 0.0], vec![0.5, 1.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let inv = bayes_inverse(&t, &Distribution::uniform(FiniteSpace::range(2))).unwrap();
        assert_eq!(inv.zero_marginal, vec![2]);
        assert_eq!(inv.kernel.column(2).as_slice(), &[0.5, 0.5]);
        assert_eq!(inv.marginal.get(2), 0.0);
    }

    #[test]
    fn constructors() {
        let four = FiniteSpace::range(4);
        let two = FiniteSpace::range(2);
        let parity = MarkovKernel::from_label_map(four.clone(), two.clone(), |x| {
            (x.parse::<usize>().unwrap() % 2).to_string()
        })
        .unwrap();
        assert_eq!(parity.deterministic_targets(), Some(vec![0, 1, 0, 1]));
        assert!(MarkovKernel::from_label_map(four.clone(), two, |_| "7".into()).is_err());
        assert_eq!(
            MarkovKernel::identity(four.clone()).matrix(),
            &DMatrix::identity(4, 4)
        );
        let u = MarkovKernel::uninformative(four);
        assert_eq!(u.matrix().shape(), (1, 4));
        assert_eq!(u.to().len(), 1);
    }

    #[test]
    fn mixture_identity_small() {
        let pi = Distribution::new(FiniteSpace::range(2), vec![0.25, 0.75]).unwrap();
        let t = bsc(0.1);
        let u = bsc(0.3);
        let lhs = (joint(&t, &pi).unwrap().matrix() - joint(&u, &pi).unwrap().matrix())
            .abs()
            .sum();
        let rhs: f64 = (0..2)
            .map(|th| pi.get(th) * variational_divergence(&t.column(th), &u.column(th)).unwrap())
            .sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
