//! Dense two-phase primal simplex for `min c·x  s.t.  A x = b, x ≥ 0`.
//!
//! Sized for the deficiency programs (a few hundred columns at most). Pricing
//! is Dantzig's rule, falling back to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle. The tableau is periodically rebuilt
//! from the original data through an LU solve with the current basis, which
//! keeps round-off from accumulating across long pivot sequences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const OPT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
/// Pivots between rebuilds of the tableau from the original data.
const REFACTOR_EVERY: usize = 40;

#[derive(Clone, Debug)]
pub(crate) struct LinearProgram {
    n_vars: usize,
    cost: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            cost: vec![0.0; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn set_cost(&mut self, var: usize, c: f64) {
        self.cost[var] = c;
    }

    /// Adds `Σ coef·x[var] = rhs`.
    pub fn add_equality(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.n_vars];
        for &(j, a) in terms {
            row[j] += a;
        }
        self.rows.push((row, rhs));
    }

    pub fn solve(&self) -> Result<Solution> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    m: usize,
    /// Structural columns plus artificials; the rhs is stored separately.
    width: usize,
    n_struct: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Row-major starting tableau, used to rebuild `a` and `rhs` from scratch.
    a0: DMatrix<f64>,
    b0: DVector<f64>,
    since_refactor: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.n_vars;
        let mut rows: Vec<(Vec<f64>, f64)> = lp
            .rows
            .iter()
            .map(|(r, b)| {
                if *b < 0.0 {
                    (r.iter().map(|v| -v).collect(), -b)
                } else {
                    (r.clone(), *b)
                }
            })
            .collect();
        // Reuse unit columns as the starting basis where they exist.
        let mut basis = vec![usize::MAX; m];
        for j in 0..n {
            let mut hit = None;
            let mut unit = true;
            for (i, (r, _)) in rows.iter().enumerate() {
                let v = r[j];
                if v == 0.0 {
                    continue;
                }
                if v == 1.0 && hit.is_none() {
                    hit = Some(i);
                } else {
                    unit = false;
                    break;
                }
            }
            if let (true, Some(i)) = (unit, hit) {
                if basis[i] == usize::MAX {
                    basis[i] = j;
                }
            }
        }
        let n_art = basis.iter().filter(|&&b| b == usize::MAX).count();
        let width = n + n_art;
        let mut a = vec![0.0; m * width];
        let mut rhs = vec![0.0; m];
        let mut next_art = n;
        for (i, (r, b)) in rows.iter_mut().enumerate() {
            a[i * width..i * width + n].copy_from_slice(r);
            rhs[i] = *b;
            if basis[i] == usize::MAX {
                a[i * width + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
        Self {
            m,
            width,
            n_struct: n,
            a0: DMatrix::from_row_slice(m, width, &a),
            b0: DVector::from_vec(rhs.clone()),
            a,
            rhs,
            basis,
            since_refactor: 0,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<Solution> {
        if self.width > self.n_struct {
            let phase1: Vec<f64> = (0..self.width)
                .map(|j| if j >= self.n_struct { 1.0 } else { 0.0 })
                .collect();
            let infeasibility = self.optimize(&phase1, self.width)?;
            let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if infeasibility > FEAS_EPS * scale {
                return Err(Error::Solver(format!(
                    "program is infeasible (phase one residual {infeasibility:e})"
                )));
            }
            self.drive_out_artificials();
        }
        let mut cost = lp.cost.clone();
        cost.resize(self.width, 0.0);
        let objective = self.optimize(&cost, self.n_struct)?;
        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        Ok(Solution { x, objective })
    }

    /// Minimizes `cost·x` over the current basis, entering only columns
    /// below `allowed`. Returns the optimal objective.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64> {
        let max_iter = 50 * (self.m + self.width) + 1000;
        let mut degenerate = 0;
        for _ in 0..max_iter {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let reduced = self.reduced_costs(cost);
            let use_bland = degenerate >= DEGENERATE_RUN;
            let entering = if use_bland {
                (0..allowed).find(|&j| reduced[j] < -OPT_EPS)
            } else {
                let mut best = None;
                let mut best_rc = -OPT_EPS;
                for (j, &rc) in reduced.iter().enumerate().take(allowed) {
                    if rc < best_rc {
                        best_rc = rc;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                // Confirm optimality on a freshly rebuilt tableau.
                if self.since_refactor > 0 && self.refactor() {
                    continue;
                }
                return Ok(self.objective(cost));
            };
            let Some((row, ratio)) = self.leaving_row(col, use_bland) else {
                return Err(Error::Solver("program is unbounded".into()));
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::Solver(format!(
            "no optimal basis after {max_iter} pivots"
        )))
    }

    /// Ratio test. Bland mode takes the lowest basic index among minimal
    /// ratios; otherwise a two-pass test picks the largest pivot among rows
    /// whose ratio is within the feasibility tolerance of the minimum.
    fn leaving_row(&self, col: usize, bland: bool) -> Option<(usize, f64)> {
        let w = self.width;
        let candidates = (0..self.m).filter(|&i| self.a[i * w + col] > PIVOT_EPS);
        if bland {
            let mut leave: Option<(usize, f64)> = None;
            for i in candidates {
                let ratio = self.rhs[i].max(0.0) / self.a[i * w + col];
                let better = match leave {
                    None => true,
                    Some((l, r)) => {
                        ratio < r - 1e-14 || (ratio <= r + 1e-14 && self.basis[i] < self.basis[l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            return leave;
        }
        let bound = candidates
            .clone()
            .map(|i| (self.rhs[i].max(0.0) + FEAS_EPS) / self.a[i * w + col])
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        let mut leave: Option<(usize, f64)> = None;
        for i in candidates {
            let aij = self.a[i * w + col];
            let ratio = self.rhs[i].max(0.0) / aij;
            if ratio <= bound && leave.is_none_or(|(l, _)| aij > self.a[l * w + col]) {
                leave = Some((i, ratio));
            }
        }
        leave
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut rc = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                let row = &self.a[i * self.width..(i + 1) * self.width];
                for (r, &v) in rc.iter_mut().zip(row) {
                    *r -= cb * v;
                }
            }
        }
        rc
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, &v)| cost[b] * v)
            .sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.a[row * w + col];
        for v in &mut self.a[row * w..(row + 1) * w] {
            *v /= p;
        }
        self.rhs[row] = self.rhs[row].max(0.0) / p;
        self.a[row * w + col] = 1.0;
        let pivot_row: Vec<f64> = self.a[row * w..(row + 1) * w].to_vec();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i * w + col];
            if f == 0.0 {
                continue;
            }
            let r = &mut self.a[i * w..(i + 1) * w];
            for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            r[col] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            // The two-pass ratio test may overshoot by up to the tolerance.
            if self.rhs[i] < 0.0 && self.rhs[i] > -FEAS_EPS {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
        self.since_refactor += 1;
    }

    /// Recomputes the tableau as `B⁻¹ [A | b]` from the starting data.
    /// Returns false, leaving the tableau alone, if the basis is singular.
    fn refactor(&mut self) -> bool {
        self.since_refactor = 0;
        let b = DMatrix::from_fn(self.m, self.m, |i, k| self.a0[(i, self.basis[k])]);
        let lu = b.lu();
        let (Some(a), Some(rhs)) = (lu.solve(&self.a0), lu.solve(&self.b0)) else {
            return false;
        };
        for i in 0..self.m {
            for j in 0..self.width {
                self.a[i * self.width + j] = a[(i, j)];
            }
            self.a[i * self.width + self.basis[i]] = 1.0;
            self.rhs[i] = if rhs[i].abs() < 1e-13 { 0.0 } else { rhs[i] };
        }
        true
    }

    /// Pivots zero-valued artificials out of the basis. Rows whose structural
    /// part vanished are redundant and keep their artificial at zero, which
    /// is harmless because phase two never lets artificials enter.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.n_struct {
                continue;
            }
            let w = self.width;
            let mut best = None;
            let mut best_abs = 1e-7;
            for j in 0..self.n_struct {
                let v = self.a[i * w + j].abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                // The artificial sits at zero after phase one.
                self.rhs[i] = 0.0;
                self.pivot(i, j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let mut lp = LinearProgram::new(4);
        lp.set_cost(0, -1.0);
        lp.set_cost(1, -1.0);
        lp.add_equality(&[(0, 1.0), (1, 2.0), (2, 1.0)], 4.0);
        lp.add_equality(&[(0, 3.0), (1, 1.0), (3, 1.0)], 6.0);
        let s = lp.solve().unwrap();
        // Optimum at x = 1.6, y = 1.2.
        assert!((s.objective + 2.8).abs() < 1e-12);
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y  s.t. x + y = 1, x - y = 0.5  →  x = 0.75, y = 0.25
        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, 1.0);
        lp.set_cost(1, 1.0);
        lp.add_equality(&[(0, 1.0), (1, 1.0)], 1.0);
        lp.add_equality(&[(0, 1.0), (1, -1.0)], 0.5);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 0.75).abs() < 1e-12 && (s.x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // min x  s.t. -x - y = -2, x + y = 2 (redundant), y + s = 1.5
        let mut lp = LinearProgram::new(3);
        lp.set_cost(0, 1.0);
        lp.add_equality(&[(0, -1.0), (1, -1.0)], -2.0);
        lp.add_equality(&[(0, 1.0), (1, 1.0)], 2.0);
        lp.add_equality(&[(1, 1.0), (2, 1.0)], 1.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_equality(&[(0, 1.0)], -1.0);
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));

        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, -1.0);
        lp.add_equality(&[(0, 1.0), (1, -1.0)], 0.0);
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));
    }
}
