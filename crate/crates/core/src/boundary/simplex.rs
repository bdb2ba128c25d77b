//! Dense revised simplex for `min cᵀy` subject to `A y = b`, `y ≥ 0`, with
//! a column set that may grow between solves.
//!
//! Phase 1 starts from an all-artificial basis and needs `b ≥ 0`; a known
//! feasible basis may be supplied instead. Artificials never re-enter; those
//! still basic after phase 1 sit at zero and leave at the first pivot that
//! touches them. Pricing uses Devex reference weights, switching to Bland's
//! rule after a run of degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const PRICE_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 40;
const DEGENERATE_RUN: usize = 30;
const HARRIS_SLACK: f64 = 1e-9;
const DEVEX_RESET: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Col(usize),
    Art(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct ColumnLp {
    rows: usize,
    rhs: Vec<f64>,
    /// Column-major storage of the structural columns.
    cols: Vec<f64>,
    ncols: usize,
    costs: Vec<f64>,
    in_basis: Vec<bool>,
    /// Devex reference weights of the structural columns.
    weights: Vec<f64>,
    basis: Vec<Var>,
    /// Row-major basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    feasible: bool,
    pub pivots: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

impl ColumnLp {
    pub fn new(rhs: Vec<f64>) -> Self {
        let rows = rhs.len();
        let mut binv = vec![0.0; rows * rows];
        for r in 0..rows {
            binv[r * rows + r] = 1.0;
        }
        ColumnLp {
            rows,
            xb: rhs.clone(),
            rhs,
            cols: Vec::new(),
            ncols: 0,
            costs: Vec::new(),
            in_basis: Vec::new(),
            weights: Vec::new(),
            basis: (0..rows).map(Var::Art).collect(),
            binv,
            since_refactor: 0,
            feasible: false,
            pivots: 0,
        }
    }

    /// Starts from a basis of structural columns that is known to be
    /// feasible, skipping phase 1.
    pub fn with_basis(rhs: Vec<f64>, columns: Vec<(Vec<f64>, f64)>, basis: &[usize]) -> Result<Self> {
        let mut lp = ColumnLp::new(rhs);
        if basis.len() != lp.rows {
            return Err(Error::Solver("starting basis has the wrong size".into()));
        }
        for (col, cost) in columns {
            lp.add_column(col, cost);
        }
        for (r, &j) in basis.iter().enumerate() {
            lp.basis[r] = Var::Col(j);
            lp.in_basis[j] = true;
        }
        lp.refactor()?;
        if lp.xb.iter().any(|&x| x < -1e-9) {
            return Err(Error::Solver("starting basis is infeasible".into()));
        }
        lp.feasible = true;
        Ok(lp)
    }

    pub fn add_column(&mut self, col: Vec<f64>, cost: f64) -> usize {
        debug_assert_eq!(col.len(), self.rows);
        self.cols.extend_from_slice(&col);
        self.costs.push(cost);
        self.in_basis.push(false);
        self.weights.push(1.0);
        self.ncols += 1;
        self.ncols - 1
    }

    fn cost(&self, v: Var, phase_one: bool) -> f64 {
        match (v, phase_one) {
            (Var::Art(_), true) => 1.0,
            (Var::Col(_), true) | (Var::Art(_), false) => 0.0,
            (Var::Col(j), false) => self.costs[j],
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.rows..(j + 1) * self.rows]
    }

    fn binv_row(&self, r: usize) -> &[f64] {
        &self.binv[r * self.rows..(r + 1) * self.rows]
    }

    /// Simplex multipliers `π = B⁻ᵀ c_B`.
    fn multipliers(&self, phase_one: bool) -> Vec<f64> {
        let mut pi = vec![0.0; self.rows];
        for (r, &v) in self.basis.iter().enumerate() {
            let c = self.cost(v, phase_one);
            if c != 0.0 {
                for (p, b) in pi.iter_mut().zip(self.binv_row(r)) {
                    *p += c * b;
                }
            }
        }
        pi
    }

    /// Recomputes `B⁻¹` by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let n = self.rows;
        let mut b = vec![0.0; n * n];
        for (r, &v) in self.basis.iter().enumerate() {
            match v {
                Var::Col(j) => {
                    for i in 0..n {
                        b[i * n + r] = self.cols[j * n + i];
                    }
                }
                Var::Art(i) => b[i * n + r] = 1.0,
            }
        }
        let inv = &mut self.binv;
        inv.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| b[x * n + c].abs().total_cmp(&b[y * n + c].abs())).unwrap_or(c);
            let piv = b[p * n + c];
            if piv.abs() <= 1e-14 * scale {
                return Err(Error::Solver("singular simplex basis".into()));
            }
            if p != c {
                for k in 0..n {
                    b.swap(p * n + k, c * n + k);
                    inv.swap(p * n + k, c * n + k);
                }
            }
            for k in 0..n {
                b[c * n + k] /= piv;
                inv[c * n + k] /= piv;
            }
            for i in 0..n {
                let f = b[i * n + c];
                if i == c || f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    b[i * n + k] -= f * b[c * n + k];
                    inv[i * n + k] -= f * inv[c * n + k];
                }
            }
        }
        for r in 0..n {
            let s = dot(self.binv_row(r), &self.rhs);
            self.xb[r] = if s > -1e-9 { s.max(0.0) } else { s };
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Reduced costs of all structural columns (zero for basic ones).
    fn reduced_costs(&self, phase_one: bool) -> Vec<f64> {
        let pi = self.multipliers(phase_one);
        (0..self.ncols)
            .map(|j| {
                if self.in_basis[j] {
                    0.0
                } else {
                    let c = if phase_one { 0.0 } else { self.costs[j] };
                    c - dot(self.col(j), &pi)
                }
            })
            .collect()
    }

    /// Runs simplex iterations; `Ok(false)` means the pivot budget ran out
    /// with a feasible but possibly suboptimal basis.
    fn iterate(&mut self, phase_one: bool) -> Result<bool> {
        let n = self.rows;
        let limit = 40 * n + 400;
        let mut degenerate = 0usize;
        let mut alpha = vec![0.0; n];
        let mut rho = vec![0.0; n];
        let mut d = self.reduced_costs(phase_one);
        for _ in 0..limit {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.in_basis[j] || d[j] >= -PRICE_TOL {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                let score = d[j] * d[j] / self.weights[j];
                if entering.is_none() || score > best {
                    best = score;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                // confirm optimality against freshly computed reduced costs
                if self.since_refactor == 0 {
                    return Ok(true);
                }
                self.refactor()?;
                d = self.reduced_costs(phase_one);
                continue;
            };

            for (r, a) in alpha.iter_mut().enumerate() {
                *a = dot(self.binv_row(r), self.col(q));
            }
            let Some((r, theta)) = self.ratio_test(&alpha, phase_one) else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            let ar = alpha[r];

            // Pivot row entries α_rj = (B⁻¹ a_j)_r drive both the reduced-cost
            // update and the Devex weights.
            rho.copy_from_slice(self.binv_row(r));
            let dq = d[q];
            let wq = self.weights[q];
            for j in 0..self.ncols {
                if self.in_basis[j] || j == q {
                    continue;
                }
                let ratio = dot(&rho, self.col(j)) / ar;
                d[j] -= dq * ratio;
                let candidate = ratio * ratio * wq;
                if candidate > self.weights[j] {
                    self.weights[j] = candidate;
                }
            }
            d[q] = 0.0;
            if let Var::Col(j) = self.basis[r] {
                d[j] = -dq / ar;
                self.weights[j] = (wq / (ar * ar)).max(1.0);
            }
            if self.weights.iter().any(|w| !(*w <= DEVEX_RESET)) {
                self.weights.iter_mut().for_each(|w| *w = 1.0);
            }

            for i in 0..n {
                if i != r {
                    self.xb[i] = (self.xb[i] - theta * alpha[i]).max(0.0);
                }
            }
            self.xb[r] = theta;
            let (before, rest) = self.binv.split_at_mut(r * n);
            let (pivot_row, after) = rest.split_at_mut(n);
            for v in pivot_row.iter_mut() {
                *v /= ar;
            }
            for (i, row) in before.chunks_exact_mut(n).chain(after.chunks_exact_mut(n)).enumerate() {
                let f = alpha[if i < r { i } else { i + 1 }];
                if f != 0.0 {
                    for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                        *x -= f * p;
                    }
                }
            }
            if let Var::Col(j) = self.basis[r] {
                self.in_basis[j] = false;
            }
            self.basis[r] = Var::Col(q);
            self.in_basis[q] = true;
            self.pivots += 1;
            degenerate = if theta <= 1e-13 { degenerate + 1 } else { 0 };
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                d = self.reduced_costs(phase_one);
            }
        }
        Ok(false)
    }

    /// Two-pass Harris ratio test: among rows whose ratio is within a small
    /// feasibility slack of the minimum, take the largest pivot. Basic
    /// artificials in phase 2 block at step zero.
    fn ratio_test(&self, alpha: &[f64], phase_one: bool) -> Option<(usize, f64)> {
        let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let tol = PIVOT_TOL.max(1e-9 * scale);
        if !phase_one {
            let art = (0..self.rows)
                .filter(|&r| matches!(self.basis[r], Var::Art(_)) && alpha[r].abs() > tol)
                .max_by(|&a, &b| alpha[a].abs().total_cmp(&alpha[b].abs()));
            if let Some(r) = art {
                return Some((r, 0.0));
            }
        }
        let bound = (0..self.rows)
            .filter(|&r| alpha[r] > tol)
            .map(|r| (self.xb[r].max(0.0) + HARRIS_SLACK) / alpha[r])
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        let r = (0..self.rows)
            .filter(|&r| alpha[r] > tol && self.xb[r].max(0.0) / alpha[r] <= bound)
            .max_by(|&a, &b| alpha[a].total_cmp(&alpha[b]).then(b.cmp(&a)))?;
        Some((r, self.xb[r].max(0.0) / alpha[r]))
    }

    /// Optimises over the current columns, running phase 1 on first use.
    /// Returns whether optimality was reached within the pivot budget; the
    /// basis is feasible either way.
    pub fn solve(&mut self) -> Result<bool> {
        if !self.feasible {
            if self.rhs.iter().any(|&b| b < 0.0) {
                return Err(Error::Solver("phase 1 needs a nonnegative right-hand side".into()));
            }
            if !self.iterate(true)? {
                return Err(Error::Solver("simplex phase 1 did not converge".into()));
            }
            let infeas: f64 =
                self.basis.iter().zip(&self.xb).filter(|(v, _)| matches!(v, Var::Art(_))).map(|(_, x)| x).sum();
            if infeas > 1e-9 {
                return Err(Error::Solver(format!("linear program is infeasible (phase 1 residual {infeas:.3e})")));
            }
            self.feasible = true;
            self.weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let optimal = self.iterate(false)?;
        self.refactor()?;
        Ok(optimal)
    }

    /// Dual multipliers of the equality rows at the current basis.
    pub fn duals(&self) -> Vec<f64> {
        self.multipliers(false)
    }

    /// Values of the structural variables.
    pub fn primal(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for (&v, &x) in self.basis.iter().zip(&self.xb) {
            if let Var::Col(j) = v {
                y[j] = x;
            }
        }
        y
    }

    pub fn objective(&self) -> f64 {
        self.primal().iter().zip(&self.costs).map(|(y, c)| y * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x1 - 2x2  s.t. x1 + x2 + s1 = 4, x2 + s2 = 3
        let mut lp = ColumnLp::new(vec![4.0, 3.0]);
        lp.add_column(vec![1.0, 0.0], -1.0);
        lp.add_column(vec![1.0, 1.0], -2.0);
        lp.add_column(vec![1.0, 0.0], 0.0);
        lp.add_column(vec![0.0, 1.0], 0.0);
        assert!(lp.solve().unwrap());
        assert!((lp.objective() + 7.0).abs() < 1e-12);
        let y = lp.primal();
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 3.0).abs() < 1e-12);
        // strong duality: bᵀπ equals the optimum
        let pi = lp.duals();
        assert!((4.0 * pi[0] + 3.0 * pi[1] + 7.0).abs() < 1e-12);
    }

    #[test]
    fn columns_added_later() {
        let mut lp = ColumnLp::new(vec![1.0]);
        lp.add_column(vec![1.0], 5.0);
        assert!(lp.solve().unwrap());
        assert_eq!(lp.objective(), 5.0);
        lp.add_column(vec![2.0], 4.0);
        assert!(lp.solve().unwrap());
        assert!((lp.objective() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_starting_basis() {
        // min y0 + 3 y1  s.t. y0 - y1 + y2 = 1, y0 + y1 = 2: optimum at y0 = 1.5
        let cols = vec![(vec![1.0, 1.0], 1.0), (vec![-1.0, 1.0], 3.0), (vec![1.0, 0.0], 0.0)];
        let mut lp = ColumnLp::with_basis(vec![1.0, 2.0], cols, &[1, 2]).unwrap();
        assert!(lp.solve().unwrap());
        assert!((lp.objective() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = ColumnLp::new(vec![1.0]);
        lp.add_column(vec![-1.0], 0.0);
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));
    }
}
