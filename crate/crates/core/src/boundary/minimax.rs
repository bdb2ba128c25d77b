//! Peak certification: minimise `max_{φ≠i} |(Vc)(φ)|` subject to `(Vc)(i) = 1`.
//!
//! The witness columns are first replaced by an orthonormal basis `Q` of
//! their span. The affine slice `{d : Q_i d = 1}` is parametrised as
//! `d = c₀ + N z` with `N` taken from a Householder reflector, so the
//! off-target values are `w(z) = W₀ + W₁ z`.
//!
//! Each modulus is replaced by the maximum of `Re(e^{-iθ_k} w)` over `m`
//! equally spaced directions. The resulting linear program is solved in dual
//! form by column generation: only directions that the current primal point
//! violates are added. Its value `p` satisfies `p ≤ opt ≤ p·sec(π/m)`.
//! A smoothed first-order method then polishes the LP point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::simplex::ColumnLp;
use super::WitnessFamily;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};

/// Relative singular-value cutoff when orthonormalising witness columns.
const RANK_TOL: f64 = 1e-10;
/// A target row with norm below this (relative to the family) vanishes.
const ZERO_ROW_TOL: f64 = 1e-12;
const VIOLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub tol: f64,
    /// Polygon sides `m` used for the modulus.
    pub sides: usize,
    /// Iteration budget of the refinement stage.
    pub refine_iterations: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tol: 1e-4, sides: 32, refine_iterations: 400 }
    }
}

impl CertifyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.sides < 8 {
            return Err(Error::InvalidParams(format!("polygon needs at least 8 sides, got {}", self.sides)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParams(format!("tolerance {} outside (0, 1)", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakStatus {
    CertifiedPeak,
    CertifiedNotPeak,
    Undecided,
}

impl PeakStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeakStatus::CertifiedPeak => "certified_peak",
            PeakStatus::CertifiedNotPeak => "certified_not_peak",
            PeakStatus::Undecided => "undecided",
        }
    }
}

/// Bracket on the minimax optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lp_lower: f64,
    pub lp_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCertificate {
    pub target: usize,
    pub status: PeakStatus,
    /// Witness coefficients `c` with `(Vc)(target) = 1`.
    #[serde(with = "crate::json::complex_vec")]
    pub coefficients: Vec<Complex64>,
    /// `1 − max_{φ≠target} |(Vc)(φ)|`, from direct re-evaluation.
    pub separation: f64,
    /// Refined minimax value attained by `coefficients`.
    pub optimum: f64,
    pub bounds: Option<Bounds>,
}

impl PeakCertificate {
    /// Re-evaluates the certificate on the family: returns the target value
    /// and the largest off-target modulus.
    pub fn reevaluate(&self, family: &WitnessFamily) -> (Complex64, f64) {
        let vals = family.apply(&self.coefficients);
        let off = vals.iter().enumerate().filter(|(k, _)| *k != self.target).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        (vals[self.target], off)
    }
}

/// A witness family split into independent blocks, ready for repeated
/// certification.
///
/// Rows and columns are grouped into connected components of the nonzero
/// pattern. Off-target rows outside the target's block can be driven to zero
/// by zeroing the other blocks' coefficients, so each target is certified
/// within its own block. Blocks with identical value matrices are prepared
/// once.
#[derive(Debug, Clone)]
pub struct PreparedFamily {
    cols: usize,
    blocks: Vec<PreparedBlock>,
    /// Global column indices of each block occurrence.
    occurrences: Vec<(usize, Vec<usize>)>,
    /// Per row: `(occurrence, local row)`, or `None` for an all-zero row.
    placement: Vec<Option<(usize, usize)>>,
}

impl PreparedFamily {
    pub fn new(family: &WitnessFamily) -> Result<Self> {
        let (rows, cols) = (family.rows(), family.cols());
        if rows == 0 || cols == 0 {
            return Err(Error::Degenerate("witness family has no rows or no columns".into()));
        }
        // union-find over rows 0..rows and columns rows..rows+cols
        let mut parent: Vec<usize> = (0..rows + cols).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, row) in family.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != ZERO {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, rows + j));
                    parent[a] = b;
                }
            }
        }
        let mut components: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
        let mut placement = vec![None; rows];
        for i in 0..rows {
            if family.values[i].iter().all(|v| *v == ZERO) {
                continue;
            }
            let root = find(&mut parent, i);
            let k = match components.iter().position(|c| c.0 == root) {
                Some(k) => k,
                None => {
                    let cols_of: Vec<usize> = (0..cols).filter(|&j| find(&mut parent, rows + j) == root).collect();
                    components.push((root, Vec::new(), cols_of));
                    components.len() - 1
                }
            };
            placement[i] = Some((k, components[k].1.len()));
            components[k].1.push(i);
        }
        if components.is_empty() {
            return Err(Error::Degenerate("witness family has rank 0".into()));
        }

        let mut blocks = Vec::new();
        let mut matrices: Vec<CMat> = Vec::new();
        let mut occurrences = Vec::with_capacity(components.len());
        for (_, block_rows, block_cols) in &components {
            let m = CMat::from_fn(block_rows.len(), block_cols.len(), |a, b| family.values[block_rows[a]][block_cols[b]]);
            let unique = match matrices.iter().position(|x| *x == m) {
                Some(u) => u,
                None => {
                    blocks.push(PreparedBlock::new(m.clone())?);
                    matrices.push(m);
                    blocks.len() - 1
                }
            };
            occurrences.push((unique, block_cols.clone()));
        }
        Ok(PreparedFamily { cols, blocks, occurrences, placement })
    }

    /// Number of independent blocks, and how many of them are distinct.
    pub fn block_counts(&self) -> (usize, usize) {
        (self.occurrences.len(), self.blocks.len())
    }

    pub fn rank(&self) -> usize {
        self.occurrences.iter().map(|(u, _)| self.blocks[*u].rank()).sum()
    }

    /// Certifies candidate `target`.
    pub fn certify(&self, target: usize, opts: &CertifyOptions) -> Result<PeakCertificate> {
        opts.validate()?;
        let Some(&place) = self.placement.get(target) else {
            return Err(Error::UnknownPoint(target));
        };
        let Some((occ, local)) = place else {
            return Ok(PeakCertificate::vanishing(target, self.cols));
        };
        let cert = self.blocks[self.occurrences[occ].0].certify(local, opts)?;
        Ok(self.globalise(cert, target, occ))
    }

    /// Certifies every candidate, sharing work between identical blocks and
    /// spreading it over the available threads.
    pub fn certify_all(&self, opts: &CertifyOptions) -> Result<Vec<PeakCertificate>> {
        opts.validate()?;
        let mut jobs: Vec<(usize, usize)> = self
            .placement
            .iter()
            .flatten()
            .map(|&(occ, local)| (self.occurrences[occ].0, local))
            .collect();
        jobs.sort_unstable();
        jobs.dedup();
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
        let chunk = jobs.len().div_ceil(threads);
        let solved: Vec<Result<PeakCertificate>> = if threads == 1 {
            jobs.iter().map(|&(u, local)| self.blocks[u].certify(local, opts)).collect()
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = jobs
                    .chunks(chunk)
                    .map(|part| {
                        scope.spawn(move || part.iter().map(|&(u, local)| self.blocks[u].certify(local, opts)).collect::<Vec<_>>())
                    })
                    .collect();
                handles.into_iter().flat_map(|h| h.join().expect("certification thread panicked")).collect()
            })
        };
        let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
        (0..self.placement.len())
            .map(|target| match self.placement[target] {
                None => Ok(PeakCertificate::vanishing(target, self.cols)),
                Some((occ, local)) => {
                    let key = (self.occurrences[occ].0, local);
                    let k = jobs.binary_search(&key).expect("job was scheduled");
                    Ok(self.globalise(solved[k].clone(), target, occ))
                }
            })
            .collect()
    }

    fn globalise(&self, mut cert: PeakCertificate, target: usize, occ: usize) -> PeakCertificate {
        let mut coefficients = vec![ZERO; self.cols];
        for (&j, c) in self.occurrences[occ].1.iter().zip(&cert.coefficients) {
            coefficients[j] = *c;
        }
        cert.target = target;
        cert.coefficients = coefficients;
        cert
    }
}

impl PeakCertificate {
    /// Certificate for a candidate at which every witness vanishes.
    fn vanishing(target: usize, cols: usize) -> Self {
        PeakCertificate {
            target,
            status: PeakStatus::CertifiedNotPeak,
            coefficients: vec![ZERO; cols],
            separation: f64::NEG_INFINITY,
            optimum: f64::INFINITY,
            bounds: None,
        }
    }
}

/// Orthonormal basis of one block's column span, shared by all of its
/// targets.
#[derive(Debug, Clone)]
struct PreparedBlock {
    values: CMat,
    q: CMat,
    /// Maps `d` (coordinates in `Q`) back to witness coefficients.
    back: CMat,
    row_scale: f64,
}

impl PreparedBlock {
    fn new(values: CMat) -> Result<Self> {
        let (rows, cols) = values.shape();
        let svd = values.clone().svd(true, true);
        let u = svd.u.as_ref().expect("u");
        let v_t = svd.v_t.as_ref().expect("v_t");
        let s = &svd.singular_values;
        let smax = s.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > RANK_TOL * smax && s[k] > f64::MIN_POSITIVE).collect();
        if keep.is_empty() {
            return Err(Error::Degenerate("witness family has rank 0".into()));
        }
        let q = CMat::from_fn(rows, keep.len(), |i, k| u[(i, keep[k])]);
        let back = CMat::from_fn(cols, keep.len(), |j, k| v_t[(keep[k], j)].conj() / s[keep[k]]);
        let row_scale = (0..rows).map(|i| q.row(i).norm()).fold(0.0, f64::max);
        Ok(PreparedBlock { values, q, back, row_scale })
    }

    fn rank(&self) -> usize {
        self.q.ncols()
    }

    fn coefficients(&self, d: &[Complex64]) -> Vec<Complex64> {
        (0..self.back.nrows()).map(|j| (0..d.len()).map(|k| self.back[(j, k)] * d[k]).sum()).collect()
    }

    fn certify(&self, target: usize, opts: &CertifyOptions) -> Result<PeakCertificate> {
        let (rows, q) = self.q.shape();
        let qi: Vec<Complex64> = self.q.row(target).iter().copied().collect();
        let qi_norm = linalg::norm2(&qi);
        if qi_norm <= ZERO_ROW_TOL * self.row_scale.max(f64::MIN_POSITIVE) {
            return Ok(PeakCertificate::vanishing(target, self.values.ncols()));
        }

        // d = c0 + N z with Q_i c0 = 1 and Q_i N = 0.
        let c0: Vec<Complex64> = qi.iter().map(|x| x.conj() / (qi_norm * qi_norm)).collect();
        let v: Vec<Complex64> = qi.iter().map(|x| x.conj()).collect();
        let (hu, _) = linalg::householder(&v);
        let off: Vec<usize> = (0..rows).filter(|&r| r != target).collect();
        let r = q - 1;
        let mut w0 = vec![ZERO; off.len()];
        let mut w1 = vec![ZERO; off.len() * r];
        for (a, &row) in off.iter().enumerate() {
            let qrow: Vec<Complex64> = self.q.row(row).iter().copied().collect();
            w0[a] = qrow.iter().zip(&c0).map(|(x, y)| x * y).sum();
            let qu: Complex64 = qrow.iter().zip(&hu).map(|(x, y)| x * y).sum();
            for k in 0..r {
                w1[a * r + k] = qrow[k + 1] - 2.0 * qu * hu[k + 1].conj();
            }
        }
        let slice = Slice { w0, w1, r };
        let to_d = |z: &[Complex64]| -> Vec<Complex64> {
            // N z = H [0; z] = [0; z] − 2 u (uᴴ [0; z])
            let uz: Complex64 = (0..r).map(|k| hu[k + 1].conj() * z[k]).sum();
            (0..q)
                .map(|k| {
                    let ez = if k == 0 { ZERO } else { z[k - 1] };
                    c0[k] + ez - 2.0 * hu[k] * uz
                })
                .collect()
        };

        if off.is_empty() {
            let coefficients = self.finish(&to_d(&vec![ZERO; r]), target);
            return Ok(PeakCertificate {
                target,
                status: PeakStatus::CertifiedPeak,
                coefficients,
                separation: 1.0,
                optimum: 0.0,
                bounds: Some(Bounds { lp_lower: 0.0, lp_upper: 0.0 }),
            });
        }

        // Any z with max|w(z)| ≤ U has ‖d‖ = ‖Q d‖ ≤ √(1 + (R−1)U²), and
        // ‖z‖ = ‖N z‖ ≤ ‖d‖ + ‖c₀‖.
        let radius = |u: f64| (1.0 + off.len() as f64 * u * u).sqrt() + 1.0 / qi_norm;
        let sec = 1.0 / (PI / opts.sides as f64).cos();

        let (z_lp, polygon) = if r == 0 {
            (Vec::new(), None)
        } else {
            let centre = slice.refine(&vec![ZERO; r], opts.refine_iterations / 2);
            let u = slice.value(&centre);
            let sol = slice.solve_polygon(opts.sides, &centre, radius(u * sec) * (1.0 + 1e-9) + 1e-12)?;
            (sol.z.clone(), Some(sol))
        };
        let lp_coeffs = self.finish(&to_d(&z_lp), target);
        let lp_upper = self.off_target_max(&lp_coeffs, target);

        let (coefficients, optimum) = if r == 0 {
            (lp_coeffs, lp_upper)
        } else {
            let z_ref = slice.refine(&z_lp, opts.refine_iterations);
            let ref_coeffs = self.finish(&to_d(&z_ref), target);
            let ref_val = self.off_target_max(&ref_coeffs, target);
            if ref_val < lp_upper {
                (ref_coeffs, ref_val)
            } else {
                (lp_coeffs, lp_upper)
            }
        };
        let lp_lower = match &polygon {
            None => optimum,
            Some(sol) => sol.value,
        };
        let lp_lower = lp_lower.clamp(0.0, lp_upper);

        let status = if optimum < 1.0 - opts.tol {
            PeakStatus::CertifiedPeak
        } else if lp_lower >= 1.0 - opts.tol * 1e-2 {
            PeakStatus::CertifiedNotPeak
        } else {
            PeakStatus::Undecided
        };
        Ok(PeakCertificate { target, status, coefficients, separation: 1.0 - optimum, optimum, bounds: Some(Bounds { lp_lower, lp_upper }) })
    }

    /// Witness coefficients for `d`, rescaled so the target value is exactly 1
    /// on the original value matrix.
    fn finish(&self, d: &[Complex64], target: usize) -> Vec<Complex64> {
        let c = self.coefficients(d);
        let t: Complex64 = (0..c.len()).map(|j| self.values[(target, j)] * c[j]).sum();
        c.into_iter().map(|x| x / t).collect()
    }

    fn off_target_max(&self, c: &[Complex64], target: usize) -> f64 {
        (0..self.values.nrows())
            .filter(|&i| i != target)
            .map(|i| (0..c.len()).map(|j| self.values[(i, j)] * c[j]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

struct PolygonSolution {
    z: Vec<Complex64>,
    /// Value of the boxed LP, replaced by a certified lower bound on return
    /// from [`Slice::solve_polygon`].
    value: f64,
    lambda: Vec<Complex64>,
}

/// Off-target values `w(z) = W₀ + W₁ z` on the normalised affine slice.
struct Slice {
    w0: Vec<Complex64>,
    /// Row-major, `r` columns.
    w1: Vec<Complex64>,
    r: usize,
}

impl Slice {
    fn row(&self, a: usize) -> &[Complex64] {
        &self.w1[a * self.r..(a + 1) * self.r]
    }

    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let r = z.len();
        (0..self.w0.len()).map(|a| self.w0[a] + self.row(a).iter().zip(&z[..r]).map(|(w, z)| w * z).sum::<Complex64>()).collect()
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        self.eval(z).iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// LP column for row `a` and direction `k`: `[Re(u W₁), −Im(u W₁), 1]`
    /// with cost `−Re(u W₀)`, where `u = e^{-iθ_k}`.
    fn column(&self, a: usize, k: usize, m: usize) -> (Vec<f64>, f64) {
        let r = self.r;
        let u = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64);
        let mut col = vec![0.0; 2 * r + 1];
        for j in 0..r {
            let g = u * self.w1[a * self.r + j];
            col[j] = g.re;
            col[r + j] = -g.im;
        }
        col[2 * r] = 1.0;
        (col, -(u * self.w0[a]).re)
    }

    fn nearest_direction(w: Complex64, m: usize) -> usize {
        let k = (w.arg() * m as f64 / (2.0 * PI)).round() as i64;
        k.rem_euclid(m as i64) as usize
    }

    /// Solves the polygonal LP restricted to the box `|Re, Im (z − centre)_j| ≤
    /// half_width` by column generation from the box-corner basis. If the
    /// pivot budget runs out the last feasible basis is used.
    fn solve_boxed(&self, m: usize, centre: &[Complex64], half_width: f64) -> Result<PolygonSolution> {
        let rows = self.w0.len();
        let r = self.r;
        let n = 2 * r + 1;
        let mut rhs = vec![0.0; n];
        rhs[2 * r] = 1.0;
        // values at the centre play the role of W₀ in shifted coordinates
        let shifted = self.eval(centre);
        let column = |a: usize, k: usize| {
            let (col, _) = self.column(a, k, m);
            let u = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64);
            (col, -(u * shifted[a]).re)
        };

        let anchor = (0..rows).max_by(|&a, &b| shifted[a].norm().total_cmp(&shifted[b].norm())).unwrap_or(0);
        let mut keys: Vec<(usize, usize)> = (0..rows).map(|a| (a, Self::nearest_direction(shifted[a], m))).collect();
        let mut present: std::collections::HashSet<(usize, usize)> = keys.iter().copied().collect();
        let mut columns: Vec<(Vec<f64>, f64)> = keys.iter().map(|&(a, k)| column(a, k)).collect();
        let box_start = columns.len();
        for j in 0..2 * r {
            for sign in [1.0, -1.0] {
                let mut col = vec![0.0; n];
                col[j] = sign;
                columns.push((col, half_width));
            }
        }
        // y_anchor = 1 with box columns cancelling its coordinates.
        let mut basis = Vec::with_capacity(n);
        for j in 0..2 * r {
            basis.push(box_start + 2 * j + usize::from(columns[anchor].0[j] > 0.0));
        }
        basis.push(anchor);
        let mut lp = ColumnLp::with_basis(rhs, columns, &basis)?;

        let mut x = vec![ZERO; r];
        for _ in 0..(rows * m + 1) {
            let optimal = lp.solve()?;
            let pi = lp.duals();
            x = (0..r).map(|j| Complex64::new(pi[j], pi[r + j])).collect();
            let t = -pi[2 * r];
            let w = self.eval(&x);
            let mut added = false;
            for (a, wa) in w.iter().enumerate() {
                let wa = wa - self.w0[a] + shifted[a];
                let k = Self::nearest_direction(wa, m);
                let u = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64);
                if (u * wa).re - t > VIOLATION_TOL * (1.0 + t.abs()) && present.insert((a, k)) {
                    let (col, cost) = column(a, k);
                    lp.add_column(col, cost);
                    keys.push((a, k));
                    added = true;
                }
            }
            if !added || !optimal {
                break;
            }
        }

        let y = lp.primal();
        let index = |c: usize| if c < box_start { c } else { c + 4 * r };
        let mut lambda = vec![ZERO; rows];
        for (c, &(a, k)) in keys.iter().enumerate() {
            let ya = y[index(c)];
            if ya > 0.0 {
                lambda[a] += ya * Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64);
            }
        }
        let z = centre.iter().zip(&x).map(|(c, x)| c + x).collect();
        Ok(PolygonSolution { z, value: -lp.objective(), lambda })
    }

    /// Solves the polygonal LP inside a box around `centre` that contains the
    /// ball `‖z‖ ≤ limit`. When that ball holds a true minimiser and the LP
    /// optimiser, the box changes neither value; it keeps every restricted LP
    /// bounded and supplies a feasible starting basis. The returned value is
    /// the larger of the LP value and the multiplier bound.
    fn solve_polygon(&self, m: usize, centre: &[Complex64], limit: f64) -> Result<PolygonSolution> {
        let mut sol = self.solve_boxed(m, centre, limit + linalg::norm2(centre))?;
        sol.value = sol.value.max(self.dual_bound(&sol.lambda, limit));
        Ok(sol)
    }

    /// Lower bound from multipliers `λ`. They are first projected so that
    /// `Σ λ_a W₁_a = 0`; since `W₁` has orthonormal columns the least-norm
    /// correction is `−conj(W₁)·s` for the residual `s`. Then for every `z`
    /// with `‖z‖ ≤ radius`, `|Σ λ_a w_a(z)| ≥ |Σ λ_a W₀_a| − ‖Σ λ_a W₁_a‖·radius`
    /// while the left side is at most `Σ|λ_a|·max|w(z)|`.
    fn dual_bound(&self, lambda: &[Complex64], radius: f64) -> f64 {
        let r = self.r;
        let rows = lambda.len();
        let residual = |l: &[Complex64]| -> Vec<Complex64> {
            let mut s = vec![ZERO; r];
            for (a, la) in l.iter().enumerate().take(rows) {
                for (sj, w) in s.iter_mut().zip(self.row(a)) {
                    *sj += la * w;
                }
            }
            s
        };
        let s = residual(lambda);
        let projected: Vec<Complex64> =
            (0..rows).map(|a| lambda[a] - (0..r).map(|j| self.w1[a * self.r + j].conj() * s[j]).sum::<Complex64>()).collect();
        let mass: f64 = projected.iter().map(|l| l.norm()).sum();
        if mass <= 0.0 {
            return 0.0;
        }
        let left = linalg::norm2(&residual(&projected));
        let s0: Complex64 = projected.iter().zip(&self.w0).map(|(l, w)| l * w).sum();
        (s0.norm() - left * radius) / mass
    }

    /// Log-sum-exp smoothing with a decreasing temperature, minimised by
    /// accelerated gradient descent with backtracking. Returns the best point
    /// seen for the unsmoothed objective.
    fn refine(&self, start: &[Complex64], budget: usize) -> Vec<Complex64> {
        let r = start.len();
        let mut best_z = start.to_vec();
        let mut best = self.value(start);
        if best == 0.0 || budget == 0 {
            return best_z;
        }
        let n = self.w0.len() as f64;
        let row_norm2 = (0..self.w0.len())
            .map(|a| (0..r).map(|k| self.w1[a * self.r + k].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1e-300);

        let smoothed = |z: &[Complex64], mu: f64, grad: Option<&mut Vec<Complex64>>| -> f64 {
            let w = self.eval(z);
            let mods: Vec<f64> = w.iter().map(|x| x.norm()).collect();
            let top = mods.iter().copied().fold(0.0, f64::max);
            let weights: Vec<f64> = mods.iter().map(|m| ((m - top) / mu).exp()).collect();
            let total: f64 = weights.iter().sum();
            if let Some(g) = grad {
                g.iter_mut().for_each(|x| *x = ZERO);
                for (a, wa) in w.iter().enumerate() {
                    if mods[a] == 0.0 || weights[a] < 1e-300 {
                        continue;
                    }
                    let s = (weights[a] / total) * (wa / mods[a]);
                    for (gk, w) in g.iter_mut().zip(self.row(a)) {
                        *gk += w.conj() * s;
                    }
                }
            }
            top + mu * total.ln()
        };

        let stages = 6usize;
        let per_stage = (budget / stages).max(1);
        let mut mu = 0.05 * best / n.ln().max(1.0);
        let mut z = best_z.clone();
        let mut grad = vec![ZERO; r];
        for _stage in 0..stages {
            let mut step = mu / row_norm2;
            let mut y = z.clone();
            let mut momentum = 1.0f64;
            let mut stall = 0;
            for _ in 0..per_stage {
                let fy = smoothed(&y, mu, Some(&mut grad));
                let g2: f64 = grad.iter().map(|g| g.norm_sqr()).sum();
                if g2 < 1e-30 {
                    break;
                }
                let mut z_new;
                loop {
                    z_new = y.iter().zip(&grad).map(|(a, g)| a - g * step).collect::<Vec<_>>();
                    if smoothed(&z_new, mu, None) <= fy - 0.5 * step * g2 || step < 1e-300 {
                        break;
                    }
                    step *= 0.5;
                }
                let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                let beta = (momentum - 1.0) / next;
                y = z_new.iter().zip(&z).map(|(a, b)| a + (a - b) * beta).collect();
                momentum = next;
                z = z_new;
                step *= 1.25;

                let v = self.value(&z);
                if v < best - 1e-12 * best.max(1e-300) {
                    best = v;
                    best_z.clone_from(&z);
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > 25 {
                        break;
                    }
                }
            }
            z.clone_from(&best_z);
            mu *= 0.1;
        }
        best_z
    }
}

/// Certifies whether candidate `target` of `family` is a peak point of the
/// witness span.
pub fn certify_peak(family: &WitnessFamily, target: usize, opts: &CertifyOptions) -> Result<PeakCertificate> {
    PreparedFamily::new(family)?.certify(target, opts)
}
