//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Replaces components smaller than `eps` in absolute value by exact zeros.
pub fn snap(z: Complex64, eps: f64) -> Complex64 {
    let re = if z.re.abs() < eps { 0.0 } else { z.re };
    let im = if z.im.abs() < eps { 0.0 } else { z.im };
    Complex64::new(re, im)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with singular-value threshold `rel_tol × σ_max`.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > f64::MIN_POSITIVE => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let (r, n) = m.shape();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let padded = if r < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (r, n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = if smax > f64::MIN_POSITIVE { rel_tol * smax } else { f64::INFINITY };
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= thr)
        .collect();
    let mut out = CMat::zeros(n, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        for i in 0..n {
            out[(i, c)] = v_t[(k, i)].conj();
        }
    }
    out
}

/// Least-squares solution of `a x = b` through a truncated SVD. Returns the
/// solution and the Euclidean residual norm.
pub fn least_squares(a: &CMat, b: &[Complex64], rel_tol: f64) -> (Vec<Complex64>, f64) {
    let (r, n) = a.shape();
    assert_eq!(r, b.len(), "right-hand side length");
    if n == 0 {
        return (Vec::new(), norm2(b));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u");
    let v_t = svd.v_t.as_ref().expect("v_t");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut x = vec![ZERO; n];
    for k in 0..s.len() {
        if s[k] <= rel_tol * smax || s[k] <= f64::MIN_POSITIVE {
            continue;
        }
        let mut coef = ZERO;
        for i in 0..r {
            coef += u[(i, k)].conj() * b[i];
        }
        coef /= s[k];
        for j in 0..n {
            x[j] += v_t[(k, j)].conj() * coef;
        }
    }
    let mut res = 0.0;
    for i in 0..r {
        let mut ax = ZERO;
        for j in 0..n {
            ax += a[(i, j)] * x[j];
        }
        res += (ax - b[i]).norm_sqr();
    }
    (x, res.sqrt())
}

/// Builds a matrix whose columns are the given vectors.
pub fn from_columns(rows: usize, cols: &[Vec<Complex64>]) -> CMat {
    let mut m = CMat::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        assert_eq!(c.len(), rows, "column length");
        for (i, z) in c.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

/// Incrementally grown orthonormal basis, used for rank and span tests.
///
/// Vectors are orthogonalised by two passes of modified Gram–Schmidt; a vector
/// is independent when its residual exceeds `rel_tol` times its own norm.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    len: usize,
    rel_tol: f64,
    q: Vec<Vec<Complex64>>,
}

impl SpanBasis {
    pub fn new(len: usize, rel_tol: f64) -> Self {
        SpanBasis { len, rel_tol, q: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.q
    }

    fn residual(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.q {
                let c = cdot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        r
    }

    /// Relative distance of `v` from the span (0 for the zero vector).
    pub fn relative_residual(&self, v: &[Complex64]) -> f64 {
        assert_eq!(v.len(), self.len, "vector length");
        let nv = norm2(v);
        if nv == 0.0 {
            return 0.0;
        }
        norm2(&self.residual(v)) / nv
    }

    pub fn contains(&self, v: &[Complex64]) -> bool {
        self.relative_residual(v) <= self.rel_tol
    }

    /// Appends `v` if it is independent of the current span.
    pub fn try_push(&mut self, v: &[Complex64]) -> bool {
        assert_eq!(v.len(), self.len, "vector length");
        let nv = norm2(v);
        if nv == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let nr = norm2(&r);
        if nr <= self.rel_tol * nv {
            return false;
        }
        self.q.push(r.into_iter().map(|z| z / nr).collect());
        true
    }
}

/// Householder reflector `H = I − 2uu*` with `H e₁ = φ v/‖v‖` for a unit phase
/// φ. Returns the reflector vector `u` and the phase.
pub fn householder(v: &[Complex64]) -> (Vec<Complex64>, Complex64) {
    let nv = norm2(v);
    assert!(nv > 0.0, "householder of zero vector");
    let x: Vec<Complex64> = v.iter().map(|z| z / nv).collect();
    // H e1 = y where y = phase * x; pick phase so e1 - y is well conditioned.
    let phase = if x[0].norm() > 0.0 { -x[0].conj() / x[0].norm() } else { -ONE };
    let mut u: Vec<Complex64> = x.iter().map(|z| -phase * z).collect();
    u[0] += ONE;
    let nu = norm2(&u);
    for z in &mut u {
        *z /= nu;
    }
    (u, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMat::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let n = null_space(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        let prod = &m * &n;
        assert!(prod.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn least_squares_recovers_solution() {
        let a = CMat::from_row_slice(3, 2, &[ONE, ZERO, ONE, ONE, ONE, c(2.0, 0.0)]);
        let b = [c(1.0, 1.0), c(3.0, 1.0), c(5.0, 1.0)];
        let (x, res) = least_squares(&a, &b, 1e-12);
        assert!(res < 1e-12);
        assert!((x[0] - c(1.0, 1.0)).norm() < 1e-12);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn span_basis_detects_dependence() {
        let mut s = SpanBasis::new(3, 1e-10);
        assert!(s.try_push(&[ONE, ONE, ZERO]));
        assert!(s.try_push(&[ONE, ZERO, ZERO]));
        assert!(!s.try_push(&[c(0.0, 2.0), c(3.0, 0.0), ZERO]));
        assert!(!s.try_push(&[ZERO, ZERO, ZERO]));
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn householder_maps_e1_to_direction() {
        let v = [c(0.3, -1.0), c(2.0, 0.5), c(0.0, 0.1)];
        let (u, phase) = householder(&v);
        // H e1 = e1 - 2 u conj(u0)
        let nv = norm2(&v);
        for i in 0..3 {
            let he1 = if i == 0 { ONE } else { ZERO } - 2.0 * u[i] * u[0].conj();
            assert!((he1 - phase * v[i] / nv).norm() < 1e-12);
        }
    }
}
