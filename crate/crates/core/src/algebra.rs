//! Finite-dimensional commutative unital algebras presented by structure
//! constants, normed by a weighted ℓ¹ coordinate norm.
//!
//! With basis `e_0, …, e_{n-1}` the product is `e_i e_j = Σ_k c[i][j][k] e_k`
//! and the norm is `‖Σ a_i e_i‖ = Σ w_i |a_i|`. Submultiplicativity of that
//! norm follows from the finite certificate `‖e_i e_j‖ ≤ w_i w_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{from_pair, to_pair};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::report::{Check, ValidationReport};

/// Tolerance for structural identities (commutativity, associativity, unit).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Singular-value threshold (relative to the largest) used by [`AlgebraSpec::invert`].
pub const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraSpec {
    dim: usize,
    /// Flattened `c[i][j][k]` at `(i * dim + j) * dim + k`.
    structure: Vec<Complex64>,
    unit: Vec<Complex64>,
    weights: Vec<f64>,
    label: String,
}

/// An element of an algebra, given by its coordinates in the algebra's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub coords: Vec<Complex64>,
}

impl Element {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Element { coords }
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Element::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scale(&self, s: Complex64) -> Element {
        Element::new(self.coords.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.dim(), other.dim(), "element dimensions");
        Element::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(-ONE))
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.coords)
    }
}

/// Named fixture algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Preset {
    /// `ℂⁿ` with pointwise product and idempotent basis.
    Pointwise { n: usize },
    /// `ℂ[ε]/(ε²)` with basis `(1, ε)`.
    DualNumbers,
    /// `ℂ[t]/(tᵏ)` with basis `(1, t, …, t^{k-1})`.
    TruncatedPoly { k: usize },
    /// Group algebra of `ℤ/n` with basis `(1, g, …, g^{n-1})`.
    CyclicGroup { n: usize },
}

impl Preset {
    /// Parses names such as `pointwise_2`, `dual_numbers`, `truncated_poly_3`,
    /// `cyclic_group_3` and `complex` (an alias for `pointwise_1`).
    pub fn from_name(name: &str) -> Result<Preset> {
        let param = |prefix: &str| -> Result<usize> {
            name[prefix.len()..]
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("bad preset name `{name}`")))
        };
        match name {
            "dual_numbers" => Ok(Preset::DualNumbers),
            "complex" => Ok(Preset::Pointwise { n: 1 }),
            _ if name.starts_with("pointwise_") => Ok(Preset::Pointwise { n: param("pointwise_")? }),
            _ if name.starts_with("truncated_poly_") => {
                Ok(Preset::TruncatedPoly { k: param("truncated_poly_")? })
            }
            _ if name.starts_with("cyclic_group_") => {
                Ok(Preset::CyclicGroup { n: param("cyclic_group_")? })
            }
            _ => Err(Error::InvalidParams(format!("unknown preset `{name}`"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Preset::Pointwise { n } => format!("pointwise_{n}"),
            Preset::DualNumbers => "dual_numbers".to_string(),
            Preset::TruncatedPoly { k } => format!("truncated_poly_{k}"),
            Preset::CyclicGroup { n } => format!("cyclic_group_{n}"),
        }
    }

    pub fn build(&self) -> Result<AlgebraSpec> {
        preset_algebra(*self)
    }
}

type ProductTable = Box<dyn Fn(usize, usize) -> Option<usize>>;

/// Builds a validated fixture algebra.
pub fn preset_algebra(kind: Preset) -> Result<AlgebraSpec> {
    let (dim, table): (usize, ProductTable) = match kind {
        Preset::Pointwise { n } => {
            if n < 1 {
                return Err(Error::InvalidParams("pointwise_n needs n >= 1".into()));
            }
            (n, Box::new(|i, j| (i == j).then_some(i)))
        }
        Preset::DualNumbers => (2, Box::new(|i, j| (i + j < 2).then_some(i + j))),
        Preset::TruncatedPoly { k } => {
            if k < 2 {
                return Err(Error::InvalidParams("truncated_poly_k needs k >= 2".into()));
            }
            (k, Box::new(move |i, j| (i + j < k).then_some(i + j)))
        }
        Preset::CyclicGroup { n } => {
            if n < 1 {
                return Err(Error::InvalidParams("cyclic_group_n needs n >= 1".into()));
            }
            (n, Box::new(move |i, j| Some((i + j) % n)))
        }
    };
    let mut structure = vec![ZERO; dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            if let Some(k) = table(i, j) {
                structure[(i * dim + j) * dim + k] = ONE;
            }
        }
    }
    let unit = match kind {
        Preset::Pointwise { .. } => vec![ONE; dim],
        _ => {
            let mut u = vec![ZERO; dim];
            u[0] = ONE;
            u
        }
    };
    let spec = AlgebraSpec::new(kind.name(), dim, structure, unit, vec![1.0; dim])?;
    let report = spec.validate();
    if !report.passed() {
        return Err(Error::InvalidParams(format!("preset {} failed validation", kind.name())));
    }
    Ok(spec)
}

impl AlgebraSpec {
    /// Creates an algebra from flattened structure constants. Only shapes and
    /// weight positivity are checked here; algebraic laws are reported by
    /// [`AlgebraSpec::validate`].
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        structure: Vec<Complex64>,
        unit: Vec<Complex64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("algebra dimension must be positive".into()));
        }
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, found: structure.len() });
        }
        if unit.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: unit.len() });
        }
        if weights.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: weights.len() });
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams("weights must be positive and finite".into()));
        }
        Ok(AlgebraSpec { dim, structure, unit, weights, label: label.into() })
    }

    /// The one-dimensional algebra `ℂ`.
    pub fn complex() -> Self {
        AlgebraSpec::new("complex", 1, vec![ONE], vec![ONE], vec![1.0]).expect("complex field")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Coordinates of `e_i e_j`.
    pub fn basis_product(&self, i: usize, j: usize) -> &[Complex64] {
        let start = (i * self.dim + j) * self.dim;
        &self.structure[start..start + self.dim]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn unit(&self) -> Element {
        Element::new(self.unit.clone())
    }

    pub fn zero(&self) -> Element {
        Element::new(vec![ZERO; self.dim])
    }

    pub fn basis(&self, i: usize) -> Element {
        let mut c = vec![ZERO; self.dim];
        c[i] = ONE;
        Element::new(c)
    }

    fn check_dim(&self, a: &Element) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        Ok(())
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(Element::new(self.mul_coords(&a.coords, &b.coords)))
    }

    pub(crate) fn mul_coords(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            if a[i] == ZERO {
                continue;
            }
            for j in 0..n {
                let ab = a[i] * b[j];
                if ab == ZERO {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(self.basis_product(i, j)) {
                    *o += ab * c;
                }
            }
        }
        out
    }

    pub fn power(&self, a: &Element, exp: usize) -> Result<Element> {
        self.check_dim(a)?;
        let mut acc = self.unit();
        for _ in 0..exp {
            acc = self.multiply(&acc, a)?;
        }
        Ok(acc)
    }

    /// Weighted ℓ¹ norm `Σ w_i |a_i|`.
    pub fn norm(&self, a: &Element) -> f64 {
        self.norm_coords(&a.coords)
    }

    pub(crate) fn norm_coords(&self, a: &[Complex64]) -> f64 {
        a.iter().zip(&self.weights).map(|(z, w)| w * z.norm()).sum()
    }

    /// Matrix of `x ↦ a x` in the basis (column `j` holds `a e_j`).
    pub fn left_multiplication(&self, a: &Element) -> Result<CMat> {
        self.check_dim(a)?;
        let n = self.dim;
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            let col = self.mul_coords(&a.coords, &self.basis(j).coords);
            for k in 0..n {
                m[(k, j)] = col[k];
            }
        }
        Ok(m)
    }

    pub(crate) fn left_multiplication_basis(&self, i: usize) -> CMat {
        let n = self.dim;
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            for (k, c) in self.basis_product(i, j).iter().enumerate() {
                m[(k, j)] = *c;
            }
        }
        m
    }

    /// Solves `L_a x = 1_E`. Rank is decided by the singular-value threshold
    /// `1e-10 × σ_max`.
    pub fn invert(&self, a: &Element) -> Result<Element> {
        let l = self.left_multiplication(a)?;
        if linalg::rank(&l, SINGULAR_TOL) < self.dim {
            return Err(Error::NotInvertible);
        }
        let (x, _) = linalg::least_squares(&l, &self.unit, SINGULAR_TOL);
        Ok(Element::new(x))
    }

    /// Basis of the Jacobson radical (the common kernel of all characters).
    pub fn radical(&self) -> Result<Vec<Element>> {
        Ok(crate::gelfand::CharacterSpace::compute(self)?.radical(self))
    }

    /// Checks commutativity, associativity, the unit law and the
    /// submultiplicativity certificate. Each failure names the worst offending
    /// basis indices and residual.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut report = ValidationReport::new(format!("algebra {}", self.label));

        let mut worst = (0.0, Vec::new());
        for i in 0..n {
            for j in (i + 1)..n {
                let r = diff(self.basis_product(i, j), self.basis_product(j, i));
                if r > worst.0 {
                    worst = (r, vec![i, j]);
                }
            }
        }
        report.push(law("commutativity", worst));

        let mut worst = (0.0, Vec::new());
        for i in 0..n {
            for j in 0..n {
                let ij = self.basis_product(i, j).to_vec();
                for k in 0..n {
                    let left = self.mul_coords(&ij, &self.basis(k).coords);
                    let jk = self.basis_product(j, k).to_vec();
                    let right = self.mul_coords(&self.basis(i).coords, &jk);
                    let r = diff(&left, &right);
                    if r > worst.0 {
                        worst = (r, vec![i, j, k]);
                    }
                }
            }
        }
        report.push(law("associativity", worst));

        let mut worst = (0.0, Vec::new());
        for i in 0..n {
            let ue = self.mul_coords(&self.unit, &self.basis(i).coords);
            let r = diff(&ue, &self.basis(i).coords);
            if r > worst.0 {
                worst = (r, vec![i]);
            }
        }
        report.push(law("unit", worst));

        let mut worst = (0.0, Vec::new());
        for i in 0..n {
            for j in i..n {
                let excess = self.norm_coords(self.basis_product(i, j)) - self.weights[i] * self.weights[j];
                if excess > worst.0 {
                    worst = (excess, vec![i, j]);
                }
            }
        }
        let check = if worst.0 > STRUCTURE_TOL {
            Check::fail(
                "submultiplicativity",
                worst.0,
                worst.1.clone(),
                format!("‖e{0}·e{1}‖ exceeds w{0}·w{1} by {2:.3e}", worst.1[0], worst.1[1], worst.0),
            )
        } else {
            Check::pass("submultiplicativity", worst.0.max(0.0))
        };
        report.push(check);
        report
    }

    /// Smallest uniform rescaling `λ ≥ 1` of the weights for which the
    /// submultiplicativity certificate holds, applied to a copy.
    pub fn with_certified_weights(&self) -> AlgebraSpec {
        let n = self.dim;
        let mut lambda: f64 = 1.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.norm_coords(self.basis_product(i, j));
                lambda = lambda.max(lhs / (self.weights[i] * self.weights[j]));
            }
        }
        let mut out = self.clone();
        out.weights = self.weights.iter().map(|w| w * lambda).collect();
        out
    }

    /// Direct sum `A ⊕ B` with the concatenated basis.
    pub fn direct_sum(&self, other: &AlgebraSpec) -> AlgebraSpec {
        let (p, q) = (self.dim, other.dim);
        let n = p + q;
        let mut structure = vec![ZERO; n * n * n];
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    structure[(i * n + j) * n + k] = self.structure_constant(i, j, k);
                }
            }
        }
        for i in 0..q {
            for j in 0..q {
                for k in 0..q {
                    structure[((p + i) * n + p + j) * n + p + k] = other.structure_constant(i, j, k);
                }
            }
        }
        let unit = self.unit.iter().chain(&other.unit).copied().collect();
        let weights = self.weights.iter().chain(&other.weights).copied().collect();
        AlgebraSpec {
            dim: n,
            structure,
            unit,
            weights,
            label: format!("{}+{}", self.label, other.label),
        }
    }

    /// Re-expresses the algebra in the basis `f_b = Σ_i p[i][b] e_i` (columns of
    /// `p`). Weights are recomputed as the ℓ¹-images of the new basis vectors
    /// and then rescaled to satisfy the submultiplicativity certificate.
    pub fn change_basis(&self, p: &CMat) -> Result<AlgebraSpec> {
        let n = self.dim;
        if p.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.nrows() });
        }
        let pinv = p.clone().try_inverse().ok_or(Error::NotInvertible)?;
        let cols: Vec<Vec<Complex64>> = (0..n).map(|b| p.column(b).iter().copied().collect()).collect();
        let mut structure = vec![ZERO; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let prod = self.mul_coords(&cols[a], &cols[b]);
                for c in 0..n {
                    let mut s = ZERO;
                    for k in 0..n {
                        s += pinv[(c, k)] * prod[k];
                    }
                    structure[(a * n + b) * n + c] = s;
                }
            }
        }
        let unit = (0..n)
            .map(|c| (0..n).map(|k| pinv[(c, k)] * self.unit[k]).sum())
            .collect();
        let weights = cols.iter().map(|c| self.norm_coords(c).max(1e-12)).collect();
        let spec = AlgebraSpec::new(format!("{}'", self.label), n, structure, unit, weights)?;
        Ok(spec.with_certified_weights())
    }
}

fn diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn law(name: &str, worst: (f64, Vec<usize>)) -> Check {
    let (residual, indices) = worst;
    if residual > STRUCTURE_TOL {
        let detail = format!("violated at basis indices {indices:?}, residual {residual:.3e}");
        Check::fail(name, residual, indices, detail)
    } else {
        Check::pass(name, residual)
    }
}

/// JSON form: `{"dim", "structure": [[[[re, im], …]]], "unit", "weights", "label"}`.
#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    dim: usize,
    structure: Vec<Vec<Vec<[f64; 2]>>>,
    unit: Vec<[f64; 2]>,
    weights: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl Serialize for AlgebraSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim;
        let structure = (0..n)
            .map(|i| (0..n).map(|j| self.basis_product(i, j).iter().copied().map(to_pair).collect()).collect())
            .collect();
        AlgebraJson {
            dim: n,
            structure,
            unit: self.unit.iter().copied().map(to_pair).collect(),
            weights: self.weights.clone(),
            label: self.label.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = AlgebraJson::deserialize(d)?;
        let n = j.dim;
        if j.structure.len() != n || j.structure.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n)) {
            return Err(D::Error::custom(format!("structure must be a {n}x{n}x{n} array")));
        }
        let structure = j.structure.into_iter().flatten().flatten().map(from_pair).collect();
        let unit = j.unit.into_iter().map(from_pair).collect();
        AlgebraSpec::new(j.label, n, structure, unit, j.weights).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dual() -> AlgebraSpec {
        preset_algebra(Preset::DualNumbers).unwrap()
    }

    #[test]
    fn preset_products() {
        let d = dual();
        let eps = d.basis(1);
        assert_eq!(d.multiply(&eps, &eps).unwrap().coords, vec![ZERO, ZERO]);

        let p = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
        assert_eq!(p.multiply(&p.basis(0), &p.basis(1)).unwrap().coords, vec![ZERO, ZERO]);

        let g = preset_algebra(Preset::CyclicGroup { n: 2 }).unwrap();
        assert_eq!(g.multiply(&g.basis(1), &g.basis(1)).unwrap(), g.unit());

        let g3 = preset_algebra(Preset::CyclicGroup { n: 3 }).unwrap();
        let g2 = g3.multiply(&g3.basis(1), &g3.basis(1)).unwrap();
        assert_eq!(g2, g3.basis(2));
        assert_eq!(g3.multiply(&g2, &g3.basis(1)).unwrap(), g3.unit());
    }

    #[test]
    fn multiply_rejects_wrong_dimension() {
        let d = dual();
        let bad = Element::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(
            d.multiply(&bad, &d.unit()),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn norms() {
        let d = dual();
        assert_eq!(d.norm(&Element::from_real(&[1.0, 1.0])), 2.0);
        assert_eq!(d.norm(&d.zero()), 0.0);
        let p = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
        assert!((p.norm(&Element::new(vec![c(3.0, 0.0), c(0.0, 4.0)])) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn presets_validate() {
        for name in ["pointwise_1", "pointwise_3", "dual_numbers", "truncated_poly_4", "cyclic_group_5"] {
            let a = Preset::from_name(name).unwrap().build().unwrap();
            assert!(a.validate().passed(), "{name}");
        }
        assert!(Preset::from_name("truncated_poly_1").unwrap().build().is_err());
        assert!(Preset::from_name("pointwise_0").unwrap().build().is_err());
        assert!(Preset::from_name("quaternions").is_err());
    }

    #[test]
    fn commutativity_failure_names_indices() {
        let mut a = preset_algebra(Preset::Pointwise { n: 3 }).unwrap();
        // e1·e2 = e1 but e2·e1 = 0
        a.structure[(3 + 2) * 3 + 1] = ONE;
        let report = a.validate();
        let check = report.check("commutativity").unwrap();
        assert!(!check.passed);
        assert_eq!(check.indices, vec![1, 2]);
        assert!((check.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn submultiplicativity_failure_on_light_weights() {
        let g = preset_algebra(Preset::CyclicGroup { n: 2 }).unwrap();
        let light = AlgebraSpec::new("z2", 2, g.structure.clone(), g.unit.clone(), vec![1.0, 0.5]).unwrap();
        let report = light.validate();
        let check = report.check("submultiplicativity").unwrap();
        assert!(!check.passed);
        assert_eq!(check.indices, vec![1, 1]);
        assert!((check.residual - 0.75).abs() < 1e-15);
        assert!(report.check("commutativity").unwrap().passed);
    }

    #[test]
    fn inversion() {
        let d = dual();
        assert_eq!(d.invert(&d.unit()).unwrap(), d.unit());
        let inv = d.invert(&Element::from_real(&[1.0, 1.0])).unwrap();
        assert!((inv.coords[0] - ONE).norm() < 1e-12);
        assert!((inv.coords[1] + ONE).norm() < 1e-12);
        assert_eq!(d.invert(&d.basis(1)), Err(Error::NotInvertible));
    }

    #[test]
    fn dim_one_is_complex_field() {
        let c1 = AlgebraSpec::complex();
        assert!(c1.validate().passed());
        assert!(c1.radical().unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let a = preset_algebra(Preset::TruncatedPoly { k: 3 }).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: AlgebraSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<AlgebraSpec>(r#"{"dim":2,"structure":[],"unit":[],"weights":[]}"#).is_err());
    }

    #[test]
    fn change_basis_preserves_laws() {
        let a = preset_algebra(Preset::Pointwise { n: 2 }).unwrap().direct_sum(&dual());
        let p = CMat::from_fn(4, 4, |i, j| if i == j { c(1.0, 0.0) } else { c(0.1 * (i + 2 * j) as f64, -0.05) });
        let b = a.change_basis(&p).unwrap();
        assert!(b.validate().passed(), "{:?}", b.validate());
    }
}
