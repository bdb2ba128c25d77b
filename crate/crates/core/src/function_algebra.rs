//! `E`-valued function systems on finite spaces.
//!
//! A function `f: X → E` is stored as a [`ValueTable`]; a [`FunctionSystem`]
//! is a linearly independent list of such tables together with a norm. On a
//! finite space every span is closed, so "function algebra" reduces to a
//! multiplicatively closed unital span, and its character space is computed
//! by turning the span into an abstract [`AlgebraSpec`].

use nalgebra::SVD;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, Element};
use crate::error::{Error, Result};
use crate::gelfand::{self, verify_character, Character};
use crate::linalg::{self, CMat, SpanBasis, ONE, ZERO};
use crate::report::{Check, ValidationReport};
use crate::spaces::FiniteSpace;

/// Relative tolerance for linear independence of basis tables.
pub const INDEPENDENCE_TOL: f64 = 1e-10;
/// Relative residual below which a table counts as a member of a span.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Minimal difference for a function to separate two points.
pub const SEPARATION_TOL: f64 = 1e-9;
/// Sup distance below which two characters are identified.
pub const CHARACTER_MATCH_TOL: f64 = 1e-6;
/// Random samples used by [`FunctionSystem::embedding_constant`].
pub const EMBEDDING_SAMPLES: usize = 10_000;

/// Values of a function `X → E`, point-major: entry `(x, k)` is the `k`-th
/// coordinate of `f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    dim: usize,
    values: Vec<Complex64>,
}

impl ValueTable {
    pub fn new(dim: usize, values: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) || values.is_empty() {
            return Err(Error::DimensionMismatch { expected: dim, found: values.len() });
        }
        Ok(ValueTable { dim, values })
    }

    /// Builds a table from one element per point.
    pub fn from_elements(elements: &[Element]) -> Result<Self> {
        let dim = elements.first().map_or(0, Element::dim);
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        ValueTable::new(dim, elements.iter().flat_map(|e| e.coords.iter().copied()).collect())
    }

    /// Scalar function (`E = ℂ`).
    pub fn scalar(values: Vec<Complex64>) -> Result<Self> {
        ValueTable::new(1, values)
    }

    pub fn constant(points: usize, value: &Element) -> Self {
        ValueTable { dim: value.dim(), values: (0..points).flat_map(|_| value.coords.iter().copied()).collect() }
    }

    /// The function `x ↦ s(x)·e` for a scalar table `s`.
    pub fn scalar_times(s: &ValueTable, e: &Element) -> Self {
        debug_assert_eq!(s.dim, 1);
        let values = s.values.iter().flat_map(|&sx| e.coords.iter().map(move |&c| sx * c)).collect();
        ValueTable { dim: e.dim(), values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn at(&self, x: usize) -> &[Complex64] {
        &self.values[x * self.dim..(x + 1) * self.dim]
    }

    pub fn element(&self, x: usize) -> Element {
        Element::new(self.at(x).to_vec())
    }

    /// Flattened coordinates, point-major.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn product(&self, other: &ValueTable, algebra: &AlgebraSpec) -> ValueTable {
        let values = (0..self.points()).flat_map(|x| algebra.mul_coords(self.at(x), other.at(x))).collect();
        ValueTable { dim: self.dim, values }
    }

    /// `x ↦ λ(f(x))` for a character `λ` of the target algebra.
    pub fn compose(&self, chi: &Character) -> ValueTable {
        let values = (0..self.points()).map(|x| chi.apply_coords(self.at(x))).collect();
        ValueTable { dim: 1, values }
    }

    pub fn linear_combination(tables: &[ValueTable], coeffs: &[Complex64]) -> Result<ValueTable> {
        let first = tables.first().ok_or_else(|| Error::InvalidParams("empty combination".into()))?;
        if coeffs.len() != tables.len() {
            return Err(Error::DimensionMismatch { expected: tables.len(), found: coeffs.len() });
        }
        let mut values = vec![ZERO; first.values.len()];
        for (t, &c) in tables.iter().zip(coeffs) {
            for (v, w) in values.iter_mut().zip(&t.values) {
                *v += c * w;
            }
        }
        Ok(ValueTable { dim: first.dim, values })
    }
}

impl Serialize for ValueTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.points()).map(|x| self.at(x).iter().copied().map(crate::json::to_pair).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValueTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = crate::json::complex_matrix::deserialize(d)?;
        let dim = rows.first().map_or(0, Vec::len);
        ValueTable::new(dim, rows.into_iter().flatten().collect()).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormTag {
    Sup,
    /// `‖f‖_X + p_α(f)` with exponent `α ∈ (0, 1]`.
    Lipschitz(f64),
}

/// Outcome of a span membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Member(Vec<Complex64>),
    NotInSpan { residual: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }

    pub fn coefficients(&self) -> Option<&[Complex64]> {
        match self {
            Membership::Member(c) => Some(c),
            Membership::NotInSpan { .. } => None,
        }
    }
}

/// Least-squares solver for a fixed basis, factorised once.
#[derive(Debug, Clone)]
pub struct SpanSolver {
    basis: CMat,
    pinv: CMat,
}

impl SpanSolver {
    pub fn new(tables: &[ValueTable]) -> Self {
        let rows = tables.first().map_or(0, |t| t.values.len());
        let cols: Vec<Vec<Complex64>> = tables.iter().map(|t| t.values.clone()).collect();
        let basis = linalg::from_columns(rows, &cols);
        let pinv = if cols.is_empty() {
            CMat::zeros(0, rows)
        } else {
            let svd = SVD::new(basis.clone(), true, true);
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            svd.pseudo_inverse(INDEPENDENCE_TOL * smax).expect("SVD with vectors")
        };
        SpanSolver { basis, pinv }
    }

    /// Coefficients and relative residual of the best approximation of `v`.
    pub fn solve(&self, v: &[Complex64]) -> (Vec<Complex64>, f64) {
        let b = CMat::from_column_slice(v.len(), 1, v);
        let x = &self.pinv * &b;
        let r = &self.basis * &x - &b;
        let scale = b.norm();
        let rel = if scale == 0.0 { 0.0 } else { r.norm() / scale };
        (x.iter().copied().collect(), rel)
    }

    pub fn membership(&self, v: &[Complex64]) -> Membership {
        let (x, rel) = self.solve(v);
        if rel < MEMBERSHIP_TOL {
            Membership::Member(x)
        } else {
            Membership::NotInSpan { residual: rel }
        }
    }
}

/// A finite-dimensional space of `E`-valued functions on a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson")]
pub struct FunctionSystem {
    pub space: FiniteSpace,
    pub algebra: AlgebraSpec,
    pub basis: Vec<ValueTable>,
    pub norm: NormTag,
    pub closed: bool,
}

#[derive(Deserialize)]
struct SystemJson {
    space: FiniteSpace,
    algebra: AlgebraSpec,
    basis: Vec<ValueTable>,
    norm: NormTag,
}

impl TryFrom<SystemJson> for FunctionSystem {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<Self> {
        FunctionSystem::new(j.space, j.algebra, j.basis, j.norm)
    }
}

impl FunctionSystem {
    /// Checks the system invariants and computes the closed flag. The basis
    /// must be independent and its span must contain the constant `1_E`.
    pub fn new(space: FiniteSpace, algebra: AlgebraSpec, basis: Vec<ValueTable>, norm: NormTag) -> Result<Self> {
        let n = space.len();
        if basis.is_empty() {
            return Err(Error::InvalidSystem("empty basis".into()));
        }
        if let Some(t) = basis.iter().find(|t| t.points() != n || t.dim() != algebra.dim()) {
            return Err(Error::InvalidSystem(format!(
                "value table of shape {}x{} does not match {n} points x dim {}",
                t.points(),
                t.dim(),
                algebra.dim()
            )));
        }
        if let NormTag::Lipschitz(alpha) = norm {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidParams(format!("Lipschitz exponent {alpha} outside (0, 1]")));
            }
            if !space.has_metric() {
                return Err(Error::MissingMetric);
            }
        }
        let cols: Vec<Vec<Complex64>> = basis.iter().map(|t| t.values.clone()).collect();
        let r = linalg::rank(&linalg::from_columns(n * algebra.dim(), &cols), INDEPENDENCE_TOL);
        if r != basis.len() {
            return Err(Error::InvalidSystem(format!("basis has rank {r} < {} tables", basis.len())));
        }
        let mut system = FunctionSystem { space, algebra, basis, norm, closed: false };
        let solver = system.solver();
        if !solver.membership(system.unit_table().as_slice()).is_member() {
            return Err(Error::InvalidSystem("span does not contain the constant unit".into()));
        }
        system.closed = system.products_in_span(&solver);
        Ok(system)
    }

    /// Greedily keeps the generators that enlarge the span, then validates.
    pub fn spanned_by(space: FiniteSpace, algebra: AlgebraSpec, generators: Vec<ValueTable>, norm: NormTag) -> Result<Self> {
        let len = space.len() * algebra.dim();
        let mut span = SpanBasis::new(len, INDEPENDENCE_TOL);
        let basis = generators.into_iter().filter(|g| g.values.len() == len && span.try_push(&g.values)).collect();
        FunctionSystem::new(space, algebra, basis, norm)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn unit_table(&self) -> ValueTable {
        ValueTable::constant(self.space.len(), &self.algebra.unit())
    }

    pub fn solver(&self) -> SpanSolver {
        SpanSolver::new(&self.basis)
    }

    fn products_in_span(&self, solver: &SpanSolver) -> bool {
        (0..self.dim()).all(|i| {
            (i..self.dim()).all(|j| solver.membership(self.basis[i].product(&self.basis[j], &self.algebra).as_slice()).is_member())
        })
    }

    /// The function with the given span coefficients.
    pub fn combine(&self, coeffs: &[Complex64]) -> Result<ValueTable> {
        ValueTable::linear_combination(&self.basis, coeffs)
    }

    /// `f(x)` for the function with span coefficients `coeffs`.
    pub fn evaluate(&self, coeffs: &[Complex64], x: usize) -> Result<Element> {
        if x >= self.space.len() {
            return Err(Error::UnknownPoint(x));
        }
        Ok(self.combine(coeffs)?.element(x))
    }

    pub fn span_membership(&self, f: &ValueTable) -> Membership {
        self.solver().membership(f.as_slice())
    }

    pub fn sup_norm(&self, f: &ValueTable) -> f64 {
        (0..f.points()).map(|x| self.algebra.norm_coords(f.at(x))).fold(0.0, f64::max)
    }

    pub fn lipschitz_seminorm(&self, f: &ValueTable, alpha: f64) -> Result<f64> {
        let n = f.points();
        let mut best: f64 = 0.0;
        for x in 0..n {
            for y in (x + 1)..n {
                let d = self.space.distance(x, y)?;
                let diff: Vec<Complex64> = f.at(x).iter().zip(f.at(y)).map(|(a, b)| a - b).collect();
                best = best.max(self.algebra.norm_coords(&diff) / d.powf(alpha));
            }
        }
        Ok(best)
    }

    pub fn lipschitz_norm(&self, f: &ValueTable, alpha: f64) -> Result<f64> {
        Ok(self.sup_norm(f) + self.lipschitz_seminorm(f, alpha)?)
    }

    /// The system's own norm.
    pub fn norm_of(&self, f: &ValueTable) -> f64 {
        match self.norm {
            NormTag::Sup => self.sup_norm(f),
            NormTag::Lipschitz(alpha) => self.lipschitz_norm(f, alpha).expect("metric checked at construction"),
        }
    }

    /// True iff every pair of distinct points is separated by a basis table.
    pub fn separation_check(&self) -> bool {
        self.first_unseparated_pair().is_none()
    }

    fn first_unseparated_pair(&self) -> Option<(usize, usize)> {
        let n = self.space.len();
        (0..n).flat_map(|x| ((x + 1)..n).map(move |y| (x, y))).find(|&(x, y)| {
            !self.basis.iter().any(|t| {
                let diff: Vec<Complex64> = t.at(x).iter().zip(t.at(y)).map(|(a, b)| a - b).collect();
                self.algebra.norm_coords(&diff) > SEPARATION_TOL
            })
        })
    }

    /// Smallest multiplicatively closed unital span containing the basis.
    /// Products are appended in lexicographic pair order until stable.
    pub fn close_under_products(&self) -> FunctionSystem {
        let len = self.space.len() * self.algebra.dim();
        let mut span = SpanBasis::new(len, MEMBERSHIP_TOL);
        let mut basis: Vec<ValueTable> = Vec::new();
        for t in std::iter::once(self.unit_table()).chain(self.basis.iter().cloned()) {
            if span.try_push(&t.values) {
                basis.push(t);
            }
        }
        let mut start = 0;
        loop {
            let end = basis.len();
            for i in 0..end {
                for j in i.max(start)..end {
                    let p = basis[i].product(&basis[j], &self.algebra);
                    if span.try_push(&p.values) {
                        basis.push(p);
                    }
                }
            }
            if basis.len() == end {
                break;
            }
            start = end;
        }
        let mut out = FunctionSystem { basis, closed: true, ..self.clone() };
        let cols: Vec<Vec<Complex64>> = out.basis.iter().map(|t| t.values.clone()).collect();
        debug_assert_eq!(linalg::rank(&linalg::from_columns(len, &cols), INDEPENDENCE_TOL), out.basis.len());
        out.closed = out.products_in_span(&out.solver());
        out
    }

    /// The span as an abstract algebra in the basis of this system. Weights
    /// are the basis norms, uniformly rescaled to certify submultiplicativity.
    pub fn as_algebra(&self) -> Result<AlgebraSpec> {
        if !self.closed {
            return Err(Error::NotClosed(format!("system over {} is not closed under products", self.algebra.label())));
        }
        let d = self.dim();
        let solver = self.solver();
        let mut structure = vec![ZERO; d * d * d];
        for i in 0..d {
            for j in i..d {
                let p = self.basis[i].product(&self.basis[j], &self.algebra);
                let coeffs = solver.membership(p.as_slice()).coefficients().map(<[_]>::to_vec).ok_or_else(|| {
                    Error::NotClosed(format!("product of basis tables {i} and {j} left the span"))
                })?;
                for (k, c) in coeffs.into_iter().enumerate() {
                    let c = linalg::snap(c, 1e-13);
                    structure[(i * d + j) * d + k] = c;
                    structure[(j * d + i) * d + k] = c;
                }
            }
        }
        let (unit, _) = solver.solve(self.unit_table().as_slice());
        let unit = unit.into_iter().map(|c| linalg::snap(c, 1e-13)).collect();
        let weights = self.basis.iter().map(|t| self.norm_of(t).max(1e-12)).collect();
        let label = format!("sys({})", self.algebra.label());
        Ok(AlgebraSpec::new(label, d, structure, unit, weights)?.with_certified_weights())
    }

    /// All characters of the closed system, as value vectors on its basis.
    pub fn characters(&self) -> Result<Vec<Character>> {
        gelfand::characters(&self.as_algebra()?)
    }

    /// The evaluation-composed functional `f ↦ ψ(f(x))` in basis coordinates.
    pub fn point_character(&self, psi: &Character, x: usize) -> Character {
        let values = self.basis.iter().map(|t| psi.apply_coords(t.at(x))).collect();
        Character::new(values, format!("{}@{}", psi.label, self.space.points[x]))
    }

    /// A lower bound for `sup ‖f‖_X / ‖f‖` over the span, from the basis
    /// directions and seeded random coefficient vectors. Exactly 1 for the
    /// sup norm.
    pub fn embedding_constant(&self, seed: u64) -> f64 {
        if self.norm == NormTag::Sup {
            return 1.0;
        }
        let ratio = |f: &ValueTable| {
            let n = self.norm_of(f);
            if n > 0.0 {
                self.sup_norm(f) / n
            } else {
                0.0
            }
        };
        let mut best = self.basis.iter().map(ratio).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![ZERO; self.dim()];
        for _ in 0..EMBEDDING_SAMPLES {
            for c in coeffs.iter_mut() {
                *c = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            }
            let f = self.combine(&coeffs).expect("coefficient count");
            best = best.max(ratio(&f));
        }
        best
    }
}

/// `C(X, E)`: indicator functions times basis elements, point-major.
pub fn make_cxe(space: &FiniteSpace, algebra: &AlgebraSpec) -> Result<FunctionSystem> {
    let (n, d) = (space.len(), algebra.dim());
    let basis = (0..n)
        .flat_map(|x| {
            (0..d).map(move |k| {
                let mut values = vec![ZERO; n * d];
                values[x * d + k] = ONE;
                ValueTable { dim: d, values }
            })
        })
        .collect();
    FunctionSystem::new(space.clone(), algebra.clone(), basis, NormTag::Sup)
}

/// `Lip_α(X, E)`: on a finite metric space the same span as `C(X, E)` with
/// the Lipschitz norm. The little-Lipschitz algebra coincides with it.
pub fn make_lip(space: &FiniteSpace, algebra: &AlgebraSpec, alpha: f64) -> Result<FunctionSystem> {
    let cxe = make_cxe(space, algebra)?;
    FunctionSystem::new(cxe.space, cxe.algebra, cxe.basis, NormTag::Lipschitz(alpha))
}

fn coords(space: &FiniteSpace) -> Result<&[Complex64]> {
    space.coords.as_deref().ok_or(Error::MissingCoords)
}

fn monomial_generators(z: &[Complex64], algebra: &AlgebraSpec, degree: usize) -> Vec<ValueTable> {
    let mut out = Vec::new();
    for k in 0..=degree {
        let s = ValueTable { dim: 1, values: z.iter().map(|&x| x.powu(k as u32)).collect() };
        for j in 0..algebra.dim() {
            out.push(ValueTable::scalar_times(&s, &algebra.basis(j)));
        }
    }
    out
}

/// Span of `z^k · e_j` for `k ≤ degree`; dependent monomials are dropped.
pub fn make_poly(space: &FiniteSpace, algebra: &AlgebraSpec, degree: usize) -> Result<FunctionSystem> {
    let z = coords(space)?;
    FunctionSystem::spanned_by(space.clone(), algebra.clone(), monomial_generators(z, algebra, degree), NormTag::Sup)
}

/// [`make_poly`] plus `(z − c)^{-k} · e_j` for every pole `c` and `1 ≤ k ≤ degree`.
pub fn make_rational(space: &FiniteSpace, algebra: &AlgebraSpec, degree: usize, poles: &[Complex64]) -> Result<FunctionSystem> {
    let z = coords(space)?;
    for &c in poles {
        if let Some(x) = z.iter().position(|&x| (x - c).norm() < 1e-12) {
            return Err(Error::PoleCollision { pole: format!("{c}"), point: x });
        }
    }
    let mut generators = monomial_generators(z, algebra, degree);
    for &c in poles {
        for k in 1..=degree {
            let s = ValueTable { dim: 1, values: z.iter().map(|&x| (x - c).powi(-(k as i32))).collect() };
            for j in 0..algebra.dim() {
                generators.push(ValueTable::scalar_times(&s, &algebra.basis(j)));
            }
        }
    }
    FunctionSystem::spanned_by(space.clone(), algebra.clone(), generators, NormTag::Sup)
}

/// Span of `{b · e_j}` for a scalar system `B` and the basis of `E`.
pub fn span_be(scalar: &FunctionSystem, algebra: &AlgebraSpec) -> Result<FunctionSystem> {
    if scalar.algebra.dim() != 1 {
        return Err(Error::InvalidSystem("span_be needs a scalar-valued system".into()));
    }
    let generators =
        scalar.basis.iter().flat_map(|b| (0..algebra.dim()).map(move |j| ValueTable::scalar_times(b, &algebra.basis(j)))).collect();
    FunctionSystem::spanned_by(scalar.space.clone(), algebra.clone(), generators, scalar.norm)
}

/// `(X, E, B, B̃)` with `B` scalar-valued and both systems on `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub space: FiniteSpace,
    pub algebra: AlgebraSpec,
    pub scalar: FunctionSystem,
    pub vector: FunctionSystem,
}

impl Quadruple {
    pub fn new(scalar: FunctionSystem, vector: FunctionSystem) -> Result<Self> {
        if scalar.algebra.dim() != 1 {
            return Err(Error::InvalidSystem("scalar system must take values in the complex field".into()));
        }
        if !scalar.space.same_points(&vector.space) {
            return Err(Error::InvalidSystem("scalar and vector systems live on different spaces".into()));
        }
        Ok(Quadruple { space: vector.space.clone(), algebra: vector.algebra.clone(), scalar, vector })
    }

    /// `(X, E, C(X), C(X, E))`.
    pub fn cxe(space: &FiniteSpace, algebra: &AlgebraSpec) -> Result<Self> {
        Quadruple::new(make_cxe(space, &AlgebraSpec::complex())?, make_cxe(space, algebra)?)
    }

    /// `(X, E, Lip_α(X), Lip_α(X, E))`.
    pub fn lip(space: &FiniteSpace, algebra: &AlgebraSpec, alpha: f64) -> Result<Self> {
        Quadruple::new(make_lip(space, &AlgebraSpec::complex(), alpha)?, make_lip(space, algebra, alpha)?)
    }

    /// Checks conditions (1)–(6) of an admissible quadruple.
    pub fn check_admissible(&self) -> Result<ValidationReport> {
        let mut report = ValidationReport::new("admissible_quadruple");
        report.push(Check::pass("compact_hausdorff", 0.0).with_detail("finite discrete space"));

        let alg = self.algebra.validate();
        report.push(if alg.passed() {
            Check::pass("commutative_unital", 0.0)
        } else {
            let worst = alg.failures().map(|c| c.residual).fold(0.0, f64::max);
            let names: Vec<&str> = alg.failures().map(|c| c.name.as_str()).collect();
            Check::fail("commutative_unital", worst, vec![], format!("algebra laws failed: {}", names.join(", ")))
        });

        report.push(self.check_scalar_natural());
        report.push(self.check_vector_algebra());

        let vsolver = self.vector.solver();
        let mut worst = (0.0, Vec::new());
        for (b, tb) in self.scalar.basis.iter().enumerate() {
            for j in 0..self.algebra.dim() {
                let f = ValueTable::scalar_times(tb, &self.algebra.basis(j));
                if let Membership::NotInSpan { residual } = vsolver.membership(f.as_slice()) {
                    if residual > worst.0 {
                        worst = (residual, vec![b, j]);
                    }
                }
            }
        }
        report.push(if worst.1.is_empty() {
            Check::pass("products_in_vector_system", 0.0)
        } else {
            let detail = format!("scalar basis {} times algebra basis {} is not in the vector system", worst.1[0], worst.1[1]);
            Check::fail("products_in_vector_system", worst.0, worst.1, detail)
        });

        let psi = gelfand::characters(&self.algebra)?;
        let ssolver = self.scalar.solver();
        let mut worst = (0.0, Vec::new());
        for (p, chi) in psi.iter().enumerate() {
            for (f, tf) in self.vector.basis.iter().enumerate() {
                if let Membership::NotInSpan { residual } = ssolver.membership(tf.compose(chi).as_slice()) {
                    if residual > worst.0 {
                        worst = (residual, vec![p, f]);
                    }
                }
            }
        }
        report.push(if worst.1.is_empty() {
            Check::pass("compositions_in_scalar_system", 0.0)
        } else {
            let detail = format!("character {} composed with vector basis {} is not in the scalar system", worst.1[0], worst.1[1]);
            Check::fail("compositions_in_scalar_system", worst.0, worst.1, detail)
        });
        Ok(report)
    }

    fn check_scalar_natural(&self) -> Check {
        const NAME: &str = "scalar_natural";
        if let Some((x, y)) = self.scalar.first_unseparated_pair() {
            return Check::fail(NAME, 0.0, vec![x, y], "scalar system does not separate points");
        }
        let chars = match self.scalar.characters() {
            Ok(c) => c,
            Err(e) => return Check::fail(NAME, f64::INFINITY, vec![], format!("cannot compute characters: {e}")),
        };
        let one = Character::new(vec![ONE], "1");
        let evals: Vec<Character> = (0..self.space.len()).map(|x| self.scalar.point_character(&one, x)).collect();
        let (residual, unmatched) = match_sets(&chars, &evals);
        if chars.len() == evals.len() && unmatched.is_none() {
            Check::pass(NAME, residual)
        } else {
            let detail = format!("{} characters vs {} points", chars.len(), evals.len());
            Check::fail(NAME, residual, unmatched.into_iter().collect(), detail)
        }
    }

    fn check_vector_algebra(&self) -> Check {
        const NAME: &str = "vector_function_algebra";
        let note = "evaluation maps are linear and continuous in finite dimension";
        if !self.vector.closed {
            return Check::fail(NAME, 0.0, vec![], "vector system is not closed under products");
        }
        if let Some((x, y)) = self.vector.first_unseparated_pair() {
            return Check::fail(NAME, 0.0, vec![x, y], "vector system does not separate points");
        }
        // The constant unit is enforced at construction.
        Check::pass(NAME, 0.0).with_detail(note)
    }

    /// `π(ψ, x) = ψ ∘ e_x` on the vector system's basis, `ψ`-major order.
    pub fn build_pi(&self) -> Result<Vec<Character>> {
        let psi = gelfand::characters(&self.algebra)?;
        Ok(psi.iter().flat_map(|p| (0..self.space.len()).map(move |x| self.vector.point_character(p, x))).collect())
    }

    /// Pairs `(ψ index, point index)` matching the order of [`Quadruple::build_pi`].
    pub fn pi_indices(&self) -> Result<Vec<(usize, usize)>> {
        let m = gelfand::characters(&self.algebra)?.len();
        let n = self.space.len();
        Ok((0..m).flat_map(|p| (0..n).map(move |x| (p, x))).collect())
    }

    pub fn check_pi_injective(&self) -> Result<bool> {
        let pi = self.build_pi()?;
        Ok((0..pi.len()).all(|a| ((a + 1)..pi.len()).all(|b| pi[a].distance(&pi[b]) > CHARACTER_MATCH_TOL)))
    }

    /// π is bijective onto the character space of the (closed) vector system.
    pub fn check_natural(&self) -> Result<bool> {
        if !self.vector.closed {
            return Err(Error::NotClosed("naturality needs a closed vector system".into()));
        }
        if !self.check_pi_injective()? {
            return Ok(false);
        }
        let pi = self.build_pi()?;
        let chars = self.vector.characters()?;
        Ok(chars.len() == pi.len() && match_sets(&chars, &pi).1.is_none())
    }

    /// Every π-image passes the character checks against the closed vector system.
    pub fn verify_pi(&self) -> Result<ValidationReport> {
        let algebra = self.vector.as_algebra()?;
        let mut report = ValidationReport::new("associated_map");
        for chi in self.build_pi()? {
            let r = verify_character(&algebra, &chi);
            let worst = r.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
            report.push(if r.passed() { Check::pass(chi.label.clone(), worst) } else { Check::fail(chi.label.clone(), worst, vec![], "not a character") });
        }
        Ok(report)
    }
}

/// Largest nearest-neighbour distance from `a` into `b`, and the first element
/// of `a` with no partner within [`CHARACTER_MATCH_TOL`].
fn match_sets(a: &[Character], b: &[Character]) -> (f64, Option<usize>) {
    let mut worst: f64 = 0.0;
    let mut unmatched = None;
    for (i, x) in a.iter().enumerate() {
        let d = b.iter().map(|y| x.distance(y)).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        if d > CHARACTER_MATCH_TOL && unmatched.is_none() {
            unmatched = Some(i);
        }
    }
    (worst, unmatched)
}

/// True when `a` and `b` agree as sets of characters.
pub fn same_character_sets(a: &[Character], b: &[Character]) -> bool {
    a.len() == b.len() && match_sets(a, b).1.is_none() && match_sets(b, a).1.is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Preset;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn preset(name: &str) -> AlgebraSpec {
        Preset::from_name(name).unwrap().build().unwrap()
    }

    fn scalar_system(points: &[Complex64], tables: Vec<Vec<Complex64>>) -> FunctionSystem {
        let space = FiniteSpace::from_coords(points.to_vec()).unwrap();
        let basis = tables.into_iter().map(|t| ValueTable::scalar(t).unwrap()).collect();
        FunctionSystem::new(space, AlgebraSpec::complex(), basis, NormTag::Sup).unwrap()
    }

    #[test]
    fn evaluate_and_norms() {
        let pts = [c(1.0, 0.0), c(0.0, 1.0)];
        let s = scalar_system(&pts, vec![vec![ONE, ONE], pts.to_vec()]);
        assert_eq!(s.evaluate(&[ZERO, ONE], 1).unwrap().coords, vec![c(0.0, 1.0)]);
        let z = s.combine(&[ZERO, ONE]).unwrap();
        let z2 = z.product(&z, &s.algebra);
        assert!((z2.at(1)[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(s.evaluate(&[ONE, ZERO], 5).is_err());

        let dual = preset("dual_numbers");
        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let sys = make_cxe(&space, &dual).unwrap();
        let f = ValueTable::from_elements(&[Element::from_real(&[0.0, 0.0]), Element::from_real(&[0.0, 1.0])]).unwrap();
        assert_eq!(sys.sup_norm(&f), 1.0);
    }

    #[test]
    fn lipschitz_examples() {
        let space = FiniteSpace::on_line(&[0.0, 0.25, 1.0]).unwrap();
        let sys = make_lip(&space, &AlgebraSpec::complex(), 0.5).unwrap();
        let f = ValueTable::scalar(vec![c(0.0, 0.0), c(0.25, 0.0), c(1.0, 0.0)]).unwrap();
        // pair ratios: (0, 0.25) -> 0.5, (0.25, 1) -> sqrt(0.75), (0, 1) -> 1
        assert!((sys.lipschitz_seminorm(&f, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let near = FiniteSpace::on_line(&[0.0, 0.25]).unwrap();
        let sys2 = make_lip(&near, &AlgebraSpec::complex(), 0.5).unwrap();
        let g = ValueTable::scalar(vec![c(0.0, 0.0), c(0.25, 0.0)]).unwrap();
        assert!((sys2.lipschitz_seminorm(&g, 0.5).unwrap() - 0.5).abs() < 1e-15);

        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let sys = make_lip(&space, &AlgebraSpec::complex(), 1.0).unwrap();
        let f = ValueTable::scalar(vec![ZERO, ONE]).unwrap();
        assert_eq!(sys.lipschitz_norm(&f, 1.0).unwrap(), 2.0);
        assert_eq!(sys.lipschitz_seminorm(&sys.unit_table(), 1.0).unwrap(), 0.0);

        let nometric = FiniteSpace::discrete(2).unwrap();
        assert_eq!(make_lip(&nometric, &AlgebraSpec::complex(), 1.0).unwrap_err(), Error::MissingMetric);
    }

    #[test]
    fn closure_examples() {
        let pts = [c(0.3, 0.1), c(-0.7, 0.4), c(0.2, -0.9)];
        let s = scalar_system(&pts, vec![vec![ONE; 3], pts.to_vec()]);
        assert!(!s.closed);
        assert_eq!(s.close_under_products().dim(), 3);

        let pm = [c(-1.0, 0.0), c(1.0, 0.0)];
        let s = scalar_system(&pm, vec![vec![ONE; 2], pm.to_vec()]);
        assert!(s.closed);
        assert_eq!(s.close_under_products().dim(), 2);

        let dual = preset("dual_numbers");
        let space = FiniteSpace::from_coords(pts.to_vec()).unwrap();
        let zt = ValueTable::scalar(pts.to_vec()).unwrap();
        let gens = vec![
            ValueTable::scalar_times(&zt, &dual.unit()),
            ValueTable::constant(3, &dual.basis(0)),
            ValueTable::constant(3, &dual.basis(1)),
        ];
        let sys = FunctionSystem::spanned_by(space, dual, gens, NormTag::Sup).unwrap();
        assert_eq!(sys.close_under_products().dim(), 6);
    }

    #[test]
    fn membership_examples() {
        let pm = [c(-1.0, 0.0), c(1.0, 0.0)];
        let s = scalar_system(&pm, vec![vec![ONE; 2], pm.to_vec()]);
        let z2 = ValueTable::scalar(vec![ONE, ONE]).unwrap();
        let coeffs = s.span_membership(&z2).coefficients().unwrap().to_vec();
        assert!((coeffs[0] - ONE).norm() < 1e-12 && coeffs[1].norm() < 1e-12);
        let b1 = s.span_membership(&s.basis[1]).coefficients().unwrap().to_vec();
        assert!(b1[0].norm() < 1e-12 && (b1[1] - ONE).norm() < 1e-12);

        let three = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let s = scalar_system(&three, vec![vec![ONE; 3], three.to_vec()]);
        let z2 = ValueTable::scalar(three.iter().map(|z| z * z).collect()).unwrap();
        assert!(!s.span_membership(&z2).is_member());
    }

    #[test]
    fn constructors() {
        let two = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        assert_eq!(make_cxe(&two, &preset("pointwise_2")).unwrap().dim(), 4);

        let pts = FiniteSpace::from_coords(vec![c(0.3, 0.1), c(-0.7, 0.4), c(0.2, -0.9)]).unwrap();
        assert_eq!(make_poly(&pts, &AlgebraSpec::complex(), 2).unwrap().dim(), 3);
        assert_eq!(make_poly(&pts, &AlgebraSpec::complex(), 5).unwrap().dim(), 3);

        let ring = FiniteSpace::from_coords((0..6).map(|k| Complex64::from_polar(0.5 + 0.5 * (k % 2) as f64, k as f64)).collect()).unwrap();
        let r = make_rational(&ring, &AlgebraSpec::complex(), 2, &[ZERO]).unwrap();
        let inv = ValueTable::scalar(ring.coords.as_ref().unwrap().iter().map(|z| 1.0 / z).collect()).unwrap();
        let inv2 = ValueTable::scalar(ring.coords.as_ref().unwrap().iter().map(|z| 1.0 / (z * z)).collect()).unwrap();
        assert!(r.span_membership(&inv).is_member());
        assert!(r.span_membership(&inv2).is_member());
        assert!(matches!(make_rational(&pts, &AlgebraSpec::complex(), 2, &[c(0.3, 0.1)]), Err(Error::PoleCollision { point: 0, .. })));
    }

    #[test]
    fn span_be_examples() {
        let space = FiniteSpace::on_line(&[-1.0, 1.0]).unwrap();
        let cx = make_cxe(&space, &AlgebraSpec::complex()).unwrap();
        let c2 = preset("pointwise_2");
        let sbe = span_be(&cx, &c2).unwrap();
        assert_eq!(sbe.dim(), 4);
        let full = make_cxe(&space, &c2).unwrap();
        assert!(full.basis.iter().all(|t| sbe.span_membership(t).is_member()));

        let poly = make_poly(&space, &AlgebraSpec::complex(), 1).unwrap();
        assert_eq!(span_be(&poly, &c2).unwrap().dim(), 4);

        let one = FiniteSpace::on_line(&[0.0]).unwrap();
        let consts = make_cxe(&one, &AlgebraSpec::complex()).unwrap();
        assert_eq!(span_be(&consts, &preset("truncated_poly_3")).unwrap().dim(), 3);
    }

    #[test]
    fn admissibility() {
        let space = FiniteSpace::on_line(&[0.0, 0.5, 2.0]).unwrap();
        let q = Quadruple::cxe(&space, &preset("dual_numbers")).unwrap();
        let report = q.check_admissible().unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(q.check_natural().unwrap());

        let two = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let consts = FunctionSystem::new(two.clone(), AlgebraSpec::complex(), vec![ValueTable::scalar(vec![ONE, ONE]).unwrap()], NormTag::Sup).unwrap();
        let q = Quadruple::new(consts, make_cxe(&two, &AlgebraSpec::complex()).unwrap()).unwrap();
        assert!(!q.check_admissible().unwrap().check("scalar_natural").unwrap().passed);

        // vector system missing the ε-constants
        let dual = preset("dual_numbers");
        let gens = vec![
            ValueTable::constant(2, &dual.unit()),
            ValueTable::scalar_times(&ValueTable::scalar(vec![ZERO, ONE]).unwrap(), &dual.unit()),
        ];
        let thin = FunctionSystem::spanned_by(two.clone(), dual, gens, NormTag::Sup).unwrap();
        let q = Quadruple::new(make_cxe(&two, &AlgebraSpec::complex()).unwrap(), thin).unwrap();
        let report = q.check_admissible().unwrap();
        assert!(!report.check("products_in_vector_system").unwrap().passed);
    }

    #[test]
    fn associated_map() {
        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let q = Quadruple::cxe(&space, &preset("pointwise_2")).unwrap();
        assert_eq!(q.build_pi().unwrap().len(), 4);
        assert!(q.check_pi_injective().unwrap());
        assert!(q.verify_pi().unwrap().passed());

        let q = Quadruple::cxe(&space, &AlgebraSpec::complex()).unwrap();
        assert_eq!(q.build_pi().unwrap().len(), 2);
        assert!(q.check_natural().unwrap());

        let three = FiniteSpace::on_line(&[0.0, 0.3, 1.0]).unwrap();
        let q = Quadruple::lip(&three, &preset("dual_numbers"), 0.5).unwrap();
        assert_eq!(q.build_pi().unwrap().len(), 3);
        assert!(q.check_natural().unwrap());
    }

    #[test]
    fn embedding_constants() {
        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        assert_eq!(make_cxe(&space, &AlgebraSpec::complex()).unwrap().embedding_constant(1), 1.0);
        let lip = make_lip(&space, &AlgebraSpec::complex(), 1.0).unwrap();
        let x = ValueTable::scalar(vec![ZERO, ONE]).unwrap();
        assert_eq!(lip.sup_norm(&x) / lip.norm_of(&x), 0.5);
        let m = lip.embedding_constant(7);
        assert!((0.5..=1.0).contains(&m));

        let one = FiniteSpace::on_line(&[0.0]).unwrap();
        let consts = make_lip(&one, &AlgebraSpec::complex(), 1.0).unwrap();
        assert_eq!(consts.embedding_constant(7), 1.0);
    }

    #[test]
    fn separation() {
        let space = FiniteSpace::on_line(&[0.0, 1.0, 2.0]).unwrap();
        assert!(make_cxe(&space, &preset("dual_numbers")).unwrap().separation_check());
        let consts = FunctionSystem::new(space.clone(), AlgebraSpec::complex(), vec![ValueTable::scalar(vec![ONE; 3]).unwrap()], NormTag::Sup).unwrap();
        assert!(!consts.separation_check());
        assert!(make_poly(&space, &AlgebraSpec::complex(), 1).unwrap().separation_check());
    }

    #[test]
    fn serde_round_trip() {
        let space = FiniteSpace::on_line(&[0.0, 1.0]).unwrap();
        let sys = make_lip(&space, &preset("dual_numbers"), 0.5).unwrap();
        let json = serde_json::to_string(&sys).unwrap();
        assert!(json.contains("\"lipschitz\":0.5"));
        let back: FunctionSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sys);
    }
}
