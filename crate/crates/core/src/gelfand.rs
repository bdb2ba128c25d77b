//! Characters, Gelfand transforms, radicals and semisimple quotients.
//!
//! Characters are common left eigenvectors of the left-multiplication
//! operators: if `w_i = χ(e_i)` then `w L_a = χ(a) w`. We compute them by
//! passing to the quotient by the radical (the kernel of the trace form
//! `tr(L_a L_b)`), where a generic combination of the multiplication operators
//! has simple spectrum. A unitary Schur triangularisation of that combination
//! then triangularises every multiplication operator at once, and the
//! candidate tuples are read off the diagonals and filtered through
//! [`verify_character`].

use nalgebra::Schur;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::algebra::{AlgebraSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::report::{Check, ValidationReport};

/// Tolerance on multiplicativity and unitality of characters.
pub const CHARACTER_TOL: f64 = 1e-8;
/// Two characters are the same when their value vectors differ by less than this.
pub const DEDUP_TOL: f64 = 1e-6;
/// Seed used by [`characters`].
pub const DEFAULT_SEED: u64 = 0x67_656c_6661_6e64;
const RETRIES: usize = 5;

/// A character, stored as its values on the basis of the algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Character {
    #[serde(with = "crate::json::complex_vec")]
    pub values: Vec<Complex64>,
    pub label: String,
}

impl Character {
    pub fn new(values: Vec<Complex64>, label: impl Into<String>) -> Self {
        Character { values, label: label.into() }
    }

    /// `χ(a) = Σ a_i χ(e_i)`.
    pub fn apply(&self, a: &Element) -> Complex64 {
        self.apply_coords(&a.coords)
    }

    pub fn apply_coords(&self, coords: &[Complex64]) -> Complex64 {
        coords.iter().zip(&self.values).map(|(a, v)| a * v).sum()
    }

    pub fn distance(&self, other: &Character) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Lexicographic order on `(re, im)` of the value vectors, with ties inside
/// `1e-9` treated as equal.
pub fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> Ordering {
    const EPS: f64 = 1e-9;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > EPS {
                return p.total_cmp(&q);
            }
        }
    }
    a.len().cmp(&b.len())
}

/// Checks multiplicativity, unitality and the norm bound `|χ(a)| ≤ ‖a‖`.
///
/// For the weighted ℓ¹ norm the bound holds for every `a` exactly when
/// `|χ(e_i)| ≤ w_i` for every basis index, so that is what is checked.
pub fn verify_character(algebra: &AlgebraSpec, chi: &Character) -> ValidationReport {
    let n = algebra.dim();
    let mut report = ValidationReport::new(format!("character {} of {}", chi.label, algebra.label()));
    if chi.values.len() != n {
        report.push(Check::fail(
            "shape",
            0.0,
            vec![],
            format!("expected {n} values, found {}", chi.values.len()),
        ));
        return report;
    }
    let mut worst = (0.0, vec![]);
    for i in 0..n {
        for j in i..n {
            let lhs = chi.values[i] * chi.values[j];
            let rhs = chi.apply_coords(algebra.basis_product(i, j));
            let r = (lhs - rhs).norm();
            if r > worst.0 {
                worst = (r, vec![i, j]);
            }
        }
    }
    report.push(if worst.0 > CHARACTER_TOL {
        let d = format!("χ(e{0})χ(e{1}) ≠ χ(e{0}e{1}), residual {2:.3e}", worst.1[0], worst.1[1], worst.0);
        Check::fail("multiplicativity", worst.0, worst.1, d)
    } else {
        Check::pass("multiplicativity", worst.0)
    });

    let r = (chi.apply(&algebra.unit()) - ONE).norm();
    report.push(if r > CHARACTER_TOL {
        Check::fail("unital", r, vec![], format!("χ(1) differs from 1 by {r:.3e}"))
    } else {
        Check::pass("unital", r)
    });

    let mut worst = (0.0, vec![]);
    for i in 0..n {
        let excess = chi.values[i].norm() - algebra.weights()[i];
        if excess > worst.0 {
            worst = (excess, vec![i]);
        }
    }
    report.push(if worst.0 > CHARACTER_TOL {
        let d = format!("|χ(e{0})| exceeds ‖e{0}‖", worst.1[0]);
        Check::fail("norm_bound", worst.0, worst.1, d)
    } else {
        Check::pass("norm_bound", worst.0.max(0.0))
    });
    report
}

/// The character space `M(E)` of one algebra, in deterministic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterSpace {
    pub characters: Vec<Character>,
}

/// The semisimple quotient `E/J(E) ≅ ℂ^{|M(E)|}` with its projection `a ↦ â`.
#[derive(Debug, Clone)]
pub struct SemisimpleQuotient {
    pub algebra: AlgebraSpec,
    /// `|M(E)| × dim(E)` matrix; row `j` is the value vector of character `j`.
    pub projection: CMat,
}

impl SemisimpleQuotient {
    pub fn project(&self, a: &Element) -> Element {
        let coords = (0..self.projection.nrows())
            .map(|j| (0..a.dim()).map(|i| self.projection[(j, i)] * a.coords[i]).sum())
            .collect();
        Element::new(coords)
    }
}

impl CharacterSpace {
    pub fn compute(algebra: &AlgebraSpec) -> Result<Self> {
        Self::compute_with_seed(algebra, DEFAULT_SEED)
    }

    pub fn compute_with_seed(algebra: &AlgebraSpec, seed: u64) -> Result<Self> {
        Ok(CharacterSpace { characters: characters_with_seed(algebra, seed)? })
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Character> {
        self.characters.iter()
    }

    /// `â` as a vector indexed by the characters.
    pub fn transform(&self, a: &Element) -> Vec<Complex64> {
        self.characters.iter().map(|chi| chi.apply(a)).collect()
    }

    /// Uniform norm of `â` on `M(E)`.
    pub fn gelfand_norm(&self, a: &Element) -> f64 {
        linalg::max_abs(&self.transform(a))
    }

    /// `|M(E)| × dim` matrix of character values.
    pub fn value_matrix(&self, dim: usize) -> CMat {
        CMat::from_fn(self.len(), dim, |j, i| self.characters[j].values[i])
    }

    /// Orthonormal basis of `⋂ ker χ`.
    pub fn radical(&self, algebra: &AlgebraSpec) -> Vec<Element> {
        let n = algebra.dim();
        let null = linalg::null_space(&self.value_matrix(n), 1e-10);
        (0..null.ncols())
            .map(|c| Element::new((0..n).map(|i| linalg::snap(null[(i, c)], 1e-13)).collect()))
            .collect()
    }

    pub fn semisimple_quotient(&self, algebra: &AlgebraSpec) -> Result<SemisimpleQuotient> {
        let m = self.len();
        let quotient = crate::algebra::preset_algebra(crate::algebra::Preset::Pointwise { n: m })?
            .with_label(format!("{}/rad", algebra.label()));
        Ok(SemisimpleQuotient { algebra: quotient, projection: self.value_matrix(algebra.dim()) })
    }
}

/// All characters of `algebra`, deduplicated and sorted.
pub fn characters(algebra: &AlgebraSpec) -> Result<Vec<Character>> {
    characters_with_seed(algebra, DEFAULT_SEED)
}

/// Same as [`characters`] with an explicit seed for the generic combination.
/// The result does not depend on the seed (up to `1e-6`).
pub fn characters_with_seed(algebra: &AlgebraSpec, seed: u64) -> Result<Vec<Character>> {
    let n = algebra.dim();
    let ops: Vec<CMat> = (0..n).map(|i| algebra.left_multiplication_basis(i)).collect();

    // Radical = kernel of the trace form; its orthogonal complement carries the
    // semisimple quotient.
    let trace_form = CMat::from_fn(n, n, |a, b| (&ops[a] * &ops[b]).trace());
    let radical = linalg::null_space(&trace_form, 1e-9);
    let complement = orthogonal_complement(&radical, n);
    let q = complement.ncols();
    if q == 0 {
        return Err(Error::InvalidParams(format!("algebra {} has no characters", algebra.label())));
    }
    let reduced: Vec<CMat> = ops.iter().map(|l| complement.adjoint() * l * &complement).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..=RETRIES {
        let mut generic = CMat::zeros(q, q);
        for r in &reduced {
            let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            generic += r * w;
        }
        let schur = match Schur::try_new(generic, 1e-14, 10_000) {
            Some(s) => s,
            None => continue,
        };
        let (vecs, tri) = schur.unpack();
        let diag: Vec<Complex64> = (0..q).map(|p| tri[(p, p)]).collect();
        let scale = diag.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let separated = (0..q).all(|a| ((a + 1)..q).all(|b| (diag[a] - diag[b]).norm() > 1e-6 * scale));
        if !separated {
            continue;
        }

        let mut found: Vec<Character> = Vec::new();
        for p in 0..q {
            let qp: Vec<Complex64> = vecs.column(p).iter().copied().collect();
            let values: Vec<Complex64> = reduced
                .iter()
                .map(|r| {
                    let rq: Vec<Complex64> = (0..q).map(|i| (0..q).map(|j| r[(i, j)] * qp[j]).sum()).collect();
                    linalg::snap(linalg::cdot(&qp, &rq), 1e-13)
                })
                .collect();
            let chi = Character::new(values, "");
            if !verify_character(algebra, &chi).passed() {
                continue;
            }
            if found.iter().all(|f| f.distance(&chi) >= DEDUP_TOL) {
                found.push(chi);
            }
        }
        found.sort_by(|a, b| lex_cmp(&a.values, &b.values));
        for (j, chi) in found.iter_mut().enumerate() {
            chi.label = format!("chi{j}");
        }
        return Ok(found);
    }
    Err(Error::GenericityFailure { attempts: RETRIES + 1 })
}

fn orthogonal_complement(basis: &CMat, n: usize) -> CMat {
    let mut span = linalg::SpanBasis::new(n, 1e-8);
    for c in 0..basis.ncols() {
        let v: Vec<Complex64> = basis.column(c).iter().copied().collect();
        span.try_push(&v);
    }
    let k = span.dim();
    for i in 0..n {
        let mut e = vec![ZERO; n];
        e[i] = ONE;
        span.try_push(&e);
    }
    let cols: Vec<Vec<Complex64>> = span.vectors()[k..].to_vec();
    linalg::from_columns(n, &cols)
}

/// `â` evaluated at every character.
pub fn gelfand_transform(algebra: &AlgebraSpec, a: &Element) -> Result<Vec<Complex64>> {
    Ok(CharacterSpace::compute(algebra)?.transform(a))
}

pub fn gelfand_norm(algebra: &AlgebraSpec, a: &Element) -> Result<f64> {
    Ok(CharacterSpace::compute(algebra)?.gelfand_norm(a))
}

pub fn semisimple_quotient(algebra: &AlgebraSpec) -> Result<SemisimpleQuotient> {
    CharacterSpace::compute(algebra)?.semisimple_quotient(algebra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{preset_algebra, Preset};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn preset(p: Preset) -> AlgebraSpec {
        preset_algebra(p).unwrap()
    }

    #[test]
    fn complex_field_has_identity_character() {
        let chars = characters(&AlgebraSpec::complex()).unwrap();
        assert_eq!(chars.len(), 1);
        assert!((chars[0].values[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn dual_numbers_have_one_character() {
        let chars = characters(&preset(Preset::DualNumbers)).unwrap();
        assert_eq!(chars.len(), 1);
        assert!(chars[0].distance(&Character::new(vec![ONE, ZERO], "")) < 1e-12);
    }

    #[test]
    fn z2_characters_are_signs() {
        let chars = characters(&preset(Preset::CyclicGroup { n: 2 })).unwrap();
        assert_eq!(chars.len(), 2);
        // lexicographic order puts g ↦ −1 first
        assert!((chars[0].values[1] + ONE).norm() < 1e-12);
        assert!((chars[1].values[1] - ONE).norm() < 1e-12);
    }

    #[test]
    fn transforms_and_norms() {
        let dual = preset(Preset::DualNumbers);
        let space = CharacterSpace::compute(&dual).unwrap();
        assert_eq!(space.transform(&dual.unit()), vec![ONE]);
        let a = Element::from_real(&[3.0, 5.0]);
        assert!((space.transform(&a)[0] - c(3.0)).norm() < 1e-12);
        assert!(space.gelfand_norm(&dual.basis(1)) < 1e-12);
        assert!((space.gelfand_norm(&dual.unit()) - 1.0).abs() < 1e-12);

        let z2 = preset(Preset::CyclicGroup { n: 2 });
        let space = CharacterSpace::compute(&z2).unwrap();
        let a = Element::from_real(&[1.0, 1.0]);
        let t = space.transform(&a);
        for (chi, v) in space.iter().zip(&t) {
            let expected = if chi.values[1].re > 0.0 { 2.0 } else { 0.0 };
            assert!((v - c(expected)).norm() < 1e-12);
        }
        assert!((space.gelfand_norm(&a) - 2.0).abs() < 1e-12);
        assert!(space.gelfand_norm(&a) <= z2.norm(&a) + 1e-12);
    }

    #[test]
    fn radicals() {
        let c2 = preset(Preset::Pointwise { n: 2 });
        assert!(c2.radical().unwrap().is_empty());

        let dual = preset(Preset::DualNumbers);
        let rad = dual.radical().unwrap();
        assert_eq!(rad.len(), 1);
        assert!(rad[0].coords[0].norm() < 1e-12 && (rad[0].coords[1].norm() - 1.0).abs() < 1e-12);

        let t3 = preset(Preset::TruncatedPoly { k: 3 });
        let rad = t3.radical().unwrap();
        assert_eq!(rad.len(), 2);
        for r in &rad {
            assert!(r.coords[0].norm() < 1e-12);
        }
    }

    #[test]
    fn quotients() {
        let c2 = preset(Preset::Pointwise { n: 2 });
        let q = semisimple_quotient(&c2).unwrap();
        assert_eq!(q.algebra.dim(), 2);
        let a = Element::from_real(&[2.0, -1.0]);
        let pa = q.project(&a);
        let mut sorted: Vec<f64> = pa.coords.iter().map(|z| z.re).collect();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![-1.0, 2.0]);

        let dual = preset(Preset::DualNumbers);
        let q = semisimple_quotient(&dual).unwrap();
        assert_eq!(q.algebra.dim(), 1);
        assert!((q.project(&Element::from_real(&[4.0, 7.0])).coords[0] - c(4.0)).norm() < 1e-12);

        let t3 = preset(Preset::TruncatedPoly { k: 3 });
        let q = semisimple_quotient(&t3).unwrap();
        assert_eq!(q.algebra.dim(), 1);
        assert!((q.project(&Element::from_real(&[-2.0, 7.0, 1.0])).coords[0] - c(-2.0)).norm() < 1e-12);
    }

    #[test]
    fn verify_character_reports() {
        let dual = preset(Preset::DualNumbers);
        assert!(verify_character(&dual, &Character::new(vec![ONE, ZERO], "ok")).passed());

        let bad = verify_character(&dual, &Character::new(vec![ONE, ONE], "bad"));
        let m = bad.check("multiplicativity").unwrap();
        assert!(!m.passed);
        assert_eq!(m.indices, vec![1, 1]);
        assert!((m.residual - 1.0).abs() < 1e-12);

        let zero = verify_character(&dual, &Character::new(vec![ZERO, ZERO], "zero"));
        assert!(!zero.check("unital").unwrap().passed);
    }

    #[test]
    fn cyclic_group_roots_of_unity() {
        let g5 = preset(Preset::CyclicGroup { n: 5 });
        let chars = characters(&g5).unwrap();
        assert_eq!(chars.len(), 5);
        for chi in &chars {
            assert!((chi.values[1].powu(5) - ONE).norm() < 1e-10);
        }
    }
}
