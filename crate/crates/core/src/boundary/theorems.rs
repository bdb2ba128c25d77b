use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::minimax::{CertifyOptions, PeakCertificate, PeakStatus, PreparedFamily};
use super::{Candidate, WitnessFamily};
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::function_algebra::{span_be, Membership, Quadruple, ValueTable};
use crate::gelfand::{self, DEFAULT_SEED};
use crate::linalg::{ONE, ZERO};
use crate::report::{Check, ValidationReport};

/// Random coefficient vectors tried by [`is_boundary`].
pub const BOUNDARY_SAMPLES: usize = 1000;
const BOUNDARY_SLACK: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-9;
const ARGMAX_TOL: f64 = 1e-9;

/// Certification outcome for every candidate of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShilovEstimate {
    pub family: String,
    pub options: CertifyOptions,
    pub certificates: Vec<PeakCertificate>,
    pub peaks: Vec<usize>,
    pub not_peaks: Vec<usize>,
    pub undecided: Vec<usize>,
}

impl ShilovEstimate {
    pub fn status(&self, candidate: usize) -> PeakStatus {
        self.certificates[candidate].status
    }
}

/// Runs [`super::certify_peak`] on every candidate, in candidate order.
pub fn shilov_estimate(family: &WitnessFamily, opts: &CertifyOptions) -> Result<ShilovEstimate> {
    opts.validate()?;
    let prepared = PreparedFamily::new(family)?;
    let certificates = prepared.certify_all(opts)?;
    let pick = |s: PeakStatus| certificates.iter().filter(|c| c.status == s).map(|c| c.target).collect::<Vec<_>>();
    Ok(ShilovEstimate {
        family: family.label.clone(),
        options: *opts,
        peaks: pick(PeakStatus::CertifiedPeak),
        not_peaks: pick(PeakStatus::CertifiedNotPeak),
        undecided: pick(PeakStatus::Undecided),
        certificates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub is_boundary: bool,
    /// Coefficients whose maximum modulus is not attained on the subset.
    #[serde(with = "crate::json::complex_vec_opt", skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Vec<Complex64>>,
    pub samples: usize,
    pub seed: u64,
}

/// Tests whether `subset` carries the maximum modulus of every witness
/// column and of [`BOUNDARY_SAMPLES`] seeded random combinations.
pub fn is_boundary(subset: &[usize], family: &WitnessFamily, seed: u64) -> Result<BoundaryCheck> {
    if subset.is_empty() {
        return Err(Error::InvalidParams("boundary test needs a nonempty subset".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= family.rows()) {
        return Err(Error::UnknownPoint(bad));
    }
    let fails = |vals: &[Complex64]| {
        let all = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let on = subset.iter().map(|&i| vals[i].norm()).fold(0.0, f64::max);
        on < (1.0 - BOUNDARY_SLACK) * all
    };
    let cols = family.cols();
    let mut samples = 0;
    for j in 0..cols {
        let mut c = vec![ZERO; cols];
        c[j] = ONE;
        samples += 1;
        if fails(&family.apply(&c)) {
            return Ok(BoundaryCheck { is_boundary: false, counterexample: Some(c), samples, seed });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..BOUNDARY_SAMPLES {
        let c: Vec<Complex64> =
            (0..cols).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
        samples += 1;
        if fails(&family.apply(&c)) {
            return Ok(BoundaryCheck { is_boundary: false, counterexample: Some(c), samples, seed });
        }
    }
    Ok(BoundaryCheck { is_boundary: true, counterexample: None, samples, seed })
}

/// The function `g = v·f` built from normalised peakers of `E` and of `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPeaker {
    pub table: ValueTable,
    /// Coordinates of `g` in the vector system's basis, when it is a member.
    #[serde(with = "crate::json::complex_vec_opt", skip_serializing_if = "Option::is_none", default)]
    pub coefficients: Option<Vec<Complex64>>,
    /// `ĝ(ψ ∘ e_y)` in `ψ`-major order.
    #[serde(with = "crate::json::complex_vec")]
    pub gelfand_values: Vec<Complex64>,
    pub pairs: Vec<(usize, usize)>,
    pub max_modulus: f64,
    pub argmax: Vec<usize>,
    /// `argmax|v̂| × argmax|f|` as candidate indices.
    pub expected_argmax: Vec<usize>,
    pub report: ValidationReport,
}

/// Builds `g = v·f` and checks membership, the factorisation
/// `ĝ(ψ∘e_y) = f(y)·ψ(v)`, the unit maximum and the argmax product law.
pub fn synthesize_product_peaker(v: &Element, f: &ValueTable, quad: &Quadruple) -> Result<ProductPeaker> {
    let algebra = &quad.algebra;
    if v.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch { expected: algebra.dim(), found: v.dim() });
    }
    let n = quad.space.len();
    if f.dim() != 1 || f.points() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.points() });
    }
    let chars = gelfand::characters(algebra)?;
    let v_hat: Vec<Complex64> = chars.iter().map(|c| c.apply(v)).collect();
    let v_norm = v_hat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let f_vals: Vec<Complex64> = (0..n).map(|y| f.at(y)[0]).collect();
    let f_norm = f_vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if (v_norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NormalizationViolated(format!("Gelfand norm of v is {v_norm}, expected 1")));
    }
    if (f_norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NormalizationViolated(format!("sup norm of f is {f_norm}, expected 1")));
    }

    let table = ValueTable::scalar_times(f, v);
    let mut report = ValidationReport::new("product_peaker");
    let coefficients = match quad.vector.span_membership(&table) {
        Membership::Member(c) => {
            report.push(Check::pass("in_vector_system", 0.0));
            Some(c)
        }
        Membership::NotInSpan { residual } => {
            report.push(Check::fail("in_vector_system", residual, vec![], "g is not in the span of the vector system"));
            None
        }
    };

    let mut pairs = Vec::with_capacity(chars.len() * n);
    let mut gelfand_values = Vec::with_capacity(chars.len() * n);
    let mut factor_residual: f64 = 0.0;
    for (p, psi) in chars.iter().enumerate() {
        for y in 0..n {
            let value = psi.apply_coords(table.at(y));
            factor_residual = factor_residual.max((value - f_vals[y] * v_hat[p]).norm());
            pairs.push((p, y));
            gelfand_values.push(value);
        }
    }
    report.push(if factor_residual <= NORMALIZATION_TOL {
        Check::pass("factorisation", factor_residual)
    } else {
        Check::fail("factorisation", factor_residual, vec![], "ĝ(ψ∘e_y) differs from f(y)ψ(v)")
    });

    let max_modulus = gelfand_values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    report.push(if (max_modulus - 1.0).abs() <= NORMALIZATION_TOL {
        Check::pass("unit_maximum", (max_modulus - 1.0).abs())
    } else {
        Check::fail("unit_maximum", (max_modulus - 1.0).abs(), vec![], format!("max |ĝ| = {max_modulus}"))
    });

    let argmax: Vec<usize> =
        gelfand_values.iter().enumerate().filter(|(_, z)| z.norm() >= max_modulus - ARGMAX_TOL).map(|(k, _)| k).collect();
    let v_top: Vec<usize> = (0..chars.len()).filter(|&p| v_hat[p].norm() >= v_norm - ARGMAX_TOL).collect();
    let f_top: Vec<usize> = (0..n).filter(|&y| f_vals[y].norm() >= f_norm - ARGMAX_TOL).collect();
    let expected_argmax: Vec<usize> = v_top.iter().flat_map(|&p| f_top.iter().map(move |&y| p * n + y)).collect();
    report.push(if argmax == expected_argmax {
        Check::pass("argmax_product", 0.0)
    } else {
        Check::fail("argmax_product", 0.0, argmax.clone(), "argmax of |ĝ| is not argmax|v̂| × argmax|f|")
    });

    Ok(ProductPeaker { table, coefficients, gelfand_values, pairs, max_modulus, argmax, expected_argmax, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Full systems as witnesses; both sides must agree exactly.
    Exact,
    /// Capped witness families on sampled spaces; the product family is
    /// `span(B·E)` of the scalar witnesses.
    Estimation,
}

/// Comparison of the certified candidate set of the vector family with the
/// predicted product set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetComparison {
    pub expected: Vec<usize>,
    pub certified: Vec<usize>,
    pub missing: Vec<usize>,
    pub extra: Vec<usize>,
    pub undecided: Vec<usize>,
    pub equal: bool,
    pub contained: bool,
    /// `|expected ∩ certified| / |expected|`.
    pub coverage: f64,
}

impl SetComparison {
    fn new(expected: Vec<usize>, certified: Vec<usize>, undecided: Vec<usize>) -> Self {
        let e: BTreeSet<usize> = expected.iter().copied().collect();
        let c: BTreeSet<usize> = certified.iter().copied().collect();
        let missing: Vec<usize> = e.difference(&c).copied().collect();
        let extra: Vec<usize> = c.difference(&e).copied().collect();
        let hit = e.intersection(&c).count();
        let coverage = if e.is_empty() { 1.0 } else { hit as f64 / e.len() as f64 };
        SetComparison {
            equal: missing.is_empty() && extra.is_empty(),
            contained: extra.is_empty(),
            expected,
            certified,
            missing,
            extra,
            undecided,
            coverage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTheoremReport {
    pub regime: Regime,
    pub preconditions: ValidationReport,
    /// Certified boundary of `E`, as indices into its character list.
    pub algebra_boundary: Vec<usize>,
    /// Certified boundary of `B`, as point indices.
    pub scalar_boundary: Vec<usize>,
    pub candidates: Vec<Candidate>,
    pub statuses: Vec<PeakStatus>,
    pub comparison: SetComparison,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakProductReport {
    pub regime: Regime,
    pub preconditions: ValidationReport,
    /// Peak points of `E`, `B` and `B̃`, each confirmed by re-evaluating an
    /// explicit peaking combination.
    pub algebra_peaks: Vec<usize>,
    pub scalar_peaks: Vec<usize>,
    pub vector_peaks: Vec<usize>,
    pub comparison: SetComparison,
    /// The peak sets coincide with the certified boundary estimates.
    pub agrees_with_shilov: bool,
    /// The peak set of `B̃` passes [`is_boundary`].
    pub peaks_form_boundary: bool,
    pub seed: u64,
    pub passed: bool,
}

struct Estimates {
    preconditions: ValidationReport,
    algebra: ShilovEstimate,
    algebra_family: WitnessFamily,
    scalar: ShilovEstimate,
    scalar_family: WitnessFamily,
    vector: ShilovEstimate,
    vector_family: WitnessFamily,
}

impl Estimates {
    fn compute(quad: &Quadruple, regime: Regime, opts: &CertifyOptions) -> Result<Self> {
        let preconditions = preconditions(quad, regime);
        let algebra_family = WitnessFamily::from_algebra(&quad.algebra)?;
        let scalar_family = WitnessFamily::from_system(&quad.scalar)?;
        let vector_family = match regime {
            Regime::Exact => WitnessFamily::from_system(&quad.vector)?,
            Regime::Estimation => WitnessFamily::from_system(&span_be(&quad.scalar, &quad.algebra)?)?,
        };
        Ok(Estimates {
            preconditions,
            algebra: shilov_estimate(&algebra_family, opts)?,
            scalar: shilov_estimate(&scalar_family, opts)?,
            vector: shilov_estimate(&vector_family, opts)?,
            algebra_family,
            scalar_family,
            vector_family,
        })
    }

    /// Candidates of the vector family whose character lies in `chars` and
    /// whose point lies in `points`.
    fn product_set(&self, chars: &[usize], points: &[usize]) -> Vec<usize> {
        let chars: BTreeSet<usize> = chars.iter().copied().collect();
        let points: BTreeSet<usize> = points.iter().copied().collect();
        self.vector_family
            .candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.character.is_some_and(|p| chars.contains(&p)) && c.point.is_some_and(|x| points.contains(&x)))
            .map(|(k, _)| k)
            .collect()
    }
}

fn preconditions(quad: &Quadruple, regime: Regime) -> ValidationReport {
    let mut report = match regime {
        Regime::Estimation => {
            let mut r = ValidationReport::new("preconditions");
            r.push(Check::pass("admissible", 0.0).with_detail("not checked in the estimation regime"));
            return r;
        }
        Regime::Exact => match quad.check_admissible() {
            Ok(r) => r,
            Err(e) => {
                let mut r = ValidationReport::new("admissible_quadruple");
                r.push(Check::fail("admissible", f64::INFINITY, vec![], e.to_string()));
                r
            }
        },
    };
    report.subject = "preconditions".into();
    report.push(if quad.vector.closed {
        Check::pass("vector_closed", 0.0)
    } else {
        Check::fail("vector_closed", 0.0, vec![], "vector system is not closed under products")
    });
    report.push(match quad.check_natural() {
        Ok(true) => Check::pass("natural", 0.0),
        Ok(false) => Check::fail("natural", 0.0, vec![], "associated map is not bijective"),
        Err(e) => Check::fail("natural", 0.0, vec![], e.to_string()),
    });
    report
}

/// Compares the certified boundary of `B̃` with `π(Γ(E) × Γ(B))`.
pub fn verify_product_theorem(quad: &Quadruple, regime: Regime, opts: &CertifyOptions) -> Result<ProductTheoremReport> {
    let est = Estimates::compute(quad, regime, opts)?;
    let expected = est.product_set(&est.algebra.peaks, &est.scalar.peaks);
    let comparison = SetComparison::new(expected, est.vector.peaks.clone(), est.vector.undecided.clone());
    let passed = match regime {
        Regime::Exact => est.preconditions.passed() && comparison.equal && comparison.undecided.is_empty(),
        Regime::Estimation => comparison.contained,
    };
    Ok(ProductTheoremReport {
        regime,
        algebra_boundary: est.algebra.peaks.clone(),
        scalar_boundary: est.scalar.peaks.clone(),
        candidates: est.vector_family.candidates.clone(),
        statuses: est.vector.certificates.iter().map(|c| c.status).collect(),
        preconditions: est.preconditions,
        comparison,
        passed,
    })
}

/// Peak points confirmed by direct evaluation of each certificate.
fn explicit_peaks(est: &ShilovEstimate, family: &WitnessFamily) -> Vec<usize> {
    est.certificates
        .iter()
        .filter(|c| c.status == PeakStatus::CertifiedPeak)
        .filter(|c| {
            let (at, off) = c.reevaluate(family);
            (at - ONE).norm() <= NORMALIZATION_TOL && off < 1.0
        })
        .map(|c| c.target)
        .collect()
}

/// Compares the peak points of `B̃` with `π(S₀(E) × S₀(B))`.
pub fn verify_peak_product(quad: &Quadruple, regime: Regime, opts: &CertifyOptions) -> Result<PeakProductReport> {
    let est = Estimates::compute(quad, regime, opts)?;
    let algebra_peaks = explicit_peaks(&est.algebra, &est.algebra_family);
    let scalar_peaks = explicit_peaks(&est.scalar, &est.scalar_family);
    let vector_peaks = explicit_peaks(&est.vector, &est.vector_family);
    let agrees_with_shilov =
        algebra_peaks == est.algebra.peaks && scalar_peaks == est.scalar.peaks && vector_peaks == est.vector.peaks;
    let peaks_form_boundary =
        !vector_peaks.is_empty() && is_boundary(&vector_peaks, &est.vector_family, DEFAULT_SEED)?.is_boundary;
    let expected = est.product_set(&algebra_peaks, &scalar_peaks);
    let comparison = SetComparison::new(expected, vector_peaks.clone(), est.vector.undecided.clone());
    let passed = match regime {
        Regime::Exact => {
            est.preconditions.passed() && comparison.equal && comparison.undecided.is_empty() && agrees_with_shilov && peaks_form_boundary
        }
        Regime::Estimation => comparison.contained && agrees_with_shilov,
    };
    Ok(PeakProductReport {
        regime,
        preconditions: est.preconditions,
        algebra_peaks,
        scalar_peaks,
        vector_peaks,
        comparison,
        agrees_with_shilov,
        peaks_form_boundary,
        seed: DEFAULT_SEED,
        passed,
    })
}
