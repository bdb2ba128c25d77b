mod common;

use common::{c, circle, sampled};
use gelfand_core::algebra::preset_algebra;
use gelfand_core::function_algebra::{make_cxe, make_poly, make_rational, span_be};
use gelfand_core::gelfand::{characters, DEFAULT_SEED};
use gelfand_core::{
    is_boundary, shilov_estimate, synthesize_product_peaker, verify_peak_product, verify_product_theorem, AlgebraSpec,
    CertifyOptions, Complex64, FiniteSpace, PeakStatus, Preset, Quadruple, Regime, SampleStrategy, Shape,
    ValueTable, WitnessFamily,
};

fn opts() -> CertifyOptions {
    CertifyOptions::default()
}

fn three_points() -> FiniteSpace {
    FiniteSpace::on_line(&[0.0, 0.25, 1.0]).unwrap()
}

fn peaked_at_first() -> ValueTable {
    ValueTable::scalar(vec![c(1.0, 0.0), c(0.0, 0.5), c(-0.3, 0.0)]).unwrap()
}

#[test]
fn full_function_algebra_certifies_every_candidate() {
    for preset in [Preset::Pointwise { n: 2 }, Preset::Pointwise { n: 3 }, Preset::CyclicGroup { n: 3 }] {
        let algebra = preset_algebra(preset).unwrap();
        let family = WitnessFamily::from_system(&make_cxe(&three_points(), &algebra).unwrap()).unwrap();
        let est = shilov_estimate(&family, &opts()).unwrap();
        assert_eq!(est.peaks, (0..family.rows()).collect::<Vec<_>>(), "{preset:?}");
        for cert in &est.certificates {
            let (at, off) = cert.reevaluate(&family);
            assert!((at - c(1.0, 0.0)).norm() < 1e-9);
            assert!(off < 1e-9, "indicator witness expected, off-target {off}");
        }
    }
}

#[test]
fn polynomials_never_certify_disk_interior() {
    let disk = Shape::Disk { center: c(0.0, 0.0), radius: 1.0 };
    let (space, ranges) = sampled(&disk, &[circle(1.0, 32), SampleStrategy::InteriorGrid { step: 0.3 }]);
    let family = WitnessFamily::from_system(&make_poly(&space, &AlgebraSpec::complex(), 8).unwrap()).unwrap();
    let est = shilov_estimate(&family, &opts()).unwrap();
    assert!(est.peaks.iter().all(|k| ranges[0].contains(k)), "interior peak among {:?}", est.peaks);
    assert_eq!(est.peaks.len(), 32);
    for k in ranges[1].clone() {
        assert!(est.certificates[k].optimum >= 1.0 - opts().tol);
    }
}

#[test]
fn rational_witnesses_reach_the_inner_circle() {
    let annulus = Shape::Annulus { center: c(0.0, 0.0), inner: 0.5, outer: 1.0 };
    let (space, ranges) = sampled(&annulus, &[circle(1.0, 16), circle(0.5, 16)]);
    let inner = &ranges[1];
    let scalar = AlgebraSpec::complex();
    let poly = shilov_estimate(&WitnessFamily::from_system(&make_poly(&space, &scalar, 8).unwrap()).unwrap(), &opts()).unwrap();
    let rational =
        shilov_estimate(&WitnessFamily::from_system(&make_rational(&space, &scalar, 8, &[c(0.0, 0.0)]).unwrap()).unwrap(), &opts())
            .unwrap();
    let inner_peaks = |peaks: &[usize]| peaks.iter().filter(|k| inner.contains(k)).count();
    assert_eq!(inner_peaks(&poly.peaks), 0);
    assert_eq!(inner_peaks(&rational.peaks), 16);
    assert!(poly.peaks.iter().all(|k| rational.peaks.contains(k)));
}

#[test]
fn boundary_tests() {
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    let family = WitnessFamily::from_system(&make_cxe(&three_points(), &algebra).unwrap()).unwrap();
    let all: Vec<usize> = (0..family.rows()).collect();
    let check = is_boundary(&all, &family, DEFAULT_SEED).unwrap();
    assert!(check.is_boundary && check.counterexample.is_none());
    assert_eq!(check.samples, family.cols() + gelfand_core::boundary::BOUNDARY_SAMPLES);

    let est = shilov_estimate(&family, &opts()).unwrap();
    assert!(is_boundary(&est.peaks, &family, DEFAULT_SEED).unwrap().is_boundary);
    assert!(!is_boundary(&all[1..], &family, DEFAULT_SEED).unwrap().is_boundary);

    let disk = Shape::Disk { center: c(0.0, 0.0), radius: 1.0 };
    let (space, ranges) = sampled(&disk, &[circle(1.0, 12), SampleStrategy::InteriorGrid { step: 0.3 }]);
    let poly = WitnessFamily::from_system(&make_poly(&space, &AlgebraSpec::complex(), 4).unwrap()).unwrap();
    let interior: Vec<usize> = ranges[1].clone().collect();
    let check = is_boundary(&interior, &poly, DEFAULT_SEED).unwrap();
    assert!(!check.is_boundary);
    // the constant passes, the coordinate z is the first failure
    let mut z = vec![Complex64::new(0.0, 0.0); poly.cols()];
    z[1] = c(1.0, 0.0);
    assert_eq!(check.counterexample, Some(z));
    assert!(is_boundary(&ranges[0].clone().collect::<Vec<_>>(), &poly, DEFAULT_SEED).unwrap().is_boundary);

    assert!(is_boundary(&[], &poly, DEFAULT_SEED).is_err());
}

#[test]
fn scalar_peaker_is_f_itself() {
    let quad = Quadruple::cxe(&three_points(), &AlgebraSpec::complex()).unwrap();
    let f = peaked_at_first();
    let g = synthesize_product_peaker(&AlgebraSpec::complex().unit(), &f, &quad).unwrap();
    assert_eq!(g.table, f);
    assert!(g.report.passed(), "{:?}", g.report);
    assert_eq!(g.argmax, vec![0]);
}

#[test]
fn idempotent_peaker_peaks_at_one_pair() {
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    let quad = Quadruple::cxe(&three_points(), &algebra).unwrap();
    let v = algebra.basis(0);
    let g = synthesize_product_peaker(&v, &peaked_at_first(), &quad).unwrap();
    assert!(g.report.passed(), "{:?}", g.report);
    // oracle: f(y)·χ(v) over all pairs
    let chars = characters(&algebra).unwrap();
    let f = peaked_at_first();
    let mut best = Vec::new();
    for (p, chi) in chars.iter().enumerate() {
        for y in 0..3 {
            let value = f.at(y)[0] * chi.apply(&v);
            assert!((value - g.gelfand_values[p * 3 + y]).norm() < 1e-12);
            if (value.norm() - 1.0).abs() < 1e-9 {
                best.push(p * 3 + y);
            }
        }
    }
    assert_eq!(best.len(), 1);
    assert_eq!(g.argmax, best);
}

#[test]
fn dual_number_peaker_factors_through_the_single_character() {
    let algebra = preset_algebra(Preset::DualNumbers).unwrap();
    let quad = Quadruple::cxe(&three_points(), &algebra).unwrap();
    let f = peaked_at_first();
    let g = synthesize_product_peaker(&algebra.unit(), &f, &quad).unwrap();
    assert!(g.report.passed(), "{:?}", g.report);
    for y in 0..3 {
        assert!((g.gelfand_values[y] - f.at(y)[0]).norm() < 1e-12);
    }
    assert_eq!(g.argmax, vec![0]);
}

#[test]
fn peaker_rejects_unnormalised_inputs() {
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    let quad = Quadruple::cxe(&three_points(), &algebra).unwrap();
    let twice = algebra.unit().scale(c(2.0, 0.0));
    assert!(synthesize_product_peaker(&twice, &peaked_at_first(), &quad).is_err());
    let weak = ValueTable::scalar(vec![c(0.5, 0.0); 3]).unwrap();
    assert!(synthesize_product_peaker(&algebra.unit(), &weak, &quad).is_err());
}

#[test]
fn exact_product_theorem_for_pointwise_pairs() {
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    let quad = Quadruple::cxe(&three_points(), &algebra).unwrap();
    let report = verify_product_theorem(&quad, Regime::Exact, &opts()).unwrap();
    assert!(report.passed, "{report:?}");
    assert_eq!(report.comparison.certified, (0..6).collect::<Vec<_>>());
    assert!(report.comparison.missing.is_empty() && report.comparison.extra.is_empty());

    let peaks = verify_peak_product(&quad, Regime::Exact, &opts()).unwrap();
    assert!(peaks.passed && peaks.agrees_with_shilov && peaks.peaks_form_boundary, "{peaks:?}");
    assert_eq!(peaks.vector_peaks.len(), 6);
}

#[test]
fn exact_product_theorem_for_lipschitz_dual_numbers() {
    let algebra = preset_algebra(Preset::DualNumbers).unwrap();
    let quad = Quadruple::lip(&three_points(), &algebra, 0.5).unwrap();
    let report = verify_product_theorem(&quad, Regime::Exact, &opts()).unwrap();
    assert!(report.passed, "{report:?}");
    assert_eq!(report.algebra_boundary, vec![0]);
    assert_eq!(report.comparison.certified, vec![0, 1, 2]);

    let peaks = verify_peak_product(&quad, Regime::Exact, &opts()).unwrap();
    assert!(peaks.passed, "{peaks:?}");
    assert_eq!(peaks.algebra_peaks, vec![0]);
    assert_eq!(peaks.vector_peaks, vec![0, 1, 2]);
}

#[test]
fn scalar_quadruple_reduces_to_identity() {
    let b = make_cxe(&three_points(), &AlgebraSpec::complex()).unwrap();
    let quad = Quadruple::new(b.clone(), b).unwrap();
    let peaks = verify_peak_product(&quad, Regime::Exact, &opts()).unwrap();
    assert!(peaks.passed, "{peaks:?}");
    assert_eq!(peaks.scalar_peaks, peaks.vector_peaks);
}

#[test]
fn estimation_regime_is_sound_on_a_small_annulus() {
    let annulus = Shape::Annulus { center: c(0.0, 0.0), inner: 0.5, outer: 1.0 };
    let (space, ranges) =
        sampled(&annulus, &[circle(1.0, 16), circle(0.5, 16), SampleStrategy::InteriorGrid { step: 0.35 }]);
    let scalar = make_rational(&space, &AlgebraSpec::complex(), 4, &[c(0.0, 0.0)]).unwrap();
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    let vector = span_be(&scalar, &algebra).unwrap();
    let quad = Quadruple::new(scalar, vector).unwrap();
    let report = verify_product_theorem(&quad, Regime::Estimation, &opts()).unwrap();
    assert!(report.passed && report.comparison.contained, "{:?}", report.comparison);
    let grid = &ranges[2];
    for &k in &report.comparison.certified {
        let point = report.candidates[k].point.unwrap();
        assert!(!grid.contains(&point), "interior pair {} certified", report.candidates[k].label);
    }
    assert!(report.comparison.coverage > 0.5);
    assert_eq!(report.statuses.iter().filter(|s| **s == PeakStatus::Undecided).count(), report.comparison.undecided.len());
}

#[test]
fn exact_regime_reports_failed_preconditions() {
    let space = three_points();
    let algebra = preset_algebra(Preset::Pointwise { n: 2 }).unwrap();
    // not closed under products: span{1, z}
    let scalar = make_poly(&space, &AlgebraSpec::complex(), 1).unwrap();
    let vector = make_poly(&space, &algebra, 1).unwrap();
    let quad = Quadruple::new(scalar, vector).unwrap();
    let report = verify_product_theorem(&quad, Regime::Exact, &opts()).unwrap();
    assert!(!report.preconditions.passed());
    assert!(!report.passed);
}
