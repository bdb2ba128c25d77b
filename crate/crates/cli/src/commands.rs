//! One function per `run` command. Each returns the report body and any
//! extra artifacts; the caller wraps and writes them.

use serde_json::{json, Value};
use std::fmt::Write as _;

use gelfand_core::gelfand::CharacterSpace;
use gelfand_core::json::to_pair;
use gelfand_core::spaces::{polynomial_hull_raster, topological_boundary_raster, write_pgm, Connectivity};
use gelfand_core::{
    certify_peak, is_boundary, shilov_estimate, synthesize_product_peaker, verify_peak_product, verify_product_theorem, Check,
    Complex64, Element, PeakStatus, RasterRegion, ShilovEstimate, ValidationReport, WitnessFamily,
};

use crate::config::{Command, InlineWitnesses};
use crate::error::CliError;
use crate::resolve::Resolver;

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    pub pgm: Option<String>,
    /// One-line human summary.
    pub summary: String,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(to_pair).collect()
}

pub fn run_command(resolver: &mut Resolver, cmd: &Command, seed: u64) -> Result<Outcome, CliError> {
    match cmd {
        Command::Characters { target, .. } => characters(resolver, target, seed),
        Command::Validate { target, .. } => validate(resolver, target, seed),
        Command::Hull { target, .. } => hull(resolver, target),
        Command::Shilov { target, witnesses, certify, .. } => shilov(resolver, target.as_deref(), witnesses.as_ref(), certify.options(), seed),
        Command::VerifyProduct { target, regime, certify, .. } => {
            let (quad, _) = resolver.quadruple(target)?;
            let report = verify_product_theorem(&quad, *regime, &certify.options())?;
            let mut csv = String::from("index,label,character,point,status,expected\n");
            for (k, (c, s)) in report.candidates.iter().zip(&report.statuses).enumerate() {
                let expected = report.comparison.expected.contains(&k);
                let _ = writeln!(csv, "{k},{},{},{},{},{expected}", c.label, opt(c.character), opt(c.point), s.as_str());
            }
            let summary = format!(
                "{} certified, {} expected, {} missing, {} extra: {}",
                report.comparison.certified.len(),
                report.comparison.expected.len(),
                report.comparison.missing.len(),
                report.comparison.extra.len(),
                if report.passed { "pass" } else { "fail" }
            );
            Ok(Outcome { result: to_value(&report), csv: Some(csv), pgm: None, summary })
        }
        Command::VerifyPeaks { target, regime, certify, .. } => {
            let (quad, _) = resolver.quadruple(target)?;
            let report = verify_peak_product(&quad, *regime, &certify.options())?;
            let summary = format!(
                "{} peaks of the product, {} expected, agrees with boundary estimate: {}: {}",
                report.vector_peaks.len(),
                report.comparison.expected.len(),
                report.agrees_with_shilov,
                if report.passed { "pass" } else { "fail" }
            );
            Ok(Outcome { result: to_value(&report), csv: None, pgm: None, summary })
        }
        Command::Peaker { target, point, character, v, certify, .. } => {
            peaker(resolver, target, *point, character.unwrap_or(0), v.as_deref(), certify.options())
        }
    }
}

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn characters(resolver: &mut Resolver, target: &str, seed: u64) -> Result<Outcome, CliError> {
    let algebra = resolver.algebra(target)?;
    let space = CharacterSpace::compute_with_seed(&algebra, seed)?;
    let radical = space.radical(&algebra);
    let quotient = space.semisimple_quotient(&algebra)?;
    let result = json!({
        "algebra": algebra.label(),
        "dim": algebra.dim(),
        "characters": to_value(&space.characters),
        "radical": radical.iter().map(|r| pairs(&r.coords)).collect::<Vec<_>>(),
        "semisimple_quotient": { "dim": quotient.algebra.dim(), "radical_dim": radical.len() },
    });
    let summary = format!("{} characters, radical of dimension {}", space.len(), radical.len());
    Ok(Outcome { result, csv: None, pgm: None, summary })
}

fn validate(resolver: &mut Resolver, target: &str, seed: u64) -> Result<Outcome, CliError> {
    let config = resolver.config();
    let report = if config.quadruples.contains_key(target) {
        let (quad, _) = resolver.quadruple(target)?;
        let mut report = quad.check_admissible()?;
        report.push(match quad.check_natural() {
            Ok(true) => Check::pass("natural", 0.0),
            Ok(false) => Check::fail("natural", 0.0, vec![], "associated map is not bijective"),
            Err(e) => Check::fail("natural", 0.0, vec![], e.to_string()),
        });
        report
    } else if config.systems.contains_key(target) {
        let system = resolver.system(target)?;
        let mut report = ValidationReport::new(target);
        report.push(Check::pass("contains_unit", 0.0));
        report.push(if system.closed {
            Check::pass("closed", 0.0)
        } else {
            Check::fail("closed", 0.0, vec![], "not closed under products")
        });
        report.push(if system.separation_check() {
            Check::pass("separates_points", 0.0)
        } else {
            Check::fail("separates_points", 0.0, vec![], "some pair of points is not separated")
        });
        report.push(Check::pass("embedding_constant", 0.0).with_detail(format!("{}", system.embedding_constant(seed))));
        report
    } else if let Some(def) = config.spaces.get(target) {
        if def.is_raster() {
            let raster = resolver.raster(target)?;
            let mut report = ValidationReport::new(target);
            report.push(Check::pass("nonempty", 0.0).with_detail(format!("{} pixels", raster.count())));
            report
        } else {
            let space = resolver.space(target)?.space;
            if space.has_metric() {
                space.validate_metric()?
            } else {
                let mut report = ValidationReport::new(target);
                report.push(Check::pass("points", 0.0).with_detail(format!("{} points, no metric", space.len())));
                report
            }
        }
    } else {
        resolver.algebra(target)?.validate()
    };
    let summary = format!("{} checks, {}", report.checks.len(), if report.passed() { "all passed" } else { "some failed" });
    Ok(Outcome { result: to_value(&report), csv: None, pgm: None, summary })
}

fn hull(resolver: &mut Resolver, target: &str) -> Result<Outcome, CliError> {
    let region = resolver.raster(target)?;
    let hull = polynomial_hull_raster(&region);
    let mut csv = String::from("x,y\n");
    for z in topological_boundary_raster(&hull) {
        let _ = writeln!(csv, "{},{}", z.re, z.im);
    }
    let holes = region.count_components(false, Connectivity::Four) - 1;
    let result = json!({
        "width": hull.width(),
        "height": hull.height(),
        "sidecar": to_value(&hull.sidecar()),
        "region_pixels": region.count(),
        "hull_pixels": hull.count(),
        "filled_pixels": hull.count() - region.count(),
        "holes": holes,
    });
    let summary = format!("{} holes filled, {} pixels added", holes, hull.count() - region.count());
    Ok(Outcome { result, csv: Some(csv), pgm: Some(hull.to_pgm()), summary })
}

fn shilov(
    resolver: &mut Resolver,
    target: Option<&str>,
    inline: Option<&InlineWitnesses>,
    opts: gelfand_core::CertifyOptions,
    seed: u64,
) -> Result<Outcome, CliError> {
    let (family, raster, coords) = match (target, inline) {
        (_, Some(w)) => {
            let label = w.label.clone().unwrap_or_else(|| "inline".into());
            (WitnessFamily::from_rows(label, w.values.clone())?, None, None)
        }
        (Some(t), None) if resolver.config().systems.contains_key(t) => {
            let system = resolver.system(t)?;
            (WitnessFamily::from_system(&system)?, resolver.raster_of_system(t)?, system.space.coords.clone())
        }
        (Some(t), None) => (WitnessFamily::from_algebra(&resolver.algebra(t)?)?, None, None),
        (None, None) => return Err(CliError::Precondition("shilov needs a target or inline witnesses".into())),
    };
    let est = shilov_estimate(&family, &opts)?;
    let boundary = if est.peaks.is_empty() { None } else { Some(is_boundary(&est.peaks, &family, seed)?) };

    let mut csv = String::from("index,label,character,point,x,y,status,optimum\n");
    for (k, (cand, cert)) in family.candidates.iter().zip(&est.certificates).enumerate() {
        let (x, y) = match (cand.point, &coords) {
            (Some(p), Some(zs)) => (zs[p].re.to_string(), zs[p].im.to_string()),
            _ => (String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{k},{},{},{},{x},{y},{},{}",
            cand.label,
            opt(cand.character),
            opt(cand.point),
            cert.status.as_str(),
            cert.optimum
        );
    }
    let pgm = match (&raster, &coords) {
        (Some(r), Some(zs)) => Some(overlay(r, zs, &family, &est)),
        _ => None,
    };
    let summary = format!(
        "{} candidates: {} peak, {} not peak, {} undecided",
        family.rows(),
        est.peaks.len(),
        est.not_peaks.len(),
        est.undecided.len()
    );
    let result = json!({
        "family": family.label,
        "candidates": to_value(&family.candidates),
        "values": family.values.iter().map(|r| pairs(r)).collect::<Vec<_>>(),
        "estimate": to_value(&est),
        "boundary_check": boundary.map(|b| to_value(&b)),
    });
    Ok(Outcome { result, csv: Some(csv), pgm, summary })
}

/// Raster overlay: region pixels at 40, sampled points by their best status
/// over characters (not peak 85, undecided 170, peak 255).
fn overlay(raster: &RasterRegion, coords: &[Complex64], family: &WitnessFamily, est: &ShilovEstimate) -> String {
    let (w, h) = (raster.width(), raster.height());
    let mut levels: Vec<u8> = raster.cells().iter().map(|&c| if c { 40 } else { 0 }).collect();
    let level = |s: PeakStatus| match s {
        PeakStatus::CertifiedNotPeak => 85,
        PeakStatus::Undecided => 170,
        PeakStatus::CertifiedPeak => 255,
    };
    for (cand, cert) in family.candidates.iter().zip(&est.certificates) {
        if let Some(p) = cand.point {
            if let Some((c, r)) = raster.pixel_of(coords[p]) {
                let idx = r * w + c;
                levels[idx] = levels[idx].max(level(cert.status));
            }
        }
    }
    write_pgm(w, h, &levels)
}

fn peaker(
    resolver: &mut Resolver,
    target: &str,
    point: usize,
    character: usize,
    v: Option<&[[f64; 2]]>,
    opts: gelfand_core::CertifyOptions,
) -> Result<Outcome, CliError> {
    let (quad, _) = resolver.quadruple(target)?;
    if point >= quad.space.len() {
        return Err(CliError::Precondition(format!("point {point} out of range for {} points", quad.space.len())));
    }
    let scalar_family = WitnessFamily::from_system(&quad.scalar)?;
    let f_cert = certify_peak(&scalar_family, point, &opts)?;
    if f_cert.status != PeakStatus::CertifiedPeak {
        return Err(CliError::Precondition(format!("point {point} is not a certified peak point of the scalar system")));
    }
    let f = quad.scalar.combine(&f_cert.coefficients)?;

    let v = match v {
        Some(coords) => {
            if coords.len() != quad.algebra.dim() {
                return Err(CliError::Precondition(format!("v needs {} coordinates", quad.algebra.dim())));
            }
            Element::new(coords.iter().map(|p| Complex64::new(p[0], p[1])).collect())
        }
        None => {
            let algebra_family = WitnessFamily::from_algebra(&quad.algebra)?;
            if character >= algebra_family.rows() {
                return Err(CliError::Precondition(format!("character {character} out of range")));
            }
            let cert = certify_peak(&algebra_family, character, &opts)?;
            if cert.status != PeakStatus::CertifiedPeak {
                return Err(CliError::Precondition(format!("character {character} is not a certified peak point")));
            }
            Element::new(cert.coefficients)
        }
    };
    let g = synthesize_product_peaker(&v, &f, &quad)?;

    let mut csv = String::from("character,point,re,im,modulus\n");
    for (&(p, y), z) in g.pairs.iter().zip(&g.gelfand_values) {
        let _ = writeln!(csv, "{p},{y},{},{},{}", z.re, z.im, z.norm());
    }
    let summary = format!(
        "max |ĝ| = {:.12}, argmax {:?}: {}",
        g.max_modulus,
        g.argmax,
        if g.report.passed() { "pass" } else { "fail" }
    );
    let result = json!({
        "point": point,
        "v": pairs(&v.coords),
        "f": pairs(f.as_slice()),
        "peaker": to_value(&g),
    });
    Ok(Outcome { result, csv: Some(csv), pgm: None, summary })
}
