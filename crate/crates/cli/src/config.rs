//! Experiment configuration: schema, parsing and static validation.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gelfand_core::algebra::Preset;
use gelfand_core::{AlgebraSpec, Check, CertifyOptions, Regime, SampleStrategy, Shape, ValidationReport};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgebraDef>,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceDef>,
    #[serde(default)]
    pub systems: BTreeMap<String, SystemDef>,
    #[serde(default)]
    pub quadruples: BTreeMap<String, QuadrupleDef>,
    pub run: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraDef {
    /// A preset name such as `dual_numbers` or `pointwise_2`.
    Preset(String),
    /// Explicit structure constants.
    Structure(AlgebraSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDef {
    Line(Vec<f64>),
    Coords(Vec<[f64; 2]>),
    Metric { points: Vec<String>, distances: Vec<Vec<f64>> },
    Discrete(usize),
    /// A rasterised plane region; usable by `hull` and as a sampling source.
    Raster { shape: Shape, resolution: f64 },
    /// Samples of a named raster, concatenated in order.
    Sample { raster: String, strategies: Vec<SampleStrategy> },
}

impl SpaceDef {
    pub fn is_raster(&self) -> bool {
        matches!(self, SpaceDef::Raster { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemDef {
    Cxe { space: String, algebra: String },
    Lip { space: String, algebra: String, alpha: f64 },
    Poly { space: String, algebra: String, degree: usize },
    Rational { space: String, algebra: String, degree: usize, poles: Vec<[f64; 2]> },
    SpanBe { scalar: String, algebra: String },
    Closure { of: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleDef {
    pub space: String,
    pub algebra: String,
    pub scalar: String,
    pub vector: String,
}

/// Overrides of the certification defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub sides: Option<usize>,
    #[serde(default)]
    pub refine_iterations: Option<usize>,
}

impl CertifyParams {
    pub fn options(&self) -> CertifyOptions {
        let d = CertifyOptions::default();
        CertifyOptions {
            tol: self.tol.unwrap_or(d.tol),
            sides: self.sides.unwrap_or(d.sides),
            refine_iterations: self.refine_iterations.unwrap_or(d.refine_iterations),
        }
    }
}

/// A witness matrix given inline, one row per candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineWitnesses {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(with = "gelfand_core::json::complex_matrix")]
    pub values: Vec<Vec<gelfand_core::Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Characters {
        target: String,
        #[serde(default)]
        name: Option<String>,
    },
    Validate {
        target: String,
        #[serde(default)]
        name: Option<String>,
    },
    Hull {
        target: String,
        #[serde(default)]
        name: Option<String>,
    },
    Shilov {
        #[serde(default)]
        target: Option<String>,
        #[serde(default)]
        witnesses: Option<InlineWitnesses>,
        #[serde(default)]
        certify: CertifyParams,
        #[serde(default)]
        name: Option<String>,
    },
    VerifyProduct {
        target: String,
        #[serde(default = "exact")]
        regime: Regime,
        #[serde(default)]
        certify: CertifyParams,
        #[serde(default)]
        name: Option<String>,
    },
    VerifyPeaks {
        target: String,
        #[serde(default = "exact")]
        regime: Regime,
        #[serde(default)]
        certify: CertifyParams,
        #[serde(default)]
        name: Option<String>,
    },
    Peaker {
        target: String,
        /// Point at which the scalar factor peaks.
        point: usize,
        /// Character at which `v̂` peaks; ignored when `v` is given.
        #[serde(default)]
        character: Option<usize>,
        /// Explicit coordinates of `v` as `[re, im]` pairs.
        #[serde(default)]
        v: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        certify: CertifyParams,
        #[serde(default)]
        name: Option<String>,
    },
}

fn exact() -> Regime {
    Regime::Exact
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Characters { .. } => "characters",
            Command::Validate { .. } => "validate",
            Command::Hull { .. } => "hull",
            Command::Shilov { .. } => "shilov",
            Command::VerifyProduct { .. } => "verify-product",
            Command::VerifyPeaks { .. } => "verify-peaks",
            Command::Peaker { .. } => "peaker",
        }
    }

    pub fn target(&self) -> Option<&str> {
        match self {
            Command::Characters { target, .. }
            | Command::Validate { target, .. }
            | Command::Hull { target, .. }
            | Command::VerifyProduct { target, .. }
            | Command::VerifyPeaks { target, .. }
            | Command::Peaker { target, .. } => Some(target),
            Command::Shilov { target, .. } => target.as_deref(),
        }
    }

    /// Stem of the output files: the explicit name, else `command_target`.
    pub fn output_name(&self) -> String {
        let explicit = match self {
            Command::Characters { name, .. }
            | Command::Validate { name, .. }
            | Command::Hull { name, .. }
            | Command::Shilov { name, .. }
            | Command::VerifyProduct { name, .. }
            | Command::VerifyPeaks { name, .. }
            | Command::Peaker { name, .. } => name.clone(),
        };
        explicit.unwrap_or_else(|| format!("{}_{}", self.keyword(), self.target().unwrap_or("inline")).replace('-', "_"))
    }

    fn certify(&self) -> Option<&CertifyParams> {
        match self {
            Command::Shilov { certify, .. }
            | Command::VerifyProduct { certify, .. }
            | Command::VerifyPeaks { certify, .. }
            | Command::Peaker { certify, .. } => Some(certify),
            _ => None,
        }
    }
}

/// Parses a config, reporting syntax and schema errors with line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Resolves an algebra reference: a configured name, else a preset name.
pub(crate) fn algebra_known(config: &ExperimentConfig, name: &str) -> bool {
    config.algebras.contains_key(name) || Preset::from_name(name).is_ok()
}

/// Static checks of a parsed config: references resolve, shapes and
/// parameters are valid, output names are unique. Builds nothing.
pub fn check_config(config: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport::new("config");
    let mut fail = |name: String, detail: String| report.push(Check::fail(name, 0.0, vec![], detail));

    for (name, def) in &config.algebras {
        if let AlgebraDef::Preset(p) = def {
            if let Err(e) = Preset::from_name(p) {
                fail(format!("algebras.{name}"), e.to_string());
            }
        }
    }
    for (name, def) in &config.spaces {
        match def {
            SpaceDef::Raster { shape, resolution } => {
                if let Err(e) = shape.validate() {
                    fail(format!("spaces.{name}"), format!("shape of `{name}`: {e}"));
                }
                if !resolution.is_finite() || *resolution <= 0.0 {
                    fail(format!("spaces.{name}"), format!("resolution of `{name}` must be positive"));
                }
            }
            SpaceDef::Sample { raster, strategies } => {
                if !config.spaces.get(raster).is_some_and(SpaceDef::is_raster) {
                    fail(format!("spaces.{name}"), format!("unresolved raster reference `{raster}`"));
                }
                if strategies.is_empty() {
                    fail(format!("spaces.{name}"), "no sampling strategies".into());
                }
            }
            SpaceDef::Line(v) if v.is_empty() => fail(format!("spaces.{name}"), "empty point list".into()),
            SpaceDef::Coords(v) if v.is_empty() => fail(format!("spaces.{name}"), "empty point list".into()),
            SpaceDef::Discrete(0) => fail(format!("spaces.{name}"), "empty point list".into()),
            _ => {}
        }
    }

    let point_space = |s: &str| config.spaces.get(s).is_some_and(|d| !d.is_raster());
    for (name, def) in &config.systems {
        let mut refs: Vec<(&str, &str)> = Vec::new();
        match def {
            SystemDef::Cxe { space, algebra }
            | SystemDef::Lip { space, algebra, .. }
            | SystemDef::Poly { space, algebra, .. }
            | SystemDef::Rational { space, algebra, .. } => {
                refs.push(("space", space));
                refs.push(("algebra", algebra));
            }
            SystemDef::SpanBe { scalar, algebra } => {
                refs.push(("system", scalar));
                refs.push(("algebra", algebra));
            }
            SystemDef::Closure { of } => refs.push(("system", of)),
        }
        for (kind, r) in refs {
            let ok = match kind {
                "space" => point_space(r),
                "algebra" => algebra_known(config, r),
                _ => config.systems.contains_key(r) && r != name,
            };
            if !ok {
                fail(format!("systems.{name}"), format!("unresolved {kind} reference `{r}`"));
            }
        }
        if let SystemDef::Lip { alpha, .. } = def {
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                fail(format!("systems.{name}"), format!("Lipschitz exponent {alpha} outside (0, 1]"));
            }
        }
    }
    if let Some(cycle) = system_cycle(config) {
        fail(format!("systems.{cycle}"), format!("system `{cycle}` depends on itself"));
    }

    for (name, q) in &config.quadruples {
        for (kind, r, ok) in [
            ("space", &q.space, point_space(&q.space)),
            ("algebra", &q.algebra, algebra_known(config, &q.algebra)),
            ("system", &q.scalar, config.systems.contains_key(&q.scalar)),
            ("system", &q.vector, config.systems.contains_key(&q.vector)),
        ] {
            if !ok {
                fail(format!("quadruples.{name}"), format!("unresolved {kind} reference `{r}`"));
            }
        }
    }

    let mut names = BTreeSet::new();
    for (k, cmd) in config.run.iter().enumerate() {
        let label = format!("run[{k}]");
        let target = cmd.target();
        let resolved = match cmd {
            Command::Characters { target, .. } => algebra_known(config, target),
            Command::Validate { target, .. } => {
                algebra_known(config, target)
                    || config.systems.contains_key(target)
                    || config.quadruples.contains_key(target)
                    || config.spaces.contains_key(target)
            }
            Command::Hull { target, .. } => config.spaces.get(target).is_some_and(SpaceDef::is_raster),
            Command::Shilov { target: Some(t), witnesses: None, .. } => {
                config.systems.contains_key(t) || algebra_known(config, t)
            }
            Command::Shilov { target: None, witnesses: Some(w), .. } => {
                let cols = w.values.first().map_or(0, Vec::len);
                if w.values.is_empty() || cols == 0 || w.values.iter().any(|r| r.len() != cols) {
                    fail(label.clone(), "inline witnesses must be a nonempty rectangular matrix".into());
                }
                true
            }
            Command::Shilov { .. } => {
                fail(label.clone(), "shilov needs exactly one of `target` and `witnesses`".into());
                true
            }
            Command::VerifyProduct { target, .. } | Command::VerifyPeaks { target, .. } | Command::Peaker { target, .. } => {
                config.quadruples.contains_key(target)
            }
        };
        if !resolved {
            fail(label.clone(), format!("unresolved {} target `{}`", cmd.keyword(), target.unwrap_or("")));
        }
        if let Some(p) = cmd.certify() {
            if let Err(e) = p.options().validate() {
                fail(label.clone(), e.to_string());
            }
        }
        let stem = cmd.output_name();
        if stem.is_empty() || stem.contains(['/', '\\']) || stem.starts_with('.') {
            fail(label.clone(), format!("invalid output name `{stem}`"));
        } else if !names.insert(stem.clone()) {
            fail(label, format!("duplicate output name `{stem}`"));
        }
    }
    if report.checks.is_empty() {
        report.push(Check::pass("references", 0.0));
    }
    report
}

/// First system found on a dependency cycle.
fn system_cycle(config: &ExperimentConfig) -> Option<String> {
    let deps = |name: &str| -> Vec<String> {
        match config.systems.get(name) {
            Some(SystemDef::SpanBe { scalar, .. }) => vec![scalar.clone()],
            Some(SystemDef::Closure { of }) => vec![of.clone()],
            _ => vec![],
        }
    };
    for start in config.systems.keys() {
        let mut seen = BTreeSet::new();
        let mut current = deps(start);
        while let Some(next) = current.pop() {
            if next == *start {
                return Some(start.clone());
            }
            if seen.insert(next.clone()) {
                current.extend(deps(&next));
            }
        }
    }
    None
}

/// Reads, parses and statically checks a config file. Parse failures become
/// a failed `parse` check carrying the line and column.
pub fn validate_config(path: &std::path::Path) -> Result<ValidationReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(match parse_config(&text) {
        Ok(config) => check_config(&config),
        Err(CliError::Parse { line, column, message }) => {
            let mut report = ValidationReport::new("config");
            report.push(Check::fail("parse", 0.0, vec![line, column], message));
            report
        }
        Err(e) => return Err(e),
    })
}
