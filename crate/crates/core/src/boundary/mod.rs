//! Peak points and Shilov boundaries over finite candidate sets.
//!
//! A [`WitnessFamily`] stores the Gelfand transforms of a finite-dimensional
//! witness span restricted to candidate characters. Peak points are
//! certified by a convex minimax program ([`certify_peak`]); the rest of the
//! module builds Shilov boundary estimates on top of it and checks the
//! product theorems for admissible quadruples.

mod minimax;
mod simplex;
mod theorems;

pub use minimax::{certify_peak, Bounds, CertifyOptions, PeakCertificate, PeakStatus, PreparedFamily};
pub use theorems::{
    is_boundary, shilov_estimate, synthesize_product_peaker, verify_peak_product, verify_product_theorem, BoundaryCheck,
    PeakProductReport, ProductPeaker, ProductTheoremReport, Regime, SetComparison, ShilovEstimate, BOUNDARY_SAMPLES,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::function_algebra::FunctionSystem;
use crate::gelfand;
use crate::linalg::{self, CMat};

/// A candidate character: optionally tagged with the index of a character of
/// the target algebra and of a point of the underlying space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

/// Values `V[φ][j] = ĝ_j(φ)` of witness functions at candidate characters.
///
/// Columns need not be independent: certification works on their span, so
/// radical directions (identically zero columns) are harmless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub label: String,
    pub candidates: Vec<Candidate>,
    #[serde(with = "crate::json::complex_matrix")]
    pub values: Vec<Vec<Complex64>>,
}

impl WitnessFamily {
    pub fn new(label: impl Into<String>, candidates: Vec<Candidate>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if candidates.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: candidates.len(), found: values.len() });
        }
        let cols = values.first().map_or(0, Vec::len);
        if let Some(row) = values.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
        }
        Ok(WitnessFamily { label: label.into(), candidates, values })
    }

    /// Unlabelled candidates `p0, p1, …` for a bare value matrix.
    pub fn from_rows(label: impl Into<String>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let candidates = (0..values.len()).map(|i| Candidate { label: format!("p{i}"), character: None, point: None }).collect();
        WitnessFamily::new(label, candidates, values)
    }

    /// The whole algebra as witnesses over its character space.
    pub fn from_algebra(algebra: &AlgebraSpec) -> Result<Self> {
        let chars = gelfand::characters(algebra)?;
        let candidates =
            chars.iter().enumerate().map(|(p, c)| Candidate { label: c.label.clone(), character: Some(p), point: None }).collect();
        let values = chars.into_iter().map(|c| c.values).collect();
        WitnessFamily::new(format!("{}^", algebra.label()), candidates, values)
    }

    /// The basis of `system` evaluated at `ψ ∘ e_x` for all characters `ψ` of
    /// its target algebra and points `x`, `ψ`-major.
    pub fn from_system(system: &FunctionSystem) -> Result<Self> {
        let chars = gelfand::characters(&system.algebra)?;
        let n = system.space.len();
        let mut candidates = Vec::with_capacity(chars.len() * n);
        let mut values = Vec::with_capacity(chars.len() * n);
        for (p, psi) in chars.iter().enumerate() {
            for x in 0..n {
                let label =
                    if chars.len() == 1 { system.space.points[x].clone() } else { format!("{}@{}", psi.label, system.space.points[x]) };
                candidates.push(Candidate { label, character: Some(p), point: Some(x) });
                values.push(system.basis.iter().map(|t| psi.apply_coords(t.at(x))).collect());
            }
        }
        WitnessFamily::new(format!("{}^", system.algebra.label()), candidates, values)
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.rows(), self.cols(), |i, j| self.values[i][j])
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.matrix(), 1e-10)
    }

    /// `V c`.
    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.values.iter().map(|row| row.iter().zip(coeffs).map(|(v, c)| v * c).sum()).collect()
    }

    /// The family restricted to a subset of witness columns.
    pub fn with_columns(&self, cols: &[usize]) -> WitnessFamily {
        let values = self.values.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        WitnessFamily { label: self.label.clone(), candidates: self.candidates.clone(), values }
    }
}
