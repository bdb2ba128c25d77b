//! Computational Gelfand theory for finite-dimensional commutative unital
//! algebras and for `E`-valued function algebras on finite spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: algebras presented by structure constants, with a weighted
//!   ℓ¹ coordinate norm.
//! * [`gelfand`]: characters, Gelfand transforms, radicals and semisimple
//!   quotients.
//! * [`spaces`]: finite (metric) spaces and rasterised plane regions with
//!   polynomial hulls.
//! * [`function_algebra`]: `E`-valued function systems, the standard
//!   constructors, admissible quadruples and the associated map π.
//! * [`boundary`]: peak-point certification by convex minimax programming,
//!   Shilov boundary estimates and the product theorems.

// NaN-rejecting checks are written as negated comparisons; dense numeric
// kernels index several arrays in lockstep.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod boundary;
pub mod error;
pub mod function_algebra;
pub mod gelfand;
pub mod json;
pub mod linalg;
pub mod report;
pub mod spaces;

pub use algebra::{AlgebraSpec, Element, Preset};
pub use boundary::{
    certify_peak, is_boundary, shilov_estimate, synthesize_product_peaker, verify_peak_product, verify_product_theorem,
    BoundaryCheck, Bounds, Candidate, CertifyOptions, PeakCertificate, PeakProductReport, PeakStatus, ProductPeaker,
    ProductTheoremReport, Regime, SetComparison, ShilovEstimate, WitnessFamily,
};
pub use error::{Error, Result};
pub use gelfand::{Character, CharacterSpace};
pub use num_complex::Complex64;
pub use function_algebra::{FunctionSystem, Membership, NormTag, Quadruple, ValueTable};
pub use spaces::{FiniteSpace, RasterRegion, SampleStrategy, Shape};
pub use report::{Check, ValidationReport};
