//! Decide, diagnose, and visualize whether a weighted composition
//! `f -> F*(f o phi)` preserves the class of analytic functions on the unit
//! disk with positive real part and `f(0) = 1`, and construct the
//! transformation's fixed point by infinite-product iteration.
//!
//! Modules:
//!
//! * [`disk_maps`] — closed-form conformal building blocks (half-plane map,
//!   Cayley inverse, principal powers, lens maps).
//! * [`function_model`] — evaluable expression trees, the polar sampling
//!   grid, and sampled class-membership certificates.
//! * [`expr_dsl`] — text format and parser for expressions.
//! * [`preservation`] — the pointwise admissibility criteria, rotation
//!   sweep, and sufficiency thresholds.
//! * [`boundary`] — innerness scores, Julia-Carathéodory traces, and the
//!   leaf-region geometry.
//! * [`fixed_point`] — rotation classification, contraction factors, and
//!   the infinite-product fixed point.
//!
//! Class membership on an open disk is an open condition; this crate
//! certifies it on finite grids and says so. A violated verdict is
//! conclusive (one bad sample suffices), a holds-on-grid verdict is
//! evidence at the sampled resolution, and every report carries its grid.

pub mod boundary;
pub mod disk_maps;
pub mod expr_dsl;
pub mod fixed_point;
pub mod function_model;
pub mod preservation;

pub use disk_maps::{LensParameter, UnitComplex};
pub use expr_dsl::{format, parse, ParseDiagnostic};
pub use function_model::{
    certify_positive_real, certify_schwarz, evaluate, AnalyticMap, DiskGrid, PositiveRealMap,
    SchwarzMap,
};
pub use preservation::{scan_pair, rotation_test, CriterionReport, SymbolPair, Verdict};
