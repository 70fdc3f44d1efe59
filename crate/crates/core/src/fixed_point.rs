//! Fixed points of admissible weighted composition transformations.
//!
//! When `phi` is not a rotation the transformation `f -> F*(f o phi)` has a
//! unique fixed point, the infinite product `G = prod_k F(phi_k(z))` over
//! the iterates of `phi`. Partial products are evaluated pointwise — iterate
//! the point, multiply the factors — rather than by expanding composition
//! trees; the per-term bound `|1 - F(phi_k(z))| <= (2r/(1-r)) * delta^k`
//! telescopes into the closed-form stopping rule used here, and a residual
//! check on the fixed-point equation guards against bound slack.
//!
//! When `phi` is a rotation the fixed-point set follows a trichotomy
//! (identity / rational / irrational) classified by [`classify_rotation`];
//! [`fixed_point`] refuses rotation symbols.

use crate::function_model::{evaluate, AnalyticMap, EvalError, PositiveRealMap, SchwarzMap};
use crate::preservation::{scan_pair, PreservationError, SymbolPair, Verdict};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};
use thiserror::Error;

/// Default tolerance for recognizing rotations and rational orders.
pub const DEFAULT_ROTATION_TOLERANCE: f64 = 1e-9;

/// Largest rotation order searched before classifying a rotation as
/// irrational at this resolution.
pub const MAX_ROTATION_ORDER: u32 = 720;

/// Boundary samples used when estimating `m(r) = max_{|z|=r} |phi|`.
const CONTRACTION_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum RotationClass {
    NotRotation,
    Identity,
    /// `lambda^order = 1` within tolerance, with the smallest such order >= 2.
    Rational { order: u32, lambda: Complex64 },
    /// No order up to [`MAX_ROTATION_ORDER`] closes the orbit at the given
    /// tolerance.
    IrrationalAtResolution { lambda: Complex64 },
}

impl RotationClass {
    pub fn is_rotation(&self) -> bool {
        !matches!(self, RotationClass::NotRotation)
    }
}

#[derive(Debug, Clone, Error)]
pub enum FixedPointError {
    #[error("phi is a rotation ({0:?}); the fixed-point product requires a non-rotation")]
    Rotation(RotationClass),
    #[error("pair is not admissible on the certificate grid; witness at {witness}")]
    NotAdmissible {
        witness: Complex64,
        min_slack_c: f64,
        min_slack_d: f64,
    },
    #[error("contraction factor {delta} >= 1 at radius {radius}")]
    NotContracting { delta: f64, radius: f64 },
    #[error("tail bound {bound} still above tolerance after n_max = {n_max} terms")]
    TailBoundNotMet { n_max: usize, bound: f64 },
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("fixed point failed verification: {reason}")]
    Postcondition { reason: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pair(#[from] PreservationError),
}

/// Classifies whether `phi` acts as a rotation `z -> lambda*z` on its
/// certificate samples, and if so which kind.
///
/// The candidate `lambda` is read off at the reference point `1/2` and
/// checked against every certificate sample; rational orders are searched
/// up to [`MAX_ROTATION_ORDER`]. Irrationality is not decidable at finite
/// precision, so the last tag is explicitly "at this resolution".
pub fn classify_rotation(phi: &SchwarzMap, tol: f64) -> RotationClass {
    let reference = Complex64::new(0.5, 0.0);
    let at_ref = match phi.eval(reference) {
        Ok(v) => v,
        Err(_) => return RotationClass::NotRotation,
    };
    let lambda_raw = at_ref / reference;
    if (lambda_raw.norm() - 1.0).abs() > tol {
        return RotationClass::NotRotation;
    }
    let lambda = lambda_raw / lambda_raw.norm();
    for z in phi.certificate().grid.points() {
        match phi.eval(z) {
            Ok(v) => {
                if (v - lambda * z).norm() >= tol {
                    return RotationClass::NotRotation;
                }
            }
            Err(_) => return RotationClass::NotRotation,
        }
    }
    if (lambda - Complex64::new(1.0, 0.0)).norm() < tol {
        return RotationClass::Identity;
    }
    let mut power = lambda;
    for order in 2..=MAX_ROTATION_ORDER {
        power *= lambda;
        if (power - Complex64::new(1.0, 0.0)).norm() < tol {
            return RotationClass::Rational { order, lambda };
        }
    }
    RotationClass::IrrationalAtResolution { lambda }
}

/// `m(r)/r` with `m(r)` the sampled maximum of `|phi|` on the circle of
/// radius `r`; below one exactly when `phi` is not a rotation.
pub fn contraction_factor(phi: &SchwarzMap, r: f64) -> Result<f64, FixedPointError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FixedPointError::Domain {
            what: "r",
            value: r,
            domain: "(0, 1)",
        });
    }
    let class = classify_rotation(phi, DEFAULT_ROTATION_TOLERANCE);
    if class.is_rotation() {
        return Err(FixedPointError::Rotation(class));
    }
    contraction_factor_unchecked(phi, r)
}

fn contraction_factor_unchecked(phi: &SchwarzMap, r: f64) -> Result<f64, FixedPointError> {
    let mut m = 0.0f64;
    for k in 0..CONTRACTION_SAMPLES {
        let theta = 2.0 * PI * k as f64 / CONTRACTION_SAMPLES as f64;
        m = m.max(phi.eval(Complex64::from_polar(r, theta))?.norm());
    }
    let delta = m / r;
    if delta >= 1.0 {
        return Err(FixedPointError::NotContracting { delta, radius: r });
    }
    Ok(delta)
}

/// One application of the weighted composition: `F(z) * f(phi(z))`.
pub fn apply_transform(
    f: &PositiveRealMap,
    phi: &SchwarzMap,
    seed: &AnalyticMap,
    z: Complex64,
) -> Result<Complex64, EvalError> {
    let w = phi.eval(z)?;
    Ok(f.eval(z)? * evaluate(seed, w)?)
}

/// The n-th iterate of the transformation applied to `seed`, evaluated at
/// `z` by pointwise iteration: `P_n(z) * seed(phi_n(z))`.
pub fn iterate_transform(
    f: &PositiveRealMap,
    phi: &SchwarzMap,
    seed: &AnalyticMap,
    n: usize,
    z: Complex64,
) -> Result<Complex64, EvalError> {
    let mut product = Complex64::new(1.0, 0.0);
    let mut w = z;
    for _ in 0..n {
        product *= f.eval(w)?;
        w = phi.eval(w)?;
    }
    Ok(product * evaluate(seed, w)?)
}

/// Cached pointwise evaluator of the partial product
/// `P_n(z) = prod_{k<n} F(phi_k(z))`.
///
/// The memo is read-shared/write-exclusive; hitting it is observably
/// identical to recomputation.
#[derive(Debug)]
pub struct ProductEvaluator {
    f: AnalyticMap,
    phi: AnalyticMap,
    n_terms: usize,
    cache: RwLock<HashMap<(u64, u64), Complex64>>,
}

impl ProductEvaluator {
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*hit);
        }
        let mut product = Complex64::new(1.0, 0.0);
        let mut w = z;
        for _ in 0..self.n_terms {
            product *= evaluate(&self.f, w)?;
            w = evaluate(&self.phi, w)?;
        }
        self.cache.write().expect("cache lock").insert(key, product);
        Ok(product)
    }
}

/// A converged fixed-point construction.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointResult {
    #[serde(skip)]
    evaluator: Arc<ProductEvaluator>,
    pub n_terms: usize,
    /// Compact radius on which the tail bound and residual were enforced.
    pub radius: f64,
    /// Contraction factor `m(radius)/radius`.
    pub delta: f64,
    /// `(2r/(1-r)) * delta^n / (1-delta)`, the analytic bound on the
    /// discarded tail.
    pub tail_bound: f64,
    /// Max over samples of `|F(z)*G(phi(z)) - G(z)|`.
    pub residual: f64,
    /// Sample table of `(z, G(z))` pairs.
    pub samples: Vec<FixedPointSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointSample {
    pub z: Complex64,
    pub value: Complex64,
}

impl Clone for ProductEvaluator {
    fn clone(&self) -> Self {
        ProductEvaluator {
            f: self.f.clone(),
            phi: self.phi.clone(),
            n_terms: self.n_terms,
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl FixedPointResult {
    /// Evaluates the limit function `G`. Accuracy is guaranteed on
    /// `|z| <= radius`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.evaluator.eval(z)
    }
}

/// Residual sample rings: quarter radii out to `r`, 64 angles each.
fn residual_samples(r: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for ring in 1..=4 {
        let radius = r * ring as f64 / 4.0;
        for k in 0..64 {
            let theta = 2.0 * PI * k as f64 / 64.0;
            out.push(Complex64::from_polar(radius, theta));
        }
    }
    out
}

/// Constructs the unique fixed point of an admissible, non-rotation pair by
/// infinite-product iteration.
///
/// Stops after `n` terms once the tail bound
/// `(2r/(1-r)) * delta^n / (1-delta)` drops below `tol`, then verifies the
/// fixed-point residual, `G(0) = 1`, and `Re G > 0` on samples of
/// `|z| <= r`. Refuses rotations and pairs whose grid scan is violated —
/// the product is meaningless without the preservation hypothesis.
pub fn fixed_point(
    f: &PositiveRealMap,
    phi: &SchwarzMap,
    r: f64,
    tol: f64,
    n_max: usize,
) -> Result<FixedPointResult, FixedPointError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FixedPointError::Domain {
            what: "r",
            value: r,
            domain: "(0, 1)",
        });
    }
    if tol <= 0.0 {
        return Err(FixedPointError::Domain {
            what: "tol",
            value: tol,
            domain: "(0, ..)",
        });
    }
    let class = classify_rotation(phi, DEFAULT_ROTATION_TOLERANCE);
    if class.is_rotation() {
        return Err(FixedPointError::Rotation(class));
    }
    let pair = SymbolPair::new(f.clone(), phi.clone())?;
    let grid = pair.grid().clone();
    let report = scan_pair(&pair, &grid)?;
    if report.verdict == Verdict::Violated {
        return Err(FixedPointError::NotAdmissible {
            witness: report.witness.expect("violated reports carry a witness"),
            min_slack_c: report.min_slack_c,
            min_slack_d: report.min_slack_d,
        });
    }
    let delta = contraction_factor_unchecked(phi, r)?;

    // smallest n with (2r/(1-r)) * delta^n / (1-delta) < tol
    let prefactor = 2.0 * r / (1.0 - r) / (1.0 - delta);
    let mut n = 0usize;
    let mut tail_bound = prefactor;
    while tail_bound >= tol {
        if n >= n_max {
            return Err(FixedPointError::TailBoundNotMet {
                n_max,
                bound: tail_bound,
            });
        }
        n += 1;
        tail_bound *= delta;
    }

    let evaluator = Arc::new(ProductEvaluator {
        f: f.map().clone(),
        phi: phi.map().clone(),
        n_terms: n,
        cache: RwLock::new(HashMap::new()),
    });

    let mut residual = 0.0f64;
    let mut samples = Vec::new();
    for z in residual_samples(r) {
        let g_z = evaluator.eval(z)?;
        let phi_z = phi.eval(z)?;
        let g_phi = evaluator.eval(phi_z)?;
        let f_z = f.eval(z)?;
        residual = residual.max((f_z * g_phi - g_z).norm());
        if g_z.re <= 0.0 {
            return Err(FixedPointError::Postcondition {
                reason: format!("Re G({z}) = {} <= 0", g_z.re),
            });
        }
        samples.push(FixedPointSample { z, value: g_z });
    }
    let g_zero = evaluator.eval(Complex64::new(0.0, 0.0))?;
    if (g_zero - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(FixedPointError::Postcondition {
            reason: format!("G(0) = {g_zero} differs from 1"),
        });
    }
    if residual > tol {
        return Err(FixedPointError::Postcondition {
            reason: format!("residual {residual} above tolerance {tol}"),
        });
    }

    Ok(FixedPointResult {
        evaluator,
        n_terms: n,
        radius: r,
        delta,
        tail_bound,
        residual,
        samples,
    })
}

/// Whether `f(lambda*z) = f(z)` for `lambda = exp(2*pi*i/n)` at every grid
/// sample, within `1e-10`. Functions of `z^n` are exactly the fixed points
/// of composition with a rational rotation of order `n`.
pub fn nfold_symmetry_check(
    f: &AnalyticMap,
    n: u32,
    grid: &crate::function_model::DiskGrid,
) -> Result<bool, EvalError> {
    let lambda = Complex64::from_polar(1.0, 2.0 * PI / n as f64);
    for z in grid.points() {
        let a = evaluate(f, z)?;
        let b = evaluate(f, lambda * z)?;
        if (a - b).norm() > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}
