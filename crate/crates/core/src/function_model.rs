//! Evaluable expression trees for analytic disk functions, together with
//! sampled class-membership certificates.
//!
//! An [`AnalyticMap`] is an immutable tree; evaluation is pure, so trees can
//! be shared freely across workers. Class membership (Schwarz-type self-map,
//! positive-real-part with unit normalization) is certified by scanning a
//! [`DiskGrid`] — the conditions are open conditions on an open disk, so a
//! certificate records sampled evidence, not a proof. The grid used is kept
//! inside the certificate so reports can state exactly what was checked.

use crate::disk_maps::{
    self, halfplane_map, principal_power, DiskMapError, LensParameter, UnitComplex,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Normalization tolerance for `f(0)` checks and modulus certificates.
pub const CERT_TOLERANCE: f64 = 1e-12;

/// Relative slack allowed on the growth-theorem sandwich (the bound is
/// attained by rotations of the half-plane map, so exact comparisons would
/// reject genuine members on rounding noise).
const GROWTH_RELATIVE_SLACK: f64 = 1e-9;

/// Iterates whose expanded composition tree would exceed this many nodes are
/// represented by a repeated-application node instead.
pub const COMPOSITION_NODE_LIMIT: usize = 10_000;

/// Named closed-form maps usable as expression leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `(1 + lambda*z)/(1 - lambda*z)`
    Halfplane(UnitComplex),
    /// The standard lens map with corner angle `pi*alpha`.
    Lens(LensParameter),
    /// `lambda*z`
    Rotation(UnitComplex),
    /// `factor*z`
    Dilation(f64),
}

/// Immutable expression tree denoting an analytic function on the unit disk.
///
/// Children are reference-counted, so clones and iterate chains share
/// structure. `Compose(f, g)` means `f` after `g`, matching the composition
/// order of `compose(f, g)` in the text format.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticMap {
    Var,
    Const(Complex64),
    Add(Arc<AnalyticMap>, Arc<AnalyticMap>),
    Sub(Arc<AnalyticMap>, Arc<AnalyticMap>),
    Mul(Arc<AnalyticMap>, Arc<AnalyticMap>),
    Div(Arc<AnalyticMap>, Arc<AnalyticMap>),
    /// Principal branch of a real-exponent power of the child.
    Pow(Arc<AnalyticMap>, f64),
    Compose(Arc<AnalyticMap>, Arc<AnalyticMap>),
    /// n-fold self-composition, evaluated by repeated application.
    Iterate(Arc<AnalyticMap>, usize),
    Builtin(Builtin),
}

impl AnalyticMap {
    pub fn var() -> Self {
        AnalyticMap::Var
    }

    pub fn constant(value: Complex64) -> Self {
        AnalyticMap::Const(value)
    }

    pub fn real(value: f64) -> Self {
        AnalyticMap::Const(Complex64::new(value, 0.0))
    }

    /// The half-plane map `l`.
    pub fn halfplane() -> Self {
        AnalyticMap::Builtin(Builtin::Halfplane(UnitComplex::ONE))
    }

    pub fn halfplane_rot(lambda: UnitComplex) -> Self {
        AnalyticMap::Builtin(Builtin::Halfplane(lambda))
    }

    pub fn lens(alpha: LensParameter) -> Self {
        AnalyticMap::Builtin(Builtin::Lens(alpha))
    }

    pub fn rotation(lambda: UnitComplex) -> Self {
        AnalyticMap::Builtin(Builtin::Rotation(lambda))
    }

    pub fn dilation(factor: f64) -> Self {
        AnalyticMap::Builtin(Builtin::Dilation(factor))
    }

    pub fn add(self, rhs: AnalyticMap) -> Self {
        AnalyticMap::Add(Arc::new(self), Arc::new(rhs))
    }

    pub fn sub(self, rhs: AnalyticMap) -> Self {
        AnalyticMap::Sub(Arc::new(self), Arc::new(rhs))
    }

    pub fn mul(self, rhs: AnalyticMap) -> Self {
        AnalyticMap::Mul(Arc::new(self), Arc::new(rhs))
    }

    pub fn div(self, rhs: AnalyticMap) -> Self {
        AnalyticMap::Div(Arc::new(self), Arc::new(rhs))
    }

    pub fn pow(self, exponent: f64) -> Self {
        AnalyticMap::Pow(Arc::new(self), exponent)
    }

    /// `self` after `inner`.
    pub fn compose(self, inner: AnalyticMap) -> Self {
        AnalyticMap::Compose(Arc::new(self), Arc::new(inner))
    }

    /// Number of logical nodes, counting shared subtrees with repetition.
    pub fn node_count(&self) -> usize {
        match self {
            AnalyticMap::Var | AnalyticMap::Const(_) | AnalyticMap::Builtin(_) => 1,
            AnalyticMap::Add(a, b)
            | AnalyticMap::Sub(a, b)
            | AnalyticMap::Mul(a, b)
            | AnalyticMap::Div(a, b)
            | AnalyticMap::Compose(a, b) => 1 + a.node_count() + b.node_count(),
            AnalyticMap::Pow(a, _) => 1 + a.node_count(),
            AnalyticMap::Iterate(a, n) => 1 + n.saturating_mul(a.node_count()),
        }
    }
}

/// Canonical fully parenthesized rendering; builtins render under their
/// text-format names. `expr_dsl::parse` accepts everything this prints.
impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticMap::Var => write!(f, "z"),
            AnalyticMap::Const(c) => write_const(f, *c),
            AnalyticMap::Add(a, b) => write!(f, "({a}+{b})"),
            AnalyticMap::Sub(a, b) => write!(f, "({a}-{b})"),
            AnalyticMap::Mul(a, b) => write!(f, "({a}*{b})"),
            AnalyticMap::Div(a, b) => write!(f, "({a}/{b})"),
            AnalyticMap::Pow(a, e) => write!(f, "({a}^{e})"),
            AnalyticMap::Compose(outer, inner) => match outer.as_ref() {
                AnalyticMap::Builtin(b) => write_builtin_call(f, *b, inner),
                _ => write!(f, "compose({outer},{inner})"),
            },
            AnalyticMap::Iterate(a, n) => write!(f, "iterate({a},{n})"),
            AnalyticMap::Builtin(b) => write_builtin_call(f, *b, &AnalyticMap::Var),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        // parenthesized so a following '^' binds to the constant, not to
        // an unparenthesized unary minus
        if c.re < 0.0 {
            write!(f, "({})", c.re)
        } else {
            write!(f, "{}", c.re)
        }
    } else if c.re == 0.0 && c.im == 1.0 {
        write!(f, "i")
    } else if c.re == 0.0 {
        write!(f, "({}*i)", c.im)
    } else if c.im > 0.0 {
        write!(f, "({}+{}*i)", c.re, c.im)
    } else {
        write!(f, "({}-{}*i)", c.re, -c.im)
    }
}

fn write_builtin_call(
    f: &mut fmt::Formatter<'_>,
    builtin: Builtin,
    arg: &AnalyticMap,
) -> fmt::Result {
    match builtin {
        Builtin::Halfplane(lambda) if lambda == UnitComplex::ONE => write!(f, "l({arg})"),
        Builtin::Halfplane(lambda) => write!(f, "lrot({})({arg})", lambda.turns()),
        Builtin::Lens(alpha) => write!(f, "lens({})({arg})", alpha.alpha()),
        Builtin::Rotation(lambda) => write!(f, "rot({})({arg})", lambda.turns()),
        Builtin::Dilation(factor) => write!(f, "dilate({factor})({arg})"),
    }
}

#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error("evaluation point {z} lies outside the closed unit disk")]
    OutsideDisk { z: Complex64 },
    #[error("pole of {subexpr} at {at}")]
    Pole { subexpr: String, at: Complex64 },
    #[error("domain error in {subexpr} at {at}: {reason}")]
    Domain {
        subexpr: String,
        at: Complex64,
        reason: String,
    },
}

impl EvalError {
    fn from_disk_map(err: DiskMapError, subexpr: &AnalyticMap, at: Complex64) -> Self {
        match err {
            DiskMapError::Pole { .. } => EvalError::Pole {
                subexpr: subexpr.to_string(),
                at,
            },
            other => EvalError::Domain {
                subexpr: subexpr.to_string(),
                at,
                reason: other.to_string(),
            },
        }
    }
}

/// Evaluates `f` at `z`, `|z| <= 1`.
///
/// Boundary points are allowed as long as no pole is hit; compose nodes
/// evaluate the inner expression first.
pub fn evaluate(f: &AnalyticMap, z: Complex64) -> Result<Complex64, EvalError> {
    if z.norm() > 1.0 + CERT_TOLERANCE {
        return Err(EvalError::OutsideDisk { z });
    }
    eval_at(f, z)
}

fn eval_at(f: &AnalyticMap, z: Complex64) -> Result<Complex64, EvalError> {
    match f {
        AnalyticMap::Var => Ok(z),
        AnalyticMap::Const(c) => Ok(*c),
        AnalyticMap::Add(a, b) => Ok(eval_at(a, z)? + eval_at(b, z)?),
        AnalyticMap::Sub(a, b) => Ok(eval_at(a, z)? - eval_at(b, z)?),
        AnalyticMap::Mul(a, b) => Ok(eval_at(a, z)? * eval_at(b, z)?),
        AnalyticMap::Div(a, b) => {
            let denom = eval_at(b, z)?;
            if denom.norm_sqr() == 0.0 {
                return Err(EvalError::Pole {
                    subexpr: f.to_string(),
                    at: z,
                });
            }
            Ok(eval_at(a, z)? / denom)
        }
        AnalyticMap::Pow(a, e) => {
            let base = eval_at(a, z)?;
            if base.re == 0.0 && base.im == 0.0 && *e > 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            principal_power(base, *e).map_err(|err| EvalError::from_disk_map(err, f, z))
        }
        AnalyticMap::Compose(outer, inner) => {
            let w = eval_at(inner, z)?;
            eval_at(outer, w)
        }
        AnalyticMap::Iterate(a, n) => {
            let mut w = z;
            for _ in 0..*n {
                w = eval_at(a, w)?;
            }
            Ok(w)
        }
        AnalyticMap::Builtin(b) => match b {
            Builtin::Halfplane(lambda) => {
                halfplane_map(z, *lambda).map_err(|err| EvalError::from_disk_map(err, f, z))
            }
            Builtin::Lens(alpha) => {
                disk_maps::lens_map(z, *alpha).map_err(|err| EvalError::from_disk_map(err, f, z))
            }
            Builtin::Rotation(lambda) => Ok(lambda.value() * z),
            Builtin::Dilation(factor) => Ok(factor * z),
        },
    }
}

#[derive(Debug, Clone, Error)]
pub enum GridError {
    #[error("r_max = {0} must lie in (0, 1)")]
    BadRadius(f64),
    #[error("grid needs at least one radius step and one angle")]
    Empty,
}

/// Polar sampling lattice with boundary-refined radii.
///
/// Radii follow `r_j = 1 - 2^(-j/4)` (geometric refinement toward the unit
/// circle), truncated below `r_max` and closed off with `r_max` itself.
/// Angles are `n_angles` equally spaced values in `[0, 2*pi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGrid {
    radii: Vec<f64>,
    n_angles: usize,
    r_max: f64,
}

impl DiskGrid {
    /// Default grid: 40 refinement steps, 64 angles, `r_max = 1 - 2^-10`.
    pub fn default_grid() -> Self {
        Self::new(40, 64, 1.0 - (2.0f64).powi(-10)).expect("default grid parameters are valid")
    }

    pub fn new(j_steps: usize, n_angles: usize, r_max: f64) -> Result<Self, GridError> {
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(GridError::BadRadius(r_max));
        }
        if j_steps == 0 || n_angles == 0 {
            return Err(GridError::Empty);
        }
        let mut radii = Vec::with_capacity(j_steps + 1);
        for j in 0..j_steps {
            let r = 1.0 - (2.0f64).powf(-(j as f64) / 4.0);
            if r < r_max {
                radii.push(r);
            }
        }
        radii.push(r_max);
        Ok(DiskGrid {
            radii,
            n_angles,
            r_max,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.radii.len() * self.n_angles
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.n_angles;
        (0..m).map(move |k| 2.0 * PI * k as f64 / m as f64)
    }

    /// Sample points in radius-major order.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_points());
        for &r in &self.radii {
            for theta in self.angles() {
                out.push(Complex64::from_polar(r, theta));
            }
        }
        out
    }
}

/// Sampled evidence recorded when a Schwarz-type certificate is issued.
#[derive(Debug, Clone, Serialize)]
pub struct SchwarzCertificate {
    pub grid: DiskGrid,
    pub value_at_zero: Complex64,
    pub max_modulus: f64,
}

/// Sampled evidence recorded when a positive-real certificate is issued.
#[derive(Debug, Clone, Serialize)]
pub struct PositiveRealCertificate {
    pub grid: DiskGrid,
    pub value_at_zero: Complex64,
    pub min_real_part: f64,
    pub max_omega_modulus: f64,
}

#[derive(Debug, Clone, Error)]
pub enum CertificationError {
    #[error("not normalized at the origin: f(0) = {value}, expected {expected}")]
    NotNormalized { value: Complex64, expected: Complex64 },
    #[error("|f({witness})| = {modulus} >= 1")]
    ModulusViolation { witness: Complex64, modulus: f64 },
    #[error("Schwarz bound violated: |f({witness})| = {modulus} > |z| = {radius}")]
    SchwarzBound {
        witness: Complex64,
        modulus: f64,
        radius: f64,
    },
    #[error("Re f({witness}) = {real_part} <= 0")]
    NotPositiveReal { witness: Complex64, real_part: f64 },
    #[error("growth bound violated at {witness}: |f| = {modulus} outside [{lower}, {upper}]")]
    GrowthBound {
        witness: Complex64,
        modulus: f64,
        lower: f64,
        upper: f64,
    },
    #[error("evaluation failed at {at}: {source}")]
    Eval {
        at: Complex64,
        #[source]
        source: EvalError,
    },
}

/// An [`AnalyticMap`] certified (by sampling) to be a Schwarz-type function:
/// `f(0) = 0`, `|f| < 1`, and the Schwarz bound `|f(z)| <= |z|` at every
/// certificate sample.
#[derive(Debug, Clone)]
pub struct SchwarzMap {
    map: AnalyticMap,
    certificate: SchwarzCertificate,
}

impl SchwarzMap {
    pub fn map(&self) -> &AnalyticMap {
        &self.map
    }

    pub fn certificate(&self) -> &SchwarzCertificate {
        &self.certificate
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        evaluate(&self.map, z)
    }
}

/// An [`AnalyticMap`] certified (by sampling) to have positive real part and
/// `f(0) = 1`, together with its Schwarz factor `omega = (f-1)/(f+1)`.
#[derive(Debug, Clone)]
pub struct PositiveRealMap {
    f: AnalyticMap,
    omega: AnalyticMap,
    certificate: PositiveRealCertificate,
}

impl PositiveRealMap {
    pub fn map(&self) -> &AnalyticMap {
        &self.f
    }

    /// The Schwarz factor for which `f = l(omega)`.
    pub fn omega(&self) -> &AnalyticMap {
        &self.omega
    }

    pub fn certificate(&self) -> &PositiveRealCertificate {
        &self.certificate
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        evaluate(&self.f, z)
    }
}

fn scan_grid<T: Send>(
    grid: &DiskGrid,
    per_point: impl Fn(Complex64) -> Result<T, CertificationError> + Sync,
) -> Result<Vec<T>, CertificationError> {
    let points = grid.points();
    let results: Vec<Result<T, CertificationError>> =
        points.par_iter().map(|&z| per_point(z)).collect();
    // sequential fold keeps the first failure (in grid order) deterministic
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

/// Certifies `f` as a Schwarz-type function on `grid`.
///
/// Rejections carry the witness sample. A certificate is sampled evidence
/// for the open conditions, not a proof.
pub fn certify_schwarz(f: &AnalyticMap, grid: &DiskGrid) -> Result<SchwarzMap, CertificationError> {
    let zero = Complex64::new(0.0, 0.0);
    let at_zero = evaluate(f, zero).map_err(|source| CertificationError::Eval { at: zero, source })?;
    if at_zero.norm() > CERT_TOLERANCE {
        return Err(CertificationError::NotNormalized {
            value: at_zero,
            expected: zero,
        });
    }
    let moduli = scan_grid(grid, |z| {
        let v = evaluate(f, z).map_err(|source| CertificationError::Eval { at: z, source })?;
        let modulus = v.norm();
        if modulus >= 1.0 {
            return Err(CertificationError::ModulusViolation {
                witness: z,
                modulus,
            });
        }
        let radius = z.norm();
        if modulus > radius + CERT_TOLERANCE {
            return Err(CertificationError::SchwarzBound {
                witness: z,
                modulus,
                radius,
            });
        }
        Ok(modulus)
    })?;
    let max_modulus = moduli.into_iter().fold(0.0f64, f64::max);
    Ok(SchwarzMap {
        map: f.clone(),
        certificate: SchwarzCertificate {
            grid: grid.clone(),
            value_at_zero: at_zero,
            max_modulus,
        },
    })
}

/// Certifies `f` as a normalized positive-real-part function on `grid` and
/// pairs it with its Schwarz factor `omega = (f-1)/(f+1)`.
///
/// Checks `f(0) = 1`, `Re f > 0`, the growth sandwich
/// `(1-|z|)/(1+|z|) <= |f(z)| <= (1+|z|)/(1-|z|)`, and Schwarz admissibility
/// of `omega` at every sample.
pub fn certify_positive_real(
    f: &AnalyticMap,
    grid: &DiskGrid,
) -> Result<PositiveRealMap, CertificationError> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let at_zero = evaluate(f, zero).map_err(|source| CertificationError::Eval { at: zero, source })?;
    if (at_zero - one).norm() > CERT_TOLERANCE {
        return Err(CertificationError::NotNormalized {
            value: at_zero,
            expected: one,
        });
    }
    let stats = scan_grid(grid, |z| {
        let v = evaluate(f, z).map_err(|source| CertificationError::Eval { at: z, source })?;
        if v.re <= 0.0 {
            return Err(CertificationError::NotPositiveReal {
                witness: z,
                real_part: v.re,
            });
        }
        let r = z.norm();
        let lower = (1.0 - r) / (1.0 + r);
        let upper = (1.0 + r) / (1.0 - r);
        let modulus = v.norm();
        if modulus < lower * (1.0 - GROWTH_RELATIVE_SLACK) - CERT_TOLERANCE
            || modulus > upper * (1.0 + GROWTH_RELATIVE_SLACK) + CERT_TOLERANCE
        {
            return Err(CertificationError::GrowthBound {
                witness: z,
                modulus,
                lower,
                upper,
            });
        }
        let omega = (v - one) / (v + one);
        let om = omega.norm();
        if om >= 1.0 {
            return Err(CertificationError::ModulusViolation {
                witness: z,
                modulus: om,
            });
        }
        if om > r + CERT_TOLERANCE {
            return Err(CertificationError::SchwarzBound {
                witness: z,
                modulus: om,
                radius: r,
            });
        }
        Ok((v.re, om))
    })?;
    let min_real_part = stats.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let max_omega_modulus = stats.iter().map(|s| s.1).fold(0.0f64, f64::max);
    let omega = f
        .clone()
        .sub(AnalyticMap::real(1.0))
        .div(f.clone().add(AnalyticMap::real(1.0)));
    Ok(PositiveRealMap {
        f: f.clone(),
        omega,
        certificate: PositiveRealCertificate {
            grid: grid.clone(),
            value_at_zero: at_zero,
            min_real_part,
            max_omega_modulus,
        },
    })
}

/// The n-fold composite of `phi` as an expression; `iterate(phi, 0)` is the
/// identity.
///
/// When the expanded tree would exceed [`COMPOSITION_NODE_LIMIT`] logical
/// nodes the result is a repeated-application node with identical observable
/// behavior.
pub fn iterate(phi: &SchwarzMap, n: usize) -> AnalyticMap {
    if n == 0 {
        return AnalyticMap::Var;
    }
    let base = phi.map().clone();
    let size = base.node_count();
    if n.saturating_mul(size).saturating_add(n) > COMPOSITION_NODE_LIMIT {
        return AnalyticMap::Iterate(Arc::new(base), n);
    }
    let shared = Arc::new(base);
    let mut acc = AnalyticMap::clone(&shared);
    for _ in 1..n {
        acc = AnalyticMap::Compose(Arc::new(acc), Arc::clone(&shared));
    }
    acc
}

/// Maximum of `|f|` over `n_samples` equally spaced points on the circle of
/// radius `r`. By the maximum modulus principle this is nondecreasing in `r`
/// for analytic `f`.
pub fn sup_norm_estimate(
    f: &AnalyticMap,
    n_samples: usize,
    r: f64,
) -> Result<f64, EvalError> {
    let mut max = 0.0f64;
    for k in 0..n_samples {
        let theta = 2.0 * PI * k as f64 / n_samples as f64;
        let v = evaluate(f, Complex64::from_polar(r, theta))?;
        max = max.max(v.norm());
    }
    Ok(max)
}

/// Default sampling radius for sup-norm estimation.
pub const DEFAULT_SUP_RADIUS: f64 = 1.0 - 1e-6;
