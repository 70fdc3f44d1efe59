//! Pointwise and global tests for whether the weighted composition
//! `f -> F*(f o phi)` preserves the class of normalized positive-real-part
//! functions.
//!
//! Two equivalent pointwise criteria are implemented. With
//! `omega = (F-1)/(F+1)`:
//!
//! * [`slack_c`]: `(1-|omega|^2)(1-|phi|^2) - 4|phi||Im omega| > 0`, and
//! * [`slack_d`]: `arctan((1-|phi|^2)/(2|phi|)) - |arg F| > 0`,
//!
//! plus the rotation sweep [`rotation_test`], which checks that the Möbius
//! combination `(lambda*phi + omega)/(1 + lambda*phi*omega)` stays inside
//! the unit disk for unimodular `lambda`. It suffices to test the rotations
//! of the half-plane map, so the sweep is a necessary-condition check at
//! finite lambda resolution; [`scan_pair`] is the effective decision
//! procedure.
//!
//! Verdicts are "holds on grid": one bad sample is conclusive for
//! violation, while a passing scan is sampled evidence, not a proof. The
//! grid travels with every report.

use crate::disk_maps::{principal_arg, LensParameter, UnitComplex};
use crate::function_model::{evaluate, DiskGrid, EvalError, PositiveRealMap, SchwarzMap};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Samples with slack below `-VERDICT_TIE_TOLERANCE` count as violations;
/// anything in the tie band is classified holds-on-grid with the
/// boundary-case flag set.
pub const VERDICT_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum PreservationError {
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("Re F = {re} <= 0 at a sampled point; F leaves the right half-plane")]
    NotPositiveReal { re: f64 },
    #[error("rotation formula pole: 1 + lambda*phi*omega = 0")]
    RotationPole,
    #[error("evaluation failed at grid point {at}: {source}")]
    Scan {
        at: Complex64,
        #[source]
        source: EvalError,
    },
    #[error("certificates use incompatible grids")]
    IncompatibleGrids,
}

/// Slack of the modulus-form criterion at one point:
/// `(1-|omega|^2)(1-|phi|^2) - 4|phi||Im omega|`.
///
/// The pair is pointwise admissible iff the result is positive.
pub fn slack_c(phi_z: Complex64, omega_z: Complex64) -> Result<f64, PreservationError> {
    let ap = phi_z.norm();
    let ao = omega_z.norm();
    if ap >= 1.0 {
        return Err(PreservationError::Domain {
            what: "|phi(z)|",
            value: ap,
            domain: "[0, 1)",
        });
    }
    if ao >= 1.0 {
        return Err(PreservationError::Domain {
            what: "|omega(z)|",
            value: ao,
            domain: "[0, 1)",
        });
    }
    Ok((1.0 - ao * ao) * (1.0 - ap * ap) - 4.0 * ap * omega_z.im.abs())
}

/// Slack of the argument-form criterion at one point, in radians:
/// `arctan((1-|phi|^2)/(2|phi|)) - |arg F|`.
///
/// The arctan form avoids the cancellation of `pi/2 - arcsin` near
/// `|phi| -> 0`; at `phi = 0` the first term is exactly `pi/2`.
pub fn slack_d(f_z: Complex64, phi_z: Complex64) -> Result<f64, PreservationError> {
    if f_z.re <= 0.0 {
        return Err(PreservationError::NotPositiveReal { re: f_z.re });
    }
    let ap = phi_z.norm();
    if ap >= 1.0 {
        return Err(PreservationError::Domain {
            what: "|phi(z)|",
            value: ap,
            domain: "[0, 1)",
        });
    }
    let cap = if ap == 0.0 {
        FRAC_PI_2
    } else {
        ((1.0 - ap * ap) / (2.0 * ap)).atan()
    };
    let arg = principal_arg(f_z).expect("nonzero: Re f_z > 0");
    Ok(cap - arg.abs())
}

/// The Schwarz factor of `F*(l_lambda o phi)`:
/// `(lambda*phi + omega)/(1 + lambda*phi*omega)`.
///
/// The rotation condition holds at this point and this `lambda` iff the
/// result has modulus below one.
pub fn omega_lambda(
    lambda: UnitComplex,
    phi_z: Complex64,
    omega_z: Complex64,
) -> Result<Complex64, PreservationError> {
    let lp = lambda.value() * phi_z;
    let denom = Complex64::new(1.0, 0.0) + lp * omega_z;
    if denom.norm_sqr() == 0.0 {
        return Err(PreservationError::RotationPole);
    }
    Ok((lp + omega_z) / denom)
}

/// A certified symbol pair `(F, phi)`.
#[derive(Debug, Clone)]
pub struct SymbolPair {
    f: PositiveRealMap,
    phi: SchwarzMap,
}

impl SymbolPair {
    /// Pairs the symbols, requiring their certificates to share a grid.
    pub fn new(f: PositiveRealMap, phi: SchwarzMap) -> Result<Self, PreservationError> {
        if f.certificate().grid != phi.certificate().grid {
            return Err(PreservationError::IncompatibleGrids);
        }
        Ok(SymbolPair { f, phi })
    }

    pub fn f(&self) -> &PositiveRealMap {
        &self.f
    }

    pub fn phi(&self) -> &SchwarzMap {
        &self.phi
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.phi.certificate().grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnGrid,
    Violated,
}

/// Result of a grid scan of both pointwise criteria.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub verdict: Verdict,
    /// Some sampled slack fell inside the `±1e-12` tie band.
    pub boundary_case: bool,
    /// Minimum of the modulus-form slack over the grid (dimensionless).
    pub min_slack_c: f64,
    pub argmin_c: Complex64,
    /// Minimum of the argument-form slack over the grid (radians).
    pub min_slack_d: f64,
    pub argmin_d: Complex64,
    /// Maxima, completing the per-sample extrema summary.
    pub max_slack_c: f64,
    pub max_slack_d: f64,
    /// Present iff violated; the argmin of the modulus-form slack.
    pub witness: Option<Complex64>,
    pub grid: DiskGrid,
    pub n_points: usize,
}

/// Evaluates both pointwise slacks at every grid point, using the default
/// tie band of [`VERDICT_TIE_TOLERANCE`].
///
/// Verdict is holds-on-grid iff both slacks stay above the tie band
/// everywhere; a violated verdict is conclusive, a holds verdict is
/// evidence on the sampled grid.
pub fn scan_pair(pair: &SymbolPair, grid: &DiskGrid) -> Result<CriterionReport, PreservationError> {
    scan_pair_with_tolerance(pair, grid, VERDICT_TIE_TOLERANCE)
}

/// [`scan_pair`] with an explicit tie tolerance.
pub fn scan_pair_with_tolerance(
    pair: &SymbolPair,
    grid: &DiskGrid,
    tie_tol: f64,
) -> Result<CriterionReport, PreservationError> {
    let points = grid.points();
    let one = Complex64::new(1.0, 0.0);
    let f_expr = pair.f().map();
    let phi_expr = pair.phi().map();
    let per_point: Vec<Result<(f64, f64), PreservationError>> = points
        .par_iter()
        .map(|&z| {
            let f_z = evaluate(f_expr, z).map_err(|source| PreservationError::Scan { at: z, source })?;
            let phi_z =
                evaluate(phi_expr, z).map_err(|source| PreservationError::Scan { at: z, source })?;
            let omega_z = (f_z - one) / (f_z + one);
            Ok((slack_c(phi_z, omega_z)?, slack_d(f_z, phi_z)?))
        })
        .collect();

    let mut min_c = f64::INFINITY;
    let mut min_d = f64::INFINITY;
    let mut max_c = f64::NEG_INFINITY;
    let mut max_d = f64::NEG_INFINITY;
    let mut argmin_c = Complex64::new(0.0, 0.0);
    let mut argmin_d = Complex64::new(0.0, 0.0);
    for (z, res) in points.iter().zip(per_point) {
        let (sc, sd) = res?;
        if sc < min_c {
            min_c = sc;
            argmin_c = *z;
        }
        if sd < min_d {
            min_d = sd;
            argmin_d = *z;
        }
        max_c = max_c.max(sc);
        max_d = max_d.max(sd);
    }

    let violated = min_c < -tie_tol || min_d < -tie_tol;
    let boundary_case = !violated && (min_c <= tie_tol || min_d <= tie_tol);
    Ok(CriterionReport {
        verdict: if violated {
            Verdict::Violated
        } else {
            Verdict::HoldsOnGrid
        },
        boundary_case,
        min_slack_c: min_c,
        argmin_c,
        min_slack_d: min_d,
        argmin_d,
        max_slack_c: max_c,
        max_slack_d: max_d,
        witness: if violated {
            Some(if min_c <= min_d { argmin_c } else { argmin_d })
        } else {
            None
        },
        grid: grid.clone(),
        n_points: points.len(),
    })
}

/// Result of the rotation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RotationReport {
    pub verdict: Verdict,
    pub boundary_case: bool,
    /// Largest `|omega_lambda|` seen over all sampled `(lambda, z)`.
    pub worst_modulus: f64,
    pub witness_lambda: UnitComplex,
    pub witness_point: Complex64,
    pub n_lambda: usize,
    pub grid: DiskGrid,
}

/// Sweeps `n_lambda` equally spaced rotations, checking
/// `|omega_lambda| < 1` at every grid point.
///
/// Equivalent to [`scan_pair`] in the limit of dense lambda sampling; at
/// finite resolution it is a necessary-condition check.
pub fn rotation_test(
    pair: &SymbolPair,
    grid: &DiskGrid,
    n_lambda: usize,
) -> Result<RotationReport, PreservationError> {
    rotation_test_with_tolerance(pair, grid, n_lambda, VERDICT_TIE_TOLERANCE)
}

/// [`rotation_test`] with an explicit tie tolerance.
pub fn rotation_test_with_tolerance(
    pair: &SymbolPair,
    grid: &DiskGrid,
    n_lambda: usize,
    tie_tol: f64,
) -> Result<RotationReport, PreservationError> {
    if n_lambda == 0 {
        return Err(PreservationError::Domain {
            what: "n_lambda",
            value: 0.0,
            domain: "[1, ..)",
        });
    }
    let lambdas: Vec<UnitComplex> = (0..n_lambda)
        .map(|j| UnitComplex::from_turns(j as f64 / n_lambda as f64))
        .collect();
    let points = grid.points();
    let one = Complex64::new(1.0, 0.0);
    let f_expr = pair.f().map();
    let phi_expr = pair.phi().map();
    let per_point: Vec<Result<(f64, usize), PreservationError>> = points
        .par_iter()
        .map(|&z| {
            let f_z = evaluate(f_expr, z).map_err(|source| PreservationError::Scan { at: z, source })?;
            let phi_z =
                evaluate(phi_expr, z).map_err(|source| PreservationError::Scan { at: z, source })?;
            let omega_z = (f_z - one) / (f_z + one);
            let mut worst = f64::NEG_INFINITY;
            let mut worst_j = 0;
            for (j, lambda) in lambdas.iter().enumerate() {
                let m = omega_lambda(*lambda, phi_z, omega_z)?.norm();
                if m > worst {
                    worst = m;
                    worst_j = j;
                }
            }
            Ok((worst, worst_j))
        })
        .collect();

    let mut worst = f64::NEG_INFINITY;
    let mut witness_point = Complex64::new(0.0, 0.0);
    let mut witness_j = 0;
    for (z, res) in points.iter().zip(per_point) {
        let (m, j) = res?;
        if m > worst {
            worst = m;
            witness_point = *z;
            witness_j = j;
        }
    }
    let violated = worst > 1.0 + tie_tol;
    let boundary_case = !violated && worst >= 1.0 - tie_tol;
    Ok(RotationReport {
        verdict: if violated {
            Verdict::Violated
        } else {
            Verdict::HoldsOnGrid
        },
        boundary_case,
        worst_modulus: worst,
        witness_lambda: lambdas[witness_j],
        witness_point,
        n_lambda,
        grid: grid.clone(),
    })
}

/// Largest argument bound that keeps every `phi` with sup-norm `R`
/// admissible: `pi/2 - arcsin(2R/(1+R^2))`.
pub fn sector_sufficient(r: f64) -> Result<f64, PreservationError> {
    if !(0.0..1.0).contains(&r) {
        return Err(PreservationError::Domain {
            what: "R",
            value: r,
            domain: "[0, 1)",
        });
    }
    Ok(FRAC_PI_2 - (2.0 * r / (1.0 + r * r)).asin())
}

/// Largest sup-norm of `phi` that keeps any `F` with `sup|arg F| <= K`
/// admissible: `(1-R)/(1+R)` with `R = tan(K/2)`.
///
/// `R = tan(K/2)` is the closed-form inverse of `sin K = 2R/(1+R^2)` on
/// `[0, 1)`.
pub fn argbound_sufficient(k: f64) -> Result<f64, PreservationError> {
    if !(0.0..FRAC_PI_2).contains(&k) {
        return Err(PreservationError::Domain {
            what: "K",
            value: k,
            domain: "[0, pi/2)",
        });
    }
    let r = (k / 2.0).tan();
    Ok((1.0 - r) / (1.0 + r))
}

/// Largest sup-norm of `phi` that pairs with any `F = l(omega)` whose
/// Schwarz factor satisfies `sup|omega| <= omega_sup`:
/// `(1-omega_sup)/(1+omega_sup)`.
pub fn omega_norm_sufficient(omega_sup: f64) -> Result<f64, PreservationError> {
    if !(0.0..1.0).contains(&omega_sup) {
        return Err(PreservationError::Domain {
            what: "omega_sup",
            value: omega_sup,
            domain: "[0, 1)",
        });
    }
    Ok((1.0 - omega_sup) / (1.0 + omega_sup))
}

/// Sup-norm threshold for `phi` when `F` is the half-plane map composed
/// with the lens map of parameter `alpha`; admissibility holds iff
/// `sup|phi|` is at most this value.
pub fn lens_threshold(alpha: LensParameter) -> f64 {
    argbound_sufficient(alpha.alpha() * FRAC_PI_2)
        .expect("alpha in (0,1) puts K in (0, pi/2)")
}

/// Runs [`scan_pair`] with `phi` the identity map.
///
/// Multiplication alone cannot preserve the class unless `F` is constant
/// one, so for `F != 1` this produces a violation witness as the grid
/// refines; for `F = 1` it confirms admissibility.
pub fn multiplier_rigidity_witness(
    f: &PositiveRealMap,
    grid: &DiskGrid,
) -> Result<CriterionReport, PreservationError> {
    let identity = crate::function_model::certify_schwarz(&crate::function_model::AnalyticMap::var(), grid)
        .expect("the identity map is Schwarz-type");
    let pair = SymbolPair {
        f: f.clone(),
        phi: identity,
    };
    scan_pair(&pair, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::{certify_positive_real, certify_schwarz, AnalyticMap};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn slack_c_values() {
        // real omega branch is always positive
        let s = slack_c(c(0.7, 0.0), c(0.3, 0.0)).unwrap();
        assert!((s - (1.0 - 0.09) * (1.0 - 0.49)).abs() < 1e-15);
        // direct arithmetic of the modulus form
        let s = slack_c(c(0.5, 0.0), c(0.0, 0.5)).unwrap();
        assert!((s - (-0.4375)).abs() < 1e-15);
        // phi = 0
        let s = slack_c(c(0.0, 0.0), c(0.2, 0.3)).unwrap();
        assert!((s - (1.0 - 0.13)).abs() < 1e-15);
        assert!(slack_c(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn slack_d_values() {
        // arg F = 0
        let s = slack_d(c(1.0, 0.0), c(0.3, 0.0)).unwrap();
        assert!((s - ((1.0 - 0.09f64) / 0.6).atan()).abs() < 1e-15);
        // closed-form boundary: arg F = pi/4 with |phi| = sqrt(2)-1
        let r = 2f64.sqrt() - 1.0;
        let f = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let s = slack_d(f, c(r, 0.0)).unwrap();
        assert!(s.abs() < 1e-14, "boundary of admissibility, slack = {s}");
        // phi = 0 is always admissible
        let s = slack_d(c(1.0, 1000.0), c(0.0, 0.0)).unwrap();
        assert!(s > 0.0);
        assert!(slack_d(c(-0.1, 1.0), c(0.3, 0.0)).is_err());
    }

    #[test]
    fn omega_lambda_values() {
        let lam = UnitComplex::from_turns(0.37);
        let v = omega_lambda(lam, c(0.0, 0.0), c(0.2, 0.3)).unwrap();
        assert!((v - c(0.2, 0.3)).norm() < 1e-15);
        let v = omega_lambda(UnitComplex::ONE, c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        // slack_c < 0 at (0.5, 0.5i) forces |omega_lambda| >= 1 for some sampled lambda
        let mut worst = 0.0f64;
        for j in 0..360 {
            let lam = UnitComplex::from_turns(j as f64 / 360.0);
            worst = worst.max(omega_lambda(lam, c(0.5, 0.0), c(0.0, 0.5)).unwrap().norm());
        }
        assert!(worst >= 1.0, "worst modulus {worst}");
    }

    #[test]
    fn scan_pair_constant_f() {
        let grid = DiskGrid::default_grid();
        let f = certify_positive_real(&AnalyticMap::real(1.0), &grid).unwrap();
        let phi = certify_schwarz(&AnalyticMap::var().mul(AnalyticMap::var()), &grid).unwrap();
        let pair = SymbolPair::new(f, phi).unwrap();
        let report = scan_pair(&pair, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::HoldsOnGrid);
        assert!(report.witness.is_none());
        // min slack_c = min over grid of (1-|phi|^2)
        let rmax = grid.r_max();
        let expected = 1.0 - rmax.powi(4);
        assert!((report.min_slack_c - expected).abs() < 1e-12);
    }

    #[test]
    fn scan_pair_example1_threshold_sides() {
        let grid = DiskGrid::default_grid();
        let phi_expr = AnalyticMap::var().div(AnalyticMap::real(3.0));
        let phi = certify_schwarz(&phi_expr, &grid).unwrap();
        for (eps, expect) in [(0.3, Verdict::HoldsOnGrid), (0.7, Verdict::Violated)] {
            let f_expr = AnalyticMap::halfplane().pow(eps);
            let f = certify_positive_real(&f_expr, &grid).unwrap();
            let pair = SymbolPair::new(f, phi.clone()).unwrap();
            let report = scan_pair(&pair, &grid).unwrap();
            assert_eq!(report.verdict, expect, "eps = {eps}");
            assert_eq!(report.witness.is_some(), expect == Verdict::Violated);
        }
    }

    #[test]
    fn rotation_test_agrees_on_known_pairs() {
        let grid = DiskGrid::default_grid();
        // admissible: F = l(z/4), phi = z/2
        let f_expr = AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0)));
        let f = certify_positive_real(&f_expr, &grid).unwrap();
        let phi = certify_schwarz(&AnalyticMap::dilation(0.5), &grid).unwrap();
        let pair = SymbolPair::new(f.clone(), phi).unwrap();
        let scan = scan_pair(&pair, &grid).unwrap();
        let rot = rotation_test(&pair, &grid, 360).unwrap();
        assert_eq!(scan.verdict, Verdict::HoldsOnGrid);
        assert_eq!(rot.verdict, Verdict::HoldsOnGrid);
        assert!(rot.worst_modulus < 1.0);

        // inadmissible: same F with inner phi = z^2
        let phi2 = certify_schwarz(&AnalyticMap::var().mul(AnalyticMap::var()), &grid).unwrap();
        let pair2 = SymbolPair::new(f, phi2).unwrap();
        let scan2 = scan_pair(&pair2, &grid).unwrap();
        let rot2 = rotation_test(&pair2, &grid, 360).unwrap();
        assert_eq!(scan2.verdict, Verdict::Violated);
        assert_eq!(rot2.verdict, Verdict::Violated);
        assert!(rot2.worst_modulus >= 1.0);
    }

    #[test]
    fn rotation_test_constant_f_gives_rotated_phi() {
        let grid = DiskGrid::default_grid();
        let f = certify_positive_real(&AnalyticMap::real(1.0), &grid).unwrap();
        let phi = certify_schwarz(&AnalyticMap::dilation(0.5), &grid).unwrap();
        let max_phi = phi.certificate().max_modulus;
        let pair = SymbolPair::new(f, phi).unwrap();
        let rot = rotation_test(&pair, &grid, 90).unwrap();
        // omega = 0, so omega_lambda = lambda*phi and the worst modulus is max |phi|
        assert!((rot.worst_modulus - max_phi).abs() < 1e-12);
    }

    #[test]
    fn sufficiency_bounds() {
        assert!((sector_sufficient(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let s = sector_sufficient(2f64.sqrt() - 1.0).unwrap();
        assert!((s - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(sector_sufficient(1.0).is_err());

        assert!((argbound_sufficient(0.0).unwrap() - 1.0).abs() < 1e-15);
        let v = argbound_sufficient(std::f64::consts::FRAC_PI_4).unwrap();
        assert!((v - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(argbound_sufficient(FRAC_PI_2).is_err());

        assert!((omega_norm_sufficient(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((omega_norm_sufficient(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((omega_norm_sufficient(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let alpha = LensParameter::new(0.5).unwrap();
        assert!((lens_threshold(alpha) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // exact consistency with the argument bound
        assert_eq!(
            lens_threshold(alpha),
            argbound_sufficient(0.5 * FRAC_PI_2).unwrap()
        );
    }

    #[test]
    fn rigidity_witness_for_nontrivial_multipliers() {
        let grid = DiskGrid::default_grid();
        let f = certify_positive_real(&AnalyticMap::real(1.0), &grid).unwrap();
        let report = multiplier_rigidity_witness(&f, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::HoldsOnGrid);

        let f = certify_positive_real(&AnalyticMap::halfplane().pow(0.1), &grid).unwrap();
        let report = multiplier_rigidity_witness(&f, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.witness.is_some());

        let f_expr = AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0)));
        let f = certify_positive_real(&f_expr, &grid).unwrap();
        let report = multiplier_rigidity_witness(&f, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        // violation shows up near the boundary, where the argument cap collapses
        assert!(report.witness.unwrap().norm() > 0.9);
    }
}
