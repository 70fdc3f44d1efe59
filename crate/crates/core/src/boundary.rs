//! Boundary behavior diagnostics.
//!
//! Limits and liminfs along radii are not finitely decidable, so everything
//! here reports finite traces with running minima and divergence flags
//! rather than certified limits. The leaf region of the self-paired example
//! (`phi = omega` a conformal map onto the leaf) is exposed through its
//! membership predicate and polar boundary; the conformal map itself is out
//! of scope.

use crate::disk_maps::UnitComplex;
use crate::function_model::{evaluate, EvalError, PositiveRealMap, SchwarzMap};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum BoundaryError {
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Default ceiling above which a Julia-Carathéodory quotient trace is
/// flagged divergent.
pub const DEFAULT_DIVERGENCE_CEILING: f64 = 1e3;

/// Values and difference quotients of a self-map along a radius toward a
/// boundary direction.
#[derive(Debug, Clone, Serialize)]
pub struct RadialTrace {
    pub direction: UnitComplex,
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `(1 - |phi(r*zeta)|)/(1 - r)` per radius.
    pub quotients: Vec<f64>,
}

impl RadialTrace {
    /// Running minimum of the quotients; the final entry is the numerical
    /// liminf proxy.
    pub fn running_min(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.quotients.len());
        let mut m = f64::INFINITY;
        for &q in &self.quotients {
            m = m.min(q);
            out.push(m);
        }
        out
    }

    /// Minimum quotient over the whole trace.
    pub fn liminf_proxy(&self) -> f64 {
        self.quotients.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every quotient in the tail half of the trace exceeds the
    /// ceiling — the signature of an infinite angular derivative.
    pub fn is_divergent(&self, ceiling: f64) -> bool {
        let tail = self.quotients.len() / 2;
        !self.quotients.is_empty() && self.quotients[tail..].iter().all(|&q| q > ceiling)
    }
}

/// Mean of `|phi|` over `n_samples` equally spaced points on the circle of
/// radius `r`; tends to one as `r -> 1` exactly for inner functions.
pub fn innerness_score(phi: &SchwarzMap, r: f64, n_samples: usize) -> Result<f64, BoundaryError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(BoundaryError::Domain {
            what: "r",
            value: r,
            domain: "(0, 1)",
        });
    }
    let mut sum = 0.0;
    for k in 0..n_samples {
        let theta = 2.0 * PI * k as f64 / n_samples as f64;
        sum += evaluate(phi.map(), Complex64::from_polar(r, theta))?.norm();
    }
    Ok(sum / n_samples as f64)
}

/// Samples the Julia-Carathéodory quotient `(1-|phi(r*zeta)|)/(1-r)` along
/// the radii `r_j = 1 - 2^-j`, `j = 1..=n_radii`.
///
/// A finite liminf of the quotient characterizes the existence of an
/// angular derivative at `zeta`; the trace records the evidence.
pub fn jc_quotient_trace(
    phi: &SchwarzMap,
    zeta: UnitComplex,
    n_radii: usize,
) -> Result<RadialTrace, BoundaryError> {
    let mut radii = Vec::with_capacity(n_radii);
    let mut values = Vec::with_capacity(n_radii);
    let mut quotients = Vec::with_capacity(n_radii);
    for j in 1..=n_radii {
        let r = 1.0 - (2.0f64).powi(-(j as i32));
        let v = evaluate(phi.map(), r * zeta.value())?;
        radii.push(r);
        quotients.push((1.0 - v.norm()) / (1.0 - r));
        values.push(v);
    }
    Ok(RadialTrace {
        direction: zeta,
        radii,
        values,
        quotients,
    })
}

/// Sampled estimate of how much of a boundary circle the multiplier maps
/// near the imaginary axis.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureEstimate {
    /// Fraction of successfully evaluated samples with `Re F < tol`.
    pub fraction: f64,
    pub n_samples: usize,
    pub n_below: usize,
    /// Samples skipped because evaluation hit a pole.
    pub n_skipped: usize,
}

/// Fraction of `n_samples` points on the circle of radius `r` where
/// `Re F < tol` — a diagnostic proxy for the measure of the boundary set
/// where `Re F = 0`. Poles are skipped and counted.
pub fn measure_re_zero(
    f: &PositiveRealMap,
    r: f64,
    n_samples: usize,
    tol: f64,
) -> MeasureEstimate {
    let mut below = 0usize;
    let mut skipped = 0usize;
    for k in 0..n_samples {
        let theta = 2.0 * PI * k as f64 / n_samples as f64;
        match evaluate(f.map(), Complex64::from_polar(r, theta)) {
            Ok(v) => {
                if v.re < tol {
                    below += 1;
                }
            }
            Err(_) => skipped += 1,
        }
    }
    let denom = n_samples.saturating_sub(skipped).max(1);
    MeasureEstimate {
        fraction: below as f64 / denom as f64,
        n_samples,
        n_below: below,
        n_skipped: skipped,
    }
}

/// Membership in the leaf region `4|y|*sqrt(x^2+y^2) < (1-x^2-y^2)^2`,
/// evaluated exactly as written (strict inequality).
///
/// This is literally the pointwise modulus-form criterion applied to the
/// self-pair `phi = omega = w`.
pub fn leaf_contains(w: Complex64) -> bool {
    let (x, y) = (w.re, w.im);
    let rho_sq = x * x + y * y;
    4.0 * y.abs() * rho_sq.sqrt() < (1.0 - x * x - y * y) * (1.0 - x * x - y * y)
}

/// Radius of the leaf boundary in polar coordinates, for `theta` in
/// `(0, pi)`: solves `4r^2 sin(theta) = (1-r^2)^2` via
/// `1 - r^2 = 2(sqrt(sin theta + sin^2 theta) - sin theta)`.
///
/// The region is symmetric in both axes; use symmetry for the other
/// quadrants.
pub fn leaf_boundary_radius(theta: f64) -> Result<f64, BoundaryError> {
    if !(theta > 0.0 && theta < PI) {
        return Err(BoundaryError::Domain {
            what: "theta",
            value: theta,
            domain: "(0, pi)",
        });
    }
    let s = theta.sin();
    Ok((1.0 - 2.0 * ((s + s * s).sqrt() - s)).sqrt())
}

/// The integrand `(1 - r(theta))/theta^2` whose divergent integral at
/// `theta -> 0` certifies (via the Tsuji-Warschawski criterion) that the
/// leaf's conformal map has no angular derivative at the corner.
pub fn tsuji_integrand(theta: f64) -> Result<f64, BoundaryError> {
    let r = leaf_boundary_radius(theta)?;
    Ok((1.0 - r) / (theta * theta))
}

/// Companion quadrature: integrates the Tsuji integrand over
/// `[delta, eps]` with `n_points` trapezoids on a log-spaced grid. The
/// value grows like `2/sqrt(delta)` as `delta` decreases.
pub fn tsuji_partial_integral(
    delta: f64,
    eps: f64,
    n_points: usize,
) -> Result<f64, BoundaryError> {
    if !(delta > 0.0 && delta < eps && eps < PI) {
        return Err(BoundaryError::Domain {
            what: "delta",
            value: delta,
            domain: "(0, eps), eps < pi",
        });
    }
    let n = n_points.max(2);
    let (lo, hi) = (delta.ln(), eps.ln());
    let h = (hi - lo) / (n - 1) as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let theta = (lo + h * k as f64).exp();
        // substitute theta = e^u: d theta = theta du
        let val = tsuji_integrand(theta)? * theta;
        let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        sum += weight * val;
    }
    Ok(sum * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::{certify_positive_real, certify_schwarz, AnalyticMap, DiskGrid};
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn schwarz(expr: AnalyticMap) -> SchwarzMap {
        certify_schwarz(&expr, &DiskGrid::default_grid()).unwrap()
    }

    #[test]
    fn innerness_scores() {
        let r = 1.0 - 1e-6;
        // finite Blaschke products are inner
        let sq = schwarz(AnalyticMap::var().mul(AnalyticMap::var()));
        let s = innerness_score(&sq, r, 512).unwrap();
        assert!((s - 1.0).abs() < 1e-5, "score {s}");
        // dilations are not
        let dil = schwarz(AnalyticMap::dilation(0.6));
        let s = innerness_score(&dil, r, 512).unwrap();
        assert!((s - 0.6).abs() < 1e-5);
        // phi = z(1+z)/2: mean modulus is 2/pi on the boundary
        let phi = schwarz(
            AnalyticMap::var()
                .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
                .div(AnalyticMap::real(2.0)),
        );
        let s = innerness_score(&phi, r, 1024).unwrap();
        assert!(s < 1.0);
        assert!((s - 2.0 / PI).abs() < 1e-4, "score {s}");
    }

    #[test]
    fn jc_quotients_converge_for_conformal_contact() {
        let phi = schwarz(
            AnalyticMap::var()
                .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
                .div(AnalyticMap::real(2.0)),
        );
        let trace = jc_quotient_trace(&phi, UnitComplex::ONE, 20).unwrap();
        // quotient = (2+r)/2 -> 3/2
        let last = *trace.quotients.last().unwrap();
        assert!((last - 1.5).abs() < 1e-6, "quotient {last}");
        assert!(!trace.is_divergent(DEFAULT_DIVERGENCE_CEILING));
        assert!(trace.quotients.iter().all(|&q| q > 0.0));

        let sq = schwarz(AnalyticMap::var().mul(AnalyticMap::var()));
        let trace = jc_quotient_trace(&sq, UnitComplex::ONE, 20).unwrap();
        // quotient = 1 + r -> 2
        let last = *trace.quotients.last().unwrap();
        assert!((last - 2.0).abs() < 1e-5);
    }

    #[test]
    fn jc_quotient_diverges_for_compact_range() {
        let dil = schwarz(AnalyticMap::dilation(0.5));
        let trace = jc_quotient_trace(&dil, UnitComplex::from_turns(0.2), 24).unwrap();
        assert!(trace.is_divergent(DEFAULT_DIVERGENCE_CEILING));
        // running minimum is still attained early
        assert!(trace.liminf_proxy() >= 0.5);
    }

    #[test]
    fn measure_estimates() {
        let grid = DiskGrid::default_grid();
        let one = certify_positive_real(&AnalyticMap::real(1.0), &grid).unwrap();
        let m = measure_re_zero(&one, 1.0 - 1e-6, 1024, 1e-3);
        assert_eq!(m.fraction, 0.0);

        // omega compactly inside the disk keeps Re F bounded away from zero
        let f_expr =
            AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0)));
        let f = certify_positive_real(&f_expr, &grid).unwrap();
        let m = measure_re_zero(&f, 1.0 - 1e-6, 1024, 1e-3);
        assert_eq!(m.fraction, 0.0);

        // F = l maps the circle minus {1} onto the imaginary axis
        let ell = certify_positive_real(&AnalyticMap::halfplane(), &grid).unwrap();
        let m = measure_re_zero(&ell, 1.0 - 1e-6, 1024, 1e-3);
        assert!(m.fraction > 0.95, "fraction {}", m.fraction);
        let m_inner = measure_re_zero(&ell, 0.9, 1024, 1e-3);
        assert!(m_inner.fraction < m.fraction);
    }

    #[test]
    fn leaf_membership() {
        assert!(leaf_contains(c(0.0, 0.0)));
        // the real diameter is inside
        assert!(leaf_contains(c(0.99, 0.0)));
        assert!(leaf_contains(c(-0.99, 0.0)));
        // the corner of the boundary on the imaginary axis is excluded
        let r = 2f64.sqrt() - 1.0;
        assert!(!leaf_contains(c(0.0, r)));
        // symmetry
        for &(x, y) in &[(0.3, 0.2), (0.5, -0.1), (-0.4, 0.25)] {
            let w = c(x, y);
            assert_eq!(leaf_contains(w), leaf_contains(w.conj()));
            assert_eq!(leaf_contains(w), leaf_contains(-w));
        }
    }

    #[test]
    fn leaf_boundary_radius_values() {
        let r = leaf_boundary_radius(FRAC_PI_2).unwrap();
        assert!((r - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // polar equation residual
        for &theta in &[0.1, 0.5, FRAC_PI_2, 2.5, 3.0] {
            let r = leaf_boundary_radius(theta).unwrap();
            let res = 4.0 * r * r * theta.sin().abs() - (1.0 - r * r) * (1.0 - r * r);
            assert!(res.abs() < 1e-12, "residual {res} at theta {theta}");
        }
        // corners: r -> 1 at both ends
        assert!(leaf_boundary_radius(1e-9).unwrap() > 0.999);
        assert!(leaf_boundary_radius(PI - 1e-9).unwrap() > 0.999);
        assert!(leaf_boundary_radius(0.0).is_err());
        assert!(leaf_boundary_radius(PI).is_err());
    }

    #[test]
    fn tsuji_integrand_asymptotics() {
        // theta^(3/2) * integrand -> 1
        for &theta in &[1e-4f64, 1e-6, 1e-8] {
            let ratio = theta.powf(1.5) * tsuji_integrand(theta).unwrap();
            assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio} at {theta}");
        }
        // direct formula at theta = 0.1
        let v = tsuji_integrand(0.1).unwrap();
        let r = leaf_boundary_radius(0.1).unwrap();
        assert!((v - (1.0 - r) / 0.01).abs() < 1e-12);
        assert!(v > 0.0);
    }

    #[test]
    fn tsuji_partial_integral_doubles() {
        // square-root divergence: delta -> delta/4 doubles the integral
        let i1 = tsuji_partial_integral(1e-6, 0.1, 4096).unwrap();
        let i2 = tsuji_partial_integral(0.25e-6, 0.1, 4096).unwrap();
        let ratio = i2 / i1;
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
        // oracle: antiderivative of theta^(-3/2) dominates
        let oracle = 2.0 / (1e-6f64).sqrt() - 2.0 / (0.1f64).sqrt();
        assert!((i1 - oracle).abs() / oracle < 0.02, "i1 {i1} vs oracle {oracle}");
    }
}
