//! Closed-form conformal building blocks on the unit disk.
//!
//! The half-plane map `l(z) = (1+z)/(1-z)` sends the disk onto the right
//! half-plane, its Cayley inverse sends it back, and the lens map
//! `cayley_inverse(l(z)^alpha)` squeezes the disk into a lens-shaped region
//! with corner angle `pi*alpha` at the points 1 and -1. Everything here is a
//! pure function; poles are reported as errors instead of infinities so that
//! grid scans can skip them deterministically.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance used for unit-modulus and round-trip invariants.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiskMapError {
    #[error("argument of zero")]
    ArgumentOfZero,
    #[error("pole of {map} at {at}")]
    Pole { map: &'static str, at: Complex64 },
    #[error("principal power of zero with exponent {exponent} <= 0")]
    ZeroToNonPositivePower { exponent: f64 },
    #[error("|{value}| = {modulus} is not on the unit circle")]
    NotUnitModulus { value: Complex64, modulus: f64 },
    #[error("lens parameter {alpha} outside the open interval (0,1)")]
    BadLensParameter { alpha: f64 },
    #[error("lens map requires |z| < 1, got |z| = {modulus}")]
    OutsideOpenDisk { modulus: f64 },
}

/// A complex number of unit modulus, e.g. the rotation parameter of the
/// rotated half-plane maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitComplex(Complex64);

impl UnitComplex {
    /// The identity rotation.
    pub const ONE: UnitComplex = UnitComplex(Complex64::new(1.0, 0.0));

    /// Wraps `value`, requiring `|value| = 1` within [`UNIT_TOLERANCE`].
    pub fn new(value: Complex64) -> Result<Self, DiskMapError> {
        let modulus = value.norm();
        if (modulus - 1.0).abs() > UNIT_TOLERANCE {
            return Err(DiskMapError::NotUnitModulus { value, modulus });
        }
        Ok(UnitComplex(value))
    }

    /// `exp(2*pi*i*t)`; `t` is the fraction of a full turn.
    pub fn from_turns(t: f64) -> Self {
        UnitComplex(Complex64::from_polar(1.0, 2.0 * PI * t))
    }

    /// `exp(i*theta)`.
    pub fn from_radians(theta: f64) -> Self {
        UnitComplex(Complex64::from_polar(1.0, theta))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// The argument as a fraction of a full turn, normalized to `[0, 1)`.
    pub fn turns(self) -> f64 {
        let t = self.0.arg() / (2.0 * PI);
        if t < 0.0 {
            t + 1.0
        } else {
            t
        }
    }
}

/// The corner-angle parameter of a lens map, constrained to `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LensParameter(f64);

impl LensParameter {
    pub fn new(alpha: f64) -> Result<Self, DiskMapError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DiskMapError::BadLensParameter { alpha });
        }
        Ok(LensParameter(alpha))
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// Principal argument with values in `(-pi, pi]`.
///
/// Ties on the negative real axis go to `+pi`, never `-pi`.
pub fn principal_arg(w: Complex64) -> Result<f64, DiskMapError> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(DiskMapError::ArgumentOfZero);
    }
    let a = w.im.atan2(w.re);
    Ok(if a == -PI { PI } else { a })
}

/// The rotated half-plane map `(1 + lambda*z)/(1 - lambda*z)`.
///
/// For `|z| < 1` the image lies in the open right half-plane.
pub fn halfplane_map(z: Complex64, lambda: UnitComplex) -> Result<Complex64, DiskMapError> {
    let lz = lambda.value() * z;
    let denom = Complex64::new(1.0, 0.0) - lz;
    if denom.norm_sqr() == 0.0 {
        return Err(DiskMapError::Pole {
            map: "halfplane map",
            at: z,
        });
    }
    Ok((Complex64::new(1.0, 0.0) + lz) / denom)
}

/// Inverse of the half-plane map: `(w - 1)/(w + 1)`.
///
/// Maps the open right half-plane into the unit disk.
pub fn cayley_inverse(w: Complex64) -> Result<Complex64, DiskMapError> {
    let denom = w + Complex64::new(1.0, 0.0);
    if denom.norm_sqr() == 0.0 {
        return Err(DiskMapError::Pole {
            map: "cayley inverse",
            at: w,
        });
    }
    Ok((w - Complex64::new(1.0, 0.0)) / denom)
}

/// Principal branch of `w^epsilon` for a real exponent:
/// `exp(epsilon*(ln|w| + i*principal_arg(w)))`.
pub fn principal_power(w: Complex64, epsilon: f64) -> Result<Complex64, DiskMapError> {
    if w.re == 0.0 && w.im == 0.0 {
        if epsilon > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(DiskMapError::ZeroToNonPositivePower { exponent: epsilon });
    }
    let arg = principal_arg(w)?;
    Ok(Complex64::from_polar(w.norm().powf(epsilon), epsilon * arg))
}

/// The standard lens map `cayley_inverse(halfplane_map(z)^alpha)`.
///
/// Fixes the origin and the real diameter; the image is the lens-shaped
/// region with opening angle `pi*alpha` at the corners 1 and -1.
pub fn lens_map(z: Complex64, alpha: LensParameter) -> Result<Complex64, DiskMapError> {
    let modulus = z.norm();
    if modulus >= 1.0 {
        return Err(DiskMapError::OutsideOpenDisk { modulus });
    }
    let halfplane = halfplane_map(z, UnitComplex::ONE)?;
    let powered = principal_power(halfplane, alpha.alpha())?;
    cayley_inverse(powered)
}
