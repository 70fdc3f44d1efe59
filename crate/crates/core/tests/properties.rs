//! Property tests for the sampled invariants: branch conventions, round
//! trips, class-membership consequences, and the pointwise equivalence of
//! the two admissibility criteria.

use cara_core::boundary::{jc_quotient_trace, leaf_contains, DEFAULT_DIVERGENCE_CEILING};
use cara_core::disk_maps::{
    cayley_inverse, halfplane_map, lens_map, principal_arg, principal_power, LensParameter,
    UnitComplex,
};
use cara_core::expr_dsl::{format, parse};
use cara_core::fixed_point::iterate_transform;
use cara_core::function_model::{
    certify_positive_real, certify_schwarz, evaluate, iterate, AnalyticMap, DiskGrid,
};
use cara_core::preservation::{
    argbound_sufficient, lens_threshold, omega_norm_sufficient, scan_pair, sector_sufficient,
    slack_c, slack_d, SymbolPair, Verdict,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.99f64, 0.0..2.0 * PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn unit_point() -> impl Strategy<Value = UnitComplex> {
    (0.0..1.0f64).prop_map(UnitComplex::from_turns)
}

proptest! {
    #[test]
    fn cayley_round_trip(z in disk_point()) {
        let w = halfplane_map(z, UnitComplex::ONE).unwrap();
        let back = cayley_inverse(w).unwrap();
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn halfplane_range_is_right_halfplane(z in disk_point(), lambda in unit_point()) {
        let w = halfplane_map(z, lambda).unwrap();
        prop_assert!(w.re > 0.0);
    }

    #[test]
    fn principal_arg_stays_in_branch(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re != 0.0 || im != 0.0);
        let a = principal_arg(c(re, im)).unwrap();
        prop_assert!(a > -PI && a <= PI);
    }

    #[test]
    fn principal_power_scales_argument(z in disk_point(), eps in 0.05..1.0f64) {
        // right half-plane values: |eps * arg w| <= pi always holds here
        let w = halfplane_map(z, UnitComplex::ONE).unwrap();
        let arg_w = principal_arg(w).unwrap();
        let v = principal_power(w, eps).unwrap();
        let arg_v = principal_arg(v).unwrap();
        prop_assert!((arg_v - eps * arg_w).abs() < 1e-12);
    }

    #[test]
    fn leaf_symmetries(w in disk_point()) {
        prop_assert_eq!(leaf_contains(w), leaf_contains(w.conj()));
        prop_assert_eq!(leaf_contains(w), leaf_contains(-w));
    }

    #[test]
    fn leaf_is_the_self_paired_criterion(w in disk_point()) {
        let s = slack_c(w, w).unwrap();
        if s.abs() > 1e-12 {
            prop_assert_eq!(leaf_contains(w), s > 0.0);
        }
    }

    /// Pointwise equivalence of the modulus form and the argument form:
    /// with F = l(omega) the two slacks agree in sign wherever both are
    /// away from zero.
    #[test]
    fn slack_signs_agree(phi_z in disk_point(), omega_z in disk_point()) {
        let f_z = halfplane_map(omega_z, UnitComplex::ONE).unwrap();
        let sc = slack_c(phi_z, omega_z).unwrap();
        let sd = slack_d(f_z, phi_z).unwrap();
        if sc.abs() > 1e-10 && sd.abs() > 1e-10 {
            prop_assert_eq!(sc > 0.0, sd > 0.0, "slack_c = {}, slack_d = {}", sc, sd);
        }
    }

    /// The modulus-form criterion is invariant under rotations of phi ...
    #[test]
    fn slack_c_invariant_under_phi_rotation(
        phi_z in disk_point(),
        omega_z in disk_point(),
        theta in 0.0..2.0 * PI,
    ) {
        let rotated = Complex64::from_polar(1.0, theta) * phi_z;
        let a = slack_c(phi_z, omega_z).unwrap();
        let b = slack_c(rotated, omega_z).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}

/// ... but not under rotations of omega.
#[test]
fn slack_c_not_invariant_under_omega_rotation() {
    let phi_z = c(0.5, 0.0);
    let omega_z = c(0.3, 0.2);
    let base = slack_c(phi_z, omega_z).unwrap();
    let mut max_change = 0.0f64;
    for k in 1..16 {
        let rotated = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 16.0) * omega_z;
        max_change = max_change.max((slack_c(phi_z, rotated).unwrap() - base).abs());
    }
    assert!(max_change > 1e-3, "rotating omega changed nothing: {max_change}");
}

#[test]
fn lens_image_argument_approaches_corner_angle() {
    // sup |arg l(lens_a(z))| tends to a*pi/2 from below
    let alpha = LensParameter::new(0.5).unwrap();
    let cap = 0.5 * FRAC_PI_2;
    let grid = DiskGrid::default_grid();
    let mut sup = 0.0f64;
    for z in grid.points() {
        let w = lens_map(z, alpha).unwrap();
        let arg = principal_arg(halfplane_map(w, UnitComplex::ONE).unwrap()).unwrap();
        sup = sup.max(arg.abs());
    }
    assert!(sup <= cap + 1e-12, "sup {sup} exceeds cap {cap}");
    assert!(sup > cap - 0.01, "sup {sup} does not approach cap {cap}");
}

#[test]
fn omega_correspondence_on_grid() {
    let grid = DiskGrid::default_grid();
    let omega_expr = AnalyticMap::var()
        .mul(AnalyticMap::real(2.0).sub(AnalyticMap::var()))
        .div(AnalyticMap::real(18.0));
    let f_expr = AnalyticMap::halfplane().compose(omega_expr.clone());
    let f = certify_positive_real(&f_expr, &grid).unwrap();
    for z in grid.points() {
        let om = evaluate(&omega_expr, z).unwrap();
        // l(omega(z)) equals F(z)
        let lhs = evaluate(f.map(), z).unwrap();
        let rhs = halfplane_map(om, UnitComplex::ONE).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "mismatch at {z}");
        // and the stored omega expression round-trips through Cayley
        let stored = evaluate(f.omega(), z).unwrap();
        assert!((stored - om).norm() < 1e-10, "omega mismatch at {z}");
        let back = cayley_inverse(lhs).unwrap();
        assert!((back - stored).norm() < 1e-10);
    }
}

#[test]
fn schwarz_lemma_equality_only_for_rotations() {
    let grid = DiskGrid::default_grid();
    let rot = certify_schwarz(&AnalyticMap::rotation(UnitComplex::from_turns(0.15)), &grid).unwrap();
    let phi = certify_schwarz(
        &AnalyticMap::var()
            .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
            .div(AnalyticMap::real(2.0)),
        &grid,
    )
    .unwrap();
    for z in grid.points() {
        let r = z.norm();
        let v_rot = rot.eval(z).unwrap().norm();
        assert!((v_rot - r).abs() < 1e-12, "rotation attains equality");
        if r > 0.01 && (z - c(r, 0.0)).norm() > 0.01 {
            // away from the tangency direction the bound is strict
            let v = phi.eval(z).unwrap().norm();
            assert!(v < r, "strict Schwarz bound violated at {z}");
        }
    }
}

#[test]
fn growth_sandwich_for_certified_members() {
    let grid = DiskGrid::default_grid();
    let members = [
        AnalyticMap::halfplane(),
        AnalyticMap::halfplane().pow(0.5),
        AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0))),
        AnalyticMap::halfplane_rot(UnitComplex::from_turns(0.3)),
    ];
    for expr in members {
        let f = certify_positive_real(&expr, &grid).unwrap();
        for z in grid.points() {
            let r = z.norm();
            let v = f.eval(z).unwrap().norm();
            let lower = (1.0 - r) / (1.0 + r);
            let upper = (1.0 + r) / (1.0 - r);
            assert!(
                v >= lower * (1.0 - 1e-9) && v <= upper * (1.0 + 1e-9),
                "growth sandwich failed for {expr} at {z}: |F| = {v}"
            );
        }
    }
}

#[test]
fn subordination_preserves_positive_real_part() {
    let grid = DiskGrid::default_grid();
    let phi = certify_schwarz(
        &AnalyticMap::var()
            .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
            .div(AnalyticMap::real(2.0)),
        &grid,
    )
    .unwrap();
    for turns in [0.0, 0.21, 0.5, 0.77] {
        let lambda = UnitComplex::from_turns(turns);
        for z in grid.points() {
            let w = phi.eval(z).unwrap();
            let v = halfplane_map(w, lambda).unwrap();
            assert!(v.re > 0.0, "Re l_lambda(phi({z})) = {} at turns {turns}", v.re);
        }
    }
}

#[test]
fn bound_functions_are_strictly_decreasing() {
    let n = 1000;
    for k in 0..n - 1 {
        let x0 = (k + 1) as f64 / (n + 1) as f64;
        let x1 = (k + 2) as f64 / (n + 1) as f64;
        assert!(sector_sufficient(x1).unwrap() < sector_sufficient(x0).unwrap());
        assert!(omega_norm_sufficient(x1).unwrap() < omega_norm_sufficient(x0).unwrap());
        let k0 = x0 * FRAC_PI_2 * 0.999;
        let k1 = x1 * FRAC_PI_2 * 0.999;
        assert!(argbound_sufficient(k1).unwrap() < argbound_sufficient(k0).unwrap());
        let a0 = LensParameter::new(x0).unwrap();
        let a1 = LensParameter::new(x1).unwrap();
        assert!(lens_threshold(a1) < lens_threshold(a0));
    }
}

#[test]
fn jc_signature_of_angular_derivative_rigidity() {
    // Example 2 pair: phi has conformal boundary contact at 1 while omega's
    // range is compact, so omega's quotient trace must diverge there.
    let grid = DiskGrid::default_grid();
    let phi = certify_schwarz(
        &AnalyticMap::var()
            .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
            .div(AnalyticMap::real(2.0)),
        &grid,
    )
    .unwrap();
    let omega = certify_schwarz(
        &AnalyticMap::var()
            .mul(AnalyticMap::real(2.0).sub(AnalyticMap::var()))
            .div(AnalyticMap::real(18.0)),
        &grid,
    )
    .unwrap();
    let phi_trace = jc_quotient_trace(&phi, UnitComplex::ONE, 20).unwrap();
    assert!((phi_trace.quotients.last().unwrap() - 1.5).abs() < 1e-6);
    assert!(!phi_trace.is_divergent(DEFAULT_DIVERGENCE_CEILING));
    let omega_trace = jc_quotient_trace(&omega, UnitComplex::ONE, 24).unwrap();
    assert!(omega_trace.is_divergent(DEFAULT_DIVERGENCE_CEILING));
}

#[test]
fn iterate_chain_and_pointwise_product_agree() {
    let grid = DiskGrid::default_grid();
    let phi = certify_schwarz(
        &AnalyticMap::var()
            .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
            .div(AnalyticMap::real(4.0)),
        &grid,
    )
    .unwrap();
    let f = certify_positive_real(
        &AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0))),
        &grid,
    )
    .unwrap();
    // T^n via expression iterates vs pointwise iteration
    let n = 6;
    let z = c(0.4, 0.2);
    let mut via_exprs = evaluate(f.map(), z).unwrap();
    for k in 1..n {
        let phi_k = iterate(&phi, k);
        let w = evaluate(&phi_k, z).unwrap();
        via_exprs *= evaluate(f.map(), w).unwrap();
    }
    let phi_n = iterate(&phi, n);
    via_exprs *= evaluate(&AnalyticMap::real(1.0), evaluate(&phi_n, z).unwrap()).unwrap();
    let via_points = iterate_transform(&f, &phi, &AnalyticMap::real(1.0), n, z).unwrap();
    assert!((via_exprs - via_points).norm() < 1e-12);
}

/// Random expression trees for the parser round trip.
fn arb_expr() -> impl Strategy<Value = AnalyticMap> {
    let leaf = prop_oneof![
        Just(AnalyticMap::var()),
        (-1.0..1.0f64).prop_map(AnalyticMap::real),
        ((-1.0..1.0f64), (-1.0..1.0f64)).prop_map(|(re, im)| AnalyticMap::constant(c(re, im))),
        Just(AnalyticMap::halfplane()),
        (0.0..1.0f64).prop_map(|t| AnalyticMap::halfplane_rot(UnitComplex::from_turns(t))),
        (0.05..0.95f64).prop_map(|a| AnalyticMap::lens(LensParameter::new(a).unwrap())),
        (0.0..1.0f64).prop_map(|t| AnalyticMap::rotation(UnitComplex::from_turns(t))),
        (0.1..0.9f64).prop_map(AnalyticMap::dilation),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(b)),
            (inner.clone(), 0.25..3.0f64).prop_map(|(a, e)| a.pow(e)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.compose(b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn parse_format_round_trip(expr in arb_expr(), z in disk_point()) {
        let rendered = format(&expr);
        let reparsed = parse(&rendered);
        prop_assert!(reparsed.is_ok(), "canonical form failed to reparse: {rendered}");
        let reparsed = reparsed.unwrap();
        match (evaluate(&expr, z), evaluate(&reparsed, z)) {
            (Ok(a), Ok(b)) => {
                if a.norm() < 1e12 {
                    prop_assert!(
                        (a - b).norm() <= 1e-12 * a.norm().max(1.0),
                        "mismatch at {z} for {rendered}: {a} vs {b}"
                    );
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "eval disagreement for {rendered}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn cayley_round_trip_on_coarse_sample() {
    // deterministic 10^3-point sample out to |z| = 0.99
    let mut worst = 0.0f64;
    for j in 0..25 {
        let r = 0.99 * (j as f64 + 0.5) / 25.0;
        for k in 0..40 {
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / 40.0);
            let back = cayley_inverse(halfplane_map(z, UnitComplex::ONE).unwrap()).unwrap();
            worst = worst.max((back - z).norm());
        }
    }
    assert!(worst < 1e-12, "worst round-trip error {worst}");
}

#[test]
fn product_factor_bound_and_g_membership() {
    let grid = DiskGrid::default_grid();
    let f = certify_positive_real(
        &AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0))),
        &grid,
    )
    .unwrap();
    let phi = certify_schwarz(&AnalyticMap::dilation(0.5), &grid).unwrap();
    let r = 0.8;
    let result = cara_core::fixed_point::fixed_point(&f, &phi, r, 1e-10, 10_000).unwrap();
    let delta = result.delta;
    let prefactor = 2.0 * r / (1.0 - r);
    for &(re, im) in &[(0.8, 0.0), (0.0, 0.8), (-0.5, 0.3), (0.4, -0.4)] {
        let z = c(re, im);
        // per-term bound |1 - F(phi_k(z))| <= (2r/(1-r)) * delta^k
        let mut w = z;
        for k in 0..30 {
            let factor = f.eval(w).unwrap();
            let bound = prefactor * delta.powi(k);
            assert!(
                (Complex64::new(1.0, 0.0) - factor).norm() <= bound + 1e-12,
                "factor bound failed at k = {k}, z = {z}"
            );
            w = phi.eval(w).unwrap();
        }
        // the limit function stays inside the growth sandwich
        let g = result.eval(z).unwrap();
        let rho = z.norm();
        let (lower, upper) = ((1.0 - rho) / (1.0 + rho), (1.0 + rho) / (1.0 - rho));
        let m = g.norm();
        assert!(m >= lower - 1e-9 && m <= upper + 1e-9, "G outside sandwich at {z}");
        assert!(g.re > 0.0);
    }
}

#[test]
fn equivalence_of_scan_and_rotation_on_named_pairs() {
    let grid = DiskGrid::default_grid();
    let cases: [(AnalyticMap, AnalyticMap, Verdict); 3] = [
        (
            AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0))),
            AnalyticMap::dilation(0.5),
            Verdict::HoldsOnGrid,
        ),
        (
            AnalyticMap::halfplane().compose(AnalyticMap::var().div(AnalyticMap::real(4.0))),
            AnalyticMap::var().mul(AnalyticMap::var()),
            Verdict::Violated,
        ),
        (
            AnalyticMap::halfplane().pow(0.3),
            AnalyticMap::var().div(AnalyticMap::real(3.0)),
            Verdict::HoldsOnGrid,
        ),
    ];
    for (f_expr, phi_expr, expected) in cases {
        let f = certify_positive_real(&f_expr, &grid).unwrap();
        let phi = certify_schwarz(&phi_expr, &grid).unwrap();
        let pair = SymbolPair::new(f, phi).unwrap();
        let scan = scan_pair(&pair, &grid).unwrap();
        let rot = cara_core::preservation::rotation_test(&pair, &grid, 360).unwrap();
        assert_eq!(scan.verdict, expected);
        assert_eq!(rot.verdict, expected);
    }
}
