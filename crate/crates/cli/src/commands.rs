//! Subcommand implementations.
//!
//! Every command produces a JSON report envelope on stdout and an exit
//! status: 0 for success / holds-on-grid, 1 for a violated verdict or a
//! mathematical refusal (rotation symbol, inadmissible pair), 2 for input
//! errors (parse diagnostics, certification failures, bad configuration).

use crate::config::{OutputFormat, RunConfig};
use crate::emit;
use crate::report::*;
use cara_core::boundary::{leaf_boundary_radius, leaf_contains, tsuji_integrand};
use cara_core::fixed_point::{fixed_point, iterate_transform, FixedPointError};
use cara_core::function_model::{certify_positive_real, certify_schwarz, evaluate};
use cara_core::preservation::{
    rotation_test_with_tolerance, scan_pair_with_tolerance, slack_c,
};
use cara_core::{AnalyticMap, DiskGrid, LensParameter, PositiveRealMap, SchwarzMap, SymbolPair, Verdict};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

/// Iteration cap for fixed-point products.
pub const FIXED_POINT_N_MAX: usize = 100_000;

/// Bisection steps used when hunting thresholds.
pub const BISECTION_STEPS: usize = 48;

/// Seed for the random sampling in the leaf example; fixed so reports are
/// deterministic.
const LEAF_SAMPLING_SEED: u64 = 42;

#[derive(Debug)]
pub struct CommandOutput {
    pub json: String,
    pub exit_code: i32,
}

fn input_error(
    config: &RunConfig,
    command: String,
    input: &str,
    message: String,
    offset: Option<usize>,
    expected: Vec<&'static str>,
) -> CommandOutput {
    let payload = InputErrorPayload {
        input: input.to_string(),
        message,
        offset,
        expected,
    };
    CommandOutput {
        json: ReportEnvelope::new(command, config, "input_error", payload).to_json(),
        exit_code: 2,
    }
}

fn refusal(
    config: &RunConfig,
    command: String,
    reason: String,
    classification: Option<cara_core::fixed_point::RotationClass>,
) -> CommandOutput {
    let payload = RefusalPayload {
        reason,
        classification,
    };
    CommandOutput {
        json: ReportEnvelope::new(command, config, "refusal", payload).to_json(),
        exit_code: 1,
    }
}

fn parse_with_flag(
    config: &RunConfig,
    command: &str,
    flag: &str,
    src: &str,
) -> Result<AnalyticMap, CommandOutput> {
    cara_core::parse(src).map_err(|diag| {
        input_error(
            config,
            command.to_string(),
            flag,
            diag.message.clone(),
            Some(diag.offset),
            diag.expected.clone(),
        )
    })
}

fn certify_pair(
    config: &RunConfig,
    command: &str,
    grid: &DiskGrid,
    f_expr: &AnalyticMap,
    phi_expr: &AnalyticMap,
) -> Result<(PositiveRealMap, SchwarzMap), CommandOutput> {
    let f = certify_positive_real(f_expr, grid).map_err(|e| {
        input_error(
            config,
            command.to_string(),
            "--F",
            format!("certification failed: {e}"),
            None,
            vec![],
        )
    })?;
    let phi = certify_schwarz(phi_expr, grid).map_err(|e| {
        input_error(
            config,
            command.to_string(),
            "--phi",
            format!("certification failed: {e}"),
            None,
            vec![],
        )
    })?;
    Ok((f, phi))
}

fn grid_or_error(config: &RunConfig, command: &str) -> Result<DiskGrid, CommandOutput> {
    config.grid().map_err(|e| {
        input_error(
            config,
            command.to_string(),
            "config",
            e.to_string(),
            None,
            vec![],
        )
    })
}

/// `check --F <expr> --phi <expr>`: scan both pointwise criteria and run
/// the rotation sweep.
pub fn cmd_check(config: &RunConfig, command: String, f_src: &str, phi_src: &str) -> CommandOutput {
    let f_expr = match parse_with_flag(config, &command, "--F", f_src) {
        Ok(e) => e,
        Err(out) => return out,
    };
    let phi_expr = match parse_with_flag(config, &command, "--phi", phi_src) {
        Ok(e) => e,
        Err(out) => return out,
    };
    let grid = match grid_or_error(config, &command) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let (f, phi) = match certify_pair(config, &command, &grid, &f_expr, &phi_expr) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let pair = SymbolPair::new(f, phi).expect("certified on the same grid");
    let scan = match scan_pair_with_tolerance(&pair, &grid, config.slack_tol) {
        Ok(r) => r,
        Err(e) => {
            return input_error(config, command, "--F/--phi", e.to_string(), None, vec![]);
        }
    };
    let rotation =
        match rotation_test_with_tolerance(&pair, &grid, config.lambda_samples, config.slack_tol) {
            Ok(r) => r,
            Err(e) => {
                return input_error(config, command, "--F/--phi", e.to_string(), None, vec![]);
            }
        };
    let exit_code = match scan.verdict {
        Verdict::HoldsOnGrid => 0,
        Verdict::Violated => 1,
    };
    let payload = CheckPayload {
        scan,
        rotation,
        units: units(&[
            ("min_slack_c", "dimensionless"),
            ("min_slack_d", "radians"),
            ("max_slack_c", "dimensionless"),
            ("max_slack_d", "radians"),
            ("worst_modulus", "dimensionless"),
        ]),
    };
    let envelope = ReportEnvelope::new(command, config, "criterion_report", payload);
    CommandOutput {
        json: envelope.to_json(),
        exit_code,
    }
}

/// `fixed-point --F <expr> --phi <expr> [--r] [--tol] [--f seed]`.
pub fn cmd_fixed_point(
    config: &RunConfig,
    command: String,
    f_src: &str,
    phi_src: &str,
    seed_src: Option<&str>,
) -> CommandOutput {
    let f_expr = match parse_with_flag(config, &command, "--F", f_src) {
        Ok(e) => e,
        Err(out) => return out,
    };
    let phi_expr = match parse_with_flag(config, &command, "--phi", phi_src) {
        Ok(e) => e,
        Err(out) => return out,
    };
    let seed_expr = match seed_src {
        Some(src) => match parse_with_flag(config, &command, "--f", src) {
            Ok(e) => Some(e),
            Err(out) => return out,
        },
        None => None,
    };
    let grid = match grid_or_error(config, &command) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let (f, phi) = match certify_pair(config, &command, &grid, &f_expr, &phi_expr) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let result = match fixed_point(
        &f,
        &phi,
        config.fixed_point_radius,
        config.fixed_point_tol,
        FIXED_POINT_N_MAX,
    ) {
        Ok(r) => r,
        Err(err @ FixedPointError::Rotation(_)) => {
            let classification = match &err {
                FixedPointError::Rotation(class) => Some(class.clone()),
                _ => None,
            };
            return refusal(config, command, err.to_string(), classification);
        }
        Err(err @ FixedPointError::NotAdmissible { .. })
        | Err(err @ FixedPointError::NotContracting { .. })
        | Err(err @ FixedPointError::TailBoundNotMet { .. })
        | Err(err @ FixedPointError::Postcondition { .. }) => {
            return refusal(config, command, err.to_string(), None);
        }
        Err(err) => {
            return input_error(config, command, "--F/--phi", err.to_string(), None, vec![]);
        }
    };

    let seed_difference = seed_expr.map(|seed| {
        let mut worst = 0.0f64;
        for sample in &result.samples {
            let with_seed = iterate_transform(&f, &phi, &seed, result.n_terms, sample.z);
            if let Ok(v) = with_seed {
                worst = worst.max((v - sample.value).norm());
            }
        }
        worst
    });

    if let Some(out_path) = &config.out {
        let content = match config.format {
            OutputFormat::Csv => emit::fixed_point_csv(&result.samples),
            OutputFormat::Json => String::new(),
        };
        if config.format == OutputFormat::Csv {
            if let Err(e) = emit::write_text(out_path, &content) {
                return input_error(
                    config,
                    command,
                    "--out",
                    format!("cannot write {}: {e}", out_path.display()),
                    None,
                    vec![],
                );
            }
        }
    }

    let payload = FixedPointPayload {
        result,
        seed_difference,
        units: units(&[
            ("radius", "dimensionless"),
            ("delta", "dimensionless"),
            ("tail_bound", "dimensionless"),
            ("residual", "dimensionless"),
            ("seed_difference", "dimensionless"),
        ]),
    };
    let envelope = ReportEnvelope::new(command.clone(), config, "fixed_point_result", payload);
    let json = envelope.to_json();
    if config.format == OutputFormat::Json {
        if let Some(out_path) = &config.out {
            if let Err(e) = emit::write_text(out_path, &json) {
                return input_error(
                    config,
                    command,
                    "--out",
                    format!("cannot write {}: {e}", out_path.display()),
                    None,
                    vec![],
                );
            }
        }
    }
    CommandOutput { json, exit_code: 0 }
}

/// Closed-form sector-example threshold `1 - (2/pi) arcsin(2R/(1+R^2))`.
pub fn example1_threshold(big_r: f64) -> f64 {
    1.0 - (2.0 / PI) * (2.0 * big_r / (1.0 + big_r * big_r)).asin()
}

/// Scan verdict for the sector example `F = l(z)^epsilon`, `phi = R*z`.
pub fn example1_verdict(grid: &DiskGrid, epsilon: f64, big_r: f64) -> Result<Verdict, String> {
    let f_expr = AnalyticMap::halfplane().pow(epsilon);
    let phi_expr = AnalyticMap::dilation(big_r);
    let f = certify_positive_real(&f_expr, grid).map_err(|e| e.to_string())?;
    let phi = certify_schwarz(&phi_expr, grid).map_err(|e| e.to_string())?;
    let pair = SymbolPair::new(f, phi).map_err(|e| e.to_string())?;
    Ok(cara_core::scan_pair(&pair, grid)
        .map_err(|e| e.to_string())?
        .verdict)
}

/// The tangential-contact example pair: `phi = z(1+z)/2`,
/// `F = l(z(2-z)/(2K))`.
pub fn example2_exprs(k: f64) -> (AnalyticMap, AnalyticMap) {
    let omega = AnalyticMap::var()
        .mul(AnalyticMap::real(2.0).sub(AnalyticMap::var()))
        .div(AnalyticMap::real(2.0 * k));
    let f = AnalyticMap::halfplane().compose(omega);
    let phi = AnalyticMap::var()
        .mul(AnalyticMap::real(1.0).add(AnalyticMap::var()))
        .div(AnalyticMap::real(2.0));
    (f, phi)
}

/// Scan verdict for the tangential-contact example at a given `K`.
/// Certification failures count as "not admissible at this K".
pub fn example2_holds(grid: &DiskGrid, k: f64) -> bool {
    let (f_expr, phi_expr) = example2_exprs(k);
    let (Ok(f), Ok(phi)) = (
        certify_positive_real(&f_expr, grid),
        certify_schwarz(&phi_expr, grid),
    ) else {
        return false;
    };
    let Ok(pair) = SymbolPair::new(f, phi) else {
        return false;
    };
    matches!(
        cara_core::scan_pair(&pair, grid).map(|r| r.verdict),
        Ok(Verdict::HoldsOnGrid)
    )
}

/// Bisects the smallest value in `[lo, hi]` where `holds_at` flips to true.
///
/// Requires `!holds_at(lo)` and `holds_at(hi)`; `holds_at` must be
/// monotone over the bracket.
pub fn bisect_threshold(
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    holds_at: impl Fn(f64) -> bool,
) -> f64 {
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if holds_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn out_dir(config: &RunConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn write_or_input_error(
    config: &RunConfig,
    command: &str,
    path: &Path,
    content: &str,
) -> Result<(), CommandOutput> {
    emit::write_text(path, content).map_err(|e| {
        input_error(
            config,
            command.to_string(),
            "--out",
            format!("cannot write {}: {e}", path.display()),
            None,
            vec![],
        )
    })
}

/// `examples --which 1`: verdict lattice over `(epsilon, R)` plus the
/// closed-form threshold curve, emitted as CSV.
pub fn cmd_example1(config: &RunConfig, command: String) -> CommandOutput {
    let grid = match grid_or_error(config, &command) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let mut rows = Vec::new();
    for r_step in 1..=9 {
        let big_r = r_step as f64 / 10.0;
        for eps_step in 1..=19 {
            let epsilon = eps_step as f64 / 20.0;
            let verdict = match example1_verdict(&grid, epsilon, big_r) {
                Ok(v) => v,
                Err(e) => {
                    return input_error(config, command, "example lattice", e, None, vec![]);
                }
            };
            rows.push(Example1Row {
                big_r,
                epsilon,
                verdict,
                threshold_epsilon: example1_threshold(big_r),
            });
        }
    }
    let csv = emit::example1_csv(&rows);
    let path = out_dir(config).join("example1_verdicts.csv");
    if let Err(out) = write_or_input_error(config, &command, &path, &csv) {
        return out;
    }
    let payload = Example1Payload {
        rows,
        csv_path: Some(path.display().to_string()),
        units: units(&[("epsilon", "dimensionless"), ("R", "dimensionless")]),
    };
    CommandOutput {
        json: ReportEnvelope::new(command, config, "example1_report", payload).to_json(),
        exit_code: 0,
    }
}

/// `examples --which 2`: verify the documented K values and bisect the
/// minimal grid-admissible K.
pub fn cmd_example2(config: &RunConfig, command: String) -> CommandOutput {
    let grid = match grid_or_error(config, &command) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let verdict_of = |k: f64| -> Verdict {
        if example2_holds(&grid, k) {
            Verdict::HoldsOnGrid
        } else {
            Verdict::Violated
        }
    };
    let sufficient_bound_k = 4.0 + 73f64.sqrt() / 2.0;
    let payload = Example2Payload {
        verdict_k_9: verdict_of(9.0),
        verdict_k_8_28: verdict_of(8.28),
        bisected_min_k: bisect_threshold(1.5, 9.0, BISECTION_STEPS, |k| example2_holds(&grid, k)),
        sufficient_bound_k,
        units: units(&[
            ("bisected_min_k", "dimensionless"),
            ("sufficient_bound_k", "dimensionless"),
        ]),
    };
    CommandOutput {
        json: ReportEnvelope::new(command, config, "example2_report", payload).to_json(),
        exit_code: 0,
    }
}

/// `examples --which 3`: leaf boundary CSV + SVG, the membership/criterion
/// agreement count, and the Tsuji ratio table.
pub fn cmd_example3(config: &RunConfig, command: String) -> CommandOutput {
    let dir = out_dir(config);
    let csv_path = dir.join("example3_leaf_boundary.csv");
    if let Err(out) =
        write_or_input_error(config, &command, &csv_path, &emit::leaf_boundary_csv(2048))
    {
        return out;
    }
    let svg_path = dir.join("example3_leaf.svg");
    if let Err(out) = write_or_input_error(config, &command, &svg_path, &emit::leaf_svg()) {
        return out;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(LEAF_SAMPLING_SEED);
    let n_samples = 10_000;
    let mut agreements = 0usize;
    let mut boundary_band = 0usize;
    for _ in 0..n_samples {
        let radius = rng.gen::<f64>().sqrt() * 0.9999;
        let theta = rng.gen::<f64>() * 2.0 * PI;
        let w = Complex64::from_polar(radius, theta);
        let slack = slack_c(w, w).expect("|w| < 1");
        if slack.abs() <= 1e-12 {
            boundary_band += 1;
            continue;
        }
        if leaf_contains(w) == (slack > 0.0) {
            agreements += 1;
        }
    }

    let tsuji_ratios = (2..=8)
        .map(|k| {
            let theta = 10f64.powi(-k);
            TsujiRatioRow {
                theta,
                ratio: theta.powf(1.5) * tsuji_integrand(theta).expect("theta in (0, pi)"),
            }
        })
        .collect();

    let payload = Example3Payload {
        agreement_samples: n_samples - boundary_band,
        agreements,
        boundary_band,
        boundary_radius_at_half_pi: leaf_boundary_radius(FRAC_PI_2).expect("pi/2 in range"),
        tsuji_ratios,
        csv_path: Some(csv_path.display().to_string()),
        svg_path: Some(svg_path.display().to_string()),
        units: units(&[
            ("theta", "radians"),
            ("ratio", "dimensionless"),
            ("boundary_radius_at_half_pi", "dimensionless"),
        ]),
    };
    CommandOutput {
        json: ReportEnvelope::new(command, config, "example3_report", payload).to_json(),
        exit_code: 0,
    }
}

pub fn cmd_examples(config: &RunConfig, command: String, which: u8) -> CommandOutput {
    match which {
        1 => cmd_example1(config, command),
        2 => cmd_example2(config, command),
        3 => cmd_example3(config, command),
        other => input_error(
            config,
            command,
            "--which",
            format!("unknown example {other}; expected 1, 2, or 3"),
            None,
            vec![],
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BoundsMode {
    /// Argument cap that admits every phi with the given sup-norm.
    Sector,
    /// Sup-norm cap for phi given an argument bound on F (radians).
    Argbound,
    /// Sup-norm cap for phi given the sup-norm of omega.
    Omega,
    /// Exact sup-norm threshold for phi when F is a lens composition.
    Lens,
}

/// `bounds --mode <mode> <value>`: print the corresponding threshold.
pub fn cmd_bounds(config: &RunConfig, command: String, mode: BoundsMode, value: f64) -> CommandOutput {
    let result = match mode {
        BoundsMode::Sector => cara_core::preservation::sector_sufficient(value)
            .map(|v| (v, "radians"))
            .map_err(|e| e.to_string()),
        BoundsMode::Argbound => cara_core::preservation::argbound_sufficient(value)
            .map(|v| (v, "dimensionless"))
            .map_err(|e| e.to_string()),
        BoundsMode::Omega => cara_core::preservation::omega_norm_sufficient(value)
            .map(|v| (v, "dimensionless"))
            .map_err(|e| e.to_string()),
        BoundsMode::Lens => LensParameter::new(value)
            .map(|alpha| (cara_core::preservation::lens_threshold(alpha), "dimensionless"))
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok((threshold, unit)) => {
            let mode_name = match mode {
                BoundsMode::Sector => "sector",
                BoundsMode::Argbound => "argbound",
                BoundsMode::Omega => "omega",
                BoundsMode::Lens => "lens",
            };
            let payload = BoundsPayload {
                mode: mode_name.to_string(),
                input: value,
                threshold,
                units: units(&[("threshold", unit)]),
            };
            CommandOutput {
                json: ReportEnvelope::new(command, config, "bounds_report", payload).to_json(),
                exit_code: 0,
            }
        }
        Err(message) => input_error(config, command, "value", message, None, vec![]),
    }
}

/// `parse --f <expr>`: echo the canonical fully parenthesized form.
pub fn cmd_parse(config: &RunConfig, command: String, src: &str) -> CommandOutput {
    match cara_core::parse(src) {
        Ok(expr) => {
            let payload = ParsePayload {
                canonical: cara_core::format(&expr),
            };
            CommandOutput {
                json: ReportEnvelope::new(command, config, "parse_echo", payload).to_json(),
                exit_code: 0,
            }
        }
        Err(diag) => input_error(
            config,
            command,
            "--f",
            diag.message.clone(),
            Some(diag.offset),
            diag.expected,
        ),
    }
}

/// Sanity check used by tests: evaluate an expression at a point.
pub fn eval_expr(src: &str, z: Complex64) -> Result<Complex64, String> {
    let expr = cara_core::parse(src).map_err(|e| e.to_string())?;
    evaluate(&expr, z).map_err(|e| e.to_string())
}
