//! Deterministic CSV and SVG emitters.
//!
//! CSV tables carry a header row, '.' decimal points, UTF-8. The SVG is
//! plain SVG 1.1: the leaf boundary as a polyline over 2048 angle samples
//! plus the unit circle for scale; no styling knobs.

use cara_core::boundary::leaf_boundary_radius;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// Angle samples per half-leaf in the SVG polyline.
pub const LEAF_SVG_SAMPLES: usize = 2048;

/// Leaf boundary table: `theta, r, x, y` over `n` samples of `(0, pi)`.
/// The lower half follows by symmetry.
pub fn leaf_boundary_csv(n: usize) -> String {
    let mut out = String::from("theta,r,x,y\n");
    for k in 0..n {
        let theta = PI * (k as f64 + 0.5) / n as f64;
        let r = leaf_boundary_radius(theta).expect("theta inside (0, pi)");
        let (x, y) = (r * theta.cos(), r * theta.sin());
        writeln!(out, "{theta:.12},{r:.12},{x:.12},{y:.12}").unwrap();
    }
    out
}

/// Verdict lattice for the sector example: one row per `(R, epsilon)`.
pub fn example1_csv(rows: &[crate::report::Example1Row]) -> String {
    let mut out = String::from("R,epsilon,verdict,threshold_epsilon\n");
    for row in rows {
        let verdict = match row.verdict {
            cara_core::Verdict::HoldsOnGrid => "holds_on_grid",
            cara_core::Verdict::Violated => "violated",
        };
        writeln!(
            out,
            "{:.6},{:.6},{},{:.6}",
            row.big_r, row.epsilon, verdict, row.threshold_epsilon
        )
        .unwrap();
    }
    out
}

/// Fixed-point sample table: `x, y, re_g, im_g`.
pub fn fixed_point_csv(samples: &[cara_core::fixed_point::FixedPointSample]) -> String {
    let mut out = String::from("x,y,re_g,im_g\n");
    for s in samples {
        writeln!(
            out,
            "{:.12},{:.12},{:.12},{:.12}",
            s.z.re, s.z.im, s.value.re, s.value.im
        )
        .unwrap();
    }
    out
}

fn svg_coord(v: f64) -> f64 {
    // viewBox maps [-1.2, 1.2] onto 600px; y axis flipped
    (v + 1.2) * 250.0
}

/// The leaf boundary and the unit circle as a standalone SVG 1.1 document.
pub fn leaf_svg() -> String {
    let mut points = Vec::with_capacity(2 * LEAF_SVG_SAMPLES + 3);
    // corner at +1, upper arc, corner at -1, mirrored lower arc, close
    points.push((1.0, 0.0));
    for k in 0..LEAF_SVG_SAMPLES {
        let theta = PI * (k as f64 + 0.5) / LEAF_SVG_SAMPLES as f64;
        let r = leaf_boundary_radius(theta).expect("theta inside (0, pi)");
        points.push((r * theta.cos(), r * theta.sin()));
    }
    points.push((-1.0, 0.0));
    for k in (0..LEAF_SVG_SAMPLES).rev() {
        let theta = PI * (k as f64 + 0.5) / LEAF_SVG_SAMPLES as f64;
        let r = leaf_boundary_radius(theta).expect("theta inside (0, pi)");
        points.push((r * theta.cos(), -r * theta.sin()));
    }
    points.push((1.0, 0.0));

    let mut polyline = String::new();
    for (x, y) in points {
        write!(polyline, "{:.4},{:.4} ", svg_coord(x), svg_coord(-y)).unwrap();
    }
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n",
    );
    writeln!(
        out,
        "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"250\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>",
        svg_coord(0.0),
        svg_coord(0.0)
    )
    .unwrap();
    writeln!(
        out,
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>",
        polyline.trim_end()
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

pub fn write_text(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, content)
}
