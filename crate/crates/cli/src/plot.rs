//! Dependency-free SVG rendering of a numerical range boundary.

use std::fmt::Write as _;

use mrk_core::matrix::C64;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// Closed boundary polyline with eigenvalues as markers. The y axis points up.
pub fn range_svg(boundary: &[C64], eigenvalues: &[C64]) -> String {
    let all = boundary.iter().chain(eigenvalues);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    // A degenerate range (a point or segment) still gets a square frame.
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |z: &C64| (SIZE / 2.0 + (z.re - cx) * scale, SIZE / 2.0 - (z.im - cy) * scale);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push('\n');
    let pts: Vec<String> = boundary
        .iter()
        .map(|z| {
            let (x, y) = map(z);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    writeln!(
        svg,
        r##"<polygon points="{}" fill="#dde8f5" stroke="#1f4e8c" stroke-width="1.5"/>"##,
        pts.join(" ")
    )
    .unwrap();
    for z in eigenvalues {
        let (x, y) = map(z);
        writeln!(svg, r##"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="#c0392b"/>"##).unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
