//! Plain polyline plots of orbit projections.

use std::fmt::Write as _;

pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    XY,
    XZ,
    YZ,
}

impl Projection {
    pub const ALL: [Projection; 3] = [Projection::XY, Projection::XZ, Projection::YZ];

    fn axes(self) -> (usize, usize) {
        match self {
            Projection::XY => (0, 1),
            Projection::XZ => (0, 2),
            Projection::YZ => (1, 2),
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Projection::XY => "xy",
            Projection::XZ => "xz",
            Projection::YZ => "yz",
        }
    }

    fn labels(self) -> (&'static str, &'static str) {
        match self {
            Projection::XY => ("X", "Y"),
            Projection::XZ => ("X", "Z"),
            Projection::YZ => ("Y", "Z"),
        }
    }
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub points: &'a [[f64; 3]],
}

/// Equal-aspect plot of the curves in one projection. Degenerate extents
/// (a planar orbit seen edge-on) are padded so the document stays valid.
pub fn render(projection: Projection, curves: &[Curve<'_>]) -> String {
    let (a, b) = projection.axes();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in curves.iter().flat_map(|c| c.points.iter()) {
        for (k, axis) in [a, b].into_iter().enumerate() {
            if p[axis].is_finite() {
                lo[k] = lo[k].min(p[axis]);
                hi[k] = hi[k].max(p[axis]);
            }
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let to_px = |u: f64, v: f64| (0.5 * SIZE + (u - center[0]) * scale, 0.5 * SIZE - (v - center[1]) * scale);

    let (xl, yl) = projection.labels();
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800" width="800" height="800">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="800" height="800" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="400" y="790" text-anchor="middle" font-size="14">{xl}</text>"#);
    let _ = writeln!(out, r#"<text x="12" y="400" font-size="14">{yl}</text>"#);
    for (i, curve) in curves.iter().enumerate() {
        let mut pts = String::new();
        for p in curve.points.iter().filter(|p| p[a].is_finite() && p[b].is_finite()) {
            let (x, y) = to_px(p[a], p[b]);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            pts.trim_end(),
            escape(curve.label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="13" fill="{color}">{}</text>"#,
            MARGIN,
            20.0 + 16.0 * i as f64,
            escape(curve.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
