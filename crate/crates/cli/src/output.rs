//! CSV, JSON and SVG emission. Floats go through the shortest round-trip
//! formatting so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use douba::measures::io::format_float;
use serde::Serialize;

/// Writes a CSV with the given header; each row is already a list of fields.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

pub fn f(v: f64) -> String {
    format_float(v)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Heatmap of `values[i][j]` over `xs[i] × ys[j]` with a polyline overlay,
/// on a linear gray scale from the minimum (black) to the maximum (white).
pub fn heatmap_svg(xs: &[f64], ys: &[f64], values: &[Vec<f64>], curve: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, pad) = (480.0, 400.0, 50.0);
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    let (y0, y1) = (ys[0], *ys.last().unwrap());
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let px = |x: f64| pad + (x - x0) / span(x0, x1) * w;
    let py = |y: f64| pad + h - (y - y0) / span(y0, y1) * h;
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let cw = w / xs.len() as f64;
    let ch = h / ys.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
        w + 2.0 * pad,
        h + 2.0 * pad
    );
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            let g = (255.0 * t.clamp(0.0, 1.0)).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                pad + i as f64 * cw,
                pad + h - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let points: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y.clamp(y0, y1)))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#, points.join(" "));
    let _ = writeln!(s, r#"<rect x="{pad}" y="{pad}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, pad + w / 2.0, h + pad + 35.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        pad + h / 2.0,
        pad + h / 2.0
    );
    for (v, x, y, anchor) in [(x0, px(x0), h + pad + 15.0, "start"), (x1, px(x1), h + pad + 15.0, "end")] {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{v}</text>"#);
    }
    for (v, y) in [(y0, py(y0)), (y1, py(y1) + 10.0)] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{v}</text>"#, pad - 5.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_rect_per_cell() {
        let s = heatmap_svg(&[0.0, 1.0], &[0.0, 0.5, 1.0], &[vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]], &[(0.0, 0.0), (1.0, 0.5)], "λ", "τ");
        assert_eq!(s.matches("fill=\"rgb(").count(), 6);
        assert!(s.contains("rgb(0,0,0)") && s.contains("rgb(255,255,255)"));
        assert!(s.trim_end().ends_with("</svg>"));
    }
}
