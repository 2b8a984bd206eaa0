//! SVG line charts of QE against image index.
//!
//! Output is a pure function of the input: fixed canvas, fixed palette and
//! two-decimal coordinates, so identical series give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::series::QeSeriesReport;
use crate::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const Y_TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub values: Vec<f64>,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        PlotSeries { label: label.into(), values }
    }

    pub fn from_report(label: impl Into<String>, report: &QeSeriesReport) -> Self {
        PlotSeries::new(label, report.qe_values())
    }
}

/// Renders the chart. Series with a single value get a marker but no line.
pub fn render_svg(series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.values.is_empty()) {
        return Err(Error::Series("nothing to plot".into()));
    }
    if series.iter().flat_map(|s| &s.values).any(|v| !v.is_finite()) {
        return Err(Error::Series("cannot plot non-finite values".into()));
    }
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let lo = series.iter().flat_map(|s| &s.values).copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().flat_map(|s| &s.values).copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { (hi - lo) * 0.05 } else { lo.abs().max(1.0) * 0.05 };
    let (y0, y1) = (lo - pad, hi + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |i: usize| {
        if n <= 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_of = |v: f64| TOP + plot_h * (y1 - v) / (y1 - y0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (ax_x, ax_y) = (LEFT, TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<path d="M{:.2} {:.2}V{:.2}H{:.2}" fill="none" stroke="black"/>"#,
        ax_x,
        TOP,
        ax_y,
        LEFT + plot_w
    );

    for k in 0..=Y_TICKS {
        let v = y0 + (y1 - y0) * k as f64 / Y_TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{ax_x:.2}" y2="{y:.2}" stroke="black"/>"#, ax_x - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, ax_x - 8.0, y + 4.0);
    }
    let x_step = (n / 10).max(1);
    for i in (0..n).step_by(x_step) {
        let x = x_of(i);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{ax_y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, ax_y + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#, ax_y + 20.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">image index</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">QE</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (s_idx, s) in series.iter().enumerate() {
        let color = PALETTE[s_idx % PALETTE.len()];
        let label = escape(&s.label);
        let _ = writeln!(svg, r#"<g class="series" data-label="{label}">"#);
        if s.values.len() >= 2 {
            let points: Vec<String> =
                s.values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x_of(i), y_of(v))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                points.join(" ")
            );
        }
        for (i, &v) in s.values.iter().enumerate() {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x_of(i), y_of(v));
        }
        let ly = TOP + 10.0 + 20.0 * s_idx as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect class="legend" x="{lx:.2}" y="{:.2}" width="14" height="4" fill="{color}"/>"#,
            ly - 2.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 20.0, ly + 4.0);
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(series: &[PlotSeries], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(series)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_one_marker_and_no_line() {
        let svg = render_svg(&[PlotSeries::new("one", vec![3.5])]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn byte_stable() {
        let s = [PlotSeries::new("a", vec![1.0, 2.0, 1.5]), PlotSeries::new("b", vec![0.5, 0.7])];
        assert_eq!(render_svg(&s).unwrap(), render_svg(&s).unwrap());
    }

    #[test]
    fn labels_axes_and_legend() {
        let svg = render_svg(&[PlotSeries::new("x<y", vec![1.0, 2.0])]).unwrap();
        assert!(svg.contains(">image index<") && svg.contains(">QE<"));
        assert!(svg.contains("x&lt;y"));
        assert_eq!(svg.matches(r#"class="legend""#).count(), 1);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(render_svg(&[]).is_err());
        assert!(render_svg(&[PlotSeries::new("e", vec![])]).is_err());
        assert!(render_svg(&[PlotSeries::new("n", vec![f64::NAN])]).is_err());
    }
}
