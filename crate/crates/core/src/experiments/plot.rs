use std::path::Path;

use crate::error::{Error, Result};
use crate::scaling::linear_fit;

/// One named point series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

/// Axes configuration for [`emit_plot`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxesSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Overlay a least-squares line per series (needs ≥ 3 points) with the
    /// slope annotated in display space.
    pub fit_line: bool,
}

impl AxesSpec {
    pub fn linear(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            fit_line: false,
        }
    }

    pub fn loglog(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { log_x: true, log_y: true, fit_line: true, ..Self::linear(title, x_label, y_label) }
    }

    pub fn with_fit(mut self) -> Self {
        self.fit_line = true;
        self
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

const COLORS: [&str; 4] = ["#4682b4", "#e07b39", "#2e8b57", "#c23b4b"];

/// Format a slope annotation; kept in one place so plot text and fit output
/// agree exactly.
pub fn format_slope(slope: f64) -> String {
    format!("slope = {slope:.4}")
}

/// Write a standalone SVG scatter plot, optionally on logged axes and with
/// per-series fitted lines.
pub fn emit_plot(series: &[Series], axes: &AxesSpec, path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Domain("plot needs at least one series".into()));
    }
    for s in series {
        if s.points.is_empty() {
            return Err(Error::Domain(format!("series {:?} has no points", s.label)));
        }
    }

    let tx = |x: f64| -> Result<f64> {
        if axes.log_x {
            if x <= 0.0 {
                return Err(Error::Domain(format!("log x-axis needs positive values, got {x}")));
            }
            Ok(x.log10())
        } else {
            Ok(x)
        }
    };
    let ty = |y: f64| -> Result<f64> {
        if axes.log_y {
            if y <= 0.0 {
                return Err(Error::Domain(format!("log y-axis needs positive values, got {y}")));
            }
            Ok(y.log10())
        } else {
            Ok(y)
        }
    };

    // Transform all points up front; ranges come from display space.
    let mut transformed: Vec<Vec<(f64, f64)>> = Vec::with_capacity(series.len());
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        let mut pts = Vec::with_capacity(s.points.len());
        for &(x, y) in &s.points {
            let (u, v) = (tx(x)?, ty(y)?);
            x_min = x_min.min(u);
            x_max = x_max.max(u);
            y_min = y_min.min(v);
            y_max = y_max.max(v);
            pts.push((u, v));
        }
        transformed.push(pts);
    }
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad_x = 0.05 * (x_max - x_min);
    let pad_y = 0.05 * (y_max - y_min);
    x_min -= pad_x;
    x_max += pad_x;
    y_min -= pad_y;
    y_max += pad_y;

    let sx = (WIDTH - MARGIN_L - MARGIN_R) / (x_max - x_min);
    let sy = (HEIGHT - MARGIN_T - MARGIN_B) / (y_max - y_min);
    let px = |u: f64| MARGIN_L + (u - x_min) * sx;
    let py = |v: f64| HEIGHT - MARGIN_B - (v - y_min) * sy;

    let mut svg = String::with_capacity(8192);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(&axes.title)
    ));

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L:.2}\" y=\"{MARGIN_T:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));

    // ticks and labels
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let u = x_min + f * (x_max - x_min);
        let v = y_min + f * (y_max - y_min);
        let x_px = px(u);
        let y_px = py(v);
        let x_val = if axes.log_x { 10f64.powf(u) } else { u };
        let y_val = if axes.log_y { 10f64.powf(v) } else { v };
        svg.push_str(&format!(
            "<line x1=\"{x_px:.2}\" y1=\"{:.2}\" x2=\"{x_px:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x_px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            format_tick(x_val)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y_px:.2}\" x2=\"{MARGIN_L:.2}\" y2=\"{y_px:.2}\" stroke=\"#333\"/>\n",
            MARGIN_L - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            MARGIN_L - 8.0,
            y_px + 4.0,
            format_tick(y_val)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        xml_escape(&axes.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        xml_escape(&axes.y_label)
    ));

    // series markers, fit lines, legend
    for (si, pts) in transformed.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        for &(u, v) in pts {
            svg.push_str(&marker(si, px(u), py(v), color));
        }
        if axes.fit_line && pts.len() >= 3 {
            if let Ok(fit) = linear_fit(pts) {
                let u0 = x_min + pad_x;
                let u1 = x_max - pad_x;
                let v0 = fit.intercept + fit.slope * u0;
                let v1 = fit.intercept + fit.slope * u1;
                svg.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" \
                     stroke-dasharray=\"6 3\"/>\n",
                    px(u0),
                    py(v0),
                    px(u1),
                    py(v1)
                ));
                svg.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
                     font-size=\"12\" fill=\"{color}\">{}</text>\n",
                    px(u1) - 4.0,
                    py(v1) - 6.0,
                    format_slope(fit.slope)
                ));
            }
        }
    }
    if series.len() >= 2 {
        let lx = WIDTH - MARGIN_R - 170.0;
        let mut ly = MARGIN_T + 14.0;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"162\" height=\"{}\" fill=\"white\" \
             stroke=\"#999\"/>\n",
            lx - 6.0,
            ly - 12.0,
            series.len() * 18 + 8
        ));
        for (si, s) in series.iter().enumerate() {
            let color = COLORS[si % COLORS.len()];
            svg.push_str(&marker(si, lx + 6.0, ly, color));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                lx + 18.0,
                ly + 4.0,
                xml_escape(&s.label)
            ));
            ly += 18.0;
        }
    }
    svg.push_str("</svg>\n");

    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

fn marker(series_index: usize, x: f64, y: f64, color: &str) -> String {
    match series_index % 4 {
        0 => format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{color}\"/>\n"),
        1 => format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"7\" height=\"7\" fill=\"{color}\"/>\n",
            x - 3.5,
            y - 3.5
        ),
        2 => format!(
            "<polygon points=\"{x:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{color}\"/>\n",
            y - 4.5,
            x - 4.0,
            y + 3.5,
            x + 4.0,
            y + 3.5
        ),
        _ => format!(
            "<polygon points=\"{x:.2},{:.2} {:.2},{y:.2} {x:.2},{:.2} {:.2},{y:.2}\" \
             fill=\"{color}\"/>\n",
            y - 4.5,
            x + 4.5,
            y + 4.5,
            x - 4.5
        ),
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.svg");
        assert!(matches!(
            emit_plot(&[], &AxesSpec::linear("t", "x", "y"), &path),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            emit_plot(&[Series::new("empty", vec![])], &AxesSpec::linear("t", "x", "y"), &path),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn single_point_yields_svg_without_fit_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.svg");
        let axes = AxesSpec::linear("single", "x", "y").with_fit();
        emit_plot(&[Series::new("s", vec![(1.0, 2.0)])], &axes, &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(!svg.contains("slope ="));
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn power_law_fit_annotation_matches_regression() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.svg");
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 3.0 * (i as f64).powf(0.75))).collect();
        emit_plot(&[Series::new("law", pts.clone())], &AxesSpec::loglog("t", "x", "y"), &path)
            .unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        let fit = crate::scaling::loglog_fit(&pts).unwrap();
        // same formatting, same number: plot annotation quotes the fit
        assert!(svg.contains(&format_slope(fit.slope)));
        assert!(svg.contains("slope = 0.7500"));
    }

    #[test]
    fn two_series_get_legend_and_distinct_markers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("two.svg");
        let a = Series::new("alpha", vec![(1.0, 1.0), (2.0, 2.0)]);
        let b = Series::new("beta", vec![(1.0, 2.0), (2.0, 4.0)]);
        emit_plot(&[a, b], &AxesSpec::linear("t", "x", "y"), &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.contains("alpha") && svg.contains("beta"));
        assert!(svg.contains("<circle") && svg.contains("<rect x="));
    }

    #[test]
    fn log_axes_reject_nonpositive_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.svg");
        let s = Series::new("s", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]);
        assert!(matches!(
            emit_plot(&[s], &AxesSpec::loglog("t", "x", "y"), &path),
            Err(Error::Domain(_))
        ));
    }
}
