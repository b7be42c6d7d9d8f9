//! Minimal line plots written as bare SVG paths.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One polyline; `NaN` points split it into pieces.
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self { label: label.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

fn bounds(series: &[Series]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in series.iter().flat_map(|s| &s.points).filter(|p| p[0].is_finite() && p[1].is_finite()) {
        b = [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])];
    }
    if !b[0].is_finite() {
        return [0.0, 1.0, 0.0, 1.0];
    }
    for (lo, hi) in [(0, 1), (2, 3)] {
        if b[hi] - b[lo] < 1e-12 {
            b[lo] -= 0.5;
            b[hi] += 0.5;
        }
    }
    b
}

/// Renders the series on shared axes with a title and axis labels.
pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let [x0, x1, y0, y1] = bounds(series);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label)).unwrap();
    writeln!(out, r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})">{}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0, escape(y_label))
        .unwrap();
    for (label, x, y, anchor) in [
        (format!("{x0:.3}"), MARGIN, HEIGHT - MARGIN + 14.0, "start"),
        (format!("{x1:.3}"), WIDTH - MARGIN, HEIGHT - MARGIN + 14.0, "end"),
        (format!("{y0:.3}"), MARGIN - 4.0, HEIGHT - MARGIN, "end"),
        (format!("{y1:.3}"), MARGIN - 4.0, MARGIN + 10.0, "end"),
    ] {
        writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{label}</text>"#).unwrap();
    }
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for p in &s.points {
            if !(p[0].is_finite() && p[1].is_finite()) {
                pen_down = false;
                continue;
            }
            write!(d, "{}{:.2},{:.2} ", if pen_down { 'L' } else { 'M' }, sx(p[0]), sy(p[1])).unwrap();
            pen_down = true;
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(out, r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.2"{dash}><title>{}</title></path>"#, d.trim_end(), escape(&s.label))
            .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_split_the_path() {
        let s = Series::new("a<b", vec![[0.0, 0.0], [1.0, 1.0], [f64::NAN, 0.0], [2.0, 0.0], [3.0, 1.0]]);
        let svg = plot("t", "x", "y", &[s]);
        let path = svg.lines().find(|l| l.starts_with("<path")).unwrap();
        assert_eq!(path.matches('M').count(), 2);
        assert!(path.contains("a&lt;b"));
    }

    #[test]
    fn flat_data_still_has_a_range() {
        let svg = plot("t", "x", "y", &[Series::new("c", vec![[0.0, 1.0], [1.0, 1.0]])]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
