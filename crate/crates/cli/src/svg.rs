//! Minimal SVG 1.1 scatter and line plots.
//!
//! Output depends only on the inputs, so repeated runs produce identical
//! files.

use std::fmt::Write as _;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn palette(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Smallest range covering `values`, padded by 5% on each side.
    pub fn covering(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.into_iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            return Self::new(0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            return Self::new(lo - 0.5, hi + 0.5);
        }
        let pad = 0.05 * (hi - lo);
        Self::new(lo - pad, hi + pad)
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Range,
    pub y: Range,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: Range, y: Range) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
        }
    }

    fn px(&self, v: f64) -> f64 {
        self.x.map(v, MARGIN, WIDTH - MARGIN / 2.0)
    }

    fn py(&self, v: f64) -> f64 {
        self.y.map(v, HEIGHT - MARGIN, MARGIN / 2.0)
    }

    fn open(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (x0, x1) = (self.px(self.x.lo), self.px(self.x.hi));
        let (y0, y1) = (self.py(self.y.lo), self.py(self.y.hi));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="16" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 12 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        for (v, x, anchor) in [(self.x.lo, x0, "start"), (self.x.hi, x1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}" font-size="10">{}</text>"#,
                y0 + 14.0,
                tick(v)
            );
        }
        for (v, y) in [(self.y.lo, y0), (self.y.hi, y1 + 10.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="10">{}</text>"#,
                x0 - 4.0,
                tick(v)
            );
        }
        s
    }

    /// Scatter plot; `class` picks the palette color of each point.
    pub fn scatter(&self, points: &[(f64, f64, usize)]) -> String {
        let mut s = self.open();
        s.push_str("<g stroke=\"none\" fill-opacity=\"0.7\">\n");
        for &(x, y, class) in points {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}"/>"#,
                self.px(x),
                self.py(y),
                palette(class)
            );
        }
        s.push_str("</g>\n</svg>\n");
        s
    }

    /// Line plot with a legend entry per series.
    pub fn lines(&self, series: &[(&str, &[(f64, f64)])]) -> String {
        let mut s = self.open();
        for (i, (name, pts)) in series.iter().enumerate() {
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                palette(i),
                path.join(" ")
            );
            let ly = MARGIN / 2.0 + 14.0 * (i as f64 + 1.0);
            let lx = MARGIN + 8.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
                ly - 4.0,
                lx + 16.0,
                ly - 4.0,
                palette(i)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ly:.2}" font-size="10">{}</text>"#,
                lx + 20.0,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Bins `values` into `bins` equal-width classes over their range.
pub fn quantize(values: &[f64], bins: usize) -> Vec<usize> {
    let r = Range::covering(values.iter().copied());
    values
        .iter()
        .map(|&v| {
            let k = ((v - r.lo) / (r.hi - r.lo) * bins as f64).floor();
            (k.max(0.0) as usize).min(bins.saturating_sub(1))
        })
        .collect()
}
