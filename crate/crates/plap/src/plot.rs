//! Minimal standalone SVG line plots.
//!
//! Output depends only on the input values (no timestamps, no hash-map
//! ordering), so identical series produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
    /// Draw a dot at every point as well as the line.
    pub markers: bool,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            width: 640,
            height: 420,
            markers: false,
        }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    ticks: Vec<(f64, String)>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if log {
            let (a, b) = (lo.floor(), hi.ceil());
            let (a, b) = if a == b { (a - 1.0, b + 1.0) } else { (a, b) };
            let ticks = (a as i32..=b as i32).map(|k| (k as f64, format!("1e{k}"))).collect();
            return Axis { log, lo: a, hi: b, ticks };
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        let step = nice_step((hi - lo) / 5.0);
        let (a, b) = ((lo / step).floor(), (hi / step).ceil());
        let dec = (-step.log10().floor()).max(0.0) as usize;
        let ticks = (a as i64..=b as i64)
            .map(|k| {
                let v = k as f64 * step;
                let s = format!("{:.*}", dec, v);
                (v, if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') { s[1..].to_string() } else { s })
            })
            .collect();
        Axis { log, lo: a * step, hi: b * step, ticks }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        from + (t - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn nice_step(raw: f64) -> f64 {
    let e = 10f64.powf(raw.log10().floor());
    let m = raw / e;
    let n = if m <= 1.0 {
        1.0
    } else if m <= 2.0 {
        2.0
    } else if m <= 5.0 {
        5.0
    } else {
        10.0
    };
    n * e
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders to an SVG string. Points that are non-finite, or nonpositive on
/// a log axis, are dropped.
pub fn render_svg(series: &[Series], style: &PlotStyle) -> Result<String> {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!style.log_x || x > 0.0) && (!style.log_y || y > 0.0);
    let clean: Vec<Vec<(f64, f64)>> = series.iter().map(|s| s.points.iter().copied().filter(keep).collect()).collect();
    if clean.iter().all(|p| p.is_empty()) {
        return Err(Error::EmptySeries);
    }
    let xa = Axis::new(clean.iter().flatten().map(|p| p.0), style.log_x);
    let ya = Axis::new(clean.iter().flatten().map(|p| p.1), style.log_y);
    let (w, h) = (style.width as f64, style.height as f64);
    let (x0, x1, y0, y1) = (MARGIN_L, w - MARGIN_R, h - MARGIN_B, MARGIN_T);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#, style.width, style.height, style.width, style.height);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, style.width, style.height);
    if !style.title.is_empty() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&style.title));
    }
    let _ = writeln!(s, r#"<g class="axes" stroke="black" fill="none"><rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/></g>"#, x1 - x0, y0 - y1);

    let _ = writeln!(s, r#"<g class="xticks" text-anchor="middle">"#);
    for (v, label) in &xa.ticks {
        let px = x0 + (v - xa.lo) / (xa.hi - xa.lo) * (x1 - x0);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}">{}</text>"#, y0 + 5.0, y0 + 18.0, escape(label));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="yticks" text-anchor="end">"#);
    for (v, label) in &ya.ticks {
        let py = y0 + (v - ya.lo) / (ya.hi - ya.lo) * (y1 - y0);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}">{}</text>"#, x0 - 5.0, x0 - 8.0, py + 4.0, escape(label));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, h - 12.0, escape(&style.x_label));
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0, escape(&style.y_label));

    for (k, pts) in clean.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", xa.map(x, x0, x1), ya.map(y, y0, y1))).collect();
        if pts.len() >= 2 {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        }
        if style.markers || pts.len() == 1 {
            for &(x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, xa.map(x, x0, x1), ya.map(y, y0, y1));
            }
        }
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, ser) in series.iter().enumerate() {
        let ly = y1 + 14.0 + 16.0 * k as f64;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#, x1 - 150.0, ly - 4.0, x1 - 130.0, ly - 4.0, x1 - 125.0, ly, escape(&ser.name));
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_plot(series: &[Series], style: &PlotStyle, path: &Path) -> Result<()> {
    fs::write(path, render_svg(series, style)?)?;
    Ok(())
}
