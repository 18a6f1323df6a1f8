//! Result tables, CSV serialisation and SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep_var,variant,sum_rate_bps,user_rates_bps";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: f64,
    pub variant: String,
    pub sum_rate_bps: f64,
    pub per_user_rates_bps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Order rows by variant label, then sweep variable.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.variant
                .cmp(&b.variant)
                .then(a.sweep_var.total_cmp(&b.sweep_var))
        });
    }

    /// Variant labels in first-appearance order.
    pub fn variants(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.variant.as_str()) {
                out.push(&r.variant);
            }
        }
        out
    }

    /// `(sweep_var, sum_rate)` pairs of one variant in row order.
    pub fn series(&self, variant: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| (r.sweep_var, r.sum_rate_bps))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let users: Vec<String> = r
                .per_user_rates_bps
                .iter()
                .map(|v| format!("{v:.9e}"))
                .collect();
            let _ = writeln!(
                s,
                "{},{},{:.9e},{}",
                r.sweep_var,
                r.variant,
                r.sum_rate_bps,
                users.join(";")
            );
        }
        s
    }
}

pub fn write_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

/// Axis labels and title for [`render_svg`].
#[derive(Debug, Clone)]
pub struct PlotLabels {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Sum rate in Gbit/s against the sweep variable, one polyline per variant.
pub fn render_svg(table: &ResultTable, labels: &PlotLabels) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 130.0, 40.0, 55.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let xs = table.rows.iter().map(|r| r.sweep_var);
    let ys = table.rows.iter().map(|r| r.sum_rate_bps / 1e9);
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let y1 = ys.fold(0.0f64, f64::max);
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - y / y1 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(&labels.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x = x0 + f * (x1 - x0);
        let y = f * y1;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="lightgray"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4}</text>"#,
            sx(x),
            top,
            top + ph,
            top + ph + 16.0,
            tick(x)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="lightgray"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5}</text>"#,
            left,
            sy(y),
            left + pw,
            left - 6.0,
            sy(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(&labels.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">{1}</text>"#,
        top + ph / 2.0,
        escape(&labels.y_label)
    );
    for (i, v) in table.variants().into_iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = table
            .series(v)
            .into_iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y / 1e9)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            points.join(" ")
        );
        for p in &points {
            let (px, py) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(s, r#"<circle cx="{px}" cy="{py}" r="3" fill="{colour}"/>"#);
        }
        let ly = top + 16.0 + 20.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(v)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(table: &ResultTable, labels: &PlotLabels, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(table, labels)).map_err(|e| Error::io(path, e))
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
