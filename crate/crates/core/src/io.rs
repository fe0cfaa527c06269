//! Plain-text artifacts: CSV tables and standalone SVG line plots.

use std::fmt::Write as _;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// Quotes a CSV field when it contains a comma, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A CSV document with CRLF-free lines and quoted fields.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = String>| {
        let v: Vec<String> = cells.map(|c| csv_field(&c)).collect();
        out.push_str(&v.join(","));
        out.push('\n');
    };
    line(&mut out, &mut header.iter().map(|s| s.to_string()));
    for r in rows {
        line(&mut out, &mut r.iter().cloned());
    }
    out
}

/// One line of the solver summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub level: String,
    pub dofs: usize,
    pub iter: usize,
    pub seconds: f64,
}

/// `level,dofs,iter,seconds` in the given row order.
pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("summary table needs at least one row".into()));
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.level.clone(), r.dofs.to_string(), r.iter.to_string(), format!("{:.6}", r.seconds)])
        .collect();
    Ok(csv(&["level", "dofs", "iter", "seconds"], &body))
}

/// `index,re,im`.
pub fn vector_csv(v: &[c64]) -> String {
    let rows: Vec<Vec<String>> = v.iter().enumerate().map(|(i, z)| vec![i.to_string(), z.re.to_string(), z.im.to_string()]).collect();
    csv(&["index", "re", "im"], &rows)
}

/// `iteration,residual,relative` for a residual history.
pub fn residuals_csv(history: &[f64]) -> String {
    let r0 = history.first().copied().unwrap_or(1.0);
    let rows: Vec<Vec<String>> = history
        .iter()
        .enumerate()
        .map(|(k, r)| vec![k.to_string(), r.to_string(), (r / r0).to_string()])
        .collect();
    csv(&["iteration", "residual", "relative"], &rows)
}

/// Columns sharing one abscissa.
pub fn columns_csv(x_name: &str, x: &[f64], columns: &[(&str, &[f64])]) -> Result<String> {
    if let Some((name, c)) = columns.iter().find(|(_, c)| c.len() != x.len()) {
        return Err(Error::Config(format!("column {name} has {} values, expected {}", c.len(), x.len())));
    }
    let mut header = vec![x_name];
    header.extend(columns.iter().map(|(n, _)| *n));
    let rows: Vec<Vec<String>> = (0..x.len())
        .map(|k| std::iter::once(x[k]).chain(columns.iter().map(|(_, c)| c[k])).map(|v| v.to_string()).collect())
        .collect();
    Ok(csv(&header, &rows))
}

/// One polyline of a plot.
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A standalone SVG line plot with axes, tick labels and a legend.
/// Non-finite points (and non-positive ones on a log axis) are skipped.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], y_scale: Scale) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 20.0, 40.0, 50.0);
    let fy = |y: f64| match y_scale {
        Scale::Linear => y,
        Scale::Log => y.log10(),
    };
    let pts = |s: &Series| -> Vec<(f64, f64)> {
        s.x.iter().zip(s.y).map(|(&x, &y)| (x, fy(y))).filter(|(x, y)| x.is_finite() && y.is_finite()).collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(pts).collect();
    let bounds = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = bounds(&mut all.iter().map(|p| p.0));
    let (y0, y1) = bounds(&mut all.iter().map(|p| p.1));
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{ml},{mt} L{ml},{} L{},{}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr,
        h - mb
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylab = match y_scale {
            Scale::Linear => format!("{yv:.3}"),
            Scale::Log => format!("1e{yv:.1}"),
        };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{xv:.3}</text>"#, px(xv), h - mb + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{ylab}</text>"#, ml - 6.0, py(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ml + w - mr) / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts(ser).iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = mt + 8.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - mr - 150.0, w - mr - 130.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr - 125.0, ly + 4.0, escape(ser.label));
    }
    s.push_str("</svg>\n");
    s
}
