//! Minimal self-rendered SVG charts. Output depends only on the input data.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        w / 2.0,
        escape(title)
    );
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Scatter plot with one `<circle>` per point.
pub fn scatter(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, W, H, title);
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1));
    let (pw, ph) = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * ph;

    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN:.1}" y="{MARGIN:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    for (i, (lx, ly)) in [(x0, y0), (x1, y1)].into_iter().enumerate() {
        let anchor = if i == 0 { "start" } else { "end" };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{lx:.3}</text>"#,
            px(lx),
            H - MARGIN + 14.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ly:.3}</text>"#,
            MARGIN - 4.0,
            py(ly) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    out.push_str("<g fill=\"steelblue\" fill-opacity=\"0.35\">\n");
    for &(x, y) in points {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, px(x), py(y));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Heatmap of a `rows × cols` matrix given row-major, dark = high. Each
/// cell is one `<rect>` inside the `cells` group.
pub fn heatmap(values: &[f64], rows: usize, cols: usize, title: &str, row_labels: &[String], col_labels: &[String]) -> String {
    assert_eq!(values.len(), rows * cols, "heatmap data does not match its shape");
    let cell = 28.0;
    let (w, h) = (2.0 * MARGIN + cols as f64 * cell, 2.0 * MARGIN + rows as f64 * cell);
    let mut out = String::new();
    header(&mut out, w.max(160.0), h, title);
    let (lo, hi) = range(values.iter().copied());
    out.push_str("<g id=\"cells\">\n");
    for r in 0..rows {
        for c in 0..cols {
            let v = values[r * cols + c];
            let shade = (255.0 * (1.0 - (v - lo) / (hi - lo))).round().clamp(0.0, 255.0) as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({shade},{shade},{shade})"><title>{v:.6}</title></rect>"#,
                MARGIN + c as f64 * cell,
                MARGIN + r as f64 * cell
            );
        }
    }
    out.push_str("</g>\n");
    for (r, label) in row_labels.iter().enumerate().take(rows) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            MARGIN + (r as f64 + 0.6) * cell,
            escape(label)
        );
    }
    for (c, label) in col_labels.iter().enumerate().take(cols) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN + (c as f64 + 0.5) * cell,
            MARGIN - 6.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}
