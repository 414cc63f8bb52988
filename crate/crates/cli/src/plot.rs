//! Minimal SVG line plots of CSV tables: the first column against every other
//! numeric column.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `None` when the table has no finite point to draw.
pub fn line_plot(csv: &str, title: &str) -> Option<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header: Vec<&str> = lines.next()?.split(',').collect();
    let rows: Vec<Vec<Option<f64>>> = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect()
        })
        .collect();
    let series: Vec<(usize, Vec<(f64, f64)>)> = (1..header.len())
        .map(|j| {
            let pts = rows
                .iter()
                .filter_map(|r| Some((r.first().copied()??, r.get(j).copied()??)))
                .collect::<Vec<_>>();
            (j, pts)
        })
        .filter(|(_, pts)| !pts.is_empty())
        .collect();
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    // degenerate ranges get a unit span so every point stays on the canvas
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (label, x, y, anchor) in [
        (format!("{x0:.4e}"), MARGIN, HEIGHT - MARGIN + 16.0, "start"),
        (format!("{x1:.4e}"), WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "end"),
        (format!("{y0:.4e}"), MARGIN - 4.0, HEIGHT - MARGIN, "end"),
        (format!("{y1:.4e}"), MARGIN - 4.0, MARGIN + 8.0, "end"),
        (escape(header[0]), WIDTH / 2.0, HEIGHT - 12.0, "middle"),
    ] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{label}</text>"#);
    }
    for (i, (j, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            escape(header[*j])
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}
