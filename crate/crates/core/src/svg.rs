//! Minimal SVG emitters for the plot-ready tables. Output is plain text and
//! fully deterministic.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

/// `4096 -> 4K`, `131072 -> 128K`, `1048576 -> 1M`; other values verbatim.
pub(crate) fn short_len(n: u64) -> String {
    if n >= 1 << 20 && n.is_multiple_of(1 << 20) {
        format!("{}M", n >> 20)
    } else if n >= 1024 && n.is_multiple_of(1024) {
        format!("{}K", n >> 10)
    } else {
        n.to_string()
    }
}

/// Blend an RGB colour with white; `depth` 1.0 is the pure colour.
pub(crate) fn mix_white(rgb: (u8, u8, u8), depth: f64) -> String {
    let d = depth.clamp(0.0, 1.0);
    let c = |v: u8| (255.0 - (255.0 - f64::from(v)) * d).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(rgb.0), c(rgb.1), c(rgb.2))
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

pub(crate) fn stacked_bars(title: &str, labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let (w, h, left, top, bottom) = (60 + 48 * labels.len().max(1) as u32 + 140, 360u32, 60u32, 30u32, 60u32);
    let plot_h = (h - top - bottom) as f64;
    let totals: Vec<f64> = (0..labels.len())
        .map(|i| series.iter().map(|(_, v)| v.get(i).copied().unwrap_or(0.0)).sum())
        .collect();
    let max = totals.iter().copied().fold(0.0, f64::max).max(1.0);
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, r#"<text x="{left}" y="18">{}</text>"#, escape(title));
    for (i, label) in labels.iter().enumerate() {
        let x = left + 48 * i as u32;
        let mut y = (h - bottom) as f64;
        for (s, (_, vals)) in series.iter().enumerate() {
            let v = vals.get(i).copied().unwrap_or(0.0);
            let bh = v / max * plot_h;
            y -= bh;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{y:.2}" width="40" height="{bh:.2}" fill="{}"/>"#,
                x + 4,
                PALETTE[s % PALETTE.len()]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x + 24,
            h - bottom + 16,
            escape(label)
        );
    }
    let lx = left + 48 * labels.len() as u32 + 16;
    for (s, (name, _)) in series.iter().enumerate() {
        let y = top + 16 * s as u32;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{y}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            PALETTE[s % PALETTE.len()],
            lx + 14,
            y + 9,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One cell of a coloured grid.
pub(crate) struct Cell {
    pub fill: String,
    pub text: String,
}

/// Grid of coloured cells with row and column labels. `marker_after`
/// draws a dashed vertical line after that column index.
pub(crate) fn grid(
    title: &str,
    col_labels: &[String],
    row_labels: &[String],
    cells: &[Vec<Cell>],
    marker_after: Option<usize>,
) -> String {
    let (cw, ch, left, top) = (56u32, 22u32, 110u32, 40u32);
    let w = left + cw * col_labels.len() as u32 + 20;
    let h = top + ch * row_labels.len() as u32 + 40;
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, r#"<text x="10" y="18">{}</text>"#, escape(title));
    for (j, label) in col_labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + cw * j as u32 + cw / 2,
            top - 6,
            escape(label)
        );
    }
    for (i, (label, row)) in row_labels.iter().zip(cells).enumerate() {
        let y = top + ch * i as u32;
        let _ = writeln!(out, r#"<text x="6" y="{}">{}</text>"#, y + 15, escape(label));
        for (j, cell) in row.iter().enumerate() {
            let x = left + cw * j as u32;
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{}" stroke="white"/>"#,
                cell.fill
            );
            if !cell.text.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                    x + cw / 2,
                    y + 15,
                    escape(&cell.text)
                );
            }
        }
    }
    if let Some(j) = marker_after {
        let x = left + cw * (j as u32 + 1);
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="white" stroke-width="3" stroke-dasharray="6,4"/>"#,
            top - 2,
            top + ch * row_labels.len() as u32 + 2
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Simple polyline chart; `x` values are plotted on a log axis when
/// `log_x` is set.
pub(crate) fn line_chart(title: &str, xs: &[f64], series: &[(String, Vec<f64>)], log_x: bool) -> String {
    let (w, h, left, top, right, bottom) = (520u32, 320u32, 60.0, 30.0, 140.0, 40.0);
    let tx = |x: f64| if log_x { x.max(1e-12).log10() } else { x };
    let (xmin, xmax) = xs
        .iter()
        .map(|&x| tx(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let pw = w as f64 - left - right;
    let ph = h as f64 - top - bottom;
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, r#"<text x="{left}" y="18">{}</text>"#, escape(title));
    for (s, (name, ys)) in series.iter().enumerate() {
        let (ymin, ymax) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        let yspan = if ymax > ymin { ymax - ymin } else { 1.0 };
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let px = left + (tx(x) - xmin) / span * pw;
                let py = top + ph - (y - ymin) / yspan * ph;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let colour = PALETTE[s % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 16.0 * s as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{ly}" width="10" height="10" fill="{colour}"/><text x="{}" y="{}">{}</text>"#,
            w as f64 - right + 10.0,
            w as f64 - right + 24.0,
            ly + 9.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_len_labels() {
        assert_eq!(short_len(4096), "4K");
        assert_eq!(short_len(131_072), "128K");
        assert_eq!(short_len(1 << 20), "1M");
        assert_eq!(short_len(1000), "1000");
    }
}
