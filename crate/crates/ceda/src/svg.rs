//! Minimal static SVG output: a grayscale MCE heatmap and an odds dot plot.

use std::fmt::Write;

use ceda_core::odds::LocalityOdds;
use ceda_core::MceMatrix;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Cells in leaf order; black is 0, white is 1.
pub fn heatmap(m: &MceMatrix) -> String {
    let k = m.order.len();
    let (cell, margin) = (24usize, 80usize);
    let size = margin + k * cell + 10;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="10">"#
    );
    for (r, &i) in m.order.iter().enumerate() {
        let y = margin + r * cell;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            margin - 4,
            y + cell / 2 + 3,
            esc(&m.names[i])
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" transform="rotate(-90 {} {})">{}</text>"#,
            y + cell / 2 + 3,
            margin - 4,
            y + cell / 2 + 3,
            margin - 4,
            esc(&m.names[i])
        );
        for (c, &j) in m.order.iter().enumerate() {
            let g = (m.values[i][j].clamp(0.0, 1.0) * 255.0).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{cell}" height="{cell}" fill="rgb({g},{g},{g})"><title>{} / {}: {:.4}</title></rect>"#,
                margin + c * cell,
                esc(&m.names[i]),
                esc(&m.names[j]),
                m.values[i][j]
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: &[&str] = &[
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

/// Odds (y) per locality (x), one colour per expansion category.
pub fn odds_dot_plot(rows: &[LocalityOdds]) -> String {
    let mut locs: Vec<&str> = Vec::new();
    let mut exps: Vec<&str> = Vec::new();
    for r in rows {
        if !locs.contains(&r.locality.as_str()) {
            locs.push(&r.locality);
        }
        if !exps.contains(&r.expansion.as_str()) {
            exps.push(&r.expansion);
        }
    }
    let finite = rows.iter().map(|r| r.row.odds).filter(|o| o.is_finite());
    let ymax = finite.fold(0.0f64, f64::max).max(1e-9);
    let (w, h, left, bottom) = (60 + locs.len() * 16, 320usize, 50usize, 60usize);
    let plot_h = (h - bottom - 20) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{h}" font-family="sans-serif" font-size="10">"#,
        w + 100
    );
    let y0 = h - bottom;
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        left + locs.len() * 16
    );
    let _ = writeln!(s, r#"<line x1="{left}" y1="20" x2="{left}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="end">{:.3}</text>"#,
        left - 4,
        ymax
    );
    let _ = writeln!(s, r#"<text x="{}" y="{y0}" text-anchor="end">0</text>"#, left - 4);
    for (i, l) in locs.iter().enumerate() {
        let x = left + 8 + i * 16;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" transform="rotate(90 {x} {})">{}</text>"#,
            y0 + 6,
            y0 + 6,
            esc(l)
        );
    }
    for r in rows.iter().filter(|r| r.row.odds.is_finite()) {
        let xi = locs.iter().position(|l| *l == r.locality).unwrap_or(0);
        let col = PALETTE[exps.iter().position(|e| *e == r.expansion).unwrap_or(0) % PALETTE.len()];
        let y = y0 as f64 - r.row.odds / ymax * plot_h;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{y:.2}" r="3" fill="{col}"><title>{} / {}: {:.4}</title></circle>"#,
            left + 8 + xi * 16,
            esc(&r.locality),
            esc(&r.expansion),
            r.row.odds
        );
    }
    for (k, e) in exps.iter().enumerate() {
        let y = 30 + k * 14;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{y}" r="4" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            w + 20,
            PALETTE[k % PALETTE.len()],
            w + 28,
            y + 3,
            esc(e)
        );
    }
    s.push_str("</svg>\n");
    s
}
