//! Two-panel line plot of Ψ′ and Ψ.

use std::fmt::Write;

use leewave_core::vorticity::{Figure1Row, PsiAnalysis};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 60.0;

struct Panel<'a> {
    title: &'a str,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn draw(svg: &mut String, panel: &Panel, left: f64, x1: f64) {
    let (x_lo, x_hi) = bounds(&panel.x);
    let (y_lo, y_hi) = bounds(&panel.y);
    let top = MARGIN * 0.5;
    let px = |x: f64| left + MARGIN + (x - x_lo) / (x_hi - x_lo) * (PANEL_W - 1.5 * MARGIN);
    let py = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * (PANEL_H - 1.5 * MARGIN);
    let (ax, ay) = (px(x_lo), py(y_lo));
    let _ = writeln!(
        svg,
        r#"<path d="M{ax:.1},{top:.1} V{ay:.1} H{:.1}" fill="none" stroke="black"/>"#,
        px(x_hi)
    );
    let points: Vec<String> = panel
        .x
        .iter()
        .zip(&panel.y)
        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points.join(" ")
    );
    if (x_lo..=x_hi).contains(&x1) {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.1}" y1="{top:.1}" x2="{0:.1}" y2="{ay:.1}" stroke="gray" stroke-dasharray="4 3"/><text x="{0:.1}" y="{1:.1}" font-size="11" text-anchor="middle">X1</text>"#,
            px(x1),
            top - 4.0
        );
    }
    if (y_lo..=y_hi).contains(&0.0) {
        let _ = writeln!(
            svg,
            r#"<line x1="{ax:.1}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="lightgray"/>"#,
            py(0.0),
            px(x_hi)
        );
    }
    let label = |svg: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="11" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(svg, ax, ay + 16.0, "start", format!("{x_lo:.3e}"));
    label(svg, px(x_hi), ay + 16.0, "end", format!("{x_hi:.3e}"));
    label(svg, ax - 4.0, ay, "end", format!("{y_lo:.4e}"));
    label(svg, ax - 4.0, top + 10.0, "end", format!("{y_hi:.4e}"));
    label(svg, (ax + px(x_hi)) / 2.0, ay + 32.0, "middle", "X".into());
    label(svg, (ax + px(x_hi)) / 2.0, top + 12.0, "middle", panel.title.into());
}

/// Left panel Ψ′(X), right panel Ψ(X), with the stationary point marked.
pub fn figure1(analysis: &PsiAnalysis, rows: &[Figure1Row]) -> String {
    let x: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let panels = [
        Panel {
            title: "Psi'(X)",
            x: x.clone(),
            y: rows.iter().map(|r| r.dpsi).collect(),
        },
        Panel {
            title: "Psi(X)",
            x,
            y: rows.iter().map(|r| r.psi).collect(),
        },
    ];
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL_H}" font-family="sans-serif">"#,
        2.0 * PANEL_W
    );
    svg.push('\n');
    for (i, panel) in panels.iter().enumerate() {
        draw(&mut svg, panel, i as f64 * PANEL_W, analysis.x1);
    }
    svg.push_str("</svg>\n");
    svg
}
