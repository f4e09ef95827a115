//! Minimal static SVG charts: per-pair scatter plots and a correlation
//! summary where planner-centric metrics are stars and inverse-distance
//! variants are triangles.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::report::CorrelationReport;
use super::table::{DetectorTable, Family, Metric};

const W: f64 = 480.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polygon(points: &[(f64, f64)], fill: &str) -> String {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!(
        "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.8\"/>",
        pts.join(" ")
    )
}

pub fn glyph(family: Family, cx: f64, cy: f64, r: f64) -> String {
    match family {
        Family::PlannerCentric => {
            let pts: Vec<(f64, f64)> = (0..10)
                .map(|k| {
                    let rad = if k % 2 == 0 { r * 1.3 } else { r * 0.55 };
                    let a = -PI / 2.0 + k as f64 * PI / 5.0;
                    (cx + rad * a.cos(), cy + rad * a.sin())
                })
                .collect();
            polygon(&pts, "#e3a21a")
        }
        Family::InverseDistance => {
            let h = r * 1.2;
            polygon(
                &[(cx, cy - h), (cx + h, cy + 0.8 * h), (cx - h, cy + 0.8 * h)],
                "#3b7dd8",
            )
        }
        _ => format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"#3ca45a\" stroke=\"black\" stroke-width=\"0.8\"/>"
        ),
    }
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let span = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = span(xs);
        let (y0, y1) = span(ys);
        Axes { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }

    fn draw(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (bx, by) = (LEFT, H - BOTTOM);
        let _ = writeln!(
            out,
            "<line x1=\"{bx}\" y1=\"{by}\" x2=\"{}\" y2=\"{by}\" stroke=\"black\"/>",
            W - RIGHT
        );
        let _ = writeln!(
            out,
            "<line x1=\"{bx}\" y1=\"{TOP}\" x2=\"{bx}\" y2=\"{by}\" stroke=\"black\"/>"
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x0 + t * (self.x1 - self.x0);
            let yv = self.y0 + t * (self.y1 - self.y0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{by}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">{xv:.3}</text>",
                by + 4.0,
                by + 16.0
            );
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{bx}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">{yv:.3}</text>",
                bx - 4.0,
                bx - 6.0,
                py + 3.0
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            (LEFT + W - RIGHT) / 2.0,
            H - 16.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            (TOP + H - BOTTOM) / 2.0,
            (TOP + H - BOTTOM) / 2.0,
            escape(ylabel)
        );
    }
}

fn open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"{:.2}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

/// One point per detector with both values present.
pub fn scatter(table: &DetectorTable, offline: Metric, online: Metric, pearson: Option<f64>) -> String {
    let pts: Vec<(f64, f64)> = table
        .column(offline)
        .into_iter()
        .zip(table.column(online))
        .filter_map(|(a, b)| Some((a?, b?)))
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let axes = Axes::fit(&xs, &ys);
    let r = pearson.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"));
    let mut out = open(&format!("{} vs {} (|r| = {r})", offline.label(), online.label()));
    axes.draw(
        &mut out,
        &format!("{} [{}]", offline.label(), offline.unit()),
        &format!("{} [{}]", online.label(), online.unit()),
    );
    for (x, y) in pts {
        out.push_str(&glyph(offline.family(), axes.px(x), axes.py(y), 4.5));
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}

/// Correlation of every offline metric against two online metrics, one glyph
/// per offline metric.
pub fn summary(report: &CorrelationReport, x_online: Metric, y_online: Metric) -> String {
    let axes = Axes {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
    let mut out = open("Correlation summary");
    axes.draw(
        &mut out,
        &format!("|r| with {}", x_online.label()),
        &format!("|r| with {}", y_online.label()),
    );
    for m in &report.offline {
        let x = report.get(*m, x_online).and_then(|e| e.pearson);
        let y = report.get(*m, y_online).and_then(|e| e.pearson);
        if let (Some(x), Some(y)) = (x, y) {
            let (px, py) = (axes.px(x.abs()), axes.py(y.abs()));
            out.push_str(&glyph(m.family(), px, py, 5.0));
            let _ = writeln!(
                out,
                "\n<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"9\">{}</text>",
                px + 7.0,
                py - 5.0,
                m.name()
            );
        }
    }
    let legend = [
        (Family::Detection, "detection metric"),
        (Family::InverseDistance, "inverse-distance weighted"),
        (Family::PlannerCentric, "planner-centric"),
    ];
    for (i, (fam, text)) in legend.iter().enumerate() {
        let y = TOP + 12.0 + i as f64 * 16.0;
        out.push_str(&glyph(*fam, LEFT + 14.0, y, 4.5));
        let _ = writeln!(
            out,
            "\n<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{text}</text>",
            LEFT + 24.0,
            y + 3.0
        );
    }
    out.push_str("</svg>\n");
    out
}
