//! Minimal SVG rendering of sweep and interval reports.

use std::fmt::Write;

use crate::dephasing::Decision;
use crate::experiment::{IntervalReport, SweepRow};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

struct Axes {
    x0: f64,
    x1: f64,
}

impl Axes {
    fn x(&self, v: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        LEFT + (v - self.x0) / span * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (1.0 - v.clamp(0.0, 1.0)) * (H - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, pts: &[(f64, f64)], stroke: &str, dash: Option<&str>) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

/// Bounds on A versus plate thickness, one group per bound route, with
/// ±1 std error bars and dashed `a_crit`, `1 − a_crit` guides.
pub fn sweep_svg(rows: &[SweepRow], title: &str) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.thickness_mm).collect();
    let ax = Axes {
        x0: xs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0),
        x1: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(1.0),
    };
    let mut out = String::new();
    header(&mut out, title, H);

    // axes and ticks
    let (yb, yt) = (ax.y(0.0), ax.y(1.0));
    let _ = writeln!(out, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{yb}" x2="{}" y2="{yb}"/>"#, W - RIGHT);
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{yb}" x2="{LEFT}" y2="{yt}"/>"#);
    let _ = writeln!(out, "</g>");
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, LEFT - 6.0, ax.y(v) + 4.0);
    }
    for &x in &xs {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#, ax.x(x), yb + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">thickness (mm)</text>"#, W / 2.0, H - 8.0);
    let _ = writeln!(out, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">A</text>"#, H / 2.0, H / 2.0);

    let guides: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.acrit.map(|a| (r.thickness_mm, a))).collect();
    if !guides.is_empty() {
        let _ = writeln!(out, r#"<g class="acrit">"#);
        polyline(&mut out, &guides.iter().map(|&(x, a)| (ax.x(x), ax.y(a))).collect::<Vec<_>>(), "gray", Some("6 4"));
        polyline(&mut out, &guides.iter().map(|&(x, a)| (ax.x(x), ax.y(1.0 - a))).collect::<Vec<_>>(), "gray", Some("6 4"));
        let _ = writeln!(out, "</g>");
    }

    type Pick = fn(&SweepRow) -> (f64, f64);
    let routes: [(&str, &str, Pick, Pick); 2] = [
        ("fid", "#1f77b4", |r| (r.lower_fid, r.lower_fid_std), |r| (r.upper_fid, r.upper_fid_std)),
        ("td", "#d62728", |r| (r.lower_td, r.lower_td_std), |r| (r.upper_td, r.upper_td_std)),
    ];
    for (name, color, lower, upper) in routes {
        let _ = writeln!(out, r#"<g class="series" data-route="{name}">"#);
        for pick in [lower, upper] {
            let pts: Vec<(f64, f64, f64)> = rows
                .iter()
                .filter_map(|r| {
                    let (v, s) = pick(r);
                    v.is_finite().then_some((r.thickness_mm, v, s))
                })
                .collect();
            polyline(&mut out, &pts.iter().map(|&(x, v, _)| (ax.x(x), ax.y(v))).collect::<Vec<_>>(), color, None);
            for &(x, v, s) in &pts {
                let (px, py) = (ax.x(x), ax.y(v));
                if s > 0.0 {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}"/>"#,
                        ax.y(v - s),
                        ax.y(v + s)
                    );
                }
                let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{color}"/>"#);
            }
        }
        let _ = writeln!(out, "</g>");
    }

    // verdict markers along the top edge
    let _ = writeln!(out, r#"<g class="verdicts">"#);
    for r in rows {
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{}" width="8" height="8" fill="{}"><title>{}</title></rect>"#,
            ax.x(r.thickness_mm) - 4.0,
            TOP - 12.0,
            label_color(r.verdict),
            r.verdict
        );
    }
    let _ = writeln!(out, "</g>");
    legend(&mut out, &[("α-fidelity bounds", "#1f77b4"), ("trace-distance bounds", "#d62728"), ("A_crit, 1 − A_crit", "gray")]);
    out.push_str("</svg>\n");
    out
}

fn label_color(d: Decision) -> &'static str {
    match d {
        Decision::NonMarkovianVerified => "#2ca02c",
        Decision::MarkovianVerified => "#ffffff",
        Decision::Inconclusive => "#bbbbbb",
    }
}

fn legend(out: &mut String, items: &[(&str, &str)]) {
    for (i, (name, color)) in items.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = W - RIGHT - 190.0;
        let _ = writeln!(out, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(name));
    }
}

/// Strip chart of the per-τ classification.
pub fn intervals_svg(report: &IntervalReport, title: &str) -> String {
    let height = 160.0;
    let ax = Axes {
        x0: 0.0,
        x1: report.taus.last().copied().unwrap_or(1.0),
    };
    let mut out = String::new();
    header(&mut out, title, height);
    let _ = writeln!(out, r#"<g class="intervals" stroke="black" stroke-width="0.5">"#);
    for iv in &report.intervals {
        let (x0, x1) = (ax.x(iv.start), ax.x(iv.end).max(ax.x(iv.start) + 0.5));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="40" width="{:.2}" height="50" fill="{}"><title>{} [{}, {}]</title></rect>"#,
            x1 - x0,
            label_color(iv.label),
            iv.label,
            iv.start,
            iv.end
        );
    }
    let _ = writeln!(out, "</g>");
    let ticks = ax.x1.ceil() as usize;
    for k in 0..=ticks {
        let _ = writeln!(out, r#"<text x="{:.2}" y="108" text-anchor="middle">{k}</text>"#, ax.x(k as f64));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="130" text-anchor="middle">τ (Δη = {:.3}, A ∈ [{:.4}, {:.4}])</text>"#,
        W / 2.0,
        report.delta_eta,
        report.bounds.0,
        report.bounds.1
    );
    out.push_str("</svg>\n");
    out
}
