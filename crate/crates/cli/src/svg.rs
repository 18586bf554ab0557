//! Log-log scatter of `n*` against the swept axis with the fitted lines.

use std::fmt::Write as _;

use logit_complexity::sweep::SlopeAxis;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 260.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Points in natural-log coordinates, and the fit if there is one.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<(f64, f64, f64)>,
}

impl Series {
    /// Slope and standard error rounded to three decimals.
    pub fn annotation(&self) -> Option<String> {
        self.fit
            .map(|(slope, se, _)| format!("{}: slope {slope:.3} ± {se:.3}", self.label))
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axis_title(axis: SlopeAxis) -> &'static str {
    match axis {
        SlopeAxis::Beta => "β",
        SlopeAxis::InvEpsilon => "1/ε",
        SlopeAxis::Dimension => "d",
    }
}

/// Tick values covering `[lo, hi]` (natural logs): decades, or 1-2-5 steps
/// when the range is under two decades.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo / std::f64::consts::LN_10, hi / std::f64::consts::LN_10);
    let mantissas: &[f64] = if b - a < 2.0 { &[1.0, 2.0, 5.0] } else { &[1.0] };
    let mut out = Vec::new();
    for k in (a.floor() as i32)..=(b.ceil() as i32) {
        for &m in mantissas {
            let v = m * 10f64.powi(k);
            let l = v.ln();
            if l >= lo - 1e-9 && l <= hi + 1e-9 {
                out.push(v);
            }
        }
    }
    out
}

fn tick_label(v: f64) -> String {
    if (1e-3..1e6).contains(&v) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:e}")
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.08).max(0.1);
    (lo - pad, hi + pad)
}

pub fn phase_plot(axis: SlopeAxis, series: &[Series]) -> String {
    let (x0, x1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for v in ticks(x0, x1) {
        let x = sx(v.ln());
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick_label(v)
        );
    }
    for v in ticks(y0, y1) {
        let y = sy(v.ln());
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} (log scale)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        axis_title(axis)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">n* (log scale)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    let mut legend_y = TOP + 10.0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        if let Some((slope, _, intercept)) = s.fit {
            let (a, b) = padded_range(s.points.iter().map(|p| p.0));
            let (a, b) = (a.max(x0), b.min(x1));
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 3"/>"#,
                sx(a),
                sy(intercept + slope * a),
                sx(b),
                sy(intercept + slope * b)
            );
        }
        let text = s.annotation().unwrap_or_else(|| format!("{}: no fit", s.label));
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/><text class="slope" x="{:.2}" y="{:.2}">{}</text>"#,
            WIDTH - RIGHT + 15.0,
            legend_y - 4.0,
            WIDTH - RIGHT + 25.0,
            legend_y,
            escape(&text)
        );
        legend_y += 18.0;
    }
    out.push_str("</svg>\n");
    out
}
