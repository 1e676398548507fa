//! Minimal SVG plotting: axes with ticks, histogram bars, scatter glyphs and
//! line overlays.

use std::fmt::Write;

use super::hist::Histogram;

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 64.0;
const MR: f64 = 20.0;
const MT: f64 = 36.0;
const MB: f64 = 48.0;

enum Layer {
    Bars {
        lefts: Vec<f64>,
        width: f64,
        heights: Vec<f64>,
        fill: String,
    },
    Points {
        xy: Vec<(f64, f64)>,
        color: String,
        radius: f64,
    },
    Line {
        xy: Vec<(f64, f64)>,
        color: String,
        label: Option<String>,
    },
}

pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    layers: Vec<Layer>,
    xr: Option<(f64, f64)>,
    yr: Option<(f64, f64)>,
}

fn extend(r: &mut Option<(f64, f64)>, v: f64) {
    if !v.is_finite() {
        return;
    }
    *r = Some(match *r {
        None => (v, v),
        Some((a, b)) => (a.min(v), b.max(v)),
    });
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Self {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            layers: Vec::new(),
            xr: None,
            yr: None,
        }
    }

    pub fn histogram(mut self, h: &Histogram, fill: &str) -> Self {
        let lefts: Vec<f64> = (0..h.counts.len())
            .map(|i| h.lo + i as f64 * h.width())
            .collect();
        let heights = h.density();
        extend(&mut self.xr, h.lo);
        extend(&mut self.xr, h.hi);
        extend(&mut self.yr, 0.0);
        for &v in &heights {
            extend(&mut self.yr, v);
        }
        self.layers.push(Layer::Bars {
            lefts,
            width: h.width(),
            heights,
            fill: fill.into(),
        });
        self
    }

    pub fn scatter(mut self, xy: Vec<(f64, f64)>, color: &str, radius: f64) -> Self {
        for &(x, y) in &xy {
            extend(&mut self.xr, x);
            extend(&mut self.yr, y);
        }
        self.layers.push(Layer::Points {
            xy,
            color: color.into(),
            radius,
        });
        self
    }

    pub fn line(mut self, xy: Vec<(f64, f64)>, color: &str, label: Option<&str>) -> Self {
        for &(_, y) in &xy {
            extend(&mut self.yr, y);
        }
        self.layers.push(Layer::Line {
            xy,
            color: color.into(),
            label: label.map(Into::into),
        });
        self
    }

    pub fn x_range(mut self, lo: f64, hi: f64) -> Self {
        self.xr = Some((lo, hi));
        self
    }

    pub fn y_range(mut self, lo: f64, hi: f64) -> Self {
        self.yr = Some((lo, hi));
        self
    }

    pub fn render(&self) -> String {
        let (x0, x1) = pad(self.xr.unwrap_or((0.0, 1.0)));
        let (y0, y1) = pad(self.yr.unwrap_or((0.0, 1.0)));
        let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
        let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<clipPath id="plotarea"><rect x="{ML}" y="{MT}" width="{}" height="{}"/></clipPath>"#,
            W - ML - MR,
            H - MT - MB
        );
        let _ = writeln!(s, r#"<g clip-path="url(#plotarea)">"#);
        let mut legend = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Bars {
                    lefts,
                    width,
                    heights,
                    fill,
                } => {
                    for (l, h) in lefts.iter().zip(heights) {
                        let (px, py) = (sx(*l), sy(*h));
                        let pw = sx(l + width) - px;
                        let ph = sy(y0.max(0.0)) - py;
                        let _ = writeln!(
                            s,
                            r#"<rect x="{px:.2}" y="{py:.2}" width="{pw:.2}" height="{:.2}" fill="{fill}" stroke="white" stroke-width="0.5"/>"#,
                            ph.max(0.0)
                        );
                    }
                }
                Layer::Points { xy, color, radius } => {
                    for &(x, y) in xy {
                        if x.is_finite() && y.is_finite() {
                            let _ = writeln!(
                                s,
                                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}" fill-opacity="0.5"/>"#,
                                sx(x),
                                sy(y)
                            );
                        }
                    }
                }
                Layer::Line { xy, color, label } => {
                    let pts: Vec<String> = xy
                        .iter()
                        .filter(|p| p.0.is_finite() && p.1.is_finite())
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                        pts.join(" ")
                    );
                    if let Some(l) = label {
                        legend.push((l.clone(), color.clone()));
                    }
                }
            }
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - ML - MR,
            H - MT - MB
        );
        for t in nice_ticks(x0, x1) {
            let px = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
                H - MB,
                H - MB + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                H - MB + 18.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(y0, y1) {
            let py = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{py:.2}" x2="{ML}" y2="{py:.2}" stroke="black"/>"#,
                ML - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                ML - 8.0,
                py + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (ML + W - MR) / 2.0,
            H - 10.0,
            esc(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (MT + H - MB) / 2.0,
            esc(&self.ylabel)
        );
        for (i, (label, color)) in legend.iter().enumerate() {
            let y = MT + 16.0 + 16.0 * i as f64;
            let x = W - MR - 160.0;
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#,
                x + 20.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                x + 26.0,
                y + 4.0,
                esc(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn pad((a, b): (f64, f64)) -> (f64, f64) {
    if b > a {
        let m = 0.03 * (b - a);
        (a - m, b + m)
    } else {
        (a - 0.5, a + 0.5)
    }
}

/// Orthographic view of unit vectors seen from `view` (front hemisphere filled).
pub fn sphere_plot(title: &str, points: &[[f64; 3]]) -> String {
    let r = 180.0;
    let (cx, cy) = (W / 2.0, H / 2.0 + 10.0);
    // view from (1, 1, 1)/√3 with z up
    let v = [1.0 / 3f64.sqrt(); 3];
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [-1.0 / 6f64.sqrt(), -1.0 / 6f64.sqrt(), 2.0 / 6f64.sqrt()];
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(title)
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="black"/>"#
    );
    for p in points {
        let front = dot(p, &v) >= 0.0;
        let (x, y) = (cx + r * dot(p, &e1), cy - r * dot(p, &e2));
        let style = if front {
            r##"fill="#1f77b4""##
        } else {
            r##"fill="none" stroke="#1f77b4""##
        };
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.6" {style}/>"#);
    }
    s.push_str("</svg>\n");
    s
}
