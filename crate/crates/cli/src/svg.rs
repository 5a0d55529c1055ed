//! Minimal SVG line plots and heatmaps. Coordinates are printed with fixed
//! precision so identical data renders to identical bytes.

use std::fmt::Write;

pub const HEAT: &str = "#d62728";
pub const RADIATION: &str = "#1f77b4";
pub const GREY: &str = "#b0b0b0";
pub const INK: &str = "#222222";

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub struct Series {
    pub name: String,
    pub color: String,
    pub width: f64,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, color: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            color: color.to_string(),
            width: 2.0,
            points,
        }
    }
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: f64, h: f64, stamp: Option<&str>) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(s) = stamp {
        let _ = writeln!(out, "<!-- generated {} -->", esc(s));
    }
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

/// Axis mapping, possibly logarithmic.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        }
        if hi - lo < 1e-300 || (hi - lo) < 1e-12 * hi.abs() {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let mut t = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.hi + 1e-9 * step {
                out.push((t, fmt_num(t)));
                t += step;
            }
            out
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn line_plot(p: &LinePlot, stamp: Option<&str>) -> String {
    let usable = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!p.log_x || x > 0.0) && (!p.log_y || y > 0.0);
    let pts = || p.series.iter().flat_map(|s| s.points.iter().copied().filter(usable));
    let xa = Axis::fit(pts().map(|q| q.0), p.log_x);
    let ya = Axis::fit(pts().map(|q| q.1), p.log_y);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut out = String::new();
    header(&mut out, W, H, stamp);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        esc(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="{INK}"/>"#
    );
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#eeeeee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eeeeee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 18.0,
        esc(&p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&p.y_label)
    );
    for s in &p.series {
        let mut d = String::new();
        for q in s.points.iter().filter(|q| usable(q)) {
            let _ = write!(d, "{:.2},{:.2} ", px(q.0), py(q.1));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="{}" points="{}"/>"#,
            s.color,
            s.width,
            d.trim_end()
        );
    }
    let legend_x = LEFT + pw + 14.0;
    let mut ly = TOP + 10.0;
    for s in p.series.iter().filter(|s| !s.name.is_empty()) {
        let _ = writeln!(
            out,
            r#"<line x1="{legend_x}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="3"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            legend_x + 20.0,
            s.color,
            legend_x + 26.0,
            ly + 4.0,
            esc(&s.name)
        );
        ly += 18.0;
    }
    for n in &p.notes {
        ly += 6.0;
        let _ = writeln!(out, r#"<text x="{legend_x}" y="{ly:.1}" font-size="11">{}</text>"#, esc(n));
        ly += 12.0;
    }
    out.push_str("</svg>\n");
    out
}

/// Linear blue-to-yellow ramp.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Row-major heatmap; `None` cells are hatched and labelled by `missing`.
pub fn heatmap(
    title: &str,
    rows: usize,
    cols: usize,
    values: &[Option<f64>],
    log: bool,
    missing: &str,
    stamp: Option<&str>,
) -> String {
    let cell = 36.0;
    let (w, h) = (LEFT + cols as f64 * cell + RIGHT, TOP + rows as f64 * cell + BOTTOM);
    let shown = |v: f64| if log { v.log10() } else { v };
    let finite: Vec<f64> = values
        .iter()
        .flatten()
        .filter(|v| v.is_finite() && (!log || **v > 0.0))
        .map(|&v| shown(v))
        .collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    header(&mut out, w, h, stamp);
    out.push_str(
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="#999999" stroke-width="2"/></pattern></defs>"##,
    );
    out.push('\n');
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + cols as f64 * cell / 2.0,
        esc(title)
    );
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (LEFT + c as f64 * cell, TOP + r as f64 * cell);
            let fill = match values[r * cols + c] {
                Some(v) if v.is_infinite() && v > 0.0 => color(1.0),
                Some(v) if v.is_finite() && (!log || v > 0.0) => color((shown(v) - lo) / span),
                Some(_) => color(0.0),
                None => "url(#hatch)".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#
            );
        }
    }
    for c in 0..cols {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{c}</text>"#,
            LEFT + (c as f64 + 0.5) * cell,
            TOP + rows as f64 * cell + 16.0
        );
    }
    for r in 0..rows {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{r}</text>"#,
            LEFT - 6.0,
            TOP + (r as f64 + 0.5) * cell + 4.0
        );
    }
    let lx = LEFT + cols as f64 * cell + 20.0;
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let y = TOP + (1.0 - t) * 150.0;
        let _ = writeln!(out, r#"<rect x="{lx:.1}" y="{y:.1}" width="16" height="15" fill="{}"/>"#, color(t));
    }
    if lo.is_finite() {
        let label = |v: f64| fmt_num(if log { 10f64.powf(v) } else { v });
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 22.0, TOP + 12.0, label(hi));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 22.0, TOP + 162.0, label(lo));
    }
    let _ = writeln!(
        out,
        r#"<rect x="{lx:.1}" y="{:.1}" width="16" height="15" fill="url(#hatch)" stroke="{GREY}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
        TOP + 180.0,
        lx + 22.0,
        TOP + 192.0,
        esc(missing)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_deterministic_and_drops_nonpositive_log_points() {
        let plot = LinePlot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: true,
            log_y: true,
            series: vec![Series::new("heat", HEAT, vec![(0.0, 1.0), (1.0, 1.0), (10.0, 0.1), (100.0, 0.01)])],
            notes: vec!["slope -1".into()],
        };
        let a = line_plot(&plot, None);
        assert_eq!(a, line_plot(&plot, None));
        assert!(a.contains(HEAT));
        assert_eq!(a.matches(',').count(), 3);
        assert!(!a.contains("generated"));
        assert!(line_plot(&plot, Some("now")).contains("<!-- generated now -->"));
    }

    #[test]
    fn heatmap_hatches_missing_cells() {
        let svg = heatmap("m", 1, 3, &[Some(1.0), None, Some(3.0)], false, "not disclosed", None);
        assert_eq!(svg.matches(r#"fill="url(#hatch)""#).count(), 2);
        assert!(svg.contains("not disclosed"));
    }

    #[test]
    fn color_ramp_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
    }
}
