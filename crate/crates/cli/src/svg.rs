//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;

use anyhow::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round tick spacing covering `[lo, hi]` with about five intervals.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Padded data range; a degenerate range is widened symmetrically.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let w = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - w, hi + w)
    }
}

/// Renders `series` on shared axes. On a log-y chart non-positive values are
/// dropped, since they have no position on the axis.
pub fn render(series: &[Series], axes: &Axes) -> Result<String> {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!axes.log_y || y > 0.0);
    let data: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| (s.label.as_str(), s.points.iter().copied().filter(keep).collect::<Vec<_>>()))
        .collect();
    if data.iter().all(|(_, p)| p.is_empty()) {
        bail!("nothing to plot: every series is empty");
    }
    let ty = |y: f64| if axes.log_y { y.log10() } else { y };
    let (x0, x1) = range(data.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y0, y1) = if axes.log_y {
        let (lo, hi) = range(data.iter().flat_map(|(_, p)| p.iter().map(|q| ty(q.1))));
        (lo.floor(), hi.ceil())
    } else {
        range(data.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)))
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(&axes.title))?;
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#)?;

    for x in linear_ticks(x0, x1) {
        let xp = px(x);
        writeln!(s, r#"<line x1="{xp:.2}" y1="{}" x2="{xp:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0)?;
        writeln!(s, r#"<text x="{xp:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(x))?;
    }
    let y_ticks: Vec<(f64, String)> = if axes.log_y {
        let step = ((y1 - y0) / 8.0).ceil().max(1.0) as i64;
        (y0 as i64..=y1 as i64).step_by(step as usize).map(|e| (10f64.powi(e as i32), format!("1e{e}"))).collect()
    } else {
        linear_ticks(y0, y1).into_iter().map(|y| (y, tick_label(y))).collect()
    };
    for (y, label) in y_ticks {
        let yp = py(y);
        writeln!(s, r##"<line x1="{LEFT}" y1="{yp:.2}" x2="{}" y2="{yp:.2}" stroke="#dddddd"/>"##, LEFT + pw)?;
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, yp + 4.0)?;
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&axes.x_label))?;
    writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(&axes.y_label)
    )?;

    for (i, (label, pts)) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "))?;
        }
        if pts.len() <= 64 {
            for &(x, y) in pts {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y))?;
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0)?;
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(label))?;
    }
    writeln!(s, "</svg>")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(log_y: bool) -> Axes {
        Axes { title: "t".into(), x_label: "m".into(), y_label: "E".into(), log_y }
    }

    #[test]
    fn single_point_gets_a_marker() {
        let s = render(&[Series { label: "only".into(), points: vec![(1.0, 2.0)] }], &axes(false)).unwrap();
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(!s.contains("<polyline"));
    }

    #[test]
    fn log_axis_drops_nonpositive_values() {
        let pts = vec![(4.0, 1e-3), (8.0, 1e-9), (12.0, 0.0)];
        let s = render(&[Series { label: "E".into(), points: pts }], &axes(true)).unwrap();
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains(">1e-9<") && s.contains(">1e-3<"));
        assert!(render(&[Series { label: "E".into(), points: vec![(1.0, 0.0)] }], &axes(true)).is_err());
        assert!(render(&[], &axes(false)).is_err());
    }

    #[test]
    fn one_polyline_and_legend_entry_per_series() {
        let series: Vec<Series> = (0..4)
            .map(|i| Series { label: format!("r1 = {}", 0.2 * (i + 1) as f64), points: vec![(0.0, i as f64), (1.0, 1.0)] })
            .collect();
        let s = render(&series, &axes(false)).unwrap();
        assert_eq!(s.matches("<polyline").count(), 4);
        assert!(s.contains("r1 = 0.8"));
        assert!(!s.contains("href"));
    }

    #[test]
    fn text_is_escaped() {
        let a = Axes { title: "a < b & c".into(), ..axes(false) };
        let s = render(&[Series { label: "x".into(), points: vec![(0.0, 0.0)] }], &a).unwrap();
        assert!(s.contains("a &lt; b &amp; c"));
    }
}
