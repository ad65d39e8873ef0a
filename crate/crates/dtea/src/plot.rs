//! Minimal standalone SVG time-series plots with mode shading.

use std::fmt::Write as _;
use std::path::Path;

use dtea_core::experiments::Trace;
use dtea_core::ModeTag;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(label: &str, values: Vec<f64>) -> Self {
        Series {
            label: label.to_string(),
            values,
        }
    }
}

/// One stacked axis sharing the common time base.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Shaded time interval for one engaged topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub tag: ModeTag,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub width: f64,
    pub panel_height: f64,
    /// Points drawn per series at most; longer series are strided.
    pub max_points: usize,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            title: String::new(),
            width: 900.0,
            panel_height: 220.0,
            max_points: 4000,
        }
    }
}

const COLORS: [&str; 6] = [
    "#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555",
];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const TITLE_SPACE: f64 = 30.0;
const PANEL_GAP: f64 = 40.0;

/// SEA and PEA intervals of a trace. Each band ends where the next run of
/// rows begins, so a band edge sits on the first row logged in a mode.
pub fn mode_bands(trace: &Trace) -> Vec<Band> {
    let rows = &trace.rows;
    trace
        .segments()
        .into_iter()
        .filter(|(tag, _, _)| *tag != ModeTag::Trans)
        .map(|(tag, lo, hi)| Band {
            tag,
            start: rows[lo].t,
            end: rows
                .get(hi)
                .map_or(rows[hi - 1].t + trace.interval, |r| r.t),
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / n.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders the panels as one SVG document.
pub fn render_svg(
    t: &[f64],
    panels: &[Panel],
    bands: &[Band],
    style: &PlotStyle,
) -> Result<String, String> {
    if t.is_empty() {
        return Err("nothing to plot: empty time base".into());
    }
    if panels.is_empty() || panels.iter().all(|p| p.series.is_empty()) {
        return Err("nothing to plot: no series".into());
    }
    for p in panels {
        if let Some(s) = p.series.iter().find(|s| s.values.len() != t.len()) {
            return Err(format!(
                "series {:?} has {} points, time base has {}",
                s.label,
                s.values.len(),
                t.len()
            ));
        }
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let t_span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let plot_w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let height = TITLE_SPACE + panels.len() as f64 * (style.panel_height + PANEL_GAP);
    let stride = t.len().div_ceil(style.max_points.max(2)).max(1);
    let x_of = |v: f64| MARGIN_LEFT + (v - t0) / t_span * plot_w;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = style.width,
        h = height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            style.width / 2.0,
            escape(&style.title)
        );
    }

    for (pi, panel) in panels.iter().enumerate() {
        let top = TITLE_SPACE + pi as f64 * (style.panel_height + PANEL_GAP);
        let bottom = top + style.panel_height;
        let finite = panel
            .series
            .iter()
            .flat_map(|s| s.values.iter())
            .filter(|v| v.is_finite());
        let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 1.0);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * style.panel_height;

        for b in bands {
            let fill = match b.tag {
                ModeTag::Sea => "#dbe8f6",
                ModeTag::Pea => "#f8dcdc",
                ModeTag::Trans => continue,
            };
            let (xa, xb) = (x_of(b.start.max(t0)), x_of(b.end.min(t1)));
            if xb > xa {
                let _ = writeln!(
                    svg,
                    r#"<rect class="band-{}" x="{xa:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    b.tag.as_str().to_lowercase(),
                    xb - xa,
                    style.panel_height
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT:.2}" y="{top:.2}" width="{plot_w:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            style.panel_height
        );
        for v in nice_ticks(lo, hi, 5) {
            let y = y_of(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w,
                MARGIN_LEFT - 4.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        for v in nice_ticks(t0, t1, 8) {
            let x = x_of(v);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 14.0,
                fmt_tick(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text transform="translate(14 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            top + style.panel_height / 2.0,
            escape(&panel.y_label)
        );

        for (si, s) in panel.series.iter().enumerate() {
            let color = COLORS[si % COLORS.len()];
            let mut d = String::new();
            let mut pen_down = false;
            let idx = (0..t.len())
                .step_by(stride)
                .chain(std::iter::once(t.len() - 1));
            let mut last = usize::MAX;
            for i in idx {
                if i == last {
                    continue;
                }
                last = i;
                let v = s.values[i];
                if !v.is_finite() {
                    pen_down = false;
                    continue;
                }
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if pen_down { "L" } else { "M" },
                    x_of(t[i]),
                    y_of(v)
                );
                pen_down = true;
            }
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                d.trim_end()
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                MARGIN_LEFT + 8.0 + 110.0 * si as f64,
                top + 14.0,
                escape(&s.label)
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (s)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        height - 6.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_svg_plot(
    path: &Path,
    t: &[f64],
    panels: &[Panel],
    bands: &[Band],
    style: &PlotStyle,
) -> Result<()> {
    let svg = render_svg(t, panels, bands, style).map_err(|message| CliError::Format {
        path: path.into(),
        message,
    })?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}
