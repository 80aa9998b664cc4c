//! Native SVG rendering for the experiment CSVs: line, scatter, and
//! error-bar primitives with linear or log-10 x axes. Figures are
//! diagnostic, not publication-grade; everything is drawn from scratch so
//! the toolchain stays self-contained.

use crate::{CliError, CliResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 44.0;
const MARGIN_B: f64 = 58.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone)]
pub enum SeriesKind {
    Line(Vec<(f64, f64)>),
    Scatter(Vec<(f64, f64)>),
    /// (x, y, y-error); drawn as center dot, vertical bar, and caps.
    ErrorBars(Vec<(f64, f64, f64)>),
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub kind: SeriesKind,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

struct Bounds {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, log_x: bool) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x,
            series: Vec::new(),
        }
    }

    fn x_coord(&self, x: f64) -> CliResult<f64> {
        if self.log_x {
            if x <= 0.0 {
                return Err(CliError::Validation(format!(
                    "log-x plot requires positive x values, got {x}"
                )));
            }
            Ok(x.log10())
        } else {
            Ok(x)
        }
    }

    fn bounds(&self) -> CliResult<Bounds> {
        let mut b = Bounds {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        let mut any = false;
        for s in &self.series {
            let points: Vec<(f64, f64)> = match &s.kind {
                SeriesKind::Line(p) | SeriesKind::Scatter(p) => p.clone(),
                SeriesKind::ErrorBars(p) => p
                    .iter()
                    .flat_map(|&(x, y, e)| [(x, y - e), (x, y + e)])
                    .collect(),
            };
            for (x, y) in points {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                any = true;
                let xc = self.x_coord(x)?;
                b.x_min = b.x_min.min(xc);
                b.x_max = b.x_max.max(xc);
                b.y_min = b.y_min.min(y);
                b.y_max = b.y_max.max(y);
            }
        }
        if !any {
            return Err(CliError::Validation("nothing to plot".into()));
        }
        // pad degenerate / tight ranges
        if b.x_max - b.x_min < 1e-12 {
            b.x_min -= 0.5;
            b.x_max += 0.5;
        }
        if b.y_max - b.y_min < 1e-12 {
            b.y_min -= 0.5;
            b.y_max += 0.5;
        }
        let pad_y = 0.05 * (b.y_max - b.y_min);
        b.y_min -= pad_y;
        b.y_max += pad_y;
        let pad_x = 0.03 * (b.x_max - b.x_min);
        b.x_min -= pad_x;
        b.x_max += pad_x;
        Ok(b)
    }

    pub fn render_svg(&self) -> CliResult<String> {
        let b = self.bounds()?;
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let px = |xc: f64| MARGIN_L + (xc - b.x_min) / (b.x_max - b.x_min) * plot_w;
        let py = |y: f64| MARGIN_T + (b.y_max - y) / (b.y_max - b.y_min) * plot_h;

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        svg.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            escape(&self.title)
        ));

        // gridlines + ticks
        for (xc, label) in self.x_ticks(&b) {
            let x = px(xc);
            svg.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
                MARGIN_T,
                MARGIN_T + plot_h
            ));
            svg.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>\n",
                MARGIN_T + plot_h + 18.0
            ));
        }
        for (y_val, label) in y_ticks(&b) {
            let y = py(y_val);
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n",
                MARGIN_L,
                MARGIN_L + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>\n",
                MARGIN_L - 8.0,
                y + 4.0
            ));
        }

        // frame
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
             fill=\"none\" stroke=\"#333333\"/>\n"
        ));
        // axis labels
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // series
        for s in &self.series {
            match &s.kind {
                SeriesKind::Line(points) => {
                    let mut path = String::new();
                    for (x, y) in points {
                        if !(x.is_finite() && y.is_finite()) {
                            continue;
                        }
                        let xc = self.x_coord(*x)?;
                        path.push_str(&format!("{:.2},{:.2} ", px(xc), py(*y)));
                    }
                    svg.push_str(&format!(
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"/>\n",
                        path.trim_end(),
                        s.color
                    ));
                }
                SeriesKind::Scatter(points) => {
                    for (x, y) in points {
                        if !(x.is_finite() && y.is_finite()) {
                            continue;
                        }
                        let xc = self.x_coord(*x)?;
                        svg.push_str(&format!(
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{}\" \
                             fill-opacity=\"0.75\"/>\n",
                            px(xc),
                            py(*y),
                            s.color
                        ));
                    }
                }
                SeriesKind::ErrorBars(points) => {
                    for (x, y, e) in points {
                        if !(x.is_finite() && y.is_finite() && e.is_finite()) {
                            continue;
                        }
                        let xc = px(self.x_coord(*x)?);
                        let (y0, y1) = (py(y - e), py(y + e));
                        svg.push_str(&format!(
                            "<line x1=\"{xc:.2}\" y1=\"{y0:.2}\" x2=\"{xc:.2}\" y2=\"{y1:.2}\" \
                             stroke=\"{}\" stroke-width=\"1.2\"/>\n",
                            s.color
                        ));
                        for yy in [y0, y1] {
                            svg.push_str(&format!(
                                "<line x1=\"{:.2}\" y1=\"{yy:.2}\" x2=\"{:.2}\" y2=\"{yy:.2}\" \
                                 stroke=\"{}\" stroke-width=\"1.2\"/>\n",
                                xc - 4.0,
                                xc + 4.0,
                                s.color
                            ));
                        }
                        svg.push_str(&format!(
                            "<circle cx=\"{xc:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{}\"/>\n",
                            py(*y),
                            s.color
                        ));
                    }
                }
            }
        }

        // legend (top-right, inside the frame)
        for (k, s) in self.series.iter().enumerate() {
            let y = MARGIN_T + 16.0 + 16.0 * k as f64;
            let x = MARGIN_L + plot_w - 170.0;
            svg.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" \
                 stroke-width=\"2.5\"/>\n",
                x + 22.0,
                s.color
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
                x + 28.0,
                y + 4.0,
                escape(&s.label)
            ));
        }

        svg.push_str("</svg>\n");
        Ok(svg)
    }

    /// Tick positions in transformed-x space, with labels in data space.
    fn x_ticks(&self, b: &Bounds) -> Vec<(f64, String)> {
        if self.log_x {
            // decade ticks; fall back to even division if fewer than two fit
            let lo = b.x_min.ceil() as i64;
            let hi = b.x_max.floor() as i64;
            let mut ticks: Vec<(f64, String)> = (lo..=hi)
                .map(|d| (d as f64, fmt_tick(10f64.powi(d as i32))))
                .collect();
            if ticks.len() < 2 {
                ticks = even_ticks(b.x_min, b.x_max)
                    .into_iter()
                    .map(|v| (v, fmt_tick(10f64.powf(v))))
                    .collect();
            }
            ticks
        } else {
            even_ticks(b.x_min, b.x_max)
                .into_iter()
                .map(|v| (v, fmt_tick(v)))
                .collect()
        }
    }
}

fn y_ticks(b: &Bounds) -> Vec<(f64, String)> {
    even_ticks(b.y_min, b.y_max)
        .into_iter()
        .map(|v| (v, fmt_tick(v)))
        .collect()
}

fn even_ticks(min: f64, max: f64) -> Vec<f64> {
    (0..=5)
        .map(|k| min + (max - min) * k as f64 / 5.0)
        .collect()
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() || s == "-" {
            "0".into()
        } else {
            s.into()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
