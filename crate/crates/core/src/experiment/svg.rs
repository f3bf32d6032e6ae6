use std::fmt::Write as _;
use std::io::Write;

use super::{summarize, CellResult, CellSummary, Method};
use crate::error::{invalid, Error, Result};
use crate::theory::{conjecture_iso_alpha, prop1_curve_alpha};

const CELL: f64 = 24.0;
const LEFT: f64 = 64.0;
const TOP: f64 = 32.0;
const RIGHT: f64 = 16.0;
const BOTTOM: f64 = 48.0;
const CURVE_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// White 0, black 1.
    RecoveryRate,
    /// Log-scaled between the fastest (white) and slowest (black) cell.
    MeanRuntime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overlay {
    None,
    /// `sqrt(alpha) - sqrt(beta) = sqrt(2)`
    Prop1Curve,
    /// `2/(sqrt(alpha) - sqrt(beta))^2 = gamma`
    ConjectureGammaIso(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapOptions {
    pub metric: Metric,
    pub overlay: Overlay,
    /// Required when the results hold more than one method.
    pub method: Option<Method>,
}

/// Cell placement: betas left to right, alphas bottom to top. Values between
/// grid points map piecewise linearly between cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapLayout {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

fn interpolate(values: &[f64], centers: &[f64], v: f64) -> f64 {
    if values.len() == 1 {
        return centers[0] + (v - values[0]) * CELL;
    }
    let k = match values.iter().position(|&x| x >= v) {
        Some(0) => 1,
        Some(k) => k,
        None => values.len() - 1,
    };
    let (x0, x1) = (values[k - 1], values[k]);
    let (c0, c1) = (centers[k - 1], centers[k]);
    if v == x1 {
        return c1;
    }
    if v == x0 {
        return c0;
    }
    c0 + (v - x0) * (c1 - c0) / (x1 - x0)
}

impl HeatmapLayout {
    pub fn width(&self) -> f64 {
        LEFT + self.betas.len() as f64 * CELL + RIGHT
    }

    pub fn height(&self) -> f64 {
        TOP + self.alphas.len() as f64 * CELL + BOTTOM
    }

    fn column_centers(&self) -> Vec<f64> {
        (0..self.betas.len()).map(|j| LEFT + (j as f64 + 0.5) * CELL).collect()
    }

    fn row_centers(&self) -> Vec<f64> {
        let na = self.alphas.len();
        (0..na).map(|i| TOP + ((na - 1 - i) as f64 + 0.5) * CELL).collect()
    }

    pub fn x_of(&self, beta: f64) -> f64 {
        interpolate(&self.betas, &self.column_centers(), beta)
    }

    pub fn y_of(&self, alpha: f64) -> f64 {
        let centers = self.row_centers();
        if self.alphas.len() == 1 {
            return centers[0] - (alpha - self.alphas[0]) * CELL;
        }
        interpolate(&self.alphas, &centers, alpha)
    }
}

fn sorted_distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn fill(intensity: f64) -> String {
    let level = (255.0 * (1.0 - intensity.clamp(0.0, 1.0))).round() as u8;
    format!("rgb({level},{level},{level})")
}

/// One `rect` per `(alpha, beta)` cell, axis labels and an optional red
/// overlay curve.
pub fn emit_heatmap_svg<W: Write>(results: &[CellResult], options: &HeatmapOptions, mut writer: W) -> Result<()> {
    let svg = render(results, options)?;
    writer.write_all(svg.as_bytes())?;
    Ok(())
}

fn render(results: &[CellResult], options: &HeatmapOptions) -> Result<String> {
    let method = match options.method {
        Some(m) => m,
        None => {
            let mut methods: Vec<Method> = results.iter().map(|r| r.method).collect();
            methods.sort();
            methods.dedup();
            match methods.as_slice() {
                [m] => *m,
                [] => return Err(invalid("no results to plot")),
                _ => return Err(invalid("results hold several methods; choose one")),
            }
        }
    };
    let cells = summarize(results, method);
    if cells.is_empty() {
        return Err(invalid(format!("no results for method {method}")));
    }
    let layout = HeatmapLayout {
        alphas: sorted_distinct(cells.iter().map(|c| c.alpha).collect()),
        betas: sorted_distinct(cells.iter().map(|c| c.beta).collect()),
    };
    if cells.len() != layout.alphas.len() * layout.betas.len() {
        return Err(Error::NonRectangularGrid(format!(
            "{} cells for {} alphas and {} betas",
            cells.len(),
            layout.alphas.len(),
            layout.betas.len()
        )));
    }

    let value = |c: &CellSummary| -> Option<f64> {
        match options.metric {
            Metric::RecoveryRate => c.recovery_rate(),
            Metric::MeanRuntime => c.mean_runtime.map(|d| d.as_secs_f64().max(1e-9)),
        }
    };
    let logs: Vec<f64> = cells.iter().filter_map(value).map(f64::ln).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let intensity = |v: f64| -> f64 {
        match options.metric {
            Metric::RecoveryRate => v.clamp(0.0, 1.0),
            Metric::MeanRuntime if hi > lo => ((v.ln() - lo) / (hi - lo)).clamp(0.0, 1.0),
            Metric::MeanRuntime => 1.0,
        }
    };

    let (w, h) = (layout.width(), layout.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="10">"#
    );
    let title = match options.metric {
        Metric::RecoveryRate => "recovery rate",
        Metric::MeanRuntime => "mean runtime",
    };
    let _ = writeln!(s, r#"<text class="title" x="{LEFT}" y="16">{method} {title}</text>"#);

    let na = layout.alphas.len();
    for c in &cells {
        let i = layout.alphas.iter().position(|&a| a == c.alpha).unwrap_or(0);
        let j = layout.betas.iter().position(|&b| b == c.beta).unwrap_or(0);
        let x = LEFT + j as f64 * CELL;
        let y = TOP + (na - 1 - i) as f64 * CELL;
        match value(c) {
            Some(v) => {
                let t = intensity(v);
                let _ = writeln!(
                    s,
                    r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" data-alpha="{}" data-beta="{}" data-value="{t}"/>"#,
                    fill(t),
                    c.alpha,
                    c.beta
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    r##"<rect class="skipped" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="none" stroke="#cccccc" data-alpha="{}" data-beta="{}"/>"##,
                    c.alpha, c.beta
                );
            }
        }
    }

    // axes
    let plot_w = layout.betas.len() as f64 * CELL;
    let plot_h = na as f64 * CELL;
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let base = TOP + plot_h;
    for &b in &layout.betas {
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.3}" y="{}" text-anchor="middle">{b}</text>"#,
            layout.x_of(b),
            base + 14.0
        );
    }
    for &a in &layout.alphas {
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{}" y="{:.3}" text-anchor="end" dominant-baseline="middle">{a}</text>"#,
            LEFT - 6.0,
            layout.y_of(a)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">beta</text>"#,
        LEFT + plot_w / 2.0,
        base + 34.0
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">alpha</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let curve: Option<Box<dyn Fn(f64) -> f64>> = match options.overlay {
        Overlay::None => None,
        Overlay::Prop1Curve => Some(Box::new(prop1_curve_alpha)),
        Overlay::ConjectureGammaIso(gamma) => {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(invalid(format!("overlay gamma must lie in (0, 1], got {gamma}")));
            }
            Some(Box::new(move |b| conjecture_iso_alpha(b, gamma)))
        }
    };
    if let Some(alpha_of) = curve {
        let (b0, b1) = (layout.betas[0], layout.betas[layout.betas.len() - 1]);
        let mut betas: Vec<f64> = (0..CURVE_SAMPLES)
            .map(|k| b0 + (b1 - b0) * k as f64 / (CURVE_SAMPLES - 1) as f64)
            .chain(layout.betas.iter().copied())
            .collect();
        betas = sorted_distinct(betas);
        let points: Vec<String> = betas
            .iter()
            .map(|&b| format!("{:.3},{:.3}", layout.x_of(b), layout.y_of(alpha_of(b))))
            .collect();
        let _ = writeln!(
            s,
            r#"<clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/></clipPath>"#
        );
        let _ = writeln!(
            s,
            r#"<polyline class="overlay" clip-path="url(#plot-area)" fill="none" stroke="red" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
