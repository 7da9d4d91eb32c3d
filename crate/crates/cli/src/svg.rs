//! Minimal deterministic SVG line plots: one polyline over labeled axes,
//! with optional base-10 log scaling per axis for decay curves.

use crate::fail::Result;
use airyline_core::Error;

/// Axis scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// Base-10 logarithmic; every plotted value must be positive.
    Log,
}

/// Plot description: points in data coordinates plus axis labels/scales.
pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub points: &'a [(f64, f64)],
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

fn transformed(v: f64, scale: Scale, axis: &str) -> Result<f64> {
    match scale {
        Scale::Linear => Ok(v),
        Scale::Log if v > 0.0 => Ok(v.log10()),
        Scale::Log => Err(Error::Domain(format!(
            "log-scale {axis} axis requires positive values, got {v}"
        ))
        .into()),
    }
}

fn tick_label(t: f64, scale: Scale) -> String {
    match scale {
        Scale::Linear => format!("{t:.4}"),
        Scale::Log => format!("1e{t:.2}"),
    }
}

/// Render the plot. Coordinates are written with fixed precision so the
/// output is byte-identical across runs.
pub fn render(plot: &LinePlot<'_>) -> Result<String> {
    if plot.points.len() < 2 {
        return Err(Error::Config(format!(
            "an SVG plot needs at least 2 points, got {}",
            plot.points.len()
        ))
        .into());
    }
    let xs: Vec<f64> = plot
        .points
        .iter()
        .map(|p| transformed(p.0, plot.x_scale, "x"))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = plot
        .points
        .iter()
        .map(|p| transformed(p.1, plot.y_scale, "y"))
        .collect::<Result<_>>()?;
    let (x_lo, x_hi) = padded_range(&xs);
    let (y_lo, y_hi) = padded_range(&ys);
    let to_px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
    let to_py = |y: f64| HEIGHT - MARGIN_BOTTOM - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" \
         height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"18\">{}</text>\n",
        WIDTH / 2.0,
        escape(plot.title)
    ));

    // axes
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    s.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n"
    ));
    s.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"black\"/>\n"
    ));

    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let tx = x_lo + f * (x_hi - x_lo);
        let px = to_px(tx);
        s.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{y0:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            y0 + 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            y0 + 22.0,
            tick_label(tx, plot.x_scale)
        ));
        let ty = y_lo + f * (y_hi - y_lo);
        let py = to_py(ty);
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            x0 - 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" \
             font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            x0 - 10.0,
            py + 4.0,
            tick_label(ty, plot.y_scale)
        ));
    }

    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(plot.x_label)
    ));
    s.push_str(&format!(
        "<text x=\"22\" y=\"{:.1}\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"14\" \
         transform=\"rotate(-90 22 {:.1})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(plot.y_label)
    ));

    let coords: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", to_px(x), to_py(y)))
        .collect();
    s.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
        coords.join(" ")
    ));
    for (x, y) in xs.iter().zip(&ys) {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\"/>\n",
            to_px(*x),
            to_py(*y)
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn padded_range(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
