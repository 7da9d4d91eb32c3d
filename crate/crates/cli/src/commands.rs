//! One function per subcommand. Each loads its inputs, runs the library,
//! renders the result in the requested format, and writes it to `--out`
//! or stdout.

use crate::config::load_run_config;
use crate::fail::Result;
use crate::output::{cell, csv, json, require_format, write_output, Format};
use crate::svg::{self, LinePlot, Scale};
use airyline_core::ensembles::{
    gibbs_resample_check, gue_edge_sample, EnsembleSpec, GibbsCheckParams, RngStream,
};
use airyline_core::fredholm::{count_distribution, generating_function, tracy_widom_f2};
use airyline_core::kernels::{k2_ext_with_estimate, SemigroupSide};
use airyline_core::mixing::{mixing_sweep, trace_norm_offdiag, MixingExperiment};
use airyline_core::Error;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

/// `airy --x`: Airy function and derivative in full (round-trip) precision.
pub fn airy(x: f64) -> Result<()> {
    let v = airyline_core::airy::airy_ai(x)?;
    write_output(
        None,
        &format!("x        = {x}\nai       = {}\nai_prime = {}\n", v.ai, v.ai_prime),
    )
}

/// `kernel --s --x --t --y`: extended-kernel value and error estimate.
pub fn kernel(s: f64, x: f64, t: f64, y: f64) -> Result<()> {
    let (value, estimate) = k2_ext_with_estimate(s, x, t, y)?;
    write_output(
        None,
        &format!("value          = {value}\nerror_estimate = {estimate}\n"),
    )
}

#[derive(Serialize)]
struct GenfunReport {
    value_re: f64,
    value_im: f64,
    error_estimate: f64,
    nodes_used: usize,
    trunc_len: f64,
}

/// `genfun --config`: generating-function determinant of the configured
/// intervals.
pub fn genfun(
    config: &PathBuf,
    tol: Option<f64>,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json], "genfun")?;
    let rc = load_run_config(config)?;
    let res = generating_function(&rc.counting, tol.unwrap_or(rc.tolerance))?;
    let rendered = match format {
        Format::Csv => csv(
            "value_re,value_im,error_estimate,nodes_used",
            &[vec![
                cell(res.value.re),
                cell(res.value.im),
                cell(res.error_estimate),
                res.nodes_used.to_string(),
            ]],
        ),
        _ => json(&GenfunReport {
            value_re: res.value.re,
            value_im: res.value.im,
            error_estimate: res.error_estimate,
            nodes_used: res.nodes_used,
            trunc_len: res.trunc_len,
        })?,
    };
    write_output(out, &rendered)
}

#[derive(Serialize)]
struct Tw2Row {
    s: f64,
    f2: f64,
}

/// `tw2`: the GUE edge distribution over a grid of arguments.
pub fn tw2(from: f64, to: f64, step: f64, out: Option<&PathBuf>, format: Format) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json, Format::Svg], "tw2")?;
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(Error::Config(format!(
            "grid requires finite from/to and a positive step, got from {from} \
             to {to} step {step}"
        ))
        .into());
    }
    if to < from {
        return Err(Error::Config(format!("empty grid: to {to} < from {from}")).into());
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| from + i as f64 * step).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&s| tracy_widom_f2(s))
        .collect::<airyline_core::Result<_>>()?;
    let rendered = match format {
        Format::Csv => csv(
            "s,F2",
            &grid
                .iter()
                .zip(&values)
                .map(|(&s, &f)| vec![cell(s), cell(f)])
                .collect::<Vec<_>>(),
        ),
        Format::Json => json(
            &grid
                .iter()
                .zip(&values)
                .map(|(&s, &f2)| Tw2Row { s, f2 })
                .collect::<Vec<_>>(),
        )?,
        Format::Svg => {
            let points: Vec<(f64, f64)> = grid.iter().cloned().zip(values.iter().cloned()).collect();
            svg::render(&LinePlot {
                title: "GUE edge distribution",
                x_label: "s",
                y_label: "F2(s)",
                x_scale: Scale::Linear,
                y_scale: Scale::Linear,
                points: &points,
            })?
        }
    };
    write_output(out, &rendered)
}

#[derive(Serialize)]
struct CountsReport {
    time_index: usize,
    interval_index: usize,
    k_max: usize,
    probabilities: Vec<f64>,
}

/// `counts`: distribution of the point count in one configured interval.
pub fn counts(
    config: &PathBuf,
    time_index: usize,
    interval_index: usize,
    k_max: usize,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json], "counts")?;
    let rc = load_run_config(config)?;
    let target = rc.counting.component_index(time_index, interval_index)?;
    // The target's weight is replaced by the inversion wheel; every other
    // weight scales the statistic, and only real weights in [0, 1] keep it
    // a (sub-)probability distribution.
    for (i, w) in rc.counting.weights().iter().enumerate() {
        if i != target && (w.im != 0.0 || !(0.0..=1.0).contains(&w.re)) {
            return Err(Error::Config(format!(
                "counts requires real z in [0, 1] on non-target intervals \
                 (z = 1 gives the plain marginal law, z = 0 conditions on \
                 that interval being empty); component {i} has z = {w}"
            ))
            .into());
        }
    }
    let probs = count_distribution(&rc.counting, (time_index, interval_index), k_max)?;
    let rendered = match format {
        Format::Csv => csv(
            "k,probability",
            &probs
                .iter()
                .enumerate()
                .map(|(k, &p)| vec![k.to_string(), cell(p)])
                .collect::<Vec<_>>(),
        ),
        _ => json(&CountsReport {
            time_index,
            interval_index,
            k_max,
            probabilities: probs,
        })?,
    };
    write_output(out, &rendered)
}

#[derive(Serialize)]
struct MixingRow {
    #[serde(rename = "T")]
    shift: f64,
    remainder: [f64; 2],
    abs_remainder: f64,
    det_joint: [f64; 2],
    det_left: [f64; 2],
    det_right: [f64; 2],
    error_estimate: f64,
    nodes_used: usize,
}

/// `mixing`: joint-vs-factorized determinant remainder across a ladder of
/// time shifts. The CSV stores the real parts of the three determinants;
/// the JSON format carries full `[re, im]` pairs.
pub fn mixing(
    config: &PathBuf,
    shifts: &[f64],
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json, Format::Svg], "mixing")?;
    let rc = load_run_config(config)?;
    let exp = match &rc.late_weights {
        Some(late) => MixingExperiment::new(rc.counting.clone(), late, shifts)?,
        None => MixingExperiment::symmetric(rc.counting.clone(), shifts)?,
    };
    let sweep = mixing_sweep(&exp)?;
    let rendered = match format {
        Format::Csv => csv(
            "T,R_re,R_im,abs_R,det_joint,det_left,det_right",
            &shifts
                .iter()
                .zip(&sweep.details)
                .map(|(&t, d)| {
                    vec![
                        cell(t),
                        cell(d.remainder.re),
                        cell(d.remainder.im),
                        cell(d.remainder.norm()),
                        cell(d.det_joint.re),
                        cell(d.det_left.re),
                        cell(d.det_right.re),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => json(
            &shifts
                .iter()
                .zip(&sweep.details)
                .map(|(&t, d)| MixingRow {
                    shift: t,
                    remainder: [d.remainder.re, d.remainder.im],
                    abs_remainder: d.remainder.norm(),
                    det_joint: [d.det_joint.re, d.det_joint.im],
                    det_left: [d.det_left.re, d.det_left.im],
                    det_right: [d.det_right.re, d.det_right.im],
                    error_estimate: d.error_estimate,
                    nodes_used: d.nodes_used,
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Svg => {
            let points: Vec<(f64, f64)> = shifts
                .iter()
                .cloned()
                .zip(sweep.curve.magnitude().iter().cloned())
                .collect();
            svg::render(&LinePlot {
                title: "Mixing remainder decay",
                x_label: "time shift T",
                y_label: "|R(T)|",
                x_scale: Scale::Log,
                y_scale: Scale::Log,
                points: &points,
            })?
        }
    };
    write_output(out, &rendered)
}

/// Which spectral side the off-diagonal semigroup block is compressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SideArg {
    /// Complementary (positive-eigenspace) compression.
    Pos,
    /// Range (negative-eigenspace) compression.
    Neg,
}

impl SideArg {
    fn to_side(self) -> SemigroupSide {
        match self {
            SideArg::Pos => SemigroupSide::PositiveEigenspace,
            SideArg::Neg => SemigroupSide::NegativeEigenspace,
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    y: f64,
    trace_norm: f64,
    y_times_norm: f64,
}

/// `trace-decay`: trace norms of off-diagonal semigroup blocks across a
/// ladder of time gaps.
pub fn trace_decay(
    a: f64,
    side: SideArg,
    ys: &[f64],
    length: f64,
    nodes: usize,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json, Format::Svg], "trace-decay")?;
    if ys.is_empty() {
        return Err(Error::Config("no gaps given; pass --ys y1,y2,...".into()).into());
    }
    let norms: Vec<f64> = ys
        .par_iter()
        .map(|&y| trace_norm_offdiag(a, y, side.to_side(), length, nodes))
        .collect::<airyline_core::Result<_>>()?;
    let rows: Vec<TraceRow> = ys
        .iter()
        .zip(&norms)
        .map(|(&y, &n)| TraceRow {
            y,
            trace_norm: n,
            y_times_norm: y * n,
        })
        .collect();
    let rendered = match format {
        Format::Csv => csv(
            "y,trace_norm,y_times_norm",
            &rows
                .iter()
                .map(|r| vec![cell(r.y), cell(r.trace_norm), cell(r.y_times_norm)])
                .collect::<Vec<_>>(),
        ),
        Format::Json => json(&rows)?,
        Format::Svg => {
            let points: Vec<(f64, f64)> =
                ys.iter().cloned().zip(norms.iter().cloned()).collect();
            svg::render(&LinePlot {
                title: "Off-diagonal block trace-norm decay",
                x_label: "time gap y",
                y_label: "trace norm",
                x_scale: Scale::Log,
                y_scale: Scale::Log,
                points: &points,
            })?
        }
    };
    write_output(out, &rendered)
}

#[derive(Serialize)]
struct GibbsReport {
    ks_stat: f64,
    p_value: f64,
    acceptance_rate: f64,
}

/// `gibbs-check`: draw ordered bridge ensembles, redraw a middle window
/// from its conditional law, and report the worst per-curve KS comparison.
pub fn gibbs_check(
    k: usize,
    grid: usize,
    samples: usize,
    seed: u64,
    out: Option<&PathBuf>,
) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("at least one curve is required".into()).into());
    }
    if grid < 8 {
        return Err(Error::Config(format!("grid {grid} is too coarse; need at least 8")).into());
    }
    // Evenly spread entrance/exit levels, top first, two units apart: wide
    // enough that rejection sampling of the base ensembles stays effective.
    let levels: Vec<f64> = (0..k).map(|i| (k - 1) as f64 - 2.0 * i as f64).collect();
    let spec = EnsembleSpec::free(0.0, 1.0, grid, &levels, &levels)?;
    let params = GibbsCheckParams {
        seed,
        spec,
        curves: (0, k - 1),
        window: (3 * grid / 8, 5 * grid / 8),
        samples,
    };
    let result = gibbs_resample_check(&params)?;
    if result.max_outside_delta != 0.0 {
        return Err(Error::Numeric(format!(
            "window redraw changed values outside the window (max delta {})",
            result.max_outside_delta
        ))
        .into());
    }
    if result.ordering_violations != 0 {
        return Err(Error::Numeric(format!(
            "{} redrawn samples violate the strict curve ordering",
            result.ordering_violations
        ))
        .into());
    }
    let rendered = json(&GibbsReport {
        ks_stat: result.max_ks_stat(),
        p_value: result.worst_p_value(),
        acceptance_rate: result.acceptance_rate,
    })?;
    write_output(out, &rendered)
}

#[derive(Serialize)]
struct GueReport {
    n: usize,
    samples: usize,
    seed: u64,
    mean: f64,
    values: Vec<f64>,
}

/// `gue-edge`: rescaled largest-eigenvalue samples of the tridiagonal
/// Gaussian unitary ensemble, with their mean as a summary row.
pub fn gue_edge(
    n: usize,
    samples: usize,
    seed: u64,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    require_format(format, &[Format::Csv, Format::Json], "gue-edge")?;
    let values = gue_edge_sample(&RngStream::new(seed, 0), n, samples)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let rendered = match format {
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![i.to_string(), cell(v)])
                .collect();
            rows.push(vec!["mean".to_string(), cell(mean)]);
            csv("index,value", &rows)
        }
        _ => json(&GueReport {
            n,
            samples,
            seed,
            mean,
            values,
        })?,
    };
    write_output(out, &rendered)
}
