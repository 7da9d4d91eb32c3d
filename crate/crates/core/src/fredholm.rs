//! Block Fredholm determinants for multi-time counting statistics.
//!
//! A `CountingConfig` is a list of components `(time, interval, weight)`.
//! The generating function `E[prod_i w_i^{N_i}]` of the interval counts
//! `N_i` equals `det(I - M)` where `M` is the block operator
//!
//! `M_{ij}(x, y) = sqrt(1 - w_i) K2ext(t_i, x; t_j, y) sqrt(1 - w_j)`
//!
//! acting on the direct sum of `L^2(interval_i)`. The symmetric square-root
//! splitting is a similarity transform of the usual one-sided weighting, so
//! the determinant is unchanged, while equal-weight configurations stay
//! (real-)symmetric, which the eigenvalue cross-checks rely on.
//!
//! Discretization is Nystrom: Gauss-Legendre nodes per interval (unbounded
//! intervals truncated at `lo + trunc_len`), entries scaled by
//! `sqrt(w_p w_q)`. `generating_function` doubles the node count until two
//! successive determinants agree and, for unbounded intervals, doubles the
//! truncation length until that stabilizes too; failure to converge raises
//! an accuracy error carrying the best value.
//!
//! Configurations store a base time plus per-component offsets and the
//! kernel depends on time differences only, so `shifted_by` is exact: a
//! shifted configuration reproduces bit-identical determinants.

use crate::error::{Error, Result};
use crate::kernels::{damped_block, k2_raw, oscillatory_block, KERNEL_TOL};
use crate::linalg::lu_det;
use crate::quadrature::{gauss_legendre, map_interval};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

/// Absolute tolerance of the adaptive determinant refinement.
pub const DET_TOL: f64 = 1e-9;
/// Node-doubling ladder bounds (nodes per component).
pub const NODES_MIN: usize = 16;
pub const NODES_MAX: usize = 2048;
/// Truncation-doubling ladder for unbounded intervals.
pub const TRUNC_MIN: f64 = 8.0;
pub const TRUNC_MAX: f64 = 32.0;

const WEIGHT_SLACK: f64 = 1e-9;
const MIN_WIDTH: f64 = 1e-12;

/// One counting component: the number of points in `interval` at `time`,
/// marked with the generating-function weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub time: f64,
    /// `(lo, hi)`; `hi` may be `f64::INFINITY`.
    pub interval: (f64, f64),
    pub weight: Complex64,
}

/// Validated multi-component counting configuration.
#[derive(Debug, Clone)]
pub struct CountingConfig {
    base_time: f64,
    offsets: Vec<f64>,
    intervals: Vec<(f64, f64)>,
    weights: Vec<Complex64>,
}

impl CountingConfig {
    pub fn new(components: &[Component]) -> Result<Self> {
        for (i, c) in components.iter().enumerate() {
            if !c.time.is_finite() {
                return Err(Error::Config(format!("component {i}: time {} not finite", c.time)));
            }
            let (lo, hi) = c.interval;
            if !lo.is_finite() {
                return Err(Error::Config(format!(
                    "component {i}: lower endpoint {lo} must be finite"
                )));
            }
            if hi.is_nan() || hi <= lo {
                return Err(Error::Config(format!(
                    "component {i}: empty interval ({lo}, {hi})"
                )));
            }
            if hi.is_finite() && hi - lo < MIN_WIDTH {
                return Err(Error::Config(format!(
                    "component {i}: interval width {} below {MIN_WIDTH}",
                    hi - lo
                )));
            }
            if !c.weight.re.is_finite() || !c.weight.im.is_finite() {
                return Err(Error::Config(format!("component {i}: weight not finite")));
            }
            if c.weight.norm() > 1.0 + WEIGHT_SLACK {
                return Err(Error::Config(format!(
                    "component {i}: |weight| = {} exceeds the closed unit disk",
                    c.weight.norm()
                )));
            }
        }
        let base_time = components.first().map_or(0.0, |c| c.time);
        let cfg = CountingConfig {
            base_time,
            offsets: components.iter().map(|c| c.time - base_time).collect(),
            intervals: components.iter().map(|c| c.interval).collect(),
            weights: components.iter().map(|c| c.weight).collect(),
        };
        // Components sharing a time must have essentially disjoint intervals
        // (touching endpoints are fine); overlaps would need a different
        // weighting on the intersection than either block provides.
        let mut by_time: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, off) in cfg.offsets.iter().enumerate() {
            by_time.entry(off.to_bits()).or_default().push(i);
        }
        for group in by_time.values() {
            let mut sorted = group.clone();
            sorted.sort_by(|&a, &b| {
                cfg.intervals[a]
                    .0
                    .partial_cmp(&cfg.intervals[b].0)
                    .unwrap()
            });
            for pair in sorted.windows(2) {
                let (_, prev_hi) = cfg.intervals[pair[0]];
                let (next_lo, _) = cfg.intervals[pair[1]];
                if next_lo < prev_hi {
                    return Err(Error::Config(format!(
                        "components {} and {} overlap at a shared time",
                        pair[0], pair[1]
                    )));
                }
            }
        }
        Ok(cfg)
    }

    pub fn single(time: f64, interval: (f64, f64), weight: Complex64) -> Result<Self> {
        Self::new(&[Component {
            time,
            interval,
            weight,
        }])
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn component(&self, i: usize) -> Component {
        Component {
            time: self.base_time + self.offsets[i],
            interval: self.intervals[i],
            weight: self.weights[i],
        }
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Distinct component times in increasing order.
    pub fn times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.offsets.iter().map(|o| self.base_time + o).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    }

    /// Flat component index for nested `(time index, interval index)`
    /// addressing: times in increasing order, intervals at a shared time in
    /// increasing order of lower endpoint.
    pub fn component_index(&self, time_index: usize, interval_index: usize) -> Result<usize> {
        let ts = self.times();
        let Some(&t) = ts.get(time_index) else {
            return Err(Error::Config(format!(
                "time index {time_index} out of range: {} distinct times",
                ts.len()
            )));
        };
        let mut at_t: Vec<usize> = (0..self.len())
            .filter(|&i| self.base_time + self.offsets[i] == t)
            .collect();
        at_t.sort_by(|&a, &b| self.intervals[a].0.partial_cmp(&self.intervals[b].0).unwrap());
        at_t.get(interval_index).copied().ok_or_else(|| {
            Error::Config(format!(
                "interval index {interval_index} out of range: {} intervals at time {t}",
                at_t.len()
            ))
        })
    }

    pub fn has_unbounded(&self) -> bool {
        self.intervals.iter().any(|&(_, hi)| hi.is_infinite())
    }

    /// Same configuration with every time moved by `c`. Only the stored base
    /// time changes; the time differences driving the kernel are untouched,
    /// so downstream determinants are bit-identical.
    pub fn shifted_by(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Config(format!("shift {c} not finite")));
        }
        let mut out = self.clone();
        out.base_time += c;
        Ok(out)
    }

    /// Replace the component weights (lengths must match).
    pub fn with_weights(&self, weights: &[Complex64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Config(format!(
                "{} weights for {} components",
                weights.len(),
                self.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.re.is_finite() || !w.im.is_finite() || w.norm() > 1.0 + WEIGHT_SLACK {
                return Err(Error::Config(format!("weight {i} invalid: {w}")));
            }
        }
        let mut out = self.clone();
        out.weights = weights.to_vec();
        Ok(out)
    }
}

/// Per-component Nystrom grids and the weight-scaled kernel matrix without
/// any generating-function weights applied.
pub(crate) struct RawKernel {
    pub(crate) dim: usize,
    /// Half-open node index range of each component.
    pub(crate) spans: Vec<(usize, usize)>,
    /// `sqrt(w_p) K2ext(t_i, x_p; t_j, y_q) sqrt(w_q)`, row-major.
    pub(crate) vals: Vec<f64>,
}

pub(crate) fn raw_kernel(
    cfg: &CountingConfig,
    nodes_per_comp: usize,
    trunc_len: f64,
) -> Result<RawKernel> {
    let rule = gauss_legendre(nodes_per_comp)?;
    let m = cfg.len();
    let mut nodes: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut sqrt_w: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut spans = Vec::with_capacity(m);
    let mut dim = 0;
    for &(lo, hi) in &cfg.intervals {
        let mapped = map_interval(&rule, lo, hi, trunc_len)?;
        spans.push((dim, dim + mapped.nodes.len()));
        dim += mapped.nodes.len();
        sqrt_w.push(mapped.weights.iter().map(|w| w.sqrt()).collect());
        nodes.push(mapped.nodes);
    }
    let mut vals = vec![0.0; dim * dim];
    for i in 0..m {
        for j in 0..m {
            let gap = cfg.offsets[i] - cfg.offsets[j];
            let xs = &nodes[i];
            let ys = &nodes[j];
            let block: Vec<f64> = if gap == 0.0 {
                if i == j {
                    // one-time kernel is symmetric: fill the upper triangle
                    // and mirror, keeping the block exactly symmetric
                    let n = xs.len();
                    let mut b = vec![0.0; n * n];
                    for p in 0..n {
                        for q in p..n {
                            let v = k2_raw(xs[p], xs[q]);
                            b[p * n + q] = v;
                            b[q * n + p] = v;
                        }
                    }
                    b
                } else {
                    let cols = ys.len();
                    let mut b = vec![0.0; xs.len() * cols];
                    for (p, &x) in xs.iter().enumerate() {
                        for (q, &y) in ys.iter().enumerate() {
                            b[p * cols + q] = k2_raw(x, y);
                        }
                    }
                    b
                }
            } else if gap > 0.0 {
                damped_block(gap, xs, ys, KERNEL_TOL)?.0
            } else {
                oscillatory_block(-gap, xs, ys, KERNEL_TOL)?.0
            };
            let (ri, _) = spans[i];
            let (rj, _) = spans[j];
            let cols = ys.len();
            for p in 0..xs.len() {
                for q in 0..cols {
                    vals[(ri + p) * dim + (rj + q)] =
                        sqrt_w[i][p] * block[p * cols + q] * sqrt_w[j][q];
                }
            }
        }
    }
    Ok(RawKernel { dim, spans, vals })
}

/// `det(I - S K S)` for one weight assignment, `S = diag(sqrt(1 - w_i))`.
fn det_for_weights(raw: &RawKernel, weights: &[Complex64]) -> Complex64 {
    det_for_component_range(raw, weights, 0..weights.len())
}

/// Determinant of the principal submatrix spanned by a contiguous range of
/// components, on the shared node grid. The full range gives the joint
/// determinant; prefixes/suffixes give marginals with identical
/// discretization error, which mixing remainders difference against.
pub(crate) fn det_for_component_range(
    raw: &RawKernel,
    weights: &[Complex64],
    comps: std::ops::Range<usize>,
) -> Complex64 {
    if comps.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let scales: Vec<Complex64> = weights
        .iter()
        .map(|w| (Complex64::new(1.0, 0.0) - w).sqrt())
        .collect();
    let lo = raw.spans[comps.start].0;
    let hi = raw.spans[comps.end - 1].1;
    let d = hi - lo;
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    for i in comps.clone() {
        for j in comps.clone() {
            let s = scales[i] * scales[j];
            let (r0, r1) = raw.spans[i];
            let (c0, c1) = raw.spans[j];
            for r in r0..r1 {
                for c in c0..c1 {
                    a[(r - lo) * d + (c - lo)] = -s * raw.vals[r * raw.dim + c];
                }
            }
        }
    }
    for r in 0..d {
        a[r * d + r] += 1.0;
    }
    lu_det(&mut a, d)
}

/// Symmetrized Nystrom discretization of the block operator at a fixed
/// resolution, with each component's row span retained for block-level
/// access. Entry `(r, c)` with `r` a node of component `i` and `c` a node
/// of component `j` is
///
/// `sqrt(w_r) sqrt(1 - z_i) K2ext(t_i, x_r; t_j, x_c) sqrt(1 - z_j) sqrt(w_c)`
///
/// and `det(I - entries)` approximates the generating function.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    /// Total node count.
    pub dim: usize,
    /// Half-open row range of each component's nodes.
    pub spans: Vec<(usize, usize)>,
    /// Dense symmetrized entries.
    pub entries: crate::linalg::CMat,
}

impl BlockMatrix {
    /// Row of node `p` of component `i`.
    pub fn row_index(&self, component: usize, node: usize) -> usize {
        let (lo, hi) = self.spans[component];
        assert!(node < hi - lo, "node {node} outside component span");
        lo + node
    }
}

/// Discretized block matrix (with the configuration's own weights applied)
/// at an explicit resolution of `nodes_per_comp` in `[4, 2048]` nodes.
pub fn build_block_matrix(
    cfg: &CountingConfig,
    nodes_per_comp: usize,
    trunc_len: f64,
) -> Result<BlockMatrix> {
    if !cfg.is_empty() && !(4..=2048).contains(&nodes_per_comp) {
        return Err(Error::Config(format!(
            "nodes per component {nodes_per_comp} outside [4, 2048]"
        )));
    }
    let raw = raw_kernel(cfg, nodes_per_comp.max(1), trunc_len)?;
    let scales: Vec<Complex64> = cfg
        .weights
        .iter()
        .map(|w| (Complex64::new(1.0, 0.0) - w).sqrt())
        .collect();
    let d = raw.dim;
    let mut m = crate::linalg::CMat::zeros(d);
    for (i, &(r0, r1)) in raw.spans.iter().enumerate() {
        for (j, &(c0, c1)) in raw.spans.iter().enumerate() {
            let s = scales[i] * scales[j];
            for r in r0..r1 {
                for c in c0..c1 {
                    m.set(r, c, s * raw.vals[r * d + c]);
                }
            }
        }
    }
    Ok(BlockMatrix {
        dim: d,
        spans: raw.spans,
        entries: m,
    })
}

/// `det(I - M)` of a discretized block matrix, by LU factorization with
/// partial pivoting. Rejects non-finite entries.
pub fn fredholm_det(matrix: &BlockMatrix) -> Result<Complex64> {
    let d = matrix.dim;
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            let v = matrix.entries.at(r, c);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numeric(format!(
                    "matrix entry ({r}, {c}) = {v} is not finite"
                )));
            }
            a[r * d + c] = -v;
        }
    }
    for r in 0..d {
        a[r * d + r] += 1.0;
    }
    Ok(lu_det(&mut a, d))
}

/// Adaptive determinant value with its convergence certificate.
#[derive(Debug, Clone, Copy)]
pub struct DetResult {
    pub value: Complex64,
    /// Absolute difference between the last two node-doubling levels.
    pub error_estimate: f64,
    /// Nodes per component at acceptance.
    pub nodes_used: usize,
    /// Truncation length at acceptance (0 when all intervals are bounded).
    pub trunc_len: f64,
}

pub(crate) struct BatchResult {
    pub values: Vec<Complex64>,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub trunc_len: f64,
}

/// Generating function `E[prod_i w_i^{N_i}]` with adaptive refinement to
/// the requested absolute tolerance (`DET_TOL` is the standard choice;
/// anything below `1e-12` is rejected as unreachable by the ladder).
pub fn generating_function(cfg: &CountingConfig, tol: f64) -> Result<DetResult> {
    let batch = generating_function_batch(cfg, std::slice::from_ref(&cfg.weights), tol)?;
    Ok(DetResult {
        value: batch.values[0],
        error_estimate: batch.error_estimate,
        nodes_used: batch.nodes_used,
        trunc_len: batch.trunc_len,
    })
}

/// Evaluate the determinant for many weight assignments on one shared
/// configuration. The kernel matrix — the expensive part — is built once
/// per refinement level and reused for every assignment; refinement stops
/// when the worst assignment has converged.
pub(crate) fn generating_function_batch(
    cfg: &CountingConfig,
    weight_rows: &[Vec<Complex64>],
    tol: f64,
) -> Result<BatchResult> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!(
            "tolerance {tol} below the supported floor 1e-12"
        )));
    }
    if cfg.is_empty() {
        return Ok(BatchResult {
            values: vec![Complex64::new(1.0, 0.0); weight_rows.len()],
            error_estimate: 0.0,
            nodes_used: 0,
            trunc_len: 0.0,
        });
    }
    for row in weight_rows {
        if row.len() != cfg.len() {
            return Err(Error::Config(format!(
                "weight row has {} entries for {} components",
                row.len(),
                cfg.len()
            )));
        }
        for w in row {
            if !w.re.is_finite() || !w.im.is_finite() || w.norm() > 1.0 + WEIGHT_SLACK {
                return Err(Error::Config(format!("batch weight invalid: {w}")));
            }
        }
    }
    let truncs: Vec<f64> = if cfg.has_unbounded() {
        let mut t = vec![TRUNC_MIN];
        while *t.last().unwrap() < TRUNC_MAX {
            let next = t.last().unwrap() * 2.0;
            t.push(next);
        }
        t
    } else {
        vec![0.0]
    };
    let mut prev_trunc: Option<Vec<Complex64>> = None;
    let mut best: Option<BatchResult> = None;
    for &trunc in &truncs {
        let mut prev_nodes: Option<Vec<Complex64>> = None;
        let mut node_converged: Option<(Vec<Complex64>, f64, usize)> = None;
        let mut n = NODES_MIN;
        while n <= NODES_MAX {
            let raw = raw_kernel(cfg, n, trunc)?;
            let values: Vec<Complex64> = weight_rows
                .par_iter()
                .map(|row| det_for_weights(&raw, row))
                .collect();
            if let Some(p) = prev_nodes {
                let diff = max_cdiff(&p, &values);
                let better = best
                    .as_ref()
                    .map_or(true, |b| diff < b.error_estimate);
                if better {
                    best = Some(BatchResult {
                        values: values.clone(),
                        error_estimate: diff,
                        nodes_used: n,
                        trunc_len: trunc,
                    });
                }
                if diff <= 0.5 * tol {
                    node_converged = Some((values, diff, n));
                    break;
                }
            }
            prev_nodes = Some(values);
            n *= 2;
        }
        let Some((values, node_diff, n_used)) = node_converged else {
            // More truncation makes node convergence strictly harder;
            // give up with the best value seen.
            let b = best.expect("ladder ran at least two sizes");
            return Err(Error::Accuracy {
                message: format!(
                    "determinant node ladder exhausted at {NODES_MAX} nodes \
                     (trunc_len {trunc}); residual {:.3e}",
                    b.error_estimate
                ),
                best: b.values[0],
                estimate: b.error_estimate,
            });
        };
        if !cfg.has_unbounded() {
            return Ok(BatchResult {
                values,
                error_estimate: node_diff,
                nodes_used: n_used,
                trunc_len: 0.0,
            });
        }
        if let Some(pv) = prev_trunc {
            let tdiff = max_cdiff(&pv, &values);
            if tdiff <= 0.5 * tol {
                return Ok(BatchResult {
                    values,
                    error_estimate: node_diff.max(tdiff),
                    nodes_used: n_used,
                    trunc_len: trunc,
                });
            }
        }
        prev_trunc = Some(values);
    }
    let b = best.expect("trunc ladder ran");
    Err(Error::Accuracy {
        message: format!(
            "determinant truncation ladder exhausted at length {TRUNC_MAX}; \
             residual {:.3e}",
            b.error_estimate
        ),
        best: b.values[0],
        estimate: b.error_estimate,
    })
}

fn max_cdiff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Probability that every interval of a zero-weight configuration is empty
/// at its time. Requires every component weight to be exactly zero.
pub fn gap_probability(cfg: &CountingConfig) -> Result<f64> {
    for (i, w) in cfg.weights().iter().enumerate() {
        if *w != Complex64::new(0.0, 0.0) {
            return Err(Error::Config(format!(
                "gap probability requires weight 0 on every component; \
                 component {i} carries {w}"
            )));
        }
    }
    let r = generating_function(cfg, DET_TOL)?;
    if r.value.im.abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "gap probability has imaginary part {:.3e}",
            r.value.im
        )));
    }
    Ok(r.value.re)
}

/// Cumulative distribution of the largest point at a fixed time:
/// `P(max <= s)` for `s` in `[-10, 10]`.
pub fn tracy_widom_f2(s: f64) -> Result<f64> {
    if !s.is_finite() || !(-10.0..=10.0).contains(&s) {
        return Err(Error::Domain(format!("s = {s} outside [-10, 10]")));
    }
    let cfg = CountingConfig::single(0.0, (s, f64::INFINITY), Complex64::new(0.0, 0.0))?;
    gap_probability(&cfg)
}

/// Distribution of the count in one component of a configuration, for
/// counts `0..=k_max` (`k_max <= 64`). The target is addressed as
/// `(time index, interval index)` — times in increasing order, intervals
/// at a time in increasing order of lower endpoint. The target's weight is
/// replaced by unit-circle evaluation points and the coefficients recovered
/// by an inverse discrete Fourier transform; all other components keep
/// their configured weights (weight 1 on every other component gives the
/// plain marginal law of the target; weight 0 restricts to the event that
/// the other interval is empty). The circle size is at least
/// `4 (k_max + 1)` and also large enough that mass beyond it (which would
/// alias) is negligible for the interval's expected count.
pub fn count_distribution(
    cfg: &CountingConfig,
    target: (usize, usize),
    k_max: usize,
) -> Result<Vec<f64>> {
    if k_max > 64 {
        return Err(Error::Config(format!("k_max {k_max} exceeds the cap 64")));
    }
    let idx = cfg.component_index(target.0, target.1)?;
    let m = circle_size(&[cfg.component(idx).interval], Some(k_max))?;
    let rows: Vec<Vec<Complex64>> = (0..m)
        .map(|j| {
            let mut w = cfg.weights().to_vec();
            w[idx] = circle_point(j, m);
            w
        })
        .collect();
    let batch = generating_function_batch(cfg, &rows, DET_TOL)?;
    invert_circle_1d(&batch.values, k_max)
}

/// Joint distribution of two interval counts, `p[k1][k2]` for
/// `k1, k2 <= k_max` (`None`: everything the inversion wheel resolves);
/// shared machinery for the covariance route.
pub(crate) fn joint_count_distribution(
    t1: f64,
    i1: (f64, f64),
    t2: f64,
    i2: (f64, f64),
    k_max: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let cfg = CountingConfig::new(&[
        Component {
            time: t1,
            interval: i1,
            weight: Complex64::new(0.0, 0.0),
        },
        Component {
            time: t2,
            interval: i2,
            weight: Complex64::new(0.0, 0.0),
        },
    ])?;
    let m = circle_size(&[i1, i2], k_max)?;
    let k_out = k_max.map_or(m - 1, |k| k.min(m - 1));
    let mut rows = Vec::with_capacity(m * m);
    for j1 in 0..m {
        for j2 in 0..m {
            rows.push(vec![circle_point(j1, m), circle_point(j2, m)]);
        }
    }
    let batch = generating_function_batch(&cfg, &rows, DET_TOL)?;
    let mut out = Vec::with_capacity(k_out + 1);
    let minv = 1.0 / (m * m) as f64;
    for k1 in 0..=k_out {
        let mut row = Vec::with_capacity(k_out + 1);
        for k2 in 0..=k_out {
            let mut acc = Complex64::new(0.0, 0.0);
            for j1 in 0..m {
                for j2 in 0..m {
                    let phase = circle_point((j1 * k1 + j2 * k2) % m, m).conj();
                    acc += batch.values[j1 * m + j2] * phase;
                }
            }
            row.push(check_probability(acc * minv)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Full-wheel count distribution of a single interval (every count the
/// inversion circle resolves); the moment route for variances.
pub(crate) fn count_pmf_full(time: f64, interval: (f64, f64)) -> Result<Vec<f64>> {
    let cfg = CountingConfig::single(time, interval, Complex64::new(0.0, 0.0))?;
    let m = circle_size(&[interval], None)?;
    let rows: Vec<Vec<Complex64>> = (0..m).map(|j| vec![circle_point(j, m)]).collect();
    let batch = generating_function_batch(&cfg, &rows, DET_TOL)?;
    invert_circle_1d(&batch.values, m - 1)
}

/// Circle size for DFT inversion: a power of two at least `4 (k_max + 1)`
/// and large enough that the aliased tail mass is negligible. The tail
/// scale is estimated from the expected count (the integral of the kernel
/// diagonal over the interval); interval counts concentrate within a few
/// standard deviations of it.
fn circle_size(intervals: &[(f64, f64)], k_max: Option<usize>) -> Result<usize> {
    let mut mean = 0.0;
    for &(lo, hi) in intervals {
        let hi_eff = if hi.is_finite() { hi } else { lo + 40.0 };
        mean += crate::quadrature::integrate_panels(lo, hi_eff, 0.5, 8, |x| k2_raw(x, x))?;
    }
    let floor = (2.0 * mean + 12.0).ceil() as usize;
    let m = k_max
        .map_or(floor, |k| (4 * (k + 1)).max(floor))
        .next_power_of_two();
    if m > 4096 {
        return Err(Error::Config(format!(
            "count inversion needs a {m}-point circle; interval too wide"
        )));
    }
    Ok(m)
}

fn circle_point(j: usize, m: usize) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
    Complex64::new(theta.cos(), theta.sin())
}

fn invert_circle_1d(values: &[Complex64], k_max: usize) -> Result<Vec<f64>> {
    let m = values.len();
    let minv = 1.0 / m as f64;
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            acc += v * circle_point((j * k) % m, m).conj();
        }
        out.push(check_probability(acc * minv)?);
    }
    Ok(out)
}

fn check_probability(p: Complex64) -> Result<f64> {
    if p.im.abs() > 1e-8 {
        return Err(Error::Numeric(format!(
            "probability has imaginary part {:.3e}",
            p.im
        )));
    }
    if p.re < -1e-8 {
        return Err(Error::Numeric(format!("negative probability {:.3e}", p.re)));
    }
    Ok(p.re.max(0.0))
}
