//! Temporal decoupling diagnostics: mixing remainders of cluster-shifted
//! configurations, two-time count covariances, and trace-norm decay of the
//! off-diagonal semigroup blocks.
//!
//! A mixing experiment pairs a base configuration (a "cluster" of counting
//! components on times spanning at most a few units) with a copy of itself
//! shifted forward in time by `T`, and measures how far the joint
//! statistics are from factorizing:
//!
//! `R(T) = det_joint(base and shifted copy) - det(base) * det(shifted copy)`
//!
//! The factor determinants are the leading and trailing principal block
//! determinants of the *same* discretized matrix as the joint one. Sharing
//! the node grid makes the discretization error largely cancel in the
//! difference, which matters because `R` decays to zero as the shift grows
//! while the individual determinants stay order one.

use crate::error::{Error, Result};
use crate::fredholm::{
    count_pmf_full, det_for_component_range, joint_count_distribution, raw_kernel,
    CountingConfig, DET_TOL, NODES_MAX, NODES_MIN, TRUNC_MAX, TRUNC_MIN,
};
use crate::kernels::{damped_block, oscillatory_block, SemigroupSide, KERNEL_TOL};
use crate::linalg::{singular_values, RMat};
use crate::quadrature::{gauss_legendre, map_interval};
use num_complex::Complex64;
use rayon::prelude::*;

/// A base cluster, the weight assignment of its shifted copy, and the
/// ladder of time shifts to probe. Every shift must exceed the cluster's
/// time span, so the base and the shifted copy occupy disjoint time ranges.
#[derive(Debug, Clone)]
pub struct MixingExperiment {
    base: CountingConfig,
    late_weights: Vec<Complex64>,
    shifts: Vec<f64>,
}

impl MixingExperiment {
    /// `base` keeps its own weights for the early copy; `late_weights` (one
    /// per component, `|w| <= 1`) are applied to the shifted copy.
    pub fn new(
        base: CountingConfig,
        late_weights: &[Complex64],
        shifts: &[f64],
    ) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::Config(
                "mixing experiment needs a non-empty base cluster".into(),
            ));
        }
        // validates length and the unit-disk constraint
        base.with_weights(late_weights)?;
        let exp = MixingExperiment {
            base,
            late_weights: late_weights.to_vec(),
            shifts: shifts.to_vec(),
        };
        for w in shifts.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Config(format!(
                    "shifts must strictly increase ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for &t in shifts {
            if !exp.admissible(t) {
                return Err(Error::Config(format!(
                    "shift {t} does not clear the cluster span {}",
                    exp.span()
                )));
            }
        }
        Ok(exp)
    }

    /// Both copies carry the base configuration's weights.
    pub fn symmetric(base: CountingConfig, shifts: &[f64]) -> Result<Self> {
        let late = base.weights().to_vec();
        Self::new(base, &late, shifts)
    }

    /// Largest minus smallest component time of the base cluster.
    pub fn span(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.base.len() {
            let t = self.base.component(i).time;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        hi - lo
    }

    /// A shift is admissible when the shifted cluster lies strictly after
    /// every base time.
    pub fn admissible(&self, shift: f64) -> bool {
        shift.is_finite() && shift > self.span()
    }

    pub fn base(&self) -> &CountingConfig {
        &self.base
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn late_weights(&self) -> &[Complex64] {
        &self.late_weights
    }

    /// The 2m-component configuration: base components followed by the
    /// shifted copy carrying the late weights.
    fn joint_config(&self, shift: f64) -> Result<CountingConfig> {
        let m = self.base.len();
        let mut comps = Vec::with_capacity(2 * m);
        for i in 0..m {
            comps.push(self.base.component(i));
        }
        for i in 0..m {
            let mut c = self.base.component(i);
            c.time += shift;
            c.weight = self.late_weights[i];
            comps.push(c);
        }
        CountingConfig::new(&comps)
    }
}

/// Joint and factorized determinants at one shift, with their difference.
#[derive(Debug, Clone, Copy)]
pub struct MixingRemainder {
    pub det_joint: Complex64,
    /// Determinant of the base-cluster principal block.
    pub det_left: Complex64,
    /// Determinant of the shifted-cluster principal block.
    pub det_right: Complex64,
    /// `det_joint - det_left * det_right`
    pub remainder: Complex64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub trunc_len: f64,
}

/// Mixing remainder at one shift. Builds the joint configuration, then
/// refines nodes and truncation like the generating function, requiring the
/// joint and both factor determinants (computed on the shared grid) to
/// converge together.
pub fn mixing_remainder(exp: &MixingExperiment, shift: f64) -> Result<MixingRemainder> {
    if !exp.admissible(shift) {
        return Err(Error::Domain(format!(
            "shift {shift} does not clear the cluster span {}",
            exp.span()
        )));
    }
    let cfg = exp.joint_config(shift)?;
    let m = exp.base.len();
    let weights = cfg.weights().to_vec();
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
    let eval = |n: usize, trunc: f64| -> Result<[Complex64; 3]> {
        let raw = raw_kernel(&cfg, n, trunc)?;
        Ok([
            det_for_component_range(&raw, &weights, 0..2 * m),
            det_for_component_range(&raw, &weights, 0..m),
            det_for_component_range(&raw, &weights, m..2 * m),
        ])
    };
    let mut prev_trunc: Option<[Complex64; 3]> = None;
    let mut best: Option<(MixingRemainder, f64)> = None;
    for &trunc in &truncs {
        let mut prev: Option<[Complex64; 3]> = None;
        let mut converged: Option<([Complex64; 3], f64, usize)> = None;
        let mut n = NODES_MIN;
        while n <= NODES_MAX {
            let dets = eval(n, trunc)?;
            if let Some(p) = prev {
                let diff = diff3(&p, &dets);
                let cand = pack(dets, diff, n, trunc);
                if best.as_ref().map_or(true, |(_, d)| diff < *d) {
                    best = Some((cand, diff));
                }
                if diff <= 0.5 * DET_TOL {
                    converged = Some((dets, diff, n));
                    break;
                }
            }
            prev = Some(dets);
            n *= 2;
        }
        let Some((dets, ndiff, n_used)) = converged else {
            let (b, d) = best.expect("ladder ran");
            return Err(Error::Accuracy {
                message: format!(
                    "mixing determinants did not converge by {NODES_MAX} nodes \
                     (trunc {trunc}); residual {d:.3e}"
                ),
                best: b.remainder,
                estimate: d,
            });
        };
        if !cfg.has_unbounded() {
            return Ok(pack(dets, ndiff, n_used, 0.0));
        }
        if let Some(pv) = prev_trunc {
            let tdiff = diff3(&pv, &dets);
            if tdiff <= 0.5 * DET_TOL {
                return Ok(pack(dets, ndiff.max(tdiff), n_used, trunc));
            }
        }
        prev_trunc = Some(dets);
    }
    let (b, d) = best.expect("trunc ladder ran");
    Err(Error::Accuracy {
        message: format!("mixing truncation ladder exhausted; residual {d:.3e}"),
        best: b.remainder,
        estimate: d,
    })
}

fn diff3(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn pack(dets: [Complex64; 3], est: f64, nodes: usize, trunc: f64) -> MixingRemainder {
    MixingRemainder {
        det_joint: dets[0],
        det_left: dets[1],
        det_right: dets[2],
        remainder: dets[0] - dets[1] * dets[2],
        error_estimate: est,
        nodes_used: nodes,
        trunc_len: trunc,
    }
}

/// A strictly increasing parameter ladder with a nonnegative magnitude at
/// each rung.
#[derive(Debug, Clone)]
pub struct DecayCurve {
    parameter: Vec<f64>,
    magnitude: Vec<f64>,
}

impl DecayCurve {
    pub fn new(parameter: Vec<f64>, magnitude: Vec<f64>) -> Result<Self> {
        if parameter.len() != magnitude.len() {
            return Err(Error::Config(format!(
                "{} parameters vs {} magnitudes",
                parameter.len(),
                magnitude.len()
            )));
        }
        for w in parameter.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Config(format!(
                    "parameters must strictly increase ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for &v in &magnitude {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "magnitude {v} is not a finite nonnegative value"
                )));
            }
        }
        Ok(DecayCurve {
            parameter,
            magnitude,
        })
    }

    pub fn len(&self) -> usize {
        self.parameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameter.is_empty()
    }

    pub fn parameter(&self) -> &[f64] {
        &self.parameter
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }
}

/// Least-squares slope of `log magnitude` against `log parameter` — the
/// measured decay rate of a curve. Reported for inspection; nothing in the
/// crate asserts a specific rate.
pub fn log_log_slope(curve: &DecayCurve) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::Config(
            "slope needs at least two curve points".into(),
        ));
    }
    let mut xs = Vec::with_capacity(curve.len());
    let mut ys = Vec::with_capacity(curve.len());
    for (&p, &m) in curve.parameter().iter().zip(curve.magnitude().iter()) {
        if !(p > 0.0 && m > 0.0) {
            return Err(Error::Domain(format!(
                "log-log slope needs positive data, got ({p}, {m})"
            )));
        }
        xs.push(p.ln());
        ys.push(m.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    Ok(sxy / sxx)
}

/// `|R|` over an experiment's shift ladder plus the per-shift determinants
/// for audit.
#[derive(Debug, Clone)]
pub struct MixingSweep {
    pub curve: DecayCurve,
    /// One entry per shift, aligned with `curve`.
    pub details: Vec<MixingRemainder>,
}

/// Evaluate the remainder at every shift of the experiment (at least 3).
/// Shifts are independent and evaluated concurrently; results are keyed by
/// shift order, so the output is deterministic.
pub fn mixing_sweep(exp: &MixingExperiment) -> Result<MixingSweep> {
    if exp.shifts.len() < 3 {
        return Err(Error::Config(format!(
            "sweep needs at least 3 shifts, got {}",
            exp.shifts.len()
        )));
    }
    let details: Vec<MixingRemainder> = exp
        .shifts
        .par_iter()
        .map(|&t| mixing_remainder(exp, t))
        .collect::<Result<Vec<_>>>()?;
    let curve = DecayCurve::new(
        exp.shifts.clone(),
        details.iter().map(|d| d.remainder.norm()).collect(),
    )?;
    Ok(MixingSweep { curve, details })
}

/// First and second moments of a pair of interval counts.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceResult {
    pub mean_early: f64,
    pub mean_late: f64,
    pub var_early: f64,
    pub var_late: f64,
    pub covariance: f64,
    pub correlation: f64,
}

/// Covariance of the counts in `interval_early` at time 0 and
/// `interval_late` at time `shift`, via the joint count distribution
/// recovered from the generating function on a Fourier grid. The identical
/// same-time pair degenerates to the variance of a single count. Partially
/// overlapping intervals at equal time are rejected (the block assembly
/// needs same-time intervals disjoint).
pub fn count_covariance(
    interval_early: (f64, f64),
    interval_late: (f64, f64),
    shift: f64,
) -> Result<CovarianceResult> {
    if !shift.is_finite() {
        return Err(Error::Domain(format!("time shift {shift} not finite")));
    }
    if shift == 0.0 && interval_early == interval_late {
        let pmf = count_pmf_full(0.0, interval_early)?;
        let mut total = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (k, &p) in pmf.iter().enumerate() {
            total += p;
            m1 += k as f64 * p;
            m2 += (k * k) as f64 * p;
        }
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric(format!(
                "count distribution sums to {total}, not 1"
            )));
        }
        let var = m2 - m1 * m1;
        return Ok(CovarianceResult {
            mean_early: m1,
            mean_late: m1,
            var_early: var,
            var_late: var,
            covariance: var,
            correlation: if var > 0.0 { 1.0 } else { 0.0 },
        });
    }
    // The joint pmf is computed on the full inversion wheel, so the moment
    // sums see every recoverable count.
    let pmf = joint_count_distribution(0.0, interval_early, shift, interval_late, None)?;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut m11 = 0.0;
    let mut m22 = 0.0;
    let mut m12 = 0.0;
    let mut total = 0.0;
    for (k1, row) in pmf.iter().enumerate() {
        for (k2, &p) in row.iter().enumerate() {
            let (k1f, k2f) = (k1 as f64, k2 as f64);
            total += p;
            m1 += k1f * p;
            m2 += k2f * p;
            m11 += k1f * k1f * p;
            m22 += k2f * k2f * p;
            m12 += k1f * k2f * p;
        }
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "joint count distribution sums to {total}, not 1"
        )));
    }
    let var1 = m11 - m1 * m1;
    let var2 = m22 - m2 * m2;
    let cov = m12 - m1 * m2;
    let corr = if var1 > 0.0 && var2 > 0.0 {
        cov / (var1 * var2).sqrt()
    } else {
        0.0
    };
    Ok(CovarianceResult {
        mean_early: m1,
        mean_late: m2,
        var_early: var1,
        var_late: var2,
        covariance: cov,
        correlation: corr,
    })
}

/// Trace norm (sum of singular values) of the semigroup block with time gap
/// `y`, restricted to the window `[a, a + length]` and discretized on
/// `nodes` Gauss-Legendre points symmetrized by square-root weights.
pub fn trace_norm_offdiag(
    a: f64,
    y: f64,
    side: SemigroupSide,
    length: f64,
    nodes: usize,
) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("time gap {y} must be positive")));
    }
    if !a.is_finite() || !(length > 0.0 && length.is_finite()) {
        return Err(Error::Domain(format!(
            "window [{a}, {a} + {length}] invalid"
        )));
    }
    if !(4..=2048).contains(&nodes) {
        return Err(Error::Config(format!(
            "node count {nodes} outside [4, 2048]"
        )));
    }
    let rule = gauss_legendre(nodes)?;
    let m = map_interval(&rule, a, a + length, 0.0)?;
    let sw: Vec<f64> = m.weights.iter().map(|w| w.sqrt()).collect();
    // block evaluators share one panel layout across all entries
    let block = match side {
        SemigroupSide::NegativeEigenspace => damped_block(y, &m.nodes, &m.nodes, KERNEL_TOL)?.0,
        SemigroupSide::PositiveEigenspace => {
            let (mut v, _) = oscillatory_block(y, &m.nodes, &m.nodes, KERNEL_TOL)?;
            for x in v.iter_mut() {
                *x = -*x;
            }
            v
        }
    };
    let mut mat = RMat::zeros(nodes, nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            mat.set(i, j, sw[i] * sw[j] * block[i * nodes + j]);
        }
    }
    Ok(singular_values(&mat)?.iter().sum())
}
