//! Gaussian quadrature rules and interval maps.
//!
//! Rules are computed on demand and memoized process-wide; the cache is
//! initialize-once per node count and safe under concurrent first access.

use crate::error::{Error, Result};
use crate::linalg;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_NODES: usize = 2048;

/// A quadrature rule; Legendre rules live on [-1, 1], Laguerre rules on
/// [0, inf) with the weight e^{-x} absorbed into `weights`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// A rule mapped onto a concrete interval.
#[derive(Debug, Clone)]
pub struct MappedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn laguerre_cache() -> &'static Mutex<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Legendre polynomial value and derivative at x by the three-term
/// recurrence.
#[inline]
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are found by Newton iteration from Chebyshev-angle initial guesses
/// and mirrored so the rule is exactly symmetric about zero; weights are
/// `2 / ((1-x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Result<Arc<QuadratureRule>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::Domain(format!(
            "gauss_legendre: node count {n} outside 1..={MAX_NODES}"
        )));
    }
    if let Some(rule) = legendre_cache().lock().unwrap().get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_legendre(n));
    legendre_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| rule.clone());
    Ok(rule)
}

fn build_legendre(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let half = n / 2;
    for i in 0..half {
        // i-th root in descending order from +1; Chebyshev-angle guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_pair(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    QuadratureRule { nodes, weights }
}

/// Scaled Laguerre function l_k(x) = L_k(x) e^{-x/2} and l_{k+1}, by the
/// stable scaled recurrence.
#[inline]
fn laguerre_scaled_pair(n: usize, x: f64) -> (f64, f64) {
    // returns (l_n, l_{n-1})
    let mut lm = 0.0_f64;
    let mut l = (-0.5 * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let lnext = ((2.0 * kf + 1.0 - x) * l - kf * lm) / (kf + 1.0);
        lm = l;
        l = lnext;
    }
    (l, lm)
}

/// n-point Gauss-Laguerre rule for `int_0^inf e^{-x} f(x) dx`; the
/// exponential weight is folded into `weights`.
///
/// Nodes are the eigenvalues of the Laguerre Jacobi matrix (diag 2k+1,
/// off-diag k), located by Sturm bisection and polished by Newton on the
/// scaled Laguerre function; weights use the classical
/// `w_j = x_j / ((n+1)^2 L_{n+1}(x_j)^2)` with the e^{-x} factor kept
/// attached so nothing overflows up to n = 2048.
pub fn gauss_laguerre(n: usize) -> Result<Arc<QuadratureRule>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::Domain(format!(
            "gauss_laguerre: node count {n} outside 1..={MAX_NODES}"
        )));
    }
    if let Some(rule) = laguerre_cache().lock().unwrap().get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_laguerre(n));
    laguerre_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| rule.clone());
    Ok(rule)
}

fn build_laguerre(n: usize) -> QuadratureRule {
    let diag: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = linalg::tridiag_kth_eigenvalue(&diag, &off, k, 1e-12);
        // Newton polish on l_n; l_n'(x) = (n l_n - n l_{n-1})/x - l_n/2.
        for _ in 0..6 {
            let (ln, lnm) = laguerre_scaled_pair(n, x);
            let dln = (n as f64 * (ln - lnm)) / x - 0.5 * ln;
            let dx = ln / dln;
            if dx.is_finite() {
                x -= dx;
                if dx.abs() < 1e-15 * x.max(1.0) {
                    break;
                }
            } else {
                break;
            }
        }
        // Classical weight w = x / ((n+1) L_{n+1}(x))^2 (the e^{-x} measure is
        // already built in); in scaled terms L^2 = l^2 e^{x}, so
        // w = x e^{-x} / ((n+1) l_{n+1})^2. Far-out nodes whose true weight
        // underflows are flushed to exact zero.
        let (lnp1, _) = laguerre_scaled_pair(n + 1, x);
        let np1 = (n + 1) as f64;
        let w = x * (-x).exp() / (np1 * np1 * lnp1 * lnp1);
        weights.push(if w.is_finite() { w } else { 0.0 });
        nodes.push(x);
    }
    QuadratureRule { nodes, weights }
}

/// Map a Legendre rule to the finite interval [a, b], or to a semi-infinite
/// interval (b = +inf) truncated at length `trunc_len`.
pub fn map_interval(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    trunc_len: f64,
) -> Result<MappedRule> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("map_interval: lower bound {a}")));
    }
    let upper = if b.is_finite() {
        b
    } else {
        if !(trunc_len > 0.0 && trunc_len.is_finite()) {
            return Err(Error::Domain(format!(
                "map_interval: truncation length {trunc_len} for semi-infinite interval"
            )));
        }
        a + trunc_len
    };
    if !(upper > a) {
        return Err(Error::Domain(format!(
            "map_interval: empty interval [{a}, {upper})"
        )));
    }
    let c = 0.5 * (upper + a);
    let h = 0.5 * (upper - a);
    Ok(MappedRule {
        nodes: rule.nodes.iter().map(|t| c + h * t).collect(),
        weights: rule.weights.iter().map(|w| h * w).collect(),
    })
}

/// Integrate f over [a, b] with a fixed-order panel rule (helper used by
/// kernel oracles and truncation certificates).
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    panel_len: f64,
    order: usize,
    mut f: F,
) -> Result<f64> {
    let rule = gauss_legendre(order)?;
    let mut total = 0.0;
    let mut left = a;
    while left < b {
        let right = (left + panel_len).min(b);
        let mapped = map_interval(&rule, left, right, 0.0)?;
        for (x, w) in mapped.nodes.iter().zip(mapped.weights.iter()) {
            total += w * f(*x);
        }
        left = right;
    }
    Ok(total)
}
