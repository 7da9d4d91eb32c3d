//! The Airy function `Ai` and its derivative in IEEE double precision.
//!
//! Evaluation strategy:
//!
//! - `|x| <= 10`: recenter on the nearest anchor of a precomputed grid
//!   (step 1/4, values frozen in [`anchors`]) and sum the Taylor series
//!   whose coefficients follow from the Airy ODE `y'' = x y`. The local
//!   variable satisfies `|u| <= 1/8`, so the series converges like
//!   `(sqrt(|x|)/8)^k` and 48 terms leave truncation below 1e-17.
//! - `x > 10`: the standard Poincaré expansion of `Ai` in `zeta = (2/3) x^{3/2}`;
//!   at `zeta >= 21` the optimal truncation error is below 1e-17.
//! - `x < -10`: the oscillatory expansion in `cos/sin(zeta - pi/4)`.
//!
//! Relative accuracy is a few ulp on the decaying side and a few ulp of the
//! local envelope `|x|^{-1/4}` on the oscillatory side (close to the zeros of
//! `Ai` the error is absolute, as for any fixed-precision evaluation). Far
//! beyond the representable range (`x ≳ 108`) the result underflows; the
//! evaluator then returns exact `0.0`, never subnormal leftovers.

mod anchors;

use crate::error::{Error, Result};
use std::sync::OnceLock;

pub use anchors::{ANCHORS, ANCHOR_COUNT, ANCHOR_K_MAX, ANCHOR_K_MIN};

/// Value and first derivative of `Ai` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValue {
    pub ai: f64,
    pub ai_prime: f64,
}

/// Evaluate `Ai(x)` and `Ai'(x)`.
///
/// Returns a domain error for non-finite input. See the module docs for the
/// accuracy contract.
pub fn airy_ai(x: f64) -> Result<AiryValue> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("airy_ai: non-finite input {x}")));
    }
    Ok(airy_ai_raw(x))
}

/// Internal unchecked entry point for hot loops; input must be finite.
#[inline]
pub(crate) fn airy_ai_raw(x: f64) -> AiryValue {
    debug_assert!(x.is_finite());
    if x > HI_SWITCH {
        asymptotic_positive(x)
    } else if x < -HI_SWITCH {
        asymptotic_negative(x)
    } else {
        anchored_taylor(x)
    }
}

const HI_SWITCH: f64 = 10.0;
/// Taylor terms kept per anchor; convergence factor is at most
/// sqrt(10)/8 ≈ 0.40, so 48 terms push truncation below 1e-17.
const N_TERMS: usize = 48;
/// ln(2 sqrt(pi))
const LN_TWO_SQRT_PI: f64 = 1.2655121234846454;
/// ln(sqrt(pi))
const LN_SQRT_PI: f64 = 0.5723649429247001;

/// Taylor coefficients of `Ai` at every anchor, built on first use from the
/// frozen `(Ai, Ai')` pairs through the ODE recurrence
/// `a_{k+2} = (x0 a_k + a_{k-1}) / ((k+1)(k+2))`.
fn coeff_table() -> &'static Vec<[f64; N_TERMS]> {
    static TABLE: OnceLock<Vec<[f64; N_TERMS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..ANCHOR_COUNT)
            .map(|i| {
                let x0 = (ANCHOR_K_MIN + i as i64) as f64 * 0.25;
                let (a0, a1) = ANCHORS[i];
                let mut c = [0.0_f64; N_TERMS];
                c[0] = a0;
                c[1] = a1;
                for k in 0..N_TERMS - 2 {
                    let prev = if k == 0 { 0.0 } else { c[k - 1] };
                    c[k + 2] = (x0 * c[k] + prev) / (((k + 1) * (k + 2)) as f64);
                }
                c
            })
            .collect()
    })
}

fn anchored_taylor(x: f64) -> AiryValue {
    let k = (x * 4.0).round() as i64;
    let k = k.clamp(ANCHOR_K_MIN, ANCHOR_K_MAX);
    let idx = (k - ANCHOR_K_MIN) as usize;
    let x0 = k as f64 * 0.25;
    let u = x - x0;
    let c = &coeff_table()[idx];
    // Horner for the value and for the derivative series sum (k+1) c_{k+1} u^k.
    let mut ai = 0.0;
    let mut aip = 0.0;
    for k in (1..N_TERMS).rev() {
        ai = ai * u + c[k];
        aip = aip * u + k as f64 * c[k];
    }
    ai = ai * u + c[0];
    AiryValue { ai, ai_prime: aip }
}

/// Shared coefficient recurrence of the Poincaré expansions:
/// `u_0 = 1`, `u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k)`,
/// `v_k = u_k (6k+1)/(1-6k)`.
#[inline]
fn uv_step(k: usize, u_prev: f64) -> (f64, f64) {
    let kf = k as f64;
    let u = u_prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
        / ((2.0 * kf - 1.0) * 216.0 * kf);
    let v = u * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf);
    (u, v)
}

const ASY_MAX_TERMS: usize = 28;

fn asymptotic_positive(x: f64) -> AiryValue {
    let xs = x.sqrt();
    let zeta = (2.0 / 3.0) * x * xs;
    let quarter_ln = 0.25 * x.ln();
    let mut s = 1.0;
    let mut sp = 1.0;
    let mut u = 1.0;
    let mut sign = -1.0;
    for k in 1..ASY_MAX_TERMS {
        let (uk, vk) = uv_step(k, u);
        u = uk;
        let t = uk / zeta.powi(k as i32);
        s += sign * t;
        sp += sign * vk / zeta.powi(k as i32);
        if t.abs() < 1e-18 {
            break;
        }
        sign = -sign;
    }
    let mut ai = (-zeta - LN_TWO_SQRT_PI - quarter_ln).exp() * s;
    let mut aip = -(-zeta - LN_TWO_SQRT_PI + quarter_ln).exp() * sp;
    // Underflow policy: exact zero, never subnormals.
    if !ai.is_normal() {
        ai = 0.0;
    }
    if !aip.is_normal() {
        aip = 0.0;
    }
    AiryValue { ai, ai_prime: aip }
}

fn asymptotic_negative(x: f64) -> AiryValue {
    let z = -x;
    let zs = z.sqrt();
    let zeta = (2.0 / 3.0) * z * zs;
    let z4 = zs.sqrt();
    let theta = zeta - std::f64::consts::FRAC_PI_4;
    let (sin_t, cos_t) = theta.sin_cos();
    // Even-index terms pair with cos, odd-index with sin (value), and the
    // derivative swaps the roles with one sign flip.
    let mut s_even = 1.0;
    let mut s_odd = 0.0;
    let mut sp_even = 1.0;
    let mut sp_odd = 0.0;
    let mut u = 1.0;
    for k in 1..ASY_MAX_TERMS {
        let (uk, vk) = uv_step(k, u);
        u = uk;
        // (-1)^floor(k/2) / zeta^k
        let t = uk / zeta.powi(k as i32);
        let tp = vk / zeta.powi(k as i32);
        let phase = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            s_even += phase * t;
            sp_even += phase * tp;
        } else {
            s_odd += phase * t;
            sp_odd += phase * tp;
        }
        if t.abs() < 1e-18 {
            break;
        }
    }
    let inv = 1.0 / (LN_SQRT_PI.exp() * z4);
    let ai = inv * (cos_t * s_even + sin_t * s_odd);
    let aip = z4 / LN_SQRT_PI.exp() * (sin_t * sp_even - cos_t * sp_odd);
    AiryValue { ai, ai_prime: aip }
}

#[cfg(test)]
mod dd;
