// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form building blocks and the hard-instance objectives.
//!
//! Objectives of the form `1 - Π(1 - h_i)` are evaluated in log space: each
//! factor contributes `ln(1 - h_i)` and the final value is `-expm1(sum)`.
//! Inside symmetric regions the log factor is the plain linear term, so
//! symmetrized answers and true values agree to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::CountProfile;

/// Largest admissible penalty curvature for the polynomial-round penalty.
pub const ALPHA_MAX: f64 = 1.0 / 24.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRoundParams {
    pub layers: usize,
    pub blocks: usize,
    pub epsilon: f64,
    pub k: usize,
}

impl LogRoundParams {
    pub fn cap(&self) -> f64 {
        1.0 - self.epsilon
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyRoundParams {
    pub r: usize,
    pub blocks: usize,
    pub delta: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub k: usize,
}

impl PolyRoundParams {
    pub fn cap(&self) -> f64 {
        1.0 - self.epsilon
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("ε = {eps} outside (0, 1)")))
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= ALPHA_MAX {
        Ok(())
    } else {
        Err(Error::Domain("α out of range (0, 1/24]".into()))
    }
}

fn check_dims(c: &CountProfile, layers: usize, blocks: usize) -> Result<()> {
    if c.x.len() != layers {
        return Err(Error::DimensionMismatch { expected: layers, actual: c.x.len() });
    }
    if c.y.len() != blocks {
        return Err(Error::DimensionMismatch { expected: blocks, actual: c.y.len() });
    }
    if c.x.iter().chain(&c.y).any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("negative coordinate".into()));
    }
    Ok(())
}

/// `1 - e^{a}` for `a <= 0`, accurate near zero.
#[inline]
fn one_minus_exp(a: f64) -> f64 {
    -a.exp_m1()
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

// ---------------------------------------------------------------- 1 - 1/e part

#[inline]
pub(crate) fn ln_one_minus_gamma(x: f64, eps: f64) -> f64 {
    if x <= eps {
        -x
    } else {
        -eps + (eps - x).ln_1p()
    }
}

/// Concave ramp: `1 - e^{-x}` up to `ε`, then linear with slope `e^{-ε}`.
pub fn gamma_fn(x: f64, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(one_minus_exp(ln_one_minus_gamma(x, eps)))
}

#[inline]
pub(crate) fn ln_one_minus_g(y: &[f64], eps: f64) -> f64 {
    let s: f64 = y.iter().map(|&v| ln_one_minus_gamma(v, eps)).sum();
    s.max(eps.ln())
}

/// `min{1 - Π(1 - γ(y_j)), 1 - ε}`.
pub fn g_hard(y: &[f64], eps: f64, blocks: usize) -> Result<f64> {
    check_epsilon(eps)?;
    if y.len() != blocks {
        return Err(Error::DimensionMismatch { expected: blocks, actual: y.len() });
    }
    if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("y outside [0, 1]".into()));
    }
    Ok(g_unchecked(y, eps))
}

#[inline]
fn g_unchecked(y: &[f64], eps: f64) -> f64 {
    let s: f64 = y.iter().map(|&v| ln_one_minus_gamma(v, eps)).sum();
    one_minus_exp(s).min(1.0 - eps)
}

// ---------------------------------------------------------------- log-round part

const LN_TWO_THIRDS: f64 = -0.405_465_108_108_164_4;
const LN_ONE_THIRD: f64 = -1.098_612_288_668_109_8;

/// `ln(1 - h(x, x'))` for the three-branch pair function.
#[inline]
pub(crate) fn ln_one_minus_h(x: f64, xp: f64, eps: f64) -> f64 {
    let d = x - 2.0 * xp;
    if d.abs() <= eps {
        -0.5 * (x + xp)
    } else if d > 0.0 {
        log_add(LN_TWO_THIRDS - 0.75 * x + 0.25 * eps, LN_ONE_THIRD - 1.5 * xp - 0.5 * eps)
    } else {
        log_add(LN_TWO_THIRDS - 0.75 * x - 0.25 * eps, LN_ONE_THIRD - 1.5 * xp + 0.5 * eps)
    }
}

/// Pair function of consecutive layers; equals `1 - e^{-(x+x')/2}` when
/// `|x - 2x'| <= ε` and is penalized outside that band.
pub fn h_pair(x: f64, xp: f64, eps: f64) -> Result<f64> {
    if !(x >= 0.0 && xp >= 0.0) {
        return Err(Error::Domain("negative input to pair function".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain("ε must be positive".into()));
    }
    Ok(one_minus_exp(ln_one_minus_h(x, xp, eps)))
}

/// Upper bound on the pair function away from the symmetric band:
/// `1 - exp(-(x+x')/2 + (|x - 2x'| - ε)² / 16)`.
pub fn gain_bound(x: f64, xp: f64, eps: f64) -> Result<f64> {
    let dev = (x - 2.0 * xp).abs();
    if dev < eps {
        return Err(Error::Domain("inside the symmetric band".into()));
    }
    Ok(one_minus_exp(-0.5 * (x + xp) + (dev - eps).powi(2) / 16.0))
}

/// Contribution of the last layer: `1 - e^{-x/2}`.
pub fn h_last(x: f64) -> f64 {
    one_minus_exp(-0.5 * x)
}

#[inline]
pub(crate) fn log_round_ln_complement(x: &[f64], y: &[f64], eps: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &xi in x {
        acc += ln_one_minus_h(prev, xi, eps);
        prev = xi;
    }
    acc += -0.5 * prev;
    acc + ln_one_minus_g(y, eps)
}

#[inline]
pub(crate) fn log_round_unchecked(x: &[f64], y: &[f64], eps: f64) -> f64 {
    one_minus_exp(log_round_ln_complement(x, y, eps)).min(1.0 - eps)
}

/// Log-round objective `min{1 - h̃(x)(1 - g(y)), 1 - ε}`.
pub fn f_log_round(c: &CountProfile, p: &LogRoundParams) -> Result<f64> {
    check_epsilon(p.epsilon)?;
    check_dims(c, p.layers, p.blocks)?;
    if c.y.iter().any(|&v| v > 1.0) {
        return Err(Error::Domain("y outside [0, 1]".into()));
    }
    Ok(log_round_unchecked(&c.x, &c.y, p.epsilon))
}

/// Answer seen by an observer that knows the first `s` layers, with the rest
/// of the query replaced by its symmetrized form.
pub fn symmetric_answer_log(c: &CountProfile, s: usize, p: &LogRoundParams) -> Result<f64> {
    check_epsilon(p.epsilon)?;
    check_dims(c, p.layers, p.blocks)?;
    if s > p.layers {
        return Err(Error::Domain(format!("known layers {s} exceed {}", p.layers)));
    }
    Ok(symmetric_log_unchecked(&c.x, &c.y, s, p.epsilon))
}

pub(crate) fn symmetric_log_unchecked(x: &[f64], y: &[f64], s: usize, eps: f64) -> f64 {
    let xs = if s == 0 { 0.0 } else { x[s - 1] };
    let tail: f64 = x[s..].iter().sum::<f64>() + y.iter().sum::<f64>();
    let mut e = -0.5 * xs - tail;
    let mut prev = 0.0;
    for &xi in &x[..s] {
        e += ln_one_minus_h(prev, xi, eps);
        prev = xi;
    }
    one_minus_exp(e).min(1.0 - eps)
}

// ---------------------------------------------------------------- poly-round part

#[inline]
pub(crate) fn h_poly_unchecked(x: f64, alpha: f64, eps: f64) -> f64 {
    if x <= eps {
        0.0
    } else if x <= 2.0 + eps {
        alpha * (x - eps) * (x - eps)
    } else {
        4.0 * alpha * (x - 1.0 - eps)
    }
}

/// Derivative of [`h_poly`].
pub fn h_poly_slope(x: f64, alpha: f64, eps: f64) -> f64 {
    if x <= eps {
        0.0
    } else if x <= 2.0 + eps {
        2.0 * alpha * (x - eps)
    } else {
        4.0 * alpha
    }
}

/// Penalty: zero up to `ε`, quadratic up to `2 + ε`, then linear with slope `4α`.
pub fn h_poly(x: f64, alpha: f64, eps: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(eps > 0.0) {
        return Err(Error::Domain("ε must be positive".into()));
    }
    Ok(h_poly_unchecked(x, alpha, eps))
}

/// Exponent `Σx_i - Σ_{i<r} h((1+δ)x_{i+1} - x_i)` with `x_0 = 0`.
#[inline]
pub(crate) fn poly_exponent(x: &[f64], delta: f64, alpha: f64, eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut pen = 0.0;
    let mut prev = 0.0;
    for &xi in x {
        sum += xi;
        pen += h_poly_unchecked((1.0 + delta) * xi - prev, alpha, eps);
        prev = xi;
    }
    sum - pen
}

/// Layer part of the poly-round objective: `1 - e^{-p(x)}`.
pub fn q_poly(x: &[f64], p: &PolyRoundParams) -> Result<f64> {
    check_alpha(p.alpha)?;
    if x.len() != p.r {
        return Err(Error::DimensionMismatch { expected: p.r, actual: x.len() });
    }
    if x.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("negative coordinate".into()));
    }
    Ok(one_minus_exp(-poly_exponent(x, p.delta, p.alpha, p.epsilon)))
}

#[inline]
pub(crate) fn poly_round_unchecked(x: &[f64], y: &[f64], p: &PolyRoundParams) -> f64 {
    let ln = -poly_exponent(x, p.delta, p.alpha, p.epsilon) + ln_one_minus_g(y, p.epsilon);
    one_minus_exp(ln).min(1.0 - p.epsilon)
}

/// Poly-round objective `min{1 - (1 - q(x))(1 - g(y)), 1 - ε}`.
pub fn f_poly_round(c: &CountProfile, p: &PolyRoundParams) -> Result<f64> {
    check_epsilon(p.epsilon)?;
    check_alpha(p.alpha)?;
    check_dims(c, p.r, p.blocks)?;
    if c.y.iter().any(|&v| v > 1.0) {
        return Err(Error::Domain("y outside [0, 1]".into()));
    }
    Ok(poly_round_unchecked(&c.x, &c.y, p))
}

/// Poly-round answer for an observer that knows the first `s` layers.
pub fn symmetric_answer_poly(c: &CountProfile, s: usize, p: &PolyRoundParams) -> Result<f64> {
    check_epsilon(p.epsilon)?;
    check_alpha(p.alpha)?;
    check_dims(c, p.r, p.blocks)?;
    if s > p.r {
        return Err(Error::Domain(format!("known layers {s} exceed {}", p.r)));
    }
    Ok(symmetric_poly_unchecked(&c.x, &c.y, s, p))
}

pub(crate) fn symmetric_poly_unchecked(x: &[f64], y: &[f64], s: usize, p: &PolyRoundParams) -> f64 {
    let mass: f64 = x.iter().sum::<f64>() + y.iter().sum::<f64>();
    let mut pen = 0.0;
    let mut prev = 0.0;
    for &xi in &x[..s] {
        pen += h_poly_unchecked((1.0 + p.delta) * xi - prev, p.alpha, p.epsilon);
        prev = xi;
    }
    one_minus_exp(-mass + pen).min(1.0 - p.epsilon)
}

// ---------------------------------------------------------------- directed cut

/// `δ · x₁ (1 - x₂) · opt_scale` with per-layer normalized coordinates.
pub fn f_directed_cut(x1: f64, x2: f64, delta: f64, opt_scale: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) {
        return Err(Error::Domain("directed-cut coordinates must lie in [0, 1]".into()));
    }
    Ok(delta * x1 * (1.0 - x2) * opt_scale)
}

/// Noisy-or combination `1 - (1 - F₁)(1 - F₂)`.
pub fn compose_noisy_or<F1, F2>(f1: F1, f2: F2) -> impl Fn(&[f64]) -> f64
where
    F1: Fn(&[f64]) -> f64,
    F2: Fn(&[f64]) -> f64,
{
    move |z| 1.0 - (1.0 - f1(z)) * (1.0 - f2(z))
}
