// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Continuous double greedy with a constant number of adaptive rounds per
//! step, for unconstrained (non-monotone) submodular maximization.
//!
//! A lower point `x` and an upper point `y` start at `η₀𝟙` and `(1-η₀)𝟙`
//! and move toward each other along gradient-weighted directions. Each step
//! is as short as possible while still dropping the gradient-gap potential
//! `⟨∇F(x) - ∇F(y), 𝟙⟩` by `γ·OPT`, so at most `⌈2/γ⌉` steps are taken.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{random_set_value, RandomSet};
use crate::calculus::{extension_for, EstimatorConfig, Extension};
use crate::error::{Error, Result};
use crate::oracle::{RoundLedger, SetFunction};

/// Snapshot of a run: the two points, elapsed time and running sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DGState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Sum of accepted step lengths after the initial search.
    pub t: f64,
    pub iteration: usize,
    /// `Σ_s η_s Σ_i α_i(t_s)`.
    pub alpha_sum: f64,
    /// `Σ_s η_s Σ_i β_i(t_s)`.
    pub beta_sum: f64,
}

/// One accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub eta: f64,
    /// Potential before the step.
    pub potential: f64,
    /// False when the step ran to the end of the box.
    pub by_predicate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DGReport {
    pub dg_value: f64,
    pub rnd_value: f64,
    pub opt_estimate: f64,
    pub rounds_used: usize,
    pub iterations: usize,
    pub alpha_sum: f64,
    pub beta_sum: f64,
    pub checks: BTreeMap<String, bool>,
    pub gamma: f64,
    pub exact: bool,
    /// `None` when no starting point satisfied the initial predicate.
    pub eta0: Option<f64>,
    /// Total time covered by the while-loop steps.
    pub horizon: f64,
    /// Potential when the loop stopped (0 once the points meet).
    pub final_potential: f64,
    #[serde(skip)]
    pub steps: Vec<StepRecord>,
    #[serde(skip)]
    pub final_state: Option<DGState>,
}

/// Largest number of iterations a run may take, counting the initial search.
pub fn iteration_bound(gamma: f64) -> usize {
    (2.0 / gamma).ceil() as usize + 1
}

fn bisection_depth(gamma: f64, span: f64) -> usize {
    // halvings until the bracket is at most span·γ/8
    (8.0 / gamma * span).log2().ceil().max(1.0) as usize
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("γ must lie in (0, 1), got {gamma}")))
    }
}

fn dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

fn potential(w: &[f64], gx: &[f64], gy: &[f64]) -> f64 {
    w.iter().zip(gx).zip(gy).map(|((w, a), b)| w * (a - b)).sum()
}

fn finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Gradients at several points, charged as one round.
fn gradient_batch(ext: &dyn Extension, points: &[Vec<f64>], ledger: &mut RoundLedger) -> Result<Vec<Vec<f64>>> {
    let grads: Vec<Vec<f64>> = points.par_iter().map(|p| ext.gradient(p)).collect();
    for g in &grads {
        finite(g)?;
    }
    ledger.record(points.len())?;
    Ok(grads)
}

fn value_batch(ext: &dyn Extension, points: &[Vec<f64>], ledger: &mut RoundLedger) -> Result<Vec<f64>> {
    let vals: Vec<f64> = points.par_iter().map(|p| ext.value(p)).collect();
    finite(&vals)?;
    ledger.record(points.len())?;
    Ok(vals)
}

/// Smallest `η₀ ∈ [0, ½)` with `⟨∇F(η₀𝟙) - ∇F((1-η₀)𝟙), 𝟙⟩ ≤ 2·OPT`, to
/// within `γ/8`. `None` when every probe fails.
pub fn initial_eta(ext: &dyn Extension, gamma: f64, opt: f64, ledger: &mut RoundLedger) -> Result<Option<f64>> {
    check_gamma(gamma)?;
    if !(opt > 0.0) {
        return Err(Error::NonPositiveOpt(opt));
    }
    let d = ext.dim();
    let w = ext.weights();
    let holds = |eta: f64, ledger: &mut RoundLedger| -> Result<bool> {
        let g = gradient_batch(ext, &[vec![eta; d], vec![1.0 - eta; d]], ledger)?;
        Ok(potential(w, &g[0], &g[1]) <= 2.0 * opt)
    };
    if holds(0.0, ledger)? {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..bisection_depth(gamma, 0.5) {
        let mid = 0.5 * (lo + hi);
        if holds(mid, ledger)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi < 0.5).then_some(hi))
}

/// Move directions for the two points; `Δx - Δy = 𝟙` coordinate-wise.
pub fn directions(gx: &[f64], gy: &[f64]) -> (Vec<f64>, Vec<f64>) {
    gx.iter()
        .zip(gy)
        .map(|(&a, &b)| {
            let (p, m) = (a.max(0.0), b.min(0.0));
            let den = p - m;
            if den > 0.0 {
                (p / den, m / den)
            } else {
                (1.0, 0.0)
            }
        })
        .unzip()
}

/// Outcome of one line search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineStep {
    pub eta: f64,
    pub by_predicate: bool,
}

/// Smallest `η ∈ (0, η_max]` at which the directional gradient sum has
/// dropped by `γ·OPT`; `η_max` is the remaining gap `y_i - x_i`.
#[allow(clippy::too_many_arguments)]
pub fn step_line_search(
    ext: &dyn Extension,
    x: &[f64],
    y: &[f64],
    dx: &[f64],
    dy: &[f64],
    gx: &[f64],
    gy: &[f64],
    gamma: f64,
    opt: f64,
    ledger: &mut RoundLedger,
) -> Result<LineStep> {
    let eta_max = y.iter().zip(x).map(|(b, a)| b - a).fold(f64::INFINITY, f64::min);
    if !(eta_max > 0.0) {
        return Err(Error::Domain("points already met".into()));
    }
    let w = ext.weights();
    let target = dot(w, gx, dx) + dot(w, gy, dy) - gamma * opt;
    let holds = |eta: f64, ledger: &mut RoundLedger| -> Result<bool> {
        let xs: Vec<f64> = x.iter().zip(dx).map(|(a, d)| (a + eta * d).clamp(0.0, 1.0)).collect();
        let ys: Vec<f64> = y.iter().zip(dy).map(|(a, d)| (a + eta * d).clamp(0.0, 1.0)).collect();
        let g = gradient_batch(ext, &[xs, ys], ledger)?;
        Ok(dot(w, &g[0], dx) + dot(w, &g[1], dy) <= target)
    };
    if !holds(eta_max, ledger)? {
        return Ok(LineStep { eta: eta_max, by_predicate: false });
    }
    let (mut lo, mut hi) = (0.0, eta_max);
    for _ in 0..bisection_depth(gamma, 1.0) {
        let mid = 0.5 * (lo + hi);
        if holds(mid, ledger)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LineStep { eta: hi, by_predicate: true })
}

/// Run on an already-built extension, charging rounds to `ledger`.
pub fn run_on_extension(ext: &dyn Extension, gamma: f64, opt: f64, ledger: &mut RoundLedger) -> Result<DGReport> {
    check_gamma(gamma)?;
    if !(opt > 0.0) {
        return Err(Error::NonPositiveOpt(opt));
    }
    let d = ext.dim();
    let w = ext.weights().to_vec();
    let half = vec![0.5; d];
    let eta0 = initial_eta(ext, gamma, opt, ledger)?;
    let mut report = DGReport {
        dg_value: 0.0,
        rnd_value: 0.0,
        opt_estimate: opt,
        rounds_used: 0,
        iterations: 1,
        alpha_sum: 0.0,
        beta_sum: 0.0,
        checks: BTreeMap::new(),
        gamma,
        exact: ext.is_exact(),
        eta0,
        horizon: 0.0,
        final_potential: 0.0,
        steps: Vec::new(),
        final_state: None,
    };
    let Some(eta0) = eta0 else {
        let v = value_batch(ext, &[half], ledger)?;
        report.dg_value = v[0];
        report.rnd_value = v[0];
        report.rounds_used = ledger.rounds_used();
        finish_checks(&mut report, opt);
        return Ok(report);
    };

    let mut x = vec![eta0; d];
    let mut y = vec![1.0 - eta0; d];
    let max_steps = iteration_bound(gamma) - 1;
    let mut box_ok = true;
    let mut last_potential: f64;
    loop {
        if y[0] - x[0] <= 0.0 {
            last_potential = 0.0;
            break;
        }
        let g = gradient_batch(ext, &[x.clone(), y.clone()], ledger)?;
        let (gx, gy) = (&g[0], &g[1]);
        let phi = potential(&w, gx, gy);
        last_potential = phi;
        if phi < gamma * opt || report.steps.len() >= max_steps {
            break;
        }
        let (dx, dy) = directions(gx, gy);
        let step = step_line_search(ext, &x, &y, &dx, &dy, gx, gy, gamma, opt, ledger)?;
        let (mut a_sum, mut b_sum) = (0.0, 0.0);
        for i in 0..d {
            let (p, m) = (gx[i].max(0.0), gy[i].min(0.0));
            let beta = p - m;
            if beta > 0.0 {
                a_sum += w[i] * (p + m).powi(2) / beta;
                b_sum += w[i] * beta;
            }
        }
        report.alpha_sum += step.eta * a_sum;
        report.beta_sum += step.eta * b_sum;
        report.horizon += step.eta;
        report.steps.push(StepRecord { eta: step.eta, potential: phi, by_predicate: step.by_predicate });
        for i in 0..d {
            x[i] = (x[i] + step.eta * dx[i]).clamp(0.0, 1.0);
            y[i] = (y[i] + step.eta * dy[i]).clamp(0.0, 1.0);
        }
        if !step.by_predicate {
            y.clone_from(&x);
        }
        box_ok &= x.iter().zip(&y).all(|(a, b)| a <= b);
    }
    report.iterations = 1 + report.steps.len();
    report.final_potential = last_potential;

    let v = value_batch(ext, &[x.clone(), y.clone(), half], ledger)?;
    report.dg_value = v[0].max(v[1]);
    report.rnd_value = v[2];
    report.rounds_used = ledger.rounds_used();
    report.checks.insert("box".into(), box_ok);
    report.final_state = Some(DGState {
        x,
        y,
        t: report.horizon,
        iteration: report.iterations,
        alpha_sum: report.alpha_sum,
        beta_sum: report.beta_sum,
    });
    finish_checks(&mut report, opt);
    Ok(report)
}

fn finish_checks(report: &mut DGReport, opt: f64) {
    report.checks.insert("termination".into(), report.iterations <= iteration_bound(report.gamma));
    let mut pot_ok = true;
    for (i, s) in report.steps.iter().enumerate() {
        if s.by_predicate {
            let next = report.steps.get(i + 1).map_or(report.final_potential, |n| n.potential);
            pot_ok &= next <= s.potential - report.gamma * opt + 1e-9 * opt.max(1.0);
        }
    }
    report.checks.insert("potential_decrease".into(), pot_ok);
    report.checks.insert(
        "stopped".into(),
        report.final_potential < report.gamma * opt || report.steps.last().is_some_and(|s| !s.by_predicate),
    );
    if report.exact {
        if let Ok(d) = diagnostics_check(report, opt) {
            for c in d.checks {
                report.checks.insert(c.name, c.pass);
            }
        }
    }
}

/// Run with the estimator `cfg` asks for and a fresh ledger.
pub fn run_double_greedy(f: &dyn SetFunction, gamma: f64, cfg: &EstimatorConfig, opt: f64) -> Result<DGReport> {
    let ext = extension_for(f, cfg)?;
    let mut ledger = RoundLedger::new();
    run_on_extension(ext.as_ref(), gamma, opt, &mut ledger)
}

/// Result of running over a grid of OPT guesses.
#[derive(Clone, Debug)]
pub struct GuessOutcome {
    pub guesses: Vec<f64>,
    pub reports: Vec<DGReport>,
    /// Report with the largest value; `rounds_used` covers the whole search.
    pub best: DGReport,
    pub ledger: RoundLedger,
}

/// Geometric grid `base·(1+γ)^{-j}` for `j = 0..=⌈ln 16 / ln(1+γ)⌉`, which
/// reaches down to `base/16`.
pub fn guess_grid(base: f64, gamma: f64) -> Vec<f64> {
    let top = (16f64.ln() / gamma.ln_1p()).ceil() as i32;
    (0..=top).map(|j| base * (1.0 + gamma).powi(-j)).collect()
}

/// Estimate OPT from random sets, then run every guess in lockstep.
pub fn guess_opt(f: &dyn SetFunction, gamma: f64, cfg: &EstimatorConfig) -> Result<GuessOutcome> {
    check_gamma(gamma)?;
    let mut ledger = RoundLedger::new();
    let mut samples = cfg.samples.max(1);
    let mut est = random_set_value(f, RandomSet::Density(0.5), samples, cfg.seed, &mut ledger)?.mean;
    let mut escalations = 0;
    while !(est > 0.0) {
        if escalations == 3 {
            return Err(Error::ZeroEstimate);
        }
        escalations += 1;
        samples *= 4;
        est = random_set_value(f, RandomSet::Density(0.5), samples, cfg.seed ^ escalations, &mut ledger)?.mean;
    }
    let guesses = guess_grid(4.0 * est, gamma);
    let ext = extension_for(f, cfg)?;
    lockstep(ext.as_ref(), gamma, guesses, ledger)
}

/// Run explicit guesses in lockstep on a prepared extension.
pub fn guess_opt_with(ext: &dyn Extension, gamma: f64, guesses: &[f64]) -> Result<GuessOutcome> {
    lockstep(ext, gamma, guesses.to_vec(), RoundLedger::new())
}

fn lockstep(ext: &dyn Extension, gamma: f64, guesses: Vec<f64>, mut ledger: RoundLedger) -> Result<GuessOutcome> {
    if guesses.is_empty() {
        return Err(Error::Domain("no OPT guesses".into()));
    }
    // each run only depends on its own answers, so round t of every run
    // can share one batch
    let runs: Vec<(DGReport, RoundLedger)> = guesses
        .par_iter()
        .map(|&g| {
            let mut l = RoundLedger::new();
            run_on_extension(ext, gamma, g, &mut l).map(|r| (r, l))
        })
        .collect::<Result<_>>()?;
    let ledgers: Vec<RoundLedger> = runs.iter().map(|(_, l)| l.clone()).collect();
    ledger.absorb_lockstep(&ledgers);
    let reports: Vec<DGReport> = runs.into_iter().map(|(r, _)| r).collect();
    let mut best = reports.iter().max_by(|a, b| a.dg_value.total_cmp(&b.dg_value)).cloned().expect("non-empty");
    best.rounds_used = ledger.rounds_used();
    Ok(GuessOutcome { guesses, reports, best, ledger })
}

/// One evaluated inequality `lhs ≤ rhs` (after moving terms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub opt_reference: f64,
    pub tolerance: f64,
    pub checks: Vec<InequalityCheck>,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Evaluate the value and gain inequalities on a run's recorded sums.
pub fn diagnostics_check(report: &DGReport, opt: f64) -> Result<DiagnosticsReport> {
    if !report.exact {
        return Err(Error::InexactDiagnostics);
    }
    let g = report.gamma;
    let dg = report.dg_value;
    let tol = 1e-6 * opt * opt;
    let base = (1.0 - g / 2.0) * opt / 2.0;
    let mk = |name: &str, lhs: f64, rhs: f64| InequalityCheck {
        name: name.into(),
        lhs,
        rhs,
        slack: rhs - lhs,
        pass: lhs <= rhs + tol,
    };
    let checks = vec![
        mk("value_bound", base + 0.25 * report.alpha_sum, dg),
        mk("gain_quadratic", (dg - report.rnd_value).powi(2), (4.0 + g) * (dg - base) * opt),
        mk("beta_bound", report.beta_sum, (4.0 + g) * dg),
    ];
    Ok(DiagnosticsReport { opt_reference: opt, tolerance: tol, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_formula_and_clamping() {
        let (dx, dy) = directions(&[3.0, -1.0, 0.0], &[-1.0, -2.0, 0.0]);
        assert_eq!(dx, vec![0.75, 0.0, 1.0]);
        assert_eq!(dy, vec![-0.25, -1.0, 0.0]);
    }

    #[test]
    fn grid_spans_a_factor_sixteen() {
        let g = guess_grid(1.0, 0.1);
        assert_eq!(g[0], 1.0);
        assert!(*g.last().unwrap() <= 1.0 / 16.0);
        assert!(g[g.len() - 2] > 1.0 / 16.0);
    }
}
