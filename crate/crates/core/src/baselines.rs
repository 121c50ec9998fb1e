// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference algorithms and solvers: random sets, round-by-round layer
//! discovery on hidden-partition instances, the best answer available to an
//! algorithm that knows a prefix of the layers, and the two small convex
//! programs that bound how well such an algorithm can do.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::Estimate;
use crate::error::{Error, Result};
use crate::functions::{self, h_poly_slope, h_poly_unchecked};
use crate::instance::{LayeredOracle, Objective, PublicLayout};
use crate::oracle::{
    derive_seed, submit_batch, BlockPartition, CountProfile, ElementSet, Part, RoundLedger, SetFunction,
};

/// How a random query set is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RandomSet {
    /// Each element independently with this probability.
    Density(f64),
    /// Uniform among subsets of exactly this size.
    Size(usize),
}

fn draw(n: usize, how: RandomSet, rng: &mut ChaCha8Rng) -> ElementSet {
    match how {
        RandomSet::Density(p) => ElementSet::new((0..n).filter(|_| rng.gen::<f64>() < p).collect()),
        RandomSet::Size(m) => ElementSet::new(sample(rng, n, m).into_vec()),
    }
}

/// Mean value of `samples` random sets, queried as a single batch.
pub fn random_set_value(
    f: &dyn SetFunction,
    how: RandomSet,
    samples: usize,
    seed: u64,
    ledger: &mut RoundLedger,
) -> Result<Estimate> {
    let n = f.ground_size();
    match how {
        RandomSet::Density(p) if !(0.0..=1.0).contains(&p) => {
            return Err(Error::Domain(format!("density {p} outside [0, 1]")))
        }
        RandomSet::Size(m) if m > n => return Err(Error::Domain(format!("set size {m} exceeds n = {n}"))),
        _ => {}
    }
    if samples == 0 {
        return Err(Error::EmptyBatch);
    }
    let queries: Vec<ElementSet> =
        (0..samples).map(|j| draw(n, how, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[j as u64])))).collect();
    let vals = submit_batch(f, &queries, ledger)?;
    Ok(Estimate::from_samples(&vals))
}

// ---------------------------------------------------------------- discovery

/// Layers recovered so far, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerKnowledge {
    pub discovered: Vec<ElementSet>,
    pub rounds: usize,
}

impl LayerKnowledge {
    /// True when every discovered set is exactly the corresponding hidden layer.
    pub fn matches(&self, truth: &BlockPartition) -> bool {
        self.discovered
            .iter()
            .enumerate()
            .all(|(i, d)| i < truth.num_layers() && d.ids() == truth.members(Part::Layer(i)).as_slice())
    }
}

fn discovery_target(objective: &Objective) -> Result<f64> {
    match objective {
        Objective::LogRound(p) => Ok(p.epsilon),
        Objective::PolyRound(p) => Ok(2.0 * p.epsilon / (1.0 + p.delta)),
        _ => Err(Error::Domain("layer discovery needs a layered objective".into())),
    }
}

/// Spend one round per layer: query a random reference set drawn from the
/// undiscovered elements together with each single-element change of it, and
/// split the marginals at their largest gap. The lower group is the next layer.
pub fn discover_layers(
    f: &dyn SetFunction,
    layout: &PublicLayout,
    rounds: usize,
    seed: u64,
    ledger: &mut RoundLedger,
) -> Result<LayerKnowledge> {
    let layers = layout.layer_sizes.len();
    if rounds > layers {
        return Err(Error::Domain(format!("{rounds} rounds requested for {layers} layers")));
    }
    let target = discovery_target(&layout.objective)?;
    let n = f.ground_size();
    let mut known = vec![false; n];
    let mut discovered = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let undiscovered: Vec<usize> = (0..n).filter(|&e| !known[e]).collect();
        let u = undiscovered.len();
        let next = layout.layer_sizes[round];
        let m = ((target * layout.k as f64 * u as f64 / next as f64).round() as usize).clamp(1, u);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[round as u64]));
        let r = ElementSet::new(sample(&mut rng, u, m).into_iter().map(|i| undiscovered[i]).collect());
        let mut queries = Vec::with_capacity(u + 1);
        queries.push(r.clone());
        queries.extend(undiscovered.iter().map(|&e| if r.contains(e) { r.without(e) } else { r.with(e) }));
        let vals = submit_batch(f, &queries, ledger)?;
        let base = vals[0];
        let marginals: Vec<f64> = undiscovered
            .iter()
            .zip(&vals[1..])
            .map(|(&e, &v)| if r.contains(e) { base - v } else { v - base })
            .collect();
        let cut = split_at_largest_gap(&marginals).ok_or(Error::Ambiguous { round })?;
        let layer: Vec<usize> =
            undiscovered.iter().zip(&marginals).filter(|(_, &v)| v < cut).map(|(&e, _)| e).collect();
        if layer.len() != next {
            return Err(Error::Ambiguous { round });
        }
        for &e in &layer {
            known[e] = true;
        }
        discovered.push(ElementSet::new(layer));
    }
    Ok(LayerKnowledge { discovered, rounds })
}

/// Midpoint of the largest gap in the sorted values, if that gap is clearly
/// larger than every other one.
fn split_at_largest_gap(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (mut best, mut second, mut at) = (0.0, 0.0, 0);
    for i in 1..v.len() {
        let g = v[i] - v[i - 1];
        if g > best {
            second = best;
            best = g;
            at = i;
        } else if g > second {
            second = g;
        }
    }
    (best > 0.0 && best >= 3.0 * second).then(|| 0.5 * (v[at - 1] + v[at]))
}

// ---------------------------------------------------------------- best layered answer

/// `1 - 1/e` with the known-layer advantage removed: `1 - e^{-1} e^{1/(64s) - ε}`
/// for `s ≥ 1`, `1 - 1/e` for `s = 0`.
pub fn theory_cap(s: usize, eps: f64) -> f64 {
    if s == 0 {
        1.0 - (-1.0f64).exp()
    } else {
        1.0 - (-1.0 + 1.0 / (64.0 * s as f64) - eps).exp()
    }
}

/// Best answer found for an algorithm that knows the first `s` layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredSolution {
    pub s: usize,
    pub profile: CountProfile,
    pub value: f64,
    /// Value after rounding the profile to whole element counts.
    pub rounded_value: f64,
}

fn known_layers(objective: &Objective) -> Result<usize> {
    match objective {
        Objective::LogRound(p) => Ok(p.layers),
        Objective::PolyRound(p) => Ok(p.r),
        _ => Err(Error::Domain("not a layered objective".into())),
    }
}

fn symmetric_value(objective: &Objective, c: &CountProfile, s: usize) -> f64 {
    match objective {
        Objective::LogRound(p) => functions::symmetric_log_unchecked(&c.x, &c.y, s, p.epsilon),
        Objective::PolyRound(p) => functions::symmetric_poly_unchecked(&c.x, &c.y, s, p),
        _ => unreachable!("checked by known_layers"),
    }
}

/// Profile with `free` on the known layers and mass `1 - Σfree` spread over the
/// remaining parts in proportion to their public sizes.
fn layered_profile(layout: &PublicLayout, free: &[f64]) -> CountProfile {
    let s = free.len();
    let tail = (1.0 - free.iter().sum::<f64>()).max(0.0);
    let rest: usize = layout.layer_sizes[s..].iter().sum::<usize>() + layout.block_sizes.iter().sum::<usize>();
    let share = |size: usize| if rest == 0 { 0.0 } else { tail * size as f64 / rest as f64 };
    let mut x = free.to_vec();
    x.extend(layout.layer_sizes[s..].iter().map(|&z| share(z)));
    CountProfile::new(x, layout.block_sizes.iter().map(|&z| share(z)).collect())
}

fn rounded(layout: &PublicLayout, c: &CountProfile) -> CountProfile {
    let k = layout.k as f64;
    let r = |v: f64, size: usize| (v * k).round().min(size as f64) / k;
    CountProfile::new(
        c.x.iter().zip(&layout.layer_sizes).map(|(&v, &z)| r(v, z)).collect(),
        c.y.iter().zip(&layout.block_sizes).map(|(&v, &z)| r(v, z)).collect(),
    )
}

/// Euclidean projection onto `{x ≥ 0, Σx ≤ 1}`.
fn project_capped_simplex(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    if v.iter().sum::<f64>() <= 1.0 {
        return;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let (mut acc, mut theta) = (0.0, 0.0);
    for (i, &ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projected gradient ascent with step halving and a central-difference gradient.
fn ascend(g: &dyn Fn(&[f64]) -> f64, start: Vec<f64>) -> (Vec<f64>, f64) {
    let h = 1e-7;
    let mut x = start;
    project_capped_simplex(&mut x);
    let mut val = g(&x);
    let mut step = 0.1;
    for _ in 0..5000 {
        let grad: Vec<f64> = (0..x.len())
            .map(|i| {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[i] += h;
                b[i] -= h;
                (g(&a) - g(&b)) / (2.0 * h)
            })
            .collect();
        let mut improved = false;
        while step > 1e-14 {
            let mut cand: Vec<f64> = x.iter().zip(&grad).map(|(a, d)| a + step * d).collect();
            project_capped_simplex(&mut cand);
            let cv = g(&cand);
            if cv > val {
                let gain = cv - val;
                x = cand;
                val = cv;
                improved = gain > 1e-10;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, val)
}

/// Maximize the answer seen with `s` known layers over the free coordinates,
/// total mass 1, tail spread symmetrically. 20 restarts, the first from 0.
pub fn best_layered_solution(layout: &PublicLayout, s: usize) -> Result<LayeredSolution> {
    let layers = known_layers(&layout.objective)?;
    if s > layers {
        return Err(Error::Domain(format!("known layers {s} exceed {layers}")));
    }
    let obj = &layout.objective;
    let value_of = |free: &[f64]| symmetric_value(obj, &layered_profile(layout, free), s);
    let mut best = (vec![0.0; s], value_of(&vec![0.0; s]));
    if s > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x5eed, &[s as u64]));
        for restart in 0..20 {
            let start: Vec<f64> =
                if restart == 0 { vec![0.0; s] } else { (0..s).map(|_| rng.gen::<f64>() / s as f64).collect() };
            let (x, v) = ascend(&value_of, start);
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    let mut profile = layered_profile(layout, &best.0);
    let mut value = best.1;
    let mut rounded_value = symmetric_value(obj, &rounded(layout, &profile), s);
    if s == layers && !layout.block_sizes.is_empty() {
        // full knowledge: a single block is an optimal answer
        let mut y = vec![0.0; layout.block_sizes.len()];
        y[0] = (layout.block_sizes[0] as f64 / layout.k as f64).min(1.0);
        let c = CountProfile::new(vec![0.0; layers], y);
        let v = match obj {
            Objective::LogRound(p) => functions::f_log_round(&c, p)?,
            Objective::PolyRound(p) => functions::f_poly_round(&c, p)?,
            _ => unreachable!(),
        };
        if v > value {
            value = v;
            rounded_value = v;
            profile = c;
        }
    }
    Ok(LayeredSolution { s, profile, value, rounded_value })
}

/// Value at the equal-increment profile `x_i = (1 - 2^{-i}) / (2s)`, a feasible
/// point and so a lower bound on [`best_layered_solution`].
pub fn witness_value(layout: &PublicLayout, s: usize) -> Result<f64> {
    let layers = known_layers(&layout.objective)?;
    if s > layers {
        return Err(Error::Domain(format!("known layers {s} exceed {layers}")));
    }
    Ok(symmetric_value(&layout.objective, &layered_profile(layout, &equal_increment(s)), s))
}

fn equal_increment(r: usize) -> Vec<f64> {
    (1..=r).map(|i| (1.0 - 0.5f64.powi(i as i32)) / (2.0 * r as f64)).collect()
}

/// One line of an adaptivity curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub s: usize,
    /// Fraction of trials whose discovery recovered exactly the first `s` layers.
    pub discovered_ok: f64,
    pub best_value: f64,
    pub theory_cap: f64,
    pub witness_value: f64,
}

/// For `s = 0..=s_max`: discovery success rate over `trials` seeds, the best
/// answer with `s` known layers, its cap and the equal-increment witness.
pub fn adaptivity_curve(oracle: &LayeredOracle, s_max: usize, trials: usize, seed: u64) -> Result<Vec<CurveRow>> {
    use rayon::prelude::*;
    let layout = oracle.public_layout();
    let eps = layout.objective.epsilon().unwrap_or(0.0);
    (0..=s_max)
        .map(|s| {
            let ok = (0..trials)
                .into_par_iter()
                .filter(|&t| {
                    let mut ledger = RoundLedger::new();
                    discover_layers(oracle, &layout, s, derive_seed(seed, &[t as u64]), &mut ledger)
                        .is_ok_and(|k| k.matches(oracle.partition()) && ledger.rounds_used() == s)
                })
                .count();
            Ok(CurveRow {
                s,
                discovered_ok: if trials == 0 { 0.0 } else { ok as f64 / trials as f64 },
                best_value: best_layered_solution(&layout, s)?.value,
                theory_cap: theory_cap(s, eps),
                witness_value: witness_value(&layout, s)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- auxiliary programs

/// Minimizer and value of a small convex program, with a numeric cross-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub numeric_x: Vec<f64>,
    pub numeric_value: f64,
}

/// Projection onto `{x ≥ 0, a·x ≥ b}` for `a > 0`.
fn project_halfspace_orthant(v: &[f64], a: &[f64], b: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(a).map(|(x, w)| (x + lam * w).max(0.0)).collect() };
    let dot = |x: &[f64]| x.iter().zip(a).map(|(x, w)| x * w).sum::<f64>();
    let p = at(0.0);
    if dot(&p) >= b {
        return p;
    }
    let mut hi = 1.0;
    while dot(&at(hi)) < b {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dot(&at(mid)) < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// Accelerated projected gradient for a smooth convex objective.
fn fista(
    obj: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    proj: &dyn Fn(&[f64]) -> Vec<f64>,
    lipschitz: f64,
    start: Vec<f64>,
) -> Vec<f64> {
    let mut x = proj(&start);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut fx = obj(&x);
    for _ in 0..200_000 {
        let g = grad(&z);
        let next = proj(&z.iter().zip(&g).map(|(a, d)| a - d / lipschitz).collect::<Vec<_>>());
        let fn_ = obj(&next);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let restart = fn_ > fx;
        z = if restart {
            t = 1.0;
            next.clone()
        } else {
            let m = (t - 1.0) / tn;
            t = tn;
            next.iter().zip(&x).map(|(a, b)| a + m * (a - b)).collect()
        };
        let moved = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        fx = fn_;
        if moved < 1e-15 {
            break;
        }
    }
    x
}

fn quadr_objective(x: &[f64]) -> f64 {
    let mut prev = 0.0;
    x.iter()
        .map(|&xi| {
            let d = 2.0 * xi - prev;
            prev = xi;
            d * d
        })
        .sum()
}

fn quadr_gradient(x: &[f64]) -> Vec<f64> {
    let r = x.len();
    let mut d = vec![0.0; r];
    let mut prev = 0.0;
    for i in 0..r {
        d[i] = 2.0 * x[i] - prev;
        prev = x[i];
    }
    (0..r).map(|i| 4.0 * d[i] - if i + 1 < r { 2.0 * d[i + 1] } else { 0.0 }).collect()
}

/// `min 4x₁² + Σ_{i≥2}(2x_i - x_{i-1})²` over `x ≥ 0`,
/// `Σ_{i<r} x_i + 2x_r ≥ ½`. The optimum has equal increments and value `1/(4r)`.
pub fn quadr_opt_solve(r: usize) -> Result<ProgramSolution> {
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    let x = equal_increment(r);
    let mut a = vec![1.0; r];
    a[r - 1] = 2.0;
    let proj = |v: &[f64]| project_halfspace_orthant(v, &a, 0.5);
    let numeric_x = fista(&quadr_objective, &quadr_gradient, &proj, 18.0, vec![0.0; r]);
    Ok(ProgramSolution { value: 1.0 / (4.0 * r as f64), numeric_value: quadr_objective(&numeric_x), x, numeric_x })
}

/// Convex lower bound and solver output for the poly-round program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// `r·h(δ/(3r))`.
    pub bound: f64,
    /// False when `δ/(3r) ≤ ε`, where the bound degenerates to 0.
    pub regime_ok: bool,
}

fn poly_objective(x: &[f64], delta: f64, alpha: f64, eps: f64) -> f64 {
    let mut prev = 0.0;
    x.iter()
        .map(|&xi| {
            let v = h_poly_unchecked((1.0 + delta) * xi - prev, alpha, eps);
            prev = xi;
            v
        })
        .sum()
}

fn poly_gradient(x: &[f64], delta: f64, alpha: f64, eps: f64) -> Vec<f64> {
    let r = x.len();
    let mut slope = vec![0.0; r];
    let mut prev = 0.0;
    for i in 0..r {
        slope[i] = h_poly_slope((1.0 + delta) * x[i] - prev, alpha, eps);
        prev = x[i];
    }
    (0..r).map(|i| (1.0 + delta) * slope[i] - if i + 1 < r { slope[i + 1] } else { 0.0 }).collect()
}

/// `min Σ_{i<r} h((1+δ)x_{i+1} - x_i)` over `x ≥ 0`, `Σx ≥ ⅓`, with `x₀ = 0`.
pub fn polyround_opt_solve(r: usize, delta: f64, alpha: f64, eps: f64) -> Result<PolySolution> {
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    functions::check_alpha(alpha)?;
    if !(delta > 0.0) || !(eps > 0.0) {
        return Err(Error::Domain("δ and ε must be positive".into()));
    }
    let ones = vec![1.0; r];
    let proj = |v: &[f64]| project_halfspace_orthant(v, &ones, 1.0 / 3.0);
    let obj = |x: &[f64]| poly_objective(x, delta, alpha, eps);
    let grad = |x: &[f64]| poly_gradient(x, delta, alpha, eps);
    let lipschitz = 2.0 * alpha * (2.0 + delta).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x9017, &[r as u64]));
    let mut best = poly_equal_increment(r, delta, alpha, eps).0;
    let mut best_v = obj(&best);
    for restart in 0..20 {
        let start: Vec<f64> = if restart == 0 { best.clone() } else { (0..r).map(|_| rng.gen::<f64>()).collect() };
        let x = fista(&obj, &grad, &proj, lipschitz, start);
        let v = obj(&x);
        if v < best_v {
            best = x;
            best_v = v;
        }
    }
    let u = delta / (3.0 * r as f64);
    Ok(PolySolution { x: best, value: best_v, bound: r as f64 * h_poly_unchecked(u, alpha, eps), regime_ok: u > eps })
}

/// Feasible point with every penalty argument equal and `Σx = ⅓`, and its objective.
pub fn poly_equal_increment(r: usize, delta: f64, alpha: f64, eps: f64) -> (Vec<f64>, f64) {
    let mut x = Vec::with_capacity(r);
    let mut prev = 0.0;
    for _ in 0..r {
        prev = (prev + 1.0) / (1.0 + delta);
        x.push(prev);
    }
    let scale = (1.0 / 3.0) / x.iter().sum::<f64>();
    for v in &mut x {
        *v *= scale;
    }
    let value = poly_objective(&x, delta, alpha, eps);
    (x, value)
}

/// One line of the bounds table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub r: usize,
    pub quadr_opt: f64,
    pub poly_bound: f64,
    pub log_round_cap: f64,
}

pub fn bounds_table(rs: &[usize], delta: f64, alpha: f64, eps: f64) -> Result<Vec<BoundsRow>> {
    functions::check_alpha(alpha)?;
    rs.iter()
        .map(|&r| {
            if r == 0 {
                return Err(Error::Domain("r must be at least 1".into()));
            }
            Ok(BoundsRow {
                r,
                quadr_opt: 1.0 / (4.0 * r as f64),
                poly_bound: r as f64 * h_poly_unchecked(delta / (3.0 * r as f64), alpha, eps),
                log_round_cap: theory_cap(r, eps),
            })
        })
        .collect()
}
