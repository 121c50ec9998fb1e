// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command implementations behind the `adaptive-submod` binary. Each command
//! returns its full output as a string so runs can be compared byte for byte.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::baselines::{adaptivity_curve, bounds_table};
use crate::calculus::EstimatorConfig;
use crate::double_greedy::{guess_opt, run_double_greedy, DGReport};
use crate::error::{Error, Result};
use crate::functions::{self, ALPHA_MAX};
use crate::instance::{LayeredOracle, Objective, SmallFunction};
use crate::oracle::{BlockSymmetric, CountProfile, ElementSet, SetFunction};
use crate::spec::{random_counts, rng_for, set_with_counts, Instance, InstanceSpec};

/// Violations below this count as passes.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Options shared by all commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Path to a JSON instance spec, or the JSON itself.
    pub instance: Option<String>,
    pub seed: u64,
    pub gamma: f64,
    pub samples: usize,
    pub trials: usize,
    pub rounds_max: usize,
    pub format: Format,
    pub exact: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: None,
            seed: 0,
            gamma: 0.05,
            samples: 10_000,
            trials: 100,
            rounds_max: 6,
            format: Format::Csv,
            exact: false,
        }
    }
}

/// Print with 12 significant digits, shortest form.
pub fn fmt_sig(v: f64) -> String {
    sig(v).to_string()
}

fn sig(v: f64) -> f64 {
    if v.is_finite() {
        format!("{v:.11e}").parse().unwrap_or(v)
    } else {
        v
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

fn to_json(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

/// Read a spec from inline JSON (starting with `{`) or a file.
pub fn load_spec(arg: &str) -> Result<InstanceSpec> {
    let t = arg.trim_start();
    if t.starts_with('{') {
        InstanceSpec::from_json(t)
    } else {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::InvalidSpec(format!("{arg}: {e}")))?;
        InstanceSpec::from_json(&text)
    }
}

fn require_spec(cfg: &RunConfig) -> Result<InstanceSpec> {
    load_spec(cfg.instance.as_deref().ok_or_else(|| Error::InvalidSpec("--instance is required".into()))?)
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub status: CheckStatus,
}

impl CheckResult {
    fn measured(name: &str, samples: usize, max_violation: f64) -> Self {
        let status = if max_violation < VIOLATION_TOL { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckResult { name: name.into(), samples, max_violation, status }
    }

    fn not_applicable(name: &str) -> Self {
        CheckResult { name: name.into(), samples: 0, max_violation: 0.0, status: CheckStatus::NotApplicable }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Random nested count pairs `a ≤ b` and a part with room left in `b`. Counts
/// are capped at a random fraction of `scale` per part, so profiles spread
/// over the uncapped range instead of saturating.
fn nested_counts(sizes: &[usize], scale: usize, rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<usize>, Vec<usize>, usize) {
    let part = loop {
        let p = rng.gen_range(0..sizes.len());
        if sizes[p] > 0 {
            break p;
        }
    };
    let mut room = sizes.to_vec();
    room[part] -= 1;
    let cap = rng.gen_range(1..=scale.max(1));
    let b = random_counts(&room, cap, rng);
    let a = b.iter().map(|&c| rng.gen_range(0..=c)).collect();
    (a, b, part)
}

fn plus(c: &[usize], part: usize) -> Vec<usize> {
    let mut v = c.to_vec();
    v[part] += 1;
    v
}

/// Monotonicity and diminishing returns on `samples` random pairs.
pub fn layered_property_checks(o: &LayeredOracle, samples: usize, seed: u64) -> Vec<CheckResult> {
    let sizes = o.part_sizes();
    // per-part counts up to 4k/parts give total mass up to about 2
    let scale = match o.objective().normalizer() {
        Some(k) => 4 * k / sizes.len(),
        None => sizes.iter().copied().max().unwrap_or(1),
    };
    let mut rng = rng_for(seed);
    let (mut mono, mut sub) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (a, b, p) = nested_counts(&sizes, scale, &mut rng);
        let (fa, fb) = (o.value_counts(&a), o.value_counts(&b));
        let (fa1, fb1) = (o.value_counts(&plus(&a, p)), o.value_counts(&plus(&b, p)));
        mono = mono.max(fa - fb).max(fb - fb1);
        sub = sub.max((fb1 - fb) - (fa1 - fa));
    }
    let monotone = if o.objective().is_monotone() {
        CheckResult::measured("monotone", samples, mono)
    } else {
        CheckResult::not_applicable("monotone")
    };
    vec![monotone, CheckResult::measured("submodular", samples, sub)]
}

/// Same checks on an explicit small function, over bitmasks.
pub fn small_property_checks(f: &SmallFunction, samples: usize, seed: u64) -> Vec<CheckResult> {
    let n = f.ground_size();
    let mut rng = rng_for(seed);
    let (mut mono, mut sub) = (0.0f64, 0.0f64);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..samples {
        let e = rng.gen_range(0..n);
        let b = rng.gen::<u64>() & full & !(1 << e);
        let a = b & rng.gen::<u64>();
        let (fa, fb) = (f.value_mask(a), f.value_mask(b));
        let (fa1, fb1) = (f.value_mask(a | 1 << e), f.value_mask(b | 1 << e));
        mono = mono.max(fa - fb).max(fb - fb1);
        sub = sub.max((fb1 - fb) - (fa1 - fa));
    }
    let monotone = if f.is_monotone() {
        CheckResult::measured("monotone", samples, mono)
    } else {
        CheckResult::not_applicable("monotone")
    };
    vec![monotone, CheckResult::measured("submodular", samples, sub)]
}

/// Set queries must agree with the count-level formula they reduce to.
fn set_agreement(o: &LayeredOracle, samples: usize, seed: u64) -> CheckResult {
    let sizes = o.part_sizes();
    let mut rng = rng_for(seed ^ 0xa5a5);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let c = random_counts(&sizes, usize::MAX, &mut rng);
        worst = worst.max((o.value(&set_with_counts(o, &c)) - o.value_counts(&c)).abs());
    }
    CheckResult::measured("set_count_agreement", samples, worst)
}

fn anchors(o: &LayeredOracle) -> Result<CheckResult> {
    let eps = o.objective().epsilon();
    let dev = match o.objective() {
        Objective::LogRound(p) => {
            let mut y = vec![0.0; p.blocks];
            y[0] = 1.0;
            let g = functions::g_hard(&y, p.epsilon, p.blocks)?;
            let c = CountProfile::new(vec![0.0; p.layers], y);
            (g - p.cap()).abs().max((functions::f_log_round(&c, p)? - p.cap()).abs())
        }
        Objective::PolyRound(p) => {
            let mut y = vec![0.0; p.blocks];
            y[0] = 1.0;
            (functions::g_hard(&y, p.epsilon, p.blocks)? - p.cap()).abs()
        }
        Objective::OneMinusInvE { blocks, .. } => {
            let e = eps.unwrap_or(0.0);
            let mut y = vec![0.0; *blocks];
            y[0] = 1.0;
            (functions::g_hard(&y, e, *blocks)? - (1.0 - e)).abs()
        }
        Objective::DirectedCut { .. } => o.value(&ElementSet::empty()).abs(),
    };
    Ok(CheckResult::measured("closed_form_anchors", 1, dev))
}

/// Property suite on the instance named by the config.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let spec = require_spec(cfg)?;
    let (inst, _) = spec.build()?;
    let samples = cfg.samples.max(1);
    let checks = match &inst {
        Instance::Layered(o) => {
            let mut c = layered_property_checks(o, samples, cfg.seed);
            c.push(set_agreement(o, samples.min(200), cfg.seed));
            c.push(anchors(o)?);
            c
        }
        Instance::Small(f) => small_property_checks(f, samples, cfg.seed),
    };
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    let family = serde_json::to_value(spec.family).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok(VerifyReport { family, seed: cfg.seed, checks, passed })
}

pub fn render_verify(r: &VerifyReport) -> String {
    to_json(serde_json::to_value(r).expect("serializable"))
}

// ---------------------------------------------------------------- run-dg

/// Double greedy on the configured instance; OPT from the instance when
/// known, otherwise from the guess grid.
pub fn cmd_run_dg(cfg: &RunConfig) -> Result<String> {
    let spec = require_spec(cfg)?;
    let (inst, _) = spec.build()?;
    let f = inst.as_set_function();
    let est = match (cfg.exact, &inst) {
        (true, Instance::Layered(_)) => EstimatorConfig::block_exact(),
        (true, Instance::Small(_)) => EstimatorConfig::exact(),
        (false, _) => EstimatorConfig::monte_carlo(cfg.samples, cfg.seed),
    };
    let (report, source) = match inst.known_opt() {
        Some(opt) if opt > 0.0 => (run_double_greedy(f, cfg.gamma, &est, opt)?, "known"),
        _ => (guess_opt(f, cfg.gamma, &est)?.best, "guessed"),
    };
    Ok(render_dg(&report, source, cfg.format))
}

fn delta_stat(r: &DGReport) -> f64 {
    0.5 - r.rnd_value / r.opt_estimate
}

pub fn render_dg(r: &DGReport, opt_source: &str, format: Format) -> String {
    let passed = r.checks.values().all(|&c| c);
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["delta_stat"] = json!(delta_stat(r));
            v["opt_source"] = json!(opt_source);
            to_json(v)
        }
        Format::Csv => format!(
            "dg_value,rnd_value,opt_estimate,rounds_used,iterations,alpha_sum,beta_sum,delta_stat,checks_passed\n{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(r.dg_value),
            fmt_sig(r.rnd_value),
            fmt_sig(r.opt_estimate),
            r.rounds_used,
            r.iterations,
            fmt_sig(r.alpha_sum),
            fmt_sig(r.beta_sum),
            fmt_sig(delta_stat(r)),
            passed
        ),
    }
}

// ---------------------------------------------------------------- curve and bounds

/// Output of the curve command; `warning` is set when discovery fell short.
pub struct CurveOutput {
    pub text: String,
    pub warning: Option<String>,
}

pub fn cmd_adaptivity_curve(cfg: &RunConfig) -> Result<CurveOutput> {
    let spec = require_spec(cfg)?;
    let (inst, _) = spec.build()?;
    let o = inst.layered().filter(|o| o.objective().epsilon().is_some() && o.partition().num_layers() > 0);
    let o = o.ok_or_else(|| Error::InvalidSpec("adaptivity-curve needs a layered instance".into()))?;
    let s_max = cfg.rounds_max.min(o.partition().num_layers());
    let rows = adaptivity_curve(o, s_max, cfg.trials, cfg.seed)?;
    let low: Vec<usize> = rows.iter().filter(|r| r.discovered_ok < 0.99).map(|r| r.s).collect();
    let warning = (!low.is_empty()).then(|| format!("layer discovery below 99% success for s = {low:?}"));
    let text = match cfg.format {
        Format::Json => to_json(serde_json::to_value(&rows).expect("serializable")),
        Format::Csv => {
            let mut s = String::from("s,discovered_ok,best_value,theory_cap\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{}\n",
                    r.s,
                    fmt_sig(r.discovered_ok),
                    fmt_sig(r.best_value),
                    fmt_sig(r.theory_cap)
                );
            }
            s
        }
    };
    Ok(CurveOutput { text, warning })
}

/// Default parameters for the bounds table when no instance is given.
pub const DEFAULT_BOUNDS: (f64, f64, f64) = (0.4, ALPHA_MAX, 1e-3);

pub fn cmd_bounds(cfg: &RunConfig) -> Result<String> {
    let (mut delta, mut alpha, mut eps) = DEFAULT_BOUNDS;
    if cfg.instance.is_some() {
        let p = require_spec(cfg)?.params;
        delta = p.delta.unwrap_or(delta);
        alpha = p.alpha.unwrap_or(alpha);
        eps = p.epsilon.unwrap_or(eps);
    }
    let rs: Vec<usize> = (1..=cfg.rounds_max.max(1)).collect();
    let rows = bounds_table(&rs, delta, alpha, eps)?;
    Ok(match cfg.format {
        Format::Json => to_json(serde_json::to_value(&rows).expect("serializable")),
        Format::Csv => {
            let mut s = String::from("r,quadr_opt,poly_bound,log_round_cap\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{}\n",
                    r.r,
                    fmt_sig(r.quadr_opt),
                    fmt_sig(r.poly_bound),
                    fmt_sig(r.log_round_cap)
                );
            }
            s
        }
    })
}
