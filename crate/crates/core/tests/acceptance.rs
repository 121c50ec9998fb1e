// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use adaptive_submod::baselines::*;
use adaptive_submod::calculus::*;
use adaptive_submod::double_greedy::*;
use adaptive_submod::functions::*;
use adaptive_submod::harness::{self, RunConfig};
use adaptive_submod::instance::{LayeredOracle, Objective, SmallFunction};
use adaptive_submod::oracle::*;
use adaptive_submod::spec::{halving_layout, rng_for, InstanceSpec};
use rand::seq::index::sample;

const INV_E: f64 = 0.36787944117144233;
const DESK_LOG: &str = r#"{"family":"log_round","params":{"epsilon":0.01,"ell":8,"ell_prime":4,"k":200},"seed":1}"#;
const DESK_POLY: &str = r#"{"family":"poly_round","params":{"epsilon":0.001,"r":8,"delta":0.4,"alpha":0.041666666666666664,"ell_prime":4,"k":200},"seed":2}"#;
const DESK_BLOCKS: &str = r#"{"family":"one_minus_inv_e","params":{"epsilon":0.01,"ell_prime":4,"k":200},"seed":3}"#;
const DESK_CUT: &str = r#"{"family":"directed_cut","params":{"delta":0.5,"layer_sizes":[50,50]},"seed":4}"#;
const SMALL_LOG: &str = r#"{"family":"log_round","params":{"epsilon":0.3,"ell":4,"ell_prime":2,"k":200},"seed":3}"#;
const DESK_SMALL_CUT: &str = r#"{"family":"custom_small","params":{"kind":"cut","n":14},"seed":5}"#;
const DESK_SMALL_COVER: &str = r#"{"family":"custom_small","params":{"kind":"coverage","n":14},"seed":6}"#;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn build(spec: &str) -> adaptive_submod::spec::Instance {
    InstanceSpec::from_json(spec).unwrap().build().unwrap().0
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    check(e <= limit, format!("{what} took {e:.1?}, limit {limit:?}"))
}

fn property_suites() -> Outcome {
    let mut worst = 0.0f64;
    for spec in [DESK_LOG, DESK_POLY, DESK_BLOCKS, DESK_CUT, DESK_SMALL_CUT, DESK_SMALL_COVER] {
        let t = Instant::now();
        let cfg = RunConfig { instance: Some(spec.into()), samples: 10_000, seed: 11, ..RunConfig::default() };
        let r = harness::cmd_verify(&cfg).map_err(|e| e.to_string())?;
        within(t, Duration::from_secs(10), &r.family)?;
        for c in &r.checks {
            if c.status == harness::CheckStatus::NotApplicable {
                continue;
            }
            check(c.max_violation < 1e-9, format!("{} {} violation {:e}", r.family, c.name, c.max_violation))?;
            worst = worst.max(c.max_violation);
        }
        check(r.passed, format!("{} failed", r.family))?;
    }
    Ok(format!("6 families, max violation {worst:e}"))
}

fn closed_form_anchors() -> Outcome {
    let eps = 0.01;
    check(g_hard(&[1.0, 0.0, 0.0, 0.0], eps, 4).unwrap() == 1.0 - eps, "g at a unit block")?;
    let p = LogRoundParams { layers: 8, blocks: 4, epsilon: eps, k: 200 };
    let mut y = vec![0.0; 4];
    y[3] = 1.0;
    check(
        f_log_round(&CountProfile::new(vec![0.0; 8], y.clone()), &p).unwrap() == 1.0 - eps,
        "log f at the last block",
    )?;
    let pp = PolyRoundParams { r: 8, blocks: 4, delta: 0.4, alpha: ALPHA_MAX, epsilon: eps, k: 200 };
    check(f_poly_round(&CountProfile::new(vec![0.0; 8], y), &pp).unwrap() == 1.0 - eps, "poly f at the last block")?;

    let mut jump = 0.0f64;
    for xp in [0.0, 0.1, 0.37, 0.8] {
        for edge in [2.0 * xp + eps, 2.0 * xp - eps] {
            if edge < 0.0 {
                continue;
            }
            let below = h_pair(edge * (1.0 - 1e-15), xp, eps).unwrap();
            let at = h_pair(edge, xp, eps).unwrap();
            let above = h_pair(edge * (1.0 + 1e-15) + 1e-300, xp, eps).unwrap();
            jump = jump.max((at - below).abs()).max((above - at).abs());
        }
    }
    for knot in [eps, 2.0 + eps] {
        let at = h_poly(knot, ALPHA_MAX, eps).unwrap();
        jump = jump.max((h_poly(knot + 1e-14, ALPHA_MAX, eps).unwrap() - at).abs());
        jump = jump.max((h_poly(knot - 1e-14, ALPHA_MAX, eps).unwrap() - at).abs());
    }
    check(jump <= 1e-12, format!("branch jump {jump:e}"))?;

    let mut slack = f64::INFINITY;
    for i in 0..10_000 {
        let x = 10.0 * i as f64 / 9_999.0;
        slack = slack.min(4.0 * ALPHA_MAX * x - h_poly(x, ALPHA_MAX, eps).unwrap());
    }
    check(slack >= 0.0, format!("h_poly above 4αx by {:e}", -slack))?;
    Ok(format!("max branch jump {jump:e}"))
}

fn quadratic_program() -> Outcome {
    let mut worst = 0.0f64;
    for r in 1..=64 {
        let s = quadr_opt_solve(r).map_err(|e| e.to_string())?;
        let want = 1.0 / (4.0 * r as f64);
        check(s.value == want, format!("closed form at r = {r}"))?;
        worst = worst.max((s.numeric_value - want).abs());
    }
    check(worst <= 1e-8, format!("numeric gap {worst:e}"))?;
    Ok(format!("r = 1..64, max numeric gap {worst:e}"))
}

fn poly_program() -> Outcome {
    let mut margin = f64::INFINITY;
    for r in [4, 8, 16] {
        for delta in [0.2, 0.4] {
            let s = polyround_opt_solve(r, delta, ALPHA_MAX, 1e-3).map_err(|e| e.to_string())?;
            check(s.regime_ok, format!("regime at r = {r}, δ = {delta}"))?;
            check(s.value >= s.bound - 1e-9, format!("r = {r}, δ = {delta}: {} < {}", s.value, s.bound))?;
            margin = margin.min(s.value - s.bound);
        }
    }
    Ok(format!("6 cases, min value - bound {margin:e}"))
}

fn curve_instance() -> LayeredOracle {
    let (layers, blocks) = halving_layout(8, 4, 32);
    let n = layers.iter().chain(&blocks).sum();
    let p = sample_partition(&layers, &blocks, n, 7).unwrap();
    LayeredOracle::new(p, Objective::LogRound(LogRoundParams { layers: 8, blocks: 4, epsilon: 0.3, k: 200 })).unwrap()
}

fn adaptivity() -> Outcome {
    let t = Instant::now();
    let rows = adaptivity_curve(&curve_instance(), 6, 100, 2024).map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(60), "curve")?;
    check((rows[0].best_value - (1.0 - INV_E)).abs() <= 1e-6, format!("value(0) = {}", rows[0].best_value))?;
    for r in &rows {
        check(r.best_value <= r.theory_cap + 1e-12, format!("s = {}: {} above {}", r.s, r.best_value, r.theory_cap))?;
        check(r.discovered_ok >= 0.99, format!("s = {}: discovery rate {}", r.s, r.discovered_ok))?;
    }
    for w in rows.windows(2) {
        check(w[1].best_value >= w[0].best_value - 1e-12, format!("decrease at s = {}", w[1].s))?;
    }
    let worst = rows.iter().map(|r| r.discovered_ok).fold(1.0, f64::min);
    Ok(format!("s = 0..6, min discovery rate {worst}, value(6) = {:.6}", rows[6].best_value))
}

fn match_rate(o: &LayeredOracle, symmetric: impl Fn(&CountProfile) -> f64, k: usize, seed: u64) -> f64 {
    let mut rng = rng_for(seed);
    let n = o.ground_size();
    let hits = (0..1000)
        .filter(|_| {
            let s = ElementSet::new(sample(&mut rng, n, k).into_vec());
            let c = o.partition().profile_of(&s, k).unwrap();
            (o.value(&s) - symmetric(&c)).abs() <= 1e-12
        })
        .count();
    hits as f64 / 1000.0
}

fn indistinguishability() -> Outcome {
    let t = Instant::now();
    let k = 2000;
    let layers: Vec<usize> = (1..=8).map(|i| 1 << (11 - i)).collect();
    let rest = 40_960 - layers.iter().sum::<usize>();
    let blocks = vec![rest / 20; 20];
    let n = layers.iter().chain(&blocks).sum();
    let lp = LogRoundParams { layers: 8, blocks: 20, epsilon: 0.1, k };
    let log = LayeredOracle::new(sample_partition(&layers, &blocks, n, 31).unwrap(), Objective::LogRound(lp.clone()))
        .unwrap();
    let log_rate = match_rate(&log, |c| symmetric_answer_log(c, 0, &lp).unwrap(), k, 1);

    let layers: Vec<usize> = (1..=6).map(|i| (64.0 * 1.4f64.powi(6 - i)).round() as usize).collect();
    let rest = 40_960 - layers.iter().sum::<usize>();
    let blocks = vec![rest / 20; 20];
    let n = layers.iter().chain(&blocks).sum();
    let pp = PolyRoundParams { r: 6, blocks: 20, delta: 0.4, alpha: ALPHA_MAX, epsilon: 0.1, k };
    let poly = LayeredOracle::new(sample_partition(&layers, &blocks, n, 32).unwrap(), Objective::PolyRound(pp.clone()))
        .unwrap();
    let poly_rate = match_rate(&poly, |c| symmetric_answer_poly(c, 0, &pp).unwrap(), k, 2);

    within(t, Duration::from_secs(30), "queries")?;
    check(log_rate >= 0.99 && poly_rate >= 0.99, format!("match rates {log_rate}, {poly_rate}"))?;
    Ok(format!("match rate log {log_rate}, poly {poly_rate}"))
}

fn double_greedy() -> Outcome {
    let t = Instant::now();
    let gamma = 0.05;
    let mut worst_ratio = f64::INFINITY;
    let mut diag_checked = 0;
    let mut reports = Vec::new();
    for i in 0..50u64 {
        let n = 8 + (i % 7) as usize;
        let f = if i % 2 == 0 {
            SmallFunction::random_cut(n, 0.4, 100 + i)
        } else {
            SmallFunction::random_coverage(n, 2 * n, 0.25, 100 + i)
        };
        let opt = f.brute_force_opt();
        if opt <= 0.0 {
            continue;
        }
        let r = run_double_greedy(&f, gamma, &EstimatorConfig::exact(), opt).map_err(|e| e.to_string())?;
        check(
            r.dg_value >= (0.5 - 2.0 * gamma) * opt,
            format!("instance {i}: {} < {}", r.dg_value, (0.5 - 2.0 * gamma) * opt),
        )?;
        worst_ratio = worst_ratio.min(r.dg_value / opt);
        reports.push((r, opt));
    }

    let cut = build(DESK_CUT);
    let cut = cut.layered().unwrap();
    let opt = cut.unconstrained_opt();
    let r = run_double_greedy(cut, gamma, &EstimatorConfig::block_exact(), opt).map_err(|e| e.to_string())?;
    check(r.dg_value >= 0.51 * opt, format!("directed cut {} < 0.51·{opt}", r.dg_value))?;
    let cut_ratio = r.dg_value / opt;
    reports.push((r, opt));

    for (r, opt) in &reports {
        check(r.iterations <= iteration_bound(gamma), format!("{} iterations", r.iterations))?;
        let d = diagnostics_check(r, *opt).map_err(|e| e.to_string())?;
        for c in &d.checks {
            check(c.pass, format!("{} violated: {} > {}", c.name, c.lhs, c.rhs))?;
        }
        diag_checked += 1;
    }
    within(t, Duration::from_secs(120), "double greedy")?;
    Ok(format!("min DG/OPT {worst_ratio:.4} on 50 small, directed cut {cut_ratio:.4}, {diag_checked} diagnostics"))
}

fn random_sets() -> Outcome {
    let cut = build(DESK_CUT);
    let cut = cut.layered().unwrap();
    let opt = cut.unconstrained_opt();
    let e = random_set_value(cut, RandomSet::Density(0.5), 10_000, 8, &mut RoundLedger::new())
        .map_err(|e| e.to_string())?;
    let z = (e.mean - 0.25 * opt) / e.std_error;
    check(z.abs() <= 4.0, format!("density-½ mean {} is {z:.2}σ from ¼·OPT", e.mean))?;

    let log = build(DESK_LOG);
    let log = log.layered().unwrap();
    let k = log.objective().normalizer().unwrap();
    let c = random_set_value(log, RandomSet::Size(k), 1000, 9, &mut RoundLedger::new()).map_err(|e| e.to_string())?;
    check(c.mean <= 1.0 - INV_E + 0.02, format!("cardinality-k mean {}", c.mean))?;
    Ok(format!("directed cut {z:+.2}σ, log-round size-k mean {:.6}", c.mean))
}

fn ledger() -> Outcome {
    let cut = build(DESK_CUT);
    let cut = cut.layered().unwrap();
    let ext = block_symmetric_reduce(cut).map_err(|e| e.to_string())?;
    let opt = cut.unconstrained_opt();
    let guesses = guess_grid(2.0 * opt, 0.05);
    let all = guess_opt_with(&ext, 0.05, &guesses).map_err(|e| e.to_string())?;
    let single = guesses
        .iter()
        .map(|&g| guess_opt_with(&ext, 0.05, &[g]).map(|o| o.best.rounds_used))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let longest = *single.iter().max().unwrap();
    check(
        all.best.rounds_used == longest,
        format!("{} guesses used {} rounds, longest single {longest}", guesses.len(), all.best.rounds_used),
    )?;

    let o = curve_instance();
    let layout = o.public_layout();
    for s in 0..=6 {
        let mut l = RoundLedger::new();
        discover_layers(&o, &layout, s, 77, &mut l).map_err(|e| e.to_string())?;
        check(l.rounds_used() == s, format!("discovery of {s} layers used {} rounds", l.rounds_used()))?;
    }

    let cfg = |spec: &str| RunConfig {
        instance: Some(spec.into()),
        samples: 2000,
        trials: 20,
        rounds_max: 3,
        seed: 13,
        ..RunConfig::default()
    };
    let outputs = || -> Result<Vec<String>, String> {
        let e = |e: adaptive_submod::Error| e.to_string();
        Ok(vec![
            harness::render_verify(&harness::cmd_verify(&cfg(DESK_POLY)).map_err(e)?),
            harness::cmd_run_dg(&cfg(DESK_CUT)).map_err(e)?,
            harness::cmd_run_dg(&cfg(DESK_SMALL_COVER)).map_err(e)?,
            harness::cmd_adaptivity_curve(&cfg(SMALL_LOG)).map_err(e)?.text,
            harness::cmd_bounds(&cfg(DESK_POLY)).map_err(e)?,
        ])
    };
    check(outputs()? == outputs()?, "reruns differ")?;
    Ok(format!("{} guesses share {longest} rounds, reruns identical", guesses.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("property suites", property_suites),
        ("closed-form anchors", closed_form_anchors),
        ("quadratic program", quadratic_program),
        ("poly-round program", poly_program),
        ("adaptivity curve", adaptivity),
        ("symmetric answers", indistinguishability),
        ("double greedy", double_greedy),
        ("random-set statistics", random_sets),
        ("round ledger and determinism", ledger),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {tag} {name} ({detail}) [{:.1?}]", i + 1, t.elapsed());
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
