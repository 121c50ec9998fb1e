// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

use adaptive_submod::calculus::*;
use adaptive_submod::double_greedy::*;
use adaptive_submod::functions::LogRoundParams;
use adaptive_submod::instance::{LayeredOracle, Objective, SmallFunction};
use adaptive_submod::oracle::*;
use proptest::prelude::*;

fn small_function(kind: u8, n: usize, seed: u64) -> SmallFunction {
    match kind % 3 {
        0 => SmallFunction::random_cut(n, 0.4, seed),
        1 => SmallFunction::random_coverage(n, 2 * n, 0.3, seed),
        _ => SmallFunction::random_modular(n, seed),
    }
}

fn toy_log(seed: u64) -> LayeredOracle {
    let p = sample_partition(&[4, 2, 1], &[3, 2], 12, seed).unwrap();
    LayeredOracle::new(p, Objective::LogRound(LogRoundParams { layers: 3, blocks: 2, epsilon: 0.3, k: 4 })).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn directions_split_a_unit_step(gx in -5.0f64..5.0, gap in 0.0f64..5.0) {
        let gy = gx - gap;
        let (dx, dy) = directions(&[gx], &[gy]);
        prop_assert!(dx[0] >= 0.0 && dy[0] <= 0.0);
        prop_assert!((dx[0] - dy[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn element_set_edits(ids in prop::collection::vec(0usize..40, 0..20), e in 0usize..40) {
        let s = ElementSet::new(ids);
        prop_assert!(s.with(e).contains(e));
        prop_assert!(!s.without(e).contains(e));
        prop_assert!(s.ids().windows(2).all(|w| w[0] < w[1]));
        if !s.contains(e) {
            prop_assert_eq!(s.with(e).without(e), s.clone());
            prop_assert_eq!(s.with(e).len(), s.len() + 1);
        }
    }

    #[test]
    fn vertices_match_the_set_function(kind in 0u8..3, n in 2usize..10, seed in 0u64..1000, mask in 0u64..1024) {
        let f = small_function(kind, n, seed);
        let s = ElementSet::from_mask(mask & ((1 << n) - 1));
        let v = multilinear_value(&f, &FractionalPoint::indicator(n, &s), &EstimatorConfig::exact()).unwrap().mean;
        prop_assert!((v - f.value(&s)).abs() < 1e-12);
    }

    #[test]
    fn extension_stays_within_the_value_range(kind in 0u8..3, n in 2usize..9, seed in 0u64..1000,
                                               z in prop::collection::vec(0.0f64..1.0, 9)) {
        let f = small_function(kind, n, seed);
        let vals: Vec<f64> = (0..1u64 << n).map(|m| f.value(&ElementSet::from_mask(m))).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let v = multilinear_value(&f, &FractionalPoint::new(z[..n].to_vec()).unwrap(), &EstimatorConfig::exact()).unwrap().mean;
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn box_projection_is_idempotent(t in prop::collection::vec(-1.0f64..2.0, 5), w in prop::collection::vec(0.0f64..0.5, 5)) {
        let lo = FractionalPoint::new(w.clone()).unwrap();
        let hi = FractionalPoint::new(w.iter().map(|a| a + 0.5).collect()).unwrap();
        let clipped: Vec<f64> = t.iter().map(|a| a.clamp(0.0, 1.0)).collect();
        let p = box_project(&FractionalPoint::new(clipped).unwrap(), &lo, &hi).unwrap();
        prop_assert_eq!(box_project(&p, &lo, &hi).unwrap(), p.clone());
        for i in 0..5 {
            prop_assert!(lo.coords()[i] <= p.coords()[i] && p.coords()[i] <= hi.coords()[i]);
        }
    }

    #[test]
    fn double_greedy_terminates_inside_the_box(kind in 0u8..2, n in 3usize..9, seed in 0u64..1000, g in 0.05f64..0.5) {
        let f = small_function(kind, n, seed);
        let opt = f.brute_force_opt();
        prop_assume!(opt > 0.0);
        let r = run_double_greedy(&f, g, &EstimatorConfig::exact(), opt).unwrap();
        prop_assert!(r.iterations <= iteration_bound(g));
        prop_assert!(r.checks["box"] && r.checks["termination"]);
        prop_assert!(r.dg_value <= opt + 1e-9);
    }

    #[test]
    fn layered_value_depends_only_on_counts(seed in 0u64..1000, mask in 0u64..4096) {
        let a = toy_log(seed);
        let b = toy_log(seed + 1);
        let s = ElementSet::from_mask(mask);
        let counts = a.partition().counts(&s).unwrap();
        // same counts in a differently labelled instance
        let mut ids = Vec::new();
        for (part, &c) in counts.iter().enumerate() {
            ids.extend((0..12).filter(|&e| b.partition().flat_index(e) == part).take(c));
        }
        prop_assert_eq!(a.value(&s), b.value(&ElementSet::new(ids)));
    }

    #[test]
    fn layered_values_are_monotone(seed in 0u64..1000, mask in 0u64..4096, e in 0usize..12) {
        let o = toy_log(seed);
        let s = ElementSet::from_mask(mask);
        prop_assert!(o.value(&s.with(e)) >= o.value(&s) - 1e-15);
    }

    #[test]
    fn submitted_batches_are_pure(seed in 0u64..1000, masks in prop::collection::vec(0u64..4096, 1..8)) {
        let o = toy_log(seed);
        let qs: Vec<ElementSet> = masks.iter().map(|&m| ElementSet::from_mask(m)).collect();
        let mut ledger = RoundLedger::new();
        let first = submit_batch(&o, &qs, &mut ledger).unwrap();
        let second = submit_batch(&o, &qs, &mut ledger).unwrap();
        prop_assert_eq!(first, second);
        prop_assert_eq!(ledger.rounds_used(), 2);
        prop_assert_eq!(ledger.total_queries(), 2 * qs.len());
    }
}
