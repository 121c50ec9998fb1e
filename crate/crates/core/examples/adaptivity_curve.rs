// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Learn hidden layers one round at a time, then compare the best answer
//! with s known layers against its cap.

use adaptive_submod::baselines::{adaptivity_curve, discover_layers};
use adaptive_submod::functions::LogRoundParams;
use adaptive_submod::instance::{LayeredOracle, Objective};
use adaptive_submod::oracle::{sample_partition, RoundLedger};
use adaptive_submod::spec::halving_layout;

fn main() -> adaptive_submod::Result<()> {
    let (layers, blocks) = halving_layout(8, 4, 32);
    let n = layers.iter().chain(&blocks).sum();
    let p = sample_partition(&layers, &blocks, n, 7)?;
    let o = LayeredOracle::new(p, Objective::LogRound(LogRoundParams { layers: 8, blocks: 4, epsilon: 0.3, k: 200 }))?;

    let mut ledger = RoundLedger::new();
    let known = discover_layers(&o, &o.public_layout(), 3, 1, &mut ledger)?;
    println!("discovered 3 layers in {} rounds, correct: {}", ledger.rounds_used(), known.matches(o.partition()));

    println!("s,discovered_ok,best_value,theory_cap");
    for r in adaptivity_curve(&o, 6, 20, 1)? {
        println!("{},{},{:.6},{:.6}", r.s, r.discovered_ok, r.best_value, r.theory_cap);
    }
    Ok(())
}
