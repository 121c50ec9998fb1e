// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Build an instance from a JSON spec and query it in batches; each batch
//! costs one adaptive round.

use adaptive_submod::oracle::{submit_batch, ElementSet, RoundLedger};
use adaptive_submod::spec::InstanceSpec;

fn main() -> adaptive_submod::Result<()> {
    let spec = InstanceSpec::from_json(
        r#"{"family":"log_round","params":{"epsilon":0.1,"ell":3,"ell_prime":2,"k":50},"seed":7}"#,
    )?;
    let (inst, report) = spec.build()?;
    for w in &report.warnings {
        println!("warning: {w}");
    }
    let f = inst.as_set_function();
    println!("n = {}", f.ground_size());

    let mut ledger = RoundLedger::new();
    let first: Vec<ElementSet> = (0..4).map(|i| ElementSet::new((i * 50..(i + 1) * 50).collect())).collect();
    let vals = submit_batch(f, &first, &mut ledger)?;
    println!("round 1: {vals:.6?}");

    // the second batch depends on the first answers
    let best = (0..4).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let grown: Vec<ElementSet> = (0..4).filter(|&j| j != best).map(|j| first[best].union(&first[j])).collect();
    println!("round 2: {:.6?}", submit_batch(f, &grown, &mut ledger)?);
    println!("rounds used {}, queries {}", ledger.rounds_used(), ledger.total_queries());
    Ok(())
}
