// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Continuous double greedy with a known optimum and with the optimum
//! guessed on a geometric grid, run in lockstep.

use adaptive_submod::calculus::EstimatorConfig;
use adaptive_submod::double_greedy::{diagnostics_check, guess_opt, run_double_greedy};
use adaptive_submod::instance::{LayeredOracle, Objective, SmallFunction};
use adaptive_submod::oracle::sample_partition;

fn main() -> adaptive_submod::Result<()> {
    let gamma = 0.05;
    let p = sample_partition(&[50, 50], &[], 100, 1)?;
    let cut = LayeredOracle::new(p, Objective::DirectedCut { delta: 0.5, opt_scale: 1.0 })?;
    let opt = cut.unconstrained_opt();
    let r = run_double_greedy(&cut, gamma, &EstimatorConfig::block_exact(), opt)?;
    println!(
        "directed cut: DG {:.6}, RND {:.6}, OPT {opt:.6}, {} iterations, {} rounds",
        r.dg_value, r.rnd_value, r.iterations, r.rounds_used
    );
    for c in diagnostics_check(&r, opt)?.checks {
        println!("  {:<15} {:.3e} <= {:.3e}", c.name, c.lhs, c.rhs);
    }

    let f = SmallFunction::random_cut(12, 0.4, 9);
    let out = guess_opt(&f, gamma, &EstimatorConfig::exact())?;
    println!(
        "cut n = 12: {} guesses, best DG {:.6} vs OPT {:.6}, {} rounds in total",
        out.guesses.len(),
        out.best.dg_value,
        f.brute_force_opt(),
        out.ledger.rounds_used()
    );
    Ok(())
}
