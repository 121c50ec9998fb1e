// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! The two small convex programs behind the round lower bounds, solved in
//! closed form and numerically.

use adaptive_submod::baselines::{bounds_table, polyround_opt_solve, quadr_opt_solve};
use adaptive_submod::functions::ALPHA_MAX;

fn main() -> adaptive_submod::Result<()> {
    for r in [1, 4, 16] {
        let s = quadr_opt_solve(r)?;
        println!("quadratic r = {r:>2}: closed form {:.10}, numeric {:.10}", s.value, s.numeric_value);
    }
    for r in [4, 8, 16] {
        let s = polyround_opt_solve(r, 0.4, ALPHA_MAX, 1e-3)?;
        println!("poly-round r = {r:>2}: value {:.6e} >= bound {:.6e}", s.value, s.bound);
    }
    println!("r,quadr_opt,poly_bound,log_round_cap");
    for row in bounds_table(&[1, 2, 4, 8], 0.4, ALPHA_MAX, 1e-3)? {
        println!("{},{:.6},{:.6e},{:.6}", row.r, row.quadr_opt, row.poly_bound, row.log_round_cap);
    }
    Ok(())
}
