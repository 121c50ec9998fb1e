// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! A random query of size k meets every hidden part in proportion to its
//! size, so its value equals the symmetrized answer that reveals nothing
//! about the partition. A query aimed at a single block scores much higher.

use adaptive_submod::functions::{symmetric_answer_log, LogRoundParams};
use adaptive_submod::instance::{LayeredOracle, Objective};
use adaptive_submod::oracle::{sample_partition, ElementSet, Part, SetFunction};
use adaptive_submod::spec::rng_for;
use rand::seq::index::sample;

fn main() -> adaptive_submod::Result<()> {
    let k = 2000;
    let layers: Vec<usize> = (1..=8).map(|i| 1 << (11 - i)).collect();
    let blocks = vec![1946; 20];
    let n = layers.iter().chain(&blocks).sum();
    let p = LogRoundParams { layers: 8, blocks: 20, epsilon: 0.1, k };
    let o = LayeredOracle::new(sample_partition(&layers, &blocks, n, 3)?, Objective::LogRound(p.clone()))?;

    let mut rng = rng_for(1);
    for _ in 0..5 {
        let s = ElementSet::new(sample(&mut rng, n, k).into_vec());
        let c = o.partition().profile_of(&s, k)?;
        println!("random query: value {:.12}  symmetrized {:.12}", o.value(&s), symmetric_answer_log(&c, 0, &p)?);
    }
    let block = ElementSet::new(o.partition().members(Part::Block(0)));
    println!("one full block: value {:.12}", o.value(&block));
    println!("optimum {:.12}", o.unconstrained_opt());
    Ok(())
}
