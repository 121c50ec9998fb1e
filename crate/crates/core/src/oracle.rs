// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ground sets, hidden partitions, value oracles and round accounting.
//!
//! Elements are dense ids `0..n`. A query is an [`ElementSet`]; answers come
//! back only through [`submit_batch`], which charges one adaptive round per
//! call regardless of how many queries the batch holds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of an element: a layer `X_i` or a block `Y_j` (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    Layer(usize),
    Block(usize),
}

/// Sorted, duplicate-free list of element ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ElementSet(Vec<usize>);

impl ElementSet {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        ElementSet(ids)
    }

    pub fn empty() -> Self {
        ElementSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        ElementSet((0..n).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        ElementSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn with(&self, e: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&e) {
            v.insert(pos, e);
        }
        ElementSet(v)
    }

    pub fn without(&self, e: usize) -> Self {
        let mut v = self.0.clone();
        if let Ok(pos) = v.binary_search(&e) {
            v.remove(pos);
        }
        ElementSet(v)
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ElementSet::new(v)
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &e| m | (1u64 << e))
    }
}

/// Hidden random partition of `0..n` into layers and blocks.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    n: usize,
    layer_sizes: Vec<usize>,
    block_sizes: Vec<usize>,
    // flat part index per element: layers first, then blocks
    assignment: Vec<u16>,
    seed: u64,
}

impl BlockPartition {
    /// Seeded uniform partition with the given part sizes.
    ///
    /// Labels are laid out canonically (all of `X_1`, then `X_2`, ..., then
    /// the blocks) and shuffled with Fisher-Yates driven by `seed`.
    pub fn sample(layer_sizes: &[usize], block_sizes: &[usize], n: usize, seed: u64) -> Result<Self> {
        let sizes: Vec<usize> = layer_sizes.iter().chain(block_sizes).copied().collect();
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::ZeroSizePart(pos));
        }
        if sizes.len() > u16::MAX as usize {
            return Err(Error::InvalidSpec("too many parts".into()));
        }
        let total: usize = sizes.iter().sum();
        if total != n {
            return Err(Error::SizeMismatch { declared: n, actual: total });
        }
        let mut assignment = Vec::with_capacity(n);
        for (idx, &s) in sizes.iter().enumerate() {
            assignment.extend(std::iter::repeat_n(idx as u16, s));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        assignment.shuffle(&mut rng);
        Ok(BlockPartition { n, layer_sizes: layer_sizes.to_vec(), block_sizes: block_sizes.to_vec(), assignment, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn num_parts(&self) -> usize {
        self.layer_sizes.len() + self.block_sizes.len()
    }

    /// Sizes of all parts in flat order (layers, then blocks).
    pub fn part_sizes(&self) -> Vec<usize> {
        self.layer_sizes.iter().chain(&self.block_sizes).copied().collect()
    }

    pub fn flat_index(&self, e: usize) -> usize {
        self.assignment[e] as usize
    }

    pub fn part_of(&self, e: usize) -> Part {
        let idx = self.flat_index(e);
        if idx < self.layer_sizes.len() {
            Part::Layer(idx)
        } else {
            Part::Block(idx - self.layer_sizes.len())
        }
    }

    /// Elements carrying the given label, ascending.
    pub fn members(&self, part: Part) -> Vec<usize> {
        let target = match part {
            Part::Layer(i) => i,
            Part::Block(j) => self.layer_sizes.len() + j,
        } as u16;
        (0..self.n).filter(|&e| self.assignment[e] == target).collect()
    }

    /// Per-part intersection counts of `set`, flat order.
    pub fn counts(&self, set: &ElementSet) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; self.num_parts()];
        for &e in set.ids() {
            if e >= self.n {
                return Err(Error::ForeignElement { id: e, n: self.n });
            }
            counts[self.assignment[e] as usize] += 1;
        }
        Ok(counts)
    }

    pub fn profile_of(&self, set: &ElementSet, k: usize) -> Result<CountProfile> {
        if k == 0 {
            return Err(Error::Domain("normalizer k must be at least 1".into()));
        }
        let counts = self.counts(set)?;
        Ok(CountProfile::from_counts(&counts, self.num_layers(), k))
    }
}

/// Free-function form of [`BlockPartition::sample`].
pub fn sample_partition(layer_sizes: &[usize], block_sizes: &[usize], n: usize, seed: u64) -> Result<BlockPartition> {
    BlockPartition::sample(layer_sizes, block_sizes, n, seed)
}

/// Free-function form of [`BlockPartition::profile_of`].
pub fn profile_of(p: &BlockPartition, set: &ElementSet, k: usize) -> Result<CountProfile> {
    p.profile_of(set, k)
}

/// Normalized intersection counts: `x[i] = |S ∩ X_i| / k`, `y[j] = |S ∩ Y_j| / k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountProfile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CountProfile {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        CountProfile { x, y }
    }

    pub fn zeros(layers: usize, blocks: usize) -> Self {
        CountProfile { x: vec![0.0; layers], y: vec![0.0; blocks] }
    }

    pub fn from_counts(counts: &[usize], layers: usize, k: usize) -> Self {
        let kf = k as f64;
        CountProfile {
            x: counts[..layers].iter().map(|&c| c as f64 / kf).collect(),
            y: counts[layers..].iter().map(|&c| c as f64 / kf).collect(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.x.iter().sum::<f64>() + self.y.iter().sum::<f64>()
    }

    pub fn mean_y(&self) -> f64 {
        if self.y.is_empty() {
            0.0
        } else {
            self.y.iter().sum::<f64>() / self.y.len() as f64
        }
    }

    pub fn add(&self, other: &CountProfile) -> CountProfile {
        CountProfile {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
        }
    }
}

/// A set function reachable through the value oracle.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &ElementSet) -> f64;

    /// Value of the set encoded as a bitmask; only called for `n <= 64`.
    fn value_mask(&self, mask: u64) -> f64 {
        self.value(&ElementSet::from_mask(mask))
    }

    fn is_monotone(&self) -> bool {
        false
    }

    /// Count-level view when the function only depends on part counts.
    fn block_structure(&self) -> Option<&dyn BlockSymmetric> {
        None
    }

    /// Index into `block_structure().part_sizes()` of the part holding `e`.
    fn part_label(&self, _e: usize) -> Option<usize> {
        None
    }
}

/// A function of per-part counts only.
pub trait BlockSymmetric: Sync {
    /// Multiplicity of each part.
    fn part_sizes(&self) -> Vec<usize>;

    fn value_counts(&self, counts: &[usize]) -> f64;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub id: usize,
    pub queries: usize,
}

/// Adaptive-round accounting: one entry per submitted batch.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    batches: Vec<BatchRecord>,
}

impl RoundLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge one round holding `queries` independent queries.
    pub fn record(&mut self, queries: usize) -> Result<()> {
        if queries == 0 {
            return Err(Error::EmptyBatch);
        }
        let id = self.batches.len();
        self.batches.push(BatchRecord { id, queries });
        Ok(())
    }

    pub fn rounds_used(&self) -> usize {
        self.batches.len()
    }

    pub fn total_queries(&self) -> usize {
        self.batches.iter().map(|b| b.queries).sum()
    }

    pub fn batches(&self) -> &[BatchRecord] {
        &self.batches
    }

    /// Append rounds from runs that proceeded in lockstep: round `t` of the
    /// merged ledger carries the queries of round `t` of every run.
    pub fn absorb_lockstep(&mut self, runs: &[RoundLedger]) {
        let depth = runs.iter().map(|r| r.rounds_used()).max().unwrap_or(0);
        for t in 0..depth {
            let q: usize = runs.iter().filter_map(|r| r.batches.get(t)).map(|b| b.queries).sum();
            let id = self.batches.len();
            self.batches.push(BatchRecord { id, queries: q });
        }
    }
}

/// Evaluate a batch of independent queries as one adaptive round.
///
/// Values come back in input order; evaluation may run in parallel.
pub fn submit_batch(oracle: &dyn SetFunction, queries: &[ElementSet], ledger: &mut RoundLedger) -> Result<Vec<f64>> {
    if queries.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = oracle.ground_size();
    for q in queries {
        if let Some(&last) = q.ids().last() {
            if last >= n {
                return Err(Error::ForeignElement { id: last, n });
            }
        }
    }
    let values: Vec<f64> = queries.par_iter().map(|q| oracle.value(q)).collect();
    ledger.record(queries.len())?;
    Ok(values)
}

/// Mix a seed with a stream of words into a 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, words: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    words.iter().fold(mix(seed), |acc, &w| mix(acc ^ mix(w)))
}

/// Seed for randomness attached to a single query.
pub fn query_seed(seed: u64, query: &ElementSet) -> u64 {
    let words: Vec<u64> = query.ids().iter().map(|&e| e as u64).collect();
    derive_seed(seed, &words)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Card(usize);
    impl SetFunction for Card {
        fn ground_size(&self) -> usize {
            self.0
        }
        fn value(&self, set: &ElementSet) -> f64 {
            set.len() as f64
        }
    }

    #[test]
    fn forced_two_element_partition() {
        let p = sample_partition(&[1], &[1], 2, 9).unwrap();
        assert_eq!(p.members(Part::Layer(0)).len(), 1);
        assert_eq!(p.members(Part::Block(0)).len(), 1);
    }

    #[test]
    fn partition_errors() {
        assert_eq!(sample_partition(&[2], &[1], 4, 0).unwrap_err(), Error::SizeMismatch { declared: 4, actual: 3 });
        assert_eq!(sample_partition(&[2, 0], &[1], 3, 0).unwrap_err(), Error::ZeroSizePart(1));
    }

    #[test]
    fn profile_of_block_and_empty() {
        let p = sample_partition(&[3, 2], &[4], 9, 1).unwrap();
        let empty = p.profile_of(&ElementSet::empty(), 4).unwrap();
        assert_eq!(empty, CountProfile::zeros(2, 1));
        let y1 = ElementSet::new(p.members(Part::Block(0)));
        let prof = p.profile_of(&y1, 4).unwrap();
        assert_eq!(prof.y, vec![1.0]);
        assert_eq!(prof.x, vec![0.0, 0.0]);
        assert!(p.profile_of(&ElementSet::new(vec![9]), 1).is_err());
    }

    #[test]
    fn ledger_counts_batches() {
        let f = Card(10);
        let mut ledger = RoundLedger::new();
        let a = submit_batch(&f, &vec![ElementSet::empty(); 3], &mut ledger).unwrap();
        let b = submit_batch(&f, &vec![ElementSet::new(vec![1, 2]); 5], &mut ledger).unwrap();
        assert_eq!(ledger.rounds_used(), 2);
        assert_eq!(a.len() + b.len(), 8);
        assert_eq!(submit_batch(&f, &[], &mut ledger).unwrap_err(), Error::EmptyBatch);
        assert!(submit_batch(&f, &[ElementSet::new(vec![10])], &mut ledger).is_err());
        assert_eq!(ledger.rounds_used(), 2);
    }

    #[test]
    fn lockstep_merge_takes_longest_run() {
        let mut a = RoundLedger::new();
        let mut b = RoundLedger::new();
        a.record(2).unwrap();
        b.record(3).unwrap();
        b.record(1).unwrap();
        let mut merged = RoundLedger::new();
        merged.absorb_lockstep(&[a, b]);
        assert_eq!(merged.rounds_used(), 2);
        assert_eq!(merged.batches()[0].queries, 5);
    }
}
