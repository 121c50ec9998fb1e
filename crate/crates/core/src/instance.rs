// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Concrete value oracles: hidden-partition instances and small explicit
//! set functions used as test beds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{self, LogRoundParams, PolyRoundParams};
use crate::oracle::{BlockPartition, BlockSymmetric, CountProfile, ElementSet, SetFunction};

/// Objective evaluated on the counts of a hidden partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    LogRound(LogRoundParams),
    PolyRound(PolyRoundParams),
    /// `g(y)` alone on `blocks` parts normalized by `k`.
    OneMinusInvE {
        epsilon: f64,
        blocks: usize,
        k: usize,
    },
    /// `δ x₁(1 - x₂) opt_scale` on two layers normalized by their sizes.
    DirectedCut {
        delta: f64,
        opt_scale: f64,
    },
}

impl Objective {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Objective::LogRound(p) => Some(p.epsilon),
            Objective::PolyRound(p) => Some(p.epsilon),
            Objective::OneMinusInvE { epsilon, .. } => Some(*epsilon),
            Objective::DirectedCut { .. } => None,
        }
    }

    pub fn normalizer(&self) -> Option<usize> {
        match self {
            Objective::LogRound(p) => Some(p.k),
            Objective::PolyRound(p) => Some(p.k),
            Objective::OneMinusInvE { k, .. } => Some(*k),
            Objective::DirectedCut { .. } => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        !matches!(self, Objective::DirectedCut { .. })
    }
}

/// Sizes an algorithm may know: the construction is public, the labels are not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicLayout {
    pub layer_sizes: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub k: usize,
    pub objective: Objective,
}

impl PublicLayout {
    pub fn n(&self) -> usize {
        self.layer_sizes.iter().sum::<usize>() + self.block_sizes.iter().sum::<usize>()
    }
}

/// An instance whose value depends only on how a query meets the hidden parts.
#[derive(Clone, Debug)]
pub struct LayeredOracle {
    partition: BlockPartition,
    objective: Objective,
    sizes: Vec<usize>,
}

impl LayeredOracle {
    pub fn new(partition: BlockPartition, objective: Objective) -> Result<Self> {
        let layers = partition.num_layers();
        let blocks = partition.block_sizes().len();
        let ok = match &objective {
            Objective::LogRound(p) => p.layers == layers && p.blocks == blocks,
            Objective::PolyRound(p) => p.r == layers && p.blocks == blocks,
            Objective::OneMinusInvE { blocks: b, .. } => layers == 0 && *b == blocks,
            Objective::DirectedCut { .. } => layers == 2 && blocks == 0,
        };
        if !ok {
            return Err(Error::InvalidSpec("partition shape does not fit the objective".into()));
        }
        if let Some(k) = objective.normalizer() {
            if partition.block_sizes().iter().any(|&b| b > k) {
                return Err(Error::InvalidSpec("block size exceeds the normalizer k".into()));
            }
        }
        let sizes = partition.part_sizes();
        Ok(LayeredOracle { partition, objective, sizes })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn public_layout(&self) -> PublicLayout {
        PublicLayout {
            layer_sizes: self.partition.layer_sizes().to_vec(),
            block_sizes: self.partition.block_sizes().to_vec(),
            k: self.objective.normalizer().unwrap_or(1),
            objective: self.objective.clone(),
        }
    }

    /// Profile-query fast path: evaluate a normalized profile directly,
    /// without touching the hidden partition or the round ledger.
    pub fn value_profile(&self, c: &CountProfile) -> Result<f64> {
        match &self.objective {
            Objective::LogRound(p) => functions::f_log_round(c, p),
            Objective::PolyRound(p) => functions::f_poly_round(c, p),
            Objective::OneMinusInvE { epsilon, blocks, .. } => functions::g_hard(&c.y, *epsilon, *blocks),
            Objective::DirectedCut { delta, opt_scale } => {
                if c.x.len() != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, actual: c.x.len() });
                }
                functions::f_directed_cut(c.x[0], c.x[1], *delta, *opt_scale)
            }
        }
    }

    /// Largest unconstrained value.
    pub fn unconstrained_opt(&self) -> f64 {
        match &self.objective {
            Objective::DirectedCut { delta, opt_scale } => delta * opt_scale,
            _ => self.value_counts(&self.sizes),
        }
    }
}

impl BlockSymmetric for LayeredOracle {
    fn part_sizes(&self) -> Vec<usize> {
        self.sizes.clone()
    }

    fn value_counts(&self, counts: &[usize]) -> f64 {
        match &self.objective {
            Objective::LogRound(p) => {
                let kf = p.k as f64;
                let x: Vec<f64> = counts[..p.layers].iter().map(|&c| c as f64 / kf).collect();
                let y: Vec<f64> = counts[p.layers..].iter().map(|&c| c as f64 / kf).collect();
                functions::log_round_unchecked(&x, &y, p.epsilon)
            }
            Objective::PolyRound(p) => {
                let kf = p.k as f64;
                let x: Vec<f64> = counts[..p.r].iter().map(|&c| c as f64 / kf).collect();
                let y: Vec<f64> = counts[p.r..].iter().map(|&c| c as f64 / kf).collect();
                functions::poly_round_unchecked(&x, &y, p)
            }
            Objective::OneMinusInvE { epsilon, k, .. } => {
                let y: Vec<f64> = counts.iter().map(|&c| c as f64 / *k as f64).collect();
                let s: f64 = y.iter().map(|&v| functions::ln_one_minus_gamma(v, *epsilon)).sum();
                (-s.exp_m1()).min(1.0 - epsilon)
            }
            Objective::DirectedCut { delta, opt_scale } => {
                let x1 = counts[0] as f64 / self.sizes[0] as f64;
                let x2 = counts[1] as f64 / self.sizes[1] as f64;
                delta * x1 * (1.0 - x2) * opt_scale
            }
        }
    }
}

impl SetFunction for LayeredOracle {
    fn ground_size(&self) -> usize {
        self.partition.n()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let mut counts = vec![0usize; self.sizes.len()];
        for &e in set.ids() {
            counts[self.partition.flat_index(e)] += 1;
        }
        self.value_counts(&counts)
    }

    fn is_monotone(&self) -> bool {
        self.objective.is_monotone()
    }

    fn block_structure(&self) -> Option<&dyn BlockSymmetric> {
        Some(self)
    }

    fn part_label(&self, e: usize) -> Option<usize> {
        (e < self.partition.n()).then(|| self.partition.flat_index(e))
    }
}

/// Small explicit set functions on at most 64 elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SmallFunction {
    /// `Σ_{e ∈ S} w_e`.
    Modular { weights: Vec<f64> },
    /// Total weight of directed edges leaving `S`.
    Cut { n: usize, edges: Vec<(usize, usize, f64)> },
    /// Weighted number of items covered; `covers[e]` is a bitmask of items.
    Coverage { covers: Vec<u64>, item_weights: Vec<f64> },
}

impl SmallFunction {
    pub fn random_cut(n: usize, edge_prob: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen::<f64>() < edge_prob {
                    edges.push((u, v, rng.gen_range(0.1..1.0)));
                }
            }
        }
        SmallFunction::Cut { n, edges }
    }

    pub fn random_coverage(n: usize, items: usize, cover_prob: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = items.min(64);
        let covers = (0..n)
            .map(|_| (0..items).filter(|_| rng.gen::<f64>() < cover_prob).fold(0u64, |m, i| m | 1 << i))
            .collect();
        let item_weights = (0..items).map(|_| rng.gen_range(0.1..1.0)).collect();
        SmallFunction::Coverage { covers, item_weights }
    }

    pub fn random_modular(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SmallFunction::Modular { weights: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect() }
    }

    /// Exhaustive maximum over all subsets.
    pub fn brute_force_opt(&self) -> f64 {
        let n = self.ground_size();
        (0u64..1 << n).map(|m| self.value_mask(m)).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SetFunction for SmallFunction {
    fn ground_size(&self) -> usize {
        match self {
            SmallFunction::Modular { weights } => weights.len(),
            SmallFunction::Cut { n, .. } => *n,
            SmallFunction::Coverage { covers, .. } => covers.len(),
        }
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.value_mask(set.mask())
    }

    fn value_mask(&self, mask: u64) -> f64 {
        match self {
            SmallFunction::Modular { weights } => {
                weights.iter().enumerate().filter(|(e, _)| mask >> e & 1 == 1).map(|(_, w)| w).sum()
            }
            SmallFunction::Cut { edges, .. } => {
                edges.iter().filter(|(u, v, _)| mask >> u & 1 == 1 && mask >> v & 1 == 0).map(|(_, _, w)| w).sum()
            }
            SmallFunction::Coverage { covers, item_weights } => {
                let covered =
                    covers.iter().enumerate().filter(|(e, _)| mask >> e & 1 == 1).fold(0u64, |m, (_, c)| m | c);
                item_weights.iter().enumerate().filter(|(i, _)| covered >> i & 1 == 1).map(|(_, w)| w).sum()
            }
        }
    }

    fn is_monotone(&self) -> bool {
        match self {
            SmallFunction::Modular { weights } => weights.iter().all(|&w| w >= 0.0),
            SmallFunction::Cut { .. } => false,
            SmallFunction::Coverage { .. } => true,
        }
    }
}
