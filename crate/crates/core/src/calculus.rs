// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Multilinear extension `F(z) = E[f(R_z)]` and its gradient.
//!
//! Three estimators share the [`Extension`] interface:
//! * [`TableExtension`] enumerates all subsets of a small ground set;
//! * [`BlockExtension`] works in block coordinates of a count-only function
//!   and enumerates per-block binomial counts;
//! * [`MonteCarloExtension`] samples, with common random numbers across the
//!   two sides of every gradient difference.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{derive_seed, BlockSymmetric, ElementSet, SetFunction};

/// Most joint count combinations exact modes will enumerate.
pub const ENUM_BUDGET: u128 = 1_000_000;
/// Largest dense ground set for subset enumeration.
pub const ENUM_MAX_N: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ExactEnum,
    BlockExact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: Mode,
    pub samples: usize,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { mode: Mode::MonteCarlo, samples: 10_000, seed: 0 }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        EstimatorConfig { mode: Mode::ExactEnum, samples: 10_000, seed: 0 }
    }

    pub fn block_exact() -> Self {
        EstimatorConfig { mode: Mode::BlockExact, samples: 10_000, seed: 0 }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        EstimatorConfig { mode: Mode::MonteCarlo, samples, seed }
    }
}

/// A point of `[0, 1]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalPoint {
    coords: Vec<f64>,
}

impl FractionalPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Domain("coordinate outside [0, 1]".into()));
        }
        Ok(FractionalPoint { coords })
    }

    pub fn constant(n: usize, v: f64) -> Result<Self> {
        Self::new(vec![v; n])
    }

    pub fn indicator(n: usize, set: &ElementSet) -> Self {
        let mut coords = vec![0.0; n];
        for &e in set.ids() {
            coords[e] = 1.0;
        }
        FractionalPoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Block-constant point: one value per block with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPoint {
    pub values: Vec<f64>,
    pub sizes: Vec<usize>,
}

impl BlockPoint {
    /// Dense form, given the block label of every element.
    pub fn expand(&self, labels: &[usize]) -> Result<FractionalPoint> {
        FractionalPoint::new(labels.iter().map(|&b| self.values[b]).collect())
    }
}

/// Coordinate-wise clamp of `target` into `[lo, hi]`.
pub fn box_project(target: &FractionalPoint, lo: &FractionalPoint, hi: &FractionalPoint) -> Result<FractionalPoint> {
    if target.dim() != lo.dim() || lo.dim() != hi.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), actual: lo.dim().min(hi.dim()) });
    }
    if lo.coords.iter().zip(&hi.coords).any(|(l, h)| l > h) {
        return Err(Error::Domain("box lower corner exceeds upper corner".into()));
    }
    let coords =
        target.coords.iter().zip(lo.coords.iter().zip(&hi.coords)).map(|(t, (l, h))| t.clamp(*l, *h)).collect();
    Ok(FractionalPoint { coords })
}

/// Continuous access to a set function.
pub trait Extension: Sync {
    fn dim(&self) -> usize;

    /// Number of ground elements behind each coordinate.
    fn weights(&self) -> &[f64];

    fn value(&self, z: &[f64]) -> f64;

    /// Per-element partial derivatives.
    fn gradient(&self, z: &[f64]) -> Vec<f64>;

    /// True when values and gradients carry no sampling noise.
    fn is_exact(&self) -> bool;
}

// ------------------------------------------------------------ subset enumeration

/// Exact extension of a set function on at most [`ENUM_MAX_N`] elements.
pub struct TableExtension {
    n: usize,
    table: Vec<f64>,
    weights: Vec<f64>,
}

impl TableExtension {
    pub fn new(f: &dyn SetFunction) -> Result<Self> {
        let n = f.ground_size();
        if n > ENUM_MAX_N {
            return Err(Error::BudgetExceeded { needed: 1u128 << n.min(127), budget: 1u128 << ENUM_MAX_N });
        }
        let table: Vec<f64> = (0u64..1 << n).into_par_iter().map(|m| f.value_mask(m)).collect();
        Ok(TableExtension { n, table, weights: vec![1.0; n] })
    }

    fn fold(&self, z: &[f64]) -> f64 {
        let mut t = self.table.clone();
        let mut len = t.len();
        for i in (0..self.n).rev() {
            let half = len / 2;
            let (p, q) = (1.0 - z[i], z[i]);
            for s in 0..half {
                t[s] = p * t[s] + q * t[s + half];
            }
            len = half;
        }
        t[0]
    }
}

impl Extension for TableExtension {
    fn dim(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.fold(z)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut hi = z.to_vec();
                hi[i] = 1.0;
                let mut lo = z.to_vec();
                lo[i] = 0.0;
                self.fold(&hi) - self.fold(&lo)
            })
            .collect()
    }

    fn is_exact(&self) -> bool {
        true
    }
}

// ------------------------------------------------------------ block coordinates

/// `Binomial(n, p)` probabilities for counts `0..=n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if p <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        out[n] = 1.0;
        return out;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    for (c, slot) in out.iter_mut().enumerate() {
        if c > 0 {
            ln_choose += ((n - c + 1) as f64).ln() - (c as f64).ln();
        }
        *slot = (ln_choose + c as f64 * lp + (n - c) as f64 * lq).exp();
    }
    out
}

/// Exact extension in block coordinates of a count-only function.
///
/// Coordinate `b` is the common inclusion probability of every element of
/// part `b`; gradients are per element of that part.
pub struct BlockExtension {
    sizes: Vec<usize>,
    weights: Vec<f64>,
    table: Vec<f64>,
}

/// Product of `(size + 1)` over parts, saturating.
pub fn joint_combinations(sizes: &[usize]) -> u128 {
    sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128 + 1))
}

impl BlockExtension {
    pub fn new(f: &dyn BlockSymmetric) -> Result<Self> {
        let sizes = f.part_sizes();
        let needed = joint_combinations(&sizes);
        if needed > ENUM_BUDGET {
            return Err(Error::BudgetExceeded { needed, budget: ENUM_BUDGET });
        }
        let len = needed as usize;
        let dims: Vec<usize> = sizes.iter().map(|s| s + 1).collect();
        let table: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|mut idx| {
                let mut counts = vec![0usize; dims.len()];
                for (c, d) in counts.iter_mut().zip(&dims) {
                    *c = idx % d;
                    idx /= d;
                }
                f.value_counts(&counts)
            })
            .collect();
        let weights = sizes.iter().map(|&s| s as f64).collect();
        Ok(BlockExtension { sizes, weights, table })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Contract the table against one probability vector per part
    /// (first part varies fastest; the last part is folded first).
    fn contract(&self, mut t: Vec<f64>, pmfs: &[Vec<f64>]) -> f64 {
        let mut len = t.len();
        for b in (0..self.sizes.len()).rev() {
            let d = self.sizes[b] + 1;
            let stride = len / d;
            let pmf = &pmfs[b];
            let mut next = vec![0.0; stride];
            for (c, &w) in pmf.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let base = c * stride;
                for (j, v) in next.iter_mut().enumerate() {
                    *v += w * t[base + j];
                }
            }
            t = next;
            len = stride;
        }
        t[0]
    }
}

impl Extension for BlockExtension {
    fn dim(&self) -> usize {
        self.sizes.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn value(&self, z: &[f64]) -> f64 {
        let pmfs: Vec<Vec<f64>> = self.sizes.iter().zip(z).map(|(&s, &p)| binomial_pmf(s, p)).collect();
        self.contract(self.table.clone(), &pmfs)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let base: Vec<Vec<f64>> = self.sizes.iter().zip(z).map(|(&s, &p)| binomial_pmf(s, p)).collect();
        (0..self.sizes.len())
            .map(|b| {
                // the element itself is fixed; the rest of its part is Binomial(n_b - 1, p_b)
                let mut pmfs = base.clone();
                let mut pmf = binomial_pmf(self.sizes[b] - 1, z[b]);
                pmf.push(0.0);
                pmfs[b] = pmf;
                let stride: usize = self.sizes[..b].iter().map(|s| s + 1).product();
                let d = self.sizes[b] + 1;
                let diff: Vec<f64> = (0..self.table.len())
                    .map(|idx| {
                        let c = (idx / stride) % d;
                        if c + 1 < d {
                            self.table[idx + stride] - self.table[idx]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                self.contract(diff, &pmfs)
            })
            .collect()
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// Reduce a count-only oracle to its block coordinates.
pub fn block_symmetric_reduce(f: &dyn SetFunction) -> Result<BlockExtension> {
    let bs = f.block_structure().ok_or(Error::NotBlockSymmetric)?;
    BlockExtension::new(bs)
}

// ------------------------------------------------------------ sampling

/// Sampled extension over the dense ground set.
pub struct MonteCarloExtension<'a> {
    f: &'a dyn SetFunction,
    samples: usize,
    seed: u64,
    weights: Vec<f64>,
}

fn point_hash(z: &[f64]) -> u64 {
    let words: Vec<u64> = z.iter().map(|v| v.to_bits()).collect();
    derive_seed(0x6d75_6c74, &words)
}

impl<'a> MonteCarloExtension<'a> {
    pub fn new(f: &'a dyn SetFunction, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Domain("monte carlo needs at least one sample".into()));
        }
        Ok(MonteCarloExtension { f, samples, seed, weights: vec![1.0; f.ground_size()] })
    }

    fn sample_set(&self, z: &[f64], j: usize) -> ElementSet {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[point_hash(z), j as u64]));
        ElementSet::new((0..z.len()).filter(|&e| rng.gen::<f64>() < z[e]).collect())
    }

    /// Mean and standard error of `f(R_z)` over the configured samples.
    pub fn estimate(&self, z: &[f64]) -> Estimate {
        let vals: Vec<f64> = (0..self.samples).into_par_iter().map(|j| self.f.value(&self.sample_set(z, j))).collect();
        Estimate::from_samples(&vals)
    }
}

impl Extension for MonteCarloExtension<'_> {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.estimate(z).mean
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let sums = (0..self.samples)
            .into_par_iter()
            .map(|j| {
                let r = self.sample_set(z, j);
                (0..n).map(|i| self.f.value(&r.with(i)) - self.f.value(&r.without(i))).collect::<Vec<f64>>()
            })
            .reduce(|| vec![0.0; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        sums.into_iter().map(|s| s / self.samples as f64).collect()
    }

    fn is_exact(&self) -> bool {
        false
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(v: f64) -> Self {
        Estimate { mean: v, std_error: 0.0 }
    }

    pub fn from_samples(vals: &[f64]) -> Self {
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        if vals.len() < 2 {
            return Estimate { mean, std_error: 0.0 };
        }
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Estimate { mean, std_error: (var / m).sqrt() }
    }
}

/// Build the estimator `cfg` asks for.
///
/// `BlockExact` works in block coordinates; the other modes are dense.
pub fn extension_for<'a>(f: &'a dyn SetFunction, cfg: &EstimatorConfig) -> Result<Box<dyn Extension + 'a>> {
    Ok(match cfg.mode {
        Mode::ExactEnum => Box::new(TableExtension::new(f)?),
        Mode::BlockExact => Box::new(block_symmetric_reduce(f)?),
        Mode::MonteCarlo => Box::new(MonteCarloExtension::new(f, cfg.samples, cfg.seed)?),
    })
}

/// Block value shared by every element of each part, if `z` is block-constant.
fn compress(f: &dyn SetFunction, z: &FractionalPoint) -> Result<Vec<f64>> {
    let bs = f.block_structure().ok_or(Error::NotBlockSymmetric)?;
    let parts = bs.part_sizes().len();
    let labels = block_labels(f)?;
    let mut vals: Vec<Option<f64>> = vec![None; parts];
    for (e, &b) in labels.iter().enumerate() {
        match vals[b] {
            None => vals[b] = Some(z.coords[e]),
            Some(v) if v != z.coords[e] => return Err(Error::Domain("point is not block-constant".into())),
            _ => {}
        }
    }
    Ok(vals.into_iter().map(|v| v.unwrap_or(0.0)).collect())
}

/// Part label of every element of a count-only function.
pub fn block_labels(f: &dyn SetFunction) -> Result<Vec<usize>> {
    (0..f.ground_size()).map(|e| f.part_label(e).ok_or(Error::NotBlockSymmetric)).collect()
}

/// `F(z)`, exact or sampled per `cfg`.
pub fn multilinear_value(f: &dyn SetFunction, z: &FractionalPoint, cfg: &EstimatorConfig) -> Result<Estimate> {
    if z.dim() != f.ground_size() {
        return Err(Error::DimensionMismatch { expected: f.ground_size(), actual: z.dim() });
    }
    match cfg.mode {
        Mode::ExactEnum => Ok(Estimate::exact(TableExtension::new(f)?.value(z.coords()))),
        Mode::BlockExact => {
            let zb = compress(f, z)?;
            Ok(Estimate::exact(block_symmetric_reduce(f)?.value(&zb)))
        }
        Mode::MonteCarlo => Ok(MonteCarloExtension::new(f, cfg.samples, cfg.seed)?.estimate(z.coords())),
    }
}

/// `∂F/∂z_i = F(z | z_i = 1) - F(z | z_i = 0)`.
pub fn gradient(f: &dyn SetFunction, z: &FractionalPoint, i: usize, cfg: &EstimatorConfig) -> Result<f64> {
    let n = f.ground_size();
    if z.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: z.dim() });
    }
    if i >= n {
        return Err(Error::ForeignElement { id: i, n });
    }
    match cfg.mode {
        Mode::ExactEnum => {
            let ext = TableExtension::new(f)?;
            let (mut hi, mut lo) = (z.coords.clone(), z.coords.clone());
            hi[i] = 1.0;
            lo[i] = 0.0;
            Ok(ext.value(&hi) - ext.value(&lo))
        }
        Mode::BlockExact => {
            let zb = compress(f, z)?;
            let b = f.part_label(i).ok_or(Error::NotBlockSymmetric)?;
            Ok(block_symmetric_reduce(f)?.gradient(&zb)[b])
        }
        Mode::MonteCarlo => {
            let ext = MonteCarloExtension::new(f, cfg.samples, cfg.seed)?;
            let vals: Vec<f64> = (0..cfg.samples)
                .into_par_iter()
                .map(|j| {
                    let r = ext.sample_set(z.coords(), j);
                    f.value(&r.with(i)) - f.value(&r.without(i))
                })
                .collect();
            Ok(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one() {
        for (n, p) in [(0, 0.3), (5, 0.0), (5, 1.0), (40, 0.37), (2000, 0.5)] {
            let s: f64 = binomial_pmf(n, p).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n} p={p} sum={s}");
        }
    }

    #[test]
    fn box_projection_clamps() {
        let t = FractionalPoint::new(vec![0.2, 0.9]).unwrap();
        let lo = FractionalPoint::new(vec![0.3, 0.0]).unwrap();
        let hi = FractionalPoint::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(box_project(&t, &lo, &hi).unwrap().coords(), &[0.3, 0.5]);
        assert!(box_project(&t, &hi, &lo).is_err());
    }
}
