// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! JSON instance descriptions, validation and construction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{check_alpha, LogRoundParams, PolyRoundParams, ALPHA_MAX};
use crate::instance::{LayeredOracle, Objective, SmallFunction};
use crate::oracle::{sample_partition, ElementSet, SetFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LogRound,
    PolyRound,
    OneMinusInvE,
    DirectedCut,
    CustomSmall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallKind {
    Modular,
    Cut,
    Coverage,
}

/// Construction parameters. Every field is optional; missing ones take
/// family defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Layer count of the log-round family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Number of blocks carrying the optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_prime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Layer count of the poly-round family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cardinality_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<SmallKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_sets: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item_weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict_coupling: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub warnings: Vec<String>,
}

/// A built instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Layered(LayeredOracle),
    Small(SmallFunction),
}

impl Instance {
    pub fn as_set_function(&self) -> &dyn SetFunction {
        match self {
            Instance::Layered(o) => o,
            Instance::Small(f) => f,
        }
    }

    pub fn layered(&self) -> Option<&LayeredOracle> {
        match self {
            Instance::Layered(o) => Some(o),
            Instance::Small(_) => None,
        }
    }

    /// Unconstrained optimum when it is known or cheap to compute.
    pub fn known_opt(&self) -> Option<f64> {
        match self {
            Instance::Layered(o) => Some(o.unconstrained_opt()),
            Instance::Small(f) if f.ground_size() <= 22 => Some(f.brute_force_opt()),
            Instance::Small(_) => None,
        }
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidSpec(format!("missing parameter {name}")))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

/// Floor each weighted share of `n`; leftovers go to the first layer (or
/// the first block when there are no layers), so blocks never outgrow `k`.
fn split_sizes(n: usize, layer_w: &[f64], block_w: &[f64], report: &mut ValidationReport) -> (Vec<usize>, Vec<usize>) {
    let total: f64 = layer_w.iter().chain(block_w).sum();
    let unit = n as f64 / total;
    let mut layers: Vec<usize> = layer_w.iter().map(|w| (w * unit).floor() as usize).collect();
    let mut blocks: Vec<usize> = block_w.iter().map(|w| (w * unit).floor() as usize).collect();
    let used: usize = layers.iter().chain(&blocks).sum();
    if used < n {
        let first = if layers.is_empty() { blocks.first_mut() } else { layers.first_mut() };
        if let Some(b) = first {
            *b += n - used;
        }
        report
            .warnings
            .push(format!("rounded part sizes down; {} leftover elements moved into the first part", n - used));
    }
    (layers, blocks)
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Check parameter ranges; couplings of the large-n construction are
    /// reported as warnings unless `strict_coupling` is set.
    pub fn validate(&self) -> Result<ValidationReport> {
        let p = &self.params;
        let mut report = ValidationReport::default();
        if let Some(a) = p.alpha {
            check_alpha(a).map_err(|_| Error::InvalidSpec("α out of range (0, 1/24]".into()))?;
        }
        if let Some(e) = p.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidSpec("ε out of range (0, 1)".into()));
            }
        }
        if let Some(d) = p.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidSpec("δ out of range (0, 1]".into()));
            }
        }
        if p.ell_prime == Some(0) {
            return Err(Error::InvalidSpec("ℓ' must be at least 1".into()));
        }
        if p.k == Some(0) {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        if matches!(self.family, Family::LogRound | Family::PolyRound | Family::OneMinusInvE) {
            let eps = need(p.epsilon, "epsilon")?;
            let lp = need(p.ell_prime, "ell_prime")?;
            need(p.k, "k")?;
            if (lp as f64) < 2.0 / (eps * eps) {
                report.warnings.push(format!(
                    "ℓ' = {lp} is below 2/ε² = {:.1}; the 1-1/e block lemma does not apply",
                    2.0 / (eps * eps)
                ));
            }
        }
        match self.family {
            Family::LogRound => {
                let ell = need(p.ell, "ell")?;
                if ell == 0 {
                    return Err(Error::InvalidSpec("ℓ must be at least 1".into()));
                }
                self.log_coupling(ell, &mut report)?;
            }
            Family::PolyRound => {
                let r = need(p.r, "r")?;
                if r == 0 {
                    return Err(Error::InvalidSpec("r must be at least 1".into()));
                }
                need(p.delta, "delta")?;
            }
            Family::DirectedCut => {
                need(p.delta, "delta")?;
                if let Some(s) = &p.layer_sizes {
                    if s.len() != 2 {
                        return Err(Error::InvalidSpec("directed cut needs exactly two layers".into()));
                    }
                }
            }
            Family::OneMinusInvE => {}
            Family::CustomSmall => {
                let n = self.small_n()?;
                if n == 0 || n > 22 {
                    return Err(Error::InvalidSpec("custom_small needs 1 <= n <= 22".into()));
                }
            }
        }
        Ok(report)
    }

    fn log_coupling(&self, ell: usize, report: &mut ValidationReport) -> Result<()> {
        let p = &self.params;
        let n_strict = 2f64.powi(3 * ell as i32);
        let lp_strict = 2f64.powf(ell as f64 / 8.0).round().max(1.0) as usize;
        let eps_strict = 2.0 * n_strict.powf(-1.0 / 24.0);
        let mut issues = Vec::new();
        if p.ell_prime != Some(lp_strict) {
            issues.push(format!("ℓ' should be 2^(ℓ/8) = {lp_strict}"));
        }
        if !p.epsilon.is_some_and(|e| close(e, eps_strict)) {
            issues.push(format!("ε should be 2 n^(-1/24) = {eps_strict:.6}"));
        }
        if let Some(n) = p.n {
            if n as f64 != n_strict {
                issues.push(format!("n should be 2^(3ℓ) = {n_strict}"));
            }
        }
        if let Some(ls) = &p.layer_sizes {
            let want: Vec<usize> = (1..=ell).map(|i| 1usize << (3 * ell - i)).collect();
            if *ls != want {
                issues.push("layer sizes should be 2^(3ℓ-i)".into());
            }
        }
        if self.strict_coupling {
            if !issues.is_empty() {
                return Err(Error::InvalidSpec(format!("strict coupling violated: {}", issues.join("; "))));
            }
            if 3 * ell > 24 {
                return Err(Error::InvalidSpec("strict instance too large to materialize".into()));
            }
        } else {
            report.warnings.extend(issues.into_iter().map(|s| format!("coupling relaxed: {s}")));
        }
        Ok(())
    }

    fn small_n(&self) -> Result<usize> {
        let p = &self.params;
        if let Some(w) = &p.weights {
            return Ok(w.len());
        }
        if let Some(c) = &p.cover_sets {
            return Ok(c.len());
        }
        need(p.n, "n")
    }

    fn layer_block_sizes(&self, report: &mut ValidationReport) -> Result<(Vec<usize>, Vec<usize>)> {
        let p = &self.params;
        if let (Some(l), Some(b)) = (&p.layer_sizes, &p.block_sizes) {
            return Ok((l.clone(), b.clone()));
        }
        let lp = p.ell_prime.unwrap_or(1);
        let k = p.k.unwrap_or(1);
        let (layer_w, block_w): (Vec<f64>, Vec<f64>) = match self.family {
            Family::LogRound => {
                let ell = need(p.ell, "ell")?;
                if self.strict_coupling {
                    let layers: Vec<usize> = (1..=ell).map(|i| 1usize << (3 * ell - i)).collect();
                    let rest = 1usize << (2 * ell);
                    let mut blocks = vec![rest / lp; lp];
                    blocks[0] += rest - blocks.iter().sum::<usize>();
                    return Ok((layers, blocks));
                }
                ((1..=ell).map(|i| lp as f64 * 2f64.powi((ell - i) as i32)).collect(), vec![1.0; lp])
            }
            Family::PolyRound => {
                let r = need(p.r, "r")?;
                let d = need(p.delta, "delta")?;
                ((1..=r).map(|i| lp as f64 * (1.0 + d).powi((r - i) as i32)).collect(), vec![1.0; lp])
            }
            Family::OneMinusInvE => (Vec::new(), vec![1.0; lp]),
            Family::DirectedCut => return Ok((p.layer_sizes.clone().unwrap_or_else(|| vec![4, 4]), Vec::new())),
            Family::CustomSmall => return Err(Error::InvalidSpec("custom_small has no partition".into())),
        };
        let n = match p.n {
            Some(n) => n,
            None => {
                let total: f64 = layer_w.iter().chain(&block_w).sum();
                (total * k as f64).round() as usize
            }
        };
        Ok(split_sizes(n, &layer_w, &block_w, report))
    }

    /// Validate and construct the oracle.
    pub fn build(&self) -> Result<(Instance, ValidationReport)> {
        let mut report = self.validate()?;
        let p = &self.params;
        if self.family == Family::CustomSmall {
            return Ok((Instance::Small(self.build_small()?), report));
        }
        let (layers, blocks) = self.layer_block_sizes(&mut report)?;
        let n = layers.iter().sum::<usize>() + blocks.iter().sum::<usize>();
        let objective = match self.family {
            Family::LogRound => Objective::LogRound(LogRoundParams {
                layers: layers.len(),
                blocks: blocks.len(),
                epsilon: need(p.epsilon, "epsilon")?,
                k: need(p.k, "k")?,
            }),
            Family::PolyRound => {
                if p.r.is_some_and(|r| r != layers.len()) {
                    return Err(Error::InvalidSpec("r disagrees with layer_sizes".into()));
                }
                Objective::PolyRound(PolyRoundParams {
                    r: layers.len(),
                    blocks: blocks.len(),
                    delta: need(p.delta, "delta")?,
                    alpha: p.alpha.unwrap_or(ALPHA_MAX),
                    epsilon: need(p.epsilon, "epsilon")?,
                    k: need(p.k, "k")?,
                })
            }
            Family::OneMinusInvE => Objective::OneMinusInvE {
                epsilon: need(p.epsilon, "epsilon")?,
                blocks: blocks.len(),
                k: need(p.k, "k")?,
            },
            Family::DirectedCut => {
                Objective::DirectedCut { delta: need(p.delta, "delta")?, opt_scale: p.opt_scale.unwrap_or(1.0) }
            }
            Family::CustomSmall => unreachable!(),
        };
        if let Some(lp) = p.ell_prime {
            if self.family != Family::DirectedCut && lp != blocks.len() {
                return Err(Error::InvalidSpec("ell_prime disagrees with block_sizes".into()));
            }
        }
        let partition = sample_partition(&layers, &blocks, n, self.seed)?;
        Ok((Instance::Layered(LayeredOracle::new(partition, objective)?), report))
    }

    fn build_small(&self) -> Result<SmallFunction> {
        let p = &self.params;
        let n = self.small_n()?;
        let kind = p.kind.unwrap_or(SmallKind::Cut);
        let f = match kind {
            SmallKind::Modular => match &p.weights {
                Some(w) => SmallFunction::Modular { weights: w.clone() },
                None => SmallFunction::random_modular(n, self.seed),
            },
            SmallKind::Cut => match &p.edges {
                Some(e) => {
                    if e.iter().any(|&(u, v, _)| u >= n || v >= n) {
                        return Err(Error::InvalidSpec("edge endpoint outside ground set".into()));
                    }
                    SmallFunction::Cut { n, edges: e.clone() }
                }
                None => SmallFunction::random_cut(n, 0.3, self.seed),
            },
            SmallKind::Coverage => match &p.cover_sets {
                Some(c) => {
                    let items = c.iter().flatten().max().map_or(0, |m| m + 1);
                    if items > 64 {
                        return Err(Error::InvalidSpec("coverage supports at most 64 items".into()));
                    }
                    let covers = c.iter().map(|s| s.iter().fold(0u64, |m, &i| m | 1 << i)).collect();
                    let item_weights = match &p.item_weights {
                        Some(w) if w.len() >= items => w.clone(),
                        Some(_) => return Err(Error::InvalidSpec("item_weights too short".into())),
                        None => vec![1.0; items],
                    };
                    SmallFunction::Coverage { covers, item_weights }
                }
                None => SmallFunction::random_coverage(n, 2 * n, 0.25, self.seed),
            },
        };
        Ok(f)
    }
}

/// Desk-scale log-round layout: halving layers of sizes `base·2^{L-i}` plus
/// `blocks` equal blocks sharing `base` elements.
pub fn halving_layout(layers: usize, blocks: usize, base: usize) -> (Vec<usize>, Vec<usize>) {
    let ls = (1..=layers).map(|i| base << (layers - i)).collect();
    let mut bs = vec![base / blocks; blocks];
    bs[0] += base - bs.iter().sum::<usize>();
    (ls, bs)
}

/// Random sub-multiset of part counts, used by property suites.
pub fn random_counts(sizes: &[usize], cap: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    sizes.iter().map(|&s| rng.gen_range(0..=s.min(cap))).collect()
}

/// Materialize a set with the given per-part counts (lowest ids first).
pub fn set_with_counts(o: &LayeredOracle, counts: &[usize]) -> ElementSet {
    let mut left = counts.to_vec();
    let mut ids = Vec::with_capacity(counts.iter().sum());
    for e in 0..o.ground_size() {
        let part = o.partition().flat_index(e);
        if left[part] > 0 {
            left[part] -= 1;
            ids.push(e);
        }
    }
    ElementSet::new(ids)
}

/// Deterministic RNG for a seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_range_is_rejected() {
        let spec = InstanceSpec::from_json(
            r#"{"family":"poly_round","params":{"epsilon":0.01,"delta":0.4,"alpha":0.2,"r":4,"ell_prime":2,"k":10},"seed":1,"strict_coupling":false}"#,
        )
        .unwrap();
        assert_eq!(spec.validate().unwrap_err().to_string(), "invalid instance: α out of range (0, 1/24]");
    }

    #[test]
    fn relaxed_coupling_warns() {
        let spec = InstanceSpec {
            family: Family::LogRound,
            params: Params { epsilon: Some(0.1), ell: Some(3), ell_prime: Some(2), k: Some(4), ..Default::default() },
            seed: 3,
            strict_coupling: false,
        };
        let (inst, report) = spec.build().unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("2/ε²")));
        let o = inst.layered().unwrap();
        assert_eq!(o.partition().layer_sizes(), &[32, 16, 8]);
        assert_eq!(o.partition().block_sizes(), &[4, 4]);
    }

    #[test]
    fn strict_coupling_rejects_loose_params() {
        let spec = InstanceSpec {
            family: Family::LogRound,
            params: Params { epsilon: Some(0.1), ell: Some(3), ell_prime: Some(2), k: Some(4), ..Default::default() },
            seed: 3,
            strict_coupling: true,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(InstanceSpec::from_json(r#"{"family":"log_round","params":{"eps":0.1}}"#).is_err());
    }
}
