// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by oracles, instance construction, estimators and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("partition sizes sum to {actual}, expected {declared}")]
    SizeMismatch { declared: usize, actual: usize },
    #[error("part {0} has zero size")]
    ZeroSizePart(usize),
    #[error("element {id} outside ground set of size {n}")]
    ForeignElement { id: usize, n: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid instance: {0}")]
    InvalidSpec(String),
    #[error("oracle is not block-symmetric")]
    NotBlockSymmetric,
    #[error("exact evaluation needs {needed} combinations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("non-finite value from estimator")]
    NonFinite,
    #[error("opt estimate must be positive, got {0}")]
    NonPositiveOpt(f64),
    #[error("random-set estimate stayed at zero after escalation")]
    ZeroEstimate,
    #[error("layer classification ambiguous in round {round}")]
    Ambiguous { round: usize },
    #[error("diagnostics need exact gradients")]
    InexactDiagnostics,
}

pub type Result<T> = std::result::Result<T, Error>;
