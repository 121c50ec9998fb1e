// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

//! Round-accounted value oracles for submodular maximization, hidden-partition
//! hard instances, multilinear-extension calculus and a low-adaptivity
//! continuous double greedy.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod calculus;
pub mod double_greedy;
pub mod error;
pub mod functions;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod spec;

pub use error::{Error, Result};
