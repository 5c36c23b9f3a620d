// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Statistical toy model for learned quadratic denoisers.
//!
//! A signal `y` is observed as `x = y + ε` and denoised either by the exact
//! minimizer of `½‖z − x‖² + ½‖Rz‖²` (the *bilevel* estimator) or by `N`
//! steps of gradient descent on that objective started at zero (the
//! *unrolling* estimator). Both are linear maps `T`, so their expected squared
//! loss has a closed form for the two signal models handled here: random
//! constant vectors `λ·1` and vectors with i.i.d. entries.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI,
//! parallel drivers and numeric oracles live in the companion `unroll` crate.

#![no_std]
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::manual_is_multiple_of
)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod expressivity;
pub mod linalg;
pub mod minimize;
pub mod model;
pub mod optimal;
pub mod risk;
pub mod train;

pub use error::{Error, Result};
pub use estimators::{
    bilevel_estimator, softplus, softplus_inv, solve_lower_level, unroll_estimator, unroll_gd_iterative,
    LinearEstimator, Regularizer, UnrollConfig,
};
pub use expressivity::{
    c_constant, hn_bounds, membership_bilevel, membership_unrolling, rho, sym_eig, transfer_f, CnBounds, CnRegime,
    Condition, MembershipVerdict, SpectralDecomposition, DEFAULT_TOL,
};
pub use linalg::Matrix;
pub use model::{sample_batch, DataKind, ModelParams, SampleBatch};
pub use optimal::{
    best_linear, best_linear_value, bilevel_optimal, bilevel_optimal_value, local_minima, lp_vertex_min, optimal_omega,
    scalar_landscape, unrolling_optimal, unrolling_optimal_value, Branch, Constants, Family, OmegaSet,
    OptimalOmegaReport, OptimalRiskReport, Parity, Placement, SolveMethod,
};
pub use risk::{data_term, mc_risk, noise_term, risk_ratio, true_risk, McEstimate, RiskValue, Welford};
pub use train::{
    loss_and_grad, sweep_depth, train, unrolled_map, DepthRow, FrameDataset, FrameSource, Moments, StepsizeMode,
    TrainConfig, TrainResult,
};
