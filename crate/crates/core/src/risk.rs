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

//! Exact expected squared loss of a linear estimator and a Monte Carlo
//! estimate of the same quantity.

use alloc::vec;

use crate::error::{Error, Result};
use crate::estimators::LinearEstimator;
use crate::linalg::Matrix;
use crate::model::{draw_noisy, draw_signal, rng_for, DataKind, ModelParams};

/// Samples per Monte Carlo shard. Fixed so that results do not depend on how
/// shards are scheduled.
pub const MC_SHARD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskValue {
    pub value: f64,
    pub kind: DataKind,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub m: usize,
    pub seed: u64,
}

/// One-pass mean and variance accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pooled combination of two accumulators.
    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        libm::sqrt(self.variance() / self.count as f64)
    }
}

fn check_dims(t: &Matrix, n: usize) -> Result<()> {
    if t.rows() != n || t.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if t.rows() != n { t.rows() } else { t.cols() },
        });
    }
    Ok(())
}

/// `‖(T − I)1‖²`.
fn bias_on_ones(t: &Matrix) -> f64 {
    t.row_sums().iter().map(|s| (s - 1.0) * (s - 1.0)).sum()
}

/// `‖T − I‖_F²`.
fn dist_to_identity_sq(t: &Matrix) -> f64 {
    let n = t.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for (j, &v) in t.row(i).iter().enumerate() {
            let d = if i == j { v - 1.0 } else { v };
            acc += d * d;
        }
    }
    acc
}

/// `E‖(T − I)y‖²`, without the factor ½.
pub fn data_term(t: &LinearEstimator, params: &ModelParams) -> Result<f64> {
    data_term_matrix(t.matrix(), params)
}

pub(crate) fn data_term_matrix(t: &Matrix, params: &ModelParams) -> Result<f64> {
    check_dims(t, params.n)?;
    let mu2 = params.mu * params.mu;
    Ok(match params.kind {
        DataKind::RandomConstant => (mu2 + params.theta2) * bias_on_ones(t),
        DataKind::Iid => mu2 * bias_on_ones(t) + params.theta2 * dist_to_identity_sq(t),
    })
}

/// `½ E‖Tε‖² = (σ²/2)‖T‖_F²`.
pub fn noise_term(t: &LinearEstimator, sigma2: f64) -> f64 {
    0.5 * sigma2 * t.matrix().frobenius_norm_sq()
}

/// `E ½‖T(y + ε) − y‖²` in closed form.
pub fn true_risk(t: &LinearEstimator, params: &ModelParams) -> Result<RiskValue> {
    Ok(RiskValue {
        value: true_risk_matrix(t.matrix(), params)?,
        kind: params.kind,
    })
}

pub fn true_risk_matrix(t: &Matrix, params: &ModelParams) -> Result<f64> {
    let data = data_term_matrix(t, params)?;
    Ok(0.5 * data + 0.5 * params.sigma2 * t.frobenius_norm_sq())
}

/// Accumulates `len` losses drawn from stream `shard + 1` of `seed`.
///
/// [`mc_risk`] is the ordered merge of shards `0, 1, …`; parallel drivers
/// may evaluate shards concurrently and merge them in the same order.
pub fn mc_shard(t: &LinearEstimator, params: &ModelParams, seed: u64, shard: u64, len: usize) -> Welford {
    let n = params.n;
    let sigma = libm::sqrt(params.sigma2);
    let m = t.matrix();
    let mut rng = rng_for(seed, shard + 1);
    let (mut y, mut x) = (vec![0.0; n], vec![0.0; n]);
    let mut acc = Welford::new();
    for _ in 0..len {
        draw_signal(params, &mut rng, &mut y);
        draw_noisy(sigma, &mut rng, &y, &mut x);
        let mut loss = 0.0;
        for i in 0..n {
            let ti: f64 = m.row(i).iter().zip(&x).map(|(a, b)| a * b).sum();
            let d = ti - y[i];
            loss += d * d;
        }
        acc.push(0.5 * loss);
    }
    acc
}

/// Shard lengths covering `m` samples.
pub fn mc_shards(m: usize) -> impl Iterator<Item = (u64, usize)> {
    let count = m.div_ceil(MC_SHARD);
    (0..count).map(move |i| (i as u64, MC_SHARD.min(m - i * MC_SHARD)))
}

pub fn check_mc_input(t: &LinearEstimator, params: &ModelParams, m: usize) -> Result<()> {
    params.validate()?;
    check_dims(t.matrix(), params.n)?;
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            reason: "at least two samples are needed for a standard error",
        });
    }
    Ok(())
}

/// Monte Carlo estimate of the risk from `m` fresh samples.
pub fn mc_risk(t: &LinearEstimator, params: &ModelParams, m: usize, seed: u64) -> Result<McEstimate> {
    check_mc_input(t, params, m)?;
    let mut acc = Welford::new();
    for (shard, len) in mc_shards(m) {
        acc.merge(&mc_shard(t, params, seed, shard, len));
    }
    Ok(finish_mc(&acc, seed))
}

pub fn finish_mc(acc: &Welford, seed: u64) -> McEstimate {
    McEstimate {
        mean: acc.mean(),
        std_error: acc.std_error(),
        m: acc.count() as usize,
        seed,
    }
}

/// `numerator / denominator` for two risks of the same data model.
pub fn risk_ratio(numerator: &RiskValue, denominator: &RiskValue) -> Result<f64> {
    if numerator.kind != denominator.kind {
        return Err(Error::KindMismatch);
    }
    if !(denominator.value > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(numerator.value / denominator.value)
}
