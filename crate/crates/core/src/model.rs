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

//! Model parameters and sampling of `(y, x = y + ε)` pairs.
//!
//! Signals and noise are drawn from Gaussians with the configured first two
//! moments. Randomness comes from ChaCha20 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`; independent streams of one seed are selected
//! with `set_stream`, so shards of a computation never share draws and the
//! output does not depend on platform or thread count.

use alloc::format;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Which signal distribution `y` follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DataKind {
    /// `y = λ·1` with a scalar level `λ` of mean `μ` and variance `θ²`.
    #[cfg_attr(feature = "serde", serde(rename = "const"))]
    RandomConstant,
    /// Entries of `y` are i.i.d. with mean `μ` and variance `θ²`.
    #[cfg_attr(feature = "serde", serde(rename = "iid"))]
    Iid,
}

impl DataKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DataKind::RandomConstant => "const",
            DataKind::Iid => "iid",
        }
    }
}

impl core::fmt::Display for DataKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "const" | "constant" => Ok(DataKind::RandomConstant),
            "iid" => Ok(DataKind::Iid),
            other => Err(Error::InvalidParams(format!(
                "unknown data model kind {other:?} (expected \"const\" or \"iid\")"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub n: usize,
    pub mu: f64,
    pub theta2: f64,
    pub sigma2: f64,
    pub kind: DataKind,
}

impl ModelParams {
    pub fn new(n: usize, mu: f64, theta2: f64, sigma2: f64, kind: DataKind) -> Result<Self> {
        let p = ModelParams {
            n,
            mu,
            theta2,
            sigma2,
            kind,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.theta2 >= 0.0 && self.theta2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "theta2 must be finite and >= 0, got {}",
                self.theta2
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma2 must be finite and > 0, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }

    /// `E[λ²] = μ² + θ²`, the second moment of the constant level.
    pub fn second_moment(&self) -> f64 {
        self.mu * self.mu + self.theta2
    }

    pub fn with_kind(mut self, kind: DataKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// `m×n` ground truths, one signal per row.
    pub clean: Matrix,
    /// `m×n` observations `clean + ε`.
    pub noisy: Matrix,
    pub seed: u64,
}

/// ChaCha20 generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; derives child seeds for independent runs.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Fills `y` with one signal draw.
pub fn draw_signal<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R, y: &mut [f64]) {
    let theta = libm::sqrt(params.theta2);
    match params.kind {
        DataKind::RandomConstant => {
            let level = params.mu + theta * gaussian(rng);
            y.iter_mut().for_each(|v| *v = level);
        }
        DataKind::Iid => {
            for v in y.iter_mut() {
                *v = params.mu + theta * gaussian(rng);
            }
        }
    }
}

/// Fills `x` with `y + ε`, `ε ~ N(0, σ² I)`.
pub fn draw_noisy<R: Rng + ?Sized>(sigma: f64, rng: &mut R, y: &[f64], x: &mut [f64]) {
    for (xi, &yi) in x.iter_mut().zip(y) {
        *xi = yi + sigma * gaussian(rng);
    }
}

/// Draws `m` pairs. Each row draws its signal and then its noise from stream 0
/// of `seed`.
pub fn sample_batch(params: &ModelParams, m: usize, seed: u64) -> Result<SampleBatch> {
    params.validate()?;
    if m == 0 {
        return Err(Error::OutOfRange {
            name: "m",
            value: 0.0,
            reason: "sample count must be at least 1",
        });
    }
    let n = params.n;
    let sigma = libm::sqrt(params.sigma2);
    let mut rng = rng_for(seed, 0);
    let mut clean = Matrix::zeros(m, n);
    let mut noisy = Matrix::zeros(m, n);
    for i in 0..m {
        draw_signal(params, &mut rng, clean.row_mut(i));
        let (y, x) = (clean.row(i).to_vec(), noisy.row_mut(i));
        draw_noisy(sigma, &mut rng, &y, x);
    }
    Ok(SampleBatch { clean, noisy, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_constant_rows() {
        let p = ModelParams::new(3, 5.0, 0.0, 1e-30, DataKind::RandomConstant).unwrap();
        let b = sample_batch(&p, 2, 11).unwrap();
        for i in 0..2 {
            assert_eq!(b.clean.row(i), &[5.0, 5.0, 5.0]);
        }
    }

    #[test]
    fn same_seed_same_batch() {
        let p = ModelParams::new(4, 0.3, 0.7, 0.2, DataKind::Iid).unwrap();
        let a = sample_batch(&p, 50, 99).unwrap();
        let b = sample_batch(&p, 50, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_batch(&p, 50, 100).unwrap();
        assert_ne!(a.clean, c.clean);
    }

    #[test]
    fn constant_rows_are_exactly_constant() {
        let p = ModelParams::new(6, 1.0, 2.0, 0.5, DataKind::RandomConstant).unwrap();
        let b = sample_batch(&p, 200, 3).unwrap();
        let spread = (0..200)
            .map(|i| {
                let r = b.clean.row(i);
                let hi = r.iter().cloned().fold(f64::MIN, f64::max);
                let lo = r.iter().cloned().fold(f64::MAX, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max);
        assert_eq!(spread, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ModelParams::new(0, 0.0, 1.0, 1.0, DataKind::Iid).is_err());
        assert!(ModelParams::new(2, 0.0, -1.0, 1.0, DataKind::Iid).is_err());
        assert!(ModelParams::new(2, 0.0, 1.0, 0.0, DataKind::Iid).is_err());
        let p = ModelParams::new(2, 0.0, 1.0, 1.0, DataKind::Iid).unwrap();
        assert!(sample_batch(&p, 0, 1).is_err());
    }

    #[test]
    fn kind_parses() {
        assert_eq!("const".parse::<DataKind>().unwrap(), DataKind::RandomConstant);
        assert_eq!("iid".parse::<DataKind>().unwrap(), DataKind::Iid);
        assert!("gauss".parse::<DataKind>().is_err());
    }
}
