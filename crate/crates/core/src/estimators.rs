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

//! Regularizers, the lower-level solve, unrolled gradient descent and the
//! linear maps both estimator families reduce to.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expressivity::{transfer_f, SpectralDecomposition};
use crate::linalg::{jacobi_eigen, spectral_compose, Cholesky, Matrix};

/// The learnable `k×n` matrix `R` of the regularizer `½‖Rz‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    r: Matrix,
}

impl Regularizer {
    pub fn new(r: Matrix) -> Result<Self> {
        if r.rows() == 0 || r.cols() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if r.rows() > r.cols() {
            return Err(Error::TooManyRows {
                k: r.rows(),
                n: r.cols(),
            });
        }
        Ok(Regularizer { r })
    }

    pub fn zeros(k: usize, n: usize) -> Result<Self> {
        Self::new(Matrix::zeros(k, n))
    }

    pub fn k(&self) -> usize {
        self.r.rows()
    }

    pub fn n(&self) -> usize {
        self.r.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn into_matrix(self) -> Matrix {
        self.r
    }

    /// `RᵀR`.
    pub fn gram(&self) -> Matrix {
        self.r.gram()
    }

    /// `(I + RᵀR) z`.
    pub fn apply_normal(&self, z: &[f64]) -> Vec<f64> {
        let rz = self.r.matvec(z);
        let mut out = self.r.tr_matvec(&rz);
        for (o, zi) in out.iter_mut().zip(z) {
            *o += zi;
        }
        out
    }

    /// Eigenvalues (descending, clamped at zero) and eigenvectors of `RᵀR`.
    pub fn gram_spectrum(&self) -> (Vec<f64>, Matrix) {
        let (mut s, v) = jacobi_eigen(&self.gram());
        s.iter_mut().for_each(|x| *x = x.max(0.0));
        (s, v)
    }
}

/// Depth and stepsize of the unrolled solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnrollConfig {
    pub depth: usize,
    pub omega: f64,
    /// Unconstrained parameter with `omega = softplus(omega_raw)` when the
    /// stepsize is trained.
    pub omega_raw: Option<f64>,
}

impl UnrollConfig {
    pub fn new(depth: usize, omega: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::OutOfRange {
                name: "depth",
                value: 0.0,
                reason: "at least one gradient step is required",
            });
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::OutOfRange {
                name: "omega",
                value: omega,
                reason: "stepsize must be positive and finite",
            });
        }
        Ok(UnrollConfig {
            depth,
            omega,
            omega_raw: None,
        })
    }

    pub fn from_raw(depth: usize, omega_raw: f64) -> Result<Self> {
        let mut cfg = Self::new(depth, softplus(omega_raw))?;
        cfg.omega_raw = Some(omega_raw);
        Ok(cfg)
    }
}

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Inverse of [`softplus`] for `w > 0`.
pub fn softplus_inv(w: f64) -> f64 {
    if w > 30.0 {
        w + libm::log1p(-libm::exp(-w))
    } else {
        libm::log(libm::expm1(w))
    }
}

/// Logistic function, the derivative of [`softplus`].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// A dense linear estimator `ŷ = T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimator {
    t: Matrix,
    spectral: Option<SpectralDecomposition>,
}

impl LinearEstimator {
    pub fn new(t: Matrix) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::DimensionMismatch {
                expected: t.rows(),
                got: t.cols(),
            });
        }
        Ok(LinearEstimator { t, spectral: None })
    }

    pub(crate) fn with_spectral(t: Matrix, spectral: SpectralDecomposition) -> Self {
        LinearEstimator {
            t,
            spectral: Some(spectral),
        }
    }

    /// Builds `V diag(values) Vᵀ` and keeps the decomposition.
    pub fn from_spectrum(vectors: Matrix, values: Vec<f64>) -> Self {
        let t = spectral_compose(&vectors, &values);
        LinearEstimator::with_spectral(t, SpectralDecomposition::sorted(vectors, values))
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let values = vec![s; n];
        let t = Matrix::diag(&values);
        LinearEstimator::with_spectral(t, SpectralDecomposition::sorted(Matrix::identity(n), values))
    }

    pub fn n(&self) -> usize {
        self.t.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.t
    }

    pub fn into_matrix(self) -> Matrix {
        self.t
    }

    pub fn cached_spectral(&self) -> Option<&SpectralDecomposition> {
        self.spectral.as_ref()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        Ok(self.t.matvec(x))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Exact minimizer of `½‖z − x‖² + ½‖Rz‖²`, i.e. `(I + RᵀR)⁻¹ x`.
pub fn solve_lower_level(reg: &Regularizer, x: &[f64]) -> Result<Vec<f64>> {
    check_len(reg.n(), x.len())?;
    let mut normal = reg.gram();
    normal.add_diag(1.0);
    Ok(Cholesky::new(&normal)?.solve(x))
}

/// `N` literal gradient steps `z ← z − ω((z − x) + RᵀRz)` from `z = 0`.
pub fn unroll_gd_iterative(reg: &Regularizer, cfg: &UnrollConfig, x: &[f64]) -> Result<Vec<f64>> {
    check_len(reg.n(), x.len())?;
    let mut z = vec![0.0; x.len()];
    for _ in 0..cfg.depth {
        let grad = reg.apply_normal(&z);
        for ((zi, gi), xi) in z.iter_mut().zip(&grad).zip(x) {
            *zi -= cfg.omega * (gi - xi);
        }
    }
    Ok(z)
}

/// Closed form of the unrolled map, `(I+RᵀR)⁻¹(I − (I − ω(I+RᵀR))ᴺ)`.
///
/// Evaluated spectrally: with `RᵀR = V diag(s) Vᵀ` the result is
/// `V diag(f(s)) Vᵀ`, `f` being [`transfer_f`].
pub fn unroll_estimator(reg: &Regularizer, cfg: &UnrollConfig) -> LinearEstimator {
    let (s, v) = reg.gram_spectrum();
    let values: Vec<f64> = s
        .iter()
        .map(|&sj| transfer_f(sj, cfg.depth, cfg.omega).expect("clamped spectrum is nonnegative"))
        .collect();
    LinearEstimator::from_spectrum(v, values)
}

/// Solution operator `(I + RᵀR)⁻¹` of the lower-level problem.
pub fn bilevel_estimator(reg: &Regularizer) -> LinearEstimator {
    let (s, v) = reg.gram_spectrum();
    let values = s.iter().map(|&sj| 1.0 / (1.0 + sj)).collect();
    LinearEstimator::from_spectrum(v, values)
}
