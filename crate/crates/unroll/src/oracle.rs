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

//! Numeric minimization of the true risk over regularizers, used to check
//! the closed-form optima.
//!
//! Estimators are formed without any eigendecomposition: the unrolled map as
//! the matrix polynomial `ω Σⱼ (I − ωG)ʲ` with `G = I + RᵀR`, the bilevel map
//! by a Cholesky inverse of `G`. Minimization is BFGS with central
//! finite-difference gradients from several random starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use unroll_core::linalg::{Cholesky, Matrix};
use unroll_core::risk::true_risk_matrix;
use unroll_core::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    /// Starting points are scaled by factors spread log-uniformly over
    /// `[min_scale, max_scale]`. Even restarts start from a Gaussian matrix,
    /// odd ones from a matrix with orthonormal rows, so that every singular
    /// value of `R` starts near the scale.
    pub min_scale: f64,
    pub max_scale: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 20,
            min_scale: 0.3,
            max_scale: 50.0,
            max_iter: 1000,
            grad_tol: 1e-10,
            fd_step: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub risk: f64,
    pub r: Matrix,
    /// Best value of every restart, in restart order.
    pub per_restart: Vec<f64>,
}

/// `ω Σ_{j<N} (I − ω(I + RᵀR))ʲ`, by Horner's rule.
pub fn unroll_map_poly(r: &Matrix, depth: usize, omega: f64) -> Matrix {
    let n = r.cols();
    let mut a = r.gram().scale(-omega);
    a.add_diag(1.0 - omega);
    let mut acc = Matrix::identity(n);
    for _ in 1..depth {
        acc = a.matmul(&acc);
        acc.add_diag(1.0);
    }
    acc.scale(omega)
}

/// `(I + RᵀR)⁻¹` via Cholesky.
pub fn bilevel_map(r: &Matrix) -> Option<Matrix> {
    let mut g = r.gram();
    g.add_diag(1.0);
    Cholesky::new(&g).ok().map(|c| c.inverse())
}

fn central_gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], step: f64, grad: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
}

/// BFGS with backtracking line search; returns the final point and value.
pub fn bfgs(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], cfg: &OracleConfig) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if d == 0 || !fx.is_finite() {
        return (x, fx);
    }
    let mut g = vec![0.0; d];
    central_gradient(&mut f, &x, cfg.fd_step, &mut g);
    let mut h = identity(d);
    let mut first = true;
    let mut stalls = 0;
    let (mut xn, mut gn, mut p) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for _ in 0..cfg.max_iter {
        if g.iter().all(|v| v.abs() < cfg.grad_tol) {
            break;
        }
        for i in 0..d {
            p[i] = -(0..d).map(|j| h[i * d + j] * g[j]).sum::<f64>();
        }
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope.is_nan() || slope >= 0.0 {
            h = identity(d);
            p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi);
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut alpha = 1.0;
        let mut fn_ = f64::INFINITY;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..d {
                xn[i] = x[i] + alpha * p[i];
            }
            fn_ = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        central_gradient(&mut f, &xn, cfg.fd_step, &mut gn);
        let s: Vec<f64> = (0..d).map(|i| xn[i] - x[i]).collect();
        let y: Vec<f64> = (0..d).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        if sy > 1e-14 * (ss * yy).sqrt() {
            if first {
                let scale = sy / yy;
                h.iter_mut().for_each(|v| *v *= scale);
                first = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let improvement = fx - fn_;
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        fx = fn_;
        if improvement <= 1e-16 * fx.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 5 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    (x, fx)
}

fn identity(d: usize) -> Vec<f64> {
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        h[i * d + i] = 1.0;
    }
    h
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..d).map(|i| (0..d).map(|j| h[i * d + j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..d {
        for j in 0..d {
            h[i * d + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Gram-Schmidt on the rows of a row-major `k×n` matrix, `k ≤ n`.
pub fn orthonormalize_rows(x: &mut [f64], k: usize, n: usize) {
    for i in 0..k {
        for j in 0..i {
            let proj: f64 = (0..n).map(|c| x[i * n + c] * x[j * n + c]).sum();
            for c in 0..n {
                x[i * n + c] -= proj * x[j * n + c];
            }
        }
        let norm = (0..n).map(|c| x[i * n + c] * x[i * n + c]).sum::<f64>().sqrt();
        if norm > 0.0 {
            (0..n).for_each(|c| x[i * n + c] /= norm);
        }
    }
}

fn multistart(k: usize, n: usize, cfg: &OracleConfig, mut objective: impl FnMut(&Matrix) -> f64) -> OracleResult {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut best = (f64::INFINITY, Matrix::zeros(k, n));
    let mut per_restart = Vec::with_capacity(cfg.restarts);
    let ratio = cfg.max_scale / cfg.min_scale;
    for i in 0..cfg.restarts {
        let frac = if cfg.restarts > 1 {
            i as f64 / (cfg.restarts - 1) as f64
        } else {
            0.0
        };
        let scale = cfg.min_scale * ratio.powf(frac);
        let mut x0: Vec<f64> = (0..k * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if i % 2 == 1 {
            orthonormalize_rows(&mut x0, k, n);
        }
        x0.iter_mut().for_each(|v| *v *= scale);
        let (x, fx) = bfgs(
            |v: &[f64]| objective(&Matrix::from_row_major(k, n, v.to_vec())),
            &x0,
            cfg,
        );
        per_restart.push(fx);
        if fx < best.0 {
            best = (fx, Matrix::from_row_major(k, n, x));
        }
    }
    OracleResult {
        risk: best.0,
        r: best.1,
        per_restart,
    }
}

/// Smallest true risk of `N`-step unrolled estimators found numerically.
pub fn minimize_unrolling_risk(
    params: &ModelParams,
    k: usize,
    depth: usize,
    omega: f64,
    cfg: &OracleConfig,
) -> OracleResult {
    multistart(k, params.n, cfg, |r| {
        true_risk_matrix(&unroll_map_poly(r, depth, omega), params).unwrap_or(f64::INFINITY)
    })
}

/// Smallest true risk of bilevel estimators found numerically.
pub fn minimize_bilevel_risk(params: &ModelParams, k: usize, cfg: &OracleConfig) -> OracleResult {
    multistart(k, params.n, cfg, |r| {
        bilevel_map(r)
            .and_then(|t| true_risk_matrix(&t, params).ok())
            .unwrap_or(f64::INFINITY)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use unroll_core::{unrolling_optimal, DataKind};

    #[test]
    fn bfgs_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, fx) = bfgs(f, &[-1.2, 1.0], &OracleConfig::default());
        assert!(fx < 1e-10, "{fx}");
        assert!((x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn polynomial_map_depth_two() {
        let r = Matrix::from_row_major(1, 2, vec![1.0, 0.0]);
        let t = unroll_map_poly(&r, 2, 0.5);
        // Eigenvalue s = 1 gives (1 − 0²)/2; s = 0 gives 0.75.
        assert!((t[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((t[(1, 1)] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn oracle_reaches_closed_form() {
        let p = ModelParams::new(2, 0.0, 1.0, 1.0, DataKind::Iid).unwrap();
        let res = minimize_unrolling_risk(&p, 1, 2, 1.0, &OracleConfig::default());
        let best = unrolling_optimal(&p, 1, 2, 1.0).unwrap().risk;
        assert!((res.risk - best).abs() <= 1e-6 * best, "{} vs {best}", res.risk);
    }
}
