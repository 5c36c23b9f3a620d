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

//! Dense linear algebra cross-checked against nalgebra.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use unroll_core::linalg::{jacobi_eigen, Matrix};
use unroll_core::risk::true_risk_matrix;
use unroll_core::{best_linear, bilevel_estimator, unroll_estimator, DataKind, ModelParams, Regularizer, UnrollConfig};

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn max_diff(a: &Matrix, b: &DMatrix<f64>) -> f64 {
    let b = to_na(a) - b;
    b.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.5f64..1.5, rows * cols).prop_map(move |v| Matrix::from_row_major(rows, cols, v))
}

fn regularizer() -> impl Strategy<Value = Matrix> {
    (1usize..=6).prop_flat_map(|n| (1usize..=n).prop_flat_map(move |k| matrix(k, n)))
}

fn params(n: usize) -> impl Strategy<Value = ModelParams> {
    (-1.0f64..2.0, 0.0f64..1.0, 0.05f64..1.0, any::<bool>()).prop_map(move |(mu, t2, s2, iid)| {
        let kind = if iid { DataKind::Iid } else { DataKind::RandomConstant };
        ModelParams::new(n, mu, t2, s2, kind).unwrap()
    })
}

/// Second moment `E[y yᵀ]` of the signal.
fn signal_moment(p: &ModelParams) -> DMatrix<f64> {
    let n = p.n;
    let ones = DMatrix::from_element(n, n, 1.0);
    match p.kind {
        DataKind::RandomConstant => ones * (p.mu * p.mu + p.theta2),
        DataKind::Iid => ones * (p.mu * p.mu) + DMatrix::identity(n, n) * p.theta2,
    }
}

/// `E ½‖T(y+ε) − y‖² = ½ tr((T−I) M (T−I)ᵀ) + ½ σ² ‖T‖²_F`.
fn risk_na(t: &DMatrix<f64>, p: &ModelParams) -> f64 {
    let n = p.n;
    let d = t - DMatrix::identity(n, n);
    0.5 * (&d * signal_moment(p) * d.transpose()).trace() + 0.5 * p.sigma2 * t.norm_squared()
}

proptest! {
    #[test]
    fn eigenvalues_match(a in (1usize..=7).prop_flat_map(|n| matrix(n, n))) {
        let sym = a.add(&a.transpose());
        let (ours, _) = jacobi_eigen(&sym);
        let mut theirs: Vec<f64> = to_na(&sym).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() < 1e-11, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn bilevel_is_inverse(r in regularizer()) {
        let n = r.cols();
        let g = DMatrix::identity(n, n) + to_na(&r).transpose() * to_na(&r);
        let inv = g.try_inverse().unwrap();
        let t = bilevel_estimator(&Regularizer::new(r).unwrap());
        prop_assert!(max_diff(t.matrix(), &inv) < 1e-12);
    }

    #[test]
    fn unrolled_closed_form(r in regularizer(), depth in 1usize..=8, omega in 0.05f64..1.95) {
        let n = r.cols();
        let id = DMatrix::<f64>::identity(n, n);
        let g = &id + to_na(&r).transpose() * to_na(&r);
        let step = &id - &g * omega;
        let mut power = id.clone();
        for _ in 0..depth {
            power = &power * &step;
        }
        let expected = g.clone().try_inverse().unwrap() * (&id - power);
        let t = unroll_estimator(&Regularizer::new(r).unwrap(), &UnrollConfig::new(depth, omega).unwrap());
        let scale = expected.amax().max(1.0);
        prop_assert!(max_diff(t.matrix(), &expected) < 1e-10 * scale);
    }

    #[test]
    fn risk_functional(t in (1usize..=6).prop_flat_map(|n| (matrix(n, n), params(n)))) {
        let (t, p) = t;
        let ours = true_risk_matrix(&t, &p).unwrap();
        let theirs = risk_na(&to_na(&t), &p);
        prop_assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0));
    }

    #[test]
    fn best_linear_is_wiener(p in (1usize..=6).prop_flat_map(params)) {
        let n = p.n;
        let m = signal_moment(&p);
        let wiener = &m * (&m + DMatrix::identity(n, n) * p.sigma2).try_inverse().unwrap();
        let rep = best_linear(&p).unwrap();
        let t = rep.estimator.unwrap();
        prop_assert!(max_diff(t.matrix(), &wiener) < 1e-12);
        prop_assert!((rep.risk - risk_na(&wiener, &p)).abs() < 1e-12 * rep.risk.max(1.0));
    }
}

#[test]
fn gradient_steps_match_dense_iteration() {
    let r = Matrix::from_row_major(2, 3, vec![0.3, -0.2, 0.5, 0.1, 0.4, -0.6]);
    let reg = Regularizer::new(r.clone()).unwrap();
    let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let g = DMatrix::identity(3, 3) + to_na(&r).transpose() * to_na(&r);
    let mut z = DVector::zeros(3);
    for _ in 0..12 {
        z = &z - (&g * &z - &x) * 0.7;
    }
    let ours = unroll_core::unroll_gd_iterative(&reg, &UnrollConfig::new(12, 0.7).unwrap(), x.as_slice()).unwrap();
    for (a, b) in ours.iter().zip(z.iter()) {
        assert!((a - b).abs() < 1e-13);
    }
}
