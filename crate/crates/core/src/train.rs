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

//! Empirical-risk training of `R` (and optionally `ω`) through the unrolled
//! iterations.
//!
//! The loss `(1/m) Σ ½‖T xᵢ − yᵢ‖²` of a linear map depends on the data only
//! through the moments `Sxx = (1/m) Σ xᵢxᵢᵀ`, `Sxy = (1/m) Σ xᵢyᵢᵀ` and
//! `(1/m) Σ ‖yᵢ‖²`. Training therefore runs the `N` gradient steps on the
//! identity (which yields `T` itself) and back-propagates through them by
//! hand, so the cost of a step does not grow with the number of frames.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{sigmoid, softplus, softplus_inv, Regularizer};
use crate::linalg::Matrix;
use crate::model::{derive_seed, draw_noisy, gaussian, rng_for, sample_batch, ModelParams};

const INIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StepsizeMode {
    Fixed(f64),
    /// Trained through `ω = softplus(raw)`, starting from the given raw value.
    Learned(f64),
}

impl StepsizeMode {
    pub fn label(&self) -> &'static str {
        match self {
            StepsizeMode::Fixed(_) => "fixed",
            StepsizeMode::Learned(_) => "learned",
        }
    }

    pub fn initial_omega(&self) -> f64 {
        match *self {
            StepsizeMode::Fixed(w) => w,
            StepsizeMode::Learned(raw) => softplus(raw),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub k: usize,
    pub n: usize,
    pub depth: usize,
    pub stepsize: StepsizeMode,
    pub learning_rate: f64,
    pub betas: (f64, f64),
    pub steps: usize,
    /// Frames per step; `None` uses every training frame.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Standard deviation of the initial entries of `R`, times `√n`.
    pub init_scale: f64,
    /// Fraction of frames, taken from the end, held out for evaluation.
    pub heldout_fraction: f64,
}

impl TrainConfig {
    pub fn new(k: usize, n: usize, depth: usize, stepsize: StepsizeMode) -> Self {
        TrainConfig {
            k,
            n,
            depth,
            stepsize,
            learning_rate: 1e-3,
            betas: (0.9, 0.999),
            steps: 2000,
            batch_size: None,
            seed: 0,
            init_scale: 1.0,
            heldout_fraction: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Regularizer::zeros(self.k, self.n)?;
        let bad = |name, value, reason| Err(Error::OutOfRange { name, value, reason });
        if self.depth == 0 {
            return bad("depth", 0.0, "at least one gradient step is required");
        }
        if !(self.stepsize.initial_omega() > 0.0) {
            return bad("omega", self.stepsize.initial_omega(), "stepsize must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate", self.learning_rate, "must be positive");
        }
        let (b1, b2) = self.betas;
        if !((0.0..1.0).contains(&b1) && (0.0..1.0).contains(&b2)) {
            return bad("betas", b1.max(b2), "moment decays must lie in [0, 1)");
        }
        if !(self.heldout_fraction > 0.0 && self.heldout_fraction < 1.0) {
            return bad("heldout_fraction", self.heldout_fraction, "must lie in (0, 1)");
        }
        if self.batch_size == Some(0) {
            return bad("batch_size", 0.0, "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FrameSource {
    Synthetic(ModelParams),
    File(String),
}

/// Clean training signals, one frame per row, and the noise level used to
/// corrupt them.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDataset {
    pub frames: Matrix,
    pub source: FrameSource,
    pub noise_sigma: f64,
}

impl FrameDataset {
    /// The clean rows of [`sample_batch`], corrupted with `σ = √σ²` of the
    /// parameters during training.
    pub fn synthetic(params: &ModelParams, m: usize, seed: u64) -> Result<Self> {
        let batch = sample_batch(params, m, seed)?;
        Ok(FrameDataset {
            frames: batch.clean,
            source: FrameSource::Synthetic(*params),
            noise_sigma: libm::sqrt(params.sigma2),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }

    /// Noisy observations of every frame, drawn from `seed`.
    pub fn observations(&self, seed: u64) -> Matrix {
        let mut rng = rng_for(seed, NOISE_STREAM);
        let mut noisy = Matrix::zeros(self.frames.rows(), self.frames.cols());
        for i in 0..self.frames.rows() {
            draw_noisy(self.noise_sigma, &mut rng, self.frames.row(i), noisy.row_mut(i));
        }
        noisy
    }

    /// Number of training frames; the rest are held out.
    pub fn split(&self, heldout_fraction: f64) -> Result<usize> {
        let m = self.len();
        let held = ((m as f64 * heldout_fraction) as usize).max(1);
        if m < 2 || held >= m {
            return Err(Error::EmptyData);
        }
        Ok(m - held)
    }
}

/// Second moments of `(x, y)` pairs that determine the empirical loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub sxx: Matrix,
    pub sxy: Matrix,
    pub syy: f64,
    pub count: usize,
}

impl Moments {
    /// Moments of rows `range` of `(noisy, clean)`.
    pub fn from_rows(noisy: &Matrix, clean: &Matrix, range: core::ops::Range<usize>) -> Result<Self> {
        let n = clean.cols();
        if range.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut sxx = Matrix::zeros(n, n);
        let mut sxy = Matrix::zeros(n, n);
        let mut syy = 0.0;
        let count = range.len();
        for r in range {
            let (x, y) = (noisy.row(r), clean.row(r));
            for i in 0..n {
                let xi = x[i];
                for j in 0..n {
                    sxx[(i, j)] += xi * x[j];
                    sxy[(i, j)] += xi * y[j];
                }
            }
            syy += y.iter().map(|v| v * v).sum::<f64>();
        }
        let inv = 1.0 / count as f64;
        Ok(Moments {
            sxx: sxx.scale(inv),
            sxy: sxy.scale(inv),
            syy: syy * inv,
            count,
        })
    }

    /// `(1/m) Σ ½‖T xᵢ − yᵢ‖²`.
    pub fn loss(&self, t: &Matrix) -> f64 {
        let ts = t.matmul(&self.sxx);
        self.loss_with(t, &ts)
    }

    fn loss_with(&self, t: &Matrix, ts: &Matrix) -> f64 {
        let cross = t.frobenius_dot(&self.sxy.transpose());
        0.5 * ts.frobenius_dot(t) - cross + 0.5 * self.syy
    }
}

/// The unrolled map `T` for `(R, ω, N)` by running the iteration on `I`.
pub fn unrolled_map(r: &Matrix, omega: f64, depth: usize) -> Matrix {
    let n = r.cols();
    let mut z = Matrix::zeros(n, n);
    for _ in 0..depth {
        z = step(r, omega, &z);
    }
    z
}

/// `Z − ω((Z − I) + RᵀRZ)`.
fn step(r: &Matrix, omega: f64, z: &Matrix) -> Matrix {
    let u = residual(r, z);
    z.sub(&u.scale(omega))
}

/// `(Z − I) + RᵀRZ`.
fn residual(r: &Matrix, z: &Matrix) -> Matrix {
    let mut u = r.tr_matmul(&r.matmul(z)).add(z);
    u.add_diag(-1.0);
    u
}

/// Empirical loss of the unrolled map and its gradients with respect to `R`
/// and `ω`.
pub fn loss_and_grad(r: &Matrix, omega: f64, depth: usize, moments: &Moments) -> (f64, Matrix, f64) {
    let n = r.cols();
    let mut states = Vec::with_capacity(depth + 1);
    states.push(Matrix::zeros(n, n));
    for t in 0..depth {
        let next = step(r, omega, &states[t]);
        states.push(next);
    }
    let t_map = &states[depth];
    let ts = t_map.matmul(&moments.sxx);
    let loss = moments.loss_with(t_map, &ts);

    let mut g = ts.sub(&moments.sxy.transpose());
    let mut grad_r = Matrix::zeros(r.rows(), n);
    let mut grad_w = 0.0;
    for t in (0..depth).rev() {
        let z = &states[t];
        let p = r.matmul(z);
        let q = r.matmul(&g);
        let mut u = r.tr_matmul(&p).add(z);
        u.add_diag(-1.0);
        grad_w -= g.frobenius_dot(&u);
        let dr = p.matmul_tr(&g).add(&q.matmul_tr(z));
        grad_r = grad_r.sub(&dr.scale(omega));
        let back = r.tr_matmul(&q).add(&g);
        g = g.sub(&back.scale(omega));
    }
    (loss, grad_r, grad_w)
}

struct Adam {
    lr: f64,
    b1: f64,
    b2: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize, lr: f64, (b1, b2): (f64, f64)) -> Self {
        Adam {
            lr,
            b1,
            b2,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.b1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.b2, self.t as f64);
        for i in 0..params.len() {
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * grad[i];
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (libm::sqrt(vh) + EPS);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub regularizer: Regularizer,
    pub omega: f64,
    pub loss_trace: Vec<f64>,
    pub mse_train: f64,
    pub mse_heldout: f64,
    pub seed: u64,
}

/// Initial `R` with entries `N(0, 1)·init_scale/√n`.
pub fn init_regularizer(cfg: &TrainConfig) -> Matrix {
    let mut rng = rng_for(cfg.seed, INIT_STREAM);
    let scale = cfg.init_scale / libm::sqrt(cfg.n as f64);
    Matrix::from_fn(cfg.k, cfg.n, |_, _| scale * gaussian(&mut rng))
}

/// Full-batch (or cyclic mini-batch) Adam on the empirical loss.
pub fn train(cfg: &TrainConfig, data: &FrameDataset) -> Result<TrainResult> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.frames.cols() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            got: data.frames.cols(),
        });
    }
    let m_train = data.split(cfg.heldout_fraction)?;
    let noisy = data.observations(cfg.seed);
    let full = Moments::from_rows(&noisy, &data.frames, 0..m_train)?;
    let heldout = Moments::from_rows(&noisy, &data.frames, m_train..data.len())?;
    let batch = cfg.batch_size.filter(|&b| b < m_train);

    let kn = cfg.k * cfg.n;
    let mut params = init_regularizer(cfg).into_vec();
    let learned = matches!(cfg.stepsize, StepsizeMode::Learned(_));
    let mut fixed_omega = 0.0;
    match cfg.stepsize {
        StepsizeMode::Fixed(w) => fixed_omega = w,
        StepsizeMode::Learned(raw) => params.push(raw),
    }
    let omega_of = |p: &[f64]| if learned { softplus(p[kn]) } else { fixed_omega };
    let mut adam = Adam::new(params.len(), cfg.learning_rate, cfg.betas);
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut grad = vec![0.0; params.len()];

    for s in 0..cfg.steps {
        let windowed;
        let moments = match batch {
            None => &full,
            Some(b) => {
                let start = (s * b) % m_train;
                let end = (start + b).min(m_train);
                windowed = Moments::from_rows(&noisy, &data.frames, start..end)?;
                &windowed
            }
        };
        let r = Matrix::from_row_major(cfg.k, cfg.n, params[..kn].to_vec());
        let omega = omega_of(&params);
        let (loss, gr, gw) = loss_and_grad(&r, omega, cfg.depth, moments);
        if !loss.is_finite() {
            return Err(Error::Diverged { step: s, loss });
        }
        trace.push(loss);
        grad[..kn].copy_from_slice(gr.as_slice());
        if learned {
            grad[kn] = gw * sigmoid(params[kn]);
        }
        adam.step(&mut params, &grad);
    }

    let r = Matrix::from_row_major(cfg.k, cfg.n, params[..kn].to_vec());
    let omega = omega_of(&params);
    let t = unrolled_map(&r, omega, cfg.depth);
    let mse_train = full.loss(&t);
    let mse_heldout = heldout.loss(&t);
    if !(mse_train.is_finite() && mse_heldout.is_finite()) {
        return Err(Error::Diverged {
            step: cfg.steps,
            loss: mse_train,
        });
    }
    Ok(TrainResult {
        regularizer: Regularizer::new(r)?,
        omega,
        loss_trace: trace,
        mse_train,
        mse_heldout,
        seed: cfg.seed,
    })
}

/// One cell of a depth sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DepthRow {
    pub depth: usize,
    pub mode: &'static str,
    pub k: usize,
    pub n: usize,
    pub omega_final: f64,
    pub mse_train: f64,
    pub mse_heldout: f64,
    pub seed: u64,
}

/// The configurations of a depth sweep, in output order: for each depth a
/// fixed-stepsize run then a learned-stepsize run from the same initial `ω`.
/// Both runs of a depth share a seed derived from the template seed.
pub fn sweep_cells(template: &TrainConfig, depths: &[usize]) -> Vec<TrainConfig> {
    let w0 = template.stepsize.initial_omega();
    let mut cells = Vec::with_capacity(2 * depths.len());
    for &depth in depths {
        let seed = derive_seed(template.seed, depth as u64);
        for mode in [StepsizeMode::Fixed(w0), StepsizeMode::Learned(softplus_inv(w0))] {
            let mut cfg = template.clone();
            cfg.depth = depth;
            cfg.stepsize = mode;
            cfg.seed = seed;
            cells.push(cfg);
        }
    }
    cells
}

pub fn depth_row(cfg: &TrainConfig, result: &TrainResult) -> DepthRow {
    DepthRow {
        depth: cfg.depth,
        mode: cfg.stepsize.label(),
        k: cfg.k,
        n: cfg.n,
        omega_final: result.omega,
        mse_train: result.mse_train,
        mse_heldout: result.mse_heldout,
        seed: cfg.seed,
    }
}

/// Trains every cell of [`sweep_cells`] sequentially.
pub fn sweep_depth(template: &TrainConfig, data: &FrameDataset, depths: &[usize]) -> Result<Vec<DepthRow>> {
    sweep_cells(template, depths)
        .iter()
        .map(|cfg| train(cfg, data).map(|res| depth_row(cfg, &res)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{unroll_estimator, UnrollConfig};
    use crate::model::DataKind;
    use approx::assert_relative_eq;

    fn moments(n: usize, seed: u64) -> Moments {
        let p = ModelParams::new(n, 0.4, 0.3, 0.05, DataKind::Iid).unwrap();
        let b = sample_batch(&p, 50, seed).unwrap();
        Moments::from_rows(&b.noisy, &b.clean, 0..50).unwrap()
    }

    fn random_r(k: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = rng_for(seed, 9);
        Matrix::from_fn(k, n, |_, _| 0.5 * gaussian(&mut rng))
    }

    #[test]
    fn unrolled_map_matches_closed_form() {
        let r = random_r(2, 4, 1);
        let t = unrolled_map(&r, 0.3, 5);
        let reg = Regularizer::new(r).unwrap();
        let closed = unroll_estimator(&reg, &UnrollConfig::new(5, 0.3).unwrap());
        assert!(t.sub(closed.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn moment_loss_matches_direct_average() {
        let p = ModelParams::new(3, 0.4, 0.3, 0.05, DataKind::RandomConstant).unwrap();
        let b = sample_batch(&p, 40, 2).unwrap();
        let mo = Moments::from_rows(&b.noisy, &b.clean, 0..40).unwrap();
        let t = unrolled_map(&random_r(1, 3, 3), 0.4, 3);
        let mut direct = 0.0;
        for i in 0..40 {
            let tx = t.matvec(b.noisy.row(i));
            direct += 0.5
                * tx.iter()
                    .zip(b.clean.row(i))
                    .map(|(a, y)| (a - y) * (a - y))
                    .sum::<f64>();
        }
        assert_relative_eq!(mo.loss(&t), direct / 40.0, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (k, n, depth, w) = (2, 3, 4, 0.35);
        let mo = moments(n, 4);
        let r = random_r(k, n, 5);
        let (_, gr, gw) = loss_and_grad(&r, w, depth, &mo);
        let h = 1e-5;
        for idx in 0..k * n {
            let mut plus = r.clone();
            let mut minus = r.clone();
            plus.as_mut_slice()[idx] += h;
            minus.as_mut_slice()[idx] -= h;
            let fd = (mo.loss(&unrolled_map(&plus, w, depth)) - mo.loss(&unrolled_map(&minus, w, depth))) / (2.0 * h);
            assert_relative_eq!(gr.as_slice()[idx], fd, max_relative = 1e-6, epsilon = 1e-10);
        }
        let fd = (mo.loss(&unrolled_map(&r, w + h, depth)) - mo.loss(&unrolled_map(&r, w - h, depth))) / (2.0 * h);
        assert_relative_eq!(gw, fd, max_relative = 1e-6);
    }

    #[test]
    fn training_is_deterministic_and_improves() {
        let p = ModelParams::new(4, 1.0, 0.2, 0.04, DataKind::RandomConstant).unwrap();
        let data = FrameDataset::synthetic(&p, 200, 7).unwrap();
        let mut cfg = TrainConfig::new(1, 4, 2, StepsizeMode::Learned(softplus_inv(0.5)));
        cfg.steps = 300;
        cfg.learning_rate = 1e-2;
        let a = train(&cfg, &data).unwrap();
        let b = train(&cfg, &data).unwrap();
        assert_eq!(a, b);
        assert!(a.loss_trace.last().unwrap() < &a.loss_trace[0]);
    }

    #[test]
    fn rejects_bad_config() {
        let p = ModelParams::new(4, 1.0, 0.2, 0.04, DataKind::RandomConstant).unwrap();
        let data = FrameDataset::synthetic(&p, 10, 7).unwrap();
        let cfg = TrainConfig::new(5, 4, 2, StepsizeMode::Fixed(0.5));
        assert!(train(&cfg, &data).is_err());
        let cfg = TrainConfig::new(1, 3, 2, StepsizeMode::Fixed(0.5));
        assert!(train(&cfg, &data).is_err());
        let one = FrameDataset::synthetic(&p, 1, 7).unwrap();
        assert!(train(&TrainConfig::new(1, 4, 2, StepsizeMode::Fixed(0.5)), &one).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let p = ModelParams::new(2, 1.0, 0.2, 0.04, DataKind::RandomConstant).unwrap();
        let data = FrameDataset::synthetic(&p, 20, 1).unwrap();
        let mut cfg = TrainConfig::new(1, 2, 400, StepsizeMode::Fixed(5.0));
        cfg.steps = 5;
        assert!(matches!(train(&cfg, &data), Err(Error::Diverged { .. })));
    }

    #[test]
    fn sweep_pairs_modes() {
        let cells = sweep_cells(&TrainConfig::new(1, 4, 1, StepsizeMode::Fixed(0.3)), &[2, 5]);
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].seed, cells[1].seed);
        assert_ne!(cells[0].seed, cells[2].seed);
        assert_relative_eq!(cells[1].stepsize.initial_omega(), 0.3, max_relative = 1e-14);
    }
}
