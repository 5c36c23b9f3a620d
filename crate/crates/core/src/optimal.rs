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

//! Smallest achievable risks of the linear, bilevel and unrolled classes,
//! the estimators attaining them, and risk-optimal stepsizes.
//!
//! Every optimum is described by a placement of eigenvalues in an
//! orthonormal frame whose first column is `1/√n` (the *aligned*
//! direction). Directions are either *free*, carrying an eigenvalue chosen by
//! a nonzero row of `R`, or *fixed*, carrying the value the class assigns to
//! the kernel of `R` (`1` for bilevel, `ρ` for unrolled maps). At most `k`
//! directions are free.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::estimators::{LinearEstimator, Regularizer};
use crate::expressivity::{c_constant, invert_transfer, rho, transfer_unchecked, CnBounds};
use crate::linalg::{ones_aligned_frame, Matrix};
use crate::minimize::grid_then_golden;
use crate::model::{DataKind, ModelParams};

/// Which estimator class a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Family {
    BestLinear,
    Bilevel,
    Unrolling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Parity {
    /// `N = 1`, where the unrolled map is always `ωI`.
    DepthOne,
    Even,
    Odd,
}

/// Where the aligned direction `1/√n` sits in the optimal placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Placement {
    AlignedFree,
    AlignedFixed,
}

/// Which case of the closed-form solution produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Branch {
    pub family: Family,
    pub kind: DataKind,
    pub parity: Option<Parity>,
    /// `k = n` (`Some(true)`) or `k < n` (`Some(false)`).
    pub full_rank: Option<bool>,
    pub placement: Option<Placement>,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::BestLinear => "best-linear",
            Family::Bilevel => "bilevel",
            Family::Unrolling => "unrolling",
        };
        write!(f, "{family}/{}", self.kind)?;
        if let Some(p) = self.parity {
            f.write_str(match p {
                Parity::DepthOne => "/depth-one",
                Parity::Even => "/even",
                Parity::Odd => "/odd",
            })?;
        }
        if let Some(full) = self.full_rank {
            f.write_str(if full { "/k=n" } else { "/k<n" })?;
        }
        if let Some(p) = self.placement {
            f.write_str(match p {
                Placement::AlignedFree => "/aligned-free",
                Placement::AlignedFixed => "/aligned-fixed",
            })?;
        }
        Ok(())
    }
}

/// Shrinkage constants of a parameter tuple and their clamped variants.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constants {
    /// `n(μ²+θ²)/(n(μ²+θ²)+σ²)`.
    pub c1: f64,
    /// `(nμ²+θ²)/(nμ²+θ²+σ²)`.
    pub c2: f64,
    /// `θ²/(θ²+σ²)`.
    pub c3: f64,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    /// `min(Cᵢ, ρ)`, even depth only.
    pub c1_min: Option<f64>,
    pub c2_min: Option<f64>,
    pub c3_min: Option<f64>,
    /// `max(Cᵢ, c)`, odd depth only.
    pub c1_max: Option<f64>,
    pub c2_max: Option<f64>,
    pub c3_max: Option<f64>,
}

impl Constants {
    pub fn new(params: &ModelParams) -> Self {
        let n = params.n as f64;
        let (mu2, t2, s2) = (params.mu * params.mu, params.theta2, params.sigma2);
        let a = mu2 + t2;
        Constants {
            c1: n * a / (n * a + s2),
            c2: (n * mu2 + t2) / (n * mu2 + t2 + s2),
            c3: t2 / (t2 + s2),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRiskReport {
    pub risk: f64,
    /// `false` when the risk is an infimum no member of the class reaches.
    pub attained: bool,
    pub branch: Branch,
    /// An estimator reaching `risk`, when one exists.
    pub estimator: Option<LinearEstimator>,
    /// A regularizer producing `estimator`, when the class is built from one.
    pub regularizer: Option<Regularizer>,
    pub constants: Constants,
}

/// Minimizers of the optimized risk over the stepsize.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "kebab-case"))]
pub enum OmegaSet {
    /// The two symmetric minimizers `1 ± β`.
    Pair {
        low: f64,
        high: f64,
    },
    /// Every `ω` in the closed interval is optimal.
    Interval {
        lo: f64,
        hi: f64,
    },
    Point {
        omega: f64,
    },
}

impl OmegaSet {
    /// A representative optimal stepsize.
    pub fn representative(&self) -> f64 {
        match *self {
            OmegaSet::Pair { low, .. } => low,
            OmegaSet::Interval { lo, hi } => 0.5 * (lo + hi),
            OmegaSet::Point { omega } => omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolveMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimalOmegaReport {
    pub omegas: OmegaSet,
    pub risk: f64,
    pub method: SolveMethod,
}

/// Per-direction risks of the two kinds of eigen-directions.
///
/// `aligned(t)` is the risk contributed by the direction `1/√n` carrying
/// eigenvalue `t`, `perp(t)` the risk of one direction orthogonal to `1`.
struct Directional {
    n: f64,
    mu2: f64,
    theta2: f64,
    sigma2: f64,
    kind: DataKind,
}

impl Directional {
    fn new(p: &ModelParams) -> Self {
        Directional {
            n: p.n as f64,
            mu2: p.mu * p.mu,
            theta2: p.theta2,
            sigma2: p.sigma2,
            kind: p.kind,
        }
    }

    fn aligned(&self, t: f64) -> f64 {
        let w = match self.kind {
            DataKind::RandomConstant => self.n * (self.mu2 + self.theta2),
            DataKind::Iid => self.n * self.mu2 + self.theta2,
        };
        0.5 * w * (t - 1.0) * (t - 1.0) + 0.5 * self.sigma2 * t * t
    }

    fn perp(&self, t: f64) -> f64 {
        let w = match self.kind {
            DataKind::RandomConstant => 0.0,
            DataKind::Iid => self.theta2,
        };
        0.5 * w * (t - 1.0) * (t - 1.0) + 0.5 * self.sigma2 * t * t
    }

    /// Unconstrained optimal eigenvalues `(aligned, perp)`.
    fn targets(&self, c: &Constants) -> (f64, f64) {
        match self.kind {
            DataKind::RandomConstant => (c.c1, 0.0),
            DataKind::Iid => (c.c2, c.c3),
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            reason: "row count must satisfy 1 <= k <= n",
        });
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::OutOfRange {
            name: "omega",
            value: omega,
            reason: "optimal risks are stated for 0 < omega < 2",
        });
    }
    Ok(())
}

fn check_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::OutOfRange {
            name: "depth",
            value: 0.0,
            reason: "at least one gradient step is required",
        });
    }
    Ok(())
}

/// Optimal spectrum in compressed form: the aligned eigenvalue, `free_perp`
/// further free eigenvalues equal to `perp`, the rest equal to `fixed`.
struct Plan {
    n: usize,
    aligned: f64,
    aligned_free: bool,
    free_perp: usize,
    perp: f64,
    fixed: f64,
}

impl Plan {
    fn new(n: usize, aligned: f64, aligned_free: bool, free_perp: usize, perp: f64, fixed: f64) -> Self {
        Plan {
            n,
            aligned,
            aligned_free,
            free_perp,
            perp,
            fixed,
        }
    }

    fn risk(&self, d: &Directional) -> f64 {
        let rest = (self.n - 1 - self.free_perp) as f64;
        d.aligned(self.aligned) + self.free_perp as f64 * d.perp(self.perp) + rest * d.perp(self.fixed)
    }

    fn all_positive(&self) -> bool {
        let rest = self.n - 1 - self.free_perp;
        self.aligned > 0.0 && (self.free_perp == 0 || self.perp > 0.0) && (rest == 0 || self.fixed > 0.0)
    }

    fn layout(&self) -> Layout {
        Layout::new(
            self.n,
            self.aligned,
            self.aligned_free,
            self.free_perp,
            self.perp,
            self.fixed,
        )
    }
}

/// Eigenvalues in the aligned frame plus the frame columns that are free.
struct Layout {
    values: Vec<f64>,
    free: Vec<usize>,
}

impl Layout {
    /// Aligned direction at `aligned`; `free_perp` further free directions at
    /// `perp`; remaining directions at `fixed`.
    fn new(n: usize, aligned: f64, aligned_free: bool, free_perp: usize, perp: f64, fixed: f64) -> Self {
        let mut values = vec![fixed; n];
        values[0] = aligned;
        let mut free = Vec::with_capacity(free_perp + 1);
        if aligned_free {
            free.push(0);
        }
        for j in 1..=free_perp {
            values[j] = perp;
            free.push(j);
        }
        Layout { values, free }
    }

    fn estimator(&self, frame: &Matrix) -> LinearEstimator {
        LinearEstimator::from_spectrum(frame.clone(), self.values.clone())
    }

    /// `R` whose row `i` is `√sᵢ qᵢᵀ` for the free columns `qᵢ`, where `sᵢ`
    /// is obtained from the free eigenvalue by `to_gram`.
    fn regularizer(&self, frame: &Matrix, k: usize, to_gram: impl Fn(f64) -> Option<f64>) -> Option<Regularizer> {
        let n = frame.rows();
        let mut r = Matrix::zeros(k, n);
        for (row, &j) in self.free.iter().enumerate() {
            let s = to_gram(self.values[j])?;
            let scale = libm::sqrt(s.max(0.0));
            for i in 0..n {
                r[(row, i)] = scale * frame[(i, j)];
            }
        }
        Regularizer::new(r).ok()
    }
}

/// Best risk over all linear maps `T`, with the minimizer.
pub fn best_linear(params: &ModelParams) -> Result<OptimalRiskReport> {
    best_linear_impl(params, true)
}

/// [`best_linear`] without the estimator; `O(1)` in `n`.
pub fn best_linear_value(params: &ModelParams) -> Result<OptimalRiskReport> {
    best_linear_impl(params, false)
}

fn best_linear_impl(params: &ModelParams, build: bool) -> Result<OptimalRiskReport> {
    params.validate()?;
    let n = params.n;
    let constants = Constants::new(params);
    let d = Directional::new(params);
    let (ta, tp) = d.targets(&constants);
    let risk = d.aligned(ta) + (n - 1) as f64 * d.perp(tp);
    let estimator = build.then(|| Layout::new(n, ta, true, n - 1, tp, tp).estimator(&ones_aligned_frame(n)));
    Ok(OptimalRiskReport {
        risk,
        attained: true,
        branch: Branch {
            family: Family::BestLinear,
            kind: params.kind,
            parity: None,
            full_rank: None,
            placement: None,
        },
        estimator,
        regularizer: None,
        constants,
    })
}

/// Best risk over bilevel estimators `(I + RᵀR)⁻¹` with `R ∈ ℝ^{k×n}`.
///
/// For random constant signals the value is an infimum: the optimum needs
/// eigenvalues `0`, which `(I + RᵀR)⁻¹` only approaches. For i.i.d. signals
/// it is attained whenever the optimal eigenvalues are positive (`θ² > 0`).
pub fn bilevel_optimal(params: &ModelParams, k: usize) -> Result<OptimalRiskReport> {
    bilevel_impl(params, k, true)
}

/// [`bilevel_optimal`] without the estimator and regularizer; `O(1)` in `n`.
pub fn bilevel_optimal_value(params: &ModelParams, k: usize) -> Result<OptimalRiskReport> {
    bilevel_impl(params, k, false)
}

fn bilevel_impl(params: &ModelParams, k: usize, build: bool) -> Result<OptimalRiskReport> {
    params.validate()?;
    let n = params.n;
    check_k(k, n)?;
    let constants = Constants::new(params);
    let d = Directional::new(params);
    let full = k == n;
    let (plan, risk, placement) = match (params.kind, full) {
        (DataKind::RandomConstant, false) => (
            Plan::new(n, 1.0, false, k, 0.0, 1.0),
            0.5 * params.sigma2 * (n - k) as f64,
            Placement::AlignedFixed,
        ),
        (DataKind::RandomConstant, true) => (
            Plan::new(n, constants.c1, true, n - 1, 0.0, 0.0),
            0.5 * params.sigma2 * constants.c1,
            Placement::AlignedFree,
        ),
        (DataKind::Iid, false) => (
            Plan::new(n, 1.0, false, k, constants.c3, 1.0),
            0.5 * params.sigma2 * (k as f64 * constants.c3 + (n - k) as f64),
            Placement::AlignedFixed,
        ),
        (DataKind::Iid, true) => (
            Plan::new(n, constants.c2, true, n - 1, constants.c3, constants.c3),
            0.5 * params.sigma2 * ((n - 1) as f64 * constants.c3 + constants.c2),
            Placement::AlignedFree,
        ),
    };
    debug_assert!((plan.risk(&d) - risk).abs() <= 1e-9 * risk.max(1.0));
    let attained = plan.all_positive();
    let (estimator, regularizer) = if attained && build {
        let layout = plan.layout();
        let frame = ones_aligned_frame(n);
        let reg = layout.regularizer(&frame, k, |t| Some(1.0 / t - 1.0));
        (Some(layout.estimator(&frame)), reg)
    } else {
        (None, None)
    };
    Ok(OptimalRiskReport {
        risk,
        attained,
        branch: Branch {
            family: Family::Bilevel,
            kind: params.kind,
            parity: None,
            full_rank: Some(full),
            placement: Some(placement),
        },
        estimator,
        regularizer,
        constants,
    })
}

/// Best risk over `N`-step unrolled estimators with stepsize `ω` and
/// `R ∈ ℝ^{k×n}`. Always attained.
///
/// Free eigenvalues range over `(−∞, ρ]` for even `N` and `[c, ∞)` for odd
/// `N`, so each unconstrained target `Cᵢ` is clamped to `min(Cᵢ, ρ)` or
/// `max(Cᵢ, c)`. With `k < n` and odd `N` the aligned direction is either
/// free (first candidate, preferred on ties) or fixed at `ρ`; for even `N` it
/// is always fixed at `ρ`.
pub fn unrolling_optimal(params: &ModelParams, k: usize, depth: usize, omega: f64) -> Result<OptimalRiskReport> {
    unrolling_impl(params, k, depth, omega, true)
}

/// [`unrolling_optimal`] without the estimator and regularizer; no `n×n`
/// work, so usable for large `n` and inside searches.
pub fn unrolling_optimal_value(params: &ModelParams, k: usize, depth: usize, omega: f64) -> Result<OptimalRiskReport> {
    unrolling_impl(params, k, depth, omega, false)
}

fn unrolling_impl(params: &ModelParams, k: usize, depth: usize, omega: f64, build: bool) -> Result<OptimalRiskReport> {
    params.validate()?;
    let n = params.n;
    check_k(k, n)?;
    check_depth(depth)?;
    check_omega(omega)?;
    let mut constants = Constants::new(params);
    let full = k == n;
    let r = rho(depth, omega);
    constants.rho = Some(r);
    let d = Directional::new(params);

    if depth == 1 {
        let risk = d.aligned(omega) + (n - 1) as f64 * d.perp(omega);
        return Ok(OptimalRiskReport {
            risk,
            attained: true,
            branch: Branch {
                family: Family::Unrolling,
                kind: params.kind,
                parity: Some(Parity::DepthOne),
                full_rank: Some(full),
                placement: None,
            },
            estimator: build.then(|| LinearEstimator::scaled_identity(n, omega)),
            regularizer: if build { Regularizer::zeros(k, n).ok() } else { None },
            constants,
        });
    }

    let (ta, tp) = d.targets(&constants);
    let even = depth % 2 == 0;
    let cn: Option<CnBounds> = if even { None } else { Some(c_constant(depth, omega)?) };
    let clamp = |t: f64| match &cn {
        None => t.min(r),
        Some(c) => t.max(c.value),
    };
    if let Some(c) = &cn {
        constants.c = Some(c.value);
        constants.c1_max = Some(clamp(constants.c1));
        constants.c2_max = Some(clamp(constants.c2));
        constants.c3_max = Some(clamp(constants.c3));
    } else {
        constants.c1_min = Some(clamp(constants.c1));
        constants.c2_min = Some(clamp(constants.c2));
        constants.c3_min = Some(clamp(constants.c3));
    }
    let (ca, cp) = (clamp(ta), clamp(tp));
    let (nf, kf) = (n as f64, k as f64);

    let (plan, risk, placement) = if full {
        let risk = d.aligned(ca) + (nf - 1.0) * d.perp(cp);
        (Plan::new(n, ca, true, n - 1, cp, cp), risk, Placement::AlignedFree)
    } else {
        let fixed_risk = d.aligned(r) + kf * d.perp(cp) + (nf - kf - 1.0) * d.perp(r);
        let fixed = Plan::new(n, r, false, k, cp, r);
        if even {
            (fixed, fixed_risk, Placement::AlignedFixed)
        } else {
            let free_risk = d.aligned(ca) + (kf - 1.0) * d.perp(cp) + (nf - kf) * d.perp(r);
            if free_risk <= fixed_risk {
                (Plan::new(n, ca, true, k - 1, cp, r), free_risk, Placement::AlignedFree)
            } else {
                (fixed, fixed_risk, Placement::AlignedFixed)
            }
        }
    };
    let branch = Branch {
        family: Family::Unrolling,
        kind: params.kind,
        parity: Some(if even { Parity::Even } else { Parity::Odd }),
        full_rank: Some(full),
        placement: Some(placement),
    };
    if !build {
        return Ok(OptimalRiskReport {
            risk,
            attained: true,
            branch,
            estimator: None,
            regularizer: None,
            constants,
        });
    }
    let layout = plan.layout();
    let frame = ones_aligned_frame(n);

    let to_gram = |t: f64| -> Option<f64> {
        match &cn {
            None => invert_transfer(t, depth, omega, 0.0, true, None),
            Some(c) if t <= r => invert_transfer(t, depth, omega, 0.0, true, Some(c.argmin_s)),
            Some(c) => invert_transfer(t, depth, omega, c.argmin_s, false, None),
        }
    };
    let regularizer = layout.regularizer(&frame, k, to_gram);
    Ok(OptimalRiskReport {
        risk,
        attained: true,
        branch,
        estimator: Some(layout.estimator(&frame)),
        regularizer,
        constants,
    })
}

/// Margin kept from the ends of `(0, 2)` in the numeric stepsize search.
pub const OMEGA_EPS: f64 = 1e-6;
const OMEGA_GRID: usize = 2001;

/// Stepsize minimizing [`unrolling_optimal`].
///
/// Even `N` uses the closed forms: two minimizers `1 ± β` for `k < n`, a
/// whole interval `[1 − b, 1 + b]` for `k = n`. Odd `N` is minimized
/// numerically over `[ε, 2 − ε]` by a grid scan and golden-section search to
/// `1e-10`, recomputing `c` for every candidate.
pub fn optimal_omega(params: &ModelParams, k: usize, depth: usize) -> Result<OptimalOmegaReport> {
    params.validate()?;
    let n = params.n;
    check_k(k, n)?;
    check_depth(depth)?;
    if depth % 2 == 1 {
        let objective = |w: f64| {
            unrolling_optimal_value(params, k, depth, w)
                .map(|r| r.risk)
                .unwrap_or(f64::INFINITY)
        };
        let (omega, risk) = grid_then_golden(objective, OMEGA_EPS, 2.0 - OMEGA_EPS, OMEGA_GRID, 1e-10);
        return Ok(OptimalOmegaReport {
            omegas: OmegaSet::Point { omega },
            risk,
            method: SolveMethod::Numeric,
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let (mu2, t2, s2) = (params.mu * params.mu, params.theta2, params.sigma2);
    let a = mu2 + t2;
    let root = |x: f64| libm::pow(x, 1.0 / depth as f64);
    let (omegas, risk) = match (params.kind, k == n) {
        (DataKind::RandomConstant, false) => {
            let beta = root(s2 * (nf - kf) / (nf * a + s2 * (nf - kf)));
            let risk = 0.5 * nf * (nf - kf) * a * s2 / (nf * a + (nf - kf) * s2);
            (
                OmegaSet::Pair {
                    low: 1.0 - beta,
                    high: 1.0 + beta,
                },
                risk,
            )
        }
        (DataKind::RandomConstant, true) => {
            let b = root(s2 / (nf * a + s2));
            let risk = 0.5 * nf * a * s2 / (nf * a + s2);
            (
                OmegaSet::Interval {
                    lo: 1.0 - b,
                    hi: 1.0 + b,
                },
                risk,
            )
        }
        (DataKind::Iid, false) => {
            let denom = mu2 * nf + (t2 + s2) * (nf - kf);
            let beta = root(s2 * (nf - kf) / denom);
            let risk = 0.5 * kf * t2 * s2 / (t2 + s2) + 0.5 * s2 * (nf - kf) * (mu2 * nf + t2 * (nf - kf)) / denom;
            (
                OmegaSet::Pair {
                    low: 1.0 - beta,
                    high: 1.0 + beta,
                },
                risk,
            )
        }
        (DataKind::Iid, true) => {
            let denom = mu2 * nf + t2 + s2;
            let b = root(s2 / denom);
            let risk = 0.5 * (nf - 1.0) * s2 * t2 / (s2 + t2) + 0.5 * s2 * (mu2 * nf + t2) / denom;
            (
                OmegaSet::Interval {
                    lo: 1.0 - b,
                    hi: 1.0 + b,
                },
                risk,
            )
        }
    };
    Ok(OptimalOmegaReport {
        omegas,
        risk,
        method: SolveMethod::ClosedForm,
    })
}

/// Minimizes `Σ sⱼcⱼ` over `Σ sⱼ = ‖a‖²`, `0 ≤ sⱼ ≤ ‖a‖²`.
///
/// The optimum is the vertex `‖a‖² e_{j*}` with `j* ∈ argmin c`; the smallest
/// index wins ties. Indices are zero-based.
pub fn lp_vertex_min(a: &[f64], c: &[f64]) -> Result<(usize, Vec<f64>)> {
    if a.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: c.len(),
        });
    }
    if c.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(&bad) = c.iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::OutOfRange {
            name: "c",
            value: bad,
            reason: "costs must be nonnegative",
        });
    }
    let mut j = 0;
    for (i, &v) in c.iter().enumerate() {
        if v < c[j] {
            j = i;
        }
    }
    let mass: f64 = a.iter().map(|x| x * x).sum();
    let mut s = vec![0.0; c.len()];
    s[j] = mass;
    Ok((j, s))
}

/// Risk of the scalar unrolled estimator `f(r²)` for each `r` in `r_grid`.
///
/// Requires `n = 1`, where both data models give the same risk.
pub fn scalar_landscape(depth: usize, omega: f64, params: &ModelParams, r_grid: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    check_depth(depth)?;
    if params.n != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: params.n,
        });
    }
    let a = params.mu * params.mu + params.theta2;
    Ok(r_grid
        .iter()
        .map(|&r| {
            let t = transfer_unchecked(r * r, depth, omega);
            0.5 * a * (t - 1.0) * (t - 1.0) + 0.5 * params.sigma2 * t * t
        })
        .collect())
}

/// Indices of strict local minima of a sampled curve.
///
/// An endpoint counts when its single neighbour is strictly larger.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    let len = values.len();
    match len {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }
    let mut out = Vec::new();
    if values[1] > values[0] {
        out.push(0);
    }
    for i in 1..len - 1 {
        if values[i - 1] > values[i] && values[i] < values[i + 1] {
            out.push(i);
        }
    }
    if values[len - 2] > values[len - 1] {
        out.push(len - 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{bilevel_estimator, unroll_estimator, UnrollConfig};
    use crate::risk::true_risk_matrix;
    use approx::assert_relative_eq;

    fn p(kind: DataKind, n: usize, mu: f64, t2: f64, s2: f64) -> ModelParams {
        ModelParams::new(n, mu, t2, s2, kind).unwrap()
    }

    fn risk_of(rep: &OptimalRiskReport, params: &ModelParams) -> f64 {
        true_risk_matrix(rep.estimator.as_ref().unwrap().matrix(), params).unwrap()
    }

    #[test]
    fn best_linear_scalar() {
        let params = p(DataKind::RandomConstant, 1, 1.0, 0.0, 1.0);
        let rep = best_linear(&params).unwrap();
        assert_relative_eq!(rep.risk, 0.25, epsilon = 1e-15);
        assert_relative_eq!(rep.estimator.unwrap().matrix()[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn best_linear_iid_matches_explicit_matrix() {
        let params = p(DataKind::Iid, 4, 0.7, 0.4, 0.3);
        let rep = best_linear(&params).unwrap();
        let c = rep.constants;
        let (mu2, t2, s2) = (0.49, 0.4, 0.3);
        let coef = s2 / (t2 + s2) * mu2 / (4.0 * mu2 + t2 + s2);
        let explicit = Matrix::from_fn(4, 4, |i, j| coef + if i == j { c.c3 } else { 0.0 });
        assert!(rep.estimator.as_ref().unwrap().matrix().sub(&explicit).max_abs() < 1e-14);
        assert_relative_eq!(risk_of(&rep, &params), rep.risk, max_relative = 1e-13);
    }

    #[test]
    fn bilevel_iid_small() {
        let params = p(DataKind::Iid, 2, 0.0, 1.0, 1.0);
        let rep = bilevel_optimal(&params, 1).unwrap();
        assert_relative_eq!(rep.risk, 0.75, epsilon = 1e-15);
        assert!(rep.attained);
        assert_relative_eq!(risk_of(&rep, &params), 0.75, epsilon = 1e-14);
        let from_r = bilevel_estimator(rep.regularizer.as_ref().unwrap());
        assert!(from_r.matrix().sub(rep.estimator.unwrap().matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn bilevel_const_is_infimum() {
        let params = p(DataKind::RandomConstant, 3, 1.0, 0.5, 2.0);
        let rep = bilevel_optimal(&params, 1).unwrap();
        assert_eq!(rep.risk, 2.0);
        assert!(!rep.attained && rep.estimator.is_none());
    }

    #[test]
    fn bilevel_iid_degenerate_matches_const() {
        let rep = bilevel_optimal(&p(DataKind::Iid, 1, 1.0, 0.0, 1.0), 1).unwrap();
        assert_relative_eq!(rep.risk, 0.25, epsilon = 1e-15);
        let lin = best_linear(&p(DataKind::RandomConstant, 1, 1.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(rep.risk, lin.risk, epsilon = 1e-15);
    }

    #[test]
    fn unrolling_examples() {
        let params = p(DataKind::RandomConstant, 5, 0.8, 0.3, 0.6);
        let rep = unrolling_optimal(&params, 2, 4, 1.0).unwrap();
        assert_relative_eq!(rep.risk, 0.5 * 0.6 * 3.0, epsilon = 1e-14);

        let params = p(DataKind::Iid, 2, 0.0, 1.0, 1.0);
        let rep = unrolling_optimal(&params, 1, 2, 1.0).unwrap();
        assert_relative_eq!(rep.risk, 0.75, epsilon = 1e-15);
        assert_eq!(rep.branch.placement, Some(Placement::AlignedFixed));

        let params = p(DataKind::RandomConstant, 1, 1.0, 0.0, 1.0);
        let rep = unrolling_optimal(&params, 1, 2, 1.0).unwrap();
        assert_relative_eq!(rep.risk, 0.25, epsilon = 1e-15);
        assert_eq!(rep.constants.c1_min, Some(0.5));
    }

    #[test]
    fn unrolling_reports_are_consistent() {
        let cases = [
            (DataKind::RandomConstant, 4, 2, 3, 0.3),
            (DataKind::RandomConstant, 3, 3, 5, 1.5),
            (DataKind::Iid, 4, 1, 3, 0.9),
            (DataKind::Iid, 3, 2, 4, 0.3),
            (DataKind::Iid, 2, 2, 7, 1.5),
            (DataKind::RandomConstant, 3, 1, 1, 0.9),
        ];
        for (kind, n, k, depth, w) in cases {
            let params = p(kind, n, 0.6, 0.5, 0.4);
            let rep = unrolling_optimal(&params, k, depth, w).unwrap();
            assert_relative_eq!(risk_of(&rep, &params), rep.risk, max_relative = 1e-10);
            let reg = rep.regularizer.as_ref().expect("preimage regularizer");
            let t = unroll_estimator(reg, &UnrollConfig::new(depth, w).unwrap());
            let diff = t.matrix().sub(rep.estimator.as_ref().unwrap().matrix()).max_abs();
            assert!(diff < 1e-8, "{kind} n={n} k={k} N={depth}: {diff}");
        }
    }

    #[test]
    fn optimal_omega_even_example() {
        let params = p(DataKind::RandomConstant, 2, 1.0, 0.0, 1.0);
        let rep = optimal_omega(&params, 1, 2).unwrap();
        let beta = libm::sqrt(1.0 / 3.0);
        assert_eq!(
            rep.omegas,
            OmegaSet::Pair {
                low: 1.0 - beta,
                high: 1.0 + beta
            }
        );
        assert_relative_eq!(rep.risk, 1.0 / 3.0, epsilon = 1e-15);
        let at = unrolling_optimal(&params, 1, 2, 1.0 - beta).unwrap().risk;
        assert_relative_eq!(at, rep.risk, max_relative = 1e-12);
    }

    #[test]
    fn optimal_omega_full_rank_is_best_linear() {
        for kind in [DataKind::RandomConstant, DataKind::Iid] {
            let params = p(kind, 3, 0.4, 0.7, 0.5);
            let rep = optimal_omega(&params, 3, 4).unwrap();
            assert_relative_eq!(rep.risk, best_linear(&params).unwrap().risk, max_relative = 1e-12);
            let w = rep.omegas.representative();
            assert_relative_eq!(
                unrolling_optimal(&params, 3, 4, w).unwrap().risk,
                rep.risk,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn optimal_omega_odd_is_numeric() {
        let params = p(DataKind::Iid, 3, 0.5, 0.3, 0.2);
        let rep = optimal_omega(&params, 1, 3).unwrap();
        assert_eq!(rep.method, SolveMethod::Numeric);
        for &w in &[0.2, 0.7, 1.0, 1.3, 1.9] {
            assert!(unrolling_optimal(&params, 1, 3, w).unwrap().risk >= rep.risk - 1e-12);
        }
    }

    #[test]
    fn lp_vertex() {
        let (j, s) = lp_vertex_min(&[1.0, 0.0, 0.0], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((j, s), (1, vec![0.0, 1.0, 0.0]));
        assert_eq!(lp_vertex_min(&[1.0, 1.0], &[2.0, 2.0]).unwrap().0, 0);
        assert_eq!(lp_vertex_min(&[0.0, 1.0, 0.0], &[1.0, 2.0, 0.0]).unwrap().0, 2);
        assert!(lp_vertex_min(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn landscape_at_zero_is_rho() {
        let params = p(DataKind::RandomConstant, 1, 1.0, 0.0004, 0.01);
        let v = scalar_landscape(3, 0.1, &params, &[0.0]).unwrap();
        let r = rho(3, 0.1);
        assert_relative_eq!(
            v[0],
            0.5 * 1.0004 * (r - 1.0) * (r - 1.0) + 0.005 * r * r,
            epsilon = 1e-15
        );
        assert!(scalar_landscape(3, 0.1, &p(DataKind::Iid, 2, 1.0, 0.0, 0.01), &[0.0]).is_err());
    }

    #[test]
    fn minima_detection() {
        assert_eq!(local_minima(&[1.0, 2.0, 1.0, 3.0, 2.5]), vec![0, 2, 4]);
        assert_eq!(local_minima(&[3.0, 2.0, 2.0, 3.0]), Vec::<usize>::new());
    }

    #[test]
    fn value_variants_agree() {
        for kind in [DataKind::RandomConstant, DataKind::Iid] {
            let params = p(kind, 5, 0.7, 0.3, 0.4);
            assert_eq!(
                best_linear_value(&params).unwrap().risk,
                best_linear(&params).unwrap().risk
            );
            for k in 1..=5 {
                let (a, b) = (
                    bilevel_optimal_value(&params, k).unwrap(),
                    bilevel_optimal(&params, k).unwrap(),
                );
                assert_eq!((a.risk, a.attained, a.branch), (b.risk, b.attained, b.branch));
                for depth in 1..=5 {
                    let a = unrolling_optimal_value(&params, k, depth, 0.8).unwrap();
                    let b = unrolling_optimal(&params, k, depth, 0.8).unwrap();
                    assert_eq!((a.risk, a.branch), (b.risk, b.branch));
                    assert!(a.estimator.is_none() && b.estimator.is_some());
                }
            }
        }
    }
}
