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

//! The scalar transfer function of unrolled gradient descent, its extreme
//! values, and spectral membership tests for both estimator classes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::LinearEstimator;
use crate::linalg::{jacobi_eigen, powi, spectral_compose, Matrix};
use crate::minimize::grid_then_golden;

/// Default relative tolerance of the membership tests.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Symmetric eigendecomposition `T = V diag(λ) Vᵀ` with `λ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvectors: Matrix,
    pub eigenvalues: Vec<f64>,
}

impl SpectralDecomposition {
    /// Orders eigenpairs by decreasing eigenvalue.
    pub fn sorted(vectors: Matrix, values: Vec<f64>) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return SpectralDecomposition {
                eigenvectors: vectors,
                eigenvalues: values,
            };
        }
        let eigenvectors = Matrix::from_fn(vectors.rows(), n, |r, c| vectors[(r, order[c])]);
        let eigenvalues = order.iter().map(|&i| values[i]).collect();
        SpectralDecomposition {
            eigenvectors,
            eigenvalues,
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        spectral_compose(&self.eigenvectors, &self.eigenvalues)
    }
}

/// Eigendecomposition of a symmetric estimator.
///
/// Uses the cached decomposition when the estimator carries one.
pub fn sym_eig(t: &LinearEstimator) -> Result<SpectralDecomposition> {
    let m = t.matrix();
    let asymmetry = m.asymmetry();
    if asymmetry > 1e-9 * m.frobenius_norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if let Some(s) = t.cached_spectral() {
        return Ok(s.clone());
    }
    let (values, vectors) = jacobi_eigen(&m.symmetric_part());
    Ok(SpectralDecomposition {
        eigenvectors: vectors,
        eigenvalues: values,
    })
}

/// `f(s) = (1 − (1 − ω(1+s))ᴺ)/(1+s)`, the eigenvalue of the unrolled map
/// belonging to an eigenvalue `s` of `RᵀR`.
pub fn transfer_f(s: f64, depth: usize, omega: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            reason: "spectrum of a Gram matrix is nonnegative",
        });
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            name: "depth",
            value: 0.0,
            reason: "at least one gradient step is required",
        });
    }
    Ok(transfer_unchecked(s, depth, omega))
}

pub(crate) fn transfer_unchecked(s: f64, depth: usize, omega: f64) -> f64 {
    let g = 1.0 + s;
    let step = omega * g;
    if step >= 0.25 {
        (1.0 - powi(1.0 - step, depth)) / g
    } else {
        // Near r = 1 the closed form cancels; sum ω Σ rʲ instead.
        omega * geometric_sum(1.0 - step, depth)
    }
}

/// `1 + r + … + r^{N−1}`.
fn geometric_sum(r: f64, depth: usize) -> f64 {
    let mut acc = 0.0;
    for _ in 0..depth {
        acc = acc * r + 1.0;
    }
    acc
}

/// `ρ = 1 − (1−ω)ᴺ = f(0)`.
pub fn rho(depth: usize, omega: f64) -> f64 {
    1.0 - powi(1.0 - omega, depth)
}

/// Lower and upper bounds `(a_N, b_N)` on the minimum over `r` of
/// `(1 − rᴺ)/(1 − r)` for odd `N`.
pub fn hn_bounds(depth: usize) -> Result<(f64, f64)> {
    if depth % 2 == 0 {
        return Err(Error::EvenDepth(depth));
    }
    let n = depth as f64;
    let ln = libm::log(n);
    let a = 0.5 + 1.0 / (n + 1.0);
    let b = 0.5 + (1.0 + ln / 2.0) / (n * (2.0 - ln / n));
    Ok((a, b))
}

/// Which description of `c` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CnRegime {
    /// `f` dips below `f(0)`; `c` is an interior minimum between the bounds.
    Bounds,
    /// `f` is nondecreasing on `[0, ∞)`, so `c = ρ`.
    Else,
}

/// The smallest eigenvalue an odd-depth unrolled estimator can have.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CnBounds {
    /// `ω·a_N`.
    pub lower: f64,
    /// `ω·b_N`.
    pub upper: f64,
    pub regime: CnRegime,
    pub value: f64,
    /// Minimizer `s ≥ 0` of `f` (zero in the `Else` regime).
    pub argmin_s: f64,
}

const C_GRID: usize = 10_000;
const C_R_MAX: f64 = 50.0;

/// `c = min_{s ≥ 0} f(s)` for odd `N` and `0 < ω < 2`.
///
/// With `r = 1 − ω(1+s)` the objective is `ω(1 − rᴺ)/(1 − r)` on
/// `r ≤ 1 − ω`. The slope at `s = 0` has the sign of
/// `((N−1)ω + 1)(1−ω)^{N−1} − 1`; when that is nonnegative `f` never drops
/// below `f(0)`, otherwise the minimum is located on a grid over
/// `[−50, 1−ω]` and polished by golden-section search.
pub fn c_constant(depth: usize, omega: f64) -> Result<CnBounds> {
    if depth % 2 == 0 {
        return Err(Error::EvenDepth(depth));
    }
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::OutOfRange {
            name: "omega",
            value: omega,
            reason: "c is defined for 0 < omega < 2",
        });
    }
    let (a, b) = hn_bounds(depth)?;
    let (lower, upper) = (omega * a, omega * b);
    let n = depth as f64;
    let slope_test = ((n - 1.0) * omega + 1.0) * powi(1.0 - omega, depth - 1);
    if slope_test >= 1.0 {
        return Ok(CnBounds {
            lower,
            upper,
            regime: CnRegime::Else,
            value: rho(depth, omega),
            argmin_s: 0.0,
        });
    }
    let h = |r: f64| omega * geometric_sum(r, depth);
    let (r_star, value) = grid_then_golden(h, -C_R_MAX, 1.0 - omega, C_GRID, 1e-12);
    let argmin_s = ((1.0 - r_star) / omega - 1.0).max(0.0);
    Ok(CnBounds {
        lower,
        upper,
        regime: CnRegime::Bounds,
        value: value.min(rho(depth, omega)),
        argmin_s,
    })
}

/// A named condition of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Condition {
    /// `T = Tᵀ`.
    Symmetric,
    /// All eigenvalues strictly positive.
    PositiveDefinite,
    /// Eigenvalues at most the class ceiling (`1` or `ρ`).
    UpperBound,
    /// Eigenvalues at least the floor `c`.
    LowerBound,
    /// The eigenvalue `1` (bilevel) or `ρ` (unrolled) has multiplicity at
    /// least `n − k`.
    EigenMultiplicity,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Symmetric => "symmetric",
            Condition::PositiveDefinite => "positive-definite",
            Condition::UpperBound => "upper-bound",
            Condition::LowerBound => "lower-bound",
            Condition::EigenMultiplicity => "eigen-multiplicity",
        }
    }
}

impl core::fmt::Display for Condition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipVerdict {
    pub member: bool,
    pub failures: Vec<Condition>,
    pub tolerance: f64,
}

impl MembershipVerdict {
    fn from_failures(failures: Vec<Condition>, tolerance: f64) -> Self {
        MembershipVerdict {
            member: failures.is_empty(),
            failures,
            tolerance,
        }
    }
}

fn close(lambda: f64, target: f64, tol: f64) -> bool {
    (lambda - target).abs() <= tol * target.abs().max(1.0)
}

/// Symmetry check plus the spectrum of the symmetric part.
fn symmetric_spectrum(t: &LinearEstimator, tol: f64, failures: &mut Vec<Condition>) -> Vec<f64> {
    let m = t.matrix();
    if m.asymmetry() > tol * m.frobenius_norm().max(1.0) {
        failures.push(Condition::Symmetric);
        return jacobi_eigen(&m.symmetric_part()).0;
    }
    match t.cached_spectral() {
        Some(s) => s.eigenvalues.clone(),
        None => jacobi_eigen(&m.symmetric_part()).0,
    }
}

fn multiplicity(values: &[f64], target: f64, tol: f64) -> usize {
    values.iter().filter(|&&l| close(l, target, tol)).count()
}

/// Is `T` a bilevel estimator `(I + RᵀR)⁻¹` with `R ∈ ℝ^{k×n}`?
///
/// Equivalent to `T` symmetric, `0 ≺ T ⪯ I`, and the eigenvalue `1` having
/// multiplicity at least `n − k`. All violated conditions are reported.
pub fn membership_bilevel(t: &LinearEstimator, k: usize, tol: f64) -> MembershipVerdict {
    let mut failures = Vec::new();
    let values = symmetric_spectrum(t, tol, &mut failures);
    if values.iter().any(|&l| !(l > 0.0)) {
        failures.push(Condition::PositiveDefinite);
    }
    if values.iter().any(|&l| l > 1.0 && !close(l, 1.0, tol)) {
        failures.push(Condition::UpperBound);
    }
    let n = values.len();
    if multiplicity(&values, 1.0, tol) < n.saturating_sub(k) {
        failures.push(Condition::EigenMultiplicity);
    }
    MembershipVerdict::from_failures(failures, tol)
}

/// Is `T` reachable by `N` unrolled gradient steps with stepsize `ω` and a
/// `k×n` regularizer?
///
/// Even `N`: symmetric, `T ⪯ ρI`, `ρ` of multiplicity at least `n − k`.
/// Odd `N`: symmetric, `T ⪰ cI`, same multiplicity condition. For `N = 1`
/// the map is always `ωI`, so every eigenvalue must equal `ω`.
pub fn membership_unrolling(
    t: &LinearEstimator,
    k: usize,
    depth: usize,
    omega: f64,
    tol: f64,
) -> Result<MembershipVerdict> {
    if depth == 0 {
        return Err(Error::OutOfRange {
            name: "depth",
            value: 0.0,
            reason: "at least one gradient step is required",
        });
    }
    let floor = if depth % 2 == 1 && depth > 1 {
        Some(c_constant(depth, omega)?.value)
    } else {
        None
    };
    let mut failures = Vec::new();
    let values = symmetric_spectrum(t, tol, &mut failures);
    let n = values.len();
    let r = rho(depth, omega);
    if depth == 1 {
        if multiplicity(&values, omega, tol) < n {
            failures.push(Condition::EigenMultiplicity);
        }
        return Ok(MembershipVerdict::from_failures(failures, tol));
    }
    match floor {
        None => {
            if values.iter().any(|&l| l > r && !close(l, r, tol)) {
                failures.push(Condition::UpperBound);
            }
        }
        Some(c) => {
            if values.iter().any(|&l| l < c && !close(l, c, tol)) {
                failures.push(Condition::LowerBound);
            }
        }
    }
    if multiplicity(&values, r, tol) < n.saturating_sub(k) {
        failures.push(Condition::EigenMultiplicity);
    }
    Ok(MembershipVerdict::from_failures(failures, tol))
}

/// Smallest `s ≥ 0` on the monotone piece of `f` that starts at `from` and
/// moves in direction of increasing `s`, solving `f(s) = target`.
///
/// `decreasing` says whether `f` falls or rises along that piece. Returns
/// `None` if the target is not bracketed within a generous range.
pub(crate) fn invert_transfer(
    target: f64,
    depth: usize,
    omega: f64,
    from: f64,
    decreasing: bool,
    limit: Option<f64>,
) -> Option<f64> {
    let f = |s: f64| transfer_unchecked(s, depth, omega);
    let passed = |v: f64| if decreasing { v <= target } else { v >= target };
    let mut lo = from;
    if passed(f(lo)) {
        return if close(f(lo), target, 1e-12) { Some(lo) } else { None };
    }
    let mut hi = match limit {
        Some(h) => h,
        None => {
            let mut h = from + 1.0;
            let mut tries = 0;
            while !passed(f(h)) {
                h = from + 2.0 * (h - from);
                tries += 1;
                if tries > 200 {
                    return None;
                }
            }
            h
        }
    };
    if !passed(f(hi)) {
        return if close(f(hi), target, 1e-9) { Some(hi) } else { None };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if passed(f(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{bilevel_estimator, unroll_estimator, Regularizer, UnrollConfig};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> LinearEstimator {
        LinearEstimator::new(Matrix::diag(v)).unwrap()
    }

    #[test]
    fn transfer_values() {
        assert_relative_eq!(transfer_f(1.0, 2, 0.1).unwrap(), 0.18, epsilon = 1e-15);
        for &s in &[0.0, 0.3, 7.0] {
            assert_relative_eq!(transfer_f(s, 1, 0.7).unwrap(), 0.7, epsilon = 1e-15);
        }
        assert_eq!(transfer_f(0.0, 5, 0.3).unwrap(), rho(5, 0.3));
        assert!(transfer_f(-1e-3, 2, 0.1).is_err());
    }

    #[test]
    fn transfer_branches_agree() {
        for &w in &[0.01, 0.1, 0.2] {
            for n in 1..40 {
                let s = 0.25 / w - 1.0;
                let direct = (1.0 - powi(1.0 - w * (1.0 + s), n)) / (1.0 + s);
                assert_relative_eq!(transfer_unchecked(s, n, w), direct, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(4, 1.0), 1.0);
        assert_eq!(rho(2, 0.5), 0.75);
        assert_relative_eq!(rho(3, 1.8), 1.512, epsilon = 1e-15);
    }

    #[test]
    fn hn_bound_values() {
        let (a, b) = hn_bounds(3).unwrap();
        assert_eq!(a, 0.75);
        let expected = 0.5 + (1.0 + libm::log(3.0) / 2.0) / (3.0 * (2.0 - libm::log(3.0) / 3.0));
        assert_relative_eq!(b, expected, epsilon = 1e-15);
        assert!((b - 0.8161).abs() < 1e-4);
        let (a, b) = hn_bounds(101).unwrap();
        assert!((a - 0.5).abs() < 0.02 && (b - 0.5).abs() < 0.02);
        assert_eq!(hn_bounds(4), Err(Error::EvenDepth(4)));
    }

    #[test]
    fn c_depth_one_is_omega() {
        let c = c_constant(1, 0.37).unwrap();
        assert_eq!(c.value, 0.37);
        assert_eq!(c.regime, CnRegime::Else);
    }

    #[test]
    fn c_small_step_dips_below_rho() {
        let c = c_constant(3, 0.1).unwrap();
        assert_eq!(c.regime, CnRegime::Bounds);
        // (1 + r + r²) is minimized at r = −1/2 with value 3/4.
        assert_relative_eq!(c.value, 0.075, epsilon = 1e-13);
        assert_relative_eq!(c.argmin_s, 1.5 / 0.1 - 1.0, epsilon = 1e-5);
        assert!(c.value < rho(3, 0.1));
    }

    #[test]
    fn c_large_step_is_rho() {
        let c = c_constant(3, 1.8).unwrap();
        assert_eq!(c.regime, CnRegime::Else);
        assert_eq!(c.value, rho(3, 1.8));
        assert_relative_eq!(c.lower, 1.35, epsilon = 1e-14);
        assert!((c.upper - 1.469).abs() < 1e-3);
    }

    #[test]
    fn c_rejects() {
        assert_eq!(c_constant(2, 0.5), Err(Error::EvenDepth(2)));
        assert!(c_constant(3, 2.0).is_err());
        assert!(c_constant(3, 0.0).is_err());
    }

    #[test]
    fn bilevel_membership_examples() {
        assert!(membership_bilevel(&diag(&[0.5, 0.5]), 2, DEFAULT_TOL).member);
        let v = membership_bilevel(&diag(&[0.5, 0.5]), 1, DEFAULT_TOL);
        assert_eq!(v.failures, vec![Condition::EigenMultiplicity]);
        let v = membership_bilevel(&diag(&[-1.0, -1.0]), 2, DEFAULT_TOL);
        assert_eq!(v.failures, vec![Condition::PositiveDefinite]);
        let v = membership_bilevel(&diag(&[1.5, 1.0]), 1, DEFAULT_TOL);
        assert_eq!(v.failures, vec![Condition::UpperBound]);
    }

    #[test]
    fn unrolling_membership_examples() {
        let r = rho(2, 0.5);
        assert!(
            membership_unrolling(&diag(&[r, r, r]), 0, 2, 0.5, DEFAULT_TOL)
                .unwrap()
                .member
        );
        let v = membership_unrolling(&diag(&[0.8, 0.75]), 1, 2, 0.5, DEFAULT_TOL).unwrap();
        assert_eq!(v.failures, vec![Condition::UpperBound]);

        let r3 = rho(3, 0.1);
        assert!(
            membership_unrolling(&diag(&[0.2, r3]), 1, 3, 0.1, DEFAULT_TOL)
                .unwrap()
                .member
        );
        let v = membership_unrolling(&diag(&[0.05, r3]), 1, 3, 0.1, DEFAULT_TOL).unwrap();
        assert_eq!(v.failures, vec![Condition::LowerBound]);

        let v = membership_unrolling(&diag(&[0.3, 0.31]), 2, 1, 0.3, DEFAULT_TOL).unwrap();
        assert_eq!(v.failures, vec![Condition::EigenMultiplicity]);
    }

    #[test]
    fn asymmetric_input_is_named() {
        let t = LinearEstimator::new(Matrix::from_row_major(2, 2, vec![0.5, 0.1, -0.1, 0.5])).unwrap();
        let v = membership_bilevel(&t, 2, DEFAULT_TOL);
        assert_eq!(v.failures, vec![Condition::Symmetric]);
        assert!(sym_eig(&t).is_err());
    }

    #[test]
    fn constructed_estimators_are_members() {
        let r = Regularizer::new(Matrix::from_row_major(2, 3, vec![0.3, -1.2, 0.4, 2.0, 0.1, -0.7])).unwrap();
        assert!(membership_bilevel(&bilevel_estimator(&r), 2, DEFAULT_TOL).member);
        for &(n, w) in &[(2, 0.4), (3, 0.1), (3, 1.7), (5, 0.9), (1, 0.8)] {
            let t = unroll_estimator(&r, &UnrollConfig::new(n, w).unwrap());
            let v = membership_unrolling(&t, 2, n, w, DEFAULT_TOL).unwrap();
            assert!(v.member, "N={n} ω={w}: {:?}", v.failures);
        }
    }

    #[test]
    fn sym_eig_sorts() {
        let d = sym_eig(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn inversion_hits_target() {
        let (n, w) = (4, 0.3);
        let s = invert_transfer(0.2, n, w, 0.0, true, None).unwrap();
        assert_relative_eq!(transfer_unchecked(s, n, w), 0.2, epsilon = 1e-12);
        let c = c_constant(3, 0.1).unwrap();
        let s = invert_transfer(0.5, 3, 0.1, c.argmin_s, false, None).unwrap();
        assert!(s > c.argmin_s);
        assert_relative_eq!(transfer_unchecked(s, 3, 0.1), 0.5, epsilon = 1e-12);
    }
}
