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

//! One-dimensional minimization on a bracket.

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` and returns the best point
/// seen together with its value.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fc <= fd { (c, fc) } else { (d, fd) };
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best_f {
                best_x = d;
                best_f = fd;
            }
        }
        // The bracket stops shrinking once it reaches float resolution.
        if c >= d {
            break;
        }
    }
    (best_x, best_f)
}

/// Scans `points` equispaced nodes of `[lo, hi]`, then refines around the
/// smallest node with [`golden_section`]. Ties keep the leftmost node.
pub fn grid_then_golden(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64) {
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| if i == points - 1 { hi } else { lo + step * i as f64 };
    let (mut best_i, mut best_f) = (0, f(lo));
    for i in 1..points {
        let v = f(node(i));
        if v < best_f {
            best_i = i;
            best_f = v;
        }
    }
    let a = node(best_i.saturating_sub(1));
    let b = node((best_i + 1).min(points - 1));
    let (x, fx) = golden_section(&mut f, a, b, tol);
    if fx <= best_f {
        (x, fx)
    } else {
        (node(best_i), best_f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 2.0, -1.0, 4.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_finds_global_of_two_wells() {
        let f = |x: f64| ((x * x - 1.0) * (x * x - 1.0)) + 0.1 * x;
        let (x, _) = grid_then_golden(f, -2.0, 2.0, 401, 1e-12);
        assert!(x < 0.0 && (x + 1.0).abs() < 0.05);
    }

    #[test]
    fn endpoint_minimum() {
        let (x, fx) = grid_then_golden(|x| x, 1.0, 3.0, 11, 1e-12);
        assert!((x - 1.0).abs() < 1e-9);
        assert!((fx - 1.0).abs() < 1e-9);
    }
}
