//! Gauss-Legendre quadrature: fixed rules, adaptive bisection, and small
//! tensor-product rules for the low-dimensional eigenvalue integrals used as
//! oracles.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Nodes and weights of the `m`-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are found by Newton iteration on the Legendre polynomial, seeded
/// with the Chebyshev-angle approximation.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
        let (_, d) = legendre_with_derivative(m, 0.0);
        weights[m / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel rule used by the adaptive integrator.
const PANEL_POINTS: usize = 16;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_POINTS))
}

/// Fixed Gauss-Legendre quadrature of `f` on `[a, b]` with `m` points.
pub fn fixed_quad<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let c = 0.5 * (b - a);
    let d = 0.5 * (b + a);
    let mut acc = 0.0;
    for i in 0..m {
        acc += w[i] * f(c * x[i] + d);
    }
    c * acc
}

/// Adaptive Gauss-Legendre quadrature by interval bisection: a panel is
/// accepted once bisecting it changes its estimate by less than its share of
/// the relative tolerance.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let (x, w) = panel_rule();
    let panel = |lo: f64, hi: f64| -> f64 {
        let c = 0.5 * (hi - lo);
        let d = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for i in 0..PANEL_POINTS {
            acc += w[i] * f(c * x[i] + d);
        }
        c * acc
    };
    let whole = panel(a, b);
    let scale = whole.abs().max(1e-300);
    let mut total = 0.0;
    // (lo, hi, estimate, depth)
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut evaluations = 1usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        evaluations += 2;
        if evaluations > 200_000 {
            return Err(Error::Quadrature(format!(
                "panel budget exhausted on [{a}, {b}]"
            )));
        }
        let refined = left + right;
        let local_tol = rel_tol * scale * ((hi - lo) / (b - a)).max(1e-12);
        if (refined - est).abs() <= local_tol || depth >= 48 {
            if depth >= 48 && (refined - est).abs() > 1e3 * local_tol {
                return Err(Error::Quadrature(format!(
                    "no convergence near [{lo}, {hi}]"
                )));
            }
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(total)
}

/// Tensor-product Gauss-Legendre quadrature of `f` over `[a, b]^dim`.
pub fn tensor_quad<F: Fn(&[f64]) -> f64>(f: &F, a: f64, b: f64, dim: usize, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let c = 0.5 * (b - a);
    let d = 0.5 * (b + a);
    let mut point = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    let mut acc = 0.0;
    loop {
        let mut weight = 1.0;
        for k in 0..dim {
            point[k] = c * x[idx[k]] + d;
            weight *= w[idx[k]];
        }
        acc += weight * f(&point);
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == dim {
                return acc * c.powi(dim as i32);
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_nodes_reproduce_known_rule() {
        let (x, w) = gauss_legendre(3);
        assert!((x[0] + (3.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert!((x[1]).abs() < 1e-14);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-14);
        let wsum: f64 = gauss_legendre(20).1.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn fixed_quad_polynomial_exactness() {
        // 16-point rule integrates degree-31 polynomials exactly.
        let v = fixed_quad(|t| t.powi(10), 0.0, 1.0, 16);
        assert!((v - 1.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |t: f64| (-200.0 * (t - 0.3).powi(2)).exp();
        let v = adaptive_quad(&f, 0.0, 1.0, 1e-12).unwrap();
        let exact = (std::f64::consts::PI / 200.0).sqrt() / 2.0
            * (erf_approx((0.7) * (200.0f64).sqrt()) + erf_approx(0.3 * (200.0f64).sqrt()));
        assert!((v / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_quad_separable() {
        let v = tensor_quad(&|p: &[f64]| p[0] * p[1] * p[2], 0.0, 1.0, 3, 8);
        assert!((v - 0.125).abs() < 1e-14);
    }

    // Abramowitz-Stegun 7.1.26, enough for the test above.
    fn erf_approx(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x);
        1.0 - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp()
    }
}
