//! Goodness-of-fit helpers: chi-square and Kolmogorov-Smirnov p-values.

/// Lanczos approximation of `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5 - (x + 0.5) * (x + 5.5).ln();
    let mut ser = 1.000000000190015;
    for g in G {
        y += 1.0;
        ser += g / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Regularized upper incomplete gamma `Q(a, x)`, by series or continued
/// fraction depending on the regime.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x < 0.0 || a <= 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        // P by series, Q = 1 - P.
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        1.0 - sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        // Q by Lentz continued fraction.
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / 1e-300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < 1e-300 {
                d = 1e-300;
            }
            c = b + an / c;
            if c.abs() < 1e-300 {
                c = 1e-300;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        (-x + a * x.ln() - ln_gamma(a)).exp() * h
    }
}

/// p-value of a chi-square statistic with `dof` degrees of freedom.
pub fn chi_square_p_value(chi2: f64, dof: usize) -> f64 {
    gamma_q(dof as f64 / 2.0, chi2 / 2.0)
}

/// Pearson chi-square test of observed counts against expected counts.
pub fn chi_square_test(observed: &[f64], expected: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let chi2: f64 = observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum();
    let dof = expected.iter().filter(|&&e| e > 0.0).count().saturating_sub(1);
    (chi2, chi_square_p_value(chi2, dof))
}

/// Asymptotic Kolmogorov distribution tail `Q(lambda) = 2 sum (-1)^(j-1)
/// exp(-2 j^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..200 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `data` against a CDF; returns `(D, p)`.
pub fn ks_test<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> (f64, f64) {
    data.sort_by(|a, b| a.partial_cmp(b).expect("comparable data"));
    let n = data.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in data.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - c).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        // Q(1, x) = exp(-x)
        assert!((gamma_q(1.0, 2.0) - (-2.0f64).exp()).abs() < 1e-12);
        // Chi-square with 2 dof: p = exp(-x/2).
        assert!((chi_square_p_value(4.0, 2) - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn chi_square_of_perfect_fit() {
        let obs = [10.0, 20.0, 30.0];
        let (chi2, p) = chi_square_test(&obs, &obs);
        assert_eq!(chi2, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_uniform_grid_is_uniform() {
        let mut data: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
        let (d, p) = ks_test(&mut data, |x| x.clamp(0.0, 1.0));
        assert!(d < 1e-3);
        assert!(p > 0.999);
    }

    #[test]
    fn kolmogorov_tail_known_point() {
        // Q(0.8276...) ~ 0.5 (median of the Kolmogorov distribution).
        let q = kolmogorov_q(0.82757);
        assert!((q - 0.5).abs() < 1e-3, "{q}");
    }
}
