//! Unbiased cumulant estimators (k-statistics) and jackknife errors.
//!
//! Rather than hard-coding the classical formulas, the coefficients of each
//! k-statistic in the power-sum basis are solved from first principles: for
//! iid samples, `E[prod_i S_{r_i}]` expands over set partitions of the
//! factors with falling-factorial counting, and requiring `E[k_l] = kappa_l`
//! gives a small linear system over the integer partitions of `l`. The
//! unbiasedness of the result is pinned by an exact enumeration test.

use crate::error::{Error, Result};
use crate::rational::{factorial, to_f64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub const MAX_ORDER: usize = 6;

/// Point estimate with jackknife standard error.
#[derive(Debug, Clone, Copy)]
pub struct CumulantEstimate {
    pub order: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Integer partitions of `l`, parts in descending order.
fn partitions(l: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(cap)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(l, l, &mut Vec::new(), &mut out);
    out
}

/// Visit every set partition of `{0..k-1}` as an assignment vector
/// (restricted growth strings).
fn for_each_set_partition<F: FnMut(&[usize], usize)>(k: usize, mut visit: F) {
    let mut assign = vec![0usize; k];
    fn rec<F: FnMut(&[usize], usize)>(
        i: usize,
        k: usize,
        blocks: usize,
        assign: &mut Vec<usize>,
        visit: &mut F,
    ) {
        if i == k {
            visit(assign, blocks);
            return;
        }
        for b in 0..=blocks {
            assign[i] = b;
            rec(i + 1, k, blocks.max(b + 1), assign, visit);
        }
    }
    rec(0, k, 0, &mut assign, &mut visit);
}

/// Falling factorial `n (n-1) ... (n-b+1)` as a rational.
fn falling(n: usize, b: usize) -> Rat {
    let mut acc = BigInt::one();
    for j in 0..b {
        acc *= BigInt::from(n - j);
    }
    Rat::from_integer(acc)
}

/// Number of set partitions of `{1..l}` whose block sizes form `lambda`.
fn set_partition_count(lambda: &[usize]) -> BigInt {
    let l: usize = lambda.iter().sum();
    let mut count = factorial(l as u64);
    for &part in lambda {
        count /= factorial(part as u64);
    }
    let mut run = 1usize;
    for i in 1..=lambda.len() {
        if i < lambda.len() && lambda[i] == lambda[i - 1] {
            run += 1;
        } else {
            count /= factorial(run as u64);
            run = 1;
        }
    }
    count
}

/// Coefficients `c_lambda` such that `k_l = sum_lambda c_lambda prod_i
/// S_{lambda_i}` is unbiased for `kappa_l` at sample size `n`.
pub fn kstat_coefficients(l: usize, n: usize) -> Vec<(Vec<usize>, Rat)> {
    let parts = partitions(l);
    let index = |lam: &[usize]| -> usize {
        parts.iter().position(|p| p == lam).expect("partition of l")
    };
    let dim = parts.len();
    // Row rho, column lambda: coefficient of the mu'-monomial of type rho in
    // E[prod S_{lambda_i}].
    let mut matrix = vec![vec![Rat::zero(); dim]; dim];
    for (col, lam) in parts.iter().enumerate() {
        let k = lam.len();
        for_each_set_partition(k, |assign, blocks| {
            let mut sums = vec![0usize; blocks];
            for (i, &b) in assign.iter().enumerate() {
                sums[b] += lam[i];
            }
            sums.sort_unstable_by(|a, b| b.cmp(a));
            let row = index(&sums);
            matrix[row][col] += falling(n, blocks);
        });
    }
    // Target: kappa_l in raw moments, collected by partition type:
    // sum over set partitions sigma of {1..l}: (-1)^(#sigma-1) (#sigma-1)!.
    let mut target = vec![Rat::zero(); dim];
    for (row, rho) in parts.iter().enumerate() {
        let b = rho.len();
        let sign = if (b - 1) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        target[row] = Rat::from_integer(
            sign * factorial(b as u64 - 1) * set_partition_count(rho),
        );
    }
    // Solve matrix * c = target by exact Gaussian elimination.
    let mut aug: Vec<Vec<Rat>> = matrix
        .into_iter()
        .zip(target)
        .map(|(mut row, t)| {
            row.push(t);
            row
        })
        .collect();
    for col in 0..dim {
        let pivot_row = (col..dim)
            .find(|&r| !aug[r][col].is_zero())
            .expect("k-statistic system is nonsingular");
        aug.swap(col, pivot_row);
        let pivot = aug[col][col].clone();
        for entry in aug[col].iter_mut() {
            *entry /= &pivot;
        }
        for r in 0..dim {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=dim {
                    let delta = &factor * &aug[col][c];
                    aug[r][c] -= delta;
                }
            }
        }
    }
    parts
        .into_iter()
        .enumerate()
        .map(|(i, lam)| (lam, aug[i][dim].clone()))
        .collect()
}

/// Evaluate one k-statistic from power sums `sums[r-1] = sum_i x_i^r`.
fn eval_kstat(coeffs: &[(Vec<usize>, f64)], sums: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (lam, c) in coeffs {
        let mut prod = *c;
        for &part in lam {
            prod *= sums[part - 1];
        }
        acc += prod;
    }
    acc
}

fn coefficients_f64(l: usize, n: usize) -> Vec<(Vec<usize>, f64)> {
    kstat_coefficients(l, n)
        .into_iter()
        .map(|(lam, c)| (lam, to_f64(&c)))
        .collect()
}

/// Unbiased k-statistics up to `min(lmax, 6)` with delete-one jackknife
/// standard errors. Values are centered about the sample mean before the
/// power sums are formed (k-statistics of order >= 2 are shift-invariant;
/// the mean is restored for the order-1 estimate).
pub fn estimate_cumulants(values: &[f64], lmax: usize) -> Result<Vec<CumulantEstimate>> {
    let lmax = lmax.min(MAX_ORDER);
    let n = values.len();
    if n < 10 * lmax.max(1) {
        return Err(Error::InsufficientSamples { required: 10 * lmax.max(1), got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let max_r = lmax.max(1);
    let mut sums = vec![0.0; max_r];
    for &y in &centered {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= y;
            *s += p;
        }
    }
    let mut out = Vec::with_capacity(lmax);
    for l in 1..=lmax {
        let coeffs_full = coefficients_f64(l, n);
        let coeffs_loo = coefficients_f64(l, n - 1);
        let full = eval_kstat(&coeffs_full, &sums);
        // Delete-one jackknife over the centered data.
        let mut loo_sum = 0.0;
        let mut loo_sq = 0.0;
        let mut loo = vec![0.0; max_r];
        for &y in &centered {
            let mut p = 1.0;
            for (r, s) in loo.iter_mut().enumerate() {
                p *= y;
                *s = sums[r] - p;
            }
            let v = eval_kstat(&coeffs_loo, &loo);
            loo_sum += v;
            loo_sq += v * v;
        }
        let loo_mean = loo_sum / n as f64;
        let var = (loo_sq / n as f64 - loo_mean * loo_mean).max(0.0) * (n as f64 - 1.0);
        let estimate = if l == 1 { full + mean } else { full };
        out.push(CumulantEstimate {
            order: l,
            estimate,
            std_error: var.sqrt(),
            n_samples: n,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial, rat_i64};

    #[test]
    fn classical_low_order_forms() {
        // k_2 = (n S_2 - S_1^2)/(n(n-1)) -- compare coefficients at n = 7.
        let c = kstat_coefficients(2, 7);
        for (lam, v) in &c {
            match lam.as_slice() {
                [2] => assert_eq!(v, &rat_i64(7, 42)),
                [1, 1] => assert_eq!(v, &rat_i64(-1, 42)),
                _ => unreachable!(),
            }
        }
        // k_3 = (2 S_1^3 - 3 n S_1 S_2 + n^2 S_3)/(n(n-1)(n-2)) at n = 5.
        let c = kstat_coefficients(3, 5);
        for (lam, v) in &c {
            match lam.as_slice() {
                [3] => assert_eq!(v, &rat_i64(25, 60)),
                [2, 1] => assert_eq!(v, &rat_i64(-15, 60)),
                [1, 1, 1] => assert_eq!(v, &rat_i64(2, 60)),
                _ => unreachable!(),
            }
        }
    }

    /// Exact cumulants of a finite population from its raw moments.
    fn population_cumulants(pop: &[i64], lmax: usize) -> Vec<Rat> {
        let n = pop.len() as i64;
        let raw = |r: usize| -> Rat {
            let s: i64 = pop.iter().map(|&x| x.pow(r as u32)).sum();
            rat_i64(s, n)
        };
        let mut kappa: Vec<Rat> = Vec::new();
        for l in 1..=lmax {
            // kappa_l = mu'_l - sum_{j=1}^{l-1} C(l-1, j-1) kappa_j mu'_{l-j}
            let mut v = raw(l);
            for j in 1..l {
                v -= Rat::from_integer(binomial(l as u64 - 1, j as u64 - 1))
                    * &kappa[j - 1]
                    * raw(l - j);
            }
            kappa.push(v);
        }
        kappa
    }

    #[test]
    fn unbiasedness_by_exact_enumeration() {
        // Average k_l over every sample of size m drawn (with replacement,
        // equal weights) from a 3-point population; must equal kappa_l
        // exactly. This pins the whole coefficient pipeline.
        let pop = [0i64, 1, 3];
        for (l, m) in [(1usize, 3usize), (2, 4), (3, 4), (4, 5), (5, 6), (6, 7)] {
            let coeffs = kstat_coefficients(l, m);
            let kappa = population_cumulants(&pop, l);
            let mut total = Rat::zero();
            let count = (pop.len() as u64).pow(m as u32);
            for idx in 0..count {
                let mut rest = idx;
                let mut sums = vec![0i64; l];
                for _ in 0..m {
                    let x = pop[(rest % 3) as usize];
                    rest /= 3;
                    let mut p = 1i64;
                    for s in sums.iter_mut() {
                        p *= x;
                        *s += p;
                    }
                }
                let mut v = Rat::zero();
                for (lam, c) in &coeffs {
                    let mut prod = c.clone();
                    for &part in lam {
                        prod *= rat_i64(sums[part - 1], 1);
                    }
                    v += prod;
                }
                total += v;
            }
            total /= Rat::from_integer(count.into());
            assert_eq!(total, kappa[l - 1], "order {l}, sample size {m}");
        }
    }

    #[test]
    fn estimates_on_known_uniform_grid() {
        // Deterministic pseudo-sample: an equally spaced grid on (0,1) has
        // the moments of the uniform law up to O(1/n^2) corrections.
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let est = estimate_cumulants(&xs, 4).unwrap();
        assert!((est[0].estimate - 0.5).abs() < 1e-9);
        assert!((est[1].estimate - 1.0 / 12.0).abs() < 1e-6);
        assert!(est[2].estimate.abs() < 1e-6);
        assert!((est[3].estimate + 1.0 / 120.0).abs() < 1e-5);
        for e in &est {
            assert!(e.std_error > 0.0);
        }
    }

    #[test]
    fn insufficient_samples_rejected() {
        let xs = vec![1.0; 25];
        assert!(estimate_cumulants(&xs, 3).is_err());
        assert!(estimate_cumulants(&xs, 2).is_ok());
    }
}
