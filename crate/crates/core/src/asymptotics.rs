//! Closed-form large-n expansions of conductance, joint, and noise-power
//! cumulants, with measured-convergence comparisons against the exact
//! engines.

use crate::cumulants::{conductance_cumulants_extended, joint_cumulants};
use crate::ensemble::LeadConfig;
use crate::error::Result;
use crate::rational::{factorial, pow_i, rat_i64, rat_int, to_f64, Rat};
use num_traits::{One, Zero};

/// `a_l(nu) = (1/8) [1 + (-1)^l (1 - 4 nu^2)]`.
pub fn a_coeff(l: u32, nu: &Rat) -> Rat {
    let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
    rat_i64(1, 8) * (Rat::one() + sign * (Rat::one() - rat_int(4) * nu * nu))
}

/// `b_l(nu) = -2 nu l a_l(nu)`.
pub fn b_coeff(l: u32, nu: &Rat) -> Rat {
    -rat_int(2) * nu * rat_int(l as i64) * a_coeff(l, nu)
}

/// `c_l(nu)` of the next-order correction:
/// `(l/96) [ (12 nu^2 (2l+3) + 3(3l^2-4))
///           - (-1)^l (1-4nu^2) (4 nu^2 (l+1)(l-7) - 3(3l^2-4)) ]`.
pub fn c_coeff(l: u32, nu: &Rat) -> Rat {
    let li = l as i64;
    let nu2 = nu * nu;
    let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
    let first = rat_int(12) * &nu2 * rat_int(2 * li + 3) + rat_int(3 * (3 * li * li - 4));
    let second = rat_int(4) * &nu2 * rat_int((li + 1) * (li - 7)) - rat_int(3 * (3 * li * li - 4));
    rat_i64(li, 96) * (first - sign * (Rat::one() - rat_int(4) * &nu2) * second)
}

/// Large-n expansion of the l-th conductance cumulant, exact rational form:
/// `kappa_l ~ (2n+nu)/4 d_{l,1} + d_{l,2}/16
///   + (-1)^l G(l) [ a_l/(4n)^l (1 - nu l/(2n)) + c_l/(4n)^(l+2) ]`.
///
/// The `(-1)^l` factor follows from `kappa_l = (-1)^l G(l) chi_l` together
/// with the chi-ansatz; it is required for the odd-order expansions to match
/// the exact engine.
pub fn kappa_asymptotic_rat(l: u32, cfg: &LeadConfig) -> Rat {
    let n = rat_int(cfg.n as i64);
    let nu = &cfg.nu;
    let mut acc = Rat::zero();
    if l == 1 {
        acc += cfg.s() / rat_int(4);
    }
    if l == 2 {
        acc += rat_i64(1, 16);
    }
    let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
    let gamma = Rat::from_integer(factorial(l as u64 - 1));
    let four_n = rat_int(4) * &n;
    let lead = a_coeff(l, nu)
        * pow_i(&four_n, -(l as i64))
        * (Rat::one() - nu * rat_int(l as i64) / (rat_int(2) * &n));
    let tail = c_coeff(l, nu) * pow_i(&four_n, -(l as i64) - 2);
    acc + sign * gamma * (lead + tail)
}

pub fn kappa_asymptotic(l: u32, cfg: &LeadConfig) -> f64 {
    to_f64(&kappa_asymptotic_rat(l, cfg))
}

/// Residuals of the recurrence written for `chi_l = (-1)^l kappa_l/Gamma(l)`,
/// evaluated on exact cumulants:
/// `(l+1)(l^2 - s^2) chi_{l+1} + s(2l-1) chi_l - (l-2) chi_{l-1}
///   + 2 sum_{j=0}^{l-1} (l-j)(3j+1) chi_{j+1} chi_{l-j}`
/// for `l = 0..order`, with `chi_{-1} = 0` and the empty sum at `l = 0`.
pub fn chi_recurrence_residuals(cfg: &LeadConfig, order: usize) -> Result<Vec<Rat>> {
    let kappa = conductance_cumulants_extended(cfg, order + 1)?;
    let chi = chi_values(cfg, kappa.values());
    Ok(chi_residuals_from_values(cfg, &chi, order))
}

/// `chi_0 = n(n+nu)`, `chi_l = (-1)^l kappa_l / Gamma(l)`.
pub fn chi_values(cfg: &LeadConfig, kappa: &[Rat]) -> Vec<Rat> {
    let n = rat_int(cfg.n as i64);
    let mut chi = vec![&n * (&n + &cfg.nu)];
    for (i, k) in kappa.iter().enumerate() {
        let l = i + 1;
        let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
        chi.push(sign * k / Rat::from_integer(factorial(l as u64 - 1)));
    }
    chi
}

/// Residuals for supplied chi values (`chi[0..=order+1]` must be present).
pub fn chi_residuals_from_values(cfg: &LeadConfig, chi: &[Rat], order: usize) -> Vec<Rat> {
    let s = cfg.s();
    let mut out = Vec::with_capacity(order + 1);
    for l in 0..=order {
        let li = l as i64;
        let mut r = rat_int(li + 1) * (rat_int(li * li) - &s * &s) * &chi[l + 1];
        r += &s * rat_int(2 * li - 1) * &chi[l];
        if l >= 1 {
            // chi_{-1} = 0 by convention, so l = 0 contributes nothing here.
            r -= rat_int(li - 2) * &chi[l - 1];
        }
        let mut conv = Rat::zero();
        for j in 0..l {
            let ji = j as i64;
            conv += rat_int((li - ji) * (3 * ji + 1)) * &chi[j + 1] * &chi[l - j];
        }
        r += rat_int(2) * conv;
        out.push(r);
    }
    out
}

/// Gaussian part plus leading non-Gaussian correction of the joint cumulant
/// `kappa_{l,m}` for symmetric leads (`nu = 0`), exact in `f`:
/// `dk_{l,m} = (1/8) (l+m-1)!/(4n)^(l+m) [ (f/2+1)^m + (-1)^l (f/2-1)^m ]`.
pub fn joint_asymptotic_rat(l: u32, m: u32, n: u32, f: &Rat) -> Rat {
    let half_n = rat_i64(n as i64, 2);
    let mut acc = Rat::zero();
    if (l, m) == (1, 0) {
        acc += &half_n;
    }
    if (l, m) == (0, 1) {
        acc += &half_n * (Rat::one() + f / rat_int(4));
    }
    if (l, m) == (1, 1) || (l, m) == (2, 0) {
        acc += rat_i64(1, 16);
    }
    if (l, m) == (0, 2) {
        acc += rat_i64(1, 16) * (Rat::one() + f * f / rat_int(8));
    }
    if l + m >= 1 {
        let half_f = f / rat_int(2);
        let plus = pow_i(&(&half_f + Rat::one()), m as i64);
        let minus = pow_i(&(&half_f - Rat::one()), m as i64);
        let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
        acc += rat_i64(1, 8)
            * Rat::from_integer(factorial((l + m) as u64 - 1))
            * pow_i(&rat_int(4 * n as i64), -((l + m) as i64))
            * (plus + sign * minus);
    }
    acc
}

pub fn joint_asymptotic(l: u32, m: u32, n: u32, f_eta: f64) -> f64 {
    to_f64(&joint_asymptotic_rat(l, m, n, &crate::rational::from_f64(f_eta)))
}

/// Large-n noise-power cumulant for symmetric leads, in the units of the
/// joint table (noise power measured in `4 theta G_0`):
/// `kappa_l(P) ~ (n/2)(1+f/4) d_{l,1} + (1+f^2/8)/16 d_{l,2} + dk_{0,l}`.
///
/// This is the specialisation `(l, m) -> (0, l)` of [`joint_asymptotic_rat`];
/// the same expansion is often quoted multiplied by `4^l` (noise power in
/// `theta G_0` units).
pub fn noise_power_asymptotic_rat(l: u32, n: u32, f: &Rat) -> Rat {
    joint_asymptotic_rat(0, l, n, f)
}

pub fn noise_power_asymptotic(l: u32, n: u32, f_eta: f64) -> f64 {
    to_f64(&noise_power_asymptotic_rat(l, n, &crate::rational::from_f64(f_eta)))
}

/// Log-log slope of `|exact - asymptotic|` between consecutive `n` values;
/// `None` where a difference vanishes exactly (infinite measured order).
pub fn measured_orders(diffs: &[(u32, Rat)]) -> Vec<Option<f64>> {
    let mut out = Vec::new();
    for w in diffs.windows(2) {
        let (n1, d1) = (&w[0].0, &w[0].1);
        let (n2, d2) = (&w[1].0, &w[1].1);
        if d1.is_zero() || d2.is_zero() {
            out.push(None);
            continue;
        }
        let r1 = to_f64(d1).abs();
        let r2 = to_f64(d2).abs();
        out.push(Some((r1 / r2).ln() / (*n2 as f64 / *n1 as f64).ln()));
    }
    out
}

/// Convergence sweep of the conductance-cumulant expansion: exact minus
/// asymptotic at each `n`, as exact rationals.
pub fn kappa_convergence_sweep(l: u32, nu: u32, ns: &[u32]) -> Result<Vec<(u32, Rat)>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = LeadConfig::new(n, n + nu)?;
        let exact = conductance_cumulants_extended(&cfg, l as usize)?;
        let asym = kappa_asymptotic_rat(l, &cfg);
        out.push((n, exact.kappa(l as usize) - &asym));
    }
    Ok(out)
}

/// Convergence sweep of the joint expansion at `nu = 0` and rational `f`.
pub fn joint_convergence_sweep(l: u32, m: u32, f: &Rat, ns: &[u32]) -> Result<Vec<(u32, Rat)>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = LeadConfig::new(n, n)?;
        let table = joint_cumulants(&cfg, l, m)?;
        let exact = table.get(l, m).expect("entry computed").eval(f);
        let asym = joint_asymptotic_rat(l, m, n, f);
        out.push((n, exact - asym));
    }
    Ok(out)
}
