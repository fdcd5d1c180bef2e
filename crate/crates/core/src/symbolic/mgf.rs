//! Exact construction of the conductance moment generating function as a
//! Hankel determinant of moment functions, the one-dimensional Toda Lattice
//! identity, and the cumulant series of the exact MGF.

use crate::ensemble::{normalization_c, LeadConfig};
use crate::error::{Error, Result};
use crate::rational::{factorial, Rat};
use crate::symbolic::laurent::LaurentPoly;
use crate::symbolic::ring::{det_ring, factorial_rat, ExpLaurentFn};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Moment function `mu_m(z) = int_0^1 T^(nu+m) exp(-z T) dT` in closed form:
/// `(nu+m)! z^-(nu+m+1) (1 - exp(-z) sum_{l=0..nu+m} z^l / l!)`.
pub fn moment_fn(m: u32, nu: u32) -> ExpLaurentFn {
    let q = (nu + m) as u64;
    let fq = factorial_rat(q);
    let mut out = ExpLaurentFn::from_part(0, LaurentPoly::monomial(fq.clone(), -(q as i64) - 1));
    let mut tail = LaurentPoly::zero();
    for l in 0..=q {
        // -(nu+m)! z^(l - nu - m - 1) / l!
        let c = -&fq / Rat::from_integer(factorial(l));
        tail.add_term(l as i64 - q as i64 - 1, &c);
    }
    out.add_assign(&ExpLaurentFn::from_part(1, tail));
    out
}

/// Exact MGF of the Landauer conductance for `n = cfg.n`, integer `nu`:
/// `(n!/c_{n,nu}) det[ mu_{j+k} ]_{j,k=0..n-1}`; the empty determinant gives
/// the constant function 1.
pub fn mgf_hankel(cfg: &LeadConfig) -> Result<ExpLaurentFn> {
    let nu = cfg
        .nu_integer()
        .ok_or_else(|| Error::Config(format!("integer nu required, got {}", cfg.nu)))?;
    mgf_hankel_indices(cfg.n, nu)
}

/// Same as [`mgf_hankel`] keyed directly by `(n, nu)`; `n = 0` is the
/// constant function 1.
pub fn mgf_hankel_indices(n: u32, nu: u32) -> Result<ExpLaurentFn> {
    if n == 0 {
        return Ok(ExpLaurentFn::one());
    }
    let size = n as usize;
    let mut moments = Vec::with_capacity(2 * size - 1);
    for m in 0..(2 * size - 1) as u32 {
        moments.push(moment_fn(m, nu));
    }
    let matrix: Vec<Vec<ExpLaurentFn>> = (0..size)
        .map(|j| (0..size).map(|k| moments[j + k].clone()).collect())
        .collect();
    let det = det_ring(&matrix);
    let prefactor = Rat::from_integer(factorial(n as u64)) / normalization_c(n, nu);
    Ok(det.scale(&prefactor))
}

/// Exact residual of the one-dimensional Toda Lattice identity
/// `F_n F_n'' - (F_n')^2 - var_{n,nu}(G) F_{n-1} F_{n+1}`.
pub fn toda_residual(cfg: &LeadConfig) -> Result<ExpLaurentFn> {
    let nu = cfg
        .nu_integer()
        .ok_or_else(|| Error::Config(format!("integer nu required, got {}", cfg.nu)))?;
    if cfg.n < 1 {
        return Err(Error::Config("Toda identity needs n >= 1".into()));
    }
    let f_prev = mgf_hankel_indices(cfg.n - 1, nu)?;
    let f = mgf_hankel_indices(cfg.n, nu)?;
    let f_next = mgf_hankel_indices(cfg.n + 1, nu)?;
    Ok(toda_residual_with_var(&f_prev, &f, &f_next, &cfg.conductance_variance()))
}

/// Residual with an explicit variance factor (used to demonstrate that a
/// perturbed variance breaks the identity).
pub fn toda_residual_with_var(
    f_prev: &ExpLaurentFn,
    f: &ExpLaurentFn,
    f_next: &ExpLaurentFn,
    var: &Rat,
) -> ExpLaurentFn {
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let lhs = &(f * &d2) - &(&d1 * &d1);
    &lhs - &(f_prev * f_next).scale(var)
}

/// True iff the exact Toda residual is the zero element of the ring.
pub fn toda_check(cfg: &LeadConfig) -> Result<bool> {
    Ok(toda_residual(cfg)?.is_zero())
}

/// Coefficients `g_1..g_order` of `log F` from the Taylor coefficients of
/// `F` (requires `F(0) = 1`); standard log-series recurrence.
pub fn log_series(f: &ExpLaurentFn, order: usize) -> Result<Vec<Rat>> {
    let t = f.taylor(order)?;
    if t[0] != Rat::one() {
        return Err(Error::Inconsistency(format!(
            "log series needs unit constant term, got {}",
            t[0]
        )));
    }
    let mut g = vec![Rat::zero(); order + 1];
    for m in 1..=order {
        // g_m = f_m - (1/m) sum_{j=1}^{m-1} j g_j f_{m-j}
        let mut acc = t[m].clone();
        for j in 1..m {
            acc -= &g[j] * &t[m - j] * Rat::new(BigInt::from(j), BigInt::from(m));
        }
        g[m] = acc;
    }
    Ok(g.split_off(1))
}

/// Conductance cumulants `kappa_1..kappa_order` read off the exact MGF:
/// `kappa_l = (-1)^l l! [z^l] log F`.
pub fn cumulants_from_mgf(f: &ExpLaurentFn, order: usize) -> Result<Vec<Rat>> {
    let g = log_series(f, order)?;
    Ok(g.into_iter()
        .enumerate()
        .map(|(i, gl)| {
            let l = i + 1;
            let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
            sign * gl * Rat::from_integer(factorial(l as u64))
        })
        .collect())
}
