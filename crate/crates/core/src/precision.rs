//! Controlled-precision evaluation support.
//!
//! Exact symbolic objects are evaluated through rational arithmetic with a
//! rational approximation of `exp`. The working precision (in bits) defaults
//! to [`DEFAULT_BITS`] and can be overridden with the
//! `TODA_TRANSPORT_PRECISION` environment variable.

use crate::rational::{pow_i, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub const DEFAULT_BITS: u32 = 256;
pub const ENV_VAR: &str = "TODA_TRANSPORT_PRECISION";

/// Working precision in bits, with the environment override applied.
pub fn precision_bits() -> u32 {
    match std::env::var(ENV_VAR) {
        Ok(s) => s.trim().parse().ok().filter(|&b| (53..=65_536).contains(&b)).unwrap_or(DEFAULT_BITS),
        Err(_) => DEFAULT_BITS,
    }
}

/// Round `r` to the nearest multiple of `2^-frac_bits`. Keeps intermediate
/// rationals from growing without bound during repeated squaring.
pub fn round_to_bits(r: &Rat, frac_bits: u32) -> Rat {
    let scale = BigInt::one() << frac_bits;
    let scaled = r * Rat::from_integer(scale.clone());
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let m = if scaled.is_negative() {
        -((-scaled + half).floor().to_integer())
    } else {
        (scaled + half).floor().to_integer()
    };
    Rat::new(m, scale)
}

/// `exp(z)` as a rational with relative error below `2^-bits`.
///
/// Argument reduction `z = x * 2^s` with `|x| <= 1/2`, Taylor series for
/// `exp(x)`, then `s` squarings with rounding to bounded precision after
/// each step.
pub fn exp_rat(z: &Rat, bits: u32) -> Rat {
    if z.is_zero() {
        return Rat::one();
    }
    let mag = crate::rational::to_f64(&z.abs());
    let s = if mag <= 0.5 { 0 } else { (mag * 2.0).log2().ceil() as u32 };
    // Guard bits: squaring doubles relative error s times, the exponential
    // scale adds |z|/ln 2 bits of headroom for positive arguments.
    let headroom = if z.is_positive() { (mag / std::f64::consts::LN_2).ceil() as u32 + 2 } else { 2 };
    let work = bits + s + headroom + 32;
    let x = z / Rat::from_integer(BigInt::one() << s);
    // Taylor series, terms fall at least geometrically with ratio <= 1/2.
    let mut sum = Rat::one();
    let mut term = Rat::one();
    let threshold = Rat::new(BigInt::one(), BigInt::one() << work);
    for j in 1..10_000u32 {
        term = term * &x / Rat::from_integer(BigInt::from(j));
        sum += &term;
        if term.abs() < threshold {
            break;
        }
    }
    let mut acc = round_to_bits(&sum, work);
    for _ in 0..s {
        acc = round_to_bits(&(&acc * &acc), work);
    }
    acc
}

/// `exp(z)^k` for integer `k` (k may be negative), same precision contract.
pub fn exp_pow(z: &Rat, k: i64, bits: u32) -> Rat {
    if k == 0 {
        return Rat::one();
    }
    let base = exp_rat(&(z * Rat::from_integer(BigInt::from(k.abs()))), bits);
    if k < 0 {
        // exp(|k| z) computed directly, then inverted, keeps the relative
        // error contract.
        pow_i(&base, -1)
    } else {
        base
    }
}
