//! Helpers around arbitrary-precision rationals.
//!
//! `Rat` is the coefficient type of every exact computation in this crate:
//! reduced fractions of arbitrary-precision integers with positive
//! denominators, as guaranteed by `num_rational::BigRational`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

/// `k!` as a big integer.
pub fn factorial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for j in 2..=k {
        acc *= j;
    }
    acc
}

/// `k!` as a rational.
pub fn factorial_rat(k: u64) -> Rat {
    Rat::from_integer(factorial(k))
}

/// Binomial coefficient `C(n, k)` as a big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

pub fn rat_i64(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Integer power with negative exponents allowed (panics on 0^negative).
pub fn pow_i(base: &Rat, exp: i64) -> Rat {
    base.pow(exp as i32)
}

/// Best-effort conversion to `f64` that survives numerators/denominators
/// far outside the `f64` exponent range by splitting off powers of two.
pub fn to_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    // Scale into range: r = m * 2^e with m in [0.5, 1).
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let shift = num_bits - den_bits;
    let scaled = if shift >= 0 {
        r / Rat::from_integer(BigInt::one() << shift as usize)
    } else {
        r * Rat::from_integer(BigInt::one() << (-shift) as usize)
    };
    scaled.to_f64().map_or(f64::NAN, |m| m * 2f64.powi(shift as i32))
}

/// Exact rational from an `f64` (every finite float is a dyadic rational).
pub fn from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float required")
}

/// Render as `p/q` (or just `p` when the denominator is one).
pub fn format_ratio(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p/q` or `p`.
pub fn parse_ratio(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().ok()?;
            let d: BigInt = den.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

/// Decimal rendering with the given number of significant digits.
pub fn to_decimal_string(r: &Rat, sig_digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Decimal exponent: number of digits of the integer part, or minus the
    // number of leading zeros after the point.
    let mut exp10: i64 = 0;
    let one = Rat::one();
    let ten = rat_int(10);
    let mut scaled = a.clone();
    while scaled >= ten {
        scaled /= &ten;
        exp10 += 1;
    }
    while scaled < one {
        scaled *= &ten;
        exp10 -= 1;
    }
    // scaled in [1, 10); produce sig_digits digits of it, rounded.
    let shift = BigInt::from(10u32).pow((sig_digits - 1) as u32);
    let scaled_int =
        (scaled * Rat::from_integer(shift) + rat_i64(1, 2)).floor().to_integer();
    let mut digits = scaled_int.to_string();
    // Rounding may carry over to an extra digit (e.g. 9.99 -> 10.0).
    if digits.len() > sig_digits {
        digits.truncate(sig_digits);
        exp10 += 1;
    }
    let mantissa = if digits.len() > 1 {
        format!("{}.{}", &digits[..1], &digits[1..])
    } else {
        digits.clone()
    };
    let body = if (-4..(sig_digits as i64)).contains(&exp10) {
        // Plain notation.
        let unsigned = if exp10 >= 0 {
            let ip_len = (exp10 + 1) as usize;
            if ip_len >= digits.len() {
                format!("{}{}", digits, "0".repeat(ip_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..ip_len], &digits[ip_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp10 - 1) as usize), digits)
        };
        unsigned
    } else {
        format!("{}e{}", mantissa, exp10)
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}
