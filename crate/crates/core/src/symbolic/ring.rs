//! The ring of finite sums `sum_k exp(-k z) * L_k(z)` with Laurent-polynomial
//! coefficients and exact rational arithmetic.
//!
//! Moment generating functions of the transmission-eigenvalue integrals live
//! in this ring: it is closed under addition, multiplication and
//! differentiation, equality is decidable coefficient-wise, and every element
//! has a computable Taylor expansion at the origin.

use crate::error::{Error, Result};
use crate::precision::{exp_pow, precision_bits};
use crate::rational::{factorial, from_f64, to_f64, Rat};
use crate::symbolic::laurent::LaurentPoly;
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// `sum_k exp(-k z) * L_k(z)`, keyed by the non-negative exponent index `k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpLaurentFn {
    parts: BTreeMap<u32, LaurentPoly>,
}

impl ExpLaurentFn {
    pub fn zero() -> Self {
        ExpLaurentFn { parts: BTreeMap::new() }
    }

    pub fn one() -> Self {
        ExpLaurentFn::from_part(0, LaurentPoly::one())
    }

    pub fn from_part(k: u32, poly: LaurentPoly) -> Self {
        let mut parts = BTreeMap::new();
        if !poly.is_zero() {
            parts.insert(k, poly);
        }
        ExpLaurentFn { parts }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = (&u32, &LaurentPoly)> {
        self.parts.iter()
    }

    pub fn max_exponential_index(&self) -> u32 {
        self.parts.keys().next_back().copied().unwrap_or(0)
    }

    /// Most negative Laurent power over all parts (0 when none are negative).
    pub fn max_negative_power(&self) -> i64 {
        self.parts
            .values()
            .filter_map(|p| p.min_exp())
            .min()
            .map_or(0, |e| (-e).max(0))
    }

    fn insert_part(&mut self, k: u32, poly: LaurentPoly) {
        if !poly.is_zero() {
            self.parts.insert(k, poly);
        }
    }

    pub fn add_assign(&mut self, rhs: &ExpLaurentFn) {
        for (&k, poly) in &rhs.parts {
            let merged = match self.parts.get(&k) {
                Some(existing) => existing + poly,
                None => poly.clone(),
            };
            if merged.is_zero() {
                self.parts.remove(&k);
            } else {
                self.parts.insert(k, merged);
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return ExpLaurentFn::zero();
        }
        ExpLaurentFn { parts: self.parts.iter().map(|(&k, p)| (k, p.scale(c))).collect() }
    }

    /// d/dz: each part maps to `exp(-kz) (L' - k L)`.
    pub fn derivative(&self) -> Self {
        let mut out = ExpLaurentFn::zero();
        for (&k, poly) in &self.parts {
            let mut d = poly.derivative();
            if k > 0 {
                d = &d - &poly.scale(&Rat::from_integer(BigInt::from(k)));
            }
            out.insert_part(k, d);
        }
        out
    }

    /// Taylor coefficients `[z^0] .. [z^order]` of the expansion at `z = 0`.
    ///
    /// Errors if any negative power survives the cancellation between the
    /// exponential series and the Laurent parts; MGFs built from the moment
    /// determinant must be regular at the origin, so a leftover negative
    /// power indicates a corrupted construction.
    pub fn taylor(&self, order: usize) -> Result<Vec<Rat>> {
        let min_exp = self
            .parts
            .values()
            .filter_map(|p| p.min_exp())
            .min()
            .unwrap_or(0)
            .min(0);
        let len = (order as i64 - min_exp + 1) as usize;
        // coeff[i] is the coefficient of z^(min_exp + i).
        let mut coeff = vec![Rat::zero(); len];
        for (&k, poly) in &self.parts {
            if k == 0 {
                for (&e, c) in poly.iter() {
                    if e <= order as i64 {
                        coeff[(e - min_exp) as usize] += c;
                    }
                }
                continue;
            }
            // exp(-k z) = sum_m (-k)^m z^m / m!
            let mk = -Rat::from_integer(BigInt::from(k));
            for (&e, c) in poly.iter() {
                let mut factor = c.clone();
                let mut m: i64 = 0;
                while e + m <= order as i64 {
                    coeff[(e + m - min_exp) as usize] += &factor;
                    m += 1;
                    factor = factor * &mk / Rat::from_integer(BigInt::from(m));
                }
            }
        }
        for i in 0..(-min_exp) as usize {
            if !coeff[i].is_zero() {
                return Err(Error::Inconsistency(format!(
                    "nonzero coefficient {} at power {} in a function regular at 0",
                    coeff[i],
                    min_exp + i as i64
                )));
            }
        }
        Ok(coeff.split_off((-min_exp) as usize))
    }

    /// Evaluate at a nonzero rational point in exact rational arithmetic,
    /// with `exp(-kz)` approximated to `bits` of relative precision plus a
    /// slack covering the magnitude of the Laurent parts.
    pub fn eval_rat(&self, z: &Rat, bits: u32) -> Rat {
        if self.parts.is_empty() {
            return Rat::zero();
        }
        let mut part_values: Vec<(u32, Rat)> = Vec::new();
        let mut slack: i64 = 16;
        for (&k, poly) in &self.parts {
            let v = poly.eval(z);
            if !v.is_zero() {
                let mag = v.numer().bits() as i64 - v.denom().bits() as i64;
                slack = slack.max(mag + 16);
            }
            part_values.push((k, v));
        }
        let work = bits + slack.clamp(0, 1 << 20) as u32;
        let mut acc = Rat::zero();
        for (k, v) in part_values {
            if v.is_zero() {
                continue;
            }
            if k == 0 {
                acc += v;
            } else {
                acc += exp_pow(&-z.clone(), k as i64, work) * v;
            }
        }
        acc
    }

    /// Numeric evaluation. Near the origin the Taylor series is used to avoid
    /// the `exp(-kz) z^-p` cancellation; elsewhere exact rational evaluation
    /// with high-precision exponentials.
    pub fn eval_f64(&self, z: f64, bits: u32) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::Domain("z must be finite".into()));
        }
        if z.abs() < 0.5 {
            let order = 4 * self.max_negative_power() as usize + 20;
            let coeffs = self.taylor(order)?;
            let zr = from_f64(z);
            let mut acc = Rat::zero();
            for c in coeffs.iter().rev() {
                acc = acc * &zr + c;
            }
            Ok(to_f64(&acc))
        } else {
            Ok(to_f64(&self.eval_rat(&from_f64(z), bits)))
        }
    }

    /// Convenience wrapper using the environment-configured precision.
    pub fn eval(&self, z: f64) -> Result<f64> {
        self.eval_f64(z, precision_bits())
    }

    /// JSON form: `{ "k": { "power": "p/q", ... }, ... }`.
    pub fn to_json(&self) -> Value {
        let mut outer = Map::new();
        for (&k, poly) in &self.parts {
            let mut inner = Map::new();
            for (&e, c) in poly.iter() {
                inner.insert(e.to_string(), json!(crate::rational::format_ratio(c)));
            }
            outer.insert(k.to_string(), Value::Object(inner));
        }
        Value::Object(outer)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Inconsistency("expected object".into()))?;
        let mut out = ExpLaurentFn::zero();
        for (ks, inner) in obj {
            let k: u32 = ks
                .parse()
                .map_err(|_| Error::Inconsistency(format!("bad exponent index {ks}")))?;
            let inner = inner
                .as_object()
                .ok_or_else(|| Error::Inconsistency("expected object of powers".into()))?;
            let mut poly = LaurentPoly::zero();
            for (es, cs) in inner {
                let e: i64 = es
                    .parse()
                    .map_err(|_| Error::Inconsistency(format!("bad power {es}")))?;
                let c = cs
                    .as_str()
                    .and_then(crate::rational::parse_ratio)
                    .ok_or_else(|| Error::Inconsistency(format!("bad rational {cs}")))?;
                poly.add_term(e, &c);
            }
            out.insert_part(k, poly);
        }
        Ok(out)
    }
}

impl Add for &ExpLaurentFn {
    type Output = ExpLaurentFn;
    fn add(self, rhs: &ExpLaurentFn) -> ExpLaurentFn {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &ExpLaurentFn {
    type Output = ExpLaurentFn;
    fn sub(self, rhs: &ExpLaurentFn) -> ExpLaurentFn {
        let mut out = self.clone();
        out.add_assign(&-rhs);
        out
    }
}

impl Neg for &ExpLaurentFn {
    type Output = ExpLaurentFn;
    fn neg(self) -> ExpLaurentFn {
        ExpLaurentFn { parts: self.parts.iter().map(|(&k, p)| (k, -p)).collect() }
    }
}

impl Mul for &ExpLaurentFn {
    type Output = ExpLaurentFn;
    fn mul(self, rhs: &ExpLaurentFn) -> ExpLaurentFn {
        let mut out = ExpLaurentFn::zero();
        for (&k1, p1) in &self.parts {
            for (&k2, p2) in &rhs.parts {
                let merged = match out.parts.get(&(k1 + k2)) {
                    Some(existing) => existing + &(p1 * p2),
                    None => p1 * p2,
                };
                if merged.is_zero() {
                    out.parts.remove(&(k1 + k2));
                } else {
                    out.parts.insert(k1 + k2, merged);
                }
            }
        }
        out
    }
}

/// Factorial as rational, shared by the MGF constructors.
pub(crate) fn factorial_rat(k: u64) -> Rat {
    Rat::from_integer(factorial(k))
}

/// Determinant of an `n x n` matrix over the ring, by Laplace expansion with
/// minor caching over column subsets (exact, no division).
pub fn det_ring(matrix: &[Vec<ExpLaurentFn>]) -> ExpLaurentFn {
    let n = matrix.len();
    if n == 0 {
        return ExpLaurentFn::one();
    }
    // minors[mask] = det of first popcount(mask) rows restricted to columns
    // in mask (ascending order).
    let mut minors: Vec<Option<ExpLaurentFn>> = vec![None; 1 << n];
    minors[0] = Some(ExpLaurentFn::one());
    for mask in 1usize..(1 << n) {
        let r = (mask as u32).count_ones() as usize - 1;
        let mut acc = ExpLaurentFn::zero();
        let mut i = 0;
        for c in 0..n {
            if mask & (1 << c) == 0 {
                continue;
            }
            let sub = minors[mask ^ (1 << c)]
                .as_ref()
                .expect("minors filled in mask order")
                .clone();
            let term = &matrix[r][c] * &sub;
            if (r + i) % 2 == 0 {
                acc.add_assign(&term);
            } else {
                acc.add_assign(&-&term);
            }
            i += 1;
        }
        minors[mask] = Some(acc);
    }
    minors[(1 << n) - 1].take().expect("full minor computed")
}
