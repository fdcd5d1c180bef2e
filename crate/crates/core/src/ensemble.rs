//! Lead/cavity configuration, the thermodynamic crossover factor, and exact
//! normalization constants shared by all other modules.

use crate::error::{Error, Result};
use crate::rational::{factorial, rat_i64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Channel counts of the two leads, with the derived indices
/// `n = min(N_L, N_R)` and `nu = |N_L - N_R|`.
///
/// `nu` is kept rational because the shot-noise factorization works with
/// effective asymmetry `±1/2`; physical configurations always carry a
/// non-negative integer `nu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadConfig {
    pub n_left: u32,
    pub n_right: u32,
    pub n: u32,
    pub nu: Rat,
}

impl LeadConfig {
    pub fn new(n_left: u32, n_right: u32) -> Result<Self> {
        if n_left == 0 || n_right == 0 {
            return Err(Error::Config(format!(
                "channel counts must be positive, got N_L = {n_left}, N_R = {n_right}"
            )));
        }
        Ok(LeadConfig {
            n_left,
            n_right,
            n: n_left.min(n_right),
            nu: Rat::from_integer(BigInt::from(n_left.max(n_right) - n_left.min(n_right))),
        })
    }

    /// Configuration with an explicit (possibly rational, possibly negative)
    /// effective asymmetry index, as used by the shot-noise factorization.
    pub fn effective(n: u32, nu: Rat) -> Result<Self> {
        if nu < rat_i64(-1, 2) {
            return Err(Error::Config(format!("effective nu must be >= -1/2, got {nu}")));
        }
        if Rat::from_integer(BigInt::from(n)) + &nu <= Rat::zero() {
            return Err(Error::Config("n + nu must be positive".into()));
        }
        Ok(LeadConfig { n_left: n, n_right: n, n, nu })
    }

    /// `2n + nu`, the combination every closed form is written in.
    pub fn s(&self) -> Rat {
        Rat::from_integer(BigInt::from(2 * self.n)) + &self.nu
    }

    /// `nu` as a non-negative integer, when it is one.
    pub fn nu_integer(&self) -> Option<u32> {
        if self.nu.is_integer() && !self.nu.is_negative() {
            Some(self.nu.to_integer().try_into().ok()?)
        } else {
            None
        }
    }

    /// Mean conductance `n(n+nu)/(2n+nu)`.
    pub fn mean_conductance(&self) -> Rat {
        let n = Rat::from_integer(BigInt::from(self.n));
        &n * (&n + &self.nu) / self.s()
    }

    /// Conductance variance `n^2 (n+nu)^2 / ((2n+nu)^2 ((2n+nu)^2 - 1))`.
    pub fn conductance_variance(&self) -> Rat {
        let k1 = self.mean_conductance();
        let s2 = self.s().pow(2);
        &k1 * &k1 / (s2 - Rat::one())
    }
}

/// Bias-to-temperature ratio `eta = v/(2 theta)`, with the shot-noise limit
/// kept as a tagged sentinel so downstream code never sees a non-finite
/// number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta {
    Finite(f64),
    /// `eta -> infinity`: callers route to the shot-limit operations.
    Shot,
}

impl Eta {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Eta::Shot);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse eta from {s:?}")))?;
        if !v.is_finite() {
            return Ok(Eta::Shot);
        }
        if v < 0.0 {
            return Err(Error::Domain(format!("eta must be non-negative, got {v}")));
        }
        Ok(Eta::Finite(v))
    }
}

/// The thermodynamic function `f_eta = eta coth(eta) - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoFactor {
    pub eta: f64,
    pub f_eta: f64,
}

/// Laurent-series threshold below which the direct `coth` form loses all
/// accuracy to cancellation.
const SERIES_THRESHOLD: f64 = 1e-4;

pub fn thermo_factor(eta: f64) -> Result<ThermoFactor> {
    if !(eta >= 0.0) {
        return Err(Error::Domain(format!("eta must be non-negative, got {eta}")));
    }
    let f_eta = if eta < SERIES_THRESHOLD {
        // eta coth(eta) - 1 = eta^2/3 - eta^4/45 + 2 eta^6/945 + ...
        let e2 = eta * eta;
        e2 / 3.0 - e2 * e2 / 45.0 + 2.0 * e2 * e2 * e2 / 945.0
    } else {
        eta / eta.tanh() - 1.0
    };
    Ok(ThermoFactor { eta, f_eta })
}

/// Exact normalization constant of the transmission-eigenvalue density:
/// the product over `j = 0..n-1` of
/// `Gamma(j+2) Gamma(j+nu+1) Gamma(j+1) / Gamma(j+nu+n+1)`,
/// for integer `nu >= 0`. The empty product (`n = 0`) is 1.
pub fn normalization_c(n: u32, nu: u32) -> Rat {
    let mut acc = Rat::one();
    for j in 0..n as u64 {
        let num = factorial(j + 1) * factorial(j + nu as u64) * factorial(j);
        let den = factorial(j + nu as u64 + n as u64);
        acc *= Rat::new(num, den);
    }
    acc
}
