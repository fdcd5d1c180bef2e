//! Conductance probability density by exact inverse Laplace transform of the
//! Hankel-determinant MGF: piecewise polynomials on the unit intervals of
//! `(0, n)`, in both Heaviside and sign conventions.

use crate::ensemble::LeadConfig;
use crate::error::{Error, Result};
use crate::rational::{factorial, rat_i64, Rat};
use crate::symbolic::poly::Poly;
use crate::symbolic::ring::ExpLaurentFn;
use num_traits::{One, Zero};
use serde_json::{json, Value};

/// Density `f(g) = sum_k Theta(g-k) h_k(g-k) = sum_k sgn(g-k) pi_k(g-k)` on
/// `(0, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolyDensity {
    pub n: u32,
    pub nu: u32,
    /// Heaviside polynomials `h_k`, k = 0..n.
    pub heaviside: Vec<Poly>,
    /// Sign-convention polynomials `pi_k`, k = 0..n.
    pub sgn: Vec<Poly>,
}

/// Term-by-term inverse Laplace transform:
/// `exp(-kz) z^-m  ->  Theta(g-k) (g-k)^(m-1) / (m-1)!`.
///
/// The input must have the shape `z^-p sum_k exp(-kz) Q_k(z)` with polynomial
/// `Q_k` of degree below `p = n(n+nu)`; any surviving non-negative power of
/// `z` would be a delta-distribution term and is rejected.
pub fn density_from_mgf(f: &ExpLaurentFn, cfg: &LeadConfig) -> Result<PiecewisePolyDensity> {
    let nu = cfg
        .nu_integer()
        .ok_or_else(|| Error::Config(format!("integer nu required, got {}", cfg.nu)))?;
    let n = cfg.n;
    let p = (n * (n + nu)) as i64;
    let mut heaviside = vec![Poly::zero(); n as usize + 1];
    for (&k, poly) in f.parts() {
        if k > n {
            return Err(Error::Inconsistency(format!(
                "exponential index {k} exceeds n = {n}"
            )));
        }
        for (&e, c) in poly.iter() {
            if e >= 0 {
                return Err(Error::Inconsistency(format!(
                    "shape violation: non-negative power z^{e} in exp(-{k}z) part"
                )));
            }
            if -e > p {
                return Err(Error::Inconsistency(format!(
                    "shape violation: power z^{e} below -p = -{p}"
                )));
            }
            let m = (-e) as u64;
            let coeff = c / Rat::from_integer(factorial(m - 1));
            heaviside[k as usize].add_assign_coeff((m - 1) as usize, &coeff);
        }
    }
    // Theta(x) = (1 + sgn(x))/2, and sum_k h_k(g-k) vanishes identically
    // (the density is zero beyond g = n), so pi_k = h_k / 2.
    let sgn: Vec<Poly> = heaviside.iter().map(|h| h.scale(&rat_i64(1, 2))).collect();
    let density = PiecewisePolyDensity { n, nu, heaviside, sgn };
    density.validate()?;
    Ok(density)
}

impl PiecewisePolyDensity {
    /// Structural checks: the closure identity, the degree bound and exact
    /// unit normalization.
    fn validate(&self) -> Result<()> {
        let p = (self.n * (self.n + self.nu)) as usize;
        let mut closure = Poly::zero();
        for (k, pi) in self.sgn.iter().enumerate() {
            if let Some(d) = pi.degree() {
                if d + 1 > p {
                    return Err(Error::Inconsistency(format!(
                        "deg pi_{k} = {d} exceeds bound n(n+nu)-1 = {}",
                        p - 1
                    )));
                }
            }
            closure = &closure + &pi.shift(&-Rat::from_integer((k as i64).into()));
        }
        if !closure.is_zero() {
            return Err(Error::Inconsistency(
                "sum_k pi_k(g-k) does not vanish identically".into(),
            ));
        }
        if self.integral() != Rat::one() {
            return Err(Error::Inconsistency(format!(
                "density integrates to {} instead of 1",
                self.integral()
            )));
        }
        Ok(())
    }

    /// Exact integral over `(0, n)`.
    pub fn integral(&self) -> Rat {
        let mut acc = Rat::zero();
        for (k, h) in self.heaviside.iter().enumerate() {
            let anti = h.antiderivative();
            acc += anti.eval(&Rat::from_integer(((self.n as i64) - k as i64).into()));
        }
        acc
    }

    /// Exact `j`-th moment `int g^j f(g) dg`.
    pub fn moment(&self, j: u32) -> Rat {
        let mut acc = Rat::zero();
        for (k, h) in self.heaviside.iter().enumerate() {
            if h.is_zero() {
                continue;
            }
            // int_k^n g^j h_k(g-k) dg = int_0^{n-k} (x+k)^j h_k(x) dx
            let kx = Rat::from_integer((k as i64).into());
            let mut gj = Poly::constant(Rat::one());
            let lin = Poly::from_coeffs(vec![kx, Rat::one()]);
            for _ in 0..j {
                gj = &gj * &lin;
            }
            let anti = (&gj * h).antiderivative();
            acc += anti.eval(&Rat::from_integer(((self.n as i64) - k as i64).into()));
        }
        acc
    }

    /// Evaluate the density at a point (Heaviside form).
    pub fn eval_f64(&self, g: f64) -> f64 {
        if g <= 0.0 || g >= self.n as f64 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (k, h) in self.heaviside.iter().enumerate() {
            if (k as f64) < g {
                acc += h.eval_f64(g - k as f64);
            }
        }
        acc
    }

    /// Reflection `pi_{n-k}(x) = -pi_k(-x)`, valid for symmetric leads.
    pub fn reflection_holds(&self) -> bool {
        if self.nu != 0 {
            return true;
        }
        (0..=self.n as usize)
            .all(|k| self.sgn[self.n as usize - k] == -&self.sgn[k].reflect())
    }

    /// JSON form: arrays of `pi_k` / `h_k` coefficients as `p/q` strings.
    pub fn to_json(&self) -> Value {
        let ser = |polys: &[Poly]| -> Value {
            Value::Array(
                polys
                    .iter()
                    .map(|p| {
                        Value::Array(
                            p.coeffs()
                                .iter()
                                .map(|c| json!(crate::rational::format_ratio(c)))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        };
        json!({
            "n": self.n,
            "nu": self.nu,
            "sgn_polys": ser(&self.sgn),
            "heaviside_polys": ser(&self.heaviside),
        })
    }

    /// Numerical guard: minimum of the density on a grid of `points` per
    /// unit interval.
    pub fn grid_minimum(&self, points: usize) -> f64 {
        let mut min = f64::INFINITY;
        for k in 0..self.n as usize {
            for i in 1..points {
                let g = k as f64 + i as f64 / points as f64;
                min = min.min(self.eval_f64(g));
            }
        }
        min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;
    use crate::symbolic::mgf::mgf_hankel;

    fn density(n: u32) -> PiecewisePolyDensity {
        let cfg = LeadConfig::new(n, n).unwrap();
        let f = mgf_hankel(&cfg).unwrap();
        density_from_mgf(&f, &cfg).unwrap()
    }

    #[test]
    fn flat_density_for_single_channel() {
        let d = density(1);
        assert_eq!(d.sgn[0], Poly::constant(rat_i64(1, 2)));
        assert_eq!(d.sgn[1], Poly::constant(rat_i64(-1, 2)));
        for i in 1..10 {
            assert!((d.eval_f64(i as f64 / 10.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_channel_polynomials() {
        let d = density(2);
        // pi_0 = x^3, pi_1 = -2x(x^2+3)
        assert_eq!(d.sgn[0], Poly::monomial(Rat::one(), 3));
        assert_eq!(
            d.sgn[1],
            Poly::from_coeffs(vec![rat_int(0), rat_int(-6), rat_int(0), rat_int(-2)])
        );
        assert_eq!(d.integral(), Rat::one());
        assert!(d.reflection_holds());
    }

    #[test]
    fn moments_match_cumulants() {
        // n=2: mean 1, variance 1/15.
        let d = density(2);
        assert_eq!(d.moment(1), rat_int(1));
        assert_eq!(d.moment(2) - d.moment(1).pow(2), rat_i64(1, 15));
    }

    #[test]
    fn nonnegative_on_grid() {
        for n in 1..=3 {
            let d = density(n);
            assert!(d.grid_minimum(1000) >= -1e-12);
        }
    }

    #[test]
    fn asymmetric_leads_density() {
        let cfg = LeadConfig::new(1, 3).unwrap();
        let f = mgf_hankel(&cfg).unwrap();
        let d = density_from_mgf(&f, &cfg).unwrap();
        // density T^2 * 3 on (0,1): pi_0 = 3x^2/2.
        assert_eq!(d.sgn[0], Poly::monomial(rat_i64(3, 2), 2));
        assert_eq!(d.moment(1), rat_i64(3, 4));
    }

    #[test]
    fn shape_violation_detected() {
        let cfg = LeadConfig::new(1, 1).unwrap();
        let bad = ExpLaurentFn::one(); // constant: a delta term, not a density
        assert!(density_from_mgf(&bad, &cfg).is_err());
    }
}
