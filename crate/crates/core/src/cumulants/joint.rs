//! Joint cumulants of conductance and noise power as exact polynomials in
//! the thermodynamic factor, the zero-temperature (shot) limit, and the
//! symmetric-lead shot-noise factorization.

use crate::cumulants::{conductance_cumulants, conductance_cumulants_extended, CumulantSeq};
use crate::ensemble::LeadConfig;
use crate::error::{Error, Result};
use crate::rational::{binomial, rat_i64, rat_int, Rat};
use crate::symbolic::poly::Poly;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Polynomial in the thermodynamic factor `f_eta`, exact coefficients.
pub type FEtaPoly = Poly;

/// Table of joint cumulants `kappa_{l,m}(G, P)`; the `m = 0` column is the
/// conductance cumulant sequence.
#[derive(Debug, Clone)]
pub struct JointCumulantTable {
    pub cfg: LeadConfig,
    pub lmax: u32,
    pub mmax: u32,
    entries: BTreeMap<(u32, u32), FEtaPoly>,
}

impl JointCumulantTable {
    pub fn get(&self, l: u32, m: u32) -> Option<&FEtaPoly> {
        self.entries.get(&(l, m))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &FEtaPoly)> {
        self.entries.iter()
    }
}

/// Build the joint table up to `(lmax, mmax)`. Boundary conductance
/// cumulants are needed to order `lmax + 2 mmax`; they come from the
/// recurrence engine with its symbolic fallback.
pub fn joint_cumulants(cfg: &LeadConfig, lmax: u32, mmax: u32) -> Result<JointCumulantTable> {
    let depth = (lmax + 2 * mmax) as usize;
    let boundary = conductance_cumulants_extended(cfg, depth.max(1)).map_err(|e| match e {
        Error::RecurrenceSingular { .. } => Error::BoundaryDepth { required: depth, available: 0 },
        other => other,
    })?;
    joint_cumulants_from_boundary(cfg, lmax, mmax, &boundary)
}

/// Same, with the boundary column supplied explicitly.
pub fn joint_cumulants_from_boundary(
    cfg: &LeadConfig,
    lmax: u32,
    mmax: u32,
    boundary: &CumulantSeq,
) -> Result<JointCumulantTable> {
    let depth = (lmax + 2 * mmax) as usize;
    if boundary.len() < depth {
        return Err(Error::BoundaryDepth { required: depth, available: boundary.len() });
    }
    let s = cfg.s();
    let mut entries: BTreeMap<(u32, u32), FEtaPoly> = BTreeMap::new();
    entries.insert((0, 0), FEtaPoly::zero());
    for l in 1..=depth as u32 {
        entries.insert((l, 0), FEtaPoly::constant(boundary.kappa(l as usize).clone()));
    }
    let f = Poly::monomial(Rat::one(), 1);
    let f2 = Poly::monomial(Rat::one(), 2);
    for m in 0..mmax {
        // Column m+1 is computable for l <= lmax + 2(mmax - m - 1).
        let l_top = lmax + 2 * (mmax - m - 1);
        for l in 0..=l_top {
            let li = l as i64;
            let mi = m as i64;
            // 2 (2n+nu) f kappa_{l+2,m} + 2(l+2m+1) kappa_{l+1,m}
            let mut rhs = (&f * &entries[&(l + 2, m)]).scale(&(rat_int(2) * &s));
            rhs = &rhs + &entries[&(l + 1, m)].scale(&rat_int(2 * (li + 2 * mi + 1)));
            if m >= 1 {
                // - m [ f^2 kappa_{l+4,m-1} + (1 - f^2) kappa_{l+2,m-1} ]
                let a = &f2 * &entries[&(l + 4, m - 1)];
                let b = &entries[&(l + 2, m - 1)] - &(&f2 * &entries[&(l + 2, m - 1)]);
                rhs = &rhs - &(&a + &b).scale(&rat_int(mi));
                // - 6 m f^2 sum_{i,j} C(m-1,i) C(l,j) k_{j+2,i} k_{l-j+2,m-1-i}
                let mut conv = Poly::zero();
                for i in 0..m {
                    let ci = Rat::from_integer(binomial((m - 1) as u64, i as u64));
                    for j in 0..=l {
                        let c = &ci * Rat::from_integer(binomial(l as u64, j as u64));
                        let prod = &entries[&(j + 2, i)] * &entries[&(l - j + 2, m - 1 - i)];
                        conv = &conv + &prod.scale(&c);
                    }
                }
                rhs = &rhs - &(&f2 * &conv).scale(&rat_int(6 * mi));
            }
            let value = rhs.scale(&rat_int(2 * li + 3 * mi + 2).recip());
            if value.degree().is_some_and(|d| d > (m + 1) as usize) {
                return Err(Error::Inconsistency(format!(
                    "deg_f kappa_({l},{}) exceeds m",
                    m + 1
                )));
            }
            entries.insert((l, m + 1), value);
        }
    }
    Ok(JointCumulantTable { cfg: cfg.clone(), lmax, mmax, entries })
}

/// Zero-temperature limit: `kappa~_{l,m}(G, P_shot)` is the coefficient of
/// `f^m` in `kappa_{l,m}(G, P)`.
pub fn shot_limit(table: &JointCumulantTable) -> BTreeMap<(u32, u32), Rat> {
    table
        .entries()
        .map(|(&(l, m), poly)| ((l, m), poly.coeff(m as usize)))
        .collect()
}

/// Residual of the zero-temperature recurrence at `(l, m)`; zero for a
/// consistent shot table. All referenced entries must be present.
pub fn shot_recurrence_residual(
    shot: &BTreeMap<(u32, u32), Rat>,
    cfg: &LeadConfig,
    l: u32,
    m: u32,
) -> Option<Rat> {
    let s = cfg.s();
    let li = l as i64;
    let mi = m as i64;
    let get = |l: u32, m: u32| shot.get(&(l, m)).cloned();
    let mut acc = Rat::zero();
    if m >= 1 {
        acc += (get(l + 4, m - 1)? - get(l + 2, m - 1)?) * rat_int(mi);
        let mut conv = Rat::zero();
        for i in 0..m {
            let ci = Rat::from_integer(binomial((m - 1) as u64, i as u64));
            for j in 0..=l {
                let c = &ci * Rat::from_integer(binomial(l as u64, j as u64));
                conv += c * get(j + 2, i)? * get(l - j + 2, m - 1 - i)?;
            }
        }
        acc += conv * rat_int(6 * mi);
    }
    acc -= get(l + 2, m)? * rat_int(2) * &s;
    acc += get(l, m + 1)? * rat_int(2 * li + 3 * mi + 2);
    Some(acc)
}

/// Shot-noise cumulants for symmetric leads via the Hankel factorization:
/// `kappa_l(P_shot) = (n/4) d_{l,1}
///   + ((-1)^l / 4^l) (kappa_l^{(ceil(n/2),-1/2)} + kappa_l^{(floor(n/2),+1/2)})`.
pub fn shot_cumulants_symmetric(n: u32, order: usize) -> Result<Vec<Rat>> {
    if n < 1 || order < 1 {
        return Err(Error::Config("need n >= 1 and order >= 1".into()));
    }
    let lower = n / 2; // floor, effective nu = +1/2
    let upper = n - lower; // ceil, effective nu = -1/2
    let plus = if lower >= 1 {
        Some(conductance_cumulants(
            &LeadConfig::effective(lower, rat_i64(1, 2))?,
            order,
        )?)
    } else {
        None
    };
    let minus = conductance_cumulants(&LeadConfig::effective(upper, rat_i64(-1, 2))?, order)?;
    let mut out = Vec::with_capacity(order);
    let quarter = rat_i64(1, 4);
    for l in 1..=order {
        let mut v = Rat::zero();
        if l == 1 {
            v += Rat::from_integer((n as i64).into()) * &quarter;
        }
        let mut sum = minus.kappa(l).clone();
        if let Some(p) = &plus {
            sum += p.kappa(l);
        }
        let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
        v += sign * quarter.pow(l as i32) * sum;
        out.push(v);
    }
    Ok(out)
}

/// Mean noise power `kappa_{0,1} = kappa_1 + (2n+nu) f kappa_2`.
pub fn mean_noise_power(cfg: &LeadConfig, kappa: &CumulantSeq) -> FEtaPoly {
    FEtaPoly::from_coeffs(vec![
        kappa.kappa(1).clone(),
        cfg.s() * kappa.kappa(2),
    ])
}

/// Mean shot-noise power `(2n+nu) kappa_2`.
pub fn mean_noise_power_shot(cfg: &LeadConfig, kappa: &CumulantSeq) -> Rat {
    cfg.s() * kappa.kappa(2)
}

/// First-column closed form:
/// `kappa_{l,1} = kappa_{l+1} + (2n+nu) f kappa_{l+2} / (l+1)`.
pub fn k_l_1(cfg: &LeadConfig, kappa: &CumulantSeq, l: u32) -> FEtaPoly {
    FEtaPoly::from_coeffs(vec![
        kappa.kappa(l as usize + 1).clone(),
        cfg.s() * kappa.kappa(l as usize + 2) / rat_int(l as i64 + 1),
    ])
}

/// Shot version of [`k_l_1`]: `(2n+nu) kappa_{l+2} / (l+1)`.
pub fn k_l_1_shot(cfg: &LeadConfig, kappa: &CumulantSeq, l: u32) -> Rat {
    cfg.s() * kappa.kappa(l as usize + 2) / rat_int(l as i64 + 1)
}

/// Second-column closed form (reduces to the noise-power variance at l=0):
/// `kappa_{l,2} = (2(2n+nu)^2/(l+3) - 1) f^2/(2l+5) kappa_{l+4}
///   + 2(2n+nu) f/(l+2) kappa_{l+3} + (1 + f^2/(2l+5)) kappa_{l+2}
///   - 6 f^2/(2l+5) sum_j C(l,j) kappa_{j+2} kappa_{l+2-j}`.
pub fn k_l_2(cfg: &LeadConfig, kappa: &CumulantSeq, l: u32) -> FEtaPoly {
    let li = l as i64;
    let s = cfg.s();
    let c0 = kappa.kappa(l as usize + 2).clone();
    let c1 = rat_int(2) * &s * kappa.kappa(l as usize + 3) / rat_int(li + 2);
    let mut c2 = (rat_int(2) * &s * &s / rat_int(li + 3) - Rat::one())
        * kappa.kappa(l as usize + 4);
    c2 += kappa.kappa(l as usize + 2);
    let mut conv = Rat::zero();
    for j in 0..=l {
        conv += Rat::from_integer(binomial(l as u64, j as u64))
            * kappa.kappa(j as usize + 2)
            * kappa.kappa((l - j) as usize + 2);
    }
    c2 -= rat_int(6) * conv;
    c2 /= rat_int(2 * li + 5);
    FEtaPoly::from_coeffs(vec![c0, c1, c2])
}

/// Shot version of [`k_l_2`].
pub fn k_l_2_shot(cfg: &LeadConfig, kappa: &CumulantSeq, l: u32) -> Rat {
    let li = l as i64;
    let s = cfg.s();
    let mut acc = (rat_int(2) * &s * &s / rat_int(li + 3) - Rat::one())
        * kappa.kappa(l as usize + 4);
    acc += kappa.kappa(l as usize + 2);
    let mut conv = Rat::zero();
    for j in 0..=l {
        conv += Rat::from_integer(binomial(l as u64, j as u64))
            * kappa.kappa(j as usize + 2)
            * kappa.kappa((l - j) as usize + 2);
    }
    acc -= rat_int(6) * conv;
    acc / rat_int(2 * li + 5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(nl: u32, nr: u32, lmax: u32, mmax: u32) -> JointCumulantTable {
        joint_cumulants(&LeadConfig::new(nl, nr).unwrap(), lmax, mmax).unwrap()
    }

    #[test]
    fn mean_noise_power_entry() {
        // n=1, nu=0: kappa_{0,1} = 1/2 + f/6.
        let t = table(1, 1, 2, 2);
        let k01 = t.get(0, 1).unwrap();
        assert_eq!(k01, &FEtaPoly::from_coeffs(vec![rat_i64(1, 2), rat_i64(1, 6)]));
    }

    #[test]
    fn column_one_matches_closed_form() {
        for (nl, nr) in [(1u32, 1u32), (1, 2), (2, 2), (2, 3), (3, 5)] {
            let cfg = LeadConfig::new(nl, nr).unwrap();
            let t = joint_cumulants(&cfg, 4, 2).unwrap();
            let kap = conductance_cumulants_extended(&cfg, 8).unwrap();
            for l in 0..=4u32 {
                assert_eq!(t.get(l, 1).unwrap(), &k_l_1(&cfg, &kap, l), "l={l} {nl},{nr}");
            }
            for l in 0..=4u32 {
                assert_eq!(t.get(l, 2).unwrap(), &k_l_2(&cfg, &kap, l), "l={l} {nl},{nr}");
            }
        }
    }

    #[test]
    fn boundary_column_is_conductance() {
        let cfg = LeadConfig::new(2, 3).unwrap();
        let t = joint_cumulants(&cfg, 3, 1).unwrap();
        let kap = conductance_cumulants_extended(&cfg, 5).unwrap();
        for l in 1..=5u32 {
            assert_eq!(t.get(l, 0).unwrap(), &FEtaPoly::constant(kap.kappa(l as usize).clone()));
        }
    }

    #[test]
    fn degree_bound_holds() {
        let t = table(2, 3, 4, 3);
        for (&(_, m), poly) in t.entries() {
            assert!(poly.degree().map_or(true, |d| d <= m as usize));
        }
    }

    #[test]
    fn shot_values_single_channel() {
        // n=1: 1/6, 1/180, -1/3780 (uniform T oracle).
        let t = table(1, 1, 0, 3);
        let shot = shot_limit(&t);
        assert_eq!(shot[&(0, 1)], rat_i64(1, 6));
        assert_eq!(shot[&(0, 2)], rat_i64(1, 180));
        assert_eq!(shot[&(0, 3)], rat_i64(-1, 3780));
    }

    #[test]
    fn shot_recurrence_residual_vanishes() {
        let cfg = LeadConfig::new(2, 3).unwrap();
        let t = joint_cumulants(&cfg, 4, 3).unwrap();
        let shot = shot_limit(&t);
        for m in 0..3u32 {
            for l in 0..=(4 + 2 * (3 - m - 1) - 4).max(0) {
                if let Some(r) = shot_recurrence_residual(&shot, &cfg, l, m) {
                    assert!(r.is_zero(), "residual at ({l},{m}) = {r}");
                }
            }
        }
    }

    #[test]
    fn factorization_matches_shot_limit() {
        for n in 1..=4u32 {
            let cfg = LeadConfig::new(n, n).unwrap();
            let t = joint_cumulants(&cfg, 0, 3).unwrap();
            let shot = shot_limit(&t);
            let sym = shot_cumulants_symmetric(n, 3).unwrap();
            for l in 1..=3usize {
                assert_eq!(shot[&(0, l as u32)], sym[l - 1], "n={n} l={l}");
            }
        }
    }

    #[test]
    fn symmetric_shot_printed_low_orders() {
        // kappa_1 = n^3/(2(4n^2-1)), kappa_2 = n^2(4n^4-9n^2+3)/(8(4n^2-1)^2(4n^2-9)).
        for n in 1..=6u32 {
            let sym = shot_cumulants_symmetric(n, 2).unwrap();
            let ni = n as i64;
            let k1 = Rat::new((ni * ni * ni).into(), (2 * (4 * ni * ni - 1)).into());
            assert_eq!(sym[0], k1, "n={n}");
            let num = rat_int(ni * ni)
                * rat_int(4 * ni.pow(4) - 9 * ni * ni + 3);
            let den = rat_int(8) * rat_int(4 * ni * ni - 1).pow(2) * rat_int(4 * ni * ni - 9);
            assert_eq!(sym[1], num / den, "n={n}");
        }
    }

    #[test]
    fn variance_positivity() {
        for n in 1..=6u32 {
            let cfg = LeadConfig::new(n, n).unwrap();
            assert!(cfg.conductance_variance() > Rat::zero());
            let t = joint_cumulants(&cfg, 0, 2).unwrap();
            let shot = shot_limit(&t);
            assert!(shot[&(0, 2)] > Rat::zero());
        }
    }

    #[test]
    fn boundary_depth_error_reported() {
        let cfg = LeadConfig::new(1, 1).unwrap();
        let kap = conductance_cumulants_extended(&cfg, 3).unwrap();
        match joint_cumulants_from_boundary(&cfg, 2, 2, &kap) {
            Err(Error::BoundaryDepth { required, available }) => {
                assert_eq!((required, available), (6, 3));
            }
            other => panic!("expected boundary depth error, got {other:?}"),
        }
    }
}
