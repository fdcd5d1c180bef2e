//! Exact conductance cumulants from the Painlevé-derived nonlinear
//! recurrence, with a symbolic-MGF series fallback past the singular order,
//! plus joint conductance/noise-power cumulant tables and shot-noise
//! cumulants by two independent routes.

pub mod joint;

pub use joint::{
    joint_cumulants, k_l_1, k_l_1_shot, k_l_2, k_l_2_shot, mean_noise_power, mean_noise_power_shot,
    shot_cumulants_symmetric, shot_limit, shot_recurrence_residual, FEtaPoly, JointCumulantTable,
};

use crate::ensemble::LeadConfig;
use crate::error::{Error, Result};
use crate::rational::{binomial, rat_int, Rat};
use crate::symbolic::mgf::{cumulants_from_mgf, mgf_hankel_indices};
use num_traits::{One, Signed, Zero};

/// Conductance cumulants `kappa_1..kappa_L` for a lead configuration.
#[derive(Debug, Clone)]
pub struct CumulantSeq {
    pub cfg: LeadConfig,
    values: Vec<Rat>,
}

impl CumulantSeq {
    /// `kappa_l`, 1-based.
    pub fn kappa(&self, l: usize) -> &Rat {
        &self.values[l - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }
}

/// Order at which the recurrence's leading coefficient `(2n+nu)^2 - l^2`
/// vanishes, when `2n+nu` is a positive integer.
pub fn singular_order(cfg: &LeadConfig) -> Option<u64> {
    let s = cfg.s();
    if s.is_integer() && s.is_positive() {
        Some(s.to_integer().try_into().expect("positive integer s"))
    } else {
        None
    }
}

/// Cumulants from the recurrence alone. Seeds are the mean and variance;
/// each step solves for `kappa_{l+1}`. Requesting orders at or past the
/// singular order fails with [`Error::RecurrenceSingular`].
pub fn conductance_cumulants(cfg: &LeadConfig, order: usize) -> Result<CumulantSeq> {
    if order < 1 {
        return Err(Error::Config("cumulant order must be >= 1".into()));
    }
    let s = cfg.s();
    let mut values = vec![cfg.mean_conductance()];
    if order >= 2 {
        values.push(cfg.conductance_variance());
    }
    while values.len() < order {
        let l = values.len(); // solving for kappa_{l+1}
        let next = recurrence_step(&s, &values, l)?;
        values.push(next);
    }
    Ok(CumulantSeq { cfg: cfg.clone(), values })
}

/// One step of the recurrence: solve for `kappa_{l+1}` given
/// `kappa_1..kappa_l` (`l >= 2`).
fn recurrence_step(s: &Rat, kappa: &[Rat], l: usize) -> Result<Rat> {
    debug_assert!(l >= 2 && kappa.len() >= l);
    let li = l as i64;
    let lead = (s * s - rat_int(li * li)) * rat_int(li + 1);
    if lead.is_zero() {
        return Err(Error::RecurrenceSingular { order: li });
    }
    // (2n+nu)(2l-1) l kappa_l + l(l-1)(l-2) kappa_{l-1}
    let mut rhs = s * &kappa[l - 1] * rat_int((2 * li - 1) * li);
    rhs += &kappa[l - 2] * rat_int(li * (li - 1) * (li - 2));
    // - 2 sum_j (3j+1)(j-l)^2 C(l,j) kappa_{j+1} kappa_{l-j}
    let mut quad = Rat::zero();
    for j in 0..l {
        let ji = j as i64;
        let c = rat_int((3 * ji + 1) * (ji - li) * (ji - li))
            * Rat::from_integer(binomial(l as u64, j as u64));
        quad += c * &kappa[j] * &kappa[l - j - 1];
    }
    rhs -= quad * rat_int(2);
    // lead * kappa_{l+1} + rhs = 0
    Ok(-rhs / lead)
}

/// Cumulants with the documented fallback: recurrence up to the singular
/// order, exact Taylor series of the symbolic MGF beyond it. The fallback
/// only exists for integer `nu` (rational `nu` never hits a singular order).
pub fn conductance_cumulants_extended(cfg: &LeadConfig, order: usize) -> Result<CumulantSeq> {
    match conductance_cumulants(cfg, order) {
        Ok(seq) => Ok(seq),
        Err(Error::RecurrenceSingular { .. }) => {
            let nu = cfg.nu_integer().ok_or_else(|| {
                Error::Inconsistency("singular order hit with non-integer nu".into())
            })?;
            let f = mgf_hankel_indices(cfg.n, nu)?;
            let values = cumulants_from_mgf(&f, order)?;
            Ok(CumulantSeq { cfg: cfg.clone(), values })
        }
        Err(e) => Err(e),
    }
}

/// Closed form of the third conductance cumulant:
/// `kappa_3 = -2 nu^2 kappa_1^2 / ((2n+nu)((2n+nu)^2-1)((2n+nu)^2-4))`.
///
/// For symmetric leads the `nu^2` factor annihilates the expression before
/// the `(2n+nu)^2-4` factor can vanish, so `nu = 0` returns zero directly.
pub fn kappa3_closed(cfg: &LeadConfig) -> Rat {
    if cfg.nu.is_zero() {
        return Rat::zero();
    }
    let s = cfg.s();
    let k1 = cfg.mean_conductance();
    let nu2 = &cfg.nu * &cfg.nu;
    let s2 = &s * &s;
    -rat_int(2) * nu2 * &k1 * &k1
        / (&s * (&s2 - Rat::one()) * (s2 - rat_int(4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::tensor_quad;
    use crate::rational::{rat_i64, to_f64};

    #[test]
    fn seeds_match_closed_forms() {
        let cfg = LeadConfig::new(1, 1).unwrap();
        let seq = conductance_cumulants(&cfg, 2).unwrap();
        assert_eq!(seq.kappa(1), &rat_i64(1, 2));
        assert_eq!(seq.kappa(2), &rat_i64(1, 12));
        let cfg = LeadConfig::new(1, 2).unwrap();
        let seq = conductance_cumulants(&cfg, 2).unwrap();
        assert_eq!(seq.kappa(1), &rat_i64(2, 3));
        assert_eq!(seq.kappa(2), &rat_i64(1, 18));
    }

    #[test]
    fn third_cumulant_against_direct_moments() {
        // (n, nu) = (1, 1): density 2T on (0,1), kappa_3 = -1/135.
        let cfg = LeadConfig::new(1, 2).unwrap();
        let seq = conductance_cumulants(&cfg, 3).unwrap();
        assert_eq!(seq.kappa(3), &rat_i64(-1, 135));
        assert_eq!(&kappa3_closed(&cfg), seq.kappa(3));
        // (n, nu) = (1, 2): density 3T^2, kappa_3 = -1/160.
        let cfg = LeadConfig::new(3, 1).unwrap();
        let seq = conductance_cumulants(&cfg, 3).unwrap();
        assert_eq!(seq.kappa(3), &rat_i64(-1, 160));
        assert_eq!(&kappa3_closed(&cfg), seq.kappa(3));
    }

    #[test]
    fn closed_form_matches_recurrence_broadly() {
        for nl in 1..=6u32 {
            for nr in nl..=6u32 {
                let cfg = LeadConfig::new(nl, nr).unwrap();
                let seq = conductance_cumulants_extended(&cfg, 3).unwrap();
                assert_eq!(&kappa3_closed(&cfg), seq.kappa(3), "NL={nl} NR={nr}");
            }
        }
    }

    #[test]
    fn uniform_law_oracle_for_single_channel() {
        // n=1, nu=0: G uniform; kappa_m = B_m/m (Bernoulli numbers).
        let cfg = LeadConfig::new(1, 1).unwrap();
        let seq = conductance_cumulants_extended(&cfg, 8).unwrap();
        assert_eq!(seq.kappa(3), &Rat::zero());
        assert_eq!(seq.kappa(4), &rat_i64(-1, 120));
        assert_eq!(seq.kappa(5), &Rat::zero());
        assert_eq!(seq.kappa(6), &rat_i64(1, 252));
        assert_eq!(seq.kappa(8), &rat_i64(-1, 240));
    }

    #[test]
    fn singular_order_diagnostics() {
        // (1,0): s = 2, recurrence cannot produce kappa_3.
        let cfg = LeadConfig::new(1, 1).unwrap();
        assert_eq!(singular_order(&cfg), Some(2));
        match conductance_cumulants(&cfg, 3) {
            Err(Error::RecurrenceSingular { order }) => assert_eq!(order, 2),
            other => panic!("expected singular order error, got {other:?}"),
        }
        // Half-integer effective nu is never singular.
        let cfg = LeadConfig::effective(1, rat_i64(-1, 2)).unwrap();
        assert_eq!(singular_order(&cfg), None);
        assert!(conductance_cumulants(&cfg, 12).is_ok());
    }

    #[test]
    fn recurrence_agrees_with_mgf_series() {
        for (nl, nr) in [(2u32, 2u32), (2, 3), (3, 4), (4, 4)] {
            let cfg = LeadConfig::new(nl, nr).unwrap();
            let limit = singular_order(&cfg).unwrap() as usize;
            let order = limit.min(8);
            let seq = conductance_cumulants(&cfg, order).unwrap();
            let f = mgf_hankel_indices(cfg.n, cfg.nu_integer().unwrap()).unwrap();
            let series = cumulants_from_mgf(&f, order).unwrap();
            for l in 1..=order {
                assert_eq!(seq.kappa(l), &series[l - 1], "NL={nl} NR={nr} l={l}");
            }
        }
    }

    #[test]
    fn half_integer_cumulants_against_direct_moments() {
        // nu = -1/2, n = 1: density T^(-1/2)/2 on (0,1); kappa_3 = 16/945.
        let cfg = LeadConfig::effective(1, rat_i64(-1, 2)).unwrap();
        let seq = conductance_cumulants(&cfg, 3).unwrap();
        assert_eq!(seq.kappa(1), &rat_i64(1, 3));
        assert_eq!(seq.kappa(2), &rat_i64(4, 45));
        assert_eq!(seq.kappa(3), &rat_i64(16, 945));
        // nu = +1/2, n = 1: density 3 T^(1/2)/2; kappa_3 = -16/2625.
        let cfg = LeadConfig::effective(1, rat_i64(1, 2)).unwrap();
        let seq = conductance_cumulants(&cfg, 3).unwrap();
        assert_eq!(seq.kappa(3), &rat_i64(-16, 2625));
    }

    #[test]
    fn third_cumulant_against_quadrature() {
        // 2-dim eigenvalue integral for (n, nu) = (2, 1): raw moments by
        // quadrature, kappa_3 = E3 - 3 E2 E1 + 2 E1^3. Expect -1/875.
        let cfg = LeadConfig::new(2, 3).unwrap();
        let norm = to_f64(&crate::ensemble::normalization_c(2, 1));
        let raw = |p: u32| {
            tensor_quad(
                &|t: &[f64]| {
                    let g = t[0] + t[1];
                    (t[1] - t[0]).powi(2) * t[0] * t[1] * g.powi(p as i32)
                },
                0.0,
                1.0,
                2,
                60,
            ) / norm
        };
        let (e1, e2, e3) = (raw(1), raw(2), raw(3));
        let k3 = e3 - 3.0 * e2 * e1 + 2.0 * e1 * e1 * e1;
        let exact = to_f64(&kappa3_closed(&cfg));
        assert!((k3 - exact).abs() < 1e-12, "quadrature {k3} vs closed {exact}");
        assert!((exact - to_f64(&rat_i64(-1, 875))).abs() < 1e-15);
    }

    #[test]
    fn consistency_identity_at_singular_order() {
        // At l = 2n+nu the recurrence degenerates to an identity: the
        // remaining terms cancel exactly for the true cumulants.
        let cfg = LeadConfig::new(2, 2).unwrap();
        let seq = conductance_cumulants_extended(&cfg, 4).unwrap();
        let s = cfg.s();
        let l = 4i64;
        let mut residual = s * seq.kappa(4) * rat_int((2 * l - 1) * l);
        residual += seq.kappa(3) * rat_int(l * (l - 1) * (l - 2));
        let mut quad = Rat::zero();
        for j in 0..l {
            let c = rat_int((3 * j + 1) * (j - l) * (j - l))
                * Rat::from_integer(binomial(l as u64, j as u64));
            quad += c * seq.kappa(j as usize + 1) * seq.kappa((l - j) as usize);
        }
        residual -= quad * rat_int(2);
        assert!(residual.is_zero());
    }
}
