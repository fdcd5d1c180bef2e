//! Joint moment generating function of conductance and noise power by
//! direct quadrature: an Andreief reduction turns the n-dimensional
//! eigenvalue integral into a determinant of one-dimensional integrals.
//! Used as an oracle against the exact joint-cumulant engine and the
//! one-dimensional Toda Lattice identity in the Laplace variable.

use crate::ensemble::{normalization_c, LeadConfig};
use crate::error::{Error, Result};
use crate::nonideal::det_lu;
use crate::quadrature::adaptive_quad;
use crate::rational::{factorial, to_f64, Rat};

/// `F_n(z, w) = (n!/c_{n,nu}) det[ int_0^1 T^(nu+j+k) G_{z,w}(T) dT ]` with
/// the weight `G_{z,w}(T) = exp(-(z+w) T - w f_eta T(1-T))`.
/// Determinants stay cheap only for small `n`; the guard is `n <= 4`.
pub fn jmgf_quadrature(cfg: &LeadConfig, f_eta: f64, z: f64, w: f64) -> Result<f64> {
    let nu = cfg
        .nu_integer()
        .ok_or_else(|| Error::Config(format!("integer nu required, got {}", cfg.nu)))?;
    let n = cfg.n as usize;
    if n > 4 {
        return Err(Error::Config(format!("joint quadrature limited to n <= 4, got {n}")));
    }
    let mut matrix = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            let power = (nu as i32) + (j + k) as i32;
            let entry = adaptive_quad(
                &|t: f64| {
                    t.powi(power) * (-(z + w) * t - w * f_eta * t * (1.0 - t)).exp()
                },
                0.0,
                1.0,
                1e-12,
            )
            .map_err(|e| Error::Quadrature(format!("entry ({j},{k}): {e}")))?;
            matrix[j][k] = entry;
        }
    }
    let (det, _) = det_lu(&mut matrix);
    let pref = to_f64(&(Rat::from_integer(factorial(n as u64)) / normalization_c(cfg.n, nu)));
    Ok(pref * det)
}

/// Residual of the one-dimensional Toda Lattice identity in `z` for the
/// joint MGF, with derivatives by central differences of step `h`:
/// `F_n d2F_n - (dF_n)^2 - var_{n,nu}(G) F_{n-1} F_{n+1}` at `(z, w)`.
pub fn toda_joint_residual(
    cfg: &LeadConfig,
    f_eta: f64,
    z: f64,
    w: f64,
    h: f64,
) -> Result<f64> {
    toda_joint_residual_with_var(cfg, f_eta, z, w, h, to_f64(&cfg.conductance_variance()))
}

/// Same residual with an explicit variance factor (sensitivity hook).
pub fn toda_joint_residual_with_var(
    cfg: &LeadConfig,
    f_eta: f64,
    z: f64,
    w: f64,
    h: f64,
    var: f64,
) -> Result<f64> {
    let at = |n: u32, zz: f64| -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let c = LeadConfig::effective(n, cfg.nu.clone())?;
        jmgf_quadrature(&c, f_eta, zz, w)
    };
    let f0 = at(cfg.n, z)?;
    let fp = at(cfg.n, z + h)?;
    let fm = at(cfg.n, z - h)?;
    let d1 = (fp - fm) / (2.0 * h);
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let lower = at(cfg.n - 1, z)?;
    let upper = at(cfg.n + 1, z)?;
    Ok(f0 * d2 - d1 * d1 - var * lower * upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::joint_cumulants;
    use crate::ensemble::thermo_factor;
    use crate::rational::from_f64;
    use crate::symbolic::mgf::mgf_hankel_indices;

    #[test]
    fn reduces_to_conductance_mgf_at_zero_w() {
        for (nl, nr) in [(1u32, 1u32), (2, 3)] {
            let cfg = LeadConfig::new(nl, nr).unwrap();
            let f = mgf_hankel_indices(cfg.n, cfg.nu_integer().unwrap()).unwrap();
            for &z in &[0.4, 1.3] {
                let a = jmgf_quadrature(&cfg, 0.7, z, 0.0).unwrap();
                let b = f.eval_f64(z, 192).unwrap();
                assert!((a - b).abs() < 1e-10, "({nl},{nr}) z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normalized_at_origin() {
        let cfg = LeadConfig::new(2, 2).unwrap();
        let v = jmgf_quadrature(&cfg, 0.3130352854993314, 0.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
        assert!(jmgf_quadrature(&LeadConfig::new(5, 5).unwrap(), 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn mixed_derivative_matches_joint_cumulant() {
        // kappa_{1,1} ~ d^2/dz dw log F at 0 (finite differences, step 1e-3)
        // against the exact table entry evaluated at f(eta = 1).
        let cfg = LeadConfig::new(1, 1).unwrap();
        let f_eta = thermo_factor(1.0).unwrap().f_eta;
        let h = 1e-3;
        let lf = |z: f64, w: f64| jmgf_quadrature(&cfg, f_eta, z, w).map(|v| v.ln());
        let mixed = (lf(h, h).unwrap() - lf(h, -h).unwrap() - lf(-h, h).unwrap()
            + lf(-h, -h).unwrap())
            / (4.0 * h * h);
        let table = joint_cumulants(&cfg, 1, 1).unwrap();
        let exact = to_f64(&table.get(1, 1).unwrap().eval(&from_f64(f_eta)));
        // log F = ... + (-1)^(1+1) kappa_{1,1} z w + ...
        assert!((mixed - exact).abs() < 1e-5, "{mixed} vs {exact}");
    }

    #[test]
    fn joint_toda_residual_second_order_in_h() {
        let cfg = LeadConfig::new(1, 1).unwrap();
        let f_eta = thermo_factor(1.0).unwrap().f_eta;
        let r1 = toda_joint_residual(&cfg, f_eta, 0.5, 0.3, 2e-2).unwrap().abs();
        let r2 = toda_joint_residual(&cfg, f_eta, 0.5, 0.3, 1e-2).unwrap().abs();
        let order = (r1 / r2).log2();
        assert!((1.5..=2.5).contains(&order), "order {order} ({r1} -> {r2})");
    }

    #[test]
    fn joint_toda_sensitive_to_variance() {
        let cfg = LeadConfig::new(1, 1).unwrap();
        let f_eta = thermo_factor(1.0).unwrap().f_eta;
        let var = to_f64(&cfg.conductance_variance());
        let good = toda_joint_residual(&cfg, f_eta, 0.5, 0.3, 1e-3).unwrap().abs();
        let bad = toda_joint_residual_with_var(&cfg, f_eta, 0.5, 0.3, 1e-3, var * 1.01)
            .unwrap()
            .abs();
        assert!(bad > 10.0 * good, "good {good}, bad {bad}");
    }

    #[test]
    fn w_zero_toda_matches_symbolic_identity() {
        // At w = 0 the identity is the symbolic Toda equation; the residual
        // is pure discretization error.
        let cfg = LeadConfig::new(2, 2).unwrap();
        let r = toda_joint_residual(&cfg, 0.5, 0.8, 0.0, 1e-3).unwrap().abs();
        assert!(r < 1e-7, "residual {r}");
    }
}
