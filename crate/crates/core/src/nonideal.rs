//! Transport statistics for a cavity probed through one ideal and one
//! tunnel-coupled lead: reflection-eigenvalue JPDF with a Gauss
//! hypergeometric determinant, the conductance MGF as a determinant of
//! one-dimensional integrals, and the two-dimensional Toda Lattice identity.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_quad;
use crate::rational::{factorial, pow_i, to_f64, Rat};
use num_traits::One;

/// Lead configuration with mode-independent tunneling in the left lead:
/// `gamma2` is the squared reflection amplitude of the barrier, tunnel
/// probability `Gamma = 1 - gamma2`; the right lead (with `N_R >= N_L`
/// channels) is ideal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelConfig {
    pub n_left: u32,
    pub n_right: u32,
    pub gamma2: f64,
}

impl TunnelConfig {
    pub fn new(n_left: u32, n_right: u32, gamma2: f64) -> Result<Self> {
        if n_left == 0 || n_right < n_left {
            return Err(Error::Config(format!(
                "need 1 <= N_L <= N_R, got N_L = {n_left}, N_R = {n_right}"
            )));
        }
        if !(0.0..1.0).contains(&gamma2) {
            return Err(Error::Config(format!("gamma2 must lie in [0, 1), got {gamma2}")));
        }
        Ok(TunnelConfig { n_left, n_right, gamma2 })
    }

    pub fn from_tunnel_probability(n_left: u32, n_right: u32, gamma_prob: f64) -> Result<Self> {
        if !(0.0 < gamma_prob && gamma_prob <= 1.0) {
            return Err(Error::Config(format!("tunnel probability must be in (0, 1], got {gamma_prob}")));
        }
        TunnelConfig::new(n_left, n_right, 1.0 - gamma_prob)
    }
}

/// Terminating-series coefficients of
/// `2F1(N_R + k, N_R + k; k; x) = (1-x)^(-2 N_R - k) * P(x)` with
/// `P(x) = sum_{j=0}^{N_R} [(-N_R)_j]^2 / [(k)_j j!] x^j`
/// (Euler transformation; `c - a = -N_R` truncates the series).
fn euler_poly_coeffs(n_right: u32, k: u32) -> Vec<Rat> {
    let nr = n_right as i64;
    let mut coeffs = Vec::with_capacity(n_right as usize + 1);
    let mut poch_sq = Rat::one(); // [(-N_R)_j]^2
    let mut denom = Rat::one(); // (k)_j j!
    for j in 0..=nr {
        if j > 0 {
            let step = Rat::from_integer((-nr + j - 1).into());
            poch_sq *= &step * &step;
            denom *= Rat::from_integer((k as i64 + j - 1).into())
                * Rat::from_integer(j.into());
        }
        coeffs.push(&poch_sq / &denom);
    }
    coeffs
}

/// `2F1(N_R + k, N_R + k; k; x)` for `0 <= x < 1`, `k >= 1`, via the
/// terminating Euler transform, in exact rational arithmetic.
pub fn gauss_2f1_transport_exact(n_right: u32, k: u32, x: &Rat) -> Result<Rat> {
    if k < 1 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if x < &Rat::from_integer(0.into()) || x >= &Rat::one() {
        return Err(Error::Domain(format!("x must lie in [0, 1), got {x}")));
    }
    let coeffs = euler_poly_coeffs(n_right, k);
    let mut poly = Rat::from_integer(0.into());
    for c in coeffs.iter().rev() {
        poly = poly * x + c;
    }
    let pref = pow_i(&(Rat::one() - x), -(2 * n_right as i64 + k as i64));
    Ok(pref * poly)
}

/// Floating-point evaluation of the same terminating form.
pub fn gauss_2f1_transport(n_right: u32, k: u32, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1), got {x}")));
    }
    if k < 1 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    let coeffs = euler_poly_coeffs(n_right, k);
    let mut poly = 0.0;
    for c in coeffs.iter().rev() {
        poly = poly * x + to_f64(c);
    }
    Ok((1.0 - x).powi(-(2 * n_right as i64 + k as i64) as i32) * poly)
}

/// Direct (non-terminating) Gauss series, used only as a cross-check oracle.
pub fn gauss_2f1_direct_series(a: f64, b: f64, c: f64, x: f64, tol: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..100_000 {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * x;
        sum += term;
        if term.abs() < tol * sum.abs() {
            break;
        }
    }
    sum
}

/// `gamma`-independent prefactor of the reflection JPDF:
/// `c(N_L,N_R) = N_L! N_R!/(N_L+N_R)! * prod_j 1/(j!)^2
///              * prod_j (N_R+j)!/(N_R-j)!`.
pub fn jpdf_prefactor(n_left: u32, n_right: u32) -> Rat {
    let nl = n_left as u64;
    let nr = n_right as u64;
    let mut c = Rat::new(factorial(nl) * factorial(nr), factorial(nl + nr));
    for j in 1..=nl {
        let fj = factorial(j);
        c /= Rat::from_integer(&fj * &fj);
        c *= Rat::new(factorial(nr + j), factorial(nr - j));
    }
    c
}

/// Joint probability density of the reflection eigenvalues
/// `R in (0,1)^{N_L}` (distinct entries; coincidences give zero through the
/// Vandermonde factor).
pub fn jpdf_reflection(r: &[f64], cfg: &TunnelConfig) -> Result<f64> {
    let nl = cfg.n_left as usize;
    if r.len() != nl {
        return Err(Error::Domain(format!("expected {nl} eigenvalues, got {}", r.len())));
    }
    if r.iter().any(|&v| !(0.0 < v && v < 1.0)) {
        return Err(Error::Domain("reflection eigenvalues must lie strictly in (0,1)".into()));
    }
    let nu = (cfg.n_right - cfg.n_left) as i32;
    let mut vandermonde = 1.0;
    for j in 0..nl {
        for i in 0..j {
            vandermonde *= r[j] - r[i];
        }
    }
    let mut weight = 1.0;
    for &rj in r {
        weight *= (1.0 - rj).powi(nu);
    }
    let mut matrix = vec![vec![0.0; nl]; nl];
    for (j, &rj) in r.iter().enumerate() {
        for k in 1..=nl {
            matrix[j][k - 1] =
                rj.powi(k as i32 - 1) * gauss_2f1_transport(cfg.n_right, k as u32, cfg.gamma2 * rj)?;
        }
    }
    let (det, _) = det_lu(&mut matrix);
    if !det.is_finite() {
        return Err(Error::Numerical("non-finite hypergeometric determinant".into()));
    }
    let pref = to_f64(&jpdf_prefactor(cfg.n_left, cfg.n_right))
        * (1.0 - cfg.gamma2).powi((cfg.n_left * (cfg.n_left + cfg.n_right)) as i32);
    Ok(pref * vandermonde * weight * det)
}

/// Determinant by partial-pivot elimination, returning the growth-based
/// condition estimate alongside (ratio of largest to smallest pivot).
pub fn det_lu(matrix: &mut [Vec<f64>]) -> (f64, f64) {
    let n = matrix.len();
    let mut det = 1.0;
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let mut pivot_row = col;
        for row in col + 1..n {
            if matrix[row][col].abs() > matrix[pivot_row][col].abs() {
                pivot_row = row;
            }
        }
        if pivot_row != col {
            matrix.swap(col, pivot_row);
            det = -det;
        }
        let pivot = matrix[col][col];
        if pivot == 0.0 {
            return (0.0, f64::INFINITY);
        }
        max_pivot = max_pivot.max(pivot.abs());
        min_pivot = min_pivot.min(pivot.abs());
        det *= pivot;
        for row in col + 1..n {
            let factor = matrix[row][col] / pivot;
            for k in col..n {
                matrix[row][k] -= factor * matrix[col][k];
            }
        }
    }
    (det, max_pivot / min_pivot)
}

/// Matrix entry of the MGF determinant:
/// `M_jk = int_0^1 e^{zR} (1-R)^(N_R-N_L) R^(j+k-2)
///        2F1(N_R+k, N_R+k; k; gamma2 R) dR`  (1-based `j`, `k`).
pub fn mgf_entry(cfg: &TunnelConfig, z: f64, j: u32, k: u32) -> Result<f64> {
    let nu = (cfg.n_right - cfg.n_left) as i32;
    let coeffs: Vec<f64> = euler_poly_coeffs(cfg.n_right, k).iter().map(to_f64).collect();
    let power = -(2 * cfg.n_right as i32 + k as i32);
    let gamma2 = cfg.gamma2;
    let f = move |r: f64| {
        let x = gamma2 * r;
        let mut poly = 0.0;
        for c in coeffs.iter().rev() {
            poly = poly * x + c;
        }
        let hyp = (1.0 - x).powi(power) * poly;
        (z * r).exp() * (1.0 - r).powi(nu) * r.powi((j + k) as i32 - 2) * hyp
    };
    adaptive_quad(&f, 0.0, 1.0, 1e-12)
        .map_err(|e| Error::Quadrature(format!("MGF entry ({j},{k}): {e}")))
}

/// Conductance MGF `F(gamma2, z) = N_L! c_gamma e^(-N_L z) det[M_jk]`.
/// Warns through the returned condition estimate; `F(gamma2, 0) = 1`.
pub struct NonidealMgf {
    pub value: f64,
    pub condition: f64,
}

pub fn mgf_nonideal(cfg: &TunnelConfig, z: f64) -> Result<NonidealMgf> {
    let nl = cfg.n_left as usize;
    let mut matrix = vec![vec![0.0; nl]; nl];
    for j in 1..=nl {
        for k in 1..=nl {
            matrix[j - 1][k - 1] = mgf_entry(cfg, z, j as u32, k as u32)?;
        }
    }
    let (det, condition) = det_lu(&mut matrix);
    let pref = to_f64(&jpdf_prefactor(cfg.n_left, cfg.n_right))
        * (1.0 - cfg.gamma2).powi((cfg.n_left * (cfg.n_left + cfg.n_right)) as i32)
        * to_f64(&Rat::from_integer(factorial(cfg.n_left as u64)))
        * (-(cfg.n_left as f64) * z).exp();
    let value = pref * det;
    if !value.is_finite() {
        return Err(Error::Numerical("non-finite MGF determinant".into()));
    }
    Ok(NonidealMgf { value, condition })
}

/// `u_n(gamma2, z) = det[ d^{j-1}_z d^{k-1}_{gamma2} M_11 ]_{j,k=1..n}`.
///
/// Using `d/dx 2F1(a,b;c;x) = (ab/c) 2F1(a+1,b+1;c+1;x)` the mixed
/// derivatives reduce to scaled MGF entries:
/// `d^{j-1}_z d^{k-1}_{gamma2} M_11 = [(N_R+1)_{k-1}]^2/(k-1)! * M_jk`.
pub fn toda2d_u(cfg: &TunnelConfig, z: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let mut matrix = vec![vec![0.0; n as usize]; n as usize];
    for j in 1..=n {
        for k in 1..=n {
            let mut scale = 1.0;
            for i in 0..(k - 1) as i64 {
                let p = (cfg.n_right as i64 + 1 + i) as f64;
                scale *= p * p / (i as f64 + 1.0);
            }
            matrix[(j - 1) as usize][(k - 1) as usize] = scale * mgf_entry(cfg, z, j, k)?;
        }
    }
    let (det, _) = det_lu(&mut matrix);
    Ok(det)
}

/// Residual of the two-dimensional Toda Lattice identity
/// `|d^2/(dz dgamma2) log u_n - u_{n-1} u_{n+1} / u_n^2|`,
/// with the mixed derivative by 4-point central differences of step `h`.
pub fn toda2d_residual(cfg: &TunnelConfig, z: f64, n: u32, h: f64) -> Result<f64> {
    if cfg.gamma2 - h <= 0.0 || cfg.gamma2 + h >= 1.0 {
        return Err(Error::Domain("gamma2 stencil leaves (0,1)".into()));
    }
    let u_at = |zp: f64, g2: f64, nn: u32| -> Result<f64> {
        let c = TunnelConfig { gamma2: g2, ..*cfg };
        toda2d_u(&c, zp, nn)
    };
    let mut logs = [[0.0; 2]; 2];
    for (a, dz) in [(-h, 0), (h, 1)].map(|(d, i)| (d, i)) {
        for (b, dg) in [(-h, 0), (h, 1)].map(|(d, i)| (d, i)) {
            let u = u_at(z + a, cfg.gamma2 + b, n)?;
            if u <= 0.0 {
                return Err(Error::Numerical(format!(
                    "u_{n} = {u} <= 0 at stencil point; log undefined"
                )));
            }
            logs[dz][dg] = u.ln();
        }
    }
    let mixed = (logs[1][1] - logs[1][0] - logs[0][1] + logs[0][0]) / (4.0 * h * h);
    let um = u_at(z, cfg.gamma2, n - 1)?;
    let u0 = u_at(z, cfg.gamma2, n)?;
    let up = u_at(z, cfg.gamma2, n + 1)?;
    Ok((mixed - um * up / (u0 * u0)).abs())
}

/// `F(gamma2, z)` through the Darboux sequence: the MGF equals
/// `c~_gamma e^{-N_L z} u_{N_L}`; used to cross-check the two constant
/// conventions.
pub fn mgf_from_u(cfg: &TunnelConfig, z: f64) -> Result<f64> {
    let u = toda2d_u(cfg, z, cfg.n_left)?;
    let nl = cfg.n_left as u64;
    let nr = cfg.n_right as u64;
    // N_L! (1-g)^... (N_L+N_R)!/(N_L! N_R!) prod_{j=0}^{N_L-1} 1/j!
    //   prod_{j=1}^{N_L} (N_R!)^2/((N_R-j)!(N_R+j)!)
    let mut c = Rat::new(factorial(nl + nr) * factorial(nl), factorial(nl) * factorial(nr));
    for j in 0..nl {
        c /= Rat::from_integer(factorial(j));
    }
    for j in 1..=nl {
        let num = factorial(nr) * factorial(nr);
        c *= Rat::new(num, factorial(nr - j) * factorial(nr + j));
    }
    Ok(to_f64(&c)
        * (1.0 - cfg.gamma2).powi((cfg.n_left * (cfg.n_left + cfg.n_right)) as i32)
        * (-(cfg.n_left as f64) * z).exp()
        * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::normalization_c;
    use crate::quadrature::tensor_quad;
    use crate::rational::rat_i64;
    use crate::symbolic::mgf::mgf_hankel_indices;

    #[test]
    fn hypergeometric_terminating_vs_known_value() {
        // 2F1(2,2;1;x) = (1+x)/(1-x)^3; at x = 1/2 the value is 12.
        let v = gauss_2f1_transport(1, 1, 0.5).unwrap();
        assert!((v - 12.0).abs() < 1e-12);
        let exact = gauss_2f1_transport_exact(1, 1, &rat_i64(1, 2)).unwrap();
        assert_eq!(exact, Rat::from_integer(12.into()));
        assert_eq!(gauss_2f1_transport(3, 2, 0.0).unwrap(), 1.0);
        assert!(gauss_2f1_transport(1, 1, 1.0).is_err());
    }

    #[test]
    fn hypergeometric_two_methods_agree() {
        for nr in 1..=4u32 {
            for k in 1..=4u32 {
                for &x in &[0.05, 0.3, 0.75] {
                    let a = gauss_2f1_transport(nr, k, x).unwrap();
                    let b = gauss_2f1_direct_series(
                        (nr + k) as f64,
                        (nr + k) as f64,
                        k as f64,
                        x,
                        1e-16,
                    );
                    assert!((a / b - 1.0).abs() < 1e-12, "nr={nr} k={k} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn prefactor_values() {
        assert_eq!(jpdf_prefactor(1, 1), Rat::one());
        assert_eq!(jpdf_prefactor(1, 2), Rat::from_integer(2.into()));
        assert_eq!(jpdf_prefactor(2, 2), Rat::from_integer(6.into()));
        // gamma -> 0 limit must invert normalization_c.
        for (nl, nr) in [(1u32, 3u32), (2, 3), (2, 4)] {
            let c = jpdf_prefactor(nl, nr);
            let cn = normalization_c(nl, nr - nl);
            assert_eq!(c * cn, Rat::one(), "({nl},{nr})");
        }
    }

    #[test]
    fn jpdf_single_channel_normalizes() {
        for nr in 1..=3u32 {
            for &g2 in &[0.1, 0.5, 0.9] {
                let cfg = TunnelConfig::new(1, nr, g2).unwrap();
                let total = adaptive_quad(
                    &|r: f64| jpdf_reflection(&[r], &cfg).unwrap(),
                    1e-12,
                    1.0 - 1e-12,
                    1e-11,
                )
                .unwrap();
                assert!((total - 1.0).abs() < 1e-10, "N_R={nr} g2={g2}: {total}");
            }
        }
    }

    #[test]
    fn jpdf_two_channels_normalizes() {
        let cfg = TunnelConfig::new(2, 2, 0.25).unwrap();
        let total = tensor_quad(
            &|p: &[f64]| jpdf_reflection(&[p[0], p[1]], &cfg).unwrap(),
            1e-10,
            1.0 - 1e-10,
            2,
            80,
        );
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn jpdf_ballistic_limit_recovers_transmission_law() {
        // gamma2 -> 0 reduces to the ideal JPDF under T = 1 - R.
        let cfg0 = TunnelConfig::new(2, 3, 0.0).unwrap();
        let cfg_eps = TunnelConfig::new(2, 3, 1e-8).unwrap();
        let norm = to_f64(&normalization_c(2, 1));
        for (a, b) in [(0.2, 0.7), (0.1, 0.4), (0.55, 0.9)] {
            let p0 = jpdf_reflection(&[a, b], &cfg0).unwrap();
            let p_eps = jpdf_reflection(&[a, b], &cfg_eps).unwrap();
            // Ideal law in T = 1 - R.
            let (t1, t2) = (1.0 - a, 1.0 - b);
            let ideal = (t2 - t1).powi(2) * t1 * t2 / norm;
            assert!((p0 - ideal).abs() < 1e-10 * ideal.abs().max(1.0), "{p0} vs {ideal}");
            assert!((p_eps - p0).abs() < 1e-5);
        }
    }

    #[test]
    fn jpdf_rejects_bad_input() {
        let cfg = TunnelConfig::new(1, 2, 0.3).unwrap();
        assert!(jpdf_reflection(&[1.5], &cfg).is_err());
        assert!(jpdf_reflection(&[0.1, 0.2], &cfg).is_err());
        assert!(TunnelConfig::new(2, 1, 0.3).is_err());
        assert!(TunnelConfig::new(1, 2, 1.0).is_err());
    }

    #[test]
    fn mgf_normalization_at_zero() {
        for (nl, nr) in [(1u32, 1u32), (1, 2), (2, 2), (2, 3), (3, 4)] {
            for &g2 in &[0.0, 0.3, 0.8] {
                let cfg = TunnelConfig::new(nl, nr, g2).unwrap();
                let m = mgf_nonideal(&cfg, 0.0).unwrap();
                assert!(
                    (m.value - 1.0).abs() < 1e-10,
                    "({nl},{nr}) g2={g2}: {} (cond {})",
                    m.value,
                    m.condition
                );
            }
        }
    }

    #[test]
    fn mgf_ballistic_limit_matches_ideal_mgf() {
        let cfg = TunnelConfig::new(2, 3, 0.0).unwrap();
        let ideal = mgf_hankel_indices(2, 1).unwrap();
        for &z in &[0.5, 1.0, 2.0] {
            let got = mgf_nonideal(&cfg, z).unwrap().value;
            let want = ideal.eval_f64(z, 192).unwrap();
            assert!((got - want).abs() < 1e-9, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn mgf_decreasing_in_z() {
        let cfg = TunnelConfig::new(1, 2, 0.4).unwrap();
        let mut prev = 1.0 + 1e-12;
        for i in 0..8 {
            let z = i as f64 * 0.5;
            let v = mgf_nonideal(&cfg, z).unwrap().value;
            assert!(v > 0.0 && v <= prev, "z={z}: {v} vs {prev}");
            prev = v;
        }
    }

    #[test]
    fn mean_conductance_from_mgf_and_jpdf() {
        // -d/dz log F at 0 equals E[1 - R] for N_L = N_R = 1.
        let cfg = TunnelConfig::new(1, 1, 0.35).unwrap();
        let h = 1e-4;
        let fp = mgf_nonideal(&cfg, h).unwrap().value;
        let fm = mgf_nonideal(&cfg, -h).unwrap().value;
        let mean_mgf = -(fp.ln() - fm.ln()) / (2.0 * h);
        let mean_jpdf = adaptive_quad(
            &|r: f64| (1.0 - r) * jpdf_reflection(&[r], &cfg).unwrap(),
            1e-12,
            1.0 - 1e-12,
            1e-11,
        )
        .unwrap();
        assert!((mean_mgf - mean_jpdf).abs() < 1e-7, "{mean_mgf} vs {mean_jpdf}");
    }

    #[test]
    fn mgf_from_u_matches_direct_determinant() {
        let cfg = TunnelConfig::new(2, 3, 0.3).unwrap();
        for &z in &[0.0, 0.7] {
            let a = mgf_from_u(&cfg, z).unwrap();
            let b = mgf_nonideal(&cfg, z).unwrap().value;
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn toda2d_residual_second_order_single_channel() {
        let cfg = TunnelConfig::new(1, 2, 0.3).unwrap();
        let r1 = toda2d_residual(&cfg, 0.5, 1, 1e-2).unwrap();
        let r2 = toda2d_residual(&cfg, 0.5, 1, 5e-3).unwrap();
        let r3 = toda2d_residual(&cfg, 0.5, 1, 2.5e-3).unwrap();
        let o1 = (r1 / r2).log2();
        let o2 = (r2 / r3).log2();
        assert!((1.6..=2.4).contains(&o1), "order {o1} ({r1} -> {r2})");
        assert!((1.5..=2.5).contains(&o2), "order {o2} ({r2} -> {r3})");
    }

    #[test]
    fn toda2d_residual_small_two_channels() {
        let cfg = TunnelConfig::new(2, 3, 0.3).unwrap();
        let r = toda2d_residual(&cfg, 0.5, 2, 1e-3).unwrap();
        assert!(r < 1e-4, "residual {r}");
    }
}
