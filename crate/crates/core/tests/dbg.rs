use toda_transport_core::cumulants::conductance_cumulants_extended;
use toda_transport_core::ensemble::LeadConfig;
use toda_transport_core::painleve::{sigma_series, integrate_chazy, jmo_residual};
use toda_transport_core::rational::to_f64;
use toda_transport_core::symbolic::mgf_hankel;

#[test]
fn dbg_sigma_seed_vs_exact() {
    for (nl, nr) in [(2u32,3u32), (3,5)] {
        let cfg = LeadConfig::new(nl, nr).unwrap();
        let f = mgf_hankel(&cfg).unwrap();
        let df = f.derivative();
        let s = sigma_series(&cfg, 12).unwrap();
        for &z in &[0.05, 0.2] {
            let fv = f.eval(z).unwrap();
            let dv = df.eval(z).unwrap();
            let c0 = (cfg.n * (cfg.n + cfg.nu_integer().unwrap())) as f64;
            let exact = c0 + z * dv / fv;
            let (seed, s1, s2) = s.eval_with_derivatives(z);
            println!("({nl},{nr}) z={z}: sigma exact {exact:.12} seed {seed:.12} diff {:.3e}; jmo(seed) {:.3e}", seed-exact, jmo_residual(&cfg, z, seed, s1, s2));
        }
        // Cumulants from two routes
        let kap = conductance_cumulants_extended(&cfg, 12).unwrap();
        let series = toda_transport_core::symbolic::cumulants_from_mgf(&f, 12).unwrap();
        for l in 1..=12 {
            if kap.kappa(l) != &series[l-1] {
                println!("({nl},{nr}) kappa_{l} MISMATCH: rec {} vs series {}", to_f64(kap.kappa(l)), to_f64(&series[l-1]));
            }
        }
        // integrate and compare at a few z
        let sol = integrate_chazy(&cfg, 0.05, 5.0, 1e-11).unwrap();
        for &z in &[0.1, 0.5, 2.0, 5.0] {
            let exact = f.eval(z).unwrap().ln();
            let got = sol.log_mgf_at(z).unwrap();
            println!("({nl},{nr}) z={z}: logF exact {exact:.12} chazy {got:.12} rel {:.3e}", ((got-exact)/exact).abs());
        }
    }
}
