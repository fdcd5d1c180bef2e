//! Independent statistical oracle: scattering matrices sampled from the
//! circular unitary ensemble (ideal leads) or from the Hamiltonian model
//! (tunnel leads), transport observables, and unbiased cumulant estimation.
//!
//! Sampling is embarrassingly parallel over workers with independent,
//! reproducible RNG streams; the reduction order is fixed by worker index,
//! so a given (seed, workers) pair is bit-deterministic.

pub mod jmgf;
pub mod kstats;
pub mod stats;

pub use kstats::{estimate_cumulants, CumulantEstimate};

use crate::ensemble::{thermo_factor, Eta, LeadConfig};
use crate::error::{Error, Result};
use crate::nonideal::TunnelConfig;
use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type C64 = Complex<f64>;

/// One scattering matrix with its lead split.
#[derive(Debug, Clone)]
pub struct ScatteringSample {
    pub s: DMatrix<C64>,
    pub n_left: usize,
    pub n_right: usize,
}

impl ScatteringSample {
    /// `|| S S' - 1 ||` (max entry deviation, S' the conjugate transpose).
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.s.nrows();
        let prod = &self.s * self.s.adjoint();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((prod[(i, j)] - C64::new(expect, 0.0)).norm());
            }
        }
        defect
    }

    /// Gram matrix `t t'` of the transmission block (left rows, right cols).
    fn transmission_gram(&self) -> DMatrix<C64> {
        let t = self.s.view((0, self.n_left), (self.n_left, self.n_right));
        &t * t.adjoint()
    }

    /// `G = tr t t'`.
    pub fn conductance(&self) -> f64 {
        self.transmission_gram().trace().re
    }

    /// `P_shot = tr t t' - tr (t t')^2 = sum T_j (1 - T_j)`.
    pub fn shot_noise(&self) -> f64 {
        let g = self.transmission_gram();
        let sq = &g * &g;
        g.trace().re - sq.trace().re
    }

    /// Transmission eigenvalues (the `min(N_L, N_R)` nonzero spectrum of
    /// `t t'`).
    pub fn transmission_eigenvalues(&self) -> Vec<f64> {
        let g = self.transmission_gram();
        let mut eig: Vec<f64> = g
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        eig.truncate(self.n_left.min(self.n_right));
        eig
    }

    /// Reflection eigenvalues (spectrum of `r r'`, left block).
    pub fn reflection_eigenvalues(&self) -> Vec<f64> {
        let r = self.s.view((0, 0), (self.n_left, self.n_left));
        let g = &r * r.adjoint();
        g.symmetric_eigenvalues().iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

/// Haar-distributed unitary via complex Ginibre, QR, and the mandatory
/// phase correction `Q -> Q diag(r_jj / |r_jj|)` (plain QR is not Haar).
pub fn sample_haar_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let ginibre = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Transport observables of one sample: conductance, shot-noise power and,
/// for finite `eta`, the total noise power `P = G + f_eta P_shot`.
pub fn observables(sample: &ScatteringSample, eta: Eta) -> Result<(f64, f64, Option<f64>)> {
    let g = sample.conductance();
    let p_shot = sample.shot_noise();
    let p = match eta {
        Eta::Finite(e) => Some(g + thermo_factor(e)?.f_eta * p_shot),
        Eta::Shot => None,
    };
    Ok((g, p_shot, p))
}

/// Seed/worker configuration for reproducible parallel sampling.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { seed: 42, workers: 2 }
    }
}

fn worker_rng(seed: u64, worker: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64 + 1);
    rng
}

fn chunk_sizes(total: usize, workers: usize) -> Vec<usize> {
    let workers = workers.max(1);
    let base = total / workers;
    (0..workers).map(|w| base + usize::from(w < total % workers)).collect()
}

/// Conductance and shot-noise samples from the circular unitary ensemble.
#[derive(Debug, Clone)]
pub struct TransportRun {
    pub g: Vec<f64>,
    pub p_shot: Vec<f64>,
}

pub fn run_cue(cfg: &LeadConfig, samples: usize, mc: &McConfig) -> TransportRun {
    let n_total = (cfg.n_left + cfg.n_right) as usize;
    let chunks = chunk_sizes(samples, mc.workers);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = chunks
        .par_iter()
        .enumerate()
        .map(|(w, &count)| {
            let mut rng = worker_rng(mc.seed, w);
            let mut g = Vec::with_capacity(count);
            let mut p = Vec::with_capacity(count);
            for _ in 0..count {
                let s = sample_haar_unitary(n_total, &mut rng);
                let sample = ScatteringSample {
                    s,
                    n_left: cfg.n_left as usize,
                    n_right: cfg.n_right as usize,
                };
                g.push(sample.conductance());
                p.push(sample.shot_noise());
            }
            (g, p)
        })
        .collect();
    let mut g = Vec::with_capacity(samples);
    let mut p_shot = Vec::with_capacity(samples);
    for (gs, ps) in parts {
        g.extend(gs);
        p_shot.extend(ps);
    }
    TransportRun { g, p_shot }
}

/// Scattering matrix of the Hamiltonian model at the band center:
/// `S = 1 - 2 i pi W'(-H + i pi W W')^{-1} W`, with an `M x M` GUE
/// Hamiltonian (semicircle radius 2, mean level spacing `pi/M` at the
/// center) and fixed orthogonal coupling columns scaled so the eigenvalues
/// of `pi^2 W'W/(M Delta)` equal `w = (1-gamma)/(1+gamma)`,
/// `gamma = sqrt(1-Gamma)`, for the tunnel lead and `w = 1` for the ideal
/// one.
pub fn heidelberg_smatrix<R: Rng>(
    m_dim: usize,
    cfg: &TunnelConfig,
    rng: &mut R,
) -> Result<ScatteringSample> {
    let n_left = cfg.n_left as usize;
    let n_right = cfg.n_right as usize;
    let n = n_left + n_right;
    if m_dim < 10 * n {
        return Err(Error::Config(format!("need M >= 10 (N_L + N_R), got M = {m_dim}")));
    }
    // GUE with E|H_jk|^2 = 1/M off the diagonal.
    let sig_off = 1.0 / (2.0 * m_dim as f64).sqrt();
    let sig_diag = 1.0 / (m_dim as f64).sqrt();
    let mut h = DMatrix::from_element(m_dim, m_dim, C64::new(0.0, 0.0));
    for i in 0..m_dim {
        let x: f64 = rng.sample(StandardNormal);
        h[(i, i)] = C64::new(sig_diag * x, 0.0);
        for j in i + 1..m_dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = C64::new(sig_off * re, sig_off * im);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let gamma = cfg.gamma2.sqrt();
    let w_left = (1.0 - gamma) / (1.0 + gamma);
    // A = -H + i pi W W'; W column a is sqrt(w_a/pi) e_a.
    let mut a = -h;
    let mut w_norms = vec![0.0; n];
    for (col, wn) in w_norms.iter_mut().enumerate() {
        let w = if col < n_left { w_left } else { 1.0 };
        *wn = (w / std::f64::consts::PI).sqrt();
        a[(col, col)] += C64::new(0.0, std::f64::consts::PI * wn.powi(2));
    }
    let lu = a.lu();
    let mut s = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for col in 0..n {
        let mut rhs = DMatrix::from_element(m_dim, 1, C64::new(0.0, 0.0));
        rhs[(col, 0)] = C64::new(w_norms[col], 0.0);
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular resolvent; resample".into()))?;
        // Row a of W'X picks entry a of X scaled by w_norms[a].
        for row in 0..n {
            s[(row, col)] = C64::new(0.0, -2.0 * std::f64::consts::PI) * w_norms[row] * x[(row, 0)];
        }
    }
    for d in 0..n {
        s[(d, d)] += C64::new(1.0, 0.0);
    }
    Ok(ScatteringSample { s, n_left, n_right })
}

/// Reflection-eigenvalue and transport samples from the Hamiltonian model.
#[derive(Debug, Clone)]
pub struct HeidelbergRun {
    pub reflection: Vec<f64>,
    pub g: Vec<f64>,
    pub max_unitarity_defect: f64,
}

pub fn run_heidelberg(
    cfg: &TunnelConfig,
    m_dim: usize,
    samples: usize,
    mc: &McConfig,
) -> Result<HeidelbergRun> {
    let chunks = chunk_sizes(samples, mc.workers);
    let parts: Vec<Result<(Vec<f64>, Vec<f64>, f64)>> = chunks
        .par_iter()
        .enumerate()
        .map(|(w, &count)| {
            let mut rng = worker_rng(mc.seed, w);
            let mut refl = Vec::with_capacity(count * cfg.n_left as usize);
            let mut g = Vec::with_capacity(count);
            let mut defect: f64 = 0.0;
            for _ in 0..count {
                let sample = heidelberg_smatrix(m_dim, cfg, &mut rng)?;
                defect = defect.max(sample.unitarity_defect());
                refl.extend(sample.reflection_eigenvalues());
                g.push(sample.conductance());
            }
            Ok((refl, g, defect))
        })
        .collect();
    let mut reflection = Vec::new();
    let mut g = Vec::new();
    let mut max_defect: f64 = 0.0;
    for part in parts {
        let (r, gs, d) = part?;
        reflection.extend(r);
        g.extend(gs);
        max_defect = max_defect.max(d);
    }
    Ok(HeidelbergRun { reflection, g, max_unitarity_defect: max_defect })
}
