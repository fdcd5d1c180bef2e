//! Output data shapes and writers. Every JSON document the CLI emits
//! deserializes back into one of these types; the `schemas/` directory
//! ships the matching JSON Schema files.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CumulantRow {
    pub order: u32,
    pub exact: String,
    pub decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_std_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CumulantReport {
    pub n_left: u32,
    pub n_right: u32,
    pub rows: Vec<CumulantRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DistributionReport {
    pub n: u32,
    pub nu: u32,
    /// Sign-convention polynomials, exact coefficients as `p/q` strings.
    pub sgn_polys: Vec<Vec<String>>,
    pub heaviside_polys: Vec<Vec<String>>,
    /// Sampled density for plotting.
    pub grid: Vec<DensityPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityPoint {
    pub g: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JointCumulantEntry {
    pub l: u32,
    pub m: u32,
    /// Polynomial in the thermodynamic factor, constant term first.
    pub poly: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shot_limit: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NoiseReport {
    pub n_left: u32,
    pub n_right: u32,
    pub eta: String,
    pub f_eta: Option<f64>,
    pub entries: Vec<JointCumulantEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PainleveReport {
    pub n_left: u32,
    pub n_right: u32,
    pub z0: f64,
    pub z1: f64,
    pub tol: f64,
    pub jmo_residual_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_log_mgf_deviation: Option<f64>,
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryPoint {
    pub z: f64,
    pub sigma: f64,
    pub dsigma: f64,
    pub jmo_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NonidealPoint {
    #[serde(rename = "NL")]
    pub n_left: u32,
    #[serde(rename = "NR")]
    pub n_right: u32,
    pub gamma2: f64,
    pub z: f64,
    pub mgf: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NonidealReport {
    pub points: Vec<NonidealPoint>,
    /// Reflection density samples (single-channel configurations).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<DensityPoint>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McReport {
    pub observable: String,
    pub order: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerifyLine {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<VerifyLine>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Write `text` to the path or stdout.
pub fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Raw samples as little-endian 64-bit floats.
pub fn write_samples_le(path: &Path, samples: &[f64]) -> anyhow::Result<()> {
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for v in samples {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Minimal CSV writer: header plus rows of plain numbers/strings (no
/// quoting needed for this data).
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
