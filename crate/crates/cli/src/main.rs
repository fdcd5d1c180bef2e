//! Command-line surface for the chaotic-cavity transport statistics
//! engines: exact cumulants and distributions, joint noise-power tables,
//! Painlevé trajectories, tunnel-lead statistics, Monte Carlo estimation,
//! and the cross-validation suites.

mod commands;
mod report;

use clap::{Parser, Subcommand};
use report::Format;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "toda-transport",
    version,
    about = "Exact and asymptotic statistics of conductance and noise power in chaotic cavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct CommonArgs {
    /// Open channels in the left lead.
    #[arg(long, default_value_t = 1)]
    nl: u32,
    /// Open channels in the right lead.
    #[arg(long, default_value_t = 1)]
    nr: u32,
    /// Bias-to-temperature ratio eta (a number, or "inf" for the shot limit).
    #[arg(long, default_value = "inf")]
    eta: String,
    /// RNG seed for Monte Carlo components.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker count for Monte Carlo parallelism.
    #[arg(long, default_value_t = 2)]
    workers: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact conductance cumulants (recurrence engine with MGF fallback).
    Cumulants {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest cumulant order.
        #[arg(short = 'L', long = "orders", default_value_t = 4)]
        orders: u32,
        /// Include the large-n asymptotic column.
        #[arg(long)]
        asymptotic: bool,
        /// Add a Monte Carlo column with this many CUE samples.
        #[arg(long, default_value_t = 0)]
        montecarlo: usize,
    },
    /// Exact conductance distribution (piecewise polynomials + plot grid).
    Distribution {
        #[command(flatten)]
        common: CommonArgs,
        /// Samples per plot grid.
        #[arg(long, default_value_t = 200)]
        grid_points: u32,
    },
    /// Joint conductance/noise-power cumulant tables.
    Noise {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'L', long = "lmax", default_value_t = 2)]
        lmax: u32,
        #[arg(short = 'M', long = "mmax", default_value_t = 2)]
        mmax: u32,
    },
    /// Painlevé V sigma-function trajectory with residual diagnostics.
    Painleve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.05)]
        z0: f64,
        #[arg(long, default_value_t = 5.0)]
        z1: f64,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        grid_points: u32,
        /// Compare the reconstructed log-MGF against the exact one.
        #[arg(long)]
        compare_exact: bool,
    },
    /// Tunnel-lead conductance MGF and reflection density.
    Nonideal {
        #[command(flatten)]
        common: CommonArgs,
        /// Squared barrier reflection amplitude (tunnel prob = 1 - gamma2).
        #[arg(long, default_value_t = 0.25)]
        gamma2: f64,
        #[arg(long, default_value_t = 0.0)]
        z0: f64,
        #[arg(long, default_value_t = 0.0)]
        z1: f64,
        #[arg(long, default_value_t = 50)]
        grid_points: u32,
    },
    /// Monte Carlo estimation of transport cumulants (CUE sampling).
    Montecarlo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(short = 'L', long = "orders", default_value_t = 3)]
        orders: u32,
        /// Dump raw conductance samples as little-endian f64.
        #[arg(long)]
        dump_samples: Option<PathBuf>,
    },
    /// Run a cross-validation suite; exits 2 on any failed invariant.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Suite: ideal, nonideal, montecarlo, or all.
        #[arg(long, default_value = "ideal")]
        suite: String,
        #[arg(long, default_value_t = 0.25)]
        gamma2: f64,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Test hook: inject a deliberate perturbation (must fail loudly).
        #[arg(long)]
        inject_perturbation: bool,
    },
}

/// Flattened, serializable run specification; parsing round-trips through
/// this struct.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunSpec {
    pub command: String,
    pub nl: u32,
    pub nr: u32,
    pub eta: String,
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub orders_l: u32,
    pub orders_m: u32,
    pub asymptotic: bool,
    pub samples: usize,
    pub grid_points: u32,
    pub z0: f64,
    pub z1: f64,
    pub tol: f64,
    pub compare_exact: bool,
    pub gamma2: f64,
    pub suite: String,
    pub inject_perturbation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_samples: Option<String>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            command: String::new(),
            nl: 1,
            nr: 1,
            eta: "inf".into(),
            seed: 42,
            workers: 2,
            format: Format::Json,
            out: None,
            orders_l: 4,
            orders_m: 2,
            asymptotic: false,
            samples: 0,
            grid_points: 100,
            z0: 0.05,
            z1: 5.0,
            tol: 1e-11,
            compare_exact: false,
            gamma2: 0.25,
            suite: "ideal".into(),
            inject_perturbation: false,
            dump_samples: None,
        }
    }
}

impl RunSpec {
    fn from_cli(cli: Cli) -> Self {
        let mut spec = RunSpec::default();
        let common = match &cli.command {
            Command::Cumulants { common, .. }
            | Command::Distribution { common, .. }
            | Command::Noise { common, .. }
            | Command::Painleve { common, .. }
            | Command::Nonideal { common, .. }
            | Command::Montecarlo { common, .. }
            | Command::Verify { common, .. } => common.clone(),
        };
        spec.nl = common.nl;
        spec.nr = common.nr;
        spec.eta = common.eta;
        spec.seed = common.seed;
        spec.workers = common.workers;
        spec.format = common.format;
        spec.out = common.out.map(|p| p.display().to_string());
        match cli.command {
            Command::Cumulants { orders, asymptotic, montecarlo, .. } => {
                spec.command = "cumulants".into();
                spec.orders_l = orders;
                spec.asymptotic = asymptotic;
                spec.samples = montecarlo;
            }
            Command::Distribution { grid_points, .. } => {
                spec.command = "distribution".into();
                spec.grid_points = grid_points;
            }
            Command::Noise { lmax, mmax, .. } => {
                spec.command = "noise".into();
                spec.orders_l = lmax;
                spec.orders_m = mmax;
            }
            Command::Painleve { z0, z1, tol, grid_points, compare_exact, .. } => {
                spec.command = "painleve".into();
                spec.z0 = z0;
                spec.z1 = z1;
                spec.tol = tol;
                spec.grid_points = grid_points;
                spec.compare_exact = compare_exact;
            }
            Command::Nonideal { gamma2, z0, z1, grid_points, .. } => {
                spec.command = "nonideal".into();
                spec.gamma2 = gamma2;
                spec.z0 = z0;
                spec.z1 = z1;
                spec.grid_points = grid_points;
            }
            Command::Montecarlo { samples, orders, dump_samples, .. } => {
                spec.command = "montecarlo".into();
                spec.samples = samples;
                spec.orders_l = orders;
                spec.dump_samples = dump_samples.map(|p| p.display().to_string());
            }
            Command::Verify { suite, gamma2, samples, inject_perturbation, .. } => {
                spec.command = "verify".into();
                spec.suite = suite;
                spec.gamma2 = gamma2;
                spec.samples = samples;
                spec.inject_perturbation = inject_perturbation;
            }
        }
        spec
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            std::process::exit(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            std::process::exit(0);
        }
    };
    let spec = RunSpec::from_cli(cli);
    match commands::run(&spec) {
        Ok((text, code)) => {
            let out = spec.out.as_deref().map(std::path::Path::new);
            if let Err(e) = report::write_output(out, &text) {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
            std::process::exit(code);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_spec_round_trips() {
        let mut spec = RunSpec::default();
        spec.command = "noise".into();
        spec.orders_l = 3;
        spec.eta = "1.5".into();
        let json = serde_json::to_string(&spec).unwrap();
        let back: RunSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn parse_rejects_unknown_flags_on_wrong_subcommand() {
        // gamma2 belongs to the nonideal/verify surface only.
        assert!(Cli::try_parse_from(["toda-transport", "cumulants", "--gamma2", "0.5"]).is_err());
        assert!(Cli::try_parse_from(["toda-transport", "nonideal", "--gamma2", "0.5"]).is_ok());
    }

    #[test]
    fn parse_maps_into_spec() {
        let cli = Cli::try_parse_from([
            "toda-transport",
            "cumulants",
            "--nl",
            "2",
            "--nr",
            "3",
            "-L",
            "5",
            "--asymptotic",
        ])
        .unwrap();
        let spec = RunSpec::from_cli(cli);
        assert_eq!(spec.command, "cumulants");
        assert_eq!((spec.nl, spec.nr, spec.orders_l), (2, 3, 5));
        assert!(spec.asymptotic);
    }
}
