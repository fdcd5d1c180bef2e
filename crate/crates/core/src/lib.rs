//! Exact and asymptotic statistics of quantum transport through chaotic cavities.
//!
//! The crate computes moment generating functions, full distributions and
//! cumulants of the Landauer conductance and the noise power of a chaotic
//! cavity with broken time-reversal symmetry, probed through two leads:
//!
//! - [`ensemble`]: lead configurations, the thermodynamic crossover factor
//!   and exact normalization constants.
//! - [`symbolic`]: the conductance MGF built exactly as a Hankel determinant
//!   over a ring of exponential-Laurent functions, the one-dimensional Toda
//!   Lattice identity, and the piecewise-polynomial conductance density.
//! - [`cumulants`]: exact conductance cumulants from a nonlinear recurrence,
//!   joint conductance/noise-power cumulant tables as polynomials in the
//!   thermodynamic factor, and shot-noise cumulants by two independent routes.
//! - [`painleve`]: numerical integration of the Painlevé V sigma-function in
//!   Chazy form, seeded from exact cumulants, with residual monitoring
//!   against the Jimbo-Miwa-Okamoto form.
//! - [`asymptotics`]: closed-form large-n expansions with measured-convergence
//!   checks against the exact engines.
//! - [`nonideal`]: reflection-eigenvalue statistics and the conductance MGF
//!   for a cavity with one tunnel-coupled lead, including the two-dimensional
//!   Toda Lattice identity.
//! - [`montecarlo`]: an independent random-matrix sampling oracle (CUE and
//!   Hamiltonian models) with unbiased cumulant estimators.
//!
//! All exact results are kept in arbitrary-precision rational arithmetic;
//! floating point enters only at evaluation boundaries and in the Monte Carlo
//! and ODE components.

pub mod asymptotics;
pub mod cumulants;
pub mod ensemble;
pub mod error;
pub mod montecarlo;
pub mod nonideal;
pub mod painleve;
pub mod precision;
pub mod quadrature;
pub mod rational;
pub mod symbolic;

pub use ensemble::{normalization_c, Eta, LeadConfig, ThermoFactor};
pub use error::{Error, Result};
pub use rational::Rat;
