//! Exact symbolic machinery: the exponential-Laurent ring housing the moment
//! generating functions, the Hankel-determinant MGF constructor, the Toda
//! Lattice identity, and the piecewise-polynomial conductance density.

pub mod density;
pub mod laurent;
pub mod mgf;
pub mod poly;
pub mod ring;

pub use density::{density_from_mgf, PiecewisePolyDensity};
pub use laurent::LaurentPoly;
pub use mgf::{cumulants_from_mgf, log_series, mgf_hankel, mgf_hankel_indices, moment_fn, toda_check, toda_residual, toda_residual_with_var};
pub use poly::Poly;
pub use ring::{det_ring, ExpLaurentFn};
