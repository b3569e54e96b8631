//! Shared numerical kernels.

pub mod fit;
pub mod minimize;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use fit::{fit_loglog_slope, LogLogFit};
pub use minimize::{minimize_1d, Minimum};
pub use quadrature::{gauss_legendre_doubling, integrate, integrate_piecewise, GaussLegendre, QuadratureResult};
pub use rng::RngStream;
