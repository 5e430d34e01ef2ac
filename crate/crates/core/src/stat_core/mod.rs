//! Special functions, quadrature against the standard normal density, and
//! seedable random-number streams.

mod quadrature;
mod rng;
mod special;

pub use quadrature::{integrate_against_normal, QuadratureRule, DEFAULT_HERMITE_NODES};
pub use rng::{stream_key, RngStream};
pub use special::{
    chi_squared_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf,
    student_t_sf,
};
