//! Adaptive explicit integration and the quadrature/interpolation helpers
//! the profile models are built on.

mod dopri;
mod hermite;
mod quadrature;

pub use dopri::{integrate, IntegrationConfig, OdeSystem, StopEvent, Termination, Trajectory};
pub use hermite::MonotoneCubic;
pub use quadrature::{
    cumulative_hermite, cumulative_hermite5, hermite5_interval, hermite_interval,
    hermite_quadrature, quadrature, trapezoid,
};
