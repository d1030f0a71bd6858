//! Numerical laboratory comparing coordinate-network surrogates trained in
//! physical variables `(x, t)` against surrogates trained in self-similar
//! variables `(x / sqrt(t+1), log(t+1))` for heat-based equations: 2D
//! Navier-Stokes vorticity and 1D viscous Burgers.

pub mod error;
pub mod eval;
pub mod grid;
pub mod nn;
pub mod profiles;
pub mod rng;
pub mod solvers;
pub mod training;
pub mod ssf;
pub mod transforms;
pub mod window;

pub use error::{Error, Result};
pub use grid::{FieldSeries, Grid, Grid1D, Grid2D, ScalarFieldSnapshot};
pub use rng::SeededRng;
pub use transforms::System;
pub use window::Window;
