//! Change of variables between physical `(x, t)` and self-similar
//! `(xi, tau)` coordinates:
//!
//! ```text
//! xi = x / sqrt(t + 1),   tau = log(t + 1)
//! ```
//!
//! with amplitudes rescaled as `omega = (t+1)^-1 Omega` for 2D vorticity and
//! `u = (t+1)^-1/2 w` for Burgers velocity.

use serde::Serialize;

use crate::error::{ensure, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsvCoord<const D: usize> {
    pub xi: [f64; D],
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysCoord<const D: usize> {
    pub x: [f64; D],
    pub t: f64,
}

pub fn phys_to_ssv<const D: usize>(p: PhysCoord<D>) -> Result<SsvCoord<D>> {
    ensure!(p.t.is_finite() && p.t >= 0.0, "physical time must be >= 0, got {}", p.t);
    let scale = (p.t + 1.0).sqrt();
    Ok(SsvCoord { xi: p.x.map(|x| x / scale), tau: p.t.ln_1p() })
}

pub fn ssv_to_phys<const D: usize>(s: SsvCoord<D>) -> Result<PhysCoord<D>> {
    ensure!(s.tau.is_finite() && s.tau >= 0.0, "self-similar time must be >= 0, got {}", s.tau);
    let t = s.tau.exp_m1();
    let scale = (0.5 * s.tau).exp();
    Ok(PhysCoord { x: s.xi.map(|xi| scale * xi), t })
}

pub fn ns_amp_phys_to_ssv(omega: f64, t: f64) -> f64 {
    (t + 1.0) * omega
}

pub fn ns_amp_ssv_to_phys(big_omega: f64, tau: f64) -> f64 {
    (-tau).exp() * big_omega
}

pub fn burgers_amp_phys_to_ssv(u: f64, t: f64) -> f64 {
    (t + 1.0).sqrt() * u
}

pub fn burgers_amp_ssv_to_phys(w: f64, tau: f64) -> f64 {
    (-0.5 * tau).exp() * w
}

/// The two heat-based systems handled by the laboratory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    /// 2D incompressible Navier-Stokes in vorticity form.
    Ns2d,
    /// 1D viscous Burgers.
    Burgers,
}

impl System {
    pub fn spatial_dim(self) -> usize {
        match self {
            System::Ns2d => 2,
            System::Burgers => 1,
        }
    }

    /// Exponent `p` in `field_ssv = (t + 1)^p * field_phys`.
    pub fn amplitude_exponent(self) -> f64 {
        match self {
            System::Ns2d => 1.0,
            System::Burgers => 0.5,
        }
    }

    pub fn amp_phys_to_ssv(self, v: f64, t: f64) -> f64 {
        match self {
            System::Ns2d => ns_amp_phys_to_ssv(v, t),
            System::Burgers => burgers_amp_phys_to_ssv(v, t),
        }
    }

    pub fn amp_ssv_to_phys(self, v: f64, tau: f64) -> f64 {
        match self {
            System::Ns2d => ns_amp_ssv_to_phys(v, tau),
            System::Burgers => burgers_amp_ssv_to_phys(v, tau),
        }
    }
}

/// Pull an SSV-head output `Omega_hat(x / sqrt(t+1), log(t+1))` back to the
/// physical field value at `(x, t)`.
pub fn map_ssv_prediction_to_physical(system: System, ssv_value: f64, t: f64) -> Result<f64> {
    ensure!(t.is_finite() && t >= 0.0, "physical time must be >= 0, got {t}");
    Ok(system.amp_ssv_to_phys(ssv_value, t.ln_1p()))
}
