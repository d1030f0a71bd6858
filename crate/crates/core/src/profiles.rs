//! Analytic fields: initial data, exact solutions and long-time attractors.

use std::f64::consts::{FRAC_1_PI, PI};

use crate::error::{Error, Result};

/// Oseen vortex `G(xi) = exp(-|xi|^2 / 4) / (4 pi)`, the unit-circulation
/// steady state of the self-similar vorticity equation.
pub fn oseen_vortex(xi: [f64; 2]) -> f64 {
    0.25 * FRAC_1_PI * (-0.25 * (xi[0] * xi[0] + xi[1] * xi[1])).exp()
}

/// Analytic gradient of [`oseen_vortex`]: `-xi G / 2`.
pub fn oseen_vortex_gradient(xi: [f64; 2]) -> [f64; 2] {
    let g = oseen_vortex(xi);
    [-0.5 * xi[0] * g, -0.5 * xi[1] * g]
}

/// Analytic Laplacian of [`oseen_vortex`]: `(|xi|^2 / 4 - 1) G`.
pub fn oseen_vortex_laplacian(xi: [f64; 2]) -> f64 {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    (0.25 * r2 - 1.0) * oseen_vortex(xi)
}

/// Residual of `L G = lap G + xi . grad G / 2 + G` with analytic derivatives.
pub fn oseen_stationarity_residual(xi: [f64; 2]) -> f64 {
    let grad = oseen_vortex_gradient(xi);
    oseen_vortex_laplacian(xi) + 0.5 * (xi[0] * grad[0] + xi[1] * grad[1]) + oseen_vortex(xi)
}

/// Velocity induced by the Oseen vortex through the Biot-Savart law,
/// `U(xi) = xi_perp / (2 pi |xi|^2) * (1 - exp(-|xi|^2 / 4))`, with the
/// removable singularity at the origin filled by zero.
pub fn oseen_velocity(xi: [f64; 2]) -> [f64; 2] {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let f = -(-0.25 * r2).exp_m1() / (2.0 * PI * r2);
    [-xi[1] * f, xi[0] * f]
}

/// Lamb-Oseen vortex of circulation `alpha`: the Oseen profile pulled back to
/// physical variables, an exact solution of the 2D vorticity equation.
pub fn lamb_oseen_exact(x: [f64; 2], t: f64, alpha: f64) -> f64 {
    let s = t + 1.0;
    alpha / (4.0 * PI * s) * (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * s)).exp()
}

/// Diffusion wave of mass `m`, the self-similar attractor of viscous Burgers:
///
/// ```text
/// G_M(xi) = a exp(-xi^2/4) / (sqrt(pi) (1 - a Phi(xi)))
/// a = 1 - exp(-M/2),   Phi(xi) = erfc(-xi/2) / 2
/// ```
///
/// This is the Cole-Hopf image of a point mass; it integrates to `m` and is a
/// steady solution of the self-similar Burgers equation. The denominator is
/// positive for every finite `m` but is still checked.
pub fn diffusion_wave(xi: f64, m: f64) -> Result<f64> {
    let a = -(-0.5 * m).exp_m1();
    let denom = 1.0 - a * 0.5 * libm::erfc(-0.5 * xi);
    let v = a * (-0.25 * xi * xi).exp() / (PI.sqrt() * denom);
    if !(denom > 0.0) || !v.is_finite() {
        return Err(Error::Numerical(format!(
            "diffusion wave undefined at xi={xi}, M={m} (denominator {denom})"
        )));
    }
    Ok(v)
}

/// Parameters of the two-Gaussian initial vorticity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoGaussianParams {
    pub a1: f64,
    pub a2: f64,
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for TwoGaussianParams {
    fn default() -> Self {
        Self { a1: 1.0, a2: 0.6, c1: [-1.5, 0.5], c2: [1.0, -0.8], sigma1: 1.0, sigma2: 1.3 }
    }
}

impl TwoGaussianParams {
    /// Total circulation `pi (A1 s1^2 + A2 s2^2)`.
    pub fn circulation(&self) -> f64 {
        PI * (self.a1 * self.sigma1 * self.sigma1 + self.a2 * self.sigma2 * self.sigma2)
    }
}

pub fn ns_initial_two_gaussians(x: f64, y: f64, p: &TwoGaussianParams) -> f64 {
    let bump = |c: [f64; 2], s: f64| {
        let (dx, dy) = (x - c[0], y - c[1]);
        (-(dx * dx + dy * dy) / (s * s)).exp()
    };
    p.a1 * bump(p.c1, p.sigma1) + p.a2 * bump(p.c2, p.sigma2)
}

/// Bipolar box: `1` on `(-1, 0)`, `-1` on `(0, 1)`, `0` elsewhere. The jump
/// points `-1, 0, 1` take the value `0`.
pub fn burgers_initial_bipolar_box(x: f64) -> f64 {
    if x > -1.0 && x < 0.0 {
        1.0
    } else if x > 0.0 && x < 1.0 {
        -1.0
    } else {
        0.0
    }
}

/// Antiderivative `int_{-inf}^x u0` of the bipolar box (a tent of height 1).
pub fn bipolar_box_antiderivative(x: f64) -> f64 {
    if x <= -1.0 || x >= 1.0 {
        0.0
    } else if x <= 0.0 {
        x + 1.0
    } else {
        1.0 - x
    }
}

/// Cell averages of the bipolar box over `[x - h/2, x + h/2]`.
pub fn bipolar_box_cell_average(x: f64, h: f64) -> f64 {
    (bipolar_box_antiderivative(x + 0.5 * h) - bipolar_box_antiderivative(x - 0.5 * h)) / h
}
