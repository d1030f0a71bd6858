//! Pseudo-spectral solver for 2D incompressible Navier-Stokes in vorticity
//! form, `w_t + u . grad w = lap w`, `u = K * w`, on a periodic box standing
//! in for the whole plane.
//!
//! Diffusion is integrated exactly with an integrating factor; the advection
//! term is advanced with the classical RK4 tableau in the integrating-factor
//! frame (Lawson RK4). Quadratic products are dealiased with the 2/3 rule.
//!
//! Spectral arrays are stored transposed, `hat[ky * n + kx]`, so each 2D
//! transform costs two batched row FFTs and one square transpose.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure, Error, Result};
use crate::grid::{FieldSeries, Grid, Grid2D, ScalarFieldSnapshot};

use super::output_schedule;

/// Eisenstein sum `sum' (m + i n)^-4` over the Gaussian integers,
/// `Gamma(1/4)^8 / (960 pi^2)`.
const LATTICE_G4: f64 = 3.151_212_002_153_897_5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ns2dConfig {
    pub grid: Grid2D,
    pub dt: f64,
    pub t_end: f64,
    pub dt_out: f64,
    /// 2/3-rule dealiasing of the advection product.
    pub dealias: bool,
    /// Test hook: `false` drops the advection term (pure heat flow).
    pub advection: bool,
}

impl Ns2dConfig {
    /// `[-20, 20]^2`, 256^2 nodes, `dt = 2.5e-3`, snapshots every 0.01 up to 5.
    pub fn reference_default() -> Self {
        Self {
            grid: Grid2D::new(256, 20.0).expect("static grid"),
            dt: 2.5e-3,
            t_end: 5.0,
            dt_out: 0.01,
            dealias: true,
            advection: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        output_schedule(self.dt, self.dt_out, self.t_end).map(|_| ())
    }
}

struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch: vec![Complex64::default(); len] }
    }

    /// Physical `[x][y]` to spectral `[ky][kx]`.
    fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Spectral `[ky][kx]` back to physical `[x][y]`, normalised.
    fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        let scale = 1.0 / (self.n * self.n) as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                let j0 = if ib == jb { i + 1 } else { jb };
                for j in j0..(jb + B).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Reusable spectral workspace for one grid.
pub struct Ns2dSolver {
    grid: Grid2D,
    fft: Fft2,
    /// wavenumber of spectral index along either axis
    k: Vec<f64>,
    /// 2/3-rule keep mask per axis index
    keep: Vec<bool>,
    nodes: Vec<f64>,
    vel: Vec<Complex64>,
    grad: Vec<Complex64>,
}

impl Ns2dSolver {
    pub fn new(grid: Grid2D) -> Self {
        let n = grid.n();
        let k0 = PI / grid.half_width();
        let idx = |b: usize| if b < n / 2 { b as i64 } else { b as i64 - n as i64 };
        let k = (0..n).map(|b| k0 * idx(b) as f64).collect();
        let keep = (0..n).map(|b| 3 * idx(b).unsigned_abs() < n as u64).collect();
        Self {
            grid,
            fft: Fft2::new(n),
            k,
            keep,
            nodes: grid.nodes(),
            vel: vec![Complex64::default(); n * n],
            grad: vec![Complex64::default(); n * n],
        }
    }

    fn n(&self) -> usize {
        self.grid.n()
    }

    fn to_spectral(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf
    }

    fn to_physical(&mut self, hat: &[Complex64]) -> Vec<f64> {
        let mut buf = hat.to_vec();
        self.fft.inverse(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Fill `self.vel` with `u1 + i u2` and `self.grad` with `w_x + i w_y` in
    /// physical space.
    ///
    /// The periodic inversion drops the zero mode and adds the field of the
    /// periodic images. With `whole_plane` set, both are compensated to leading
    /// order so a vortex with net circulation sees the free-space velocity
    /// near the origin: the rigid rotation `(mean / 2) x_perp` restores the
    /// mean, and the cubic term of the square-lattice zeta function removes
    /// the images, `w += G4 / (2 pi i P^4) int w(y) (z - y)^3 dy` for the
    /// conjugate velocity `w = u1 - i u2`. The remaining image error is
    /// `O(|z|^7 / P^8)`. Both corrections are harmonic, hence divergence-free.
    fn velocity_and_gradient(&mut self, hat: &[Complex64], dealias: bool, whole_plane: bool) {
        let n = self.n();
        let i = Complex64::new(0.0, 1.0);
        for a in 0..n {
            let ky = self.k[a];
            for b in 0..n {
                let kx = self.k[b];
                let idx = a * n + b;
                let w = if !dealias || (self.keep[a] && self.keep[b]) { hat[idx] } else { Complex64::default() };
                let k2 = kx * kx + ky * ky;
                let inv = if k2 > 0.0 { 1.0 / k2 } else { 0.0 };
                let u1 = i * ky * w * inv;
                let u2 = -i * kx * w * inv;
                self.vel[idx] = u1 + i * u2;
                self.grad[idx] = i * kx * w + i * (i * ky * w);
            }
        }
        self.fft.inverse(&mut self.vel);
        self.fft.inverse(&mut self.grad);
        if !whole_plane || hat[0].re == 0.0 {
            return;
        }
        let area = self.grid.cell_area();
        let circulation = hat[0].re * area;
        let half_mean = 0.5 * circulation / (4.0 * self.grid.half_width().powi(2));
        // complex moments M_k = int w z^k = -(1/(k+1)) int z^(k+1) w_x
        let mut m = [Complex64::default(); 3];
        for ix in 0..n {
            let x = self.nodes[ix];
            for iy in 0..n {
                let z = Complex64::new(x, self.nodes[iy]);
                let wx = self.grad[ix * n + iy].re;
                let z2 = z * z;
                m[0] -= 0.5 * z2 * wx;
                m[1] -= z2 * z * (wx / 3.0);
                m[2] -= z2 * z2 * (0.25 * wx);
            }
        }
        let m = m.map(|v| v * area);
        let period = 2.0 * self.grid.half_width();
        let c = -i * (LATTICE_G4 / (2.0 * PI * period.powi(4)));
        for ix in 0..n {
            let x = self.nodes[ix];
            for iy in 0..n {
                let y = self.nodes[iy];
                let z = Complex64::new(x, y);
                let poly = ((circulation * z - 3.0 * m[0]) * z + 3.0 * m[1]) * z - m[2];
                let w = c * poly;
                self.vel[ix * n + iy] += Complex64::new(-half_mean * y + w.re, half_mean * x - w.im);
            }
        }
    }

    /// Spectral advection term `-FFT(u . grad w)`; returns `max(|u1| + |u2|)`.
    fn nonlinear(&mut self, hat: &[Complex64], dealias: bool, out: &mut [Complex64]) -> f64 {
        let n = self.n();
        self.velocity_and_gradient(hat, dealias, true);
        let mut umax = 0.0f64;
        for (o, (v, g)) in out.iter_mut().zip(self.vel.iter().zip(&self.grad)) {
            umax = umax.max(v.re.abs() + v.im.abs());
            *o = Complex64::new(v.re * g.re + v.im * g.im, 0.0);
        }
        self.fft.forward(out);
        for a in 0..n {
            for b in 0..n {
                let idx = a * n + b;
                out[idx] = if !dealias || (self.keep[a] && self.keep[b]) { -out[idx] } else { Complex64::default() };
            }
        }
        out[0] = Complex64::default();
        umax
    }

    /// Velocity of a vorticity snapshot, returned as `(u1, u2)`; the
    /// whole-plane corrections are applied when `whole_plane` is set.
    pub fn biot_savart(&mut self, omega: &[f64], whole_plane: bool) -> (Vec<f64>, Vec<f64>) {
        let hat = self.to_spectral(omega);
        self.velocity_and_gradient(&hat, false, whole_plane);
        (self.vel.iter().map(|c| c.re).collect(), self.vel.iter().map(|c| c.im).collect())
    }

    /// Integrate from `omega0`, handing every output snapshot to `emit`.
    pub fn run(
        &mut self,
        omega0: &ScalarFieldSnapshot,
        cfg: &Ns2dConfig,
        mut emit: impl FnMut(ScalarFieldSnapshot) -> Result<()>,
    ) -> Result<()> {
        cfg.validate()?;
        ensure!(cfg.grid == self.grid, "solver workspace built for a different grid");
        ensure!(
            *omega0.grid() == Grid::D2(cfg.grid),
            "initial vorticity must live on the configured grid"
        );
        let n = self.n();
        let peak = omega0.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let edge = (0..n)
            .flat_map(|i| [(i, 0), (i, n - 1), (0, i), (n - 1, i)])
            .map(|(i, j)| omega0.values()[self.grid.index(i, j)].abs())
            .fold(0.0f64, f64::max);
        ensure!(
            edge <= 1e-10 * peak.max(f64::MIN_POSITIVE),
            "initial vorticity is not localised: |w| = {edge} on the box edge (peak {peak})"
        );

        let (times, substeps) = output_schedule(cfg.dt, cfg.dt_out, cfg.t_end)?;
        let dt = cfg.dt_out / substeps as f64;
        let h = self.grid.spacing();

        let decay: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (a, b) = (idx / n, idx % n);
                self.k[a] * self.k[a] + self.k[b] * self.k[b]
            })
            .collect();
        let e_full: Vec<f64> = decay.iter().map(|k2| (-k2 * dt).exp()).collect();
        let e_half: Vec<f64> = decay.iter().map(|k2| (-k2 * 0.5 * dt).exp()).collect();

        let mut hat = self.to_spectral(omega0.values());
        let zero = Complex64::default();
        let (mut ka, mut kb, mut kc, mut kd) =
            (vec![zero; n * n], vec![zero; n * n], vec![zero; n * n], vec![zero; n * n]);
        let mut stage = vec![zero; n * n];

        emit(omega0.clone())?;
        for &t_out in &times[1..] {
            for _ in 0..substeps {
                if !cfg.advection {
                    hat.iter_mut().zip(&e_full).for_each(|(w, e)| *w *= e);
                    continue;
                }
                let umax = self.nonlinear(&hat, cfg.dealias, &mut ka);
                if !(umax * dt / h <= 1.0) {
                    return Err(Error::Numerical(format!(
                        "advective CFL violated before t={t_out}: max(|u1|+|u2|) dt / h = {}",
                        umax * dt / h
                    )));
                }
                for idx in 0..n * n {
                    stage[idx] = e_half[idx] * (hat[idx] + 0.5 * dt * ka[idx]);
                }
                self.nonlinear(&stage, cfg.dealias, &mut kb);
                for idx in 0..n * n {
                    stage[idx] = e_half[idx] * hat[idx] + 0.5 * dt * kb[idx];
                }
                self.nonlinear(&stage, cfg.dealias, &mut kc);
                for idx in 0..n * n {
                    stage[idx] = e_full[idx] * hat[idx] + dt * e_half[idx] * kc[idx];
                }
                self.nonlinear(&stage, cfg.dealias, &mut kd);
                for idx in 0..n * n {
                    hat[idx] = e_full[idx] * hat[idx]
                        + dt / 6.0
                            * (e_full[idx] * ka[idx]
                                + 2.0 * e_half[idx] * (kb[idx] + kc[idx])
                                + kd[idx]);
                }
            }
            let values = self.to_physical(&hat);
            emit(ScalarFieldSnapshot::new(Grid::D2(self.grid), t_out, values)?)?;
        }
        Ok(())
    }
}

/// Solve on `[0, t_end]` and collect every output snapshot.
pub fn solve_ns2d(omega0: &ScalarFieldSnapshot, cfg: &Ns2dConfig) -> Result<FieldSeries> {
    let mut snapshots = Vec::new();
    Ns2dSolver::new(cfg.grid).run(omega0, cfg, |s| {
        snapshots.push(s);
        Ok(())
    })?;
    FieldSeries::new(snapshots)
}

/// Free-space velocity `(u1, u2)` of a vorticity snapshot: spectral
/// inversion of the Biot-Savart law plus the whole-plane corrections for the
/// mean and the periodic images.
pub fn biot_savart(omega: &ScalarFieldSnapshot) -> Result<(ScalarFieldSnapshot, ScalarFieldSnapshot)> {
    velocity(omega, true)
}

/// Periodic velocity `u_hat = i k_perp w_hat / |k|^2` (up to the Fourier sign
/// convention) with the zero mode set to zero. Discretely divergence-free.
pub fn biot_savart_periodic(
    omega: &ScalarFieldSnapshot,
) -> Result<(ScalarFieldSnapshot, ScalarFieldSnapshot)> {
    velocity(omega, false)
}

fn velocity(
    omega: &ScalarFieldSnapshot,
    whole_plane: bool,
) -> Result<(ScalarFieldSnapshot, ScalarFieldSnapshot)> {
    let Grid::D2(grid) = *omega.grid() else {
        return Err(Error::InvalidArgument("Biot-Savart needs a square 2D grid".into()));
    };
    let (u1, u2) = Ns2dSolver::new(grid).biot_savart(omega.values(), whole_plane);
    Ok((
        ScalarFieldSnapshot::new(Grid::D2(grid), omega.t(), u1)?,
        ScalarFieldSnapshot::new(Grid::D2(grid), omega.t(), u2)?,
    ))
}

/// Max-norm of the spectrally differentiated divergence `d1 u1 + d2 u2`.
pub fn spectral_divergence(u1: &ScalarFieldSnapshot, u2: &ScalarFieldSnapshot) -> Result<f64> {
    let Grid::D2(grid) = *u1.grid() else {
        return Err(Error::InvalidArgument("divergence needs a square 2D grid".into()));
    };
    ensure!(u2.grid() == u1.grid(), "velocity components on different grids");
    let mut s = Ns2dSolver::new(grid);
    let n = grid.n();
    let h1 = s.to_spectral(u1.values());
    let h2 = s.to_spectral(u2.values());
    let i = Complex64::new(0.0, 1.0);
    let mut div = vec![Complex64::default(); n * n];
    for a in 0..n {
        for b in 0..n {
            let idx = a * n + b;
            // odd derivatives drop the unpaired Nyquist modes
            let kx = if b == n / 2 { 0.0 } else { s.k[b] };
            let ky = if a == n / 2 { 0.0 } else { s.k[a] };
            div[idx] = i * kx * h1[idx] + i * ky * h2[idx];
        }
    }
    Ok(s.to_physical(&div).iter().fold(0.0, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{lamb_oseen_exact, oseen_velocity, oseen_vortex};

    #[test]
    fn transpose_round_trip() {
        let n = 70;
        let orig: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let mut buf = orig.clone();
        transpose(&mut buf, n);
        assert_eq!(buf[3 * n + 5], orig[5 * n + 3]);
        transpose(&mut buf, n);
        assert_eq!(buf, orig);
    }

    #[test]
    fn fft_round_trip_and_derivative() {
        let grid = Grid2D::new(32, 3.0).unwrap();
        let mut s = Ns2dSolver::new(grid);
        let f = ScalarFieldSnapshot::from_fn(Grid::D2(grid), 0.0, |p| {
            (PI * p[0] / 3.0).sin() * (2.0 * PI * p[1] / 3.0).cos()
        })
        .unwrap();
        let hat = s.to_spectral(f.values());
        let back = s.to_physical(&hat);
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_vorticity_gives_zero_velocity() {
        let grid = Grid::D2(Grid2D::new(16, 4.0).unwrap());
        let w = ScalarFieldSnapshot::new(grid, 0.0, vec![0.0; 256]).unwrap();
        let (u1, u2) = biot_savart(&w).unwrap();
        assert!(u1.values().iter().chain(u2.values()).all(|&v| v == 0.0));
    }

    #[test]
    fn oseen_velocity_recovered() {
        let grid = Grid2D::new(256, 20.0).unwrap();
        let w = ScalarFieldSnapshot::from_fn(Grid::D2(grid), 0.0, |p| oseen_vortex([p[0], p[1]])).unwrap();
        let (u1, u2) = biot_savart(&w).unwrap();
        let mut err = 0.0f64;
        for i in 0..256 {
            for j in 0..256 {
                let p = [grid.node(i), grid.node(j)];
                if p[0].hypot(p[1]) <= 10.0 {
                    let e = oseen_velocity(p);
                    let k = grid.index(i, j);
                    err = err.max((u1.values()[k] - e[0]).abs()).max((u2.values()[k] - e[1]).abs());
                }
            }
        }
        assert!(err < 1e-4, "max error {err}");
        let (p1, p2) = biot_savart_periodic(&w).unwrap();
        assert!(spectral_divergence(&p1, &p2).unwrap() < 1e-10);
    }

    #[test]
    fn whole_plane_correction_is_divergence_free() {
        // fourth-order central differences, exact on the cubic correction
        let grid = Grid2D::new(128, 10.0).unwrap();
        let p = crate::profiles::TwoGaussianParams::default();
        let w = ScalarFieldSnapshot::from_fn(Grid::D2(grid), 0.0, |x| {
            crate::profiles::ns_initial_two_gaussians(x[0], x[1], &p)
        })
        .unwrap();
        let (f1, f2) = biot_savart(&w).unwrap();
        let (p1, p2) = biot_savart_periodic(&w).unwrap();
        let c1: Vec<f64> = f1.values().iter().zip(p1.values()).map(|(a, b)| a - b).collect();
        let c2: Vec<f64> = f2.values().iter().zip(p2.values()).map(|(a, b)| a - b).collect();
        let h = grid.spacing();
        let mut div = 0.0f64;
        let mut size = 0.0f64;
        let d4 = |f: &[f64], k: [usize; 4]| (f[k[0]] - 8.0 * f[k[1]] + 8.0 * f[k[2]] - f[k[3]]) / (12.0 * h);
        for i in 2..126 {
            for j in 2..126 {
                let gx = [grid.index(i - 2, j), grid.index(i - 1, j), grid.index(i + 1, j), grid.index(i + 2, j)];
                let gy = [grid.index(i, j - 2), grid.index(i, j - 1), grid.index(i, j + 1), grid.index(i, j + 2)];
                let d = d4(&c1, gx) + d4(&c2, gy);
                div = div.max(d.abs());
                size = size.max(c1[grid.index(i, j)].abs());
            }
        }
        assert!(size > 1e-4, "correction unexpectedly small: {size}");
        assert!(div < 1e-10, "{div}");
    }

    #[test]
    fn pure_diffusion_matches_heat_kernel() {
        let cfg = Ns2dConfig {
            grid: Grid2D::new(128, 20.0).unwrap(),
            dt: 0.05,
            t_end: 2.0,
            dt_out: 0.5,
            dealias: true,
            advection: false,
        };
        // a Gaussian of variance-width 4(t+1) is the heat kernel shifted by 1
        let w0 = ScalarFieldSnapshot::from_fn(Grid::D2(cfg.grid), 0.0, |p| {
            lamb_oseen_exact([p[0] - 1.0, p[1] + 0.5], 0.0, 1.0)
        })
        .unwrap();
        let s = solve_ns2d(&w0, &cfg).unwrap();
        for snap in s.snapshots() {
            let exact = ScalarFieldSnapshot::from_fn(Grid::D2(cfg.grid), snap.t(), |p| {
                lamb_oseen_exact([p[0] - 1.0, p[1] + 0.5], snap.t(), 1.0)
            })
            .unwrap();
            let err = snap.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-6, "t={}: {err}", snap.t());
        }
    }

    #[test]
    fn circulation_mean_and_enstrophy() {
        let cfg = Ns2dConfig {
            grid: Grid2D::new(64, 12.0).unwrap(),
            dt: 0.01,
            t_end: 0.5,
            dt_out: 0.05,
            dealias: true,
            advection: true,
        };
        let p = crate::profiles::TwoGaussianParams::default();
        let w0 = ScalarFieldSnapshot::from_fn(Grid::D2(cfg.grid), 0.0, |x| {
            crate::profiles::ns_initial_two_gaussians(x[0], x[1], &p)
        })
        .unwrap();
        let s = solve_ns2d(&w0, &cfg).unwrap();
        let area = cfg.grid.cell_area();
        let circ0: f64 = w0.values().iter().sum::<f64>() * area;
        let mut prev_enstrophy = f64::INFINITY;
        for snap in s.snapshots() {
            let c: f64 = snap.values().iter().sum::<f64>() * area;
            assert!((c - circ0).abs() <= 1e-8 * circ0.abs(), "{c} vs {circ0}");
            let z: f64 = snap.values().iter().map(|v| v * v).sum::<f64>() * area;
            assert!(z <= prev_enstrophy * (1.0 + 1e-8));
            prev_enstrophy = z;
        }
    }

    #[test]
    fn non_localised_data_rejected() {
        let cfg = Ns2dConfig {
            grid: Grid2D::new(16, 2.0).unwrap(),
            dt: 0.01,
            t_end: 0.1,
            dt_out: 0.05,
            dealias: true,
            advection: true,
        };
        let w0 = ScalarFieldSnapshot::from_fn(Grid::D2(cfg.grid), 0.0, |_| 1.0).unwrap();
        assert!(solve_ns2d(&w0, &cfg).is_err());
    }

    #[test]
    fn deterministic() {
        let cfg = Ns2dConfig {
            grid: Grid2D::new(32, 10.0).unwrap(),
            dt: 0.02,
            t_end: 0.2,
            dt_out: 0.1,
            dealias: true,
            advection: true,
        };
        let p = crate::profiles::TwoGaussianParams::default();
        let w0 = ScalarFieldSnapshot::from_fn(Grid::D2(cfg.grid), 0.0, |x| {
            crate::profiles::ns_initial_two_gaussians(x[0], x[1], &p)
        })
        .unwrap();
        let a = solve_ns2d(&w0, &cfg).unwrap();
        let b = solve_ns2d(&w0, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
