//! Viscous Burgers `u_t + (u^2/2)_x = u_xx` on the line.

use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::grid::{FieldSeries, Grid, Grid1D, ScalarFieldSnapshot};

use super::output_schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BurgersScheme {
    ColeHopfExact,
    CentralFd,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burgers1dConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub dt_out: f64,
    pub scheme: BurgersScheme,
}

impl Burgers1dConfig {
    /// Reference grid `[-15, 15]` with 2048 nodes, snapshots every 0.01 up to 5.
    pub fn reference_default() -> Self {
        Self {
            grid: Grid1D::new(2048, -15.0, 15.0).expect("static grid"),
            dt: 1e-4,
            t_end: 5.0,
            dt_out: 0.01,
            scheme: BurgersScheme::ColeHopfExact,
        }
    }

    /// Largest stable explicit RK4 step for the diffusion operator on this
    /// grid: `dt * 4 / h^2 <= 2.5` (RK4 covers the real axis to about 2.78).
    pub fn max_stable_dt(&self) -> f64 {
        let h = self.grid.spacing();
        2.5 * h * h / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        output_schedule(self.dt, self.dt_out, self.t_end)?;
        if self.scheme == BurgersScheme::CentralFd {
            ensure!(
                self.dt <= self.max_stable_dt(),
                "dt={} violates the diffusive CFL bound dt <= 0.625 h^2 = {}",
                self.dt,
                self.max_stable_dt()
            );
        }
        Ok(())
    }
}

/// One exponential piece `coef * exp(c y)` of the Cole-Hopf potential on
/// `[a, b]`, possibly half-infinite.
#[derive(Clone, Copy, Debug)]
struct Piece {
    coef: f64,
    c: f64,
    a: f64,
    b: f64,
}

impl Piece {
    /// `int_a^b H(x - y, t) coef e^{c y} dy` and its x-derivative, with `H` the
    /// heat kernel. Completing the square shifts the window by `2 c t`.
    fn eval(&self, x: f64, t: f64) -> (f64, f64) {
        let s = 2.0 * t.sqrt();
        let shift = x + 2.0 * self.c * t;
        let lo = (self.a - shift) / s;
        let hi = (self.b - shift) / s;
        let pref = self.coef * (self.c * x + self.c * self.c * t).exp();
        let mass = 0.5 * erf_diff(lo, hi);
        let gauss = |z: f64| if z.is_infinite() { 0.0 } else { (-z * z).exp() };
        let dmass = -(gauss(hi) - gauss(lo)) / (s * PI.sqrt());
        (pref * mass, pref * (self.c * mass + dmass))
    }
}

/// `erf(hi) - erf(lo)` without cancellation in the tails.
fn erf_diff(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        libm::erfc(lo) - libm::erfc(hi)
    } else if hi <= 0.0 {
        libm::erfc(-hi) - libm::erfc(-lo)
    } else {
        libm::erf(hi) - libm::erf(lo)
    }
}

/// Exact Cole-Hopf solution for piecewise-constant compactly supported data.
///
/// With `u = -2 phi_x / phi` Burgers becomes the heat equation for `phi`,
/// started from `phi_0 = exp(-U_0 / 2)` where `U_0` is the running integral
/// of `u_0`. For piecewise-constant `u_0`, `phi_0` is piecewise exponential
/// and its heat evolution is a finite sum of error-function terms.
#[derive(Clone, Debug)]
pub struct ColeHopf {
    pieces: Vec<Piece>,
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl ColeHopf {
    /// `values[k]` holds on `(breaks[k], breaks[k+1])`; zero outside.
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        ensure!(breaks.len() >= 2, "need at least two breakpoints");
        ensure!(values.len() + 1 == breaks.len(), "need one value per interval");
        ensure!(breaks.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        let mut pieces = Vec::with_capacity(values.len() + 2);
        pieces.push(Piece { coef: 1.0, c: 0.0, a: f64::NEG_INFINITY, b: breaks[0] });
        let mut running = 0.0;
        for (k, &v) in values.iter().enumerate() {
            let x0 = breaks[k];
            // U_0(y) = running + v (y - x0) on this interval
            pieces.push(Piece {
                coef: (-0.5 * (running - v * x0)).exp(),
                c: -0.5 * v,
                a: x0,
                b: breaks[k + 1],
            });
            running += v * (breaks[k + 1] - x0);
        }
        pieces.push(Piece {
            coef: (-0.5 * running).exp(),
            c: 0.0,
            a: *breaks.last().unwrap(),
            b: f64::INFINITY,
        });
        Ok(Self { pieces, breaks: breaks.to_vec(), values: values.to_vec() })
    }

    pub fn bipolar_box() -> Self {
        Self::piecewise_constant(&[-1.0, 0.0, 1.0], &[1.0, -1.0]).expect("static data")
    }

    /// Total mass of the initial data (conserved).
    pub fn mass(&self) -> f64 {
        self.values.iter().zip(self.breaks.windows(2)).map(|(v, w)| v * (w[1] - w[0])).sum()
    }

    pub fn initial(&self, x: f64) -> f64 {
        for (k, &v) in self.values.iter().enumerate() {
            if x > self.breaks[k] && x < self.breaks[k + 1] {
                return v;
            }
        }
        0.0
    }

    /// Solution value; `t = 0` returns the initial data (jump points take 0).
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        ensure!(t.is_finite() && t >= 0.0, "time must be >= 0, got {t}");
        if t == 0.0 {
            return Ok(self.initial(x));
        }
        let (phi, dphi) = self
            .pieces
            .iter()
            .map(|p| p.eval(x, t))
            .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
        if !(phi > 1e-300) {
            return Err(Error::Numerical(format!(
                "Cole-Hopf potential collapsed to {phi} at x={x}, t={t}"
            )));
        }
        Ok(-2.0 * dphi / phi)
    }

    pub fn series(&self, grid: Grid1D, times: &[f64]) -> Result<FieldSeries> {
        let xs = grid.nodes();
        let snapshots = times
            .iter()
            .map(|&t| {
                let values = xs.iter().map(|&x| self.eval(x, t)).collect::<Result<Vec<_>>>()?;
                ScalarFieldSnapshot::new(Grid::D1(grid), t, values)
            })
            .collect::<Result<Vec<_>>>()?;
        FieldSeries::new(snapshots)
    }
}

/// Exact solution for the bipolar-box initial data.
pub fn solve_burgers_cole_hopf(x: f64, t: f64) -> Result<f64> {
    thread_local! {
        static BOX: ColeHopf = ColeHopf::bipolar_box();
    }
    BOX.with(|ch| ch.eval(x, t))
}

/// Right-hand side of the semi-discrete system with zero Dirichlet ends:
/// central second difference for `u_xx` and the conservative central flux
/// `(u_{i+1}^2 - u_{i-1}^2) / (4 h)` for `(u^2/2)_x`.
fn fd_rhs(u: &[f64], inv_h: f64, out: &mut [f64]) {
    let n = u.len();
    let inv_h2 = inv_h * inv_h;
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        let (l, c, r) = (u[i - 1], u[i], u[i + 1]);
        out[i] = (l - 2.0 * c + r) * inv_h2 - 0.25 * (r * r - l * l) * inv_h;
    }
}

/// Classical RK4 on the finite-difference system, snapshots on the
/// configured cadence.
pub fn solve_burgers_fd(u0: &ScalarFieldSnapshot, cfg: &Burgers1dConfig) -> Result<FieldSeries> {
    cfg.validate()?;
    ensure!(
        *u0.grid() == Grid::D1(cfg.grid),
        "initial data must live on the configured grid"
    );
    let (times, substeps) = output_schedule(cfg.dt, cfg.dt_out, cfg.t_end)?;
    let dt = cfg.dt_out / substeps as f64;
    let inv_h = 1.0 / cfg.grid.spacing();
    let n = cfg.grid.n();

    let mut u = u0.values().to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let max0 = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = 10.0 * max0.max(f64::MIN_POSITIVE);

    let mut snapshots = Vec::with_capacity(times.len());
    snapshots.push(ScalarFieldSnapshot::new(Grid::D1(cfg.grid), times[0], u.clone())?);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for &t_out in &times[1..] {
        for _ in 0..substeps {
            fd_rhs(&u, inv_h, &mut k1);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * dt * k1[i];
            }
            fd_rhs(&tmp, inv_h, &mut k2);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * dt * k2[i];
            }
            fd_rhs(&tmp, inv_h, &mut k3);
            for i in 0..n {
                tmp[i] = u[i] + dt * k3[i];
            }
            fd_rhs(&tmp, inv_h, &mut k4);
            for i in 0..n {
                u[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
        let max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max.is_finite() || (max0 > 0.0 && max > limit) {
            return Err(Error::Numerical(format!(
                "finite-difference Burgers solve unstable at t={t_out}: max|u|={max}"
            )));
        }
        snapshots.push(ScalarFieldSnapshot::new(Grid::D1(cfg.grid), t_out, u.clone())?);
    }
    FieldSeries::new(snapshots)
}

/// Reference series for the bipolar-box experiment with the configured scheme.
/// The finite-difference scheme starts from exact cell averages so the jumps
/// do not degrade its second-order accuracy.
pub fn solve_burgers(cfg: &Burgers1dConfig) -> Result<FieldSeries> {
    cfg.validate()?;
    match cfg.scheme {
        BurgersScheme::ColeHopfExact => {
            let (times, _) = output_schedule(cfg.dt, cfg.dt_out, cfg.t_end)?;
            ColeHopf::bipolar_box().series(cfg.grid, &times)
        }
        BurgersScheme::CentralFd => {
            let h = cfg.grid.spacing();
            let u0 = ScalarFieldSnapshot::from_fn(Grid::D1(cfg.grid), 0.0, |p| {
                crate::profiles::bipolar_box_cell_average(p[0], h)
            })?;
            solve_burgers_fd(&u0, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * f(a + i as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn cole_hopf_is_odd_and_massless() {
        let mut rng = crate::rng::SeededRng::new(4);
        for _ in 0..200 {
            let x = 12.0 * rng.uniform() - 6.0;
            let t = 0.01 + 5.0 * rng.uniform();
            let (a, b) = (solve_burgers_cole_hopf(x, t).unwrap(), solve_burgers_cole_hopf(-x, t).unwrap());
            assert!((a + b).abs() < 1e-14, "x={x} t={t}: {a} {b}");
        }
        for t in [0.5, 2.0] {
            let m = trapezoid(|x| solve_burgers_cole_hopf(x, t).unwrap(), -30.0, 30.0, 20_000);
            assert!(m.abs() < 1e-10, "t={t}: {m}");
        }
        assert_eq!(solve_burgers_cole_hopf(-0.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn cole_hopf_solves_burgers() {
        // residual of u_t + u u_x - u_xx by centred differences
        let ch = ColeHopf::bipolar_box();
        let u = |x: f64, t: f64| ch.eval(x, t).unwrap();
        let h = 1e-3;
        for (x, t) in [(-0.7, 0.3), (0.2, 1.0), (2.5, 2.0), (-1.3, 4.0)] {
            let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
            let ux = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
            let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
            let res = ut + u(x, t) * ux - uxx;
            assert!(res.abs() < 1e-5, "({x},{t}): {res}");
        }
    }

    #[test]
    fn cole_hopf_with_mass_approaches_diffusion_wave() {
        let ch = ColeHopf::piecewise_constant(&[-0.5, 0.5], &[1.0]).unwrap();
        assert_eq!(ch.mass(), 1.0);
        let deviation = |t: f64| {
            [-2.0, 0.0, 1.0, 3.0]
                .iter()
                .map(|&xi| {
                    let w = (t + 1.0).sqrt() * ch.eval(xi * (t + 1.0).sqrt(), t).unwrap();
                    (w - crate::profiles::diffusion_wave(xi, 1.0).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (d1, d2) = (deviation(100.0), deviation(1600.0));
        assert!(d2 < 1e-2 && d2 < 0.5 * d1, "{d1} {d2}");
    }

    #[test]
    fn fd_zero_data_stays_zero() {
        let cfg = Burgers1dConfig {
            grid: Grid1D::new(64, -5.0, 5.0).unwrap(),
            dt: 1e-3,
            t_end: 0.1,
            dt_out: 0.05,
            scheme: BurgersScheme::CentralFd,
        };
        let u0 = ScalarFieldSnapshot::new(Grid::D1(cfg.grid), 0.0, vec![0.0; 64]).unwrap();
        let s = solve_burgers_fd(&u0, &cfg).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.snapshots().iter().all(|x| x.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn fd_cfl_violation_rejected() {
        let mut cfg = Burgers1dConfig::reference_default();
        cfg.scheme = BurgersScheme::CentralFd;
        cfg.dt = 1e-3;
        assert!(cfg.validate().is_err());
        cfg.dt = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fd_conserves_mass_and_matches_exact() {
        let ch = ColeHopf::piecewise_constant(&[-1.0, 0.5], &[0.8]).unwrap();
        let grid = Grid1D::new(601, -15.0, 15.0).unwrap();
        let h = grid.spacing();
        let cfg = Burgers1dConfig {
            grid,
            dt: 0.5 * 0.625 * h * h,
            t_end: 1.0,
            dt_out: 0.5,
            scheme: BurgersScheme::CentralFd,
        };
        // exact cell averages of the box
        let u0 = ScalarFieldSnapshot::from_fn(Grid::D1(grid), 0.0, |p| {
            let lo = (p[0] - 0.5 * h).max(-1.0);
            let hi = (p[0] + 0.5 * h).min(0.5);
            0.8 * (hi - lo).max(0.0) / h
        })
        .unwrap();
        let s = solve_burgers_fd(&u0, &cfg).unwrap();
        let mass0: f64 = u0.values().iter().sum::<f64>() * h;
        for snap in s.snapshots() {
            let m: f64 = snap.values().iter().sum::<f64>() * h;
            assert!((m - mass0).abs() <= 1e-8 * mass0.abs(), "{m} vs {mass0}");
        }
        let last = s.snapshots().last().unwrap();
        let err = grid
            .nodes()
            .iter()
            .zip(last.values())
            .map(|(&x, &v)| (v - ch.eval(x, 1.0).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
    }
}
