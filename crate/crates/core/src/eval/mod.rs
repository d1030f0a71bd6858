//! Windowed error functionals, relative-MSE sweeps and comparison snapshots.
//!
//! Quadratures use the midpoint rule on `resolution` cells per axis covering
//! `[-R, R]^d`, keeping only cells whose centre satisfies `|p| <= R`.

mod output;

pub use output::{write_metric_csv, write_pgm};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::grid::{FieldSeries, Grid, Grid1D, Grid2D, ScalarFieldSnapshot};
use crate::window::norm;

/// Anything that predicts the physical field `u(x, t)` at a batch of points.
pub trait Predictor: Sync {
    fn spatial_dim(&self) -> usize;

    /// `points` holds `points.len() / dim` spatial points, row-major.
    fn predict_physical(&self, points: &[f64], t: f64) -> Result<Vec<f64>>;
}

/// The stored reference series used as a predictor.
pub struct ReferencePredictor<'a>(pub &'a FieldSeries);

impl Predictor for ReferencePredictor<'_> {
    fn spatial_dim(&self) -> usize {
        self.0.grid().dim()
    }

    fn predict_physical(&self, points: &[f64], t: f64) -> Result<Vec<f64>> {
        let snap = self.0.temporal_interpolate(t)?;
        points.chunks_exact(self.spatial_dim()).map(|p| snap.bilinear_sample(p)).collect()
    }
}

/// A closure `f(x, t)` used as a predictor.
pub struct FnPredictor<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], f64) -> f64 + Sync> Predictor for FnPredictor<F> {
    fn spatial_dim(&self) -> usize {
        self.dim
    }

    fn predict_physical(&self, points: &[f64], t: f64) -> Result<Vec<f64>> {
        Ok(points.chunks_exact(self.dim).map(|p| (self.f)(p, t)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalGridSpec {
    pub resolution: usize,
    pub c: f64,
    pub times: Vec<f64>,
}

impl EvalGridSpec {
    pub fn new(resolution: usize, c: f64, times: Vec<f64>) -> Result<Self> {
        let spec = Self { resolution, c, times };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.resolution >= 32, "eval resolution must be >= 32, got {}", self.resolution);
        ensure!(self.c.is_finite() && self.c > 0.0, "window C must be > 0, got {}", self.c);
        ensure!(self.times.iter().all(|t| t.is_finite() && *t >= 0.0), "eval times must be >= 0");
        ensure!(self.times.windows(2).all(|w| w[0] < w[1]), "eval times must increase strictly");
        Ok(())
    }

    /// `count` uniformly spaced times covering `[a, b]` inclusive.
    pub fn uniform_times(a: f64, b: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![a];
        }
        (0..count).map(|k| a + (b - a) * k as f64 / (count - 1) as f64).collect()
    }
}

/// Cell centres inside the closed ball of `radius` and the cell measure.
pub fn window_points(dim: usize, resolution: usize, radius: f64) -> Result<(Vec<f64>, f64)> {
    ensure!(dim == 1 || dim == 2, "dimension must be 1 or 2, got {dim}");
    ensure!(resolution >= 1, "resolution must be >= 1");
    ensure!(radius.is_finite() && radius > 0.0, "window radius must be > 0, got {radius}");
    let h = 2.0 * radius / resolution as f64;
    let centre = |i: usize| -radius + (i as f64 + 0.5) * h;
    let mut pts = Vec::new();
    if dim == 1 {
        pts.extend((0..resolution).map(centre));
        return Ok((pts, h));
    }
    for i in 0..resolution {
        for j in 0..resolution {
            let p = [centre(i), centre(j)];
            if norm(&p) <= radius {
                pts.extend_from_slice(&p);
            }
        }
    }
    Ok((pts, h * h))
}

fn windowed_l2(
    dim: usize,
    resolution: usize,
    radius: f64,
    pred: impl Fn(&[f64]) -> f64,
    reference: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    let (pts, measure) = window_points(dim, resolution, radius)?;
    let mut acc = 0.0;
    for p in pts.chunks_exact(dim) {
        let (a, b) = (pred(p), reference(p));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Numerical(format!("non-finite field value at {p:?}")));
        }
        acc += (a - b) * (a - b);
    }
    Ok(acc * measure)
}

/// `int_{|xi| <= C} |Omega_hat - Omega|^2 d xi` at SSV time `tau`; fields are
/// functions of `(xi, tau)`.
pub fn windowed_l2_ssv(
    dim: usize,
    resolution: usize,
    pred: impl Fn(&[f64], f64) -> f64,
    reference: impl Fn(&[f64], f64) -> f64,
    c: f64,
    tau: f64,
) -> Result<f64> {
    windowed_l2(dim, resolution, c, |p| pred(p, tau), |p| reference(p, tau))
}

/// `int_{|x| <= C sqrt(t+1)} |u_hat - u|^2 dx` at physical time `t`; fields
/// are functions of `(x, t)`.
pub fn windowed_l2_phys(
    dim: usize,
    resolution: usize,
    pred: impl Fn(&[f64], f64) -> f64,
    reference: impl Fn(&[f64], f64) -> f64,
    c: f64,
    t: f64,
) -> Result<f64> {
    ensure!(t >= 0.0, "time must be >= 0, got {t}");
    windowed_l2(dim, resolution, c * (t + 1.0).sqrt(), |p| pred(p, t), |p| reference(p, t))
}

/// Mean of `(pred - ref)^2` over the masked window grid divided by the mean of
/// `ref^2`.
pub fn rel_mse(
    predictor: &dyn Predictor,
    reference: &FieldSeries,
    t: f64,
    spec: &EvalGridSpec,
) -> Result<f64> {
    let dim = reference.grid().dim();
    ensure!(predictor.spatial_dim() == dim, "predictor and reference dimensions differ");
    let radius = spec.c * (t + 1.0).sqrt();
    let (pts, _) = window_points(dim, spec.resolution, radius)?;
    let truth = ReferencePredictor(reference).predict_physical(&pts, t)?;
    let pred = predictor.predict_physical(&pts, t)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (p, r) in pred.iter().zip(&truth) {
        if !p.is_finite() {
            return Err(Error::Numerical(format!("non-finite prediction at t = {t}")));
        }
        num += (p - r) * (p - r);
        den += r * r;
    }
    let n = truth.len() as f64;
    if den / n < 1e-300 {
        return Err(Error::Numerical(format!("relative MSE undefined at t = {t}: reference vanishes")));
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricSeries {
    label: String,
    rows: Vec<(f64, f64)>,
}

impl MetricSeries {
    pub fn new(label: impl Into<String>, rows: Vec<(f64, f64)>) -> Result<Self> {
        ensure!(rows.windows(2).all(|w| w[0].0 < w[1].0), "metric times must increase strictly");
        ensure!(
            rows.iter().all(|(t, v)| t.is_finite() && v.is_finite() && *v >= 0.0),
            "metric values must be finite and >= 0"
        );
        Ok(Self { label: label.into(), rows })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn mean(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum::<f64>() / self.rows.len() as f64
    }
}

/// RelMSE at every time of `spec`, evaluated in parallel and kept in order.
pub fn extrapolation_sweep(
    predictor: &dyn Predictor,
    reference: &FieldSeries,
    spec: &EvalGridSpec,
    label: &str,
) -> Result<MetricSeries> {
    spec.validate()?;
    let rows = spec
        .times
        .par_iter()
        .map(|&t| Ok((t, rel_mse(predictor, reference, t, spec)?)))
        .collect::<Result<Vec<_>>>()?;
    MetricSeries::new(label, rows)
}

/// Reference, physical-head and mapped SSV-head fields at time `t` on one
/// grid spanning the physical window `|x| <= C sqrt(t+1)`.
pub fn snapshot_triptych(
    phys: &dyn Predictor,
    ssv: &dyn Predictor,
    reference: &FieldSeries,
    t: f64,
    spec: &EvalGridSpec,
) -> Result<[ScalarFieldSnapshot; 3]> {
    spec.validate()?;
    let radius = spec.c * (t + 1.0).sqrt();
    let grid = match reference.grid() {
        Grid::D1(_) => Grid::D1(Grid1D::new(spec.resolution, -radius, radius)?),
        Grid::D2(_) => Grid::D2(Grid2D::new(spec.resolution + spec.resolution % 2, radius)?),
    };
    let pts: Vec<f64> = match grid {
        Grid::D1(g) => g.nodes(),
        Grid::D2(g) => {
            let xs = g.nodes();
            xs.iter().flat_map(|&x| xs.iter().flat_map(move |&y| [x, y])).collect()
        }
    };
    let mut out = Vec::with_capacity(3);
    for p in [&ReferencePredictor(reference) as &dyn Predictor, phys, ssv] {
        out.push(ScalarFieldSnapshot::new(grid, t, p.predict_physical(&pts, t)?)?);
    }
    Ok(out.try_into().unwrap())
}

/// Local maxima of a 2D snapshot above `fraction` of its maximum, using the
/// 8-neighbourhood. Only nodes inside the inscribed disk `|p| <= L` count, for
/// both the maximum and the candidates, which on a triptych grid is the eval
/// window. Boundary nodes are excluded. Ties are broken by node index so a
/// two-node plateau counts once.
pub fn count_local_maxima(snap: &ScalarFieldSnapshot, fraction: f64) -> Result<usize> {
    let Grid::D2(g) = snap.grid() else {
        return Err(Error::InvalidArgument("peak counting needs a 2D field".into()));
    };
    let (n, v) = (g.n(), snap.values());
    let r2 = g.half_width() * g.half_width();
    let inside = |i: usize, j: usize| g.node(i).powi(2) + g.node(j).powi(2) <= r2;
    let max = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| inside(i, j))
        .map(|(i, j)| v[g.index(i, j)])
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = fraction * max;
    let mut count = 0;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let c = v[g.index(i, j)];
            if c <= threshold || !inside(i, j) {
                continue;
            }
            let is_peak = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let o = v[g.index((i as i64 + di) as usize, (j as i64 + dj) as usize)];
                    match (di, dj).cmp(&(0, 0)) {
                        std::cmp::Ordering::Equal => true,
                        std::cmp::Ordering::Less => c > o,
                        std::cmp::Ordering::Greater => c >= o,
                    }
                })
            });
            count += is_peak as usize;
        }
    }
    Ok(count)
}
