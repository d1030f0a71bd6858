//! Uniform grids, field snapshots and time series of snapshots.

use crate::error::{ensure, Error, Result};

/// Uniform 1D grid with both endpoints included: node `i` sits at
/// `x_min + i * (x_max - x_min) / (n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        ensure!(n >= 2, "1D grid needs at least 2 nodes, got {n}");
        ensure!(
            x_min.is_finite() && x_max.is_finite() && x_min < x_max,
            "1D grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
        );
        Ok(Self { n, x_min, x_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            return self.x_max;
        }
        self.x_min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Inclusive index range of nodes with `|x| <= radius`, or `None` when
    /// no node qualifies.
    pub fn indices_within(&self, radius: f64) -> Option<(usize, usize)> {
        let h = self.spacing();
        let lo = ((-radius - self.x_min) / h).ceil().max(0.0) as usize;
        let hi_f = ((radius - self.x_min) / h).floor();
        if hi_f < 0.0 {
            return None;
        }
        let mut lo = lo;
        let mut hi = (hi_f as usize).min(self.n - 1);
        // guard against rounding at the window edge
        while lo <= hi && self.node(lo).abs() > radius {
            lo += 1;
        }
        while hi > lo && self.node(hi).abs() > radius {
            hi -= 1;
        }
        if lo > hi || self.node(lo).abs() > radius {
            return None;
        }
        Some((lo, hi))
    }
}

/// Square cell-centred grid on the box `[-L, L]^2` with `n` nodes per axis.
///
/// Node `i` along either axis sits at `-L + (i + 1/2) * 2L / n`. Viewed as a
/// periodic grid this is the standard Fourier collocation grid shifted by
/// half a cell, which keeps it symmetric about the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
}

impl Grid2D {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        ensure!(n >= 8 && n % 2 == 0, "2D grid needs an even n >= 8, got {n}");
        ensure!(
            half_width.is_finite() && half_width > 0.0,
            "2D grid needs half width L > 0, got {half_width}"
        );
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Flat row-major index of node `(i, j)`: `i` runs along x, `j` along y.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    D1(Grid1D),
    D2(Grid2D),
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self {
            Grid::D1(_) => 1,
            Grid::D2(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::D1(g) => g.n(),
            Grid::D2(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Interpolate `values` (laid out on this grid) at `p`; linear in 1D and
    /// bilinear in 2D. Points outside the node bounding box are rejected.
    pub fn interpolate(&self, values: &[f64], p: &[f64]) -> Result<f64> {
        match self {
            Grid::D1(g) => {
                ensure!(p.len() == 1, "1D lookup needs a 1-vector, got {}", p.len());
                let (i, w) = locate(p[0], g.x_min(), g.spacing(), g.n()).ok_or_else(|| {
                    Error::OutOfDomain {
                        point: p.to_vec(),
                        domain: format!("[{}, {}]", g.x_min(), g.x_max()),
                    }
                })?;
                Ok(lerp(values[i], values[i + 1], w))
            }
            Grid::D2(g) => {
                ensure!(p.len() == 2, "2D lookup needs a 2-vector, got {}", p.len());
                let x0 = g.node(0);
                let h = g.spacing();
                let n = g.n();
                let out = || Error::OutOfDomain {
                    point: p.to_vec(),
                    domain: format!("[{}, {}]^2", x0, g.node(n - 1)),
                };
                let (i, wx) = locate(p[0], x0, h, n).ok_or_else(out)?;
                let (j, wy) = locate(p[1], x0, h, n).ok_or_else(out)?;
                let v00 = values[g.index(i, j)];
                let v10 = values[g.index(i + 1, j)];
                let v01 = values[g.index(i, j + 1)];
                let v11 = values[g.index(i + 1, j + 1)];
                Ok(lerp(lerp(v00, v10, wx), lerp(v01, v11, wx), wy))
            }
        }
    }
}

/// Cell index and fractional offset of `x` on a uniform axis.
fn locate(x: f64, x0: f64, h: f64, n: usize) -> Option<(usize, f64)> {
    let s = (x - x0) / h;
    let last = (n - 1) as f64;
    // tolerate round-off at the far edge
    if !(s >= -1e-12 && s <= last + 1e-12) {
        return None;
    }
    let s = s.clamp(0.0, last);
    let i = (s.floor() as usize).min(n - 2);
    Some((i, s - i as f64))
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    if w == 0.0 {
        a
    } else if w == 1.0 {
        b
    } else {
        a + w * (b - a)
    }
}

/// A scalar field sampled on a grid at one physical time.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFieldSnapshot {
    grid: Grid,
    t: f64,
    values: Vec<f64>,
}

impl ScalarFieldSnapshot {
    pub fn new(grid: Grid, t: f64, values: Vec<f64>) -> Result<Self> {
        ensure!(t.is_finite() && t >= 0.0, "snapshot time must be >= 0, got {t}");
        ensure!(
            values.len() == grid.len(),
            "snapshot has {} values but grid has {} nodes",
            values.len(),
            grid.len()
        );
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite value {} at node {k} of snapshot t={t}",
                values[k]
            )));
        }
        Ok(Self { grid, t, values })
    }

    /// Evaluate `f` at every node.
    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = match grid {
            Grid::D1(g) => g.nodes().into_iter().map(|x| f(&[x])).collect(),
            Grid::D2(g) => {
                let xs = g.nodes();
                let mut v = Vec::with_capacity(g.len());
                for &x in &xs {
                    for &y in &xs {
                        v.push(f(&[x, y]));
                    }
                }
                v
            }
        };
        Self::new(grid, t, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Linear (1D) or bilinear (2D) interpolation at `p`.
    pub fn bilinear_sample(&self, p: &[f64]) -> Result<f64> {
        self.grid.interpolate(&self.values, p)
    }
}

/// Time-ordered snapshots on one shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSeries {
    grid: Grid,
    snapshots: Vec<ScalarFieldSnapshot>,
}

impl FieldSeries {
    pub fn new(snapshots: Vec<ScalarFieldSnapshot>) -> Result<Self> {
        ensure!(!snapshots.is_empty(), "a field series needs at least one snapshot");
        let grid = *snapshots[0].grid();
        for w in snapshots.windows(2) {
            ensure!(
                w[1].t() > w[0].t(),
                "snapshot times must increase strictly ({} then {})",
                w[0].t(),
                w[1].t()
            );
        }
        ensure!(
            snapshots.iter().all(|s| *s.grid() == grid),
            "all snapshots of a series must share one grid"
        );
        Ok(Self { grid, snapshots })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn snapshots(&self) -> &[ScalarFieldSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn t_first(&self) -> f64 {
        self.snapshots[0].t()
    }

    pub fn t_last(&self) -> f64 {
        self.snapshots[self.snapshots.len() - 1].t()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t()).collect()
    }

    /// Bracketing snapshot index `k` and weight `w` such that the field at
    /// `t` is `(1 - w) * s[k] + w * s[k + 1]` (with `w == 0` at stored times).
    fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= self.t_first() && t <= self.t_last()) {
            return Err(Error::OutOfDomain {
                point: vec![t],
                domain: format!("time range [{}, {}]", self.t_first(), self.t_last()),
            });
        }
        let k = self.snapshots.partition_point(|s| s.t() <= t) - 1;
        if self.snapshots[k].t() == t || k + 1 == self.snapshots.len() {
            return Ok((k, 0.0));
        }
        let (t0, t1) = (self.snapshots[k].t(), self.snapshots[k + 1].t());
        Ok((k, (t - t0) / (t1 - t0)))
    }

    /// Linear interpolation in time between the bracketing snapshots.
    pub fn temporal_interpolate(&self, t: f64) -> Result<ScalarFieldSnapshot> {
        let (k, w) = self.bracket(t)?;
        if w == 0.0 {
            return Ok(self.snapshots[k].clone());
        }
        let a = self.snapshots[k].values();
        let b = self.snapshots[k + 1].values();
        let values = a.iter().zip(b).map(|(&a, &b)| lerp(a, b, w)).collect();
        ScalarFieldSnapshot::new(self.grid, t, values)
    }

    /// Space-time interpolation at a single point without materialising the
    /// intermediate snapshot.
    pub fn sample(&self, t: f64, p: &[f64]) -> Result<f64> {
        let (k, w) = self.bracket(t)?;
        let a = self.snapshots[k].bilinear_sample(p)?;
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.snapshots[k + 1].bilinear_sample(p)?;
        Ok(lerp(a, b, w))
    }

    /// Value at grid node `idx` and time `t`, interpolated in time only.
    pub fn sample_node(&self, t: f64, idx: usize) -> Result<f64> {
        let (k, w) = self.bracket(t)?;
        let a = self.snapshots[k].values()[idx];
        if w == 0.0 {
            return Ok(a);
        }
        Ok(lerp(a, self.snapshots[k + 1].values()[idx], w))
    }
}
