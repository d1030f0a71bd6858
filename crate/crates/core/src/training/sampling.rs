use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use super::{ExperimentConfig, Head};
use crate::error::{ensure, Error, Result};
use crate::grid::{FieldSeries, Grid};
use crate::rng::{sample_uniform_disk, sample_uniform_interval, SeededRng};
use crate::transforms::System;

/// How training times are drawn on `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeSampling {
    /// `tau` uniform on `[ln(1 + t_min), ln(1 + t_max)]`.
    LogUniform,
    /// `t` uniform on `[t_min, t_max]`.
    Uniform,
}

/// Matched samples in both coordinate systems, stored column-wise. Spatial
/// columns `xi` and `x` hold `dim` entries per record.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedBatch {
    pub dim: usize,
    pub xi: Vec<f64>,
    pub tau: Vec<f64>,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub target_ssv: Vec<f64>,
    pub target_phys: Vec<f64>,
    /// FNV-1a hash of the raw draws before any coordinate map.
    pub draw_hash: u64,
}

impl PairedBatch {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Network inputs (space then time-like coordinate) and targets for one head.
    pub fn head_data(&self, head: Head) -> (Array2<f64>, Vec<f64>) {
        let (space, time, target) = match head {
            Head::Phys => (&self.x, &self.t, &self.target_phys),
            Head::Ssv => (&self.xi, &self.tau, &self.target_ssv),
        };
        let d = self.dim;
        let inputs = Array2::from_shape_fn((self.len(), d + 1), |(r, c)| {
            if c < d {
                space[r * d + c]
            } else {
                time[r]
            }
        });
        (inputs, target.clone())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim;
        let names: Vec<String> = (0..d)
            .map(|k| format!("xi{k}"))
            .chain(std::iter::once("tau".into()))
            .chain((0..d).map(|k| format!("x{k}")))
            .chain(["t", "target_ssv", "target_phys"].map(String::from))
            .collect();
        writeln!(w, "{}", names.join(","))?;
        for r in 0..self.len() {
            let mut row: Vec<f64> = self.xi[r * d..(r + 1) * d].to_vec();
            row.push(self.tau[r]);
            row.extend_from_slice(&self.x[r * d..(r + 1) * d]);
            row.extend([self.t[r], self.target_ssv[r], self.target_phys[r]]);
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, b: &[u8]) {
        for &x in b {
            self.0 ^= x as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Draw the time-like coordinate; returns `(t, tau)` pairs and hashes the draws.
fn draw_times(rng: &mut SeededRng, cfg: &ExperimentConfig, hash: &mut Fnv) -> Result<Vec<(f64, f64)>> {
    let clamp = |t: f64| t.clamp(cfg.t_min, cfg.t_max);
    Ok(match cfg.time_sampling {
        TimeSampling::LogUniform => {
            let taus = sample_uniform_interval(rng, cfg.t_min.ln_1p(), cfg.t_max.ln_1p(), cfg.batch)?;
            taus.into_iter()
                .map(|tau| {
                    hash.bytes(&tau.to_le_bytes());
                    let t = clamp(tau.exp_m1());
                    (t, t.ln_1p())
                })
                .collect()
        }
        TimeSampling::Uniform => {
            let ts = sample_uniform_interval(rng, cfg.t_min, cfg.t_max, cfg.batch)?;
            ts.into_iter()
                .map(|t| {
                    hash.bytes(&t.to_le_bytes());
                    (t, t.ln_1p())
                })
                .collect()
        }
    })
}

fn check_reference(cfg: &ExperimentConfig, reference: &FieldSeries, system: System) -> Result<()> {
    ensure!(cfg.system == system, "config is for {:?}, sampler for {system:?}", cfg.system);
    ensure!(cfg.batch >= 1, "batch size must be >= 1");
    ensure!(
        reference.t_first() <= cfg.t_min && reference.t_last() >= cfg.t_max,
        "reference covers [{}, {}], training window is [{}, {}]",
        reference.t_first(),
        reference.t_last(),
        cfg.t_min,
        cfg.t_max
    );
    Ok(())
}

/// NS batch: `tau` log-uniform (by default), `xi` uniform on the disk `D_C`,
/// physical pair by the inverse SSV map, targets by interpolating the
/// reference.
pub fn sample_paired_batch_ns(
    rng: &mut SeededRng,
    cfg: &ExperimentConfig,
    reference: &FieldSeries,
) -> Result<PairedBatch> {
    check_reference(cfg, reference, System::Ns2d)?;
    ensure!(reference.grid().dim() == 2, "NS reference must be 2D");
    let mut hash = Fnv::new();
    let times = draw_times(rng, cfg, &mut hash)?;
    let xis = sample_uniform_disk(rng, cfg.c, cfg.batch)?;
    let m = cfg.batch;
    let mut b = PairedBatch {
        dim: 2,
        xi: Vec::with_capacity(2 * m),
        tau: Vec::with_capacity(m),
        x: Vec::with_capacity(2 * m),
        t: Vec::with_capacity(m),
        target_ssv: Vec::with_capacity(m),
        target_phys: Vec::with_capacity(m),
        draw_hash: 0,
    };
    for (&(t, tau), xi) in times.iter().zip(&xis) {
        hash.bytes(&xi[0].to_le_bytes());
        hash.bytes(&xi[1].to_le_bytes());
        let s = (t + 1.0).sqrt();
        let x = [s * xi[0], s * xi[1]];
        let u = reference.sample(t, &x)?;
        b.xi.extend_from_slice(xi);
        b.tau.push(tau);
        b.x.extend_from_slice(&x);
        b.t.push(t);
        b.target_phys.push(u);
        b.target_ssv.push(System::Ns2d.amp_phys_to_ssv(u, t));
    }
    b.draw_hash = hash.0;
    Ok(b)
}

/// Burgers batch: `t` uniform (by default), `x` a uniformly drawn reference
/// grid node inside `|x| <= C sqrt(t+1)`, targets read at that node.
pub fn sample_batch_burgers(
    rng: &mut SeededRng,
    cfg: &ExperimentConfig,
    reference: &FieldSeries,
) -> Result<PairedBatch> {
    check_reference(cfg, reference, System::Burgers)?;
    let Grid::D1(grid) = *reference.grid() else {
        return Err(Error::InvalidArgument("Burgers reference must be 1D".into()));
    };
    let mut hash = Fnv::new();
    let times = draw_times(rng, cfg, &mut hash)?;
    let m = cfg.batch;
    let mut b = PairedBatch {
        dim: 1,
        xi: Vec::with_capacity(m),
        tau: Vec::with_capacity(m),
        x: Vec::with_capacity(m),
        t: Vec::with_capacity(m),
        target_ssv: Vec::with_capacity(m),
        target_phys: Vec::with_capacity(m),
        draw_hash: 0,
    };
    for &(t, tau) in &times {
        let radius = cfg.c * (t + 1.0).sqrt();
        let (lo, hi) = grid.indices_within(radius).ok_or_else(|| Error::OutOfDomain {
            point: vec![radius],
            domain: "no reference node inside the window".into(),
        })?;
        if grid.node(0) > -radius || grid.node(grid.n() - 1) < radius {
            return Err(Error::OutOfDomain {
                point: vec![-radius, radius],
                domain: format!("reference grid [{}, {}]", grid.x_min(), grid.x_max()),
            });
        }
        let idx = lo + rng.below(hi - lo + 1);
        hash.bytes(&(idx as u64).to_le_bytes());
        let x = grid.node(idx);
        let u = reference.sample_node(t, idx)?;
        b.xi.push(x / (t + 1.0).sqrt());
        b.tau.push(tau);
        b.x.push(x);
        b.t.push(t);
        b.target_phys.push(u);
        b.target_ssv.push(System::Burgers.amp_phys_to_ssv(u, t));
    }
    b.draw_hash = hash.0;
    Ok(b)
}
