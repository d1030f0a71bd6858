//! Paired sampling and the twin training loops for the physical and SSV
//! heads.
//!
//! Both heads are built from one [`ExperimentConfig`]. They start from the
//! same initial parameters (stream `seed ^ 1`) and replay the same sampling
//! stream (`seed ^ 2`), so at every step they see the same underlying draws,
//! each in its own coordinates.

mod sampling;

pub use sampling::{sample_batch_burgers, sample_paired_batch_ns, PairedBatch, TimeSampling};

use std::path::PathBuf;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::eval::{extrapolation_sweep, EvalGridSpec, MetricSeries, Predictor};
use crate::grid::FieldSeries;
use crate::nn::{
    adam_step, cosine_lr, init_params, Activation, AdamHyper, AdamState, Arch, FcnArch, MlpArch,
    NetworkParams,
};
use crate::rng::{SeededRng, INIT_STREAM_XOR, SAMPLING_STREAM_XOR};
use crate::transforms::System;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    Mlp,
    Fcn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Phys,
    Ssv,
}

impl Head {
    pub fn name(self) -> &'static str {
        match self {
            Head::Phys => "phys",
            Head::Ssv => "ssv",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkConfig {
    pub activation: Activation,
    pub mlp_hidden: Vec<usize>,
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub latent: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            activation: Activation::Tanh,
            mlp_hidden: vec![128; 4],
            branch_hidden: vec![64; 3],
            trunk_hidden: vec![128; 4],
            latent: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub system: System,
    pub arch: ArchKind,
    pub c: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub batch: usize,
    pub steps: u64,
    pub seed: u64,
    pub time_sampling: TimeSampling,
    pub network: NetworkConfig,
    pub lr: f64,
    pub lr_min: f64,
    pub eval: EvalGridSpec,
    pub reference_path: Option<PathBuf>,
    /// Where a batch that produced a non-finite loss is written.
    #[serde(skip)]
    pub postmortem_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Full-scale defaults for one (system, architecture) pair.
    pub fn default_for(system: System, arch: ArchKind) -> Self {
        let (t_max, t_eval, batch, resolution, sampling) = match system {
            System::Ns2d => (0.3, 0.3, 4096, 256, TimeSampling::LogUniform),
            System::Burgers => (0.5, 0.5, 2048, 2048, TimeSampling::Uniform),
        };
        let count = match system {
            System::Ns2d => 48,
            System::Burgers => 46,
        };
        Self {
            system,
            arch,
            c: 5.0,
            t_min: 0.0,
            t_max,
            batch,
            steps: 50_000,
            seed: 0,
            time_sampling: sampling,
            network: NetworkConfig::default(),
            lr: 1e-3,
            lr_min: 1e-5,
            eval: EvalGridSpec {
                resolution,
                c: 5.0,
                times: EvalGridSpec::uniform_times(t_eval, 5.0, count),
            },
            reference_path: None,
            postmortem_dir: None,
        }
    }

    /// Reduced budget that runs a full comparison in about a minute on one
    /// CPU core.
    pub fn desk_for(system: System, arch: ArchKind) -> Self {
        let mut cfg = Self::default_for(system, arch);
        cfg.steps = 3000;
        cfg.batch = 1024;
        cfg.network = NetworkConfig {
            mlp_hidden: vec![64; 3],
            branch_hidden: vec![32; 2],
            trunk_hidden: vec![64; 3],
            latent: 32,
            ..NetworkConfig::default()
        };
        cfg.eval.resolution = match system {
            System::Ns2d => 64,
            System::Burgers => 512,
        };
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.t_min >= 0.0 && self.t_min < self.t_max && self.t_max.is_finite(),
            "training window needs 0 <= t_min < t_max, got [{}, {}]",
            self.t_min,
            self.t_max
        );
        ensure!(self.c.is_finite() && self.c > 0.0, "window C must be > 0, got {}", self.c);
        ensure!(self.batch >= 1, "batch size must be >= 1");
        ensure!(self.lr > 0.0 && self.lr_min >= 0.0 && self.lr_min <= self.lr, "need 0 <= lr_min <= lr, lr > 0");
        ensure!(self.eval.c == self.c, "eval window must match the training window C");
        self.eval.validate()?;
        self.arch_descriptor().validate()
    }

    /// Input dimension is the same for both heads: space plus one time-like
    /// coordinate.
    pub fn arch_descriptor(&self) -> Arch {
        let input_dim = self.system.spatial_dim() + 1;
        let n = &self.network;
        match self.arch {
            ArchKind::Mlp => Arch::Mlp(MlpArch {
                input_dim,
                hidden: n.mlp_hidden.clone(),
                activation: n.activation,
            }),
            ArchKind::Fcn => Arch::Fcn(FcnArch {
                input_dim,
                branch_hidden: n.branch_hidden.clone(),
                trunk_hidden: n.trunk_hidden.clone(),
                latent: n.latent,
                activation: n.activation,
            }),
        }
    }

    fn hyper(&self) -> HeadHyper {
        HeadHyper {
            system: self.system,
            arch: self.arch_descriptor(),
            adam: AdamHyper { lr: self.lr, ..AdamHyper::default() },
            lr_min: self.lr_min,
            c: self.c,
            t_min: self.t_min,
            t_max: self.t_max,
            time_sampling: self.time_sampling,
            batch: self.batch,
            steps: self.steps,
            seed: self.seed,
        }
    }
}

/// Everything that determines how a head is trained apart from its
/// coordinate system; must be identical across the two heads.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeadHyper {
    pub system: System,
    pub arch: Arch,
    pub adam: AdamHyper,
    pub lr_min: f64,
    pub c: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub time_sampling: TimeSampling,
    pub batch: usize,
    pub steps: u64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct TrainedHead {
    pub head: Head,
    pub hyper: HeadHyper,
    pub params: NetworkParams,
    pub adam: AdamState,
    pub loss_history: Vec<(u64, f64)>,
    /// Hash of the pre-transform draws of every step.
    pub draw_hashes: Vec<u64>,
}

impl TrainedHead {
    /// Rebuild a head from checkpointed parameters; the architecture must be
    /// the one `cfg` describes.
    pub fn restore(head: Head, cfg: &ExperimentConfig, params: NetworkParams, adam: AdamState) -> Result<Self> {
        let hyper = cfg.hyper();
        ensure!(params.arch() == &hyper.arch, "checkpoint architecture does not match the configuration");
        Ok(Self { head, hyper, params, adam, loss_history: Vec::new(), draw_hashes: Vec::new() })
    }

    pub fn hyper_json(&self) -> String {
        serde_json::to_string(&self.hyper).expect("hyperparameters serialize")
    }

    /// Network inputs for physical points `points` at time `t`.
    fn inputs(&self, points: &[f64], t: f64) -> Array2<f64> {
        let dim = self.hyper.system.spatial_dim();
        let rows = points.len() / dim;
        let (scale, s) = match self.head {
            Head::Phys => (1.0, t),
            Head::Ssv => (1.0 / (t + 1.0).sqrt(), t.ln_1p()),
        };
        let mut x = Array2::zeros((rows, dim + 1));
        for (r, p) in points.chunks_exact(dim).enumerate() {
            for d in 0..dim {
                x[[r, d]] = scale * p[d];
            }
            x[[r, dim]] = s;
        }
        x
    }
}

impl Predictor for TrainedHead {
    fn spatial_dim(&self) -> usize {
        self.hyper.system.spatial_dim()
    }

    fn predict_physical(&self, points: &[f64], t: f64) -> Result<Vec<f64>> {
        ensure!(t >= 0.0, "time must be >= 0, got {t}");
        let mut out = Vec::with_capacity(points.len() / self.spatial_dim());
        // bounded chunks keep the activation buffers small
        for chunk in points.chunks(4096 * self.spatial_dim()) {
            out.extend(self.params.forward_batch(self.inputs(chunk, t).view())?);
        }
        if self.head == Head::Ssv {
            let tau = t.ln_1p();
            for v in &mut out {
                *v = self.hyper.system.amp_ssv_to_phys(*v, tau);
            }
        }
        Ok(out)
    }
}

fn draw_batch(rng: &mut SeededRng, cfg: &ExperimentConfig, reference: &FieldSeries) -> Result<PairedBatch> {
    match cfg.system {
        System::Ns2d => sample_paired_batch_ns(rng, cfg, reference),
        System::Burgers => sample_batch_burgers(rng, cfg, reference),
    }
}

/// Train one head for `cfg.steps` Adam steps on fresh batches.
pub fn train_head(head: Head, cfg: &ExperimentConfig, reference: &FieldSeries) -> Result<TrainedHead> {
    cfg.validate()?;
    ensure!(
        reference.grid().dim() == cfg.system.spatial_dim(),
        "reference dimension does not match system"
    );
    let hyper = cfg.hyper();
    let mut params = init_params(&mut SeededRng::new(cfg.seed ^ INIT_STREAM_XOR), &hyper.arch)?;
    let mut adam = AdamState::new(params.theta().len(), hyper.adam);
    let mut rng = SeededRng::new(cfg.seed ^ SAMPLING_STREAM_XOR);
    let mut loss_history = Vec::with_capacity(cfg.steps as usize);
    let mut draw_hashes = Vec::with_capacity(cfg.steps as usize);
    for step in 0..cfg.steps {
        let batch = draw_batch(&mut rng, cfg, reference)?;
        draw_hashes.push(batch.draw_hash);
        let (inputs, targets) = batch.head_data(head);
        let (loss, grad) = match params.grad_mse(inputs.view(), &targets) {
            Ok(v) => v,
            Err(Error::Numerical(msg)) => return Err(postmortem(cfg, head, step, &batch, msg)),
            Err(e) => return Err(e),
        };
        adam.hyper.lr = cosine_lr(cfg.lr, cfg.lr_min, step, cfg.steps);
        if let Err(Error::Numerical(msg)) = adam_step(params.theta_mut(), &grad, &mut adam) {
            return Err(postmortem(cfg, head, step, &batch, msg));
        }
        loss_history.push((step, loss));
    }
    adam.hyper.lr = hyper.adam.lr;
    Ok(TrainedHead { head, hyper, params, adam, loss_history, draw_hashes })
}

fn postmortem(cfg: &ExperimentConfig, head: Head, step: u64, batch: &PairedBatch, msg: String) -> Error {
    let Some(dir) = &cfg.postmortem_dir else {
        return Error::Numerical(format!("{} head, step {step}: {msg}", head.name()));
    };
    let path = dir.join(format!("nan_batch_{}_step{step}.csv", head.name()));
    let saved = std::fs::create_dir_all(dir)
        .map_err(Error::from)
        .and_then(|_| batch.write_csv(std::fs::File::create(&path)?));
    match saved {
        Ok(()) => Error::Numerical(format!(
            "{} head, step {step}: {msg}; batch saved to {}",
            head.name(),
            path.display()
        )),
        Err(e) => Error::Numerical(format!("{} head, step {step}: {msg}; saving batch failed: {e}", head.name())),
    }
}

/// Both heads and their extrapolation metrics.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub phys: TrainedHead,
    pub ssv: TrainedHead,
    pub phys_metrics: MetricSeries,
    pub ssv_metrics: MetricSeries,
}

/// Train the two heads concurrently under identical hyperparameters, then
/// sweep both over `cfg.eval`.
pub fn run_comparison(cfg: &ExperimentConfig, reference: &FieldSeries) -> Result<Comparison> {
    cfg.validate()?;
    let (phys, ssv) = rayon::join(
        || train_head(Head::Phys, cfg, reference),
        || train_head(Head::Ssv, cfg, reference),
    );
    let (phys, ssv) = (phys?, ssv?);
    let label = |h: Head| {
        let system = match cfg.system {
            System::Ns2d => "ns2d",
            System::Burgers => "burgers",
        };
        let arch = match cfg.arch {
            ArchKind::Mlp => "mlp",
            ArchKind::Fcn => "fcn",
        };
        format!("{}/{arch}/{system}", h.name())
    };
    let phys_metrics = extrapolation_sweep(&phys, reference, &cfg.eval, &label(Head::Phys))?;
    let ssv_metrics = extrapolation_sweep(&ssv, reference, &cfg.eval, &label(Head::Ssv))?;
    Ok(Comparison { phys, ssv, phys_metrics, ssv_metrics })
}
