//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.
//! Lists are comma separated. Recognised keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `system` | `ns2d` or `burgers` | required |
//! | `arch` | `mlp` or `fcn` | `fcn` |
//! | `preset` | `full` or `desk` training budget | `full` |
//! | `seed` | base seed | `0` |
//! | `C` | SSV window radius | `5` |
//! | `t_min`, `t_max` | training window | `0`, `0.3` (NS) / `0.5` (Burgers) |
//! | `steps`, `batch` | step budget and batch size | preset |
//! | `lr`, `lr_min` | cosine schedule endpoints | `1e-3`, `1e-5` |
//! | `time_sampling` | `log-uniform` or `uniform` | per system |
//! | `activation` | `tanh`, `sin` or `identity` | `tanh` |
//! | `mlp_hidden`, `branch_hidden`, `trunk_hidden`, `latent` | network shape | preset |
//! | `eval_resolution` | eval cells per axis | preset |
//! | `eval_t_start`, `eval_t_end`, `eval_count` | sweep times | `t_max`, `5`, `48`/`46` |
//! | `triptych_times` | snapshot times | `0.5,1,1.5` (NS) / `1,1.5,2,2.5` (Burgers) |
//! | `reference` | reference `SSF1` path | `<out>/reference.ssf` |
//! | `checkpoints` | directory holding `phys.ssc`, `ssv.ssc` | `<out>` |
//! | `n`, `half_width` | NS grid | `256`, `20` |
//! | `x_min`, `x_max` | Burgers grid ends | `-15`, `15` |
//! | `dt`, `t_end`, `dt_out` | solver stepping | `2.5e-3`/`1e-4`, `5`, `0.01` |
//! | `scheme` | Burgers `cole-hopf-exact` or `central-fd` | `cole-hopf-exact` |
//! | `initial` | NS `two-gaussians` or `lamb-oseen` | `two-gaussians` |
//! | `alpha` | Lamb-Oseen circulation | `1` |
//! | `figure` | `reproduce` target | none |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ssvlab::eval::EvalGridSpec;
use ssvlab::nn::Activation;
use ssvlab::solvers::{Burgers1dConfig, BurgersScheme, Ns2dConfig};
use ssvlab::training::{ArchKind, ExperimentConfig, TimeSampling};
use ssvlab::{Grid1D, Grid2D, System};

use crate::error::{CliError, CliResult};

const KEYS: &[&str] = &[
    "system", "arch", "preset", "seed", "C", "t_min", "t_max", "steps", "batch", "lr", "lr_min",
    "time_sampling", "activation", "mlp_hidden", "branch_hidden", "trunk_hidden", "latent",
    "eval_resolution", "eval_t_start", "eval_t_end", "eval_count", "triptych_times", "reference",
    "checkpoints", "n", "half_width", "x_min", "x_max", "dt", "t_end", "dt_out", "scheme",
    "initial", "alpha", "figure",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl FromStr for ConfigFile {
    type Err = CliError;

    fn from_str(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(bad(format!("line {}: unknown key `{k}`", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(bad(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| bad(format!("invalid value `{v}` for `{key}`"))))
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| bad(format!("invalid list entry `{s}` for `{key}`"))))
                    .collect()
            })
            .transpose()
    }

    pub fn system(&self) -> CliResult<System> {
        match self.raw("system") {
            Some("ns2d") => Ok(System::Ns2d),
            Some("burgers") => Ok(System::Burgers),
            Some(other) => Err(bad(format!("unknown system `{other}`"))),
            None => Err(bad("missing key `system`")),
        }
    }

    pub fn arch(&self) -> CliResult<ArchKind> {
        match self.raw("arch").unwrap_or("fcn") {
            "mlp" => Ok(ArchKind::Mlp),
            "fcn" => Ok(ArchKind::Fcn),
            other => Err(bad(format!("unknown arch `{other}`"))),
        }
    }

    pub fn seed(&self, cli_seed: Option<u64>) -> CliResult<u64> {
        match cli_seed {
            Some(s) => Ok(s),
            None => self.get_or("seed", 0),
        }
    }

    pub fn reference_path(&self, out: &Path) -> PathBuf {
        self.raw("reference").map(PathBuf::from).unwrap_or_else(|| out.join("reference.ssf"))
    }

    pub fn checkpoint_dir(&self, out: &Path) -> PathBuf {
        self.raw("checkpoints").map(PathBuf::from).unwrap_or_else(|| out.to_path_buf())
    }

    pub fn experiment(&self, arch: ArchKind, seed: u64) -> CliResult<ExperimentConfig> {
        let system = self.system()?;
        let mut cfg = match self.raw("preset").unwrap_or("full") {
            "full" => ExperimentConfig::default_for(system, arch),
            "desk" => ExperimentConfig::desk_for(system, arch),
            other => return Err(bad(format!("unknown preset `{other}`"))),
        };
        cfg.seed = seed;
        cfg.c = self.get_or("C", cfg.c)?;
        cfg.t_min = self.get_or("t_min", cfg.t_min)?;
        cfg.t_max = self.get_or("t_max", cfg.t_max)?;
        cfg.steps = self.get_or("steps", cfg.steps)?;
        cfg.batch = self.get_or("batch", cfg.batch)?;
        cfg.lr = self.get_or("lr", cfg.lr)?;
        cfg.lr_min = self.get_or("lr_min", cfg.lr_min)?;
        if let Some(ts) = self.raw("time_sampling") {
            cfg.time_sampling = match ts {
                "log-uniform" => TimeSampling::LogUniform,
                "uniform" => TimeSampling::Uniform,
                other => return Err(bad(format!("unknown time_sampling `{other}`"))),
            };
        }
        if let Some(a) = self.raw("activation") {
            cfg.network.activation = match a {
                "tanh" => Activation::Tanh,
                "sin" => Activation::Sin,
                "identity" => Activation::Identity,
                other => return Err(bad(format!("unknown activation `{other}`"))),
            };
        }
        let net = &mut cfg.network;
        if let Some(v) = self.get_list("mlp_hidden")? {
            net.mlp_hidden = v;
        }
        if let Some(v) = self.get_list("branch_hidden")? {
            net.branch_hidden = v;
        }
        if let Some(v) = self.get_list("trunk_hidden")? {
            net.trunk_hidden = v;
        }
        net.latent = self.get_or("latent", net.latent)?;
        let count = self.get_or("eval_count", cfg.eval.times.len())?;
        let start = self.get_or("eval_t_start", cfg.t_max)?;
        let end = self.get_or("eval_t_end", 5.0)?;
        if count == 0 {
            return Err(bad("eval_count must be >= 1"));
        }
        cfg.eval = EvalGridSpec {
            resolution: self.get_or("eval_resolution", cfg.eval.resolution)?,
            c: cfg.c,
            times: EvalGridSpec::uniform_times(start, end, count),
        };
        self.reject_solver_key_mismatch(system)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn triptych_times(&self) -> CliResult<Vec<f64>> {
        Ok(match self.get_list("triptych_times")? {
            Some(v) => v,
            None => match self.system()? {
                System::Ns2d => vec![0.5, 1.0, 1.5],
                System::Burgers => vec![1.0, 1.5, 2.0, 2.5],
            },
        })
    }

    fn reject_solver_key_mismatch(&self, system: System) -> CliResult<()> {
        let foreign: &[&str] = match system {
            System::Ns2d => &["x_min", "x_max", "scheme"],
            System::Burgers => &["n", "half_width", "initial", "alpha"],
        };
        match foreign.iter().find(|k| self.entries.contains_key(**k)) {
            Some(k) => Err(bad(format!("key `{k}` does not apply to this system"))),
            None => Ok(()),
        }
    }

    pub fn ns_solver(&self) -> CliResult<(Ns2dConfig, NsInitial)> {
        self.reject_solver_key_mismatch(System::Ns2d)?;
        let mut cfg = Ns2dConfig::reference_default();
        let n = self.get_or("n", cfg.grid.n())?;
        let l = self.get_or("half_width", cfg.grid.half_width())?;
        cfg.grid = Grid2D::new(n, l)?;
        cfg.dt = self.get_or("dt", cfg.dt)?;
        cfg.t_end = self.get_or("t_end", cfg.t_end)?;
        cfg.dt_out = self.get_or("dt_out", cfg.dt_out)?;
        cfg.validate()?;
        let initial = match self.raw("initial").unwrap_or("two-gaussians") {
            "two-gaussians" => NsInitial::TwoGaussians,
            "lamb-oseen" => NsInitial::LambOseen { alpha: self.get_or("alpha", 1.0)? },
            other => return Err(bad(format!("unknown initial condition `{other}`"))),
        };
        Ok((cfg, initial))
    }

    pub fn burgers_solver(&self) -> CliResult<Burgers1dConfig> {
        self.reject_solver_key_mismatch(System::Burgers)?;
        let mut cfg = Burgers1dConfig::reference_default();
        let n = self.get_or("n", cfg.grid.n())?;
        let a = self.get_or("x_min", cfg.grid.x_min())?;
        let b = self.get_or("x_max", cfg.grid.x_max())?;
        cfg.grid = Grid1D::new(n, a, b)?;
        cfg.dt = self.get_or("dt", cfg.dt)?;
        cfg.t_end = self.get_or("t_end", cfg.t_end)?;
        cfg.dt_out = self.get_or("dt_out", cfg.dt_out)?;
        cfg.scheme = match self.raw("scheme").unwrap_or("cole-hopf-exact") {
            "cole-hopf-exact" => BurgersScheme::ColeHopfExact,
            "central-fd" => BurgersScheme::CentralFd,
            other => return Err(bad(format!("unknown scheme `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NsInitial {
    TwoGaussians,
    LambOseen { alpha: f64 },
}
