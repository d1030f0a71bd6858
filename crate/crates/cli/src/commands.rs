use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ssvlab::eval::{extrapolation_sweep, snapshot_triptych, write_metric_csv, write_pgm, MetricSeries};
use ssvlab::nn::{load_checkpoint, save_checkpoint};
use ssvlab::profiles::{lamb_oseen_exact, ns_initial_two_gaussians, TwoGaussianParams};
use ssvlab::solvers::{solve_burgers, solve_ns2d};
use ssvlab::training::{train_head, ArchKind, ExperimentConfig, Head, TrainedHead};
use ssvlab::{ssf, FieldSeries, Grid, ScalarFieldSnapshot, System};

use crate::config::{ConfigFile, NsInitial};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// Inputs shared by every command.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: ConfigFile,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

impl RunOptions {
    fn seed(&self) -> CliResult<u64> {
        self.config.seed(self.seed)
    }

    fn prepare_out(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Other(format!("cannot create {}: {e}", self.out.display())))
    }
}

fn arch_name(a: ArchKind) -> &'static str {
    match a {
        ArchKind::Mlp => "mlp",
        ArchKind::Fcn => "fcn",
    }
}

fn load_reference(path: &Path) -> CliResult<FieldSeries> {
    if !path.exists() {
        return Err(CliError::Missing(format!("reference {} not found; run `ssvlab solve` first", path.display())));
    }
    ssf::load(path).map_err(|e| CliError::Missing(format!("reference {}: {e}", path.display())))
}

fn write_loss_csv(path: &Path, history: &[(u64, f64)]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,loss")?;
    for (s, l) in history {
        writeln!(w, "{s},{l:?}")?;
    }
    w.flush()?;
    Ok(())
}

/// Solve the reference problem of the configured system into an `SSF1` file.
pub fn cmd_solve(opts: &RunOptions) -> CliResult<RunManifest> {
    let system = opts.config.system()?;
    let seed = opts.seed()?;
    let start = Instant::now();
    let series = match system {
        System::Ns2d => {
            let (cfg, initial) = opts.config.ns_solver()?;
            let grid = Grid::D2(cfg.grid);
            let w0 = match initial {
                NsInitial::TwoGaussians => {
                    let p = TwoGaussianParams::default();
                    ScalarFieldSnapshot::from_fn(grid, 0.0, |x| ns_initial_two_gaussians(x[0], x[1], &p))?
                }
                NsInitial::LambOseen { alpha } => {
                    ScalarFieldSnapshot::from_fn(grid, 0.0, |x| lamb_oseen_exact([x[0], x[1]], 0.0, alpha))?
                }
            };
            opts.prepare_out()?;
            solve_ns2d(&w0, &cfg)?
        }
        System::Burgers => {
            let cfg = opts.config.burgers_solver()?;
            opts.prepare_out()?;
            solve_burgers(&cfg)?
        }
    };
    let path = opts.config.reference_path(&opts.out);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    ssf::save(&path, &series)?;
    let mut m = RunManifest::new("solve", seed, opts.config.entries());
    m.artifact("reference", &path);
    m.timings_secs.insert("solve".into(), start.elapsed().as_secs_f64());
    m.write(&opts.out)?;
    Ok(m)
}

/// Train the physical and SSV heads on the stored reference.
pub fn cmd_train(opts: &RunOptions) -> CliResult<RunManifest> {
    let seed = opts.seed()?;
    let arch = opts.config.arch()?;
    let mut cfg = opts.config.experiment(arch, seed)?;
    let ref_path = opts.config.reference_path(&opts.out);
    let reference = load_reference(&ref_path)?;
    opts.prepare_out()?;
    cfg.postmortem_dir = Some(opts.out.clone());
    let dir = opts.config.checkpoint_dir(&opts.out);
    std::fs::create_dir_all(&dir)?;
    let mut m = RunManifest::new("train", seed, opts.config.entries());
    m.artifact("reference", &ref_path);
    let start = Instant::now();
    let (phys, ssv) = rayon::join(
        || train_head(Head::Phys, &cfg, &reference),
        || train_head(Head::Ssv, &cfg, &reference),
    );
    m.timings_secs.insert("train".into(), start.elapsed().as_secs_f64());
    for head in [phys?, ssv?] {
        let name = head.head.name();
        let ck = dir.join(format!("{name}.ssc"));
        save_checkpoint(&ck, &head.params, &head.adam)?;
        let loss = opts.out.join(format!("loss_{name}.csv"));
        write_loss_csv(&loss, &head.loss_history)?;
        m.artifact(format!("checkpoint_{name}"), &ck);
        m.artifact(format!("loss_{name}"), &loss);
    }
    m.write(&opts.out)?;
    Ok(m)
}

fn restore_head(head: Head, cfg: &ExperimentConfig, dir: &Path) -> CliResult<TrainedHead> {
    let path = dir.join(format!("{}.ssc", head.name()));
    if !path.exists() {
        return Err(CliError::Missing(format!("checkpoint {} not found; run `ssvlab train` first", path.display())));
    }
    let ck = load_checkpoint(&path).map_err(|e| CliError::Missing(format!("checkpoint {}: {e}", path.display())))?;
    Ok(TrainedHead::restore(head, cfg, ck.params, ck.adam)?)
}

fn fmt_time(t: f64) -> String {
    format!("{t:.3}")
}

/// Extrapolation sweeps and comparison snapshots for a trained pair.
pub fn cmd_eval(opts: &RunOptions) -> CliResult<RunManifest> {
    let seed = opts.seed()?;
    let arch = opts.config.arch()?;
    let cfg = opts.config.experiment(arch, seed)?;
    let triptych_times = opts.config.triptych_times()?;
    let ref_path = opts.config.reference_path(&opts.out);
    let reference = load_reference(&ref_path)?;
    let dir = opts.config.checkpoint_dir(&opts.out);
    let phys = restore_head(Head::Phys, &cfg, &dir)?;
    let ssv = restore_head(Head::Ssv, &cfg, &dir)?;
    opts.prepare_out()?;
    let mut m = RunManifest::new("eval", seed, opts.config.entries());
    m.artifact("reference", &ref_path);
    let start = Instant::now();
    for head in [&phys, &ssv] {
        let name = head.head.name();
        let label = format!("{name}/{}/{}", arch_name(arch), system_name(cfg.system));
        let series = extrapolation_sweep(head, &reference, &cfg.eval, &label)?;
        let path = opts.out.join(format!("metrics_{name}.csv"));
        write_metric_csv(BufWriter::new(File::create(&path)?), &[&series])?;
        m.artifact(format!("metrics_{name}"), &path);
    }
    m.timings_secs.insert("sweep".into(), start.elapsed().as_secs_f64());
    for &t in &triptych_times {
        let fields = snapshot_triptych(&phys, &ssv, &reference, t, &cfg.eval)?;
        let truth_range = range(fields[0].values());
        for (field, name) in fields.iter().zip(["truth", "phys", "ssv"]) {
            let stem = format!("triptych_t{}_{name}", fmt_time(t));
            let path = opts.out.join(format!("{stem}.ssf"));
            let series = FieldSeries::new(vec![field.clone()])?;
            ssf::save(&path, &series)?;
            m.artifact(stem.clone(), &path);
            if let Grid::D2(_) = field.grid() {
                let pgm = opts.out.join(format!("{stem}.pgm"));
                write_pgm(BufWriter::new(File::create(&pgm)?), field, truth_range.0, truth_range.1)?;
                m.artifact(format!("{stem}_pgm"), &pgm);
            }
        }
    }
    m.timings_secs.insert("eval".into(), start.elapsed().as_secs_f64());
    m.write(&opts.out)?;
    Ok(m)
}

fn system_name(s: System) -> &'static str {
    match s {
        System::Ns2d => "ns2d",
        System::Burgers => "burgers",
    }
}

/// Gray-scale range shared by the three panels: the truth's range, widened
/// to a nonempty interval.
fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    }
}

/// What one figure needs: the system, architectures, and whether it shows
/// snapshots rather than error curves.
pub fn figure_plan(id: &str) -> CliResult<(System, Vec<ArchKind>, bool)> {
    Ok(match id {
        "fig1" => (System::Ns2d, vec![ArchKind::Fcn, ArchKind::Mlp], false),
        "fig2" => (System::Ns2d, vec![ArchKind::Fcn], true),
        "fig3" => (System::Ns2d, vec![ArchKind::Mlp], true),
        "fig5" => (System::Burgers, vec![ArchKind::Fcn, ArchKind::Mlp], false),
        "fig6" => (System::Burgers, vec![ArchKind::Fcn], true),
        "fig7" => (System::Burgers, vec![ArchKind::Mlp], true),
        other => return Err(CliError::Config(format!("unknown figure `{other}`; expected fig1, fig2, fig3, fig5, fig6 or fig7"))),
    })
}

/// Fresh run directory `<out>/<figure>-<unix seconds>[-k]`.
fn fresh_run_dir(out: &Path, figure: &str) -> CliResult<PathBuf> {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let base = out.join(format!("{figure}-{secs}"));
    let mut dir = base.clone();
    let mut k = 1;
    while dir.exists() {
        dir = PathBuf::from(format!("{}-{k}", base.display()));
        k += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Solve, train and evaluate everything one figure needs.
pub fn cmd_reproduce(opts: &RunOptions, figure: Option<&str>) -> CliResult<RunManifest> {
    let id = figure
        .or(opts.config.raw("figure"))
        .ok_or_else(|| CliError::Config("no figure given (argument or `figure` key)".into()))?
        .to_string();
    let (system, arches, _) = figure_plan(&id)?;
    let mut config = opts.config.clone();
    match config.raw("system") {
        Some(s) if s != system_name(system) => {
            return Err(CliError::Config(format!("{id} needs system = {}", system_name(system))));
        }
        _ => config.set("system", system_name(system)),
    }
    if config.raw("arch").is_some() {
        return Err(CliError::Config("`arch` is chosen by the figure; remove it".into()));
    }
    let seed = config.seed(opts.seed)?;
    let run_dir = fresh_run_dir(&opts.out, &id)?;
    let reference = run_dir.join("reference.ssf");
    config.set("reference", reference.display().to_string());
    let base = RunOptions { config: config.clone(), seed: Some(seed), out: run_dir.clone() };
    let mut m = RunManifest::new("reproduce", seed, config.entries());
    let start = Instant::now();
    cmd_solve(&base)?;
    m.artifact("reference", &reference);
    for arch in arches {
        let mut c = config.clone();
        c.set("arch", arch_name(arch));
        let sub = RunOptions { config: c, seed: Some(seed), out: run_dir.join(arch_name(arch)) };
        cmd_train(&sub)?;
        let e = cmd_eval(&sub)?;
        for (k, v) in e.artifacts {
            if k != "reference" {
                m.artifact(format!("{}/{k}", arch_name(arch)), &v);
            }
        }
    }
    m.config.insert("figure".into(), id);
    m.timings_secs.insert("total".into(), start.elapsed().as_secs_f64());
    m.write(&run_dir)?;
    Ok(m)
}

/// Read a metric CSV written by `cmd_eval` back into a series.
pub fn read_metric_csv(path: &Path) -> CliResult<MetricSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some("t,rel_mse,label") {
        return Err(CliError::Missing(format!("{}: bad header", path.display())));
    }
    let mut label = String::new();
    let mut rows = Vec::new();
    for line in lines {
        let mut parts = line.splitn(3, ',');
        let parse = |s: Option<&str>| s.and_then(|s| s.parse::<f64>().ok());
        let (t, v) = (parse(parts.next()), parse(parts.next()));
        let (Some(t), Some(v)) = (t, v) else {
            return Err(CliError::Missing(format!("{}: bad row `{line}`", path.display())));
        };
        label = parts.next().unwrap_or("").to_string();
        rows.push((t, v));
    }
    Ok(MetricSeries::new(label, rows)?)
}
