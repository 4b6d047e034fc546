//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::analysis::{RegionSpec, TransitionEntry};
use crate::config::{
    self, build_system, default_regions, hash_bytes, hash_json, PlanePoint, Provenance, RunConfig,
};
use crate::error::{AtlasError, Result};
use crate::harness::{self, CompareSettings};
use crate::learn::{learn_atlas_with_diagnostics, AtlasModel};
use crate::netspace::{build_delta_net, euclidean, StateSpace};
use crate::rng;
use crate::simulate::{run, sample_qhat, validate_state, write_trajectory_csv, AtlasState};
use crate::systems;
use crate::with_system;

#[derive(Debug, Parser)]
#[command(
    name = "atlas",
    version,
    about = "Learn and run coarse stochastic simulators"
)]
pub struct Cli {
    /// Worker threads for chart learning and path ensembles.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn an atlas from a run config.
    ///
    /// Unset atlas parameters follow the experimental schedule t0 = delta^2,
    /// dt = t0/5, m = 2d, p = 10^4. "dt_schedule": "theoretical" selects
    /// dt = delta/ln(1/delta) instead; the theory also asks for p of order
    /// delta^-4.
    Learn {
        #[arg(long)]
        config: PathBuf,
        /// Model path; defaults to <out_dir>/model.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one atlas trajectory and write it as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Starting chart (at its origin unless --x is given).
        #[arg(long, conflicts_with = "point")]
        chart: Option<usize>,
        /// Starting chart coordinates, comma separated.
        #[arg(long, requires = "chart")]
        x: Option<String>,
        /// Ambient starting point, comma separated; the run starts at the
        /// origin of the nearest (Euclidean) net point.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the lifted net-point coordinates.
        #[arg(long)]
        lift: bool,
    },
    /// Draw independent samples from the atlas's approximate stationary law.
    SampleStationary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        chart: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lift: bool,
    },
    /// Compare atlas and direct-simulator distributions over dyadic times.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to <out_dir>/model.json.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Mean transition times between metastable regions for both simulators.
    TransitionTimes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// List the registered reference systems.
    ListSystems,
}

/// Parse and execute; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(AtlasError::invalid("threads", "must be positive"));
        }
        // A global pool can only be installed once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Learn { config, out: path } => cmd_learn(&config, path, out),
        Command::Simulate {
            model,
            chart,
            x,
            point,
            steps,
            seed,
            out: path,
            lift,
        } => cmd_simulate(&model, chart, x, point, steps, seed, path, lift, out),
        Command::SampleStationary {
            model,
            n,
            burn_in,
            chart,
            seed,
            out: path,
            lift,
        } => cmd_sample_stationary(&model, n, burn_in, chart, seed, path, lift, out),
        Command::Compare { config, model } => cmd_compare(&config, model, out),
        Command::TransitionTimes { config, model } => cmd_transition_times(&config, model, out),
        Command::ListSystems => {
            for (k, d) in systems::REGISTRY {
                writeln!(out, "{k:<26}{d}")?;
            }
            Ok(())
        }
    }
}

fn parse_vec(s: &str, field: &'static str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| AtlasError::invalid(field, format!("cannot parse {t:?} as a number")))
        })
        .collect()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| AtlasError::Config(format!("{}: {e}", path.display())))
}

fn load_model<P: serde::de::DeserializeOwned + Clone>(
    path: &Path,
) -> Result<(AtlasModel<P>, String)> {
    let text = read_file(path)?;
    let model = AtlasModel::from_json(&text)
        .map_err(|e| AtlasError::InvalidModel(format!("{}: {e}", path.display())))?;
    Ok((model, hash_bytes(text.as_bytes())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Net points as plain coordinate vectors, when they are numeric arrays.
fn numeric_points(points: &[Value]) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|p| {
            p.as_array()
                .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                .ok_or_else(|| {
                    AtlasError::InvalidModel("net points are not numeric vectors".into())
                })
        })
        .collect()
}

fn cmd_learn(config_path: &Path, path: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let params = cfg.atlas.params()?;
    let path = path.unwrap_or_else(|| cfg.out_dir.join("model.json"));
    let built = build_system(&cfg)?;
    let start = Instant::now();
    let (json, charts, warnings, ratio) = with_system!(&built, s => {
        let (model, diag) = learn_atlas_with_diagnostics(s, &params, cfg.seed)?;
        (model.to_json()?, model.n_charts(), diag.warnings, config::dt_ratio(s, params.dt))
    });
    let mut w = create(&path)?;
    w.write_all(json.as_bytes())?;
    w.flush()?;
    Provenance {
        command: "learn".into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        chart_count: Some(charts),
        dt_ratio: ratio,
        warnings: warnings.clone(),
    }
    .write_for(&path)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    writeln!(out, "learned {charts} charts -> {}", path.display())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model_path: &Path,
    chart: Option<usize>,
    x: Option<String>,
    point: Option<String>,
    steps: usize,
    seed: u64,
    path: Option<PathBuf>,
    lift: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let (model, model_hash) = load_model::<Value>(model_path)?;
    let d = model.dim();
    let s0 = match (chart, point) {
        (Some(i), _) => AtlasState {
            i,
            x: match x {
                Some(x) => parse_vec(&x, "x")?,
                None => vec![0.0; d],
            },
        },
        (None, Some(p)) => {
            let y = parse_vec(&p, "point")?;
            let pts = numeric_points(&model.net().points)?;
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, q) in pts.iter().enumerate() {
                if q.len() != y.len() {
                    return Err(AtlasError::DimensionMismatch {
                        expected: q.len(),
                        found: y.len(),
                    });
                }
                let r = euclidean(q, &y);
                if r < best_d {
                    best = k;
                    best_d = r;
                }
            }
            AtlasState::at_center(best, d)
        }
        (None, None) => AtlasState::at_center(0, d),
    };
    validate_state(&model, &s0)?;
    let start = Instant::now();
    let mut rng = rng::stream(seed, "simulate", 0);
    let mut traj = run(&model, &s0, steps, &mut rng);
    traj.seed = Some(seed);
    let lifted = if lift {
        Some(numeric_points(&model.net().points)?)
    } else {
        None
    };
    let invocation = serde_json::json!({
        "command": "simulate", "model_sha256": model_hash, "start": s0, "steps": steps, "seed": seed, "lift": lift,
    });
    match &path {
        Some(p) => {
            let mut w = create(p)?;
            write_trajectory_csv(&mut w, &traj, lifted.as_deref())?;
            w.flush()?;
            Provenance {
                command: "simulate".into(),
                config_hash: hash_json(&invocation),
                seed,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
                chart_count: Some(model.n_charts()),
                dt_ratio: None,
                warnings: vec![],
            }
            .write_for(p)?;
        }
        None => write_trajectory_csv(&mut *out, &traj, lifted.as_deref())?,
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample_stationary(
    model_path: &Path,
    n: usize,
    burn_in: usize,
    chart: usize,
    seed: u64,
    path: Option<PathBuf>,
    lift: bool,
    out: &mut dyn Write,
) -> Result<()> {
    use rayon::prelude::*;
    let (model, model_hash) = load_model::<Value>(model_path)?;
    let s0 = AtlasState::at_center(chart, model.dim());
    validate_state(&model, &s0)?;
    let start = Instant::now();
    let samples: Vec<AtlasState> = (0..n)
        .into_par_iter()
        .map(|k| {
            sample_qhat(
                &model,
                &s0,
                burn_in,
                &mut rng::stream(seed, "qhat", k as u64),
            )
        })
        .collect();
    let lifted = if lift {
        Some(numeric_points(&model.net().points)?)
    } else {
        None
    };
    let write = |w: &mut dyn Write| -> Result<()> {
        let mut c = csv::Writer::from_writer(w);
        let mut header = vec!["chart_index".to_string()];
        header.extend((1..=model.dim()).map(|a| format!("x_{a}")));
        if let Some(p) = &lifted {
            header.extend((1..=p.first().map_or(0, Vec::len)).map(|a| format!("y_{a}")));
        }
        c.write_record(&header)?;
        for s in &samples {
            let mut rec = vec![s.i.to_string()];
            rec.extend(s.x.iter().map(|v| v.to_string()));
            if let Some(p) = &lifted {
                rec.extend(p[s.i].iter().map(|v| v.to_string()));
            }
            c.write_record(&rec)?;
        }
        c.flush()?;
        Ok(())
    };
    match &path {
        Some(p) => {
            let mut w = create(p)?;
            write(&mut w)?;
            w.flush()?;
            let invocation = serde_json::json!({
                "command": "sample-stationary", "model_sha256": model_hash, "n": n, "burn_in": burn_in,
                "chart": chart, "seed": seed, "lift": lift,
            });
            Provenance {
                command: "sample-stationary".into(),
                config_hash: hash_json(&invocation),
                seed,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
                chart_count: Some(model.n_charts()),
                dt_ratio: None,
                warnings: vec![],
            }
            .write_for(p)?;
        }
        None => write(out)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    config_hash: String,
    dt_ratio: Option<f64>,
    report: &'a crate::analysis::ComparisonReport,
}

fn compare_impl<S>(space: &S, cfg: &RunConfig, model_path: &Path, out: &mut dyn Write) -> Result<()>
where
    S: StateSpace,
    S::Point: PlanePoint,
{
    let section = cfg
        .compare
        .as_ref()
        .ok_or_else(|| AtlasError::Config("config has no \"compare\" section".into()))?;
    let (model, _) = load_model::<S::Point>(model_path)?;
    let start = Instant::now();
    let net = &model.net().points;
    let ics: Vec<S::Point> = match &section.ics {
        Some(v) => v.iter().map(|x| S::Point::from_plane(x)).collect(),
        None => {
            // Distinct net points drawn at random from the config seed.
            let mut r = rng::stream(cfg.seed, "compare-ics", 0);
            rand::seq::index::sample(&mut r, net.len(), section.n_ics.min(net.len()))
                .into_iter()
                .map(|i| net[i].clone())
                .collect()
        }
    };
    let coarse = build_delta_net(net, section.delta_c, |a, b| space.distance(a, b))?;
    let settings = CompareSettings {
        times: harness::dyadic_times(model.dt(), section.horizon),
        n_paths: section.n_paths,
        coarse: coarse.points,
        delta_c: section.delta_c,
        seed: rng::derive_seed(cfg.seed, "compare"),
    };
    let report = harness::compare_simulators(space, &model, &ics, &settings)?;
    let ratio = config::dt_ratio(space, model.dt());
    let hash = cfg.hash();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join("compare.csv");
    report.write_csv(create(&csv_path)?)?;
    let hist_path = cfg.out_dir.join("compare_histograms.csv");
    report.write_histograms(create(&hist_path)?)?;
    let json_path = cfg.out_dir.join("compare.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&CompareOutput {
            config_hash: hash.clone(),
            dt_ratio: ratio,
            report: &report,
        })?,
    )?;
    let prov = Provenance {
        command: "compare".into(),
        config_hash: hash,
        seed: cfg.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        chart_count: Some(model.n_charts()),
        dt_ratio: ratio,
        warnings: vec![],
    };
    for p in [&csv_path, &hist_path, &json_path] {
        prov.write_for(p)?;
    }
    if let Some(r) = ratio {
        writeln!(out, "dt ratio (atlas / micro): {r}")?;
    }
    for (t, (m, s)) in report.times.iter().zip(report.mean.iter().zip(&report.std)) {
        writeln!(out, "t = {t:<10} L1 = {m:.4} +- {s:.4}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TransitionOutput {
    config_hash: String,
    dt_ratio: Option<f64>,
    regions: RegionSpec<Vec<f64>>,
    direct: Vec<TransitionEntry>,
    atlas: Vec<TransitionEntry>,
}

fn transitions_impl<S>(
    space: &S,
    cfg: &RunConfig,
    model_path: &Path,
    out: &mut dyn Write,
) -> Result<()>
where
    S: StateSpace,
    S::Point: PlanePoint,
{
    let section = cfg
        .transitions
        .as_ref()
        .ok_or_else(|| AtlasError::Config("config has no \"transitions\" section".into()))?;
    let regions = section
        .regions
        .clone()
        .or_else(|| default_regions(&cfg.system))
        .ok_or_else(|| {
            AtlasError::Config(format!(
                "system {} has no default regions; set transitions.regions",
                cfg.system
            ))
        })?;
    let spec = RegionSpec::balls(regions.centers.clone(), regions.radius);
    let label = |p: &S::Point| -> u32 {
        p.plane()
            .map(|x| spec.label(&x, |a, b| euclidean(a, b)))
            .unwrap_or(0)
    };
    let (model, _) = load_model::<S::Point>(model_path)?;
    let start = Instant::now();
    let x0 = match &section.start {
        Some(x) => S::Point::from_plane(x),
        None => S::Point::from_plane(&regions.centers[0]),
    };
    let record_dt = space.micro_dt().unwrap_or(model.dt());
    let seed = rng::derive_seed(cfg.seed, "transitions");
    let direct = harness::pooled(harness::direct_transitions(
        space,
        &x0,
        label,
        section.n_runs,
        (section.horizon / record_dt).round() as usize,
        record_dt,
        seed,
    )?);
    let s0 = harness::atlas_start(space, &model, &x0);
    let atlas = harness::pooled(harness::atlas_transitions(
        &model,
        &s0,
        label,
        section.n_runs,
        (section.horizon / model.dt()).round() as usize,
        seed,
    )?);
    let ratio = config::dt_ratio(space, model.dt());
    let hash = cfg.hash();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("transitions.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&TransitionOutput {
            config_hash: hash.clone(),
            dt_ratio: ratio,
            regions: spec.clone(),
            direct: direct.entries(),
            atlas: atlas.entries(),
        })?,
    )?;
    Provenance {
        command: "transition-times".into(),
        config_hash: hash,
        seed: cfg.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        chart_count: Some(model.n_charts()),
        dt_ratio: ratio,
        warnings: vec![],
    }
    .write_for(&path)?;
    writeln!(
        out,
        "{:>4} {:>4} {:>12} {:>8} {:>12} {:>8}",
        "from", "to", "direct", "n", "atlas", "n"
    )?;
    let mut keys: Vec<(u32, u32)> = direct
        .samples
        .keys()
        .chain(atlas.samples.keys())
        .copied()
        .collect();
    keys.sort_unstable();
    keys.dedup();
    for (i, j) in keys {
        let fmt = |m: Option<f64>| m.map_or("-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{i:>4} {j:>4} {:>12} {:>8} {:>12} {:>8}",
            fmt(direct.mean(i, j)),
            direct.count(i, j),
            fmt(atlas.mean(i, j)),
            atlas.count(i, j)
        )?;
    }
    Ok(())
}

fn model_path_or_default(cfg: &RunConfig, model: Option<PathBuf>) -> PathBuf {
    model.unwrap_or_else(|| cfg.out_dir.join("model.json"))
}

fn cmd_compare(config_path: &Path, model: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let model = model_path_or_default(&cfg, model);
    if !model.exists() {
        return Err(AtlasError::Config(format!(
            "model file {} does not exist",
            model.display()
        )));
    }
    let built = build_system(&cfg)?;
    with_system!(&built, s => compare_impl(s, &cfg, &model, out))
}

fn cmd_transition_times(
    config_path: &Path,
    model: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let model = model_path_or_default(&cfg, model);
    if !model.exists() {
        return Err(AtlasError::Config(format!(
            "model file {} does not exist",
            model.display()
        )));
    }
    let built = build_system(&cfg)?;
    with_system!(&built, s => transitions_impl(s, &cfg, &model, out))
}
