//! Batch CLI: `purify`, `learn`, `noise`, `analyze`, `hw`.
//!
//! Every subcommand reads a JSON config (see the README for the schema),
//! writes plot-ready CSV/JSONL tables plus a manifest JSON, and prints a
//! short summary. Config problems exit with code 2 and name the offending
//! key; runtime failures exit with code 1.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{collapse_transform, crossing_estimate, Crossing, Curve};
use crate::hardware::{
    effective_rates, photon_count_bits, state_prep_time_us, wall_time, CircuitFamily,
    WallTimeParams,
};
use crate::io::{self, RunConfig, RunManifest};
use crate::noise::noise_budget;
use crate::protocols::{learnability_ensemble, purification_ensemble_collect, AccuracyPoint};

#[derive(Parser)]
#[command(name = "bmipt", version, about = "Monitored bosonic circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides circuit.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HwArgs {
    /// Optional JSON config for circuit/noise parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Photon number to trace through the bitwise counter.
    #[arg(long, default_value_t = 5)]
    photon: u32,
    /// Number of bits in the counting trace.
    #[arg(long, default_value_t = 3)]
    bits: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Ancilla purification curves S_R(p, t) over a p grid.
    Purify(RunArgs),
    /// Learnability decoder accuracy A(p) over a p grid.
    Learn(RunArgs),
    /// Noisy (mixed-state) curves and the residual-entropy budget.
    Noise(RunArgs),
    /// Crossing estimation and scaling collapse of an entropy CSV.
    Analyze(RunArgs),
    /// Readout and timing formulas, printed as JSON.
    Hw(HwArgs),
}

/// Runs the CLI; returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; usage errors exit 2, --help 0.
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Purify(args) => with_config(args, cmd_purify),
        Command::Learn(args) => with_config(args, cmd_learn),
        Command::Noise(args) => with_config(args, cmd_noise),
        Command::Analyze(args) => with_config(args, cmd_analyze),
        Command::Hw(args) => cmd_hw(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Config(e)) => {
            eprintln!("{e}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

enum CliError {
    Config(io::ConfigError),
    Runtime(String),
}

impl From<io::ConfigError> for CliError {
    fn from(e: io::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

struct Session {
    config: RunConfig,
    seed: u64,
    workers: Option<usize>,
    out_dir: PathBuf,
    prefix: String,
    manifest: RunManifest,
}

fn with_config(
    args: RunArgs,
    body: fn(&mut Session) -> Result<Vec<String>, CliError>,
) -> Result<(), CliError> {
    let config = io::load_config(&args.config)?;
    let seed = args.seed.or(config.circuit.seed).unwrap_or(0);
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(config.output.dir.as_deref().unwrap_or("out")));
    let prefix = config
        .output
        .prefix
        .clone()
        .unwrap_or_else(|| "run".to_string());
    std::fs::create_dir_all(&out_dir)?;
    let manifest = RunManifest::new(&config.raw, seed, chrono::Utc::now());
    let mut session = Session {
        config,
        seed,
        workers: args.workers,
        out_dir,
        prefix,
        manifest,
    };
    let outputs = body(&mut session)?;
    let manifest_path = session.path("manifest.json");
    let manifest = session.manifest.clone().finish(outputs);
    let mut f = BufWriter::new(File::create(&manifest_path)?);
    writeln!(f, "{}", serde_json::to_string_pretty(&manifest).unwrap())?;
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

impl Session {
    fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{suffix}", self.prefix))
    }

    fn workers(&self) -> Option<usize> {
        self.workers.or(self.config.ensemble.workers)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_purify(session: &mut Session) -> Result<Vec<String>, CliError> {
    let mut cfg = session.config.circuit_config()?;
    cfg.seed = session.seed;
    let n = session.config.ensemble.n_realizations.unwrap_or(100);
    let save_records = session.config.output.save_records.unwrap_or(false);
    let grid = session.config.p_grid();

    let mut ancilla = Vec::new();
    let mut bipartite = Vec::new();
    let mut records = Vec::new();
    for &p in &grid {
        let mut run_cfg = cfg.clone();
        run_cfg.meas_rate = p;
        let (stats, recs) =
            purification_ensemble_collect(&run_cfg, n, session.workers(), save_records)?;
        println!(
            "p={p:.3}: S_R(t={}) = {:.4} ± {:.4} ({n} realizations)",
            run_cfg.monitored_layers,
            stats.ancilla.last().unwrap().mean,
            stats.ancilla.last().unwrap().sem
        );
        ancilla.extend(stats.ancilla);
        if let Some(b) = stats.bipartite {
            bipartite.extend(b);
        }
        if let Some(r) = recs {
            records.extend(r);
        }
    }

    let mut outputs = Vec::new();
    let entropy_path = session.path("entropy.csv");
    io::write_entropy_csv(&mut create(&entropy_path)?, &ancilla)?;
    outputs.push(entropy_path.display().to_string());
    if !bipartite.is_empty() {
        let path = session.path("bipartite.csv");
        io::write_entropy_csv(&mut create(&path)?, &bipartite)?;
        outputs.push(path.display().to_string());
    }
    if save_records {
        let path = session.path("records.jsonl");
        io::write_records_jsonl(&mut create(&path)?, &records)?;
        outputs.push(path.display().to_string());
    }
    Ok(outputs)
}

fn cmd_learn(session: &mut Session) -> Result<Vec<String>, CliError> {
    let mut cfg = session.config.circuit_config()?;
    cfg.seed = session.seed;
    cfg.bipartite = None;
    let n = session.config.ensemble.n_realizations.unwrap_or(100);
    let grid = session.config.p_grid();

    let mut points: Vec<AccuracyPoint> = Vec::new();
    let trials_path = session.path("trials.jsonl");
    let mut trials_file = create(&trials_path)?;
    for &p in &grid {
        let mut run_cfg = cfg.clone();
        run_cfg.meas_rate = p;
        let (point, trials) = learnability_ensemble(&run_cfg, n, session.workers())?;
        println!(
            "p={p:.3}: A = {:.4} ± {:.4} ({n} trials)",
            point.accuracy, point.sem
        );
        io::write_trials_jsonl(&mut trials_file, &trials)?;
        points.push(point);
    }

    let accuracy_path = session.path("accuracy.csv");
    io::write_accuracy_csv(&mut create(&accuracy_path)?, cfg.modes, cfg.photons, &points)?;
    Ok(vec![
        accuracy_path.display().to_string(),
        trials_path.display().to_string(),
    ])
}

fn cmd_noise(session: &mut Session) -> Result<Vec<String>, CliError> {
    let mut cfg = session.config.circuit_config()?;
    cfg.seed = session.seed;
    cfg.bipartite = None;
    let params = session.config.noise_params()?;
    let toggles = session.config.noise_toggles();
    let n = session.config.ensemble.n_realizations.unwrap_or(100);
    let grid = session.config.p_grid();

    let noise_path = session.path("noise.csv");
    let mut file = create(&noise_path)?;
    let mut wrote_header = false;
    for &p in &grid {
        let mut run_cfg = cfg.clone();
        run_cfg.meas_rate = p;
        let budget = noise_budget(&run_cfg, &params, &toggles, n, n, session.workers())?;
        println!(
            "p={p:.3} [{}]: residual entropy = {:.4} ± {:.4}",
            budget.channel_mask, budget.residual, budget.residual_sem
        );
        if !wrote_header {
            io::write_noise_csv(&mut file, &budget.noisy, &budget.ideal, &budget.channel_mask)?;
            wrote_header = true;
        } else {
            // Append rows only; reuse the writer without the header.
            let mut buf = Vec::new();
            io::write_noise_csv(&mut buf, &budget.noisy, &budget.ideal, &budget.channel_mask)?;
            let text = String::from_utf8(buf).unwrap();
            for line in text.lines().skip(1) {
                writeln!(file, "{line}")?;
            }
        }
    }
    Ok(vec![noise_path.display().to_string()])
}

fn cmd_analyze(session: &mut Session) -> Result<Vec<String>, CliError> {
    let analysis = &session.config.analysis;
    let input = analysis.input.clone().ok_or_else(|| {
        CliError::Config(io::ConfigError {
            key: "analysis.input".into(),
            message: "missing".into(),
        })
    })?;
    let z = analysis.z.unwrap_or(1.0);
    let p_c = analysis.p_c.unwrap_or(0.3);
    let t_over_l = analysis.t_over_l.unwrap_or(2.0);

    let records = io::read_entropy_csv(BufReader::new(File::open(&input)?))?;
    if records.is_empty() {
        return Err(CliError::Runtime(format!("{input}: no records")));
    }

    let mut sizes: BTreeSet<usize> = records.iter().map(|r| r.l).collect();
    if let Some(filter) = &analysis.sizes {
        sizes.retain(|l| filter.contains(l));
    }
    let sizes: Vec<usize> = sizes.into_iter().collect();

    let curve_at = |l: usize| -> Option<Curve> {
        let t_target = (t_over_l * l as f64).round() as usize;
        let pts: Vec<(f64, f64, f64)> = records
            .iter()
            .filter(|r| r.l == l && r.t == t_target)
            .map(|r| (r.p, r.mean, r.sem))
            .collect();
        (pts.len() >= 2).then(|| Curve::from_points(pts))
    };

    let mut crossings: Vec<(usize, usize, Vec<Crossing>)> = Vec::new();
    for pair in sizes.windows(2) {
        let (l1, l2) = (pair[0], pair[1]);
        match (curve_at(l1), curve_at(l2)) {
            (Some(a), Some(b)) => match crossing_estimate(&a, &b) {
                Ok(roots) => {
                    let flag = if roots.len() > 1 { " (ambiguous)" } else { "" };
                    println!(
                        "crossing L={l1}/L={l2}: p* = {:.4} ± {:.4}{flag}",
                        roots[0].p_star, roots[0].sigma
                    );
                    crossings.push((l1, l2, roots));
                }
                Err(e) => println!("crossing L={l1}/L={l2}: {e}"),
            },
            _ => println!("crossing L={l1}/L={l2}: missing curve at t = {t_over_l}·L"),
        }
    }

    let table = collapse_transform(&records, z, p_c)?;
    println!(
        "collapse: p_c requested {:.4}, selected {:.4}, z = {z}",
        p_c, table.selected_p
    );

    let crossings_path = session.path("crossings.json");
    io::write_crossings_json(&mut create(&crossings_path)?, &crossings)?;
    let collapse_path = session.path("collapse.csv");
    io::write_collapse_csv(&mut create(&collapse_path)?, &table)?;
    Ok(vec![
        crossings_path.display().to_string(),
        collapse_path.display().to_string(),
    ])
}

fn cmd_hw(args: HwArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => Some(io::load_config(path)?),
        None => None,
    };
    let params = config
        .as_ref()
        .map(|c| c.noise_params())
        .transpose()?
        .unwrap_or_default();
    let (l, s, m, p) = config
        .as_ref()
        .and_then(|c| c.circuit.l.map(|l| (c, l)))
        .map(|(c, l)| {
            let cfg = c.circuit_config().ok();
            (
                l,
                cfg.as_ref().map_or(8, |x| x.scramble_layers),
                cfg.as_ref().map_or(8, |x| x.monitored_layers),
                c.circuit.p.unwrap_or(1.0),
            )
        })
        .unwrap_or((4, 8, 8, 1.0));

    let mut modes = Vec::new();
    for (i, ratio) in params.coupler.g_over_delta.iter().enumerate() {
        let rates = effective_rates(
            *ratio,
            1.0,
            1.0 / params.coupler.t1_us,
            1.0 / params.coupler.t_phi_us,
            params.coupler.n_thermal,
            params.coupler.spectrum,
            1.0 / params.t1_cavity_us,
        );
        modes.push(serde_json::json!({
            "mode": i + 1,
            "g_over_delta": ratio,
            "kappa_per_us": rates.kappa,
            "gamma_per_us": rates.gamma,
            "t1_effective_us": 1.0 / rates.kappa,
            "t_phi_effective_us": 1.0 / rates.gamma,
        }));
    }

    let wall = |family| {
        wall_time(
            l,
            s,
            m,
            p,
            &WallTimeParams {
                t_snap_us: params.durations.t_snap_us,
                t_parity_us: params.durations.t_parity_us,
                tau_bs_us: params.durations.tau_bs_us,
                family,
            },
        )
    };

    let (bits, trace) = photon_count_bits(args.photon, args.bits, 2.0 * std::f64::consts::PI * 5.352)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let doc = serde_json::json!({
        "effective_rates": modes,
        "wall_time_us": {
            "l": l, "scramble_layers": s, "monitored_layers": m, "p": p,
            "bsfp": wall(CircuitFamily::Bsfp),
            "bsrp": wall(CircuitFamily::Bsrp),
            "with_hubbard": wall(CircuitFamily::WithHubbard),
        },
        "state_prep_us": state_prep_time_us(l),
        "bit_trace": {
            "photon": args.photon,
            "bits": bits,
            "steps": trace,
        },
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}
