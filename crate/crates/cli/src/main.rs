//! `swarm-evade` command line.
//!
//! Exit codes: 0 success / pass, 1 criterion fail, 2 usage or config error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use swarm_evade::metrics::{distance_chart, render_csv, summarize};
use swarm_evade::sim::{BaselineConfig, Scenario, World};
use swarm_evade::study::{calibrate, shock_study, LatticeConfig, ShockConfig};
use swarm_evade::Params;
use swarm_evade_live::{serve, ServeOptions, Session};

use config::{load_section, CalibrateFile, RunFile, ServeFile, ShockFile};

/// Environment variable overriding the default seed.
const SEED_ENV: &str = "SWARM_EVADE_SEED";

#[derive(Parser)]
#[command(name = "swarm-evade", version, about = "UAV swarm evasion simulator")]
struct Cli {
    /// JSON file with defaults for any flag, one object per subcommand
    /// (e.g. {"shock": {"agents": 50}}); flags win over file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write record.csv, summary.json and distances.svg.
    Run(RunArgs),
    /// Settle a lattice, freeze it, and measure alert and clear spread.
    Shock(ShockArgs),
    /// Check that the default gains settle to the target lattice spacing.
    Calibrate(CalibrateArgs),
    /// Serve a scenario live over WebSocket.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON.
    scenario: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Treat interferers as separation-only neighbours.
    #[arg(long)]
    no_evasion: bool,
    /// Use the enlarged baseline reaction parameters.
    #[arg(long)]
    enlarged_range: bool,
}

#[derive(Args)]
struct ShockArgs {
    #[arg(long)]
    agents: Option<usize>,
    /// Communication range (m).
    #[arg(long)]
    comm_range: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Target mean nearest-neighbour spacing (m).
    #[arg(long, allow_negative_numbers = true)]
    target_mean: Option<f64>,
    /// Allowed deviation from the target mean (m).
    #[arg(long, allow_negative_numbers = true)]
    band: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON gain set to calibrate instead of the built-in defaults.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Scenario JSON.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    host: Option<String>,
    /// Simulated seconds per wall-clock second.
    #[arg(long)]
    speed: Option<f64>,
}

/// Failure carrying its exit code.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn env_seed() -> Result<Option<u64>, Fail> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// Flag, then environment, then file, then `fallback`.
fn pick_seed(flag: Option<u64>, file: Option<u64>, fallback: u64) -> Result<u64, Fail> {
    Ok(flag.or(env_seed()?).or(file).unwrap_or(fallback))
}

fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<(), Fail> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn run(args: RunArgs, file: RunFile) -> Result<(), Fail> {
    let path = args
        .scenario
        .or(file.scenario)
        .ok_or_else(|| usage("run needs a scenario path"))?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
    let mut sc = Scenario::load(&path).map_err(|e| usage(e.to_string()))?;
    sc.seed = pick_seed(args.seed, file.seed, sc.seed)?;
    if args.no_evasion || file.no_evasion.unwrap_or(false) {
        sc.evasion_enabled = false;
    }
    if args.enlarged_range || file.enlarged_range.unwrap_or(false) {
        sc.baseline = BaselineConfig::enlarged();
    }
    let d_e1 = sc.params.d_e1;
    let mut world = World::new(sc).map_err(|e| usage(e.to_string()))?;
    world.run();
    let rec = world.record();
    let summary = summarize(rec, d_e1);
    write_all(
        &out,
        &[
            ("record.csv", render_csv(rec)),
            ("summary.json", to_json(&summary)),
            ("distances.svg", distance_chart(rec)),
        ],
    )?;
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(())
}

#[derive(Serialize)]
struct LatticeStats {
    agents: usize,
    settled: bool,
    settle_time: f64,
    mean: f64,
    min: f64,
    max: f64,
    detector: String,
    eccentricity: usize,
    presence_steps: Option<u64>,
    clear_steps: Option<u64>,
}

fn shock(args: ShockArgs, file: ShockFile) -> Result<(), Fail> {
    let mut cfg = ShockConfig::default();
    cfg.lattice.agents = args.agents.or(file.agents).unwrap_or(cfg.lattice.agents);
    cfg.lattice.seed = pick_seed(args.seed, file.seed, cfg.lattice.seed)?;
    cfg.net.comm_range = args.comm_range.or(file.comm_range).unwrap_or(cfg.net.comm_range);
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
    let report = shock_study(&cfg).map_err(|e| usage(e.to_string()))?;
    let l = &report.lattice;
    let stats = LatticeStats {
        agents: l.positions.len(),
        settled: l.settled,
        settle_time: l.time,
        mean: l.spacing.mean,
        min: l.spacing.min,
        max: l.spacing.max,
        detector: report.detector.to_string(),
        eccentricity: report.eccentricity,
        presence_steps: report.presence_steps,
        clear_steps: report.clear_steps,
    };
    write_all(&out, &[("spread.csv", report.spread_csv()), ("lattice.json", to_json(&stats))])?;
    println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
    match (report.presence_steps, report.clear_steps) {
        (Some(_), Some(_)) => Ok(()),
        _ => Err(Fail(1, "alert or clear spread did not complete".into())),
    }
}

fn calibrate_cmd(args: CalibrateArgs, file: CalibrateFile) -> Result<(), Fail> {
    let target = args.target_mean.or(file.target_mean).unwrap_or(2.89);
    let band = args.band.or(file.band).unwrap_or(0.25);
    if !(band > 0.0 && band.is_finite()) {
        return Err(usage(format!("band must be positive, got {band}")));
    }
    let mut cfg = LatticeConfig::default();
    cfg.seed = pick_seed(args.seed, file.seed, cfg.seed)?;
    if let Some(path) = args.params.or(file.params) {
        let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        cfg.params = serde_json::from_str::<Params>(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let report = calibrate(&cfg, target, band).map_err(|e| usage(e.to_string()))?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    if report.pass {
        Ok(())
    } else {
        Err(Fail(
            1,
            format!("mean spacing {:.3} m outside {target} +- {band} m", report.spacing.mean),
        ))
    }
}

fn serve_cmd(args: ServeArgs, file: ServeFile) -> Result<(), Fail> {
    let path = args
        .scenario
        .or(file.scenario)
        .ok_or_else(|| usage("serve needs --scenario"))?;
    let sc = Scenario::load(&path).map_err(|e| usage(e.to_string()))?;
    let session = Session::new(sc).map_err(|e| usage(e.to_string()))?;
    let host = args.host.or(file.host).unwrap_or_else(|| "127.0.0.1".into());
    let port = args.port.or(file.port).unwrap_or(8080);
    let speed = args.speed.or(file.speed).unwrap_or(1.0);
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(usage("speed must be positive"));
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| Fail(1, e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host.as_str(), port))
            .await
            .map_err(|e| usage(format!("{host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Fail(1, e.to_string()))?;
        eprintln!("serving on ws://{addr}/ws (scenario at http://{addr}/scenario)");
        serve(listener, session, ServeOptions { speed })
            .await
            .map_err(|e| Fail(1, e.to_string()))
    })
}

fn dispatch(cli: Cli) -> Result<(), Fail> {
    let cfg = cli.config.as_deref();
    match cli.cmd {
        Cmd::Run(a) => run(a, load_section(cfg, "run")?),
        Cmd::Shock(a) => shock(a, load_section(cfg, "shock")?),
        Cmd::Calibrate(a) => calibrate_cmd(a, load_section(cfg, "calibrate")?),
        Cmd::Serve(a) => serve_cmd(a, load_section(cfg, "serve")?),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("swarm-evade: {msg}");
            ExitCode::from(code)
        }
    }
}
