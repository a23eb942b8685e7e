use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use polyvo::config::{self, ConfigError};
use polyvo::engine::{run, Outcome};
use polyvo::policy::Method;
use polyvo::render::{render_svg, RenderError};
use polyvo::scenarios::{self, BenchRow, ScenarioConfig, DEFAULT_RATIOS, SCHEMA_VERSION};
use polyvo::trajectory::{self, read_log, write_log, LogError};

/// Env var that caps the worker pool size.
const THREADS_VAR: &str = "POLYVO_THREADS";

#[derive(Parser)]
#[command(name = "polyvo", version, about = "Polygonal velocity-obstacle navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario file and write its trajectory log.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated ticks to render as SVG.
        #[arg(long, value_delimiter = ',')]
        snapshot_ticks: Vec<usize>,
        /// Skip the trajectory log; the summary is still written.
        #[arg(long)]
        no_log: bool,
    },
    /// Sweep random scenarios over methods and size ratios.
    Bench {
        /// Comma-separated method names (default: all six).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        /// Comma-separated size ratios.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Base seed; trial k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Draw one tick of a trajectory log as SVG.
    Render {
        log: PathBuf,
        #[arg(long)]
        tick: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a built-in scenario as a TOML config.
    Scenario {
        family: Family,
        /// Robot count for the circle family.
        #[arg(long, default_value_t = 8)]
        robots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        #[arg(long)]
        method: Option<Method>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Circle,
    Random,
    Obstacles,
    Turnaround,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::Io(_) => CliError::Io(e.to_string()),
            LogError::Format { .. } => CliError::Config(format!("malformed log: {e}")),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_VAR}: expected a thread count, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn cmd_run(config_path: &Path, out: &Path, snapshots: &[usize], no_log: bool) -> Result<(), CliError> {
    let scenario: ScenarioConfig<f64> = config::load(config_path)?;
    let record = !no_log || !snapshots.is_empty();
    let result = run(&scenario, record).map_err(|e| CliError::Config(e.to_string()))?;
    create_dir(out)?;

    let mut log_bytes = Vec::new();
    write_log(&mut log_bytes, &scenario, &result).map_err(|e| CliError::io(out, e))?;
    if !no_log {
        write_file(&out.join("trajectory.jsonl"), &log_bytes)?;
    }
    let summary = trajectory::summary(&result);
    let mut summary_json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    summary_json.push(b'\n');
    write_file(&out.join("summary.json"), &summary_json)?;

    if !snapshots.is_empty() {
        let log = read_log(log_bytes.as_slice())?;
        for &tick in snapshots {
            let svg = render_svg(&log, tick)?;
            write_file(&out.join(format!("snapshot-{tick:04}.svg")), svg.as_bytes())?;
        }
    }

    println!(
        "{} ({}): {} ticks, {:.1} s simulated in {:.3} s",
        scenario.name,
        scenario.params.method,
        result.ticks,
        result.final_time,
        result.wall_clock.as_secs_f64()
    );
    for r in &result.robots {
        let when = r.finish_time.map_or_else(String::new, |t| format!(" at {t:.1} s"));
        println!(
            "  robot {}: {:?}{when}, travelled {:.2} m",
            r.id, r.outcome, r.travel_distance
        );
    }
    println!(
        "  completed {} / deadlocked {} / collided {}",
        result.count(Outcome::Completed),
        result.count(Outcome::Deadlocked),
        result.count(Outcome::Collided)
    );
    Ok(())
}

#[derive(Serialize)]
struct CsvRow {
    ratio: f64,
    method: Method,
    completion_rate: f64,
    deadlock_rate: f64,
    avg_travel_distance: Option<f64>,
    distance_std: Option<f64>,
    trials: usize,
    seed: u64,
}

impl From<&BenchRow> for CsvRow {
    fn from(r: &BenchRow) -> Self {
        CsvRow {
            ratio: r.ratio,
            method: r.method,
            completion_rate: r.metrics.completion_rate,
            deadlock_rate: r.metrics.deadlock_rate,
            avg_travel_distance: r.metrics.avg_travel_distance,
            distance_std: r.metrics.distance_std,
            trials: r.trials,
            seed: r.seed,
        }
    }
}

fn write_table<W: Write>(mut out: W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(out, "# polyvo-bench schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(CsvRow::from(row))?;
    }
    w.flush()
}

fn cmd_bench(methods: &[Method], ratios: &[f64], trials: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    let methods = if methods.is_empty() { &Method::ALL[..] } else { methods };
    let ratios = if ratios.is_empty() { &DEFAULT_RATIOS[..] } else { ratios };
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Config(format!("--ratios: {r} is not a positive size ratio")));
    }
    let rows = scenarios::benchmark(methods, ratios, trials, seed).map_err(|e| CliError::Config(e.to_string()))?;
    create_dir(out)?;
    let path = out.join("bench.csv");
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_table(BufWriter::new(file), &rows).map_err(|e| CliError::io(&path, e))?;
    for row in &rows {
        println!("{row}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_render(log_path: &Path, tick: usize, out: &Path) -> Result<(), CliError> {
    let file = File::open(log_path).map_err(|e| CliError::io(log_path, e))?;
    let log = read_log(BufReader::new(file))?;
    let svg = render_svg(&log, tick)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_file(out, svg.as_bytes())
}

fn cmd_scenario(
    family: Family,
    robots: usize,
    seed: u64,
    ratio: f64,
    method: Option<Method>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut scenario = match family {
        Family::Circle => {
            if robots == 0 {
                return Err(CliError::Config("--robots must be at least 1".into()));
            }
            scenarios::circle_scenario(robots)
        }
        Family::Random => scenarios::random_scenario(seed, ratio).map_err(|e| CliError::Config(e.to_string()))?,
        Family::Obstacles => scenarios::obstacle_scenario(),
        Family::Turnaround => scenarios::turnaround_scenario(),
    };
    if let Some(m) = method {
        scenario.params.method = m;
    }
    let text = config::to_toml_string(&scenario);
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run {
            config,
            out,
            snapshot_ticks,
            no_log,
        } => cmd_run(&config, &out, &snapshot_ticks, no_log),
        Command::Bench {
            methods,
            ratios,
            trials,
            seed,
            out,
        } => cmd_bench(&methods, &ratios, trials, seed, &out),
        Command::Render { log, tick, out } => cmd_render(&log, tick, &out),
        Command::Scenario {
            family,
            robots,
            seed,
            ratio,
            method,
            out,
        } => cmd_scenario(family, robots, seed, ratio, method, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
