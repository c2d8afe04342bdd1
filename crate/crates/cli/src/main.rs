//! `dirseq`: batch front end for directional sequence entropy experiments.

mod config;
mod error;
mod output;
mod pipeline;
mod registry;

use chrono::Utc;
use clap::{Parser, Subcommand, ValueEnum};
use config::{
    parse_config, Constraint, EntropyRun, ExperimentConfig, LogBaseSpec, NamedSet, NullitySpec, OutputSpec,
    PartitionSpec, ScheduleSpec, SequenceSpecConfig, SetSpec, StripSpec, SuspensionSetSpec, SystemSpec, TaskSpec,
};
use error::CliError;
use dirseq_core::LatticePoint;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dirseq", version, about = "Directional sequence entropy experiments for Z^q actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config file or a built-in name.
    Run {
        /// Path to a config file, or the name of a built-in experiment.
        config: String,
        /// Output directory (default: the config's output.dir, else runs/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in experiments.
    List {
        /// Print the catalog, including each full config, as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Lattice points of a strip with first coordinate in [m-lo, m-hi].
    Strip {
        #[command(flatten)]
        strip: StripArgs,
        #[arg(long, allow_hyphen_values = true)]
        m_lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        m_hi: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a point (or a whole grid) into parts from two planar strips.
    Decompose {
        /// Slope of the first direction (1, v).
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Slope of the second direction (1, w).
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long)]
        width: String,
        /// A single point "m,n".
        #[arg(long, allow_hyphen_values = true, conflicts_with = "radius")]
        point: Option<String>,
        /// Check every point of [-radius, radius]^2.
        #[arg(long)]
        radius: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy curve of a partition along a monotone or greedy strip sequence.
    Entropy {
        #[command(flatten)]
        system: SystemArgs,
        /// time-zero | arcs:<cut>,<cut>,... | uniform-arcs:<n> | binary:<set>
        #[arg(long, default_value = "time-zero")]
        partition: String,
        #[command(flatten)]
        strip: StripArgs,
        #[arg(long, value_enum, default_value_t = Mode::Greedy)]
        mode: Mode,
        /// Sequence length (monotone count or greedy horizon).
        #[arg(long, default_value_t = 32)]
        length: usize,
        #[arg(long, default_value_t = dirseq_core::entropy::DEFAULT_GREEDY_WINDOW)]
        window: i64,
        #[arg(long, default_value_t = 1)]
        stride: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
        #[arg(long, value_enum, default_value_t = BaseArg::Natural)]
        log_base: BaseArg,
        #[arg(long)]
        cell_cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Epsilon-net growth of sets over growing strip windows.
    Kronecker {
        #[command(flatten)]
        system: SystemArgs,
        /// cylinder:<coord>=<symbol>;... or arcs:<a>..<c>,...; repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[command(flatten)]
        strip: StripArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        epsilons: Vec<f64>,
        /// Number of windows [0, j*step - 1].
        #[arg(long, default_value_t = 8)]
        windows: usize,
        #[arg(long, default_value_t = 16)]
        step: i64,
        /// Also profile full-plane boxes of these radii.
        #[arg(long, value_delimiter = ',')]
        box_radii: Vec<i64>,
        /// Pair verdicts with greedy entropies of {B, B^c} up to this horizon.
        #[arg(long)]
        nullity_horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cocycle identity and measure preservation of the suspension skew maps.
    SuspensionCheck {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value = "3/7", allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        betas: usize,
        #[arg(long, default_value_t = 64)]
        n_max: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SystemArgs {
    /// bernoulli:<p1>,<p2>,... | example | rotation:<a1>,<a2>,...
    #[arg(long)]
    system: String,
    /// Rank of the acting group (ignored for the example system).
    #[arg(long, default_value_t = 2)]
    q: usize,
}

#[derive(clap::Args)]
struct StripArgs {
    /// Comma-separated direction slopes (q - 1 of them).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    slopes: Vec<String>,
    /// Comma-separated strip widths, one per slope.
    #[arg(long, value_delimiter = ',', required = true)]
    widths: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Monotone,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Natural,
    Two,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn list_of(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_system(args: &SystemArgs) -> Result<SystemSpec, CliError> {
    let (kind, rest) = args.system.split_once(':').unwrap_or((args.system.as_str(), ""));
    match kind {
        "bernoulli" => Ok(SystemSpec::BernoulliShift { q: args.q, probs: list_of(rest) }),
        "example" => Ok(SystemSpec::ExampleProduct),
        "rotation" => Ok(SystemSpec::RotationAction { q: args.q, angles: list_of(rest) }),
        _ => Err(bad(format!("unknown system {:?}; use bernoulli:..., example or rotation:...", args.system))),
    }
}

fn parse_set(s: &str) -> Result<SetSpec, CliError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad(format!("set {s:?} needs a kind prefix")))?;
    match kind {
        "cylinder" => {
            let constraints = rest
                .split(';')
                .map(|c| {
                    let (coord, sym) = c.split_once('=').ok_or_else(|| bad(format!("constraint {c:?} needs '='")))?;
                    let coord = coord
                        .split(',')
                        .map(|x| x.trim().parse::<i64>().map_err(|_| bad(format!("bad coordinate {x:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let symbol = sym.trim().parse().map_err(|_| bad(format!("bad symbol {sym:?}")))?;
                    Ok(Constraint { coord, symbol })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(SetSpec::Cylinder { constraints })
        }
        "arcs" => {
            let arcs = rest
                .split(',')
                .map(|a| {
                    let (lo, hi) = a.split_once("..").ok_or_else(|| bad(format!("arc {a:?} needs '..'")))?;
                    Ok([lo.trim().to_string(), hi.trim().to_string()])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(SetSpec::Arcs { arcs })
        }
        _ => Err(bad(format!("unknown set kind {kind:?}"))),
    }
}

fn parse_partition(s: &str) -> Result<PartitionSpec, CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "time-zero" => Ok(PartitionSpec::TimeZero),
        "arcs" => Ok(PartitionSpec::Arcs { cuts: list_of(rest) }),
        "uniform-arcs" => Ok(PartitionSpec::UniformArcs {
            pieces: rest.parse().map_err(|_| bad(format!("bad piece count {rest:?}")))?,
        }),
        "binary" => Ok(PartitionSpec::Binary { set: parse_set(rest)? }),
        _ => Err(bad(format!("unknown partition {s:?}"))),
    }
}

fn strip_spec(a: &StripArgs) -> StripSpec {
    StripSpec { slopes: a.slopes.clone(), widths: a.widths.clone() }
}

fn flag_config(name: &str, system: Option<SystemSpec>, task: TaskSpec) -> ExperimentConfig {
    ExperimentConfig {
        experiment: name.into(),
        description: None,
        system,
        task,
        log_base: LogBaseSpec::Natural,
        seed: 0,
        cell_cap: None,
        output: None,
    }
}

fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

fn emit_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("{}", json!({"warning": w}));
    }
}

/// Runs `cfg`; writes artifacts to `out` if given, else prints via `show`.
fn execute(
    cfg: ExperimentConfig,
    out: Option<&Path>,
    show: impl FnOnce(&pipeline::Outcome) -> Result<(), CliError>,
) -> Result<(), CliError> {
    cfg.validate()?;
    let started = Utc::now();
    let outcome = pipeline::execute(&cfg)?;
    emit_warnings(&outcome.warnings);
    match out {
        Some(dir) => {
            output::write_run(dir, &cfg, &outcome, started)?;
            let report = json!({
                "experiment": cfg.experiment,
                "output_dir": dir.display().to_string(),
                "status": if outcome.failure.is_some() { "failed" } else { "ok" },
                "headline": outcome.headline,
                "summary": outcome.summary,
            });
            emit(&format!("{}\n", serde_json::to_string_pretty(&report).unwrap_or_default()));
        }
        None => show(&outcome)?,
    }
    match outcome.failure {
        Some(f) => Err(CliError::Failed(f)),
        None => Ok(()),
    }
}

fn print_artifact(outcome: &pipeline::Outcome) -> Result<(), CliError> {
    if let Some(a) = outcome.artifacts.first() {
        emit(&String::from_utf8_lossy(&a.bytes));
    }
    Ok(())
}

fn print_summary(outcome: &pipeline::Outcome) -> Result<(), CliError> {
    if let Some(h) = &outcome.headline {
        emit(&format!("{h}\n"));
    }
    emit(&format!("{}\n", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default()));
    Ok(())
}

fn load(config: &str) -> Result<ExperimentConfig, CliError> {
    let path = Path::new(config);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {config}: {e}")))?;
        return parse_config(&text);
    }
    registry::find(config)
        .map(|b| b.config)
        .ok_or_else(|| bad(format!("{config:?} is neither a config file nor a built-in experiment")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| cfg.output.as_ref().map(|o: &OutputSpec| PathBuf::from(&o.dir)))
                .unwrap_or_else(|| PathBuf::from("runs").join(pipeline::slug(&cfg.experiment)));
            execute(cfg, Some(&dir), |_| Ok(()))
        }
        Command::List { json } => {
            let all = registry::builtins();
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&all).unwrap_or_default()));
            } else {
                let width = all.iter().map(|b| b.name.len()).max().unwrap_or(0);
                for b in &all {
                    emit(&format!("{:width$}  {}\n", b.name, b.description));
                    emit(&format!("{:width$}  reproduces: {}\n", "", b.reproduces));
                }
            }
            Ok(())
        }
        Command::Strip { strip, m_lo, m_hi, out } => {
            let cfg = flag_config("strip", None, TaskSpec::Strip { strip: strip_spec(&strip), m_lo, m_hi });
            execute(cfg, out.as_deref(), print_artifact)
        }
        Command::Decompose { v, w, width, point, radius, out } => {
            if let Some(p) = point {
                let coords = p
                    .split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| bad(format!("bad point {p:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if coords.len() != 2 {
                    return Err(bad("a point needs two coordinates"));
                }
                let value = pipeline::decompose_point(&LatticePoint::new(coords), &v, &w, &width)?;
                emit(&format!("{value}\n"));
                return Ok(());
            }
            let radius = radius.ok_or_else(|| bad("give --point or --radius"))?;
            let cfg = flag_config("decompose", None, TaskSpec::DecomposeGrid { v, w, width, radius });
            execute(cfg, out.as_deref(), print_summary)
        }
        Command::Entropy { system, partition, strip, mode, length, window, stride, start, log_base, cell_cap, out } => {
            let sequence = match mode {
                Mode::Monotone => SequenceSpecConfig::Monotone { count: length, stride, start },
                Mode::Greedy => SequenceSpecConfig::Greedy { horizon: length, window, start },
            };
            let run = EntropyRun { label: "curve".into(), strip: Some(strip_spec(&strip)), sequence };
            let task = TaskSpec::Entropy { partition: parse_partition(&partition)?, runs: vec![run] };
            let mut cfg = flag_config("entropy", Some(parse_system(&system)?), task);
            cfg.log_base = match log_base {
                BaseArg::Natural => LogBaseSpec::Natural,
                BaseArg::Two => LogBaseSpec::Two,
            };
            cfg.cell_cap = cell_cap;
            execute(cfg, out.as_deref(), print_artifact)
        }
        Command::Kronecker { system, sets, strip, epsilons, windows, step, box_radii, nullity_horizon, out } => {
            let sets = sets
                .iter()
                .map(|s| Ok(NamedSet { label: s.clone(), set: parse_set(s)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            let task = TaskSpec::Kronecker {
                sets,
                strips: vec![strip_spec(&strip)],
                epsilons,
                schedule: ScheduleSpec::Linear { count: windows, step },
                box_radii,
                nullity: nullity_horizon.map(|horizon| NullitySpec {
                    horizon,
                    window: dirseq_core::entropy::DEFAULT_GREEDY_WINDOW,
                    null_tolerance: 1e-9,
                    positive_threshold: 0.1,
                }),
            };
            let cfg = flag_config("kronecker", Some(parse_system(&system)?), task);
            execute(cfg, out.as_deref(), print_summary)
        }
        Command::SuspensionCheck { system, beta, samples, betas, n_max, seed, out } => {
            let spec = parse_system(&system)?;
            let base = match spec {
                SystemSpec::RotationAction { .. } => SetSpec::Arcs { arcs: vec![["0".into(), "1/2".into()]] },
                _ => {
                    let coord = vec![0; if matches!(spec, SystemSpec::ExampleProduct) { 1 } else { spec.q() }];
                    SetSpec::Cylinder { constraints: vec![Constraint { coord, symbol: 0 }] }
                }
            };
            let sets = vec![
                SuspensionSetSpec {
                    label: "A x [0,1/2) x [0,1)".into(),
                    base: Some(base),
                    u: ["0".into(), "1/2".into()],
                    v: ["0".into(), "1".into()],
                },
                SuspensionSetSpec { label: "X x [0,1) x [0,1/3)".into(), base: None, u: ["0".into(), "1".into()], v: ["0".into(), "1/3".into()] },
            ];
            let task = TaskSpec::Suspension { beta, samples, random_betas: betas, n_max, sets };
            let mut cfg = flag_config("suspension-check", Some(spec), task);
            cfg.seed = seed;
            execute(cfg, out.as_deref(), print_summary)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
