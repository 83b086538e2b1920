//! `cic`: correlation-induced coherence of states and phase-transition scans.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use cic_core::cic::{cic_backward, cic_exact_centered, cic_forward, CicResult, OptimizerOptions};
use cic_core::kitaev::{KitaevLine, LinkType};
use cic_core::props::{all_passed, parse_suites, run_suites, PropsConfig};
use cic_core::scan::{
    emit_json, format_sig, Cell, Model, OutputPaths, ScanConfig, ScanOutput, ScanRange, Table, Tolerances,
};
use cic_core::state::DensityMatrix;
use cic_core::Error;

use config::ConfigFile;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "cic", version, about = "Correlation-induced coherence and phase-transition scans")]
struct Cli {
    /// CSV output path (scans print CSV to stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG plot of the susceptibility.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// JSON report.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Worker threads for scan evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file with defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CIC of a two-party state stored as JSON ({"dim", "re", "im"}).
    State(StateArgs),
    /// Scan the XXZ chain over the anisotropy.
    Xxz(RangeArgs),
    /// Scan the Kitaev honeycomb model along a line of the coupling plane.
    Kitaev(KitaevArgs),
    /// Run the property suites.
    Props(PropsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Direction {
    Forward,
    Backward,
    Both,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// State file.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, value_enum)]
    direction: Option<Direction>,
    /// Random starts for the optimizer.
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct KitaevArgs {
    #[command(flatten)]
    range: RangeArgs,
    /// "jx=jy=(1-jz)/2" or "jx/jy=R".
    #[arg(long)]
    line: Option<String>,
    /// x, y or z.
    #[arg(long)]
    link: Option<String>,
    /// Absolute quadrature tolerance, in [1e-10, 1e-3].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct PropsArgs {
    /// all, or a comma-separated list of quantum-core, cic, xxz, kitaev, scan.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples per property.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) if e.is_validation() || matches!(e, Error::Io { .. }) => EXIT_VALIDATION,
        Some(_) => EXIT_NUMERICAL,
        None => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(n) = file.pick(cli.threads, "threads")? {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let output = OutputPaths {
        csv: cli.out.clone().or_else(|| file.path("out")),
        svg: cli.svg.clone().or_else(|| file.path("svg")),
        json: cli.json.clone().or_else(|| file.path("json")),
    };

    match cli.command {
        Command::State(args) => run_state(args, &file, &output),
        Command::Xxz(args) => {
            let cfg = ScanConfig {
                model: Model::Xxz,
                range: range(&args, &file, (-2.0, 3.0, 0.01))?,
                link: None,
                line: None,
                tolerances: Tolerances::default(),
                output,
            };
            run_scan(&cfg)
        }
        Command::Kitaev(args) => {
            let line: KitaevLine = match file.pick(args.line.clone(), "line")? {
                Some(s) => s.parse()?,
                None => KitaevLine::Symmetric,
            };
            let link: LinkType = match file.pick(args.link.clone(), "link")? {
                Some(s) => s.parse()?,
                None => LinkType::Z,
            };
            let cfg = ScanConfig {
                model: Model::Kitaev,
                range: range(&args.range, &file, (0.0, 1.0, 0.002))?,
                link: Some(link),
                line: Some(line),
                tolerances: Tolerances {
                    quadrature: file.pick(args.tol, "tol")?.unwrap_or(1e-6),
                    ..Tolerances::default()
                },
                output,
            };
            run_scan(&cfg)
        }
        Command::Props(args) => {
            let suites = parse_suites(&file.pick(args.suite, "suite")?.unwrap_or_else(|| "all".into()))?;
            let cfg = PropsConfig {
                seed: file.pick(args.seed, "seed")?.unwrap_or(0),
                samples: file.pick(args.samples, "samples")?.unwrap_or(PropsConfig::default().samples),
            };
            if cfg.samples == 0 {
                return Err(Error::Config("--samples must be positive".into()).into());
            }
            let outcomes = run_suites(&suites, &cfg);
            for o in &outcomes {
                println!("{o}");
            }
            if let Some(p) = &output.json {
                emit_json(&outcomes, p)?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} properties, {failed} failed", outcomes.len());
            Ok(if all_passed(&outcomes) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn range(args: &RangeArgs, file: &ConfigFile, default: (f64, f64, f64)) -> Result<ScanRange> {
    Ok(ScanRange {
        min: file.pick(args.min, "min")?.unwrap_or(default.0),
        max: file.pick(args.max, "max")?.unwrap_or(default.1),
        step: file.pick(args.step, "step")?.unwrap_or(default.2),
    })
}

fn run_scan(cfg: &ScanConfig) -> Result<ExitCode> {
    cfg.validate()?;
    info!("running {:?} scan over [{}, {}]", cfg.model, cfg.range.min, cfg.range.max);
    let out: ScanOutput = cfg.run()?;
    out.emit(&cfg.output)?;
    let report = |line: String| {
        if cfg.output.csv.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    if cfg.output.csv.is_none() {
        print!("{}", out.table.to_csv());
    }
    report(format!("{} points", out.result.len()));
    for cp in &out.result.critical_points {
        report(format!(
            "critical point: {}={} score={} kind={}",
            out.parameter_name,
            format_sig(cp.location, 12),
            format_sig(cp.score, 6),
            serde_json::to_value(cp.kind)?.as_str().unwrap_or("?")
        ));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_state(args: StateArgs, file: &ConfigFile, output: &OutputPaths) -> Result<ExitCode> {
    if output.svg.is_some() {
        return Err(Error::Config("--svg applies to scans only".into()).into());
    }
    let path = args
        .file
        .or_else(|| file.path("file"))
        .ok_or_else(|| Error::Config("missing --file".into()))?;
    let rho = DensityMatrix::load(&path)?;
    let d = rho.local_dim()?;
    let defaults = OptimizerOptions::default();
    let opts = OptimizerOptions {
        n_starts: file.pick(args.starts, "starts")?.unwrap_or(defaults.n_starts),
        seed: file.pick(args.seed, "seed")?.unwrap_or(defaults.seed),
        ..defaults
    };
    opts.validate()?;
    let direction = match args.direction {
        Some(d) => d,
        None => match file.get::<String>("direction")? {
            Some(s) => Direction::from_str(&s, true).map_err(|_| Error::Config(format!("bad direction '{s}'")))?,
            None => Direction::Forward,
        },
    };

    let mut results: Vec<(&str, CicResult)> = Vec::new();
    if direction != Direction::Backward {
        results.push(("forward", cic_forward(&rho, &opts)?));
    }
    if direction != Direction::Forward {
        results.push(("backward", cic_backward(&rho, &opts)?));
    }
    let exact = if d == 2 { cic_exact_centered(&rho).ok() } else { None };

    println!("local dimension: {d}");
    for (name, r) in &results {
        println!("cic_{name} = {}", format_sig(r.value, 12));
    }
    if let Some(v) = exact {
        println!("cic_exact = {}", format_sig(v, 12));
    }

    if let Some(p) = &output.csv {
        let table = Table {
            header: vec!["direction".into(), "cic".into()],
            rows: results
                .iter()
                .map(|(name, r)| vec![Cell::Text((*name).into()), Cell::Number(r.value)])
                .collect(),
        };
        cic_core::scan::emit_csv(&table, p)?;
    }
    if let Some(p) = &output.json {
        let report = serde_json::json!({
            "local_dim": d,
            "results": results.iter().map(|(name, r)| serde_json::json!({
                "direction": name,
                "value": r.value,
                "argmax_m": r.argmax_m.as_slice(),
                "diagnostics": r.diagnostics,
            })).collect::<Vec<_>>(),
            "exact_centered": exact,
        });
        emit_json(&report, p)?;
    }
    Ok(ExitCode::SUCCESS)
}
