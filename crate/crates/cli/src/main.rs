mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detdrive::correlation::{parse_metric_list, Metric};
use detdrive::matching::IouKind;

use commands::CorrelateOptions;
use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "detdrive", version, about = "Offline detection metrics versus online driving performance")]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum IouArg {
    Bev,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Args)]
struct MetricArgs {
    /// Comma-separated metric columns, e.g. `ap,nds,ade,ds,collisions`
    #[arg(long)]
    metrics: Option<String>,
    /// Overlap measure of the IoU true-positive criterion
    #[arg(long, value_enum)]
    iou_kind: Option<IouArg>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Directory receiving correlation.csv, correlation.txt and plots/
    #[arg(long, short = 'o')]
    out_dir: PathBuf,
    /// Write one SVG scatter per metric pair and a summary chart
    #[arg(long)]
    plots: bool,
    /// Report signed coefficients instead of absolute values
    #[arg(long)]
    signed_correlations: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-route metrics from route logs into a metric table
    Evaluate {
        /// Route log files or directories of *.jsonl logs
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Output CSV; standard output when omitted
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Correlate offline against online metrics across detectors
    Correlate {
        /// Metric table CSV produced by `evaluate`
        table: PathBuf,
        #[command(flatten)]
        opts: CorrelateArgs,
    },
    /// Generate synthetic closed-loop route logs for a set of detectors
    Synth {
        /// Output directory, one subdirectory per detector
        #[arg(long, short = 'o')]
        out_dir: PathBuf,
        /// Number of routes, overriding the configuration
        #[arg(long)]
        routes: Option<usize>,
        /// Scenario seed, overriding the configuration
        #[arg(long)]
        seed: Option<u64>,
        /// Number of detectors on the noise ladder, overriding the configuration
        #[arg(long)]
        ladder: Option<usize>,
    },
    /// Evaluate logs and correlate in one go
    Report {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
        #[command(flatten)]
        opts: CorrelateArgs,
    },
}

fn apply_metric_args(cfg: &mut Config, args: &MetricArgs) -> Result<Vec<Metric>, CliError> {
    if let Some(kind) = args.iou_kind {
        cfg.ap.iou_kind = match kind {
            IouArg::Bev => IouKind::Bev,
            IouArg::ThreeD => IouKind::ThreeD,
        };
    }
    let metrics = match &args.metrics {
        Some(list) => parse_metric_list(list).map_err(|e| CliError::new("E_USAGE", e.to_string()))?,
        None => cfg.evaluate.metrics.clone().unwrap_or_else(|| Metric::ALL.to_vec()),
    };
    if metrics.is_empty() {
        return Err(CliError::new("E_USAGE", "empty metric list"));
    }
    Ok(metrics)
}

fn correlate_opts(cfg: &Config, args: &CorrelateArgs) -> CorrelateOptions {
    CorrelateOptions {
        out_dir: args.out_dir.clone(),
        plots: args.plots,
        signed: args.signed_correlations || cfg.correlate.signed,
    }
}

fn print_warnings(warnings: &[String]) {
    let mut err = std::io::stderr().lock();
    for w in warnings {
        let _ = writeln!(err, "{w}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::new("E_THREADS", format!("cannot start worker pool: {e}")))?;
    let stdout = || std::io::stdout().lock();

    pool.install(|| match &cli.command {
        Command::Evaluate { logs, output, metrics } => {
            let metrics = apply_metric_args(&mut cfg, metrics)?;
            let ev = commands::evaluate(logs, &cfg, &metrics)?;
            print_warnings(&ev.warnings);
            commands::write_table(&ev.table, output.as_deref())
        }
        Command::Correlate { table, opts } => {
            let table = commands::read_table(table)?;
            let report = commands::correlate(&table, &cfg, &correlate_opts(&cfg, opts))?;
            let _ = write!(stdout(), "{}", report.to_text());
            Ok(())
        }
        Command::Synth {
            out_dir,
            routes,
            seed,
            ladder,
        } => {
            if let Some(n) = routes {
                cfg.scenario.n_routes = *n;
            }
            if let Some(s) = seed {
                cfg.scenario.seed = *s;
            }
            if let Some(n) = ladder {
                cfg.ladder.count = *n;
            }
            cfg.validate()?;
            let summaries = commands::synth(&cfg, out_dir)?;
            let _ = commands::print_synth_summary(&mut stdout(), &summaries);
            Ok(())
        }
        Command::Report { logs, metrics, opts } => {
            let metrics = apply_metric_args(&mut cfg, metrics)?;
            let ev = commands::evaluate(logs, &cfg, &metrics)?;
            print_warnings(&ev.warnings);
            commands::write_table(&ev.table, Some(&opts.out_dir.join("metrics.csv")))?;
            let report = commands::correlate(&ev.table, &cfg, &correlate_opts(&cfg, opts))?;
            let _ = write!(stdout(), "{}", report.to_text());
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", CliError::new("E_USAGE", msg));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            if e.code == "E_USAGE" {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
