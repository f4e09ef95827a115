use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use detdrive::correlation::{aggregate_per_detector, build_report, svg, CorrelationReport, Metric, MetricTable};
use detdrive::evaluate::evaluate_route;
use detdrive::log::{load_route_log, save_route_log};
use detdrive::synth::{generate_script, simulate_route, SimStats};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("E_IO", format!("{}: {e}", path.display()))
}

/// Route logs named on the command line; directories contribute their
/// `*.jsonl` files, searched recursively, in sorted order.
pub fn collect_logs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| io_err(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| io_err(dir, err)))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.extension().is_some_and(|x| x == "jsonl") {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            walk(p, &mut out)?;
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::new("E_INPUT", "no route logs given"));
    }
    Ok(out)
}

pub struct Evaluation {
    pub table: MetricTable,
    pub warnings: Vec<String>,
}

pub fn evaluate(paths: &[PathBuf], cfg: &Config, metrics: &[Metric]) -> Result<Evaluation, CliError> {
    let files = collect_logs(paths)?;
    let eval_cfg = cfg.eval_config();
    let results: Vec<Result<_, CliError>> = files
        .par_iter()
        .map(|path| {
            let ctx = path.display().to_string();
            let mut log = load_route_log(path).map_err(|e| match e {
                detdrive::Error::Io { .. } => CliError::from(e),
                e => CliError::from(e).context(&ctx),
            })?;
            log.validate().map_err(|e| CliError::from(e).context(&ctx))?;
            evaluate_route(&log, &eval_cfg, metrics).map_err(|e| CliError::from(e).context(&ctx))
        })
        .collect();

    let mut table = MetricTable::new(metrics.to_vec());
    let mut warnings = Vec::new();
    for r in results {
        let ev = r?;
        for w in &ev.warnings {
            warnings.push((
                ev.row.detector_id.clone(),
                ev.row.route_id.clone(),
                format!(
                    "warning[{}]: detector `{}` route `{}`: {} missing: {}",
                    w.code, ev.row.detector_id, ev.row.route_id, w.metric, w.message
                ),
            ));
        }
        table.rows.push(ev.row);
    }
    table.normalize()?;
    warnings.sort();
    Ok(Evaluation {
        table,
        warnings: warnings.into_iter().map(|w| w.2).collect(),
    })
}

pub fn write_table(table: &MetricTable, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
            table.write_csv(std::io::BufWriter::new(file))?;
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn read_table(path: &Path) -> Result<MetricTable, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    MetricTable::read_csv(std::io::BufReader::new(file)).map_err(|e| CliError::from(e).context(path.display()))
}

pub struct CorrelateOptions {
    pub out_dir: PathBuf,
    pub plots: bool,
    pub signed: bool,
}

/// Aggregates per detector, correlates and writes `correlation.csv`,
/// `correlation.txt` and, with plots enabled, one SVG per metric pair plus a
/// summary chart.
pub fn correlate(table: &MetricTable, cfg: &Config, opts: &CorrelateOptions) -> Result<CorrelationReport, CliError> {
    let (offline, online) = cfg.correlation_metrics(table);
    for m in offline.iter().chain(&online) {
        if !table.columns.contains(m) {
            return Err(CliError::new("E_TABLE", format!("metric table has no `{m}` column")));
        }
    }
    let detectors = aggregate_per_detector(table);
    let report = build_report(&detectors, &offline, &online, opts.signed)?;

    let dir = &opts.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv_path = dir.join("correlation.csv");
    let file = fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    report.write_csv(std::io::BufWriter::new(file))?;
    let txt_path = dir.join("correlation.txt");
    fs::write(&txt_path, report.to_text()).map_err(|e| io_err(&txt_path, e))?;

    if opts.plots {
        let plots = dir.join("plots");
        fs::create_dir_all(&plots).map_err(|e| io_err(&plots, e))?;
        for e in &report.entries {
            let path = plots.join(format!("{}_vs_{}.svg", e.offline.name(), e.online.name()));
            let chart = svg::scatter(&detectors, e.offline, e.online, e.pearson);
            fs::write(&path, chart).map_err(|err| io_err(&path, err))?;
        }
        let x = online[0];
        let y = online.get(1).copied().unwrap_or(x);
        let path = plots.join("summary.svg");
        fs::write(&path, svg::summary(&report, x, y)).map_err(|e| io_err(&path, e))?;
    }
    Ok(report)
}

pub struct SynthSummary {
    pub detector_id: String,
    pub routes: usize,
    pub stats: SimStats,
    pub collisions: usize,
    pub mean_completion: f64,
}

/// Runs every detector through every scripted route in closed loop and
/// writes `<out>/<detector>/<route>.jsonl`.
pub fn synth(cfg: &Config, out_dir: &Path) -> Result<Vec<SynthSummary>, CliError> {
    let sc = &cfg.scenario;
    let scenarios: Vec<_> = (0..sc.n_routes).into_par_iter().map(|r| generate_script(sc, r)).collect();
    let models = cfg.detector_models();
    let sim = cfg.sim_config();
    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|d| (0..scenarios.len()).map(move |r| (d, r)))
        .collect();
    let results: Vec<Result<(usize, SimStats, usize, f64), CliError>> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let (id, model) = &models[d];
            let (log, stats) = simulate_route(&scenarios[r], model, id, &sim)?;
            let dir = out_dir.join(id);
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            save_route_log(dir.join(format!("{}.jsonl", log.route_id)), &log)?;
            let collisions = log.infractions.iter().filter(|e| e.kind.is_collision()).count();
            Ok((d, stats, collisions, log.route_completion))
        })
        .collect();

    let mut summaries: Vec<SynthSummary> = models
        .iter()
        .map(|(id, _)| SynthSummary {
            detector_id: id.clone(),
            routes: 0,
            stats: SimStats::default(),
            collisions: 0,
            mean_completion: 0.0,
        })
        .collect();
    for r in results {
        let (d, st, col, rc) = r?;
        let s = &mut summaries[d];
        s.routes += 1;
        s.stats.frames += st.frames;
        s.stats.ground_truth += st.ground_truth;
        s.stats.detected_ground_truth += st.detected_ground_truth;
        s.stats.false_positives += st.false_positives;
        s.collisions += col;
        s.mean_completion += rc;
    }
    for s in &mut summaries {
        s.mean_completion /= s.routes.max(1) as f64;
    }
    Ok(summaries)
}

pub fn print_synth_summary(out: &mut impl Write, summaries: &[SynthSummary]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<16} {:>6} {:>8} {:>12} {:>9} {:>8} {:>10} {:>6}",
        "detector", "routes", "frames", "objects/frm", "miss", "fp/frm", "collisions", "RC"
    )?;
    for s in summaries {
        let frames = s.stats.frames.max(1) as f64;
        writeln!(
            out,
            "{:<16} {:>6} {:>8} {:>12.2} {:>9.3} {:>8.2} {:>10} {:>6.1}",
            s.detector_id,
            s.routes,
            s.stats.frames,
            s.stats.ground_truth as f64 / frames,
            s.stats.miss_rate(),
            s.stats.false_positives as f64 / frames,
            s.collisions,
            s.mean_completion
        )?;
    }
    Ok(())
}
