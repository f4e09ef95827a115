use std::fmt::Write as _;
use std::io::Write;

use super::stats::{pearson, spearman};
use super::table::{DetectorTable, Metric};
use crate::error::{Error, Result};

pub const MIN_DETECTORS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry {
    pub offline: Metric,
    pub online: Metric,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    /// Detectors with both values present.
    pub n: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Offline metrics in report order (descending |r| against the first
    /// online metric).
    pub offline: Vec<Metric>,
    pub online: Vec<Metric>,
    pub entries: Vec<CorrelationEntry>,
    pub signed: bool,
    pub detectors: usize,
}

fn correlate(table: &DetectorTable, offline: Metric, online: Metric, signed: bool) -> CorrelationEntry {
    let (x, y): (Vec<f64>, Vec<f64>) = table
        .column(offline)
        .into_iter()
        .zip(table.column(online))
        .filter_map(|(a, b)| Some((a?, b?)))
        .unzip();
    let n = x.len();
    let mag = |v: f64| if signed { v } else { v.abs() };
    match (pearson(&x, &y), spearman(&x, &y)) {
        (Ok(r), Ok(rho)) => CorrelationEntry {
            offline,
            online,
            pearson: Some(mag(r)),
            spearman: Some(mag(rho)),
            n,
            error: None,
        },
        (Err(e), _) | (_, Err(e)) => CorrelationEntry {
            offline,
            online,
            pearson: None,
            spearman: None,
            n,
            error: Some(format!("{}: {e}", e.code())),
        },
    }
}

/// Correlates every (offline, online) pair over pairwise-complete detectors.
pub fn build_report(
    table: &DetectorTable,
    offline: &[Metric],
    online: &[Metric],
    signed: bool,
) -> Result<CorrelationReport> {
    if table.rows.len() < MIN_DETECTORS {
        return Err(Error::InsufficientDetectors {
            need: MIN_DETECTORS,
            got: table.rows.len(),
        });
    }
    if offline.is_empty() || online.is_empty() {
        return Err(Error::InvalidInput("no metric pairs to correlate".into()));
    }
    let mut entries = Vec::with_capacity(offline.len() * online.len());
    for &off in offline {
        for &on in online {
            entries.push(correlate(table, off, on, signed));
        }
    }
    let key = |m: Metric| {
        entries
            .iter()
            .find(|e| e.offline == m && e.online == online[0])
            .and_then(|e| e.pearson)
            .map(f64::abs)
    };
    let mut order: Vec<Metric> = offline.to_vec();
    order.sort_by(|a, b| match (key(*a), key(*b)) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    entries.sort_by_key(|e| {
        (
            order.iter().position(|m| *m == e.offline),
            online.iter().position(|m| *m == e.online),
        )
    });
    Ok(CorrelationReport {
        offline: order,
        online: online.to_vec(),
        entries,
        signed,
        detectors: table.rows.len(),
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

impl CorrelationReport {
    pub fn get(&self, offline: Metric, online: Metric) -> Option<&CorrelationEntry> {
        self.entries
            .iter()
            .find(|e| e.offline == offline && e.online == online)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Table(e.to_string());
        w.write_record(["offline", "online", "pearson_r", "spearman_rho", "n", "error"])
            .map_err(err)?;
        for e in &self.entries {
            let num = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
            w.write_record([
                e.offline.name().to_string(),
                e.online.name().to_string(),
                num(e.pearson),
                num(e.spearman),
                e.n.to_string(),
                e.error.clone().unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Table(e.to_string()))
    }

    /// Aligned text table: one row per offline metric, Pearson and Spearman
    /// columns per online metric.
    pub fn to_text(&self) -> String {
        let label_w = self
            .offline
            .iter()
            .map(|m| m.label().len())
            .max()
            .unwrap_or(6)
            .max("Metric".len());
        let mut headers = Vec::new();
        for on in &self.online {
            headers.push(format!("{} r", on.label()));
            headers.push(format!("{} rho", on.label()));
        }
        let col_w: Vec<usize> = headers.iter().map(|h| h.len().max(6)).collect();

        let mut out = String::new();
        let kind = if self.signed { "signed" } else { "absolute" };
        let _ = writeln!(
            out,
            "Correlation between offline and online metrics ({kind} values, {} detectors)",
            self.detectors
        );
        let _ = write!(out, "{:<label_w$}", "Metric");
        for (h, w) in headers.iter().zip(&col_w) {
            let _ = write!(out, " | {h:>w$}");
        }
        out.push('\n');
        let total = label_w + col_w.iter().map(|w| w + 3).sum::<usize>();
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for off in &self.offline {
            let _ = write!(out, "{:<label_w$}", off.label());
            let mut widths = col_w.iter();
            for on in &self.online {
                let e = self.get(*off, *on);
                for v in [e.and_then(|e| e.pearson), e.and_then(|e| e.spearman)] {
                    let w = widths.next().copied().unwrap_or(6);
                    let _ = write!(out, " | {:>w$}", cell(v));
                }
            }
            out.push('\n');
        }
        for e in self.entries.iter().filter(|e| e.error.is_some()) {
            let _ = writeln!(
                out,
                "note: {} vs {}: {}",
                e.offline,
                e.online,
                e.error.as_deref().unwrap_or_default()
            );
        }
        out
    }
}
