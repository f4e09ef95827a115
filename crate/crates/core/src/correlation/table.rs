//! Per-route metric table and its CSV form.
//!
//! CSV layout: header `detector_id,route_id,<metric columns>`; one row per
//! (detector, route); an empty cell is a missing value.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ap,
    Aos,
    IdAp,
    CdAp,
    Ate,
    Ase,
    Aoe,
    Ave,
    Nds,
    IdNds,
    Ade,
    Fde,
    Ds,
    Rc,
    Is,
    Collisions,
}

/// How a metric is drawn in summary plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Detection,
    InverseDistance,
    PlannerCentric,
    Online,
}

impl Metric {
    pub const ALL: [Metric; 16] = [
        Metric::Ap,
        Metric::Aos,
        Metric::IdAp,
        Metric::CdAp,
        Metric::Ate,
        Metric::Ase,
        Metric::Aoe,
        Metric::Ave,
        Metric::Nds,
        Metric::IdNds,
        Metric::Ade,
        Metric::Fde,
        Metric::Ds,
        Metric::Rc,
        Metric::Is,
        Metric::Collisions,
    ];

    pub const OFFLINE: [Metric; 12] = [
        Metric::Ap,
        Metric::Aos,
        Metric::IdAp,
        Metric::CdAp,
        Metric::Ate,
        Metric::Ase,
        Metric::Aoe,
        Metric::Ave,
        Metric::Nds,
        Metric::IdNds,
        Metric::Ade,
        Metric::Fde,
    ];

    pub const ONLINE: [Metric; 4] = [Metric::Ds, Metric::Rc, Metric::Is, Metric::Collisions];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ap => "ap",
            Metric::Aos => "aos",
            Metric::IdAp => "id_ap",
            Metric::CdAp => "cd_ap",
            Metric::Ate => "ate",
            Metric::Ase => "ase",
            Metric::Aoe => "aoe",
            Metric::Ave => "ave",
            Metric::Nds => "nds",
            Metric::IdNds => "id_nds",
            Metric::Ade => "ade",
            Metric::Fde => "fde",
            Metric::Ds => "ds",
            Metric::Rc => "rc",
            Metric::Is => "is",
            Metric::Collisions => "collisions",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Ap => "Average Precision",
            Metric::Aos => "Avg. Orientation Similarity",
            Metric::IdAp => "ID Average Precision",
            Metric::CdAp => "Center-Distance AP",
            Metric::Ate => "Avg. Translation Error",
            Metric::Ase => "Avg. Scale Error",
            Metric::Aoe => "Avg. Orientation Error",
            Metric::Ave => "Avg. Velocity Error",
            Metric::Nds => "nuScenes Detection Score",
            Metric::IdNds => "ID nuScenes Detection Score",
            Metric::Ade => "Avg. Displacement Error",
            Metric::Fde => "Final Displacement Error",
            Metric::Ds => "DS",
            Metric::Rc => "RC",
            Metric::Is => "IS",
            Metric::Collisions => "#Col.",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::Ate | Metric::Ade | Metric::Fde => "m",
            Metric::Aoe => "rad",
            Metric::Ave => "m/s",
            Metric::Ds | Metric::Rc => "%",
            Metric::Collisions => "count",
            _ => "ratio",
        }
    }

    pub fn is_online(self) -> bool {
        Metric::ONLINE.contains(&self)
    }

    pub fn family(self) -> Family {
        match self {
            Metric::IdAp | Metric::IdNds => Family::InverseDistance,
            Metric::Ade | Metric::Fde => Family::PlannerCentric,
            m if m.is_online() => Family::Online,
            _ => Family::Detection,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Table(format!("unknown metric column `{s}`")))
    }
}

/// Parses a comma-separated metric list such as `ap,nds,ds`.
pub fn parse_metric_list(s: &str) -> Result<Vec<Metric>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Metric::from_str)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub detector_id: String,
    pub route_id: String,
    /// Absent keys are missing cells.
    pub values: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub columns: Vec<Metric>,
    pub rows: Vec<MetricRow>,
}

/// Shortest round-trip decimal form, so tables are byte-stable.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

impl MetricTable {
    pub fn new(columns: Vec<Metric>) -> Self {
        MetricTable {
            columns,
            rows: Vec::new(),
        }
    }

    /// Sorts rows by (detector, route) and rejects duplicate keys.
    pub fn normalize(&mut self) -> Result<()> {
        self.rows
            .sort_by(|a, b| (&a.detector_id, &a.route_id).cmp(&(&b.detector_id, &b.route_id)));
        for w in self.rows.windows(2) {
            if w[0].detector_id == w[1].detector_id && w[0].route_id == w[1].route_id {
                return Err(Error::Table(format!(
                    "duplicate row for detector `{}` route `{}`",
                    w[0].detector_id, w[0].route_id
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let table_err = |e: csv::Error| Error::Table(e.to_string());
        let mut header = vec!["detector_id".to_string(), "route_id".to_string()];
        header.extend(self.columns.iter().map(|m| m.name().to_string()));
        w.write_record(&header).map_err(table_err)?;
        for row in &self.rows {
            let mut rec = vec![row.detector_id.clone(), row.route_id.clone()];
            rec.extend(
                self.columns
                    .iter()
                    .map(|m| row.values.get(m).map(|v| format_value(*v)).unwrap_or_default()),
            );
            w.write_record(&rec).map_err(table_err)?;
        }
        w.flush().map_err(|e| Error::Table(e.to_string()))
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        if headers.get(0) != Some("detector_id") || headers.get(1) != Some("route_id") {
            return Err(Error::Table(
                "header must start with detector_id,route_id".into(),
            ));
        }
        let columns = headers
            .iter()
            .skip(2)
            .map(Metric::from_str)
            .collect::<Result<Vec<_>>>()?;
        let mut table = MetricTable::new(columns);
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Table(format!("line {line}: {e}")))?;
            let mut values = BTreeMap::new();
            for (m, cell) in table.columns.iter().zip(rec.iter().skip(2)) {
                let cell = cell.trim();
                if cell.is_empty() {
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Table(format!("line {line}: bad number `{cell}` in column {m}"))
                })?;
                if !v.is_finite() {
                    return Err(Error::Table(format!("line {line}: non-finite value in {m}")));
                }
                values.insert(*m, v);
            }
            table.rows.push(MetricRow {
                detector_id: rec.get(0).unwrap_or_default().to_string(),
                route_id: rec.get(1).unwrap_or_default().to_string(),
                values,
            });
        }
        table.normalize()?;
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRow {
    pub detector_id: String,
    pub routes: usize,
    pub values: BTreeMap<Metric, f64>,
}

/// One row per detector, each metric averaged over that detector's routes.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorTable {
    pub columns: Vec<Metric>,
    pub rows: Vec<DetectorRow>,
}

impl DetectorTable {
    pub fn column(&self, m: Metric) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.values.get(&m).copied()).collect()
    }
}

/// Unweighted per-detector means that skip missing cells.
pub fn aggregate_per_detector(table: &MetricTable) -> DetectorTable {
    let mut groups: BTreeMap<&str, Vec<&MetricRow>> = BTreeMap::new();
    for row in &table.rows {
        groups.entry(&row.detector_id).or_default().push(row);
    }
    let rows = groups
        .into_iter()
        .map(|(det, rows)| {
            let mut values = BTreeMap::new();
            for m in &table.columns {
                let present: Vec<f64> = rows.iter().filter_map(|r| r.values.get(m)).copied().collect();
                if !present.is_empty() {
                    values.insert(*m, present.iter().sum::<f64>() / present.len() as f64);
                }
            }
            DetectorRow {
                detector_id: det.to_string(),
                routes: rows.len(),
                values,
            }
        })
        .collect();
    DetectorTable {
        columns: table.columns.clone(),
        rows,
    }
}
