//! Per-route orchestration: optional tracker post-processing followed by every
//! enabled metric, producing one `MetricRow`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ap::{class_mean, collect_matches, Weighting, RECALL_LEVELS};
use crate::correlation::{Metric, MetricRow};
use crate::driving::{collision_count, driving_score, infraction_score, PenaltyConfig};
use crate::error::{Error, Result};
use crate::matching::{Criterion, IouKind};
use crate::nds::{self, NdsConfig};
use crate::planner_metrics::{route_ade, route_fde};
use crate::tracking::{TrackerConfig, TrackerState};
use crate::types::{FrameRecord, RouteLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApConfig {
    pub iou_threshold: f64,
    pub iou_kind: IouKind,
    pub recall_points: usize,
    /// Lower bound on the distance in the inverse-distance weights, meters.
    pub d_min: f64,
}

impl Default for ApConfig {
    fn default() -> Self {
        ApConfig {
            iou_threshold: 0.7,
            iou_kind: IouKind::ThreeD,
            recall_points: RECALL_LEVELS,
            d_min: 1.0,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err("ap.iou_threshold must lie in (0, 1]".into());
        }
        if self.recall_points == 0 {
            return Err("ap.recall_points must be at least 1".into());
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err("ap.d_min must be positive".into());
        }
        Ok(())
    }

    pub fn criterion(&self) -> Criterion {
        Criterion::Iou {
            threshold: self.iou_threshold,
            kind: self.iou_kind,
        }
    }
}

/// When to run gating, NMS and the tracker before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackerMode {
    /// Only when some detection lacks a velocity, i.e. the log holds raw
    /// detector output rather than tracks.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub ap: ApConfig,
    pub nds: NdsConfig,
    pub tracker: TrackerConfig,
    pub tracker_mode: TrackerMode,
    pub penalties: PenaltyConfig,
}

impl EvalConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.ap.validate()?;
        self.nds.validate()?;
        self.tracker.validate()?;
        self.penalties.validate()
    }
}

/// Replaces every frame's detections by the gated, NMS-filtered set, with
/// velocities estimated by the tracker where the detector gave none.
pub fn postprocess(route: &RouteLog, cfg: &TrackerConfig) -> Result<Vec<FrameRecord>> {
    let mut state = TrackerState::new(route.timestep);
    route
        .frames
        .iter()
        .map(|frame| {
            let out = state.step(frame, cfg)?;
            let mut f = frame.clone();
            f.detections = out.kept.into_iter().map(|t| t.detection).collect();
            Ok(f)
        })
        .collect()
}

fn needs_tracker(route: &RouteLog, mode: TrackerMode) -> bool {
    match mode {
        TrackerMode::Always => true,
        TrackerMode::Never => false,
        TrackerMode::Auto => route
            .frames
            .iter()
            .flat_map(|f| &f.detections)
            .any(|d| d.velocity.is_none()),
    }
}

/// A metric that could not be computed for a route.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricWarning {
    pub metric: Metric,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteEvaluation {
    pub row: MetricRow,
    pub warnings: Vec<MetricWarning>,
}

struct Cells<'a> {
    wanted: &'a [Metric],
    values: BTreeMap<Metric, f64>,
    warnings: Vec<MetricWarning>,
}

impl Cells<'_> {
    fn any(&self, ms: &[Metric]) -> bool {
        ms.iter().any(|m| self.wanted.contains(m))
    }

    fn put(&mut self, metric: Metric, v: f64) {
        if self.wanted.contains(&metric) {
            self.values.insert(metric, v);
        }
    }

    fn fail(&mut self, metrics: &[Metric], e: &Error) {
        for &metric in metrics {
            if self.wanted.contains(&metric) {
                self.warnings.push(MetricWarning {
                    metric,
                    code: e.code(),
                    message: e.to_string(),
                });
            }
        }
    }
}

/// Computes the requested metrics for one validated route. Failures of
/// individual metrics leave their cells empty and are reported as warnings.
pub fn evaluate_route(route: &RouteLog, cfg: &EvalConfig, metrics: &[Metric]) -> Result<RouteEvaluation> {
    let processed;
    let frames: &[FrameRecord] = if needs_tracker(route, cfg.tracker_mode) {
        processed = postprocess(route, &cfg.tracker)?;
        &processed
    } else {
        &route.frames
    };
    let levels = cfg.ap.recall_points;
    let mut cells = Cells {
        wanted: metrics,
        values: BTreeMap::new(),
        warnings: Vec::new(),
    };

    if cells.any(&[Metric::Ap, Metric::Aos]) {
        match class_mean(&collect_matches(frames, cfg.ap.criterion(), Weighting::Uniform), levels) {
            Ok(s) => {
                cells.put(Metric::Ap, s.ap);
                cells.put(Metric::Aos, s.aos);
            }
            Err(e) => cells.fail(&[Metric::Ap, Metric::Aos], &e),
        }
    }
    if cells.any(&[Metric::IdAp]) {
        let w = Weighting::InverseDistance { d_min: cfg.ap.d_min };
        match class_mean(&collect_matches(frames, cfg.ap.criterion(), w), levels) {
            Ok(s) => cells.put(Metric::IdAp, s.ap),
            Err(e) => cells.fail(&[Metric::IdAp], &e),
        }
    }
    let nds_cols = [
        Metric::CdAp,
        Metric::Ate,
        Metric::Ase,
        Metric::Aoe,
        Metric::Ave,
        Metric::Nds,
    ];
    if cells.any(&nds_cols) {
        let classes = collect_matches(frames, nds::criterion(&cfg.nds), Weighting::Uniform);
        match nds::summarize(&classes, &cfg.nds, levels) {
            Ok(s) => {
                cells.put(Metric::CdAp, s.map_cd);
                cells.put(Metric::Nds, s.nds);
                cells.put(Metric::Ate, s.errors.ate);
                cells.put(Metric::Ase, s.errors.ase);
                cells.put(Metric::Aoe, s.errors.aoe);
                cells.put(Metric::Ave, s.errors.ave);
                if s.errors.no_tp {
                    let e = Error::Degenerate("no true positives; error terms set to their caps".into());
                    cells.fail(&[Metric::Ate, Metric::Ase, Metric::Aoe, Metric::Ave], &e);
                }
            }
            Err(e) => cells.fail(&nds_cols, &e),
        }
    }
    if cells.any(&[Metric::IdNds]) {
        let w = Weighting::InverseDistance { d_min: cfg.ap.d_min };
        let classes = collect_matches(frames, nds::criterion(&cfg.nds), w);
        match nds::summarize(&classes, &cfg.nds, levels) {
            Ok(s) => cells.put(Metric::IdNds, s.nds),
            Err(e) => cells.fail(&[Metric::IdNds], &e),
        }
    }
    if cells.any(&[Metric::Ade]) {
        match route_ade(route) {
            Ok(v) => cells.put(Metric::Ade, v),
            Err(e) => cells.fail(&[Metric::Ade], &e),
        }
    }
    if cells.any(&[Metric::Fde]) {
        match route_fde(route) {
            Ok(v) => cells.put(Metric::Fde, v),
            Err(e) => cells.fail(&[Metric::Fde], &e),
        }
    }
    if cells.any(&[Metric::Is, Metric::Ds, Metric::Rc, Metric::Collisions]) {
        cells.put(Metric::Rc, route.route_completion);
        cells.put(Metric::Collisions, collision_count(&route.infractions) as f64);
        match infraction_score(&route.infractions, &cfg.penalties.to_map()) {
            Ok(is) => {
                cells.put(Metric::Is, is);
                cells.put(Metric::Ds, driving_score(route.route_completion, is));
            }
            Err(e) => cells.fail(&[Metric::Is, Metric::Ds], &e),
        }
    }

    Ok(RouteEvaluation {
        row: MetricRow {
            detector_id: route.detector_id.clone(),
            route_id: route.route_id.clone(),
            values: cells.values,
        },
        warnings: cells.warnings,
    })
}
