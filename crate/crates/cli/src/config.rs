//! TOML configuration shared by all subcommands.
//!
//! Every section is optional and falls back to the defaults below; unknown
//! keys are rejected.
//!
//! ```toml
//! [ap]
//! iou_threshold = 0.7      # TP criterion for AP / AOS / ID-AP
//! iou_kind = "3d"          # or "bev"
//! recall_points = 40
//! d_min = 1.0              # inverse-distance weight floor, meters
//!
//! [nds]
//! threshold_m = 1.0
//! v_cap = 10.0
//! tp_weights = [1.0, 1.0, 1.0, 1.0]
//! recall_sweep_mode = false
//!
//! [tracker]
//! conf_threshold = 0.3
//! nms_iou = 0.2
//! confirm_frames = 4
//! gate_m = 5.0
//!
//! [penalties]
//! collision_pedestrian = 0.5
//! collision_vehicle = 0.6
//! collision_static = 0.65
//! red_light = 0.7
//! stop_sign = 0.8
//!
//! [evaluate]
//! tracker_mode = "auto"    # "always" | "never"
//! metrics = ["ap", "nds", "ds"]   # default: all
//!
//! [correlate]
//! offline = ["nds", "ap"]  # default: every offline column in the table
//! online = ["ds", "collisions"]
//! signed = false
//!
//! [planner]                # surrogate planner used by `synth`
//! target_speed = 6.0
//! corridor_width = 3.0
//! range_m = 20.0
//! horizon = 8
//! waypoint_dt = 0.5
//!
//! [scenario]
//! n_routes = 12
//! n_frames = 240
//! density = 12.0
//! seed = 7
//!
//! [ladder]                 # detectors of evenly increasing noise
//! count = 16
//! seed = 100
//!
//! [[detectors]]            # explicit detectors replace the ladder
//! id = "lidar_a"
//! noise = { sigma_xy = 0.1, drop_base = 0.05, seed = 3 }
//! ```

use std::path::Path;

use detdrive::correlation::{Metric, MetricTable};
use detdrive::driving::PenaltyConfig;
use detdrive::evaluate::{ApConfig, EvalConfig, TrackerMode};
use detdrive::nds::NdsConfig;
use detdrive::synth::{noise_ladder, NoiseModel, PlannerConfig, ScenarioConfig, SimConfig};
use detdrive::tracking::TrackerConfig;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateSection {
    pub tracker_mode: TrackerMode,
    pub metrics: Option<Vec<Metric>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelateSection {
    pub offline: Option<Vec<Metric>>,
    pub online: Option<Vec<Metric>>,
    pub signed: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSection {
    pub count: usize,
    pub seed: u64,
}

impl Default for LadderSection {
    fn default() -> Self {
        LadderSection { count: 16, seed: 100 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub id: String,
    #[serde(default)]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub ap: ApConfig,
    pub nds: NdsConfig,
    pub tracker: TrackerConfig,
    pub penalties: PenaltyConfig,
    pub evaluate: EvaluateSection,
    pub correlate: CorrelateSection,
    pub planner: PlannerConfig,
    pub scenario: ScenarioConfig,
    pub ladder: LadderSection,
    pub detectors: Vec<DetectorSpec>,
}

fn line_of(text: &str, offset: usize) -> (usize, &str) {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    (text[..start].matches('\n').count() + 1, &text[start..end])
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let msg = e.message().replace('\n', " ");
            match e.span() {
                Some(span) => {
                    let (line, content) = line_of(text, span.start);
                    let key = content.split('=').next().unwrap_or("").trim();
                    if content.contains('=') && !key.is_empty() {
                        CliError::config(format!("{origin}:{line}: key `{key}`: {msg}"))
                    } else {
                        CliError::config(format!("{origin}:{line}: {msg}"))
                    }
                }
                None => CliError::config(format!("{origin}: {msg}")),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::new("E_IO", format!("cannot read {}: {e}", p.display())))?;
                Config::parse(&text, &p.display().to_string())
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let checks = [
            self.ap.validate(),
            self.nds.validate(),
            self.tracker.validate(),
            self.penalties.validate(),
            self.planner.validate(),
            self.scenario.validate(),
        ];
        for c in checks {
            c.map_err(CliError::config)?;
        }
        if self.detectors.is_empty() && self.ladder.count == 0 {
            return Err(CliError::config("ladder.count must be at least 1"));
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if d.id.is_empty() || d.id.contains(['/', '\\']) {
                return Err(CliError::config(format!("detectors[{i}].id must be a plain non-empty name")));
            }
            d.noise
                .validate()
                .map_err(|m| CliError::config(format!("detectors[{i}].{m}")))?;
        }
        let mut ids: Vec<&str> = self.detectors.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::config(format!("detectors: duplicate id `{}`", w[0])));
        }
        if let Some(list) = &self.correlate.offline {
            if let Some(m) = list.iter().find(|m| m.is_online()) {
                return Err(CliError::config(format!("correlate.offline: `{m}` is an online metric")));
            }
        }
        if let Some(list) = &self.correlate.online {
            if let Some(m) = list.iter().find(|m| !m.is_online()) {
                return Err(CliError::config(format!("correlate.online: `{m}` is an offline metric")));
            }
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            ap: self.ap.clone(),
            nds: self.nds.clone(),
            tracker: self.tracker.clone(),
            tracker_mode: self.evaluate.tracker_mode,
            penalties: self.penalties.clone(),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            planner: self.planner.clone(),
            tracker: self.tracker.clone(),
        }
    }

    pub fn detector_models(&self) -> Vec<(String, NoiseModel)> {
        if self.detectors.is_empty() {
            noise_ladder(self.ladder.count, self.ladder.seed)
        } else {
            self.detectors.iter().map(|d| (d.id.clone(), d.noise.clone())).collect()
        }
    }

    /// Offline and online metrics to correlate among the table's columns.
    pub fn correlation_metrics(&self, table: &MetricTable) -> (Vec<Metric>, Vec<Metric>) {
        let pick = |wanted: &Option<Vec<Metric>>, online: bool| -> Vec<Metric> {
            match wanted {
                Some(list) => list.clone(),
                None => {
                    let order: &[Metric] = if online { &Metric::ONLINE } else { &Metric::OFFLINE };
                    order
                        .iter()
                        .copied()
                        .filter(|m| table.columns.contains(m))
                        .collect()
                }
            }
        };
        (
            pick(&self.correlate.offline, false),
            pick(&self.correlate.online, true),
        )
    }
}
