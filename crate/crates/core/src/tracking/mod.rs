//! Perception post-processing: confidence gate, BEV NMS, frame-to-frame
//! Hungarian association, consecutive-frame confirmation and the two-point
//! speed estimate.

mod assignment;

pub use assignment::{solve_assignment, Assignment};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bev_iou, center_distance_bev};
use crate::matching::confidence_order;
use crate::types::{ClassId, Detection, FrameRecord, OrientedBox3D, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    pub conf_threshold: f64,
    pub nms_iou: f64,
    pub confirm_frames: usize,
    pub gate_m: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            conf_threshold: 0.3,
            nms_iou: 0.2,
            confirm_frames: 4,
            gate_m: 5.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.conf_threshold) {
            return Err("tracker.conf_threshold must lie in [0, 1]".into());
        }
        if !(self.nms_iou > 0.0 && self.nms_iou < 1.0) {
            return Err("tracker.nms_iou must lie in (0, 1)".into());
        }
        if self.confirm_frames == 0 {
            return Err("tracker.confirm_frames must be at least 1".into());
        }
        if !(self.gate_m > 0.0) {
            return Err("tracker.gate_m must be positive".into());
        }
        Ok(())
    }
}

/// Greedy non-maximum suppression in descending confidence. A detection is
/// dropped when its BEV IoU with an already kept one exceeds the threshold.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut kept: Vec<Detection> = Vec::with_capacity(dets.len());
    for i in confidence_order(dets) {
        let d = &dets[i];
        if kept.iter().all(|k| bev_iou(&k.bbox, &d.bbox) <= iou_threshold) {
            kept.push(d.clone());
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackObservation {
    pub frame_index: u64,
    pub bbox: OrientedBox3D,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub track_id: u64,
    pub class_id: ClassId,
    /// Consecutive observations, oldest first.
    pub history: Vec<TrackObservation>,
}

impl Track {
    pub fn age(&self) -> usize {
        self.history.len()
    }

    pub fn is_confirmed(&self, confirm_frames: usize) -> bool {
        self.age() >= confirm_frames
    }

    pub fn last(&self) -> &TrackObservation {
        self.history.last().expect("tracks are never empty")
    }

    /// BEV displacement of the last two centers divided by the timestep.
    pub fn velocity(&self, timestep: f64) -> Option<Vec2> {
        let n = self.history.len();
        if n < 2 {
            return None;
        }
        let a = self.history[n - 2].bbox.center;
        let b = self.history[n - 1].bbox.center;
        Some([(b[0] - a[0]) / timestep, (b[1] - a[1]) / timestep])
    }

    pub fn speed(&self, timestep: f64) -> Option<f64> {
        self.velocity(timestep).map(|v| v[0].hypot(v[1]))
    }
}

pub fn estimate_speed(track: &Track, timestep: f64) -> Result<f64> {
    if !(timestep > 0.0) {
        return Err(Error::InvalidInput("timestep must be positive".into()));
    }
    track.speed(timestep).ok_or(Error::NoSpeed(track.track_id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    /// (track index, detection index)
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost one-to-one association with BEV center distance as cost.
/// Pairs farther apart than `gate` or of different classes are forbidden.
pub fn associate(tracks: &[Track], dets: &[Detection], gate: f64) -> Association {
    let cost: Vec<Vec<f64>> = tracks
        .iter()
        .map(|t| {
            dets.iter()
                .map(|d| {
                    if d.class_id == t.class_id {
                        center_distance_bev(&t.last().bbox, &d.bbox)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let a = solve_assignment(&cost, gate);
    let unmatched_dets = if tracks.is_empty() {
        (0..dets.len()).collect()
    } else {
        a.unassigned_cols
    };
    Association {
        pairs: a.pairs,
        unmatched_tracks: a.unassigned_rows,
        unmatched_dets,
        cost: a.cost,
    }
}

/// A detection surviving gating and NMS, with its track and, once the track
/// has two observations, the estimated velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedDetection {
    pub track_id: u64,
    pub detection: Detection,
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Every detection kept after gating and NMS.
    pub kept: Vec<TrackedDetection>,
}

impl StepOutput {
    /// Planner-facing objects: confirmed tracks only.
    pub fn confirmed(&self) -> impl Iterator<Item = &TrackedDetection> {
        self.kept.iter().filter(|t| t.confirmed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerState {
    pub tracks: Vec<Track>,
    pub next_track_id: u64,
    pub last_frame: Option<u64>,
    pub timestep: f64,
}

impl TrackerState {
    pub fn new(timestep: f64) -> Self {
        TrackerState {
            tracks: Vec::new(),
            next_track_id: 0,
            last_frame: None,
            timestep,
        }
    }

    pub fn step(&mut self, frame: &FrameRecord, cfg: &TrackerConfig) -> Result<StepOutput> {
        step(self, frame, cfg)
    }
}

/// Advances the tracker by one frame. Tracks without a detection terminate
/// immediately; a frame-index gap terminates every track.
pub fn step(state: &mut TrackerState, frame: &FrameRecord, cfg: &TrackerConfig) -> Result<StepOutput> {
    if let Some(last) = state.last_frame {
        if frame.frame_index <= last {
            return Err(Error::OutOfOrder {
                last,
                got: frame.frame_index,
            });
        }
        if frame.frame_index != last + 1 {
            state.tracks.clear();
        }
    }
    state.last_frame = Some(frame.frame_index);

    let gated: Vec<Detection> = frame
        .detections
        .iter()
        .filter(|d| d.confidence >= cfg.conf_threshold)
        .cloned()
        .collect();
    let dets = nms(&gated, cfg.nms_iou);
    let assoc = associate(&state.tracks, &dets, cfg.gate_m);

    let mut next_tracks: Vec<Track> = Vec::with_capacity(dets.len());
    let mut det_track: Vec<usize> = vec![usize::MAX; dets.len()];
    let mut old = std::mem::take(&mut state.tracks);
    for &(ti, di) in &assoc.pairs {
        let mut t = std::mem::replace(
            &mut old[ti],
            Track {
                track_id: u64::MAX,
                class_id: ClassId::new(""),
                history: Vec::new(),
            },
        );
        t.history.push(TrackObservation {
            frame_index: frame.frame_index,
            bbox: dets[di].bbox,
            confidence: dets[di].confidence,
        });
        det_track[di] = next_tracks.len();
        next_tracks.push(t);
    }
    for &di in &assoc.unmatched_dets {
        det_track[di] = next_tracks.len();
        next_tracks.push(Track {
            track_id: state.next_track_id,
            class_id: dets[di].class_id.clone(),
            history: vec![TrackObservation {
                frame_index: frame.frame_index,
                bbox: dets[di].bbox,
                confidence: dets[di].confidence,
            }],
        });
        state.next_track_id += 1;
    }

    let kept = dets
        .into_iter()
        .enumerate()
        .map(|(di, mut det)| {
            let t = &next_tracks[det_track[di]];
            if det.velocity.is_none() {
                det.velocity = t.velocity(state.timestep);
            }
            TrackedDetection {
                track_id: t.track_id,
                detection: det,
                confirmed: t.is_confirmed(cfg.confirm_frames),
            }
        })
        .collect();
    next_tracks.sort_by_key(|t| t.track_id);
    state.tracks = next_tracks;
    Ok(StepOutput { kept })
}
