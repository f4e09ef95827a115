use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::noise::{noisy_detections, NoiseModel};
use super::planner::{commanded_speed, surrogate_planner, PlannerConfig, PlannerObject};
use super::scenario::Scenario;
use super::{route_key, stream};
use crate::error::Result;
use crate::geometry::bev_intersection_area;
use crate::tracking::{TrackerConfig, TrackerState};
use crate::types::{
    ClassId, Detection, FrameRecord, GroundTruthObject, InfractionEvent, InfractionKind, OrientedBox3D,
    Pose2D, RouteLog,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub planner: PlannerConfig,
    pub tracker: TrackerConfig,
}

/// What one frame of the world offers the ego.
struct WorldFrame {
    ground_truth: Vec<GroundTruthObject>,
    detections: Vec<Detection>,
    detected_ground_truth: usize,
    /// Objects the ego can collide with.
    obstacles: Vec<(u64, ClassId, OrientedBox3D)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStats {
    pub frames: usize,
    pub ground_truth: usize,
    pub detected_ground_truth: usize,
    pub false_positives: usize,
}

impl SimStats {
    pub fn miss_rate(&self) -> f64 {
        if self.ground_truth == 0 {
            0.0
        } else {
            1.0 - self.detected_ground_truth as f64 / self.ground_truth as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub route_completion: f64,
    pub infractions: Vec<InfractionEvent>,
    pub frames: Vec<FrameRecord>,
    pub stats: SimStats,
}

fn collision_kind(class: &ClassId) -> InfractionKind {
    match class.0.as_str() {
        "pedestrian" | "cyclist" => InfractionKind::CollisionPedestrian,
        "car" | "truck" | "bus" | "vehicle" => InfractionKind::CollisionVehicle,
        _ => InfractionKind::CollisionStatic,
    }
}

fn ego_box(pose: &Pose2D, cfg: &PlannerConfig) -> OrientedBox3D {
    OrientedBox3D {
        center: [pose.position[0], pose.position[1], 0.75],
        dims: [cfg.ego_length, cfg.ego_width, 1.5],
        yaw: pose.heading,
    }
}

/// Drives the surrogate planner on tracked perception through `n_frames`
/// frames of `world`, recording both plans from the end of the confirmation
/// warm-up on and every first contact with an obstacle.
fn run(
    n_frames: usize,
    timestep: f64,
    route_length: f64,
    cfg: &SimConfig,
    mut world: impl FnMut(usize, &Pose2D) -> WorldFrame,
) -> Result<Outcome> {
    let mut tracker = TrackerState::new(timestep);
    let mut ego = Pose2D {
        position: [0.0, 0.0],
        heading: 0.0,
    };
    let mut frames = Vec::with_capacity(n_frames);
    let mut infractions = Vec::new();
    let mut hit: BTreeSet<u64> = BTreeSet::new();
    let mut stats = SimStats::default();
    let mut progress = 0.0;
    let warm_up = cfg.tracker.confirm_frames.saturating_sub(1);

    for k in 0..n_frames {
        let wf = world(k, &ego);
        stats.frames += 1;
        stats.ground_truth += wf.ground_truth.len();
        stats.detected_ground_truth += wf.detected_ground_truth;
        stats.false_positives += wf.detections.len() - wf.detected_ground_truth;

        let mut frame = FrameRecord {
            frame_index: k as u64,
            time: k as f64 * timestep,
            ego_pose: ego,
            gt_objects: wf.ground_truth,
            detections: wf.detections,
            traj_gt_conditioned: None,
            traj_perception_conditioned: None,
        };
        let tracked = tracker.step(&frame, &cfg.tracker)?;
        let perceived: Vec<PlannerObject> = tracked
            .confirmed()
            .map(|t| PlannerObject {
                bbox: t.detection.bbox,
                velocity: t.detection.velocity,
            })
            .collect();
        let truth: Vec<PlannerObject> = frame
            .gt_objects
            .iter()
            .map(|g| PlannerObject {
                bbox: g.bbox,
                velocity: Some(g.velocity),
            })
            .collect();
        let plan = surrogate_planner(&perceived, &ego, &cfg.planner);
        if k >= warm_up {
            frame.traj_gt_conditioned = Some(surrogate_planner(&truth, &ego, &cfg.planner));
            frame.traj_perception_conditioned = Some(plan.clone());
        }

        let footprint = ego_box(&ego, &cfg.planner);
        for (id, class, b) in &wf.obstacles {
            if hit.contains(id) {
                continue;
            }
            if bev_intersection_area(&footprint, b) > 0.0 {
                hit.insert(*id);
                infractions.push(InfractionEvent {
                    kind: collision_kind(class),
                    frame_index: k as u64,
                });
            }
        }
        frames.push(frame);

        progress = ego.position[0];
        if progress >= route_length {
            break;
        }
        ego.position[0] += commanded_speed(&plan) * timestep;
    }
    let route_completion = if progress >= route_length {
        100.0
    } else {
        (100.0 * progress.max(0.0) / route_length).min(100.0)
    };
    Ok(Outcome {
        route_completion,
        infractions,
        frames,
        stats,
    })
}

/// Closed-loop drive of one detector through one scripted route. Detections
/// are sampled around the actual ego pose every frame.
pub fn simulate_route(
    scenario: &Scenario,
    model: &NoiseModel,
    detector_id: &str,
    cfg: &SimConfig,
) -> Result<(RouteLog, SimStats)> {
    let sc = &scenario.config;
    let mut rng = stream(model.seed, route_key(&scenario.route_id));
    let outcome = run(sc.n_frames, sc.timestep, sc.route_length_m, cfg, |k, ego| {
        let ground_truth = scenario.ground_truth(k, ego);
        let noisy = noisy_detections(&ground_truth, ego, model, &mut rng);
        WorldFrame {
            ground_truth,
            detections: noisy.detections,
            detected_ground_truth: noisy.from_ground_truth,
            obstacles: scenario
                .all_boxes(k)
                .into_iter()
                .map(|(o, b)| (o.object_id, o.class_id.clone(), b))
                .collect(),
        }
    })?;
    let log = RouteLog {
        route_id: scenario.route_id.clone(),
        detector_id: detector_id.to_string(),
        timestep: sc.timestep,
        route_completion: outcome.route_completion,
        infractions: outcome.infractions,
        frames: outcome.frames,
    };
    Ok((log, outcome.stats))
}

/// Replays a logged route with the surrogate planner in the loop. Ground
/// truth and detections are taken from the log frame by frame while the ego
/// pose is re-simulated, so the logged poses are ignored.
pub fn surrogate_outcome(route: &RouteLog, route_length: f64, cfg: &SimConfig) -> Result<Outcome> {
    let n = route.frames.len();
    let mut outcome = run(n, route.timestep, route_length, cfg, |k, ego| {
        let f = &route.frames[k];
        let ground_truth: Vec<GroundTruthObject> = f
            .gt_objects
            .iter()
            .map(|g| GroundTruthObject {
                distance_to_ego: ego.distance_to(g.bbox.bev_center()),
                ..g.clone()
            })
            .collect();
        WorldFrame {
            obstacles: ground_truth
                .iter()
                .map(|g| (g.object_id, g.class_id.clone(), g.bbox))
                .collect(),
            ground_truth,
            detected_ground_truth: f.detections.len(),
            detections: f.detections.clone(),
        }
    })?;
    for ev in &mut outcome.infractions {
        ev.frame_index = route.frames[ev.frame_index as usize].frame_index;
    }
    for (new, old) in outcome.frames.iter_mut().zip(&route.frames) {
        new.frame_index = old.frame_index;
        new.time = old.time;
    }
    Ok(outcome)
}
