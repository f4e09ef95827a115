use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stream;
use crate::error::{Error, Result};
use crate::geometry::bev_intersection_area;
use crate::types::{ClassId, FrameRecord, GroundTruthObject, OrientedBox3D, Pose2D, RouteLog, Vec2, Vec3};

/// Positions are snapped to this grid and speeds to `VELOCITY_QUANTUM`, so
/// that with a dyadic timestep every kinematic quantity is exact in binary
/// floating point.
pub const POSITION_QUANTUM: f64 = 1.0 / 64.0;
pub const VELOCITY_QUANTUM: f64 = 1.0 / 16.0;

pub const LANE_OFFSET: f64 = 3.5;
pub const PARKING_OFFSET: f64 = 6.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_routes: usize,
    pub n_frames: usize,
    /// Scripted objects per 100 m of route.
    pub density: f64,
    pub seed: u64,
    pub timestep: f64,
    pub route_length_m: f64,
    /// Ground truth is annotated within this BEV distance of the ego.
    pub sensor_range_m: f64,
    /// Speed of the unobstructed ego, used to time crossing traffic.
    pub ego_speed: f64,
    /// Share of scripted objects that cross the ego lane.
    pub crossing_share: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_routes: 12,
            n_frames: 240,
            density: 12.0,
            seed: 7,
            timestep: 0.125,
            route_length_m: 90.0,
            sensor_range_m: 50.0,
            ego_speed: 6.0,
            crossing_share: 0.4,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.n_routes == 0 {
            return Err("scenario.n_routes must be at least 1".into());
        }
        if self.n_frames == 0 {
            return Err("scenario.n_frames must be at least 1".into());
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err("scenario.density must be non-negative".into());
        }
        if !(self.timestep > 0.0 && self.timestep.is_finite()) {
            return Err("scenario.timestep must be positive".into());
        }
        if !(self.route_length_m > 0.0 && self.route_length_m.is_finite()) {
            return Err("scenario.route_length_m must be positive".into());
        }
        if !(self.sensor_range_m > 0.0) {
            return Err("scenario.sensor_range_m must be positive".into());
        }
        if !(self.ego_speed > 0.0 && self.ego_speed.is_finite()) {
            return Err("scenario.ego_speed must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.crossing_share) {
            return Err("scenario.crossing_share must lie in [0, 1]".into());
        }
        Ok(())
    }
}

fn snap(v: f64, q: f64) -> f64 {
    (v / q).round() * q
}

/// Constant velocity from `start_frame` until the next segment starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_frame: usize,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectScript {
    pub object_id: u64,
    pub class_id: ClassId,
    pub dims: Vec3,
    pub yaw: f64,
    pub start: Vec2,
    /// First segment starts at frame 0.
    pub segments: Vec<Segment>,
}

impl ObjectScript {
    pub fn position(&self, frame: usize, dt: f64) -> Vec2 {
        let mut p = self.start;
        for (i, seg) in self.segments.iter().enumerate() {
            let end = self.segments.get(i + 1).map_or(usize::MAX, |s| s.start_frame);
            if frame <= seg.start_frame {
                break;
            }
            let steps = frame.min(end) - seg.start_frame;
            let t = steps as f64 * dt;
            p[0] += seg.velocity[0] * t;
            p[1] += seg.velocity[1] * t;
        }
        p
    }

    /// Velocity over the interval ending at `frame`, so that it equals the
    /// backward difference of consecutive positions.
    pub fn velocity(&self, frame: usize) -> Vec2 {
        let k = frame.saturating_sub(1);
        self.segments
            .iter()
            .rev()
            .find(|s| s.start_frame <= k)
            .map_or([0.0, 0.0], |s| s.velocity)
    }

    pub fn bbox(&self, frame: usize, dt: f64) -> OrientedBox3D {
        let [x, y] = self.position(frame, dt);
        OrientedBox3D {
            center: [x, y, 0.5 * self.dims[2]],
            dims: self.dims,
            yaw: self.yaw,
        }
    }

    pub fn ground_truth(&self, frame: usize, dt: f64, ego: &Pose2D) -> GroundTruthObject {
        let bbox = self.bbox(frame, dt);
        GroundTruthObject {
            distance_to_ego: ego.distance_to(bbox.bev_center()),
            bbox,
            class_id: self.class_id.clone(),
            object_id: self.object_id,
            velocity: self.velocity(frame),
        }
    }
}

/// The scripted world of one route.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub route_id: String,
    pub route_index: usize,
    pub objects: Vec<ObjectScript>,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn ground_truth(&self, frame: usize, ego: &Pose2D) -> Vec<GroundTruthObject> {
        let dt = self.config.timestep;
        self.objects
            .iter()
            .map(|o| o.ground_truth(frame, dt, ego))
            .filter(|g| g.distance_to_ego <= self.config.sensor_range_m)
            .collect()
    }

    /// Every scripted object regardless of range.
    pub fn all_boxes(&self, frame: usize) -> Vec<(&ObjectScript, OrientedBox3D)> {
        self.objects
            .iter()
            .map(|o| (o, o.bbox(frame, self.config.timestep)))
            .collect()
    }
}

pub fn car() -> ClassId {
    ClassId::new("car")
}

pub fn pedestrian() -> ClassId {
    ClassId::new("pedestrian")
}

fn car_dims(rng: &mut ChaCha8Rng) -> Vec3 {
    [
        snap(rng.random_range(4.0..5.0), POSITION_QUANTUM),
        snap(rng.random_range(1.8..2.1), POSITION_QUANTUM),
        snap(rng.random_range(1.4..1.7), POSITION_QUANTUM),
    ]
}

fn pedestrian_dims(rng: &mut ChaCha8Rng) -> Vec3 {
    let d = snap(rng.random_range(0.6..0.9), POSITION_QUANTUM);
    [d, d, snap(rng.random_range(1.6..1.9), POSITION_QUANTUM)]
}

fn crossing(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> (ClassId, Vec3, f64, Vec2, Vec<Segment>) {
    let lo = 30.0f64.min(0.5 * cfg.route_length_m);
    let x = snap(rng.random_range(lo..=cfg.route_length_m.max(lo)), POSITION_QUANTUM);
    let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let (class, dims, speed) = if rng.random_bool(0.6) {
        (pedestrian(), pedestrian_dims(rng), rng.random_range(1.0..2.0))
    } else {
        (car(), car_dims(rng), rng.random_range(3.0..6.0))
    };
    let speed = snap(speed, VELOCITY_QUANTUM);
    // reaches the lane center when an unobstructed ego does
    let t_arrive = x / cfg.ego_speed + rng.random_range(-0.2..0.2);
    let y0 = snap(-dir * speed * t_arrive, POSITION_QUANTUM);
    let segs = vec![Segment {
        start_frame: 0,
        velocity: [0.0, dir * speed],
    }];
    (class, dims, dir * PI / 2.0, [x, y0], segs)
}

fn lane_vehicle(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> (ClassId, Vec3, f64, Vec2, Vec<Segment>) {
    let oncoming = rng.random_bool(0.5);
    let (y, sign, yaw) = if oncoming {
        (LANE_OFFSET, -1.0, PI)
    } else {
        (-LANE_OFFSET, 1.0, 0.0)
    };
    let x = snap(rng.random_range(-20.0..cfg.route_length_m + 40.0), POSITION_QUANTUM);
    let v1 = snap(rng.random_range(3.0..9.0), VELOCITY_QUANTUM);
    let v2 = snap(rng.random_range(3.0..9.0), VELOCITY_QUANTUM);
    let switch = rng.random_range(cfg.n_frames / 4..=(3 * cfg.n_frames / 4).max(cfg.n_frames / 4));
    let segs = vec![
        Segment {
            start_frame: 0,
            velocity: [sign * v1, 0.0],
        },
        Segment {
            start_frame: switch,
            velocity: [sign * v2, 0.0],
        },
    ];
    (car(), car_dims(rng), yaw, [x, y], segs)
}

fn parked(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> (ClassId, Vec3, f64, Vec2, Vec<Segment>) {
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let x = snap(rng.random_range(10.0..cfg.route_length_m + 20.0), POSITION_QUANTUM);
    let yaw = if rng.random_bool(0.5) { 0.0 } else { PI };
    let segs = vec![Segment {
        start_frame: 0,
        velocity: [0.0, 0.0],
    }];
    (car(), car_dims(rng), yaw, [x, side * PARKING_OFFSET], segs)
}

fn overlaps_any(candidate: &ObjectScript, kept: &[ObjectScript], cfg: &ScenarioConfig) -> bool {
    (0..cfg.n_frames).any(|k| {
        let a = candidate.bbox(k, cfg.timestep);
        kept.iter().any(|o| {
            let b = o.bbox(k, cfg.timestep);
            let reach = 0.5 * (a.dims[0].hypot(a.dims[1]) + b.dims[0].hypot(b.dims[1]));
            let near = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]) < reach;
            near && bev_intersection_area(&a, &b) > 0.0
        })
    })
}

/// Scripts one route: crossing traffic timed to meet an unobstructed ego,
/// adjacent-lane traffic and parked cars. Objects that would overlap another
/// object at any frame are discarded.
pub fn generate_script(cfg: &ScenarioConfig, route_index: usize) -> Scenario {
    let mut rng = stream(cfg.seed, route_index as u64);
    let n = (cfg.density * cfg.route_length_m / 100.0).round() as usize;
    let mut objects: Vec<ObjectScript> = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let rest = 1.0 - cfg.crossing_share;
        let (class_id, dims, yaw, start, segments) = if u < cfg.crossing_share {
            crossing(&mut rng, cfg)
        } else if u < cfg.crossing_share + 0.5 * rest {
            lane_vehicle(&mut rng, cfg)
        } else {
            parked(&mut rng, cfg)
        };
        let script = ObjectScript {
            object_id: i as u64,
            class_id,
            dims,
            yaw,
            start,
            segments,
        };
        if !overlaps_any(&script, &objects, cfg) {
            objects.push(script);
        }
    }
    Scenario {
        route_id: format!("route_{route_index:03}"),
        route_index,
        objects,
        config: cfg.clone(),
    }
}

pub fn open_loop_pose(cfg: &ScenarioConfig, frame: usize) -> Pose2D {
    Pose2D {
        position: [cfg.ego_speed * frame as f64 * cfg.timestep, 0.0],
        heading: 0.0,
    }
}

/// Ground-truth-only logs of an ego driving the lane at constant speed.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Vec<RouteLog>> {
    cfg.validate().map_err(Error::InvalidInput)?;
    Ok((0..cfg.n_routes)
        .map(|r| {
            let scenario = generate_script(cfg, r);
            let frames = (0..cfg.n_frames)
                .map(|k| {
                    let ego = open_loop_pose(cfg, k);
                    FrameRecord {
                        frame_index: k as u64,
                        time: k as f64 * cfg.timestep,
                        ego_pose: ego,
                        gt_objects: scenario.ground_truth(k, &ego),
                        detections: Vec::new(),
                        traj_gt_conditioned: None,
                        traj_perception_conditioned: None,
                    }
                })
                .collect();
            let travelled = cfg.ego_speed * (cfg.n_frames - 1) as f64 * cfg.timestep;
            RouteLog {
                route_id: scenario.route_id,
                detector_id: "ground_truth".into(),
                timestep: cfg.timestep,
                route_completion: (100.0 * travelled / cfg.route_length_m).min(100.0),
                infractions: Vec::new(),
                frames,
            }
        })
        .collect())
}
