//! Shared data model for evaluation logs.
//!
//! Coordinates are right-handed: x forward, y left, z up, yaw counter-clockwise
//! from +x. Boxes and ego poses are stored in the world frame; trajectories are
//! stored in the ego frame of the frame they belong to.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

/// Maps an angle onto (−π, π]. Angles already in range are returned unchanged,
/// which makes the mapping exactly idempotent.
pub fn normalize_yaw(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite(format!("yaw {theta}")));
    }
    if theta > -PI && theta <= PI {
        return Ok(theta);
    }
    let r = theta.rem_euclid(TAU);
    Ok(if r > PI { r - TAU } else { r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox3D {
    pub center: Vec3,
    /// (length, width, height)
    pub dims: Vec3,
    pub yaw: f64,
}

impl OrientedBox3D {
    pub fn new(center: Vec3, dims: Vec3, yaw: f64) -> Result<Self> {
        let b = OrientedBox3D {
            center,
            dims,
            yaw: normalize_yaw(yaw)?,
        };
        b.check().map_err(Error::InvalidInput)?;
        Ok(b)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err("box center not finite".into());
        }
        if self.dims.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err("box dims must be finite and positive".into());
        }
        if !(self.yaw > -PI && self.yaw <= PI) {
            return Err("box yaw outside (-pi, pi]".into());
        }
        Ok(())
    }

    pub fn bev_center(&self) -> Vec2 {
        [self.center[0], self.center[1]]
    }

    pub fn z_range(&self) -> (f64, f64) {
        let h = 0.5 * self.dims[2];
        (self.center[2] - h, self.center[2] + h)
    }

    pub fn volume(&self) -> f64 {
        self.dims[0] * self.dims[1] * self.dims[2]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub String);

impl ClassId {
    pub fn new(s: impl Into<String>) -> Self {
        ClassId(s.into())
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: OrientedBox3D,
    pub confidence: f64,
    pub class_id: ClassId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec2>,
}

fn missing_distance() -> f64 {
    f64::NAN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    #[serde(rename = "box")]
    pub bbox: OrientedBox3D,
    pub class_id: ClassId,
    pub object_id: u64,
    pub velocity: Vec2,
    /// BEV distance to the ego position. Filled in on load when absent.
    #[serde(default = "missing_distance")]
    pub distance_to_ego: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose2D {
    pub fn distance_to(&self, p: Vec2) -> f64 {
        (p[0] - self.position[0]).hypot(p[1] - self.position[1])
    }

    /// World point expressed in this pose's frame.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let (s, c) = self.heading.sin_cos();
        let dx = p[0] - self.position[0];
        let dy = p[1] - self.position[1];
        [c * dx + s * dy, -s * dx + c * dy]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Vec2>,
    pub timestep: f64,
}

impl Trajectory {
    fn check(&self) -> std::result::Result<(), String> {
        if self.waypoints.is_empty() {
            return Err("empty trajectory".into());
        }
        if self.waypoints.iter().flatten().any(|v| !v.is_finite()) {
            return Err("trajectory waypoint not finite".into());
        }
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            return Err("trajectory timestep must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub time: f64,
    pub ego_pose: Pose2D,
    pub gt_objects: Vec<GroundTruthObject>,
    pub detections: Vec<Detection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traj_gt_conditioned: Option<Trajectory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traj_perception_conditioned: Option<Trajectory>,
}

impl FrameRecord {
    pub fn trajectory_pair(&self) -> Option<(&Trajectory, &Trajectory)> {
        match (&self.traj_gt_conditioned, &self.traj_perception_conditioned) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfractionKind {
    CollisionPedestrian,
    CollisionVehicle,
    CollisionStatic,
    RedLight,
    StopSign,
}

impl InfractionKind {
    pub const ALL: [InfractionKind; 5] = [
        InfractionKind::CollisionPedestrian,
        InfractionKind::CollisionVehicle,
        InfractionKind::CollisionStatic,
        InfractionKind::RedLight,
        InfractionKind::StopSign,
    ];

    pub fn is_collision(self) -> bool {
        matches!(
            self,
            InfractionKind::CollisionPedestrian
                | InfractionKind::CollisionVehicle
                | InfractionKind::CollisionStatic
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InfractionKind::CollisionPedestrian => "collision_pedestrian",
            InfractionKind::CollisionVehicle => "collision_vehicle",
            InfractionKind::CollisionStatic => "collision_static",
            InfractionKind::RedLight => "red_light",
            InfractionKind::StopSign => "stop_sign",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfractionEvent {
    pub kind: InfractionKind,
    pub frame_index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteLog {
    pub route_id: String,
    pub detector_id: String,
    pub timestep: f64,
    pub route_completion: f64,
    pub infractions: Vec<InfractionEvent>,
    pub frames: Vec<FrameRecord>,
}

impl RouteLog {
    /// Normalizes yaws, fills cached ego distances and checks every invariant.
    pub fn validate(&mut self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::InvalidRoute("route has no frames".into()));
        }
        if !(self.route_completion.is_finite() && (0.0..=100.0).contains(&self.route_completion)) {
            return Err(Error::InvalidRoute(format!(
                "route_completion {} outside [0, 100]",
                self.route_completion
            )));
        }
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            return Err(Error::InvalidRoute("timestep must be positive".into()));
        }

        let mut last_index: Option<u64> = None;
        let mut object_class: HashMap<u64, ClassId> = HashMap::new();
        for frame in &mut self.frames {
            let fi = frame.frame_index;
            let invalid = |msg: String| Error::Validation { frame: fi, msg };
            if let Some(last) = last_index {
                if fi <= last {
                    return Err(invalid(format!("frame_index not increasing after {last}")));
                }
            }
            last_index = Some(fi);
            if !frame.time.is_finite() {
                return Err(invalid("time not finite".into()));
            }
            let ego = frame.ego_pose;
            if ego.position.iter().any(|v| !v.is_finite()) || !ego.heading.is_finite() {
                return Err(invalid("ego pose not finite".into()));
            }
            frame.ego_pose.heading = normalize_yaw(ego.heading)?;

            let mut seen = Vec::with_capacity(frame.gt_objects.len());
            for gt in &mut frame.gt_objects {
                normalize_box(&mut gt.bbox).map_err(&invalid)?;
                if gt.velocity.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("ground-truth velocity not finite".into()));
                }
                if seen.contains(&gt.object_id) {
                    return Err(invalid(format!("duplicate object_id {}", gt.object_id)));
                }
                seen.push(gt.object_id);
                match object_class.get(&gt.object_id) {
                    Some(c) if *c != gt.class_id => {
                        return Err(invalid(format!(
                            "object_id {} changed class",
                            gt.object_id
                        )))
                    }
                    Some(_) => {}
                    None => {
                        object_class.insert(gt.object_id, gt.class_id.clone());
                    }
                }
                let d = ego.distance_to(gt.bbox.bev_center());
                if gt.distance_to_ego.is_nan() {
                    gt.distance_to_ego = d;
                } else if (gt.distance_to_ego - d).abs() > 1e-6 {
                    return Err(invalid(format!(
                        "distance_to_ego {} inconsistent with pose ({d})",
                        gt.distance_to_ego
                    )));
                }
            }
            for det in &mut frame.detections {
                normalize_box(&mut det.bbox).map_err(&invalid)?;
                if !(det.confidence >= 0.0 && det.confidence <= 1.0) {
                    return Err(invalid("confidence out of range".into()));
                }
                if let Some(v) = det.velocity {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(invalid("detection velocity not finite".into()));
                    }
                }
            }
            match (&frame.traj_gt_conditioned, &frame.traj_perception_conditioned) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    a.check().map_err(&invalid)?;
                    b.check().map_err(&invalid)?;
                }
                _ => return Err(invalid("only one of the two trajectories present".into())),
            }
        }

        let first = self.frames[0].frame_index;
        let last = self.frames[self.frames.len() - 1].frame_index;
        for ev in &self.infractions {
            if ev.frame_index < first || ev.frame_index > last {
                return Err(Error::Validation {
                    frame: ev.frame_index,
                    msg: "infraction outside route bounds".into(),
                });
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

fn normalize_box(b: &mut OrientedBox3D) -> std::result::Result<(), String> {
    b.yaw = normalize_yaw(b.yaw).map_err(|e| e.to_string())?;
    b.check()
}
