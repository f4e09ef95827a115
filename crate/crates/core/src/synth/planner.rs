use serde::{Deserialize, Serialize};

use crate::types::{OrientedBox3D, Pose2D, Trajectory, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub target_speed: f64,
    pub corridor_width: f64,
    pub range_m: f64,
    pub horizon: usize,
    pub waypoint_dt: f64,
    pub max_decel: f64,
    /// Gap kept between the ego front and the nearest conflict, meters.
    pub buffer_m: f64,
    pub ego_length: f64,
    pub ego_width: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            target_speed: 6.0,
            corridor_width: 3.0,
            range_m: 20.0,
            horizon: 8,
            waypoint_dt: 0.5,
            max_decel: 4.0,
            buffer_m: 1.5,
            ego_length: 4.5,
            ego_width: 2.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let positive = [
            ("target_speed", self.target_speed),
            ("corridor_width", self.corridor_width),
            ("range_m", self.range_m),
            ("waypoint_dt", self.waypoint_dt),
            ("max_decel", self.max_decel),
            ("ego_length", self.ego_length),
            ("ego_width", self.ego_width),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("planner.{key} must be positive"));
            }
        }
        if !(self.buffer_m >= 0.0) {
            return Err("planner.buffer_m must be non-negative".into());
        }
        if self.horizon == 0 {
            return Err("planner.horizon must be at least 1".into());
        }
        Ok(())
    }
}

/// An object as the planner sees it; without a velocity it is held static.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerObject {
    pub bbox: OrientedBox3D,
    pub velocity: Option<Vec2>,
}

/// Axis-aligned extent of a box footprint in the ego frame.
fn local_extent(b: &OrientedBox3D, shift: Vec2, ego: &Pose2D) -> [f64; 4] {
    let (s, c) = b.yaw.sin_cos();
    let (hl, hw) = (0.5 * b.dims[0], 0.5 * b.dims[1]);
    let mut ext = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for (lx, ly) in [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)] {
        let w = [
            b.center[0] + shift[0] + c * lx - s * ly,
            b.center[1] + shift[1] + s * lx + c * ly,
        ];
        let [x, y] = ego.to_local(w);
        ext[0] = ext[0].min(x);
        ext[1] = ext[1].max(x);
        ext[2] = ext[2].min(y);
        ext[3] = ext[3].max(y);
    }
    ext
}

/// Distance the ego front may travel before the nearest predicted conflict,
/// minus the buffer; infinite when the corridor stays clear.
pub fn stopping_limit(objects: &[PlannerObject], ego: &Pose2D, cfg: &PlannerConfig) -> f64 {
    let front = 0.5 * cfg.ego_length;
    let half = 0.5 * cfg.corridor_width;
    let mut limit = f64::INFINITY;
    for o in objects {
        let v = o.velocity.unwrap_or([0.0, 0.0]);
        for k in 0..=cfg.horizon {
            let t = k as f64 * cfg.waypoint_dt;
            let [x0, _, y0, y1] = local_extent(&o.bbox, [v[0] * t, v[1] * t], ego);
            if y1 < -half || y0 > half || x0 <= front || x0 - front > cfg.range_m {
                continue;
            }
            limit = limit.min(x0 - front - cfg.buffer_m);
        }
    }
    limit
}

/// Longitudinal plan along the lane in the ego frame: cruise at the target
/// speed, or brake so as never to pass the stopping limit.
pub fn surrogate_planner(objects: &[PlannerObject], ego: &Pose2D, cfg: &PlannerConfig) -> Trajectory {
    let limit = stopping_limit(objects, ego, cfg);
    let mut s = 0.0;
    let waypoints = (0..cfg.horizon)
        .map(|_| {
            s = if limit.is_finite() {
                let v = cfg
                    .target_speed
                    .min((2.0 * cfg.max_decel * (limit - s).max(0.0)).sqrt());
                (s + v * cfg.waypoint_dt).min(limit.max(s))
            } else {
                s + cfg.target_speed * cfg.waypoint_dt
            };
            [s, 0.0]
        })
        .collect();
    Trajectory {
        waypoints,
        timestep: cfg.waypoint_dt,
    }
}

/// Speed implied by the first waypoint.
pub fn commanded_speed(plan: &Trajectory) -> f64 {
    plan.waypoints.first().map_or(0.0, |w| w[0] / plan.timestep)
}
