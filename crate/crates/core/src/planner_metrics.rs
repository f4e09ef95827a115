//! Displacement errors between ground-truth-conditioned and
//! perception-conditioned planner trajectories.

use crate::error::{Error, Result};
use crate::types::{RouteLog, Trajectory, Vec2};

fn dist(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check_pair(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.waypoints.len() != b.waypoints.len() {
        return Err(Error::LengthMismatch(a.waypoints.len(), b.waypoints.len()));
    }
    if a.waypoints.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    if a.timestep != b.timestep {
        return Err(Error::InvalidInput(format!(
            "trajectory timesteps differ: {} vs {}",
            a.timestep, b.timestep
        )));
    }
    Ok(())
}

/// Mean point-wise L2 distance.
pub fn frame_ade(t_gt: &Trajectory, t_pred: &Trajectory) -> Result<f64> {
    check_pair(t_gt, t_pred)?;
    let sum: f64 = t_gt
        .waypoints
        .iter()
        .zip(&t_pred.waypoints)
        .map(|(a, b)| dist(*a, *b))
        .sum();
    Ok(sum / t_gt.waypoints.len() as f64)
}

/// L2 distance between the final waypoints.
pub fn frame_fde(t_gt: &Trajectory, t_pred: &Trajectory) -> Result<f64> {
    check_pair(t_gt, t_pred)?;
    let (a, b) = (t_gt.waypoints.last(), t_pred.waypoints.last());
    Ok(dist(*a.unwrap(), *b.unwrap()))
}

fn route_mean(route: &RouteLog, f: fn(&Trajectory, &Trajectory) -> Result<f64>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (a, b) in route.frames.iter().filter_map(|fr| fr.trajectory_pair()) {
        sum += f(a, b)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoTrajectories);
    }
    Ok(sum / n as f64)
}

/// Mean frame ADE over frames carrying both trajectories.
pub fn route_ade(route: &RouteLog) -> Result<f64> {
    route_mean(route, frame_ade)
}

pub fn route_fde(route: &RouteLog) -> Result<f64> {
    route_mean(route, frame_fde)
}
