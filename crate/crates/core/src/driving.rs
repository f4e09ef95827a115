//! Online driving metrics from route outcomes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{InfractionEvent, InfractionKind};

/// Multiplicative penalty per infraction kind, each in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    pub collision_pedestrian: f64,
    pub collision_vehicle: f64,
    pub collision_static: f64,
    pub red_light: f64,
    pub stop_sign: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            collision_pedestrian: 0.50,
            collision_vehicle: 0.60,
            collision_static: 0.65,
            red_light: 0.70,
            stop_sign: 0.80,
        }
    }
}

impl PenaltyConfig {
    pub fn to_map(&self) -> BTreeMap<InfractionKind, f64> {
        BTreeMap::from([
            (InfractionKind::CollisionPedestrian, self.collision_pedestrian),
            (InfractionKind::CollisionVehicle, self.collision_vehicle),
            (InfractionKind::CollisionStatic, self.collision_static),
            (InfractionKind::RedLight, self.red_light),
            (InfractionKind::StopSign, self.stop_sign),
        ])
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (kind, f) in self.to_map() {
            if !(f > 0.0 && f <= 1.0) {
                return Err(format!("penalties.{} must lie in (0, 1]", kind.as_str()));
            }
        }
        Ok(())
    }
}

/// Product of the penalty factors of all events.
pub fn infraction_score(
    infractions: &[InfractionEvent],
    penalties: &BTreeMap<InfractionKind, f64>,
) -> Result<f64> {
    let mut score = 1.0;
    for ev in infractions {
        let f = penalties
            .get(&ev.kind)
            .ok_or_else(|| Error::InvalidInput(format!("no penalty for {}", ev.kind.as_str())))?;
        if !(*f > 0.0 && *f <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "penalty for {} outside (0, 1]",
                ev.kind.as_str()
            )));
        }
        score *= f;
    }
    Ok(score)
}

/// Route completion (percent) times infraction score.
pub fn driving_score(route_completion: f64, infraction_score: f64) -> f64 {
    (route_completion * infraction_score).clamp(0.0, 100.0)
}

pub fn collision_count(infractions: &[InfractionEvent]) -> usize {
    infractions.iter().filter(|e| e.kind.is_collision()).count()
}
