use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::scenario::{car, pedestrian};
use super::stream;
use crate::types::{normalize_yaw, Detection, GroundTruthObject, OrientedBox3D, Pose2D, RouteLog};

/// Radius around the ego inside which false positives appear.
pub const FALSE_POSITIVE_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub drop_base: f64,
    pub drop_per_meter: f64,
    pub sigma_xy: f64,
    pub sigma_yaw: f64,
    pub sigma_dims: f64,
    /// Expected false positives per frame.
    pub fp_rate: f64,
    pub conf_noise: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::zero(0)
    }
}

impl NoiseModel {
    pub fn zero(seed: u64) -> Self {
        NoiseModel {
            drop_base: 0.0,
            drop_per_meter: 0.0,
            sigma_xy: 0.0,
            sigma_yaw: 0.0,
            sigma_dims: 0.0,
            fp_rate: 0.0,
            conf_noise: 0.0,
            seed,
        }
    }

    /// A detector whose noise magnitudes grow linearly with `severity` in [0, 1].
    pub fn at_severity(severity: f64, seed: u64) -> Self {
        let s = severity;
        NoiseModel {
            drop_base: 0.02 + 0.28 * s,
            drop_per_meter: 0.001 + 0.005 * s,
            sigma_xy: 0.02 + 0.23 * s,
            sigma_yaw: 0.02 + 0.3 * s,
            sigma_dims: 0.02 + 0.12 * s,
            fp_rate: 0.2 + 2.0 * s,
            conf_noise: 0.05 + 0.3 * s,
            seed,
        }
    }

    /// Every magnitude multiplied by `lambda`, probabilities clamped to 1.
    pub fn scaled(&self, lambda: f64) -> Self {
        NoiseModel {
            drop_base: (self.drop_base * lambda).min(1.0),
            drop_per_meter: (self.drop_per_meter * lambda).min(1.0),
            sigma_xy: self.sigma_xy * lambda,
            sigma_yaw: self.sigma_yaw * lambda,
            sigma_dims: self.sigma_dims * lambda,
            fp_rate: self.fp_rate * lambda,
            conf_noise: self.conf_noise * lambda,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let fields = [
            ("drop_base", self.drop_base),
            ("drop_per_meter", self.drop_per_meter),
            ("sigma_xy", self.sigma_xy),
            ("sigma_yaw", self.sigma_yaw),
            ("sigma_dims", self.sigma_dims),
            ("fp_rate", self.fp_rate),
            ("conf_noise", self.conf_noise),
        ];
        for (key, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("noise.{key} must be non-negative"));
            }
        }
        if self.drop_base > 1.0 {
            return Err("noise.drop_base must not exceed 1".into());
        }
        if self.drop_per_meter > 1.0 {
            return Err("noise.drop_per_meter must not exceed 1".into());
        }
        Ok(())
    }

    fn drop_probability(&self, distance: f64) -> f64 {
        (self.drop_base + self.drop_per_meter * distance).clamp(0.0, 1.0)
    }
}

/// `n` detectors evenly spaced in severity from 0 to 1, noisiest last.
pub fn noise_ladder(n: usize, seed: u64) -> Vec<(String, NoiseModel)> {
    (0..n)
        .map(|i| {
            let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            (format!("det_{i:02}"), NoiseModel::at_severity(s, seed.wrapping_add(i as u64)))
        })
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).map_or(0.0, |n| n.sample(rng))
    } else {
        0.0
    }
}

/// Per-frame detector output: survivors of distance-dependent dropout with
/// Gaussian box perturbations, plus Poisson false positives.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyFrame {
    pub detections: Vec<Detection>,
    /// How many of the detections stem from ground truth; they come first.
    pub from_ground_truth: usize,
}

pub fn noisy_detections(
    gt: &[GroundTruthObject],
    ego: &Pose2D,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> NoisyFrame {
    let mut detections = Vec::with_capacity(gt.len());
    for g in gt {
        let d = ego.distance_to(g.bbox.bev_center());
        let u: f64 = rng.random();
        if u < model.drop_probability(d) {
            continue;
        }
        let b = &g.bbox;
        let mut dims = b.dims;
        for v in &mut dims {
            *v = (*v * (1.0 + gaussian(rng, model.sigma_dims))).max(0.1 * *v);
        }
        let center = [
            b.center[0] + gaussian(rng, model.sigma_xy),
            b.center[1] + gaussian(rng, model.sigma_xy),
            b.center[2],
        ];
        let yaw = normalize_yaw(b.yaw + gaussian(rng, model.sigma_yaw)).unwrap_or(b.yaw);
        let confidence = (1.0 - gaussian(rng, model.conf_noise).abs()).clamp(0.0, 1.0);
        detections.push(Detection {
            bbox: OrientedBox3D { center, dims, yaw },
            confidence,
            class_id: g.class_id.clone(),
            velocity: None,
        });
    }
    let from_ground_truth = detections.len();

    let n_fp = if model.fp_rate > 0.0 {
        Poisson::new(model.fp_rate).map_or(0, |p| p.sample(rng) as usize)
    } else {
        0
    };
    for _ in 0..n_fp {
        let r = FALSE_POSITIVE_RADIUS * rng.random::<f64>().sqrt();
        let phi = rng.random_range(-PI..PI);
        let is_car = rng.random_bool(0.7);
        let (class_id, dims) = if is_car {
            (car(), [4.5, 2.0, 1.6])
        } else {
            (pedestrian(), [0.8, 0.8, 1.8])
        };
        let yaw = normalize_yaw(rng.random_range(-PI..PI)).unwrap_or(0.0);
        detections.push(Detection {
            bbox: OrientedBox3D {
                center: [
                    ego.position[0] + r * phi.cos(),
                    ego.position[1] + r * phi.sin(),
                    0.5 * dims[2],
                ],
                dims,
                yaw,
            },
            confidence: rng.random_range(0.3..0.7),
            class_id,
            velocity: None,
        });
    }
    NoisyFrame {
        detections,
        from_ground_truth,
    }
}

/// Fills every frame's detections from its ground truth.
pub fn apply_noise(route: &RouteLog, model: &NoiseModel) -> RouteLog {
    let mut rng = stream(model.seed, super::route_key(&route.route_id));
    let mut out = route.clone();
    for frame in &mut out.frames {
        frame.detections = noisy_detections(&frame.gt_objects, &frame.ego_pose, model, &mut rng).detections;
    }
    out
}
