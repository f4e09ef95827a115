//! Precision–recall accumulation and the AP family (AP-40, AOS, ID-AP).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::yaw_delta;
use crate::matching::{inverse_distance_weights, match_frame, Criterion};
use crate::types::{ClassId, Detection, FrameRecord, GroundTruthObject};

/// Number of equidistant recall levels used for interpolation.
pub const RECALL_LEVELS: usize = 40;

/// Slack when comparing weighted recall sums against recall levels.
const RECALL_EPS: f64 = 1e-12;

/// One detection entering the PR accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDetection {
    pub confidence: f64,
    /// Precision-side weight.
    pub weight: f64,
    /// Recall-side weight of the matched ground truth; `None` for a false positive.
    pub matched_gt_weight: Option<f64>,
    /// KITTI orientation similarity `(1 + cos Δθ) / 2`; unused for false positives.
    pub orientation_similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Precision with each TP counted by its orientation similarity.
    pub orientation_precision: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    /// One point per distinct confidence, in descending confidence order.
    pub points: Vec<PrPoint>,
    pub gt_mass: f64,
    pub det_mass: f64,
}

pub fn orientation_similarity(gt_yaw: f64, det_yaw: f64) -> f64 {
    let s = 0.5 * (1.0 + yaw_delta(gt_yaw, det_yaw).cos());
    s.clamp(0.0, 1.0)
}

pub fn accumulate_pr(detections: &[ScoredDetection], gt_mass: f64) -> Result<PRCurve> {
    if !(gt_mass > 0.0) {
        return Err(Error::UndefinedRecall);
    }
    let mut sorted = detections.to_vec();
    sorted.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));

    let mut points = Vec::new();
    let (mut tp, mut fp, mut tp_orient, mut recall_mass) = (0.0, 0.0, 0.0, 0.0);
    for (i, d) in sorted.iter().enumerate() {
        match d.matched_gt_weight {
            Some(gw) => {
                tp += d.weight;
                tp_orient += d.weight * d.orientation_similarity;
                recall_mass += gw;
            }
            None => fp += d.weight,
        }
        let group_ends = sorted
            .get(i + 1)
            .is_none_or(|next| next.confidence != d.confidence);
        if group_ends {
            let denom = tp + fp;
            let (precision, orientation_precision) = if denom > 0.0 {
                (tp / denom, tp_orient / denom)
            } else {
                (0.0, 0.0)
            };
            points.push(PrPoint {
                recall: (recall_mass / gt_mass).min(1.0),
                precision,
                orientation_precision,
                confidence: d.confidence,
            });
        }
    }
    Ok(PRCurve {
        points,
        gt_mass,
        det_mass: tp + fp,
    })
}

fn interpolated_mean(curve: &PRCurve, levels: usize, value: impl Fn(&PrPoint) -> f64) -> f64 {
    // suffix maximum: best value achievable at recall >= the point's recall
    let mut best = vec![0.0; curve.points.len()];
    let mut running: f64 = 0.0;
    for (i, p) in curve.points.iter().enumerate().rev() {
        running = running.max(value(p));
        best[i] = running;
    }
    let mut sum = 0.0;
    let mut idx = 0;
    for k in 1..=levels {
        let level = k as f64 / levels as f64;
        while idx < curve.points.len() && curve.points[idx].recall + RECALL_EPS < level {
            idx += 1;
        }
        if idx == curve.points.len() {
            break;
        }
        sum += best[idx];
    }
    sum / levels as f64
}

/// Mean over the recall levels 1/n, 2/n, …, 1 of the highest precision
/// reached at or beyond each level.
pub fn ap_interpolated(curve: &PRCurve, levels: usize) -> f64 {
    interpolated_mean(curve, levels, |p| p.precision)
}

pub fn aos_interpolated(curve: &PRCurve, levels: usize) -> f64 {
    interpolated_mean(curve, levels, |p| p.orientation_precision)
}

pub fn ap_40(curve: &PRCurve) -> f64 {
    ap_interpolated(curve, RECALL_LEVELS)
}

/// Average orientation similarity on the 40 recall levels.
pub fn aos(curve: &PRCurve) -> f64 {
    aos_interpolated(curve, RECALL_LEVELS)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Weighting {
    #[default]
    Uniform,
    InverseDistance {
        d_min: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruePositive {
    pub gt: GroundTruthObject,
    pub det: Detection,
    pub gt_weight: f64,
}

/// Everything one class contributes to a route's metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMatches {
    pub detections: Vec<ScoredDetection>,
    pub gt_mass: f64,
    pub true_positives: Vec<TruePositive>,
}

impl ClassMatches {
    pub fn curve(&self) -> Result<PRCurve> {
        accumulate_pr(&self.detections, self.gt_mass)
    }
}

/// Matches every frame class by class and pools the results per class.
pub fn collect_matches(
    frames: &[FrameRecord],
    criterion: Criterion,
    weighting: Weighting,
) -> BTreeMap<ClassId, ClassMatches> {
    let mut out: BTreeMap<ClassId, ClassMatches> = BTreeMap::new();
    for frame in frames {
        let mut classes: Vec<&ClassId> = frame
            .gt_objects
            .iter()
            .map(|g| &g.class_id)
            .chain(frame.detections.iter().map(|d| &d.class_id))
            .collect();
        classes.sort();
        classes.dedup();
        for class in classes {
            let gt: Vec<GroundTruthObject> = frame
                .gt_objects
                .iter()
                .filter(|g| &g.class_id == class)
                .cloned()
                .collect();
            let det: Vec<Detection> = frame
                .detections
                .iter()
                .filter(|d| &d.class_id == class)
                .cloned()
                .collect();
            let mut m = match_frame(&gt, &det, criterion);
            if let Weighting::InverseDistance { d_min } = weighting {
                let (gw, dw) = inverse_distance_weights(&gt, &det, &frame.ego_pose, d_min);
                m = m.with_weights(gw, dw);
            }
            let entry = out.entry(class.clone()).or_default();
            entry.gt_mass += m.gt_weights.iter().sum::<f64>();
            for (d, matched) in m.det_to_gt().into_iter().enumerate() {
                entry.detections.push(ScoredDetection {
                    confidence: det[d].confidence,
                    weight: m.det_weights[d],
                    matched_gt_weight: matched.map(|g| m.gt_weights[g]),
                    orientation_similarity: matched
                        .map_or(0.0, |g| orientation_similarity(gt[g].bbox.yaw, det[d].bbox.yaw)),
                });
            }
            for p in &m.pairs {
                entry.true_positives.push(TruePositive {
                    gt: gt[p.gt].clone(),
                    det: det[p.det].clone(),
                    gt_weight: m.gt_weights[p.gt],
                });
            }
        }
    }
    out
}

/// AP-family values for one route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApSummary {
    pub ap: f64,
    pub aos: f64,
}

/// Unweighted mean over classes with ground truth of (AP, AOS).
pub fn class_mean(classes: &BTreeMap<ClassId, ClassMatches>, levels: usize) -> Result<ApSummary> {
    let mut n = 0usize;
    let (mut ap_sum, mut aos_sum) = (0.0, 0.0);
    for m in classes.values() {
        if m.gt_mass <= 0.0 {
            continue;
        }
        let curve = m.curve()?;
        ap_sum += ap_interpolated(&curve, levels);
        aos_sum += aos_interpolated(&curve, levels);
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedRecall);
    }
    Ok(ApSummary {
        ap: ap_sum / n as f64,
        aos: aos_sum / n as f64,
    })
}

pub fn mean_ap(frames: &[FrameRecord], criterion: Criterion) -> Result<ApSummary> {
    class_mean(&collect_matches(frames, criterion, Weighting::Uniform), RECALL_LEVELS)
}

/// AP-40 over inverse-distance-weighted accumulation.
pub fn id_ap(frames: &[FrameRecord], criterion: Criterion, d_min: f64) -> Result<f64> {
    let classes = collect_matches(frames, criterion, Weighting::InverseDistance { d_min });
    Ok(class_mean(&classes, RECALL_LEVELS)?.ap)
}
