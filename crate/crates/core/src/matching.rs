//! Per-frame assignment of detections to ground truth.
//!
//! Matching is greedy in descending detection confidence (lower detection
//! index first on ties). Each detection claims the best still-free
//! ground-truth object of the same class that satisfies the criterion; ties on
//! the criterion value go to the lower ground-truth index.

use serde::{Deserialize, Serialize};

use crate::geometry::{bev_iou, center_distance_bev, iou_3d};
use crate::types::{Detection, GroundTruthObject, Pose2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IouKind {
    Bev,
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
}

impl IouKind {
    pub fn iou(self, a: &crate::types::OrientedBox3D, b: &crate::types::OrientedBox3D) -> f64 {
        match self {
            IouKind::Bev => bev_iou(a, b),
            IouKind::ThreeD => iou_3d(a, b),
        }
    }
}

impl std::str::FromStr for IouKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bev" => Ok(IouKind::Bev),
            "3d" => Ok(IouKind::ThreeD),
            other => Err(format!("unknown iou kind `{other}` (expected bev or 3d)")),
        }
    }
}

/// True-positive criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    Iou { threshold: f64, kind: IouKind },
    CenterDistance { threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub gt: usize,
    pub det: usize,
    /// IoU or center distance of the pair.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_det: Vec<usize>,
    pub gt_weights: Vec<f64>,
    pub det_weights: Vec<f64>,
}

impl MatchResult {
    pub fn with_weights(mut self, gt_weights: Vec<f64>, det_weights: Vec<f64>) -> Self {
        assert_eq!(gt_weights.len(), self.gt_weights.len());
        assert_eq!(det_weights.len(), self.det_weights.len());
        self.gt_weights = gt_weights;
        self.det_weights = det_weights;
        self
    }

    /// Ground-truth index matched to each detection.
    pub fn det_to_gt(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.det_weights.len()];
        for p in &self.pairs {
            out[p.det] = Some(p.gt);
        }
        out
    }
}

/// Detection indices ordered by descending confidence, stable on ties.
pub fn confidence_order(det: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..det.len()).collect();
    order.sort_by(|&a, &b| det[b].confidence.total_cmp(&det[a].confidence));
    order
}

pub fn match_frame(gt: &[GroundTruthObject], det: &[Detection], criterion: Criterion) -> MatchResult {
    let mut taken = vec![false; gt.len()];
    let mut pairs = Vec::new();
    let mut unmatched_det = Vec::new();

    for d in confidence_order(det) {
        let mut best: Option<(usize, f64)> = None;
        for (g, obj) in gt.iter().enumerate() {
            if taken[g] || obj.class_id != det[d].class_id {
                continue;
            }
            match criterion {
                Criterion::Iou { threshold, kind } => {
                    let v = kind.iou(&obj.bbox, &det[d].bbox);
                    if v >= threshold && best.is_none_or(|(_, b)| v > b) {
                        best = Some((g, v));
                    }
                }
                Criterion::CenterDistance { threshold } => {
                    let v = center_distance_bev(&obj.bbox, &det[d].bbox);
                    if v <= threshold && best.is_none_or(|(_, b)| v < b) {
                        best = Some((g, v));
                    }
                }
            }
        }
        match best {
            Some((g, value)) => {
                taken[g] = true;
                pairs.push(MatchedPair { gt: g, det: d, value });
            }
            None => unmatched_det.push(d),
        }
    }
    unmatched_det.sort_unstable();
    let unmatched_gt = (0..gt.len()).filter(|&g| !taken[g]).collect();
    MatchResult {
        pairs,
        unmatched_gt,
        unmatched_det,
        gt_weights: vec![1.0; gt.len()],
        det_weights: vec![1.0; det.len()],
    }
}

pub fn match_by_iou(
    gt: &[GroundTruthObject],
    det: &[Detection],
    iou_threshold: f64,
    iou_kind: IouKind,
) -> MatchResult {
    match_frame(
        gt,
        det,
        Criterion::Iou {
            threshold: iou_threshold,
            kind: iou_kind,
        },
    )
}

pub fn match_by_center_distance(
    gt: &[GroundTruthObject],
    det: &[Detection],
    dist_threshold: f64,
) -> MatchResult {
    match_frame(
        gt,
        det,
        Criterion::CenterDistance {
            threshold: dist_threshold,
        },
    )
}

/// `1 / max(d, d_min)` for every ground-truth object and every detection,
/// with `d` the BEV distance to the ego position.
pub fn inverse_distance_weights(
    gt: &[GroundTruthObject],
    det: &[Detection],
    ego: &Pose2D,
    d_min: f64,
) -> (Vec<f64>, Vec<f64>) {
    let w = |d: f64| 1.0 / d.max(d_min);
    let gw = gt
        .iter()
        .map(|g| w(ego.distance_to(g.bbox.bev_center())))
        .collect();
    let dw = det
        .iter()
        .map(|d| w(ego.distance_to(d.bbox.bev_center())))
        .collect();
    (gw, dw)
}
