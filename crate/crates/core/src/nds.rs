//! nuScenes-style detection score without the attribute term.
//!
//! The composite is `(4·mAP + Σ wᵢ·(1 − min(1, xᵢ))) / (4 + Σ wᵢ)` over the
//! normalized translation, scale, orientation and velocity errors. With unit
//! weights this is the usual eighth-weighted sum; with zero weights it reduces
//! to the center-distance mAP.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ap::{ap_interpolated, collect_matches, ClassMatches, TruePositive, Weighting, RECALL_LEVELS};
use crate::error::{Error, Result};
use crate::geometry::{aligned_iou, center_distance_bev, yaw_delta};
use crate::matching::Criterion;
use crate::types::{ClassId, FrameRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NdsConfig {
    /// Center-distance TP threshold, meters.
    pub threshold_m: f64,
    /// Velocity error mapped to the worst normalized score, m/s.
    pub v_cap: f64,
    /// Weights of the (ATE, ASE, AOE, AVE) terms.
    pub tp_weights: [f64; 4],
    /// Average TP errors over recall levels ≥ 10% instead of over all TPs.
    pub recall_sweep_mode: bool,
}

impl Default for NdsConfig {
    fn default() -> Self {
        NdsConfig {
            threshold_m: 1.0,
            v_cap: 10.0,
            tp_weights: [1.0; 4],
            recall_sweep_mode: false,
        }
    }
}

impl NdsConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.threshold_m > 0.0) {
            return Err("nds.threshold_m must be positive".into());
        }
        if !(self.v_cap > 0.0) {
            return Err("nds.v_cap must be positive".into());
        }
        if self.tp_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err("nds.tp_weights must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TPErrors {
    pub ate: f64,
    pub ase: f64,
    pub aoe: f64,
    pub ave: f64,
    /// Set when no true positive existed and the errors are worst-case caps.
    pub no_tp: bool,
}

impl TPErrors {
    pub fn caps(cfg: &NdsConfig) -> Self {
        TPErrors {
            ate: cfg.threshold_m,
            ase: 1.0,
            aoe: PI,
            ave: cfg.v_cap,
            no_tp: true,
        }
    }

    /// Errors mapped onto score space, each 0 for perfect and ≥ 1 for worst.
    pub fn normalized(&self, cfg: &NdsConfig) -> [f64; 4] {
        [
            self.ate / cfg.threshold_m,
            self.ase,
            self.aoe / PI,
            self.ave / cfg.v_cap,
        ]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairErrors {
    ate: f64,
    ase: f64,
    aoe: f64,
    ave: Option<f64>,
}

fn pair_errors(tp: &TruePositive) -> PairErrors {
    PairErrors {
        ate: center_distance_bev(&tp.gt.bbox, &tp.det.bbox),
        ase: 1.0 - aligned_iou(&tp.gt.bbox, &tp.det.bbox),
        aoe: yaw_delta(tp.gt.bbox.yaw, tp.det.bbox.yaw),
        ave: tp.det.velocity.map(|v| {
            (v[0] - tp.gt.velocity[0]).hypot(v[1] - tp.gt.velocity[1])
        }),
    }
}

#[derive(Default)]
struct RunningMean {
    ate: f64,
    ase: f64,
    aoe: f64,
    ave: f64,
    w: f64,
    w_vel: f64,
}

impl RunningMean {
    fn add(&mut self, e: &PairErrors, w: f64) {
        self.ate += w * e.ate;
        self.ase += w * e.ase;
        self.aoe += w * e.aoe;
        self.w += w;
        if let Some(v) = e.ave {
            self.ave += w * v;
            self.w_vel += w;
        }
    }

    fn get(&self, cfg: &NdsConfig) -> TPErrors {
        if self.w <= 0.0 {
            return TPErrors::caps(cfg);
        }
        TPErrors {
            ate: self.ate / self.w,
            ase: (self.ase / self.w).clamp(0.0, 1.0),
            aoe: (self.aoe / self.w).clamp(0.0, PI),
            ave: if self.w_vel > 0.0 {
                self.ave / self.w_vel
            } else {
                cfg.v_cap
            },
            no_tp: false,
        }
    }
}

/// Means of the per-pair errors, weighted by each pair's ground-truth weight.
///
/// Pairs whose detection carries no velocity are left out of the AVE mean; if
/// none carries one, AVE takes the cap.
pub fn tp_errors(pairs: &[TruePositive], cfg: &NdsConfig) -> TPErrors {
    let mut acc = RunningMean::default();
    for tp in pairs {
        acc.add(&pair_errors(tp), tp.gt_weight);
    }
    acc.get(cfg)
}

/// Recall-swept variant: cumulative error means along descending confidence,
/// sampled at recall levels 0.10, 0.11, … up to the achieved recall and averaged.
pub fn tp_errors_recall_sweep(matches: &ClassMatches, cfg: &NdsConfig) -> TPErrors {
    if matches.gt_mass <= 0.0 {
        return TPErrors::caps(cfg);
    }
    let mut order: Vec<&TruePositive> = matches.true_positives.iter().collect();
    order.sort_by(|a, b| b.det.confidence.total_cmp(&a.det.confidence));

    let mut acc = RunningMean::default();
    let mut recall = 0.0;
    let mut samples: Vec<(f64, TPErrors)> = Vec::with_capacity(order.len());
    for tp in order {
        acc.add(&pair_errors(tp), tp.gt_weight);
        recall += tp.gt_weight / matches.gt_mass;
        samples.push((recall, acc.get(cfg)));
    }

    let mut sum = RunningMean::default();
    let mut idx = 0;
    for k in 10..=100 {
        let level = k as f64 / 100.0;
        while idx < samples.len() && samples[idx].0 + 1e-12 < level {
            idx += 1;
        }
        let Some((_, e)) = samples.get(idx) else { break };
        sum.add(
            &PairErrors {
                ate: e.ate,
                ase: e.ase,
                aoe: e.aoe,
                ave: Some(e.ave),
            },
            1.0,
        );
    }
    sum.get(cfg)
}

pub fn nds(map_cd: f64, errors: &TPErrors, cfg: &NdsConfig) -> f64 {
    let norm = errors.normalized(cfg);
    let mut num = 4.0 * map_cd;
    let mut den = 4.0;
    for (w, x) in cfg.tp_weights.iter().zip(norm) {
        num += w * (1.0 - x.min(1.0));
        den += w;
    }
    (num / den).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdsSummary {
    pub map_cd: f64,
    pub errors: TPErrors,
    pub nds: f64,
}

pub fn criterion(cfg: &NdsConfig) -> Criterion {
    Criterion::CenterDistance {
        threshold: cfg.threshold_m,
    }
}

/// Class-averaged center-distance AP, TP errors and the composite.
pub fn summarize(
    classes: &BTreeMap<ClassId, ClassMatches>,
    cfg: &NdsConfig,
    recall_levels: usize,
) -> Result<NdsSummary> {
    let mut n = 0usize;
    let mut map = 0.0;
    let mut err = [0.0; 4];
    let mut all_no_tp = true;
    for m in classes.values() {
        if m.gt_mass <= 0.0 {
            continue;
        }
        map += ap_interpolated(&m.curve()?, recall_levels);
        let e = if cfg.recall_sweep_mode {
            tp_errors_recall_sweep(m, cfg)
        } else {
            tp_errors(&m.true_positives, cfg)
        };
        all_no_tp &= e.no_tp;
        for (acc, v) in err.iter_mut().zip([e.ate, e.ase, e.aoe, e.ave]) {
            *acc += v;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedRecall);
    }
    let k = n as f64;
    let errors = TPErrors {
        ate: err[0] / k,
        ase: err[1] / k,
        aoe: err[2] / k,
        ave: err[3] / k,
        no_tp: all_no_tp,
    };
    let map_cd = map / k;
    Ok(NdsSummary {
        map_cd,
        errors,
        nds: nds(map_cd, &errors, cfg),
    })
}

pub fn center_distance_ap(frames: &[FrameRecord], threshold: f64) -> Result<f64> {
    let cfg = NdsConfig {
        threshold_m: threshold,
        ..NdsConfig::default()
    };
    let classes = collect_matches(frames, criterion(&cfg), Weighting::Uniform);
    Ok(summarize(&classes, &cfg, RECALL_LEVELS)?.map_cd)
}

pub fn evaluate_nds(frames: &[FrameRecord], cfg: &NdsConfig) -> Result<NdsSummary> {
    summarize(
        &collect_matches(frames, criterion(cfg), Weighting::Uniform),
        cfg,
        RECALL_LEVELS,
    )
}

/// NDS with inverse-distance-weighted PR accumulation and TP error means.
pub fn id_nds(frames: &[FrameRecord], cfg: &NdsConfig, d_min: f64) -> Result<NdsSummary> {
    summarize(
        &collect_matches(frames, criterion(cfg), Weighting::InverseDistance { d_min }),
        cfg,
        RECALL_LEVELS,
    )
}
