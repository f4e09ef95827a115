//! Brute-force reference implementations. Each one re-derives its quantity
//! from the definition with deliberately naive code and shares no kernel
//! with the module it checks.

use std::collections::BTreeMap;

use rand::Rng;

use super::stream;
use crate::matching::Criterion;
use crate::types::{FrameRecord, OrientedBox3D, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub iou: f64,
    /// Binomial standard error of the intersection share of union hits.
    pub std_error: f64,
    pub samples: usize,
}

fn corners(b: &OrientedBox3D) -> [Vec2; 4] {
    let (c, s) = (b.yaw.cos(), b.yaw.sin());
    let (l, w) = (b.dims[0] / 2.0, b.dims[1] / 2.0);
    let mut out = [[0.0; 2]; 4];
    for (i, (a, d)) in [(l, w), (-l, w), (-l, -w), (l, -w)].into_iter().enumerate() {
        out[i] = [b.center[0] + a * c - d * s, b.center[1] + a * s + d * c];
    }
    out
}

/// Center, heading cosine and sine, and half extents of a footprint.
struct Frame2 {
    center: Vec2,
    c: f64,
    s: f64,
    half: Vec2,
}

impl Frame2 {
    fn of(b: &OrientedBox3D) -> Self {
        Frame2 {
            center: [b.center[0], b.center[1]],
            c: b.yaw.cos(),
            s: b.yaw.sin(),
            half: [b.dims[0] / 2.0, b.dims[1] / 2.0],
        }
    }

    fn inside(&self, p: Vec2) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let along = dx * self.c + dy * self.s;
        let across = -dx * self.s + dy * self.c;
        along.abs() <= self.half[0] && across.abs() <= self.half[1]
    }
}

/// Monte-Carlo BEV IoU: jittered-uniform points over the axis-aligned
/// bounding box of both footprints, one point per cell of a square grid.
pub fn oracle_mc_iou(a: &OrientedBox3D, b: &OrientedBox3D, samples: usize, seed: u64) -> McEstimate {
    let pts: Vec<Vec2> = corners(a).into_iter().chain(corners(b)).collect();
    let x0 = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let x1 = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let y0 = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let y1 = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);

    let m = (samples as f64).sqrt().ceil() as usize;
    let (cw, ch) = ((x1 - x0) / m as f64, (y1 - y0) / m as f64);
    let (fa, fb) = (Frame2::of(a), Frame2::of(b));
    let mut rng = stream(seed, 0);
    let (mut both, mut either) = (0usize, 0usize);
    for i in 0..m {
        for j in 0..m {
            let p = [
                x0 + (i as f64 + rng.random::<f64>()) * cw,
                y0 + (j as f64 + rng.random::<f64>()) * ch,
            ];
            let (ia, ib) = (fa.inside(p), fb.inside(p));
            if ia && ib {
                both += 1;
            }
            if ia || ib {
                either += 1;
            }
        }
    }
    let iou = if either == 0 { 0.0 } else { both as f64 / either as f64 };
    let std_error = if either == 0 {
        0.0
    } else {
        (iou * (1.0 - iou) / either as f64).sqrt()
    };
    McEstimate {
        iou,
        std_error,
        samples: m * m,
    }
}

fn distance(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let dx = a.center[0] - b.center[0];
    let dy = a.center[1] - b.center[1];
    (dx * dx + dy * dy).sqrt()
}

/// Greedy matching of the detections at or above `cutoff` in one frame of
/// one class; returns (true positives, false positives).
fn count_at_cutoff(frame: &FrameRecord, class: &str, cutoff: f64, criterion: Criterion) -> (usize, usize) {
    let gts: Vec<&OrientedBox3D> = frame
        .gt_objects
        .iter()
        .filter(|g| g.class_id.0 == class)
        .map(|g| &g.bbox)
        .collect();
    let mut dets: Vec<(usize, f64, &OrientedBox3D)> = frame
        .detections
        .iter()
        .enumerate()
        .filter(|(_, d)| d.class_id.0 == class && d.confidence >= cutoff)
        .map(|(i, d)| (i, d.confidence, &d.bbox))
        .collect();
    // selection sort on (confidence desc, index asc)
    for i in 0..dets.len() {
        let mut best = i;
        for j in i + 1..dets.len() {
            if dets[j].1 > dets[best].1 || (dets[j].1 == dets[best].1 && dets[j].0 < dets[best].0) {
                best = j;
            }
        }
        dets.swap(i, best);
    }
    let mut used = vec![false; gts.len()];
    let (mut tp, mut fp) = (0, 0);
    for (_, _, det) in dets {
        let mut choice: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] {
                continue;
            }
            let better = match criterion {
                Criterion::CenterDistance { threshold } => {
                    let v = distance(gt, det);
                    (v <= threshold && choice.is_none_or(|(_, c)| v < c)).then_some(v)
                }
                Criterion::Iou { threshold, kind } => {
                    let v = kind.iou(gt, det);
                    (v >= threshold && choice.is_none_or(|(_, c)| v > c)).then_some(v)
                }
            };
            if let Some(v) = better {
                choice = Some((g, v));
            }
        }
        match choice {
            Some((g, _)) => {
                used[g] = true;
                tp += 1;
            }
            None => fp += 1,
        }
    }
    (tp, fp)
}

/// Class-mean AP over `levels` recall levels, rebuilt by enumerating every
/// confidence cutoff and re-matching from scratch at each one.
pub fn oracle_ap(frames: &[FrameRecord], criterion: Criterion, levels: usize) -> Option<f64> {
    let mut gt_count: BTreeMap<&str, usize> = BTreeMap::new();
    for f in frames {
        for g in &f.gt_objects {
            *gt_count.entry(g.class_id.0.as_str()).or_default() += 1;
        }
    }
    if gt_count.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for (&class, &n_gt) in &gt_count {
        let mut cutoffs: Vec<f64> = frames
            .iter()
            .flat_map(|f| &f.detections)
            .filter(|d| d.class_id.0 == class)
            .map(|d| d.confidence)
            .collect();
        cutoffs.sort_by(|a, b| b.total_cmp(a));
        cutoffs.dedup();
        let mut curve: Vec<(f64, f64)> = Vec::new();
        for c in cutoffs {
            let (mut tp, mut fp) = (0, 0);
            for f in frames {
                let (t, p) = count_at_cutoff(f, class, c, criterion);
                tp += t;
                fp += p;
            }
            curve.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
        }
        let mut sum = 0.0;
        for k in 1..=levels {
            let level = k as f64 / levels as f64;
            let best = curve
                .iter()
                .filter(|(r, _)| *r >= level - 1e-12)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max);
            sum += best;
        }
        total += sum / levels as f64;
    }
    Some(total / gt_count.len() as f64)
}

fn search(
    cost: &[Vec<f64>],
    gate: f64,
    row: usize,
    used: &mut Vec<bool>,
    count: usize,
    total: f64,
    best: &mut (usize, f64),
) {
    if row == cost.len() {
        if count > best.0 || (count == best.0 && total < best.1) {
            *best = (count, total);
        }
        return;
    }
    search(cost, gate, row + 1, used, count, total, best);
    for j in 0..cost[row].len() {
        let c = cost[row][j];
        if used[j] || !c.is_finite() || c > gate {
            continue;
        }
        used[j] = true;
        search(cost, gate, row + 1, used, count + 1, total + c, best);
        used[j] = false;
    }
}

/// Exhaustive search over all partial one-to-one assignments: the largest
/// number of admissible pairs, then the smallest total cost summed in row
/// order. Returns (pairs, cost).
pub fn oracle_assignment(cost: &[Vec<f64>], gate: f64) -> (usize, f64) {
    let cols = cost.first().map_or(0, Vec::len);
    let mut best = (0, 0.0);
    search(cost, gate, 0, &mut vec![false; cols], 0, 0.0, &mut best);
    best
}
