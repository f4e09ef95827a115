use detdrive::matching::Criterion;
mod common;

use detdrive::*;
use detdrive::ap::*;
use detdrive::matching::IouKind;
use common::{det_at, gt_at};
use detdrive::types::Pose2D;

fn tp(conf: f64) -> ScoredDetection {
    ScoredDetection {
        confidence: conf,
        weight: 1.0,
        matched_gt_weight: Some(1.0),
        orientation_similarity: 1.0,
    }
}

fn fp(conf: f64) -> ScoredDetection {
    ScoredDetection {
        matched_gt_weight: None,
        orientation_similarity: 0.0,
        ..tp(conf)
    }
}

fn frame(gt: Vec<GroundTruthObject>, det: Vec<Detection>) -> FrameRecord {
    FrameRecord {
        frame_index: 0,
        time: 0.0,
        ego_pose: Pose2D {
            position: [0.0, 0.0],
            heading: 0.0,
        },
        gt_objects: gt,
        detections: det,
        traj_gt_conditioned: None,
        traj_perception_conditioned: None,
    }
}

#[test]
fn pr_points() {
    let c = accumulate_pr(&[tp(0.9)], 1.0).unwrap();
    assert_eq!(c.points.len(), 1);
    assert_eq!((c.points[0].recall, c.points[0].precision), (1.0, 1.0));
    let c = accumulate_pr(&[fp(0.8), tp(0.9)], 1.0).unwrap();
    let pts: Vec<_> = c.points.iter().map(|p| (p.recall, p.precision)).collect();
    assert_eq!(pts, vec![(1.0, 1.0), (1.0, 0.5)]);
    assert!(matches!(accumulate_pr(&[tp(0.5)], 0.0), Err(Error::UndefinedRecall)));
}

#[test]
fn tied_confidences_form_one_point() {
    let c = accumulate_pr(&[tp(0.5), fp(0.5), tp(0.9)], 2.0).unwrap();
    assert_eq!(c.points.len(), 2);
    assert_eq!(c.points[1].precision, 2.0 / 3.0);
}

#[test]
fn ap40_examples() {
    assert_eq!(ap_40(&accumulate_pr(&[tp(0.9)], 1.0).unwrap()), 1.0);
    // recall 0.5 at precision 1: 20 of 40 levels
    assert_eq!(ap_40(&accumulate_pr(&[tp(0.9)], 2.0).unwrap()), 0.5);
    assert_eq!(ap_40(&accumulate_pr(&[fp(0.9)], 2.0).unwrap()), 0.0);
    assert_eq!(ap_40(&accumulate_pr(&[], 2.0).unwrap()), 0.0);
}

#[test]
fn aos_examples() {
    let flip = ScoredDetection {
        orientation_similarity: orientation_similarity(0.0, std::f64::consts::PI),
        ..tp(0.9)
    };
    let c = accumulate_pr(&[flip], 1.0).unwrap();
    assert_eq!(ap_40(&c), 1.0);
    assert!(aos(&c).abs() < 1e-15);
    let half = ScoredDetection {
        orientation_similarity: orientation_similarity(0.0, std::f64::consts::FRAC_PI_2),
        ..tp(0.9)
    };
    let c = accumulate_pr(&[half], 1.0).unwrap();
    assert!((aos(&c) - 0.5 * ap_40(&c)).abs() < 1e-15);
}

#[test]
fn id_ap_weighting() {
    let dims = [4.0, 2.0, 1.5];
    let near = gt_at(5.0, 0.0, dims);
    let far = gt_at(50.0, 0.0, dims);
    let crit = Criterion::Iou {
        threshold: 0.7,
        kind: IouKind::ThreeD,
    };

    let miss_far = vec![frame(
        vec![near.clone(), far.clone()],
        vec![det_at(5.0, 0.0, dims, 0.9)],
    )];
    let plain = mean_ap(&miss_far, crit).unwrap().ap;
    let weighted = id_ap(&miss_far, crit, 1.0).unwrap();
    assert_eq!(plain, 0.5);
    // recall mass 10/11 -> levels 1..=36 reached
    assert!((weighted - 36.0 / 40.0).abs() < 1e-12);
    assert!(weighted > plain);

    let miss_near = vec![frame(vec![near, far], vec![det_at(50.0, 0.0, dims, 0.9)])];
    let plain = mean_ap(&miss_near, crit).unwrap().ap;
    let weighted = id_ap(&miss_near, crit, 1.0).unwrap();
    // recall mass 1/11 -> levels 1..=3
    assert!((weighted - 3.0 / 40.0).abs() < 1e-12);
    assert!(weighted < plain);
}

#[test]
fn equidistant_objects_give_equal_id_ap() {
    let dims = [4.0, 2.0, 1.5];
    let frames = vec![frame(
        vec![gt_at(10.0, 0.0, dims), gt_at(0.0, 10.0, dims), gt_at(-10.0, 0.0, dims)],
        vec![det_at(10.0, 0.0, dims, 0.9), det_at(0.0, -10.0, dims, 0.8), det_at(-10.0, 0.0, dims, 0.7)],
    )];
    let crit = Criterion::CenterDistance { threshold: 1.0 };
    let plain = mean_ap(&frames, crit).unwrap().ap;
    let weighted = id_ap(&frames, crit, 1.0).unwrap();
    assert!((plain - weighted).abs() < 1e-12);
}

#[test]
fn classes_without_gt_are_skipped() {
    let dims = [4.0, 2.0, 1.5];
    let mut ped = det_at(30.0, 0.0, dims, 0.95);
    ped.class_id = ClassId::new("pedestrian");
    let frames = vec![frame(vec![gt_at(5.0, 0.0, dims)], vec![det_at(5.0, 0.0, dims, 0.9), ped])];
    let s = mean_ap(&frames, Criterion::CenterDistance { threshold: 1.0 }).unwrap();
    assert_eq!(s.ap, 1.0);
    assert!(matches!(
        mean_ap(&[frame(vec![], vec![])], Criterion::CenterDistance { threshold: 1.0 }),
        Err(Error::UndefinedRecall)
    ));
}

fn arb_samples() -> impl proptest::strategy::Strategy<Value = Vec<ScoredDetection>> {
    use proptest::prelude::*;
    proptest::collection::vec(
        (0u8..10, proptest::bool::ANY, 0.0f64..1.0, 0.1f64..2.0),
        0..12,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(c, is_tp, s, w)| ScoredDetection {
                confidence: c as f64 / 10.0,
                weight: w,
                matched_gt_weight: is_tp.then_some(w),
                orientation_similarity: if is_tp { s } else { 0.0 },
            })
            .collect()
    })
}

proptest::proptest! {
    #[test]
    fn ordering_and_monotonicity(samples in arb_samples(), extra_gt in 0.0f64..5.0) {
        let gt_mass: f64 = samples.iter().filter_map(|s| s.matched_gt_weight).sum::<f64>() + extra_gt + 0.1;
        let curve = accumulate_pr(&samples, gt_mass).unwrap();
        let ap = ap_40(&curve);
        let a = aos(&curve);
        proptest::prop_assert!((0.0..=1.0).contains(&ap));
        proptest::prop_assert!(a <= ap + 1e-12 && a >= 0.0);
        for w in curve.points.windows(2) {
            proptest::prop_assert!(w[0].recall <= w[1].recall);
        }
        // a TP above every false positive never lowers AP (uniform weights)
        let uniform: Vec<_> = samples.iter().map(|s| ScoredDetection {
            weight: 1.0,
            matched_gt_weight: s.matched_gt_weight.map(|_| 1.0),
            ..*s
        }).collect();
        let n_tp = uniform.iter().filter(|s| s.matched_gt_weight.is_some()).count() as f64;
        let gt = n_tp + 1.0 + extra_gt.floor();
        let before = ap_40(&accumulate_pr(&uniform, gt).unwrap());
        let mut more = uniform.clone();
        more.push(tp(1.5));
        let after = ap_40(&accumulate_pr(&more, gt).unwrap());
        proptest::prop_assert!(after + 1e-12 >= before);
    }
}
