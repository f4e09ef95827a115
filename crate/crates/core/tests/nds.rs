use std::f64::consts::PI;
use detdrive::ap::TruePositive;
use detdrive::matching::Criterion;
mod common;

use detdrive::*;
use detdrive::nds::*;
use detdrive::ap::mean_ap;
use common::{det_at, gt_at};
use detdrive::matching::IouKind;
use detdrive::types::{Detection, GroundTruthObject, OrientedBox3D, Pose2D};

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

fn pair(gt: GroundTruthObject, det: Detection) -> TruePositive {
    TruePositive {
        gt,
        det,
        gt_weight: 1.0,
    }
}

#[test]
fn center_distance_ap_examples() {
    let dims = [4.0, 2.0, 1.5];
    let gts = vec![gt_at(10.0, 0.0, dims), gt_at(20.0, 5.0, dims)];
    let perfect = vec![frame(
        gts.clone(),
        vec![det_at(10.0, 0.0, dims, 0.9), det_at(20.0, 5.0, dims, 0.8)],
    )];
    assert_eq!(center_distance_ap(&perfect, 1.0).unwrap(), 1.0);
    let offset = vec![frame(
        gts.clone(),
        vec![det_at(11.5, 0.0, dims, 0.9), det_at(20.0, 6.5, dims, 0.8)],
    )];
    assert_eq!(center_distance_ap(&offset, 1.0).unwrap(), 0.0);
    let tiny = [0.1, 0.1, 0.1];
    let decoupled = vec![frame(
        gts,
        vec![det_at(10.9, 0.0, tiny, 0.9), det_at(20.0, 5.9, tiny, 0.8)],
    )];
    assert_eq!(center_distance_ap(&decoupled, 1.0).unwrap(), 1.0);
    let iou_ap = mean_ap(
        &decoupled,
        Criterion::Iou {
            threshold: 0.7,
            kind: IouKind::ThreeD,
        },
    )
    .unwrap()
    .ap;
    assert_eq!(iou_ap, 0.0);
}

#[test]
fn tp_error_examples() {
    let cfg = NdsConfig::default();
    let dims = [4.0, 2.0, 1.5];
    let mut g = gt_at(10.0, 0.0, dims);
    g.velocity = [3.0, 0.0];
    let mut d = det_at(10.0, 0.0, dims, 0.9);
    d.velocity = Some([3.0, 0.0]);
    let e = tp_errors(&[pair(g.clone(), d.clone())], &cfg);
    assert_eq!((e.ate, e.ase, e.aoe, e.ave, e.no_tp), (0.0, 0.0, 0.0, 0.0, false));

    d.bbox = OrientedBox3D::new([10.5, 0.0, 0.0], dims, std::f64::consts::FRAC_PI_2).unwrap();
    d.velocity = Some([5.0, 0.0]);
    let e = tp_errors(&[pair(g.clone(), d.clone())], &cfg);
    assert!((e.ate - 0.5).abs() < 1e-12);
    assert!(e.ase.abs() < 1e-12);
    assert!((e.aoe - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((e.ave - 2.0).abs() < 1e-12);

    let big = gt_at(0.0, 0.0, [4.0, 2.0, 2.0]);
    let small = det_at(0.0, 0.0, [2.0, 2.0, 2.0], 0.5);
    assert!((tp_errors(&[pair(big, small)], &cfg).ase - 0.5).abs() < 1e-15);
}

#[test]
fn no_tp_reports_caps() {
    let cfg = NdsConfig::default();
    let e = tp_errors(&[], &cfg);
    assert!(e.no_tp);
    assert_eq!(e.normalized(&cfg), [1.0; 4]);
    assert_eq!(nds(0.0, &e, &cfg), 0.0);
}

#[test]
fn missing_velocity_is_excluded_from_ave() {
    let cfg = NdsConfig::default();
    let dims = [4.0, 2.0, 1.5];
    let g = gt_at(0.0, 0.0, dims);
    let mut with_v = det_at(0.0, 0.0, dims, 0.9);
    with_v.velocity = Some([1.0, 0.0]);
    let without = det_at(0.0, 0.0, dims, 0.8);
    let e = tp_errors(&[pair(g.clone(), with_v), pair(g.clone(), without.clone())], &cfg);
    assert_eq!(e.ave, 1.0);
    assert_eq!(tp_errors(&[pair(g, without)], &cfg).ave, cfg.v_cap);
}

#[test]
fn composite_examples() {
    let cfg = NdsConfig::default();
    let perfect = TPErrors {
        ate: 0.0,
        ase: 0.0,
        aoe: 0.0,
        ave: 0.0,
        no_tp: false,
    };
    assert_eq!(nds(1.0, &perfect, &cfg), 1.0);
    let worst = TPErrors {
        ate: 3.0,
        ase: 1.0,
        aoe: PI,
        ave: 50.0,
        no_tp: false,
    };
    assert_eq!(nds(0.0, &worst, &cfg), 0.0);
    // normalized (0.2, 0.5, 0.1, 0.4)
    let e = TPErrors {
        ate: 0.2,
        ase: 0.5,
        aoe: 0.1 * PI,
        ave: 4.0,
        no_tp: false,
    };
    assert!((nds(0.8, &e, &cfg) - 0.75).abs() < 1e-12);
    let off = NdsConfig {
        tp_weights: [0.0; 4],
        ..cfg
    };
    assert_eq!(nds(0.8, &e, &off), 0.8);
}

#[test]
fn inverse_distance_weighting_of_errors() {
    let cfg = NdsConfig::default();
    let dims = [4.0, 2.0, 1.5];
    let near = gt_at(5.0, 0.0, dims);
    let far = gt_at(50.0, 0.0, dims);
    let exact = |g: &GroundTruthObject, c: f64| {
        let mut d = det_at(g.bbox.center[0], 0.0, dims, c);
        d.velocity = Some([0.0, 0.0]);
        d
    };
    let shifted = |g: &GroundTruthObject, c: f64| {
        let mut d = exact(g, c);
        d.bbox.center[1] = 0.8;
        d
    };
    let far_bad = vec![frame(
        vec![near.clone(), far.clone()],
        vec![exact(&near, 0.9), shifted(&far, 0.8)],
    )];
    let plain = evaluate_nds(&far_bad, &cfg).unwrap().nds;
    let weighted = id_nds(&far_bad, &cfg, 1.0).unwrap().nds;
    assert!(weighted > plain, "{weighted} vs {plain}");

    let near_bad = vec![frame(
        vec![near.clone(), far.clone()],
        vec![shifted(&near, 0.9), exact(&far, 0.8)],
    )];
    let plain = evaluate_nds(&near_bad, &cfg).unwrap().nds;
    let weighted = id_nds(&near_bad, &cfg, 1.0).unwrap().nds;
    assert!(weighted < plain, "{weighted} vs {plain}");

    let uniform = vec![frame(
        vec![gt_at(10.0, 0.0, dims), gt_at(-10.0, 0.0, dims)],
        vec![shifted(&gt_at(10.0, 0.0, dims), 0.9), exact(&gt_at(-10.0, 0.0, dims), 0.8)],
    )];
    let a = evaluate_nds(&uniform, &cfg).unwrap().nds;
    let b = id_nds(&uniform, &cfg, 1.0).unwrap().nds;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn recall_sweep_on_perfect_and_empty() {
    let cfg = NdsConfig {
        recall_sweep_mode: true,
        ..NdsConfig::default()
    };
    let dims = [4.0, 2.0, 1.5];
    let mut d = det_at(10.0, 0.0, dims, 0.9);
    d.velocity = Some([0.0, 0.0]);
    let s = evaluate_nds(&[frame(vec![gt_at(10.0, 0.0, dims)], vec![d])], &cfg).unwrap();
    assert_eq!(s.nds, 1.0);
    let s = evaluate_nds(&[frame(vec![gt_at(10.0, 0.0, dims)], vec![])], &cfg).unwrap();
    assert_eq!(s.nds, 0.0);
    assert!(s.errors.no_tp);
}

proptest::proptest! {
    #[test]
    fn composite_bounds_and_monotonicity(
        map in 0.0f64..=1.0,
        ate in 0.0f64..2.0, ase in 0.0f64..=1.0, aoe in 0.0f64..=PI, ave in 0.0f64..20.0,
        bump in 0.0f64..1.0, which in 0usize..4,
    ) {
        let cfg = NdsConfig::default();
        let e = TPErrors { ate, ase, aoe, ave, no_tp: false };
        let v = nds(map, &e, &cfg);
        proptest::prop_assert!((0.0..=1.0).contains(&v));
        let mut worse = e;
        match which {
            0 => worse.ate += bump,
            1 => worse.ase = (worse.ase + bump).min(1.0),
            2 => worse.aoe = (worse.aoe + bump).min(PI),
            _ => worse.ave += bump,
        }
        proptest::prop_assert!(nds(map, &worse, &cfg) <= v + 1e-12);
        proptest::prop_assert!(nds((map + bump).min(1.0), &e, &cfg) + 1e-12 >= v);
        let off = NdsConfig { tp_weights: [0.0; 4], ..cfg };
        proptest::prop_assert!((nds(map, &e, &off) - map).abs() < 1e-15);
    }
}
