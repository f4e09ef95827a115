use detdrive::*;
use detdrive::planner_metrics::*;
use detdrive::types::{FrameRecord, Pose2D};

fn traj(points: &[[f64; 2]]) -> Trajectory {
    Trajectory {
        waypoints: points.to_vec(),
        timestep: 0.5,
    }
}

fn route(pairs: Vec<Option<(Trajectory, Trajectory)>>) -> RouteLog {
    RouteLog {
        route_id: "r".into(),
        detector_id: "d".into(),
        timestep: 0.1,
        route_completion: 100.0,
        infractions: vec![],
        frames: pairs
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = p.unzip();
                FrameRecord {
                    frame_index: i as u64,
                    time: i as f64 * 0.1,
                    ego_pose: Pose2D {
                        position: [0.0, 0.0],
                        heading: 0.0,
                    },
                    gt_objects: vec![],
                    detections: vec![],
                    traj_gt_conditioned: a,
                    traj_perception_conditioned: b,
                }
            })
            .collect(),
    }
}

#[test]
fn frame_examples() {
    let a = traj(&[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
    assert_eq!(frame_ade(&a, &a).unwrap(), 0.0);
    assert_eq!(frame_fde(&a, &a).unwrap(), 0.0);
    let shifted = traj(&[[2.0, 0.0], [3.0, 0.0], [4.0, 0.0]]);
    assert_eq!(frame_ade(&a, &shifted).unwrap(), 1.0);
    let two_a = traj(&[[0.0, 0.0], [0.0, 0.0]]);
    let two_b = traj(&[[1.0, 0.0], [0.0, 3.0]]);
    assert_eq!(frame_ade(&two_a, &two_b).unwrap(), 2.0);
    let first_only = traj(&[[9.0, 9.0], [2.0, 0.0], [3.0, 0.0]]);
    assert_eq!(frame_fde(&a, &first_only).unwrap(), 0.0);
    assert_eq!(frame_fde(&traj(&[[0.0, 0.0]]), &traj(&[[3.0, 4.0]])).unwrap(), 5.0);
    assert!(matches!(
        frame_ade(&a, &two_a),
        Err(Error::LengthMismatch(3, 2))
    ));
}

#[test]
fn route_examples() {
    let base = traj(&[[0.0, 0.0], [1.0, 0.0]]);
    let off = |d: f64| traj(&[[0.0, d], [1.0, d]]);
    let r = route(vec![
        Some((base.clone(), off(0.0))),
        None,
        Some((base.clone(), off(1.0))),
        Some((base.clone(), off(2.0))),
    ]);
    assert_eq!(route_ade(&r).unwrap(), 1.0);
    assert_eq!(route_fde(&r).unwrap(), 1.0);
    let same = route(vec![Some((base.clone(), base.clone())); 3]);
    assert_eq!(route_ade(&same).unwrap(), 0.0);
    assert!(matches!(route_ade(&route(vec![None, None])), Err(Error::NoTrajectories)));
}

proptest::proptest! {
    #[test]
    fn invariants(
        pts in proptest::collection::vec(proptest::array::uniform4(-20.0f64..20.0), 1..10),
        shift in proptest::array::uniform2(-100.0f64..100.0),
    ) {
        let a = Trajectory { waypoints: pts.iter().map(|p| [p[0], p[1]]).collect(), timestep: 0.5 };
        let b = Trajectory { waypoints: pts.iter().map(|p| [p[2], p[3]]).collect(), timestep: 0.5 };
        let ade = frame_ade(&a, &b).unwrap();
        let fde = frame_fde(&a, &b).unwrap();
        let errs: Vec<f64> = a.waypoints.iter().zip(&b.waypoints).map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1])).collect();
        let max = errs.iter().cloned().fold(0.0, f64::max);
        proptest::prop_assert!(ade >= 0.0 && ade <= max + 1e-12);
        proptest::prop_assert_eq!(fde, *errs.last().unwrap());
        let mv = |t: &Trajectory| Trajectory {
            waypoints: t.waypoints.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect(),
            timestep: t.timestep,
        };
        proptest::prop_assert!((frame_ade(&mv(&a), &mv(&b)).unwrap() - ade).abs() < 1e-9);
        proptest::prop_assert!((frame_fde(&mv(&a), &mv(&b)).unwrap() - fde).abs() < 1e-9);
    }
}
