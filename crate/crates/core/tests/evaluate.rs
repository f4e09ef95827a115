use detdrive::correlation::Metric;
use detdrive::evaluate::{evaluate_route, postprocess, EvalConfig, TrackerMode};
use detdrive::synth::{generate_script, simulate_route, NoiseModel, ScenarioConfig, SimConfig};
use detdrive::tracking::TrackerConfig;
use detdrive::{
    ClassId, Detection, FrameRecord, GroundTruthObject, InfractionEvent, InfractionKind, OrientedBox3D, Pose2D,
    RouteLog,
};

fn car(x: f64) -> OrientedBox3D {
    OrientedBox3D::new([x, 0.0, 0.8], [4.0, 2.0, 1.6], 0.0).unwrap()
}

fn route(gt: bool, det: Option<(f64, Option<[f64; 2]>)>, n: usize) -> RouteLog {
    let frames = (0..n)
        .map(|k| FrameRecord {
            frame_index: k as u64,
            time: k as f64 * 0.1,
            ego_pose: Pose2D {
                position: [0.0, 0.0],
                heading: 0.0,
            },
            gt_objects: if gt {
                vec![GroundTruthObject {
                    bbox: car(10.0),
                    class_id: ClassId::new("car"),
                    object_id: 1,
                    velocity: [0.0, 0.0],
                    distance_to_ego: 10.0,
                }]
            } else {
                Vec::new()
            },
            detections: det
                .map(|(conf, velocity)| Detection {
                    bbox: car(10.0),
                    confidence: conf,
                    class_id: ClassId::new("car"),
                    velocity,
                })
                .into_iter()
                .collect(),
            traj_gt_conditioned: None,
            traj_perception_conditioned: None,
        })
        .collect();
    RouteLog {
        route_id: "r".into(),
        detector_id: "d".into(),
        timestep: 0.1,
        route_completion: 80.0,
        infractions: vec![InfractionEvent {
            kind: InfractionKind::CollisionPedestrian,
            frame_index: 0,
        }],
        frames,
    }
}

#[test]
fn metric_serde_names_match_column_names() {
    for m in Metric::ALL {
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, format!("\"{}\"", m.name()));
        assert_eq!(serde_json::from_str::<Metric>(&json).unwrap(), m);
    }
}

#[test]
fn perfect_static_route() {
    let log = route(true, Some((0.9, Some([0.0, 0.0]))), 5);
    let ev = evaluate_route(&log, &EvalConfig::default(), &Metric::ALL).unwrap();
    let v = &ev.row.values;
    for m in [Metric::Ap, Metric::Aos, Metric::IdAp, Metric::CdAp, Metric::Nds, Metric::IdNds] {
        assert_eq!(v[&m], 1.0, "{m}");
    }
    assert_eq!(v[&Metric::Ate], 0.0);
    assert_eq!(v[&Metric::Rc], 80.0);
    assert_eq!(v[&Metric::Collisions], 1.0);
    assert!((v[&Metric::Is] - 0.5).abs() < 1e-12);
    assert!((v[&Metric::Ds] - 40.0).abs() < 1e-12);
    // no trajectories logged
    assert!(!v.contains_key(&Metric::Ade) && !v.contains_key(&Metric::Fde));
    assert!(ev.warnings.iter().any(|w| w.metric == Metric::Ade));
}

#[test]
fn route_without_ground_truth_leaves_ap_cells_empty() {
    let log = route(false, Some((0.9, Some([0.0, 0.0]))), 3);
    let ev = evaluate_route(&log, &EvalConfig::default(), &[Metric::Ap, Metric::Nds, Metric::Ds]).unwrap();
    assert!(!ev.row.values.contains_key(&Metric::Ap));
    assert!(!ev.row.values.contains_key(&Metric::Nds));
    assert!(ev.row.values.contains_key(&Metric::Ds));
    let warned: Vec<Metric> = ev.warnings.iter().map(|w| w.metric).collect();
    assert_eq!(warned, [Metric::Ap, Metric::Nds]);
}

#[test]
fn no_true_positives_write_caps_and_warn() {
    let log = route(true, None, 3);
    let ev = evaluate_route(&log, &EvalConfig::default(), &[Metric::Ap, Metric::Ate, Metric::Aoe]).unwrap();
    assert_eq!(ev.row.values[&Metric::Ap], 0.0);
    assert_eq!(ev.row.values[&Metric::Ate], 1.0);
    assert_eq!(ev.row.values[&Metric::Aoe], std::f64::consts::PI);
    assert_eq!(ev.warnings.len(), 2);
}

#[test]
fn only_requested_metrics_are_filled() {
    let log = route(true, Some((0.9, Some([0.0, 0.0]))), 3);
    let ev = evaluate_route(&log, &EvalConfig::default(), &[Metric::Aos]).unwrap();
    assert_eq!(ev.row.values.keys().copied().collect::<Vec<_>>(), [Metric::Aos]);
}

#[test]
fn tracker_gate_applies_to_raw_detections() {
    let raw = route(true, Some((0.29, None)), 5);
    let ev = evaluate_route(&raw, &EvalConfig::default(), &[Metric::Ap]).unwrap();
    assert_eq!(ev.row.values[&Metric::Ap], 0.0);

    let never = EvalConfig {
        tracker_mode: TrackerMode::Never,
        ..EvalConfig::default()
    };
    let ev = evaluate_route(&raw, &never, &[Metric::Ap]).unwrap();
    assert_eq!(ev.row.values[&Metric::Ap], 1.0);
}

#[test]
fn postprocess_fills_velocities() {
    let raw = route(true, Some((0.8, None)), 3);
    let frames = postprocess(&raw, &TrackerConfig::default()).unwrap();
    assert!(frames[0].detections[0].velocity.is_none());
    assert_eq!(frames[1].detections[0].velocity, Some([0.0, 0.0]));
    assert_eq!(frames[2].detections[0].velocity, Some([0.0, 0.0]));
}

#[test]
fn closed_loop_perfect_detector_is_exact() {
    let sc = ScenarioConfig::default();
    let (log, _) =
        simulate_route(&generate_script(&sc, 5), &NoiseModel::zero(0), "p", &SimConfig::default()).unwrap();
    let ev = evaluate_route(&log, &EvalConfig::default(), &Metric::ALL).unwrap();
    assert!(ev.warnings.is_empty(), "{:?}", ev.warnings);
    let v = &ev.row.values;
    for m in [Metric::Ap, Metric::Aos, Metric::IdAp, Metric::CdAp, Metric::Nds, Metric::IdNds] {
        assert_eq!(v[&m], 1.0, "{m}");
    }
    for m in [Metric::Ate, Metric::Ase, Metric::Aoe, Metric::Ave, Metric::Ade, Metric::Fde] {
        assert_eq!(v[&m], 0.0, "{m}");
    }
    assert_eq!(v[&Metric::Ds], 100.0);
}
