use std::f64::consts::PI;

use detdrive::synth::{
    apply_noise, generate_scenario, generate_script, noise_ladder, noisy_detections, simulate_route, stream,
    NoiseModel, ObjectScript, ScenarioConfig, Segment, SimConfig, POSITION_QUANTUM, VELOCITY_QUANTUM,
};
use detdrive::{ClassId, GroundTruthObject, OrientedBox3D, Pose2D};

fn small() -> ScenarioConfig {
    ScenarioConfig {
        n_routes: 2,
        n_frames: 80,
        ..ScenarioConfig::default()
    }
}

fn origin() -> Pose2D {
    Pose2D {
        position: [0.0, 0.0],
        heading: 0.0,
    }
}

fn gt(x: f64, y: f64) -> GroundTruthObject {
    GroundTruthObject {
        bbox: OrientedBox3D::new([x, y, 0.8], [4.5, 2.0, 1.6], 0.3).unwrap(),
        class_id: ClassId::new("car"),
        object_id: 1,
        velocity: [0.0, 0.0],
        distance_to_ego: x.hypot(y),
    }
}

#[test]
fn scripts_are_deterministic_per_seed() {
    let cfg = small();
    assert_eq!(generate_script(&cfg, 1), generate_script(&cfg, 1));
    assert_ne!(generate_script(&cfg, 0).objects, generate_script(&cfg, 1).objects);
    let other = ScenarioConfig { seed: 8, ..cfg.clone() };
    assert_ne!(generate_script(&cfg, 0).objects, generate_script(&other, 0).objects);
}

#[test]
fn script_kinematics_are_quantized() {
    let cfg = ScenarioConfig::default();
    for r in 0..cfg.n_routes {
        for o in &generate_script(&cfg, r).objects {
            for v in o.start {
                assert_eq!((v / POSITION_QUANTUM).fract(), 0.0);
            }
            for s in &o.segments {
                for v in s.velocity {
                    assert_eq!((v / VELOCITY_QUANTUM).fract(), 0.0);
                }
            }
        }
    }
}

#[test]
fn zero_density_gives_empty_ground_truth() {
    let cfg = ScenarioConfig {
        density: 0.0,
        ..small()
    };
    let logs = generate_scenario(&cfg).unwrap();
    assert_eq!(logs.len(), 2);
    for log in &logs {
        assert_eq!(log.frames.len(), 80);
        assert!(log.frames.iter().all(|f| f.gt_objects.is_empty()));
    }
}

#[test]
fn constant_velocity_advances_per_frame() {
    let o = ObjectScript {
        object_id: 0,
        class_id: ClassId::new("car"),
        dims: [4.5, 2.0, 1.6],
        yaw: 0.0,
        start: [10.0, 0.0],
        segments: vec![Segment {
            start_frame: 0,
            velocity: [5.0, 0.0],
        }],
    };
    for k in 0..10 {
        let step = o.position(k + 1, 0.1)[0] - o.position(k, 0.1)[0];
        assert!((step - 0.5).abs() < 1e-12);
    }
    assert_eq!(o.velocity(3), [5.0, 0.0]);
}

#[test]
fn velocity_is_backward_difference_at_segment_switch() {
    let o = ObjectScript {
        object_id: 0,
        class_id: ClassId::new("car"),
        dims: [4.5, 2.0, 1.6],
        yaw: 0.0,
        start: [0.0, 0.0],
        segments: vec![
            Segment {
                start_frame: 0,
                velocity: [2.0, 0.0],
            },
            Segment {
                start_frame: 4,
                velocity: [6.0, 0.0],
            },
        ],
    };
    let dt = 0.125;
    for k in 1..10 {
        let diff = (o.position(k, dt)[0] - o.position(k - 1, dt)[0]) / dt;
        assert_eq!(diff, o.velocity(k)[0], "frame {k}");
    }
}

#[test]
fn scenario_config_rejects_bad_values() {
    let bad = ScenarioConfig {
        n_routes: 0,
        ..ScenarioConfig::default()
    };
    assert!(bad.validate().unwrap_err().contains("scenario.n_routes"));
    assert!(generate_scenario(&bad).is_err());
}

#[test]
fn zero_noise_reproduces_ground_truth() {
    let truth = vec![gt(10.0, 1.0), gt(-20.0, 5.0)];
    let mut rng = stream(3, 0);
    let out = noisy_detections(&truth, &origin(), &NoiseModel::zero(3), &mut rng);
    assert_eq!(out.from_ground_truth, 2);
    assert_eq!(out.detections.len(), 2);
    for (d, g) in out.detections.iter().zip(&truth) {
        assert_eq!(d.bbox, g.bbox);
        assert_eq!(d.confidence, 1.0);
        assert_eq!(d.class_id, g.class_id);
        assert!(d.velocity.is_none());
    }
}

#[test]
fn certain_dropout_removes_everything() {
    let model = NoiseModel {
        drop_base: 1.0,
        ..NoiseModel::zero(0)
    };
    let mut rng = stream(0, 0);
    let out = noisy_detections(&[gt(5.0, 0.0)], &origin(), &model, &mut rng);
    assert!(out.detections.is_empty());
}

#[test]
fn position_noise_has_rayleigh_mean() {
    let sigma = 0.4;
    let model = NoiseModel {
        sigma_xy: sigma,
        ..NoiseModel::zero(11)
    };
    let truth = [gt(10.0, 0.0)];
    let mut rng = stream(11, 0);
    let n = 20_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let d = &noisy_detections(&truth, &origin(), &model, &mut rng).detections[0];
        sum += (d.bbox.center[0] - 10.0).hypot(d.bbox.center[1]);
    }
    let mean = sum / n as f64;
    let expected = sigma * (PI / 2.0).sqrt();
    assert!((mean - expected).abs() < 0.01, "mean {mean} vs {expected}");
}

#[test]
fn false_positives_follow_the_rate() {
    let model = NoiseModel {
        drop_base: 1.0,
        fp_rate: 2.5,
        ..NoiseModel::zero(5)
    };
    let mut rng = stream(5, 0);
    let frames = 4000;
    let mut total = 0;
    for _ in 0..frames {
        let out = noisy_detections(&[], &origin(), &model, &mut rng);
        for d in &out.detections {
            assert!(d.bbox.center[0].hypot(d.bbox.center[1]) <= 50.0);
            assert!((0.3..0.7).contains(&d.confidence));
        }
        total += out.detections.len();
    }
    let rate = total as f64 / frames as f64;
    assert!((rate - 2.5).abs() < 0.1, "rate {rate}");
}

#[test]
fn ladder_grows_noisier() {
    let ladder = noise_ladder(5, 100);
    let ids: Vec<&str> = ladder.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(ids, ["det_00", "det_01", "det_02", "det_03", "det_04"]);
    for w in ladder.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        assert!(b.sigma_xy > a.sigma_xy && b.drop_base > a.drop_base && b.fp_rate > a.fp_rate);
        assert_eq!(b.seed, a.seed + 1);
    }
    assert!(ladder.iter().all(|(_, m)| m.validate().is_ok()));
}

#[test]
fn noise_validation_names_the_key() {
    let m = NoiseModel {
        sigma_xy: -1.0,
        ..NoiseModel::zero(0)
    };
    assert!(m.validate().unwrap_err().contains("noise.sigma_xy"));
}

#[test]
fn apply_noise_is_seeded_per_route() {
    let logs = generate_scenario(&small()).unwrap();
    let model = NoiseModel::at_severity(0.5, 4);
    let a = apply_noise(&logs[0], &model);
    assert_eq!(a, apply_noise(&logs[0], &model));
    assert_ne!(a.frames, apply_noise(&logs[0], &NoiseModel::at_severity(0.5, 5)).frames);
}

#[test]
fn closed_loop_is_deterministic_and_valid() {
    let cfg = small();
    let scenario = generate_script(&cfg, 0);
    let model = NoiseModel::at_severity(0.3, 9);
    let (mut a, stats) = simulate_route(&scenario, &model, "d", &SimConfig::default()).unwrap();
    let (b, _) = simulate_route(&scenario, &model, "d", &SimConfig::default()).unwrap();
    assert_eq!(a, b);
    a.validate().unwrap();
    assert_eq!(stats.frames, a.frames.len());
    assert!(stats.miss_rate() > 0.0 && stats.miss_rate() < 1.0);
    // no plans before the tracker can confirm anything
    assert!(a.frames[..3].iter().all(|f| f.traj_gt_conditioned.is_none()));
    assert!(a.frames[3..].iter().all(|f| f.trajectory_pair().is_some()));
}

#[test]
fn perfect_detector_completes_without_collisions() {
    let cfg = ScenarioConfig::default();
    for r in 0..3 {
        let (log, stats) =
            simulate_route(&generate_script(&cfg, r), &NoiseModel::zero(0), "perfect", &SimConfig::default())
                .unwrap();
        assert_eq!(log.route_completion, 100.0);
        assert!(log.infractions.is_empty());
        assert_eq!(stats.miss_rate(), 0.0);
        assert_eq!(stats.false_positives, 0);
    }
}
