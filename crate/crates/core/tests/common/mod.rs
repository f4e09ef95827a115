#![allow(dead_code)]

use detdrive::{ClassId, Detection, GroundTruthObject, OrientedBox3D};

pub fn gt_at(x: f64, y: f64, dims: [f64; 3]) -> GroundTruthObject {
    GroundTruthObject {
        bbox: OrientedBox3D::new([x, y, 0.0], dims, 0.0).unwrap(),
        class_id: ClassId::new("car"),
        object_id: 0,
        velocity: [0.0, 0.0],
        distance_to_ego: x.hypot(y),
    }
}

pub fn det_at(x: f64, y: f64, dims: [f64; 3], conf: f64) -> Detection {
    Detection {
        bbox: OrientedBox3D::new([x, y, 0.0], dims, 0.0).unwrap(),
        confidence: conf,
        class_id: ClassId::new("car"),
        velocity: None,
    }
}
