//! Geometric kernels over yaw-only oriented boxes.

use std::f64::consts::{PI, TAU};

use crate::types::{OrientedBox3D, Vec2};

/// Counter-clockwise convex polygon in the ground plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon2D {
    vertices: Vec<Vec2>,
}

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon2D {
    /// Accepts vertices in counter-clockwise order; returns `None` for fewer
    /// than three vertices, clockwise input, non-convex input or zero area.
    pub fn new(vertices: Vec<Vec2>) -> Option<Self> {
        let n = vertices.len();
        if n < 3 || vertices.iter().flatten().any(|v| !v.is_finite()) {
            return None;
        }
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < 0.0 {
                return None;
            }
        }
        let poly = ConvexPolygon2D { vertices };
        (poly.area() > 0.0).then_some(poly)
    }

    /// BEV footprint of a box, corners in counter-clockwise order.
    pub fn footprint(b: &OrientedBox3D) -> Self {
        let (s, c) = b.yaw.sin_cos();
        let hl = 0.5 * b.dims[0];
        let hw = 0.5 * b.dims[1];
        let [cx, cy, _] = b.center;
        let corner = |lx: f64, ly: f64| [cx + c * lx - s * ly, cy + s * lx + c * ly];
        ConvexPolygon2D {
            vertices: vec![
                corner(hl, hw),
                corner(-hl, hw),
                corner(-hl, -hw),
                corner(hl, -hw),
            ],
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0)
    }

    /// Intersection area with another convex polygon (Sutherland–Hodgman).
    pub fn intersection_area(&self, other: &ConvexPolygon2D) -> f64 {
        let mut output = self.vertices.clone();
        let n = other.vertices.len();
        for i in 0..n {
            if output.is_empty() {
                return 0.0;
            }
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % n];
            let input = std::mem::take(&mut output);
            let m = input.len();
            for j in 0..m {
                let cur = input[j];
                let prev = input[(j + m - 1) % m];
                let cur_side = cross(a, b, cur);
                let prev_side = cross(a, b, prev);
                if cur_side >= 0.0 {
                    if prev_side < 0.0 {
                        output.push(segment_intersection(prev, cur, prev_side, cur_side));
                    }
                    output.push(cur);
                } else if prev_side >= 0.0 {
                    output.push(segment_intersection(prev, cur, prev_side, cur_side));
                }
            }
        }
        if output.len() < 3 {
            return 0.0;
        }
        polygon_area(&output).max(0.0)
    }
}

fn segment_intersection(p: Vec2, q: Vec2, side_p: f64, side_q: f64) -> Vec2 {
    let t = side_p / (side_p - side_q);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn polygon_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice
}

pub fn bev_intersection_area(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let ra = 0.5 * a.dims[0].hypot(a.dims[1]);
    let rb = 0.5 * b.dims[0].hypot(b.dims[1]);
    if center_distance_bev(a, b) >= ra + rb {
        return 0.0;
    }
    ConvexPolygon2D::footprint(a).intersection_area(&ConvexPolygon2D::footprint(b))
}

fn ratio(inter: f64, union: f64) -> f64 {
    if inter <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

pub fn bev_iou(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = bev_intersection_area(a, b);
    let union = a.dims[0] * a.dims[1] + b.dims[0] * b.dims[1] - inter;
    ratio(inter, union)
}

pub fn z_overlap(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let (a0, a1) = a.z_range();
    let (b0, b1) = b.z_range();
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

pub fn iou_3d(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    if a == b {
        return 1.0;
    }
    let dz = z_overlap(a, b);
    if dz <= 0.0 {
        return 0.0;
    }
    let inter = bev_intersection_area(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    ratio(inter, union)
}

pub fn center_distance_bev(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1])
}

/// Smallest absolute angle between two headings, in [0, π].
pub fn yaw_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    let d = if d > PI { TAU - d } else { d };
    d.clamp(0.0, PI)
}

/// IoU of the two boxes once centers and headings coincide; only the
/// dimensions matter.
pub fn aligned_iou(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let inter: f64 = (0..3).map(|i| a.dims[i].min(b.dims[i])).product();
    ratio(inter, a.volume() + b.volume() - inter)
}
