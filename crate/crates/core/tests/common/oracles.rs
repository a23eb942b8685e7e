//! Brute-force reference implementations used to check the geometry kernel.
//! Nothing here calls into the library's own predicates.

#![allow(dead_code)]

use polyvo::{ConvexPolygon, Vec2};
use rand::Rng;

/// Random convex polygon: 3 to 8 points taken in order around a rotated
/// ellipse.
pub fn random_convex<R: Rng>(rng: &mut R, center: Vec2<f64>, scale: f64) -> ConvexPolygon<f64> {
    loop {
        let k = rng.gen_range(3..=8);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let a = scale * rng.gen_range(0.3..1.0);
        let b = scale * rng.gen_range(0.3..1.0);
        let rot = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut t = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut pts = Vec::with_capacity(k);
        for w in &weights {
            pts.push(center + Vec2::new(a * t.cos(), b * t.sin()).rotated(rot));
            t += w / total * std::f64::consts::TAU;
        }
        if let Ok(p) = ConvexPolygon::new(pts) {
            return p;
        }
    }
}

fn cross(a: Vec2<f64>, b: Vec2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Does the ray `{t·v : t ≥ 0}` meet the convex hull of `points`?
///
/// Every hull point on the line through `v` is a convex combination of two
/// input points on opposite sides of it, so the hull's chord is spanned by
/// the pairwise crossings.
pub fn ray_hits_hull(points: &[Vec2<f64>], v: Vec2<f64>) -> bool {
    let len = (v.x * v.x + v.y * v.y).sqrt();
    let u = Vec2::new(v.x / len, v.y / len);
    let side: Vec<f64> = points.iter().map(|&p| cross(u, p)).collect();
    let along: Vec<f64> = points.iter().map(|&p| u.x * p.x + u.y * p.y).collect();
    let mut far = f64::NEG_INFINITY;
    for i in 0..points.len() {
        if side[i] == 0.0 {
            far = far.max(along[i]);
        }
        for j in (i + 1)..points.len() {
            if side[i] * side[j] < 0.0 {
                let s = side[i] / (side[i] - side[j]);
                far = far.max(along[i] + (along[j] - along[i]) * s);
            }
        }
    }
    far >= 0.0
}

/// All pairwise differences `o − r`.
pub fn difference_points(obstacle: &ConvexPolygon<f64>, robot: &ConvexPolygon<f64>) -> Vec<Vec2<f64>> {
    obstacle
        .vertices()
        .iter()
        .flat_map(|&o| robot.vertices().iter().map(move |&r| o - r))
        .collect()
}

fn segment_distance(p: Vec2<f64>, a: Vec2<f64>, b: Vec2<f64>) -> f64 {
    let ab = b - a;
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / (ab.x * ab.x + ab.y * ab.y)).clamp(0.0, 1.0);
    let q = a + ab * t;
    ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
}

fn edges(p: &ConvexPolygon<f64>) -> Vec<(Vec2<f64>, Vec2<f64>)> {
    let v = p.vertices();
    (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect()
}

/// Points along the boundary no further than `spacing` apart, corners included.
pub fn boundary_samples(p: &ConvexPolygon<f64>, spacing: f64) -> Vec<Vec2<f64>> {
    let mut out = Vec::new();
    for (a, b) in edges(p) {
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let n = (len / spacing).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(a.lerp(b, k as f64 / n as f64));
        }
    }
    out
}

/// Boundary-to-boundary distance from dense sampling of both outlines.
pub fn sampled_distance(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>, spacing: f64) -> f64 {
    let one_way = |from: &ConvexPolygon<f64>, to: &ConvexPolygon<f64>| {
        let to_edges = edges(to);
        boundary_samples(from, spacing)
            .into_iter()
            .flat_map(|s| to_edges.iter().map(move |&(p, q)| segment_distance(s, p, q)))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

/// Even-odd crossing test.
pub fn point_in_polygon(p: Vec2<f64>, poly: &ConvexPolygon<f64>) -> bool {
    let mut inside = false;
    for (a, b) in edges(poly) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_cross(a: Vec2<f64>, b: Vec2<f64>, c: Vec2<f64>, d: Vec2<f64>) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Whether the two closed regions share a point.
pub fn overlaps(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> bool {
    a.vertices().iter().any(|&v| point_in_polygon(v, b))
        || b.vertices().iter().any(|&v| point_in_polygon(v, a))
        || edges(a)
            .iter()
            .any(|&(p, q)| edges(b).iter().any(|&(r, s)| segments_cross(p, q, r, s)))
}

/// Distance from `v` to the ray from the origin along `dir`.
pub fn ray_distance(v: Vec2<f64>, dir: Vec2<f64>) -> f64 {
    let len = (dir.x * dir.x + dir.y * dir.y).sqrt();
    let u = Vec2::new(dir.x / len, dir.y / len);
    if u.x * v.x + u.y * v.y >= 0.0 {
        cross(u, v).abs()
    } else {
        (v.x * v.x + v.y * v.y).sqrt()
    }
}
