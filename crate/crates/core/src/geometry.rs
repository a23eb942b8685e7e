//! Exact convex-polygon kernel.
//!
//! Every robot and obstacle is a strictly convex polygon stored as a
//! counterclockwise vertex list. Distances and overlap tests are closed-form
//! (separating axes plus vertex/edge minimisation) rather than iterative, and
//! touching polygons count as colliding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{wrap_angle, Real};
use crate::vector::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("turn at vertex {0} is not strictly counterclockwise")]
    NotConvex(usize),
    #[error("vertex chain winds more than once")]
    SelfIntersecting,
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConvexPolygon<T> {
    vertices: Vec<Vec2<T>>,
}

impl<'de, T> Deserialize<'de> for ConvexPolygon<T>
where
    T: Real + Deserialize<'de>,
{
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vertices = Vec::<Vec2<T>>::deserialize(d)?;
        ConvexPolygon::new(vertices).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> ConvexPolygon<T> {
    /// Validates and wraps a counterclockwise vertex list.
    pub fn new(vertices: Vec<Vec2<T>>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i].distance(vertices[j]) <= T::GEOM_EPS {
                    return Err(GeometryError::DuplicateVertex(i, j));
                }
            }
        }
        let mut turning = T::zero();
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let cur = vertices[i];
            let next = vertices[(i + 1) % n];
            let e0 = cur - prev;
            let e1 = next - cur;
            let turn = e0.cross(e1);
            if turn <= T::CROSS_EPS {
                return Err(GeometryError::NotConvex(i));
            }
            turning = turning + turn.atan2(e0.dot(e1));
        }
        // A pentagram turns left everywhere but winds twice.
        let two_pi = T::PI() + T::PI();
        if (turning - two_pi).abs() > T::lit(1e-3) {
            return Err(GeometryError::SelfIntersecting);
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Convex hull of an arbitrary point cloud, dropping collinear and
    /// duplicate points.
    pub fn hull(points: &[Vec2<T>]) -> Result<Self, GeometryError> {
        let mut pts: Vec<Vec2<T>> = points.to_vec();
        pts.sort_by(|a, b| {
            a.x.partial_cmp(&b.x)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
        });
        pts.dedup_by(|a, b| a.distance(*b) <= T::GEOM_EPS);
        if pts.len() < 3 {
            return Err(GeometryError::TooFewVertices(pts.len()));
        }
        // Andrew's monotone chain.
        let mut hull: Vec<Vec2<T>> = Vec::with_capacity(pts.len() * 2);
        for &p in pts.iter() {
            while hull.len() >= 2
                && (hull[hull.len() - 1] - hull[hull.len() - 2]).cross(p - hull[hull.len() - 1])
                    <= T::CROSS_EPS
            {
                hull.pop();
            }
            hull.push(p);
        }
        let lower_len = hull.len() + 1;
        for &p in pts.iter().rev().skip(1) {
            while hull.len() >= lower_len
                && (hull[hull.len() - 1] - hull[hull.len() - 2]).cross(p - hull[hull.len() - 1])
                    <= T::CROSS_EPS
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        // The chain never tests the turn where it closes; drop flat corners there.
        let mut i = 0;
        while hull.len() >= 3 && i < hull.len() {
            let n = hull.len();
            let (prev, cur, next) = (hull[(i + n - 1) % n], hull[i], hull[(i + 1) % n]);
            if (cur - prev).cross(next - cur) <= T::CROSS_EPS {
                hull.remove(i);
                i = 0;
            } else {
                i += 1;
            }
        }
        ConvexPolygon::new(hull)
    }

    /// Axis-aligned rectangle centred on the origin, `length` along x.
    pub fn rectangle(length: T, width: T) -> Self {
        let hl = length / T::lit(2.0);
        let hw = width / T::lit(2.0);
        ConvexPolygon::new(vec![
            Vec2::new(-hl, -hw),
            Vec2::new(hl, -hw),
            Vec2::new(hl, hw),
            Vec2::new(-hl, hw),
        ])
        .expect("rectangle with positive extents")
    }

    /// Regular polygon centred on the origin with the first vertex at `phase`.
    pub fn regular(sides: usize, circumradius: T, phase: T) -> Self {
        let step = (T::PI() + T::PI()) / T::from_usize_lossy(sides);
        let vertices = (0..sides)
            .map(|k| Vec2::from_angle(phase + step * T::from_usize_lossy(k)) * circumradius)
            .collect();
        ConvexPolygon::new(vertices).expect("regular polygon with at least 3 sides")
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges `(start, end)` in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2<T>, Vec2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Vertex centroid (mean of the vertices, not the area centroid).
    pub fn centroid(&self) -> Vec2<T> {
        let sum = self.vertices.iter().fold(Vec2::zero(), |acc, &v| acc + v);
        sum / T::from_usize_lossy(self.vertices.len())
    }

    /// Largest vertex distance from the vertex centroid.
    pub fn circumradius(&self) -> T {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|v| v.distance(c))
            .fold(T::zero(), T::max)
    }

    pub fn translated(&self, offset: Vec2<T>) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|&v| v + offset).collect(),
        }
    }

    /// Closed containment test with tolerance `tol` (m) outside each edge.
    pub fn contains_point(&self, p: Vec2<T>, tol: T) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            // signed distance to the left of the edge
            e.cross(p - a) / e.norm() >= -tol
        })
    }

    /// Area via the shoelace formula.
    pub fn area(&self) -> T {
        self.edges()
            .fold(T::zero(), |acc, (a, b)| acc + a.cross(b))
            / T::lit(2.0)
    }

    pub fn cast<U: Real>(&self) -> ConvexPolygon<U> {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| v.cast()).collect(),
        }
    }
}

/// Rigid placement of a body-frame shape.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub position: Vec2<T>,
    /// Radians in `(-π, π]`.
    pub heading: T,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vec2<T>, heading: T) -> Self {
        Pose {
            position,
            heading: wrap_angle(heading),
        }
    }

    pub fn identity() -> Self {
        Pose::new(Vec2::zero(), T::zero())
    }

    pub fn transform_point(&self, p: Vec2<T>) -> Vec2<T> {
        p.rotated(self.heading) + self.position
    }

    /// Halfway pose, turning through the shorter arc.
    pub fn midpoint(&self, other: &Pose<T>) -> Pose<T> {
        let half = T::lit(0.5);
        let dh = wrap_angle(other.heading - self.heading);
        Pose::new(
            self.position.lerp(other.position, half),
            self.heading + dh * half,
        )
    }
}

/// Places a body-frame polygon in the world: rotate by heading, then translate.
pub fn world_vertices<T: Real>(body: &ConvexPolygon<T>, pose: &Pose<T>) -> ConvexPolygon<T> {
    ConvexPolygon {
        vertices: body
            .vertices
            .iter()
            .map(|&v| pose.transform_point(v))
            .collect(),
    }
}

pub fn centroid<T: Real>(p: &ConvexPolygon<T>) -> Vec2<T> {
    p.centroid()
}

/// `obstacle ⊕ −robot`: hull of all pairwise differences `o − r`.
pub fn minkowski_diff<T: Real>(
    obstacle: &ConvexPolygon<T>,
    robot: &ConvexPolygon<T>,
) -> ConvexPolygon<T> {
    let mut points = Vec::with_capacity(obstacle.len() * robot.len());
    for &o in obstacle.vertices() {
        for &r in robot.vertices() {
            points.push(o - r);
        }
    }
    ConvexPolygon::hull(&points).expect("difference of two proper convex polygons is proper")
}

/// Projection interval of a polygon on an axis.
fn project<T: Real>(p: &ConvexPolygon<T>, axis: Vec2<T>) -> (T, T) {
    p.vertices()
        .iter()
        .map(|&v| v.dot(axis))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

/// Separating-axis test over the edge normals of both polygons. Touching
/// (zero gap) counts as intersecting.
pub fn intersects<T: Real>(a: &ConvexPolygon<T>, b: &ConvexPolygon<T>) -> bool {
    for poly in [a, b] {
        for (p, q) in poly.edges() {
            let axis = (q - p).perp();
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            if amax < bmin || bmax < amin {
                return false;
            }
        }
    }
    true
}

pub fn point_segment_distance<T: Real>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

/// Euclidean distance between two convex polygons; zero when they overlap or
/// touch.
pub fn min_distance<T: Real>(a: &ConvexPolygon<T>, b: &ConvexPolygon<T>) -> T {
    if intersects(a, b) {
        return T::zero();
    }
    let one_way = |from: &ConvexPolygon<T>, to: &ConvexPolygon<T>| {
        from.vertices()
            .iter()
            .flat_map(|&v| to.edges().map(move |(p, q)| point_segment_distance(v, p, q)))
            .fold(T::infinity(), T::min)
    };
    one_way(a, b).min(one_way(b, a))
}

/// Earliest `t ≥ 0` at which `origin + t·velocity` lies in the closed
/// `region`; `Some(0)` when the origin is already inside.
pub fn ray_entry_time<T: Real>(
    origin: Vec2<T>,
    velocity: Vec2<T>,
    region: &ConvexPolygon<T>,
) -> Option<T> {
    let mut t_enter = T::zero();
    let mut t_exit = T::infinity();
    for (a, b) in region.edges() {
        let outward = Vec2::new(b.y - a.y, a.x - b.x);
        let offset = outward.dot(origin - a);
        let rate = outward.dot(velocity);
        if rate == T::zero() {
            if offset > T::zero() {
                return None;
            }
            continue;
        }
        let t = -offset / rate;
        if rate < T::zero() {
            t_enter = t_enter.max(t);
        } else {
            t_exit = t_exit.min(t);
        }
        if t_enter > t_exit {
            return None;
        }
    }
    Some(t_enter)
}

/// Offsets every edge outward by `margin` and joins neighbouring offset edges
/// at their intersection (mitre join). Vertex count is preserved.
pub fn inflate<T: Real>(p: &ConvexPolygon<T>, margin: T) -> ConvexPolygon<T> {
    if margin <= T::zero() {
        return p.clone();
    }
    let n = p.len();
    let normals: Vec<Vec2<T>> = p
        .edges()
        .map(|(a, b)| {
            let e = b - a;
            Vec2::new(e.y, -e.x) / e.norm()
        })
        .collect();
    let vertices = (0..n)
        .map(|i| {
            let n_in = normals[(i + n - 1) % n];
            let n_out = normals[i];
            let miter = (n_in + n_out) / (T::one() + n_in.dot(n_out));
            p.vertices()[i] + miter * margin
        })
        .collect();
    ConvexPolygon { vertices }
}
