//! Velocity-obstacle cones.
//!
//! A cone is an apex in velocity space plus two unit boundary directions.
//! The boundary directions depend only on the two shapes; VO, RVO and HRVO
//! differ only in where the apex goes.
//!
//! For polygons the boundaries come straight from the vertices: every vector
//! from a robot vertex to an obstacle vertex is a vertex of `O ⊕ −R`, so the
//! two angularly extreme ones bound the cone of relative velocities whose ray
//! enters the Minkowski region. Angles are measured as offsets from the
//! centroid-to-centroid direction, which always lies strictly inside the cone
//! for disjoint shapes; measuring raw `atan2` values instead breaks whenever
//! the cone straddles the ±π seam.

use serde::{Deserialize, Serialize};

use crate::geometry::{intersects, ConvexPolygon};
use crate::scalar::Real;
use crate::vector::Vec2;

/// Boundary directions of a collision cone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConeDirections<T> {
    Bounded {
        /// Counterclockwise-most boundary.
        left: Vec2<T>,
        /// Clockwise-most boundary.
        right: Vec2<T>,
    },
    /// Shapes already overlap (or the cone is at least a half plane): every
    /// velocity is on a collision course.
    FullPlane,
}

impl<T: Real> ConeDirections<T> {
    /// Widens the cone by `delta` on each side. Spans reaching π saturate to
    /// the full plane.
    pub fn padded(self, delta: T) -> Self {
        match self {
            ConeDirections::Bounded { left, right } if delta > T::zero() => {
                let half_span = right.cross(left).atan2(right.dot(left)) / T::lit(2.0);
                if half_span + delta >= T::FRAC_PI_2() {
                    ConeDirections::FullPlane
                } else {
                    ConeDirections::Bounded {
                        left: left.rotated(delta),
                        right: right.rotated(-delta),
                    }
                }
            }
            other => other,
        }
    }

    /// Counterclockwise angle from `right` to `left`; π for the full plane.
    pub fn span(&self) -> T {
        match *self {
            ConeDirections::Bounded { left, right } => right.cross(left).atan2(right.dot(left)),
            ConeDirections::FullPlane => T::PI(),
        }
    }

    pub fn is_full_plane(&self) -> bool {
        matches!(self, ConeDirections::FullPlane)
    }
}

/// Cone of forbidden velocities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityCone<T> {
    pub apex: Vec2<T>,
    pub left: Vec2<T>,
    pub right: Vec2<T>,
    pub full_plane: bool,
}

impl<T: Real> VelocityCone<T> {
    pub fn from_directions(dirs: ConeDirections<T>, apex: Vec2<T>) -> Self {
        match dirs {
            ConeDirections::Bounded { left, right } => VelocityCone {
                apex,
                left,
                right,
                full_plane: false,
            },
            ConeDirections::FullPlane => VelocityCone {
                apex,
                left: Vec2::zero(),
                right: Vec2::zero(),
                full_plane: true,
            },
        }
    }

    pub fn directions(&self) -> ConeDirections<T> {
        if self.full_plane {
            ConeDirections::FullPlane
        } else {
            ConeDirections::Bounded {
                left: self.left,
                right: self.right,
            }
        }
    }

    /// Closed membership: boundary rays and the apex itself are inside.
    pub fn contains(&self, v: Vec2<T>) -> bool {
        if self.full_plane {
            return true;
        }
        let d = v - self.apex;
        self.right.cross(d) >= T::zero() && self.left.cross(d) <= T::zero()
    }
}

/// Cone directions for two convex polygons in world coordinates.
pub fn cone_directions_polytopic<T: Real>(
    robot: &ConvexPolygon<T>,
    obstacle: &ConvexPolygon<T>,
) -> ConeDirections<T> {
    if intersects(robot, obstacle) {
        return ConeDirections::FullPlane;
    }
    let reference = match (obstacle.centroid() - robot.centroid()).normalized() {
        Some(r) => r,
        None => return ConeDirections::FullPlane,
    };
    let mut max_offset = T::neg_infinity();
    let mut min_offset = T::infinity();
    for &o in obstacle.vertices() {
        for &r in robot.vertices() {
            let d = o - r;
            let offset = reference.cross(d).atan2(reference.dot(d));
            max_offset = max_offset.max(offset);
            min_offset = min_offset.min(offset);
        }
    }
    if max_offset - min_offset >= T::PI() {
        return ConeDirections::FullPlane;
    }
    ConeDirections::Bounded {
        left: reference.rotated(max_offset),
        right: reference.rotated(min_offset),
    }
}

/// Cone directions for two discs: tangents to the disc of radius
/// `r_robot + r_obstacle` around the relative position.
pub fn cone_directions_circular<T: Real>(
    x_robot: Vec2<T>,
    r_robot: T,
    x_obstacle: Vec2<T>,
    r_obstacle: T,
) -> ConeDirections<T> {
    let rel = x_obstacle - x_robot;
    let dist = rel.norm();
    let combined = r_robot + r_obstacle;
    if dist <= combined {
        return ConeDirections::FullPlane;
    }
    let half = (combined / dist).asin();
    let reference = rel / dist;
    ConeDirections::Bounded {
        left: reference.rotated(half),
        right: reference.rotated(-half),
    }
}

/// Plain velocity obstacle: apex at the obstacle's velocity.
pub fn build_vo<T: Real>(dirs: ConeDirections<T>, v_obstacle: Vec2<T>) -> VelocityCone<T> {
    VelocityCone::from_directions(dirs, v_obstacle)
}

/// Reciprocal velocity obstacle: apex at the mean of both velocities.
pub fn build_rvo<T: Real>(
    dirs: ConeDirections<T>,
    v_robot: Vec2<T>,
    v_other: Vec2<T>,
) -> VelocityCone<T> {
    VelocityCone::from_directions(dirs, (v_robot + v_other) / T::lit(2.0))
}

/// Intersection of `p + s·d` with `q + u·e`, `None` when (nearly) parallel.
fn line_intersection<T: Real>(p: Vec2<T>, d: Vec2<T>, q: Vec2<T>, e: Vec2<T>) -> Option<Vec2<T>> {
    let denom = d.cross(e);
    if denom.abs() < T::DIR_EPS {
        return None;
    }
    let s = (q - p).cross(e) / denom;
    Some(p + d * s)
}

/// Hybrid reciprocal velocity obstacle.
///
/// The side of the centreline the robot's current velocity is on keeps its
/// RVO boundary; the opposite boundary is taken from the VO, which enlarges
/// the cone on the side the robot should not pass. A velocity exactly on the
/// centreline counts as the left side. Falls back to the RVO apex when the
/// two boundary lines are parallel.
pub fn build_hrvo<T: Real>(
    dirs: ConeDirections<T>,
    v_robot: Vec2<T>,
    v_other: Vec2<T>,
) -> VelocityCone<T> {
    let (left, right) = match dirs {
        ConeDirections::Bounded { left, right } => (left, right),
        ConeDirections::FullPlane => return VelocityCone::from_directions(dirs, v_other),
    };
    let vo_apex = v_other;
    let rvo_apex = (v_robot + v_other) / T::lit(2.0);
    let centerline = match (left + right).normalized() {
        Some(c) => c,
        None => return VelocityCone::from_directions(dirs, rvo_apex),
    };
    let apex = if centerline.cross(v_robot - rvo_apex) >= T::zero() {
        line_intersection(rvo_apex, left, vo_apex, right)
    } else {
        line_intersection(rvo_apex, right, vo_apex, left)
    }
    .unwrap_or(rvo_apex);
    VelocityCone::from_directions(dirs, apex)
}

pub fn cone_contains<T: Real>(c: &VelocityCone<T>, v: Vec2<T>) -> bool {
    c.contains(v)
}

/// Membership in the union of cones.
pub fn set_contains<T: Real>(cones: &[VelocityCone<T>], v: Vec2<T>) -> bool {
    cones.iter().any(|c| c.contains(v))
}
