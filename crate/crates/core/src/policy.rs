//! Per-robot velocity selection.
//!
//! Each robot looks at the robots and obstacles within its neighbouring
//! region, builds one cone per neighbour, and picks the candidate velocity
//! closest to its preferred velocity that lies outside every cone. When the
//! cones cover every candidate it falls back to minimising
//! `φ / tc(v) + ‖v − v_pref‖`, trading progress against time to collision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cones::{
    build_hrvo, build_rvo, build_vo, cone_directions_circular, cone_directions_polytopic,
    set_contains, ConeDirections, VelocityCone,
};
use crate::geometry::{inflate, intersects, minkowski_diff, ray_entry_time, world_vertices};
use crate::geometry::{ConvexPolygon, Pose};
use crate::scalar::Real;
use crate::vector::Vec2;

/// Cone family and shape model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "VO_c")]
    VoC,
    #[serde(rename = "VO_p")]
    VoP,
    #[serde(rename = "RVO_c")]
    RvoC,
    #[serde(rename = "RVO_p")]
    RvoP,
    #[serde(rename = "HRVO_c")]
    HrvoC,
    #[serde(rename = "HRVO_p")]
    HrvoP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeVariant {
    Vo,
    Rvo,
    Hrvo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeModel {
    /// Every shape is replaced by its circumscribed disc.
    Circular,
    /// Exact polygons.
    Polytopic,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::VoC,
        Method::VoP,
        Method::RvoC,
        Method::RvoP,
        Method::HrvoC,
        Method::HrvoP,
    ];

    pub fn variant(self) -> ConeVariant {
        match self {
            Method::VoC | Method::VoP => ConeVariant::Vo,
            Method::RvoC | Method::RvoP => ConeVariant::Rvo,
            Method::HrvoC | Method::HrvoP => ConeVariant::Hrvo,
        }
    }

    pub fn shape_model(self) -> ShapeModel {
        match self {
            Method::VoC | Method::RvoC | Method::HrvoC => ShapeModel::Circular,
            Method::VoP | Method::RvoP | Method::HrvoP => ShapeModel::Polytopic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::VoC => "VO_c",
            Method::VoP => "VO_p",
            Method::RvoC => "RVO_c",
            Method::RvoP => "RVO_p",
            Method::HrvoC => "HRVO_c",
            Method::HrvoP => "HRVO_p",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}` (expected one of VO_c, VO_p, RVO_c, RVO_p, HRVO_c, HRVO_p)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotStatus {
    Active,
    Arrived,
    /// Stopped after touching another robot or an obstacle.
    Stopped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotState<T> {
    pub id: usize,
    /// Body-frame shape before margin inflation.
    pub body: ConvexPolygon<T>,
    pub pose: Pose<T>,
    pub velocity: Vec2<T>,
    pub v_max: T,
    pub w_max: T,
    pub goal: Vec2<T>,
    pub status: RobotStatus,
}

impl<T: Real> RobotState<T> {
    pub fn shape(&self) -> ConvexPolygon<T> {
        world_vertices(&self.body, &self.pose)
    }

    /// Vertex centroid of the placed shape.
    pub fn position(&self) -> Vec2<T> {
        self.shape().centroid()
    }

    pub fn is_active(&self) -> bool {
        self.status == RobotStatus::Active
    }
}

/// Straight-line path at constant speed; the obstacle halts at `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstaclePath<T> {
    pub start: Vec2<T>,
    pub end: Vec2<T>,
    pub speed: T,
}

impl<T: Real> ObstaclePath<T> {
    pub fn length(&self) -> T {
        self.start.distance(self.end)
    }

    /// Position and velocity at `time` seconds after departure.
    pub fn state_at(&self, time: T) -> (Vec2<T>, Vec2<T>) {
        let length = self.length();
        let dir = match (self.end - self.start).normalized() {
            Some(d) => d,
            None => return (self.start, Vec2::zero()),
        };
        let travelled = self.speed * time;
        if travelled >= length {
            (self.end, Vec2::zero())
        } else {
            (self.start + dir * travelled, dir * self.speed)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleState<T> {
    pub id: usize,
    pub body: ConvexPolygon<T>,
    pub pose: Pose<T>,
    pub velocity: Vec2<T>,
    pub path: Option<ObstaclePath<T>>,
}

impl<T: Real> ObstacleState<T> {
    pub fn shape(&self) -> ConvexPolygon<T> {
        world_vertices(&self.body, &self.pose)
    }

    pub fn position(&self) -> Vec2<T> {
        self.shape().centroid()
    }

    pub fn is_static(&self) -> bool {
        self.path.is_none()
    }

    /// Moves the obstacle to where its path puts it at `time`.
    pub fn advance_to(&mut self, time: T) {
        if let Some(path) = self.path {
            let (position, velocity) = path.state_at(time);
            self.pose.position = position;
            self.velocity = velocity;
        }
    }
}

/// Planner parameters. Defaults follow the reference simulation setup.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PolicyParams<T> {
    pub method: Method,
    /// Neighbouring region `l` (m), centroid distance, inclusive.
    pub neighbor_radius: T,
    /// Penalty weight `φ` on inverse time to collision.
    pub penalty_weight: T,
    /// Safety margin (m) added around every robot for planning only.
    pub margin: T,
    /// Heading-correction time constant `η` (s).
    pub eta: T,
    /// Extra angle (rad) added on both sides of every cone.
    pub angle_padding: T,
    pub samples_angular: usize,
    pub samples_radial: usize,
    /// Goal capture distance (m).
    pub arrival_tol: T,
}

impl<T: Real> Default for PolicyParams<T> {
    fn default() -> Self {
        PolicyParams {
            method: Method::HrvoP,
            neighbor_radius: T::lit(5.0),
            penalty_weight: T::lit(4.0),
            margin: T::lit(0.15),
            eta: T::lit(0.2),
            angle_padding: T::zero(),
            samples_angular: 36,
            samples_radial: 10,
            arrival_tol: T::lit(0.2),
        }
    }
}

impl<T: Real> PolicyParams<T> {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Returns the name of the first out-of-range field.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        let non_negative = |v: T| v >= T::zero() && v.is_finite();
        if !positive(self.neighbor_radius) {
            return Err(("neighbor_radius", "must be > 0".into()));
        }
        if !non_negative(self.penalty_weight) {
            return Err(("penalty_weight", "must be >= 0".into()));
        }
        if !non_negative(self.margin) {
            return Err(("margin", "must be >= 0".into()));
        }
        if !positive(self.eta) {
            return Err(("eta", "must be > 0".into()));
        }
        if !non_negative(self.angle_padding) {
            return Err(("angle_padding", "must be >= 0".into()));
        }
        if self.samples_angular < 1 {
            return Err(("samples_angular", "must be >= 1".into()));
        }
        if self.samples_radial < 1 {
            return Err(("samples_radial", "must be >= 1".into()));
        }
        if !non_negative(self.arrival_tol) {
            return Err(("arrival_tol", "must be >= 0".into()));
        }
        Ok(())
    }
}

/// Neighbouring region from a collision-free time window `τ`:
/// `l = (v_robot_max + v_obstacle_max)·τ`.
pub fn neighbor_radius_for_horizon<T: Real>(v_robot_max: T, v_obstacle_max: T, tau: T) -> T {
    (v_robot_max + v_obstacle_max) * tau
}

/// Indices (into the slices passed to [`neighbors`]) of the entities a robot reacts to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Neighborhood {
    pub robots: Vec<usize>,
    pub obstacles: Vec<usize>,
}

/// Robots and obstacles whose centroid lies within `l` of `me`. Arrived
/// robots are no longer planned around; stopped robots stay as static hazards.
pub fn neighbors<T: Real>(
    me: &RobotState<T>,
    robots: &[RobotState<T>],
    obstacles: &[ObstacleState<T>],
    l: T,
) -> Neighborhood {
    let x = me.position();
    let robots = robots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.id != me.id && r.status != RobotStatus::Arrived)
        .filter(|(_, r)| r.position().distance(x) <= l)
        .map(|(i, _)| i)
        .collect();
    let obstacles = obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| o.position().distance(x) <= l)
        .map(|(i, _)| i)
        .collect();
    Neighborhood { robots, obstacles }
}

/// Set of relative positions that mean contact.
#[derive(Clone, Debug, PartialEq)]
pub enum CollisionRegion<T> {
    Polygon(ConvexPolygon<T>),
    Disc { center: Vec2<T>, radius: T },
}

impl<T: Real> CollisionRegion<T> {
    /// Earliest time a relative displacement `t·relative_velocity` reaches the region.
    pub fn entry_time(&self, relative_velocity: Vec2<T>) -> Option<T> {
        match self {
            CollisionRegion::Polygon(p) => ray_entry_time(Vec2::zero(), relative_velocity, p),
            CollisionRegion::Disc { center, radius } => {
                let c = *center;
                let gap = c.norm_squared() - *radius * *radius;
                if gap <= T::zero() {
                    return Some(T::zero());
                }
                let a = relative_velocity.norm_squared();
                if a <= T::zero() {
                    return None;
                }
                let half_b = relative_velocity.dot(c);
                let disc = half_b * half_b - a * gap;
                if disc < T::zero() || half_b <= T::zero() {
                    return None;
                }
                Some((half_b - disc.sqrt()) / a)
            }
        }
    }
}

/// Everything the selector needs about one neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct Hazard<T> {
    pub cone: VelocityCone<T>,
    pub region: CollisionRegion<T>,
    pub velocity: Vec2<T>,
}

impl<T: Real> Hazard<T> {
    /// Time until contact if `me` holds `v` and the neighbour holds its
    /// velocity; infinity when they never meet.
    pub fn time_to_collision(&self, v: Vec2<T>) -> T {
        self.region
            .entry_time(v - self.velocity)
            .unwrap_or_else(T::infinity)
    }
}

/// Cone directions and contact region for a polygon pair, planning on the
/// inflated shapes and dropping to the raw shapes once the margin is used up.
fn polytopic_geometry<T: Real>(
    me_raw: &ConvexPolygon<T>,
    me_inflated: &ConvexPolygon<T>,
    other_raw: &ConvexPolygon<T>,
    other_inflated: &ConvexPolygon<T>,
) -> (ConeDirections<T>, CollisionRegion<T>) {
    let (me, other) = if intersects(me_inflated, other_inflated) && !intersects(me_raw, other_raw) {
        (me_raw, other_raw)
    } else {
        (me_inflated, other_inflated)
    };
    (
        cone_directions_polytopic(me, other),
        CollisionRegion::Polygon(minkowski_diff(other, me)),
    )
}

/// Same for discs: planning radii first, raw circumscribed radii once the
/// planning discs touch, and the full plane once even those touch.
fn circular_geometry<T: Real>(
    x_me: Vec2<T>,
    x_other: Vec2<T>,
    combined_planning: T,
    combined_raw: T,
) -> (ConeDirections<T>, CollisionRegion<T>) {
    let dist = x_me.distance(x_other);
    let combined = if dist > combined_planning {
        combined_planning
    } else {
        combined_raw
    };
    (
        cone_directions_circular(x_me, T::zero(), x_other, combined),
        CollisionRegion::Disc {
            center: x_other - x_me,
            radius: combined,
        },
    )
}

/// One hazard per neighbour. Robot neighbours get the method's cone variant;
/// obstacles and stopped robots always get a plain VO.
pub fn build_hazards<T: Real>(
    me: &RobotState<T>,
    robots: &[RobotState<T>],
    obstacles: &[ObstacleState<T>],
    neighborhood: &Neighborhood,
    params: &PolicyParams<T>,
) -> Vec<Hazard<T>> {
    let me_raw = me.shape();
    let me_inflated = inflate(&me_raw, params.margin);
    let x_me = me_raw.centroid();
    let r_me = me_raw.circumradius();
    let model = params.method.shape_model();

    let mut hazards = Vec::with_capacity(neighborhood.robots.len() + neighborhood.obstacles.len());

    let mut push = |other_raw: ConvexPolygon<T>,
                    other_margin: T,
                    velocity: Vec2<T>,
                    variant: ConeVariant| {
        let (dirs, region) = match model {
            ShapeModel::Polytopic => {
                let other_inflated = inflate(&other_raw, other_margin);
                polytopic_geometry(&me_raw, &me_inflated, &other_raw, &other_inflated)
            }
            ShapeModel::Circular => {
                let r_other = other_raw.circumradius();
                circular_geometry(
                    x_me,
                    other_raw.centroid(),
                    r_me + params.margin + r_other + other_margin,
                    r_me + r_other,
                )
            }
        };
        let dirs = dirs.padded(params.angle_padding);
        let cone = match variant {
            ConeVariant::Vo => build_vo(dirs, velocity),
            ConeVariant::Rvo => build_rvo(dirs, me.velocity, velocity),
            ConeVariant::Hrvo => build_hrvo(dirs, me.velocity, velocity),
        };
        hazards.push(Hazard {
            cone,
            region,
            velocity,
        });
    };

    for &j in &neighborhood.robots {
        let other = &robots[j];
        let variant = if other.status == RobotStatus::Stopped {
            ConeVariant::Vo
        } else {
            params.method.variant()
        };
        push(other.shape(), params.margin, other.velocity, variant);
    }
    for &j in &neighborhood.obstacles {
        let obstacle = &obstacles[j];
        push(obstacle.shape(), T::zero(), obstacle.velocity, ConeVariant::Vo);
    }
    hazards
}

/// Combined cone set for one robot.
pub fn combined_cones<T: Real>(
    me: &RobotState<T>,
    robots: &[RobotState<T>],
    obstacles: &[ObstacleState<T>],
    neighborhood: &Neighborhood,
    params: &PolicyParams<T>,
) -> Vec<VelocityCone<T>> {
    build_hazards(me, robots, obstacles, neighborhood, params)
        .into_iter()
        .map(|h| h.cone)
        .collect()
}

/// Full speed toward the goal, capped so one step of `dt` does not overshoot.
pub fn preferred_velocity<T: Real>(me: &RobotState<T>, dt: T) -> Vec2<T> {
    let to_goal = me.goal - me.position();
    let dist = to_goal.norm();
    if dist <= T::GEOM_EPS {
        return Vec2::zero();
    }
    let speed = me.v_max.min(dist / dt);
    to_goal / dist * speed
}

/// Deterministic candidate set: `v_pref`, then the polar grid (direction
/// major, speed minor, directions counterclockwise from +x), then zero.
pub fn candidate_velocities<T: Real>(
    v_pref: Vec2<T>,
    v_max: T,
    samples_angular: usize,
    samples_radial: usize,
) -> Vec<Vec2<T>> {
    let mut out = Vec::with_capacity(samples_angular * samples_radial + 2);
    out.push(v_pref);
    let step = (T::PI() + T::PI()) / T::from_usize_lossy(samples_angular);
    for k in 0..samples_angular {
        let dir = Vec2::from_angle(step * T::from_usize_lossy(k));
        for j in 1..=samples_radial {
            let speed = v_max * T::from_usize_lossy(j) / T::from_usize_lossy(samples_radial);
            out.push(dir * speed);
        }
    }
    out.push(Vec2::zero());
    out
}

/// Time to collision between two placed polygons for a candidate velocity.
pub fn time_to_collision<T: Real>(
    me: &ConvexPolygon<T>,
    other: &ConvexPolygon<T>,
    v_other: Vec2<T>,
    v_candidate: Vec2<T>,
) -> T {
    ray_entry_time(Vec2::zero(), v_candidate - v_other, &minkowski_diff(other, me))
        .unwrap_or_else(T::infinity)
}

/// Earliest collision over all hazards; infinity with no hazards.
pub fn expected_collision_time<T: Real>(hazards: &[Hazard<T>], v: Vec2<T>) -> T {
    hazards
        .iter()
        .map(|h| h.time_to_collision(v))
        .fold(T::infinity(), T::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// A candidate outside every cone existed.
    Free,
    /// Every candidate was inside the cones; penalty minimisation was used.
    Penalty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection<T> {
    pub velocity: Vec2<T>,
    pub branch: Branch,
    /// Index into the candidate list.
    pub index: usize,
}

/// Picks a velocity from `candidates`. Ties go to the earliest candidate.
pub fn select_velocity<T: Real>(
    hazards: &[Hazard<T>],
    v_pref: Vec2<T>,
    candidates: &[Vec2<T>],
    penalty_weight: T,
) -> Selection<T> {
    let cones: Vec<VelocityCone<T>> = hazards.iter().map(|h| h.cone).collect();

    let mut best: Option<(usize, T)> = None;
    for (i, &v) in candidates.iter().enumerate() {
        if set_contains(&cones, v) {
            continue;
        }
        let deviation = (v - v_pref).norm();
        if best.is_none_or(|(_, d)| deviation < d) {
            best = Some((i, deviation));
        }
    }
    if let Some((index, _)) = best {
        return Selection {
            velocity: candidates[index],
            branch: Branch::Free,
            index,
        };
    }

    let mut best: Option<(usize, T)> = None;
    for (i, &v) in candidates.iter().enumerate() {
        let cost = penalty_cost(hazards, v, v_pref, penalty_weight);
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((i, cost));
        }
    }
    let index = best.map_or(0, |(i, _)| i);
    Selection {
        velocity: candidates[index],
        branch: Branch::Penalty,
        index,
    }
}

/// `φ / tc(v) + ‖v − v_pref‖`, with `φ/∞ = 0` and `φ/0 = ∞`.
pub fn penalty_cost<T: Real>(hazards: &[Hazard<T>], v: Vec2<T>, v_pref: Vec2<T>, phi: T) -> T {
    let tc = expected_collision_time(hazards, v);
    let urgency = if tc.is_infinite() {
        T::zero()
    } else if tc <= T::zero() {
        T::infinity()
    } else {
        phi / tc
    };
    urgency + (v - v_pref).norm()
}

/// Outcome of one robot's planning step.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision<T> {
    pub velocity: Vec2<T>,
    pub preferred: Vec2<T>,
    pub branch: Branch,
}

/// Runs the whole pipeline for `robots[index]` against a read-only snapshot.
pub fn decide<T: Real>(
    index: usize,
    robots: &[RobotState<T>],
    obstacles: &[ObstacleState<T>],
    params: &PolicyParams<T>,
    dt: T,
) -> Decision<T> {
    let me = &robots[index];
    let nb = neighbors(me, robots, obstacles, params.neighbor_radius);
    let hazards = build_hazards(me, robots, obstacles, &nb, params);
    let v_pref = preferred_velocity(me, dt);
    let candidates =
        candidate_velocities(v_pref, me.v_max, params.samples_angular, params.samples_radial);
    let sel = select_velocity(&hazards, v_pref, &candidates, params.penalty_weight);
    Decision {
        velocity: sel.velocity,
        preferred: v_pref,
        branch: sel.branch,
    }
}
