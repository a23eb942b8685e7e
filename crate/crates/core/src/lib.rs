//! Velocity-obstacle navigation for convex polygonal robots.
//!
//! Robots and obstacles are convex polygons. Each tick every robot builds
//! a velocity cone per neighbour from the exact polygon pair (or from
//! circumscribed discs, for comparison), picks a velocity outside all of
//! them, and follows it with unicycle kinematics.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar for the common cases.

pub mod cones;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod geometry;
pub mod policy;
pub mod render;
pub mod scalar;
pub mod scenarios;
pub mod trajectory;
pub mod vector;

pub use cones::{ConeDirections, VelocityCone};
pub use dynamics::UnicycleCommand;
pub use engine::{metrics, run, Metrics, Outcome, RunResult, World};
pub use geometry::{ConvexPolygon, GeometryError, Pose};
pub use policy::{Method, ObstacleState, PolicyParams, RobotState, RobotStatus};
pub use scalar::Real;
pub use scenarios::ScenarioConfig;
pub use vector::Vec2;

pub type Point = Vec2<f64>;
pub type Polygon = ConvexPolygon<f64>;
pub type Cone = VelocityCone<f64>;
pub type Robot = RobotState<f64>;
pub type Obstacle = ObstacleState<f64>;
pub type Params = PolicyParams<f64>;
pub type Scenario = ScenarioConfig<f64>;
pub type Simulation = World<f64>;

pub type Point32 = Vec2<f32>;
pub type Polygon32 = ConvexPolygon<f32>;
pub type Cone32 = VelocityCone<f32>;
pub type Robot32 = RobotState<f32>;
pub type Obstacle32 = ObstacleState<f32>;
pub type Params32 = PolicyParams<f32>;
pub type Scenario32 = ScenarioConfig<f32>;
pub type Simulation32 = World<f32>;
