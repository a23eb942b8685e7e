//! Scenario descriptions and the built-in scenario families.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{metrics, run, Metrics};
use crate::geometry::{intersects, min_distance, world_vertices, ConvexPolygon, Pose};
use crate::policy::{Method, ObstaclePath, ObstacleState, PolicyParams, RobotState, RobotStatus};
use crate::scalar::Real;
use crate::vector::Vec2;

/// Current config and log schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Robots and obstacles built from a config, in id order.
pub type EntityStates<T> = (Vec<RobotState<T>>, Vec<ObstacleState<T>>);

/// Side length (m) of the square arena that goals must lie in.
pub const ARENA_SIZE: f64 = 10.0;

/// Centre of the start/goal circle used by the circle and random families.
pub const ARENA_CENTER: Vec2<f64> = Vec2::new(5.0, 5.0);

/// Radius (m) of that circle.
pub const CIRCLE_RADIUS: f64 = 4.0;

/// Gap (m) kept between initial shapes in random scenarios: twice the
/// default planning margin, so inflated shapes start disjoint.
pub const START_CLEARANCE: f64 = 0.3;

pub const MAX_REJECTIONS: usize = 10_000;

/// Base robot footprint of the random family, scaled by `ratio`.
pub const RANDOM_ROBOT_LENGTH: f64 = 1.0;
pub const RANDOM_ROBOT_WIDTH: f64 = 0.6;
pub const RANDOM_ROBOT_COUNT: usize = 8;

/// A field-level validation failure.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{field}: {reason}")]
pub struct ScenarioError {
    pub field: String,
    pub reason: String,
}

impl ScenarioError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("random scenario (seed {seed}, ratio {ratio}) not placed after {rejections} rejections")]
pub struct GenerationError {
    pub seed: u64,
    pub ratio: f64,
    pub rejections: usize,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_dt<T: Real>() -> T {
    T::lit(0.1)
}

fn default_t_max<T: Real>() -> T {
    T::lit(30.0)
}

fn default_v_max<T: Real>() -> T {
    T::lit(1.5)
}

fn default_w_max<T: Real>() -> T {
    T::lit(1.0)
}

/// One robot. `start` and `goal` locate the vertex centroid of the body;
/// bodies are re-centred on their centroid when the world is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct RobotSpec<T> {
    pub body: Vec<Vec2<T>>,
    pub start: Vec2<T>,
    pub goal: Vec2<T>,
    /// Initial heading (rad); faces the goal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<T>,
    #[serde(default = "default_v_max")]
    pub v_max: T,
    #[serde(default = "default_w_max")]
    pub w_max: T,
}

/// Straight-line motion from the obstacle's initial position to `end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec<T> {
    pub end: Vec2<T>,
    pub speed: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ObstacleSpec<T> {
    pub body: Vec<Vec2<T>>,
    pub position: Vec2<T>,
    #[serde(default = "T::zero")]
    pub heading: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSpec<T>>,
}

/// Declarative world description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ScenarioConfig<T> {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: T,
    #[serde(default = "default_t_max")]
    pub t_max: T,
    #[serde(default)]
    pub params: PolicyParams<T>,
    pub robots: Vec<RobotSpec<T>>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec<T>>,
}

fn body_polygon<T: Real>(field: String, body: &[Vec2<T>]) -> Result<ConvexPolygon<T>, ScenarioError> {
    let poly = ConvexPolygon::new(body.to_vec()).map_err(|e| ScenarioError::new(field, e.to_string()))?;
    let c = poly.centroid();
    Ok(poly.translated(-c))
}

fn finite_point<T: Real>(field: String, p: Vec2<T>) -> Result<(), ScenarioError> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::new(field, "must be finite"))
    }
}

impl<T: Real> RobotSpec<T> {
    pub fn new(body: ConvexPolygon<T>, start: Vec2<T>, goal: Vec2<T>) -> Self {
        RobotSpec {
            body: body.vertices().to_vec(),
            start,
            goal,
            heading: None,
            v_max: default_v_max(),
            w_max: default_w_max(),
        }
    }

    /// Builds the initial robot state, checking every field.
    pub fn to_state(&self, id: usize) -> Result<RobotState<T>, ScenarioError> {
        let at = |f: &str| format!("robots[{id}].{f}");
        let body = body_polygon(at("body"), &self.body)?;
        finite_point(at("start"), self.start)?;
        finite_point(at("goal"), self.goal)?;
        let arena = T::lit(ARENA_SIZE);
        let inside = |v: T| v >= T::zero() && v <= arena;
        if !(inside(self.goal.x) && inside(self.goal.y)) {
            return Err(ScenarioError::new(at("goal"), "must lie inside the 10 m x 10 m arena"));
        }
        if !(self.v_max > T::zero() && self.v_max.is_finite()) {
            return Err(ScenarioError::new(at("v_max"), "must be > 0"));
        }
        if !(self.w_max > T::zero() && self.w_max.is_finite()) {
            return Err(ScenarioError::new(at("w_max"), "must be > 0"));
        }
        let heading = match self.heading {
            Some(h) if !h.is_finite() => return Err(ScenarioError::new(at("heading"), "must be finite")),
            Some(h) => h,
            None => (self.goal - self.start).angle(),
        };
        Ok(RobotState {
            id,
            body,
            pose: Pose::new(self.start, heading),
            velocity: Vec2::zero(),
            v_max: self.v_max,
            w_max: self.w_max,
            goal: self.goal,
            status: RobotStatus::Active,
        })
    }
}

impl<T: Real> ObstacleSpec<T> {
    pub fn fixed(body: ConvexPolygon<T>, position: Vec2<T>) -> Self {
        ObstacleSpec {
            body: body.vertices().to_vec(),
            position,
            heading: T::zero(),
            path: None,
        }
    }

    pub fn moving(body: ConvexPolygon<T>, start: Vec2<T>, end: Vec2<T>, speed: T) -> Self {
        ObstacleSpec {
            path: Some(PathSpec { end, speed }),
            ..ObstacleSpec::fixed(body, start)
        }
    }

    pub fn to_state(&self, id: usize) -> Result<ObstacleState<T>, ScenarioError> {
        let at = |f: &str| format!("obstacles[{id}].{f}");
        let body = body_polygon(at("body"), &self.body)?;
        finite_point(at("position"), self.position)?;
        if !self.heading.is_finite() {
            return Err(ScenarioError::new(at("heading"), "must be finite"));
        }
        let path = match &self.path {
            None => None,
            Some(p) => {
                finite_point(at("path.end"), p.end)?;
                if !(p.speed >= T::zero() && p.speed.is_finite()) {
                    return Err(ScenarioError::new(at("path.speed"), "must be >= 0"));
                }
                Some(ObstaclePath {
                    start: self.position,
                    end: p.end,
                    speed: p.speed,
                })
            }
        };
        Ok(ObstacleState {
            id,
            body,
            pose: Pose::new(self.position, self.heading),
            velocity: Vec2::zero(),
            path,
        })
    }
}

/// Fails on the first pair of initial shapes that touch.
pub fn check_disjoint<T: Real>(
    robots: &[RobotState<T>],
    obstacles: &[ObstacleState<T>],
) -> Result<(), ScenarioError> {
    let robot_shapes: Vec<_> = robots.iter().map(|r| r.shape()).collect();
    let obstacle_shapes: Vec<_> = obstacles.iter().map(|o| o.shape()).collect();
    for i in 0..robot_shapes.len() {
        for j in 0..i {
            if intersects(&robot_shapes[i], &robot_shapes[j]) {
                return Err(ScenarioError::new(
                    format!("robots[{i}].start"),
                    format!("initial shape overlaps robots[{j}]"),
                ));
            }
        }
        for (k, o) in obstacle_shapes.iter().enumerate() {
            if intersects(&robot_shapes[i], o) {
                return Err(ScenarioError::new(
                    format!("robots[{i}].start"),
                    format!("initial shape overlaps obstacles[{k}]"),
                ));
            }
        }
    }
    Ok(())
}

impl<T: Real> ScenarioConfig<T> {
    /// A config with default timing and parameters and no entities.
    pub fn empty() -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            name: String::new(),
            seed: 0,
            dt: default_dt(),
            t_max: default_t_max(),
            params: PolicyParams::default(),
            robots: Vec::new(),
            obstacles: Vec::new(),
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.params.method = method;
        self
    }

    /// Initial robot and obstacle states, after checking every field.
    pub fn states(&self) -> Result<EntityStates<T>, ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::new(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(ScenarioError::new("dt", "must be > 0"));
        }
        if !(self.t_max >= T::zero() && self.t_max.is_finite()) {
            return Err(ScenarioError::new("t_max", "must be >= 0"));
        }
        self.params
            .validate()
            .map_err(|(field, reason)| ScenarioError::new(format!("params.{field}"), reason))?;
        if self.robots.is_empty() {
            return Err(ScenarioError::new("robots", "at least one robot is required"));
        }
        let robots = self
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_state(i))
            .collect::<Result<Vec<_>, _>>()?;
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| o.to_state(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((robots, obstacles))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let (robots, obstacles) = self.states()?;
        check_disjoint(&robots, &obstacles)
    }

    pub fn cast<U: Real>(&self) -> ScenarioConfig<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        let cv = |v: Vec2<T>| v.cast::<U>();
        let p = &self.params;
        ScenarioConfig {
            schema_version: self.schema_version,
            name: self.name.clone(),
            seed: self.seed,
            dt: c(self.dt),
            t_max: c(self.t_max),
            params: PolicyParams {
                method: p.method,
                neighbor_radius: c(p.neighbor_radius),
                penalty_weight: c(p.penalty_weight),
                margin: c(p.margin),
                eta: c(p.eta),
                angle_padding: c(p.angle_padding),
                samples_angular: p.samples_angular,
                samples_radial: p.samples_radial,
                arrival_tol: c(p.arrival_tol),
            },
            robots: self
                .robots
                .iter()
                .map(|r| RobotSpec {
                    body: r.body.iter().copied().map(cv).collect(),
                    start: cv(r.start),
                    goal: cv(r.goal),
                    heading: r.heading.map(c),
                    v_max: c(r.v_max),
                    w_max: c(r.w_max),
                })
                .collect(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleSpec {
                    body: o.body.iter().copied().map(cv).collect(),
                    position: cv(o.position),
                    heading: c(o.heading),
                    path: o.path.as_ref().map(|p| PathSpec {
                        end: cv(p.end),
                        speed: c(p.speed),
                    }),
                })
                .collect(),
        }
    }
}

/// Eight distinct body shapes cycled through by the circle family.
fn circle_bodies() -> Vec<ConvexPolygon<f64>> {
    vec![
        ConvexPolygon::rectangle(0.8, 0.5),
        ConvexPolygon::regular(3, 0.45, 0.0),
        ConvexPolygon::regular(5, 0.4, 0.0),
        ConvexPolygon::rectangle(0.6, 0.6),
        ConvexPolygon::regular(6, 0.4, 0.0),
        ConvexPolygon::rectangle(0.9, 0.4),
        ConvexPolygon::regular(4, 0.45, 0.0),
        ConvexPolygon::new(vec![
            Vec2::new(-0.4, -0.25),
            Vec2::new(0.35, -0.3),
            Vec2::new(0.45, 0.2),
            Vec2::new(-0.2, 0.35),
        ])
        .expect("hand-checked convex quadrilateral"),
    ]
}

fn scaled(poly: &ConvexPolygon<f64>, s: f64) -> ConvexPolygon<f64> {
    ConvexPolygon::new(poly.vertices().iter().map(|&v| v * s).collect()).expect("scaling keeps convexity")
}

/// `n` heterogeneous robots evenly spaced on the circle of radius 4 m
/// about the arena centre, each heading for the antipodal point. Shapes
/// shrink by `8/n` beyond eight robots so neighbours stay apart.
pub fn circle_scenario(n: usize) -> ScenarioConfig<f64> {
    let bodies = circle_bodies();
    let scale = (8.0 / n as f64).min(1.0);
    let robots = (0..n)
        .map(|i| {
            let angle = TAU * i as f64 / n as f64;
            let offset = Vec2::from_angle(angle) * CIRCLE_RADIUS;
            let body = scaled(&bodies[i % bodies.len()], scale);
            RobotSpec::new(body, ARENA_CENTER + offset, ARENA_CENTER - offset)
        })
        .collect();
    ScenarioConfig {
        name: format!("circle-{n}"),
        robots,
        ..ScenarioConfig::empty()
    }
}

/// Eight `ratio`-scaled 1.0 m x 0.6 m rectangles on the radius-4 circle.
///
/// Start angles are drawn one at a time from a ChaCha8 stream seeded with
/// `seed`. A draw is rejected when the rectangle, placed there facing the
/// centre, comes within 0.3 m of one placed earlier. Each goal is the antipodal point of
/// its start.
pub fn random_scenario(seed: u64, ratio: f64) -> Result<ScenarioConfig<f64>, GenerationError> {
    let body = ConvexPolygon::rectangle(RANDOM_ROBOT_LENGTH * ratio, RANDOM_ROBOT_WIDTH * ratio);
    let place = |angle: f64| {
        let pose = Pose::new(ARENA_CENTER + Vec2::from_angle(angle) * CIRCLE_RADIUS, angle + PI);
        world_vertices(&body, &pose)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles: Vec<f64> = Vec::with_capacity(RANDOM_ROBOT_COUNT);
    let mut placed: Vec<ConvexPolygon<f64>> = Vec::with_capacity(RANDOM_ROBOT_COUNT);
    let mut rejections = 0;
    while angles.len() < RANDOM_ROBOT_COUNT {
        let candidate: f64 = rng.gen_range(0.0..TAU);
        let shape = place(candidate);
        if placed.iter().all(|p| min_distance(p, &shape) >= START_CLEARANCE) {
            angles.push(candidate);
            placed.push(shape);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(GenerationError {
                    seed,
                    ratio,
                    rejections,
                });
            }
        }
    }
    let robots = angles
        .iter()
        .map(|&a| {
            let offset = Vec2::from_angle(a) * CIRCLE_RADIUS;
            RobotSpec::new(body.clone(), ARENA_CENTER + offset, ARENA_CENTER - offset)
        })
        .collect();
    Ok(ScenarioConfig {
        name: format!("random-r{ratio}-s{seed}"),
        seed,
        robots,
        ..ScenarioConfig::empty()
    })
}

/// Five robots crossing a field with two fixed and two moving obstacles.
///
/// The moving obstacles follow (8.85, 2.35) to (5.0, 2.35) and (4.4, 4.75)
/// to (8.0, 4.75) at 1 m/s. Robot placements and the fixed obstacles are a
/// reconstruction of the reference layout, committed as
/// `scenarios/obstacles.toml`.
pub fn obstacle_scenario() -> ScenarioConfig<f64> {
    let robot = |body: ConvexPolygon<f64>, start: (f64, f64), goal: (f64, f64)| {
        RobotSpec::new(body, Vec2::new(start.0, start.1), Vec2::new(goal.0, goal.1))
    };
    let robots = vec![
        robot(ConvexPolygon::rectangle(0.8, 0.5), (1.0, 5.0), (3.5, 9.0)),
        robot(ConvexPolygon::regular(3, 0.45, 0.0), (3.5, 7.5), (9.5, 7.5)),
        robot(ConvexPolygon::regular(5, 0.4, 0.0), (7.5, 9.5), (5.2, 6.2)),
        robot(ConvexPolygon::rectangle(0.6, 0.6), (6.5, 1.0), (6.5, 6.5)),
        robot(ConvexPolygon::regular(6, 0.4, 0.0), (9.0, 3.5), (3.0, 3.5)),
    ];
    let mover = ConvexPolygon::rectangle(0.6, 0.4);
    let obstacles = vec![
        ObstacleSpec::fixed(ConvexPolygon::regular(5, 0.6, FRAC_PI_4), Vec2::new(2.5, 6.5)),
        ObstacleSpec::fixed(ConvexPolygon::rectangle(1.2, 0.8), Vec2::new(6.5, 7.5)),
        ObstacleSpec::moving(mover.clone(), Vec2::new(8.85, 2.35), Vec2::new(5.0, 2.35), 1.0),
        ObstacleSpec::moving(mover, Vec2::new(4.4, 4.75), Vec2::new(8.0, 4.75), 1.0),
    ];
    ScenarioConfig {
        name: "obstacles".into(),
        robots,
        obstacles,
        ..ScenarioConfig::empty()
    }
}

/// One 0.8 m x 0.5 m robot from (9, 5) to (1, 5) through a 1.0 m gap
/// between a short block above and a long block below. The gap admits the
/// margin-inflated rectangle but not its margin-inflated circumscribed
/// disc, and the short block leaves a detour over the top. Obstacle
/// geometry is a reconstruction, committed as `scenarios/turnaround.toml`.
pub fn turnaround_scenario() -> ScenarioConfig<f64> {
    ScenarioConfig {
        name: "turnaround".into(),
        robots: vec![RobotSpec::new(
            ConvexPolygon::rectangle(0.8, 0.5),
            Vec2::new(9.0, 5.0),
            Vec2::new(1.0, 5.0),
        )],
        obstacles: vec![
            ObstacleSpec::fixed(ConvexPolygon::rectangle(1.0, 1.0), Vec2::new(5.0, 6.0)),
            ObstacleSpec::fixed(ConvexPolygon::rectangle(1.0, 3.0), Vec2::new(5.0, 3.0)),
        ],
        ..ScenarioConfig::empty()
    }
}

/// Ratios swept by the default benchmark.
pub const DEFAULT_RATIOS: [f64; 8] = [0.4, 0.6, 0.8, 1.0, 1.1, 1.2, 1.3, 1.4];

/// One (ratio, method) cell of the benchmark table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub ratio: f64,
    pub method: Method,
    pub metrics: Metrics,
    pub trials: usize,
    pub seed: u64,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |d| format!("{d:.2}"));
        write!(
            f,
            "ratio {:.1} {:<6} completion {:>5.1}% deadlock {:>5.1}% distance {}/{}",
            self.ratio,
            self.method.name(),
            self.metrics.completion_rate,
            self.metrics.deadlock_rate,
            opt(self.metrics.avg_travel_distance),
            opt(self.metrics.distance_std),
        )
    }
}

/// Runs `trials` random scenarios per (ratio, method), seeded
/// `base_seed + trial` so every method sees the same scenario set.
///
/// Runs execute on the rayon pool; rows come back ratio-major in the order
/// given.
pub fn benchmark(
    methods: &[Method],
    ratios: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<BenchRow>, GenerationError> {
    let scenarios: Vec<Vec<ScenarioConfig<f64>>> = ratios
        .iter()
        .map(|&ratio| {
            (0..trials)
                .map(|t| random_scenario(base_seed.wrapping_add(t as u64), ratio))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let cells: Vec<(usize, Method)> = (0..ratios.len())
        .flat_map(|r| methods.iter().map(move |&m| (r, m)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (r, method) = cells[c];
            let config = scenarios[r][t].clone().with_method(method);
            run(&config, false).expect("generated scenarios are valid")
        })
        .collect();
    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, &(r, method))| BenchRow {
            ratio: ratios[r],
            method,
            metrics: metrics(&results[c * trials..(c + 1) * trials]),
            trials,
            seed: base_seed,
        })
        .collect())
}
