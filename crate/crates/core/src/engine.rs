//! Synchronous simulation loop.
//!
//! Each tick has three phases. Every active robot plans against the same
//! start-of-tick snapshot; then all robots and obstacles move; then every
//! pair is checked for contact on the uninflated shapes (at the end of the
//! tick and at its midpoint) and touching robots stop for good.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{step, to_unicycle};
use crate::geometry::{intersects, world_vertices, ConvexPolygon, Pose};
use crate::policy::{decide, ObstacleState, PolicyParams, RobotState, RobotStatus};
use crate::scalar::Real;
use crate::scenarios::{check_disjoint, ScenarioConfig, ScenarioError};
use crate::vector::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Deadlocked,
    Collided,
}

/// Pose and motion of one entity at one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityFrame<T> {
    pub id: usize,
    pub pose: Pose<T>,
    pub velocity: Vec2<T>,
    /// `None` for obstacles.
    pub status: Option<RobotStatus>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    pub tick: usize,
    pub time: T,
    pub robots: Vec<EntityFrame<T>>,
    pub obstacles: Vec<EntityFrame<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct World<T> {
    pub tick: usize,
    pub time: T,
    pub dt: T,
    pub t_max: T,
    pub params: PolicyParams<T>,
    /// Sorted by id; `robots[i].id == i`.
    pub robots: Vec<RobotState<T>>,
    pub obstacles: Vec<ObstacleState<T>>,
    /// Centroid path length per robot (m).
    pub travel: Vec<T>,
    /// Tick at which each robot arrived or stopped.
    pub finished_at: Vec<Option<usize>>,
}

/// Which entities touched during the last tick.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TickReport {
    pub newly_stopped: Vec<usize>,
    pub newly_arrived: Vec<usize>,
}

impl<T: Real> World<T> {
    /// Builds the initial world. Rejects invalid configs and overlapping
    /// initial shapes.
    pub fn from_scenario(scenario: &ScenarioConfig<T>) -> Result<Self, EngineError> {
        let (robots, obstacles) = scenario.states()?;
        World::new(robots, obstacles, scenario.params, scenario.dt, scenario.t_max)
    }

    /// Builds a world from explicit states. Robots are re-ordered by id,
    /// which must be `0..n`.
    pub fn new(
        mut robots: Vec<RobotState<T>>,
        mut obstacles: Vec<ObstacleState<T>>,
        params: PolicyParams<T>,
        dt: T,
        t_max: T,
    ) -> Result<Self, EngineError> {
        robots.sort_by_key(|r| r.id);
        obstacles.sort_by_key(|o| o.id);
        for (i, r) in robots.iter().enumerate() {
            if r.id != i {
                return Err(ScenarioError::new(
                    format!("robots[{i}].id"),
                    "robot ids must be 0..n without gaps",
                )
                .into());
            }
        }
        for (i, o) in obstacles.iter().enumerate() {
            if o.id != i {
                return Err(ScenarioError::new(
                    format!("obstacles[{i}].id"),
                    "obstacle ids must be 0..n without gaps",
                )
                .into());
            }
        }
        for o in obstacles.iter_mut() {
            o.advance_to(T::zero());
        }
        check_disjoint(&robots, &obstacles)?;
        let n = robots.len();
        Ok(World {
            tick: 0,
            time: T::zero(),
            dt,
            t_max,
            params,
            robots,
            obstacles,
            travel: vec![T::zero(); n],
            finished_at: vec![None; n],
        })
    }

    pub fn any_active(&self) -> bool {
        self.robots.iter().any(|r| r.is_active())
    }

    /// Number of ticks that fit in the horizon.
    pub fn max_ticks(&self) -> usize {
        if self.t_max <= T::zero() {
            return 0;
        }
        (self.t_max / self.dt + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0)
    }

    pub fn frame(&self) -> Frame<T> {
        Frame {
            tick: self.tick,
            time: self.time,
            robots: self
                .robots
                .iter()
                .map(|r| EntityFrame {
                    id: r.id,
                    pose: r.pose,
                    velocity: r.velocity,
                    status: Some(r.status),
                })
                .collect(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| EntityFrame {
                    id: o.id,
                    pose: o.pose,
                    velocity: o.velocity,
                    status: None,
                })
                .collect(),
        }
    }

    /// Advances one tick.
    pub fn step(&mut self) -> TickReport {
        let dt = self.dt;

        // Phase 1: plan against the frozen snapshot.
        let commands: Vec<Option<Vec2<T>>> = (0..self.robots.len())
            .map(|i| {
                self.robots[i].is_active().then(|| {
                    decide(i, &self.robots, &self.obstacles, &self.params, dt).velocity
                })
            })
            .collect();

        // Phase 2: move everything.
        let robot_before: Vec<Pose<T>> = self.robots.iter().map(|r| r.pose).collect();
        let obstacle_before: Vec<Pose<T>> = self.obstacles.iter().map(|o| o.pose).collect();
        for (i, robot) in self.robots.iter_mut().enumerate() {
            match commands[i] {
                Some(v_new) => {
                    let cmd = to_unicycle(
                        v_new,
                        robot.pose.heading,
                        self.params.eta,
                        robot.v_max,
                        robot.w_max,
                    );
                    let before = robot.position();
                    robot.pose = step(&robot.pose, &cmd, dt);
                    let moved = robot.position() - before;
                    robot.velocity = moved / dt;
                    self.travel[i] = self.travel[i] + moved.norm();
                }
                None => robot.velocity = Vec2::zero(),
            }
        }
        let next_tick = self.tick + 1;
        let next_time = T::from_usize_lossy(next_tick) * dt;
        for o in self.obstacles.iter_mut() {
            o.advance_to(next_time);
        }

        // Phase 3: contact and arrival.
        let shape_pair = |body: &ConvexPolygon<T>, before: &Pose<T>, after: &Pose<T>| {
            (
                world_vertices(body, &before.midpoint(after)),
                world_vertices(body, after),
            )
        };
        let robot_shapes: Vec<(ConvexPolygon<T>, ConvexPolygon<T>)> = self
            .robots
            .iter()
            .zip(&robot_before)
            .map(|(r, before)| shape_pair(&r.body, before, &r.pose))
            .collect();
        let obstacle_shapes: Vec<(ConvexPolygon<T>, ConvexPolygon<T>)> = self
            .obstacles
            .iter()
            .zip(&obstacle_before)
            .map(|(o, before)| shape_pair(&o.body, before, &o.pose))
            .collect();
        let touching = |a: &(ConvexPolygon<T>, ConvexPolygon<T>), b: &(ConvexPolygon<T>, ConvexPolygon<T>)| {
            intersects(&a.1, &b.1) || intersects(&a.0, &b.0)
        };

        let mut hit = vec![false; self.robots.len()];
        for (i, si) in robot_shapes.iter().enumerate() {
            for (j, sj) in robot_shapes.iter().enumerate().skip(i + 1) {
                if touching(si, sj) {
                    hit[i] = true;
                    hit[j] = true;
                }
            }
            if obstacle_shapes.iter().any(|so| touching(si, so)) {
                hit[i] = true;
            }
        }

        let mut report = TickReport::default();
        for (i, robot) in self.robots.iter_mut().enumerate() {
            if hit[i] && robot.is_active() {
                robot.status = RobotStatus::Stopped;
                robot.velocity = Vec2::zero();
                self.finished_at[i] = Some(next_tick);
                report.newly_stopped.push(i);
            }
        }
        let tol = self.params.arrival_tol;
        for (i, robot) in self.robots.iter_mut().enumerate() {
            if robot.is_active() && robot.position().distance(robot.goal) <= tol {
                robot.status = RobotStatus::Arrived;
                self.finished_at[i] = Some(next_tick);
                report.newly_arrived.push(i);
            }
        }

        self.tick = next_tick;
        self.time = next_time;
        report
    }

    fn outcomes(&self) -> Vec<RobotOutcome<T>> {
        self.robots
            .iter()
            .enumerate()
            .map(|(i, r)| RobotOutcome {
                id: r.id,
                outcome: match r.status {
                    RobotStatus::Arrived => Outcome::Completed,
                    RobotStatus::Stopped => Outcome::Collided,
                    RobotStatus::Active => Outcome::Deadlocked,
                },
                travel_distance: self.travel[i],
                finish_time: self.finished_at[i].map(|t| T::from_usize_lossy(t) * self.dt),
            })
            .collect()
    }
}

/// Advances a world by one tick.
pub fn tick<T: Real>(mut world: World<T>) -> World<T> {
    world.step();
    world
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotOutcome<T> {
    pub id: usize,
    pub outcome: Outcome,
    pub travel_distance: T,
    /// Time of arrival or collision.
    pub finish_time: Option<T>,
}

#[derive(Clone, Debug)]
pub struct RunResult<T> {
    pub robots: Vec<RobotOutcome<T>>,
    pub ticks: usize,
    pub final_time: T,
    /// Frame 0 is the initial state; present only when recording was asked for.
    pub trajectory: Option<Vec<Frame<T>>>,
    pub wall_clock: Duration,
}

impl<T: Real> RunResult<T> {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.robots.iter().filter(|r| r.outcome == outcome).count()
    }
}

/// Runs a scenario until every robot has arrived or stopped, or the horizon
/// is reached.
pub fn run<T: Real>(scenario: &ScenarioConfig<T>, record: bool) -> Result<RunResult<T>, EngineError> {
    let world = World::from_scenario(scenario)?;
    Ok(run_world(world, record))
}

pub fn run_world<T: Real>(mut world: World<T>, record: bool) -> RunResult<T> {
    let started = Instant::now();
    let max_ticks = world.max_ticks();
    let mut trajectory = record.then(|| vec![world.frame()]);
    while world.tick < max_ticks && world.any_active() {
        world.step();
        if let Some(frames) = trajectory.as_mut() {
            frames.push(world.frame());
        }
    }
    RunResult {
        robots: world.outcomes(),
        ticks: world.tick,
        final_time: world.time,
        trajectory,
        wall_clock: started.elapsed(),
    }
}

/// Aggregate outcome rates over one or more runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub robots: usize,
    pub completed: usize,
    pub deadlocked: usize,
    pub collided: usize,
    /// Percent of robots that reached their goal.
    pub completion_rate: f64,
    /// Percent of robots still moving, collision-free, at the horizon.
    pub deadlock_rate: f64,
    /// Mean travel distance over completed robots; `None` if none completed.
    pub avg_travel_distance: Option<f64>,
    /// Population standard deviation of the same.
    pub distance_std: Option<f64>,
}

pub fn metrics<T: Real>(results: &[RunResult<T>]) -> Metrics {
    let all: Vec<&RobotOutcome<T>> = results.iter().flat_map(|r| r.robots.iter()).collect();
    let robots = all.len();
    let count = |o: Outcome| all.iter().filter(|r| r.outcome == o).count();
    let completed = count(Outcome::Completed);
    let deadlocked = count(Outcome::Deadlocked);
    let collided = count(Outcome::Collided);
    let pct = |k: usize| {
        if robots == 0 {
            0.0
        } else {
            100.0 * k as f64 / robots as f64
        }
    };
    let distances: Vec<f64> = all
        .iter()
        .filter(|r| r.outcome == Outcome::Completed)
        .map(|r| r.travel_distance.to_f64_lossy())
        .collect();
    let (avg, std) = if distances.is_empty() {
        (None, None)
    } else {
        let n = distances.len() as f64;
        let mean = distances.iter().sum::<f64>() / n;
        let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(var.sqrt()))
    };
    Metrics {
        robots,
        completed,
        deadlocked,
        collided,
        completion_rate: pct(completed),
        deadlock_rate: pct(deadlocked),
        avg_travel_distance: avg,
        distance_std: std,
    }
}
