//! Line-delimited JSON trajectory logs.
//!
//! The first line is a header carrying the schema version and the static
//! description of every entity (body, goal, path). Then come one `state`
//! record per entity per tick, ticks contiguous from 0, and a final
//! `summary` record.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{metrics, Metrics, Outcome, RobotOutcome, RunResult};
use crate::geometry::ConvexPolygon;
use crate::policy::{Method, ObstaclePath, RobotStatus};
use crate::scenarios::{ScenarioConfig, SCHEMA_VERSION};
use crate::vector::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Robot,
    Obstacle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotInfo {
    pub id: usize,
    /// Body-frame vertices, centred on the vertex centroid.
    pub body: ConvexPolygon<f64>,
    pub goal: Vec2<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleInfo {
    pub id: usize,
    pub body: ConvexPolygon<f64>,
    pub path: Option<ObstaclePath<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub scenario: String,
    pub method: Method,
    pub dt: f64,
    pub robots: Vec<RobotInfo>,
    pub obstacles: Vec<ObstacleInfo>,
}

/// State of one entity at one tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub tick: usize,
    pub time: f64,
    pub entity: EntityKind,
    pub id: usize,
    pub position: Vec2<f64>,
    pub heading: f64,
    pub velocity: Vec2<f64>,
    /// Robots only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<RobotStatus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub ticks: usize,
    pub final_time: f64,
    pub completed: usize,
    pub deadlocked: usize,
    pub collided: usize,
    pub robots: Vec<RobotOutcome<f64>>,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogLine {
    Header(LogHeader),
    State(TrajectoryRecord),
    Summary(RunSummary),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A fully parsed log.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub header: LogHeader,
    /// `ticks[k]` holds every record of tick `k`, robots first.
    pub ticks: Vec<Vec<TrajectoryRecord>>,
    pub summary: Option<RunSummary>,
}

impl TrajectoryLog {
    pub fn last_tick(&self) -> Option<usize> {
        self.ticks.len().checked_sub(1)
    }

    pub fn records(&self, tick: usize, kind: EntityKind) -> impl Iterator<Item = &TrajectoryRecord> {
        self.ticks
            .get(tick)
            .into_iter()
            .flatten()
            .filter(move |r| r.entity == kind)
    }
}

pub fn header(scenario: &ScenarioConfig<f64>) -> LogHeader {
    let (robots, obstacles) = scenario.states().expect("scenario validated before logging");
    LogHeader {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        method: scenario.params.method,
        dt: scenario.dt,
        robots: robots
            .into_iter()
            .map(|r| RobotInfo {
                id: r.id,
                body: r.body,
                goal: r.goal,
            })
            .collect(),
        obstacles: obstacles
            .into_iter()
            .map(|o| ObstacleInfo {
                id: o.id,
                body: o.body,
                path: o.path,
            })
            .collect(),
    }
}

pub fn summary(result: &RunResult<f64>) -> RunSummary {
    RunSummary {
        ticks: result.ticks,
        final_time: result.final_time,
        completed: result.count(Outcome::Completed),
        deadlocked: result.count(Outcome::Deadlocked),
        collided: result.count(Outcome::Collided),
        robots: result.robots.clone(),
        metrics: metrics(std::slice::from_ref(result)),
    }
}

/// Flattens recorded frames into per-entity records.
pub fn records(result: &RunResult<f64>) -> Vec<TrajectoryRecord> {
    let Some(frames) = &result.trajectory else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for frame in frames {
        let tagged = frame
            .robots
            .iter()
            .map(|e| (EntityKind::Robot, e))
            .chain(frame.obstacles.iter().map(|e| (EntityKind::Obstacle, e)));
        for (entity, e) in tagged {
            out.push(TrajectoryRecord {
                tick: frame.tick,
                time: frame.time,
                entity,
                id: e.id,
                position: e.pose.position,
                heading: e.pose.heading,
                velocity: e.velocity,
                status: e.status,
            });
        }
    }
    out
}

/// Writes header, state records and summary, one JSON object per line.
pub fn write_log<W: Write>(
    mut out: W,
    scenario: &ScenarioConfig<f64>,
    result: &RunResult<f64>,
) -> io::Result<()> {
    let mut line = |l: &LogLine| -> io::Result<()> {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n")
    };
    line(&LogLine::Header(header(scenario)))?;
    for r in records(result) {
        line(&LogLine::State(r))?;
    }
    line(&LogLine::Summary(summary(result)))?;
    out.flush()
}

pub fn read_log<R: BufRead>(input: R) -> Result<TrajectoryLog, LogError> {
    let mut header = None;
    let mut ticks: Vec<Vec<TrajectoryRecord>> = Vec::new();
    let mut summary = None;
    for (i, text) in input.lines().enumerate() {
        let text = text?;
        let line = i + 1;
        let fail = |message: String| LogError::Format { line, message };
        if text.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
        match parsed {
            LogLine::Header(h) => {
                if header.is_some() {
                    return Err(fail("duplicate header".into()));
                }
                if h.schema_version != SCHEMA_VERSION {
                    return Err(fail(format!(
                        "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                        h.schema_version
                    )));
                }
                header = Some(h);
            }
            LogLine::State(r) => {
                if header.is_none() {
                    return Err(fail("state record before header".into()));
                }
                if r.tick == ticks.len() {
                    ticks.push(Vec::new());
                } else if r.tick + 1 != ticks.len() {
                    return Err(fail(format!("tick {} out of sequence", r.tick)));
                }
                ticks.last_mut().expect("pushed above").push(r);
            }
            LogLine::Summary(s) => summary = Some(s),
        }
    }
    let header = header.ok_or(LogError::Format {
        line: 0,
        message: "missing header".into(),
    })?;
    Ok(TrajectoryLog {
        header,
        ticks,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::scenarios::turnaround_scenario;

    #[test]
    fn write_then_read() {
        let mut s = turnaround_scenario();
        s.t_max = 1.0;
        let result = run(&s, true).unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &s, &result).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"kind\":\"header\"") && first.contains("\"schema_version\":1"));

        let log = read_log(buf.as_slice()).unwrap();
        assert_eq!(log.ticks.len(), result.ticks + 1);
        for (k, tick) in log.ticks.iter().enumerate() {
            assert_eq!(tick.len(), 3);
            assert!(tick.iter().all(|r| r.tick == k));
        }
        assert_eq!(log.header.obstacles.len(), 2);
        assert_eq!(log.summary.unwrap().ticks, result.ticks);
    }

    #[test]
    fn rejects_gaps_and_versions() {
        let mut s = turnaround_scenario();
        s.t_max = 0.3;
        let result = run(&s, true).unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &s, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();

        let gapped: String = lines
            .iter()
            .filter(|l| !l.contains("\"tick\":1,"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(read_log(gapped.as_bytes()), Err(LogError::Format { .. })));

        let versioned = text.replacen("\"schema_version\":1", "\"schema_version\":99", 1);
        let err = read_log(versioned.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
    }
}
