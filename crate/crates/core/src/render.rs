//! SVG snapshots of a logged run.
//!
//! The viewport is the 10 m x 10 m arena with y pointing up. Robots are
//! filled in a per-id colour, obstacles in black, goals are hollow circles,
//! earlier robot poses are drawn faintly and moving obstacles leave a dotted
//! trace of the ground already covered.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{world_vertices, ConvexPolygon, Pose};
use crate::scenarios::ARENA_SIZE;
use crate::trajectory::{EntityKind, TrajectoryLog};
use crate::vector::Vec2;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// Ticks between faint past poses.
const TRAIL_EVERY: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("tick {tick} out of range: log holds ticks 0..={last}")]
    TickOutOfRange { tick: usize, last: usize },
    #[error("log holds no ticks")]
    Empty,
}

pub fn robot_color(id: usize) -> &'static str {
    PALETTE[id % PALETTE.len()]
}

fn points(poly: &ConvexPolygon<f64>) -> String {
    poly.vertices()
        .iter()
        .map(|v| format!("{:.4},{:.4}", v.x, v.y))
        .collect::<Vec<_>>()
        .join(" ")
}

fn placed(body: &ConvexPolygon<f64>, position: Vec2<f64>, heading: f64) -> ConvexPolygon<f64> {
    world_vertices(body, &Pose::new(position, heading))
}

/// Renders the state at `tick` together with everything before it.
pub fn render_svg(log: &TrajectoryLog, tick: usize) -> Result<String, RenderError> {
    let last = log.last_tick().ok_or(RenderError::Empty)?;
    if tick > last {
        return Err(RenderError::TickOutOfRange { tick, last });
    }
    let mut svg = String::new();
    let size = ARENA_SIZE;
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="600" height="600">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<g transform="translate(0 {size}) scale(1 -1)">"#).unwrap();

    for o in &log.header.obstacles {
        let Some(path) = &o.path else { continue };
        let now = log
            .records(tick, EntityKind::Obstacle)
            .find(|r| r.id == o.id)
            .map_or(path.start, |r| r.position);
        writeln!(
            svg,
            r#"<line class="obstacle-path" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="black" stroke-width="0.04" stroke-dasharray="0.1 0.1"/>"#,
            path.start.x, path.start.y, now.x, now.y
        )
        .unwrap();
    }

    for r in &log.header.robots {
        writeln!(
            svg,
            r#"<circle class="goal" cx="{:.4}" cy="{:.4}" r="0.12" fill="none" stroke="{}" stroke-width="0.04"/>"#,
            r.goal.x,
            r.goal.y,
            robot_color(r.id)
        )
        .unwrap();
    }

    for k in (0..tick).step_by(TRAIL_EVERY) {
        for rec in log.records(k, EntityKind::Robot) {
            let Some(info) = log.header.robots.iter().find(|r| r.id == rec.id) else { continue };
            writeln!(
                svg,
                r#"<polygon class="trail" points="{}" fill="{}" fill-opacity="0.15" stroke="none"/>"#,
                points(&placed(&info.body, rec.position, rec.heading)),
                robot_color(rec.id)
            )
            .unwrap();
        }
    }

    for rec in log.records(tick, EntityKind::Obstacle) {
        let Some(info) = log.header.obstacles.iter().find(|o| o.id == rec.id) else { continue };
        writeln!(
            svg,
            r#"<polygon class="obstacle" points="{}" fill="black"/>"#,
            points(&placed(&info.body, rec.position, rec.heading))
        )
        .unwrap();
    }

    for rec in log.records(tick, EntityKind::Robot) {
        let Some(info) = log.header.robots.iter().find(|r| r.id == rec.id) else { continue };
        writeln!(
            svg,
            r#"<polygon class="robot" points="{}" fill="{}" fill-opacity="0.85" stroke="black" stroke-width="0.02"/>"#,
            points(&placed(&info.body, rec.position, rec.heading)),
            robot_color(rec.id)
        )
        .unwrap();
    }

    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::scenarios::turnaround_scenario;
    use crate::trajectory::{read_log, write_log};

    fn log() -> TrajectoryLog {
        let mut s = turnaround_scenario();
        s.t_max = 1.0;
        let result = run(&s, true).unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &s, &result).unwrap();
        read_log(buf.as_slice()).unwrap()
    }

    #[test]
    fn draws_every_entity() {
        let log = log();
        let svg = render_svg(&log, 10).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"class="robot""#).count(), 1);
        assert_eq!(svg.matches(r#"class="obstacle""#).count(), 2);
        assert_eq!(svg.matches(r#"class="goal""#).count(), 1);
        assert_eq!(svg.matches(r#"class="trail""#).count(), 2);
        assert_eq!(svg, render_svg(&log, 10).unwrap());
    }

    #[test]
    fn out_of_range_tick() {
        let log = log();
        assert_eq!(
            render_svg(&log, 11),
            Err(RenderError::TickOutOfRange { tick: 11, last: 10 })
        );
    }
}
