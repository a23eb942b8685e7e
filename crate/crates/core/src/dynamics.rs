//! Unicycle conversion and integration.

use serde::{Deserialize, Serialize};

use crate::geometry::Pose;
use crate::scalar::{wrap_angle, Real};
use crate::vector::Vec2;

/// Forward speed (m/s) and turn rate (rad/s).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnicycleCommand<T> {
    pub v: T,
    pub w: T,
}

/// Converts a planar velocity into a unicycle command.
///
/// The heading error `ς = heading − direction(v_new)` drives the turn rate
/// `w = −ς/η`; forward speed is `‖v_new‖·cos ς`. Both are clamped, and the
/// robot never reverses: a target behind it yields a pure rotation.
pub fn to_unicycle<T: Real>(
    v_new: Vec2<T>,
    heading: T,
    eta: T,
    v_max: T,
    w_max: T,
) -> UnicycleCommand<T> {
    let speed = v_new.norm();
    if speed <= T::zero() {
        return UnicycleCommand {
            v: T::zero(),
            w: T::zero(),
        };
    }
    let error = wrap_angle(heading - v_new.angle());
    let v = (speed * error.cos()).max(T::zero()).min(v_max);
    let w = (-error / eta).max(-w_max).min(w_max);
    UnicycleCommand { v, w }
}

/// One explicit Euler step.
pub fn step<T: Real>(pose: &Pose<T>, cmd: &UnicycleCommand<T>, dt: T) -> Pose<T> {
    let forward = Vec2::from_angle(pose.heading) * (cmd.v * dt);
    Pose::new(pose.position + forward, pose.heading + cmd.w * dt)
}
