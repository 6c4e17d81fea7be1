//! Kinematic bicycle model.

use crate::geometry::normalize_angle;
use crate::scenario::Waypoint;

/// One explicit-Euler step of the kinematic bicycle model with wheelbase `l`:
/// position advances along the current heading, the heading turns by
/// `(v / l) * tan(steer) * dt`, and speed is clamped at zero.
pub fn step_ego(state: &Waypoint, accel: f64, steer: f64, wheelbase: f64, dt: f64) -> Waypoint {
    let v = state.v;
    let x = state.position.x + v * state.heading.cos() * dt;
    let y = state.position.y + v * state.heading.sin() * dt;
    let heading = normalize_angle(state.heading + (v / wheelbase) * steer.tan() * dt);
    let v_next = (v + accel * dt).max(0.0);
    Waypoint {
        t: state.t + dt,
        position: crate::geometry::Point2::new(x, y),
        heading,
        v: v_next,
        a: (v_next - v) / dt,
    }
}
