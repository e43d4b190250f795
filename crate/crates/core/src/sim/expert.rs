use crate::error::{Error, Result};

use super::route::Route;
use super::vehicle::{VehicleParams, VehicleState};

/// Pure-pursuit lookahead along the route, meters.
pub const DEFAULT_LOOKAHEAD: f64 = 6.0;

/// Beyond this cross-track error the route counts as lost, meters.
pub const RECOVERY_DISTANCE: f64 = 50.0;

/// Pure-pursuit lane follower returning normalized steering in `[-1, 1]`.
///
/// The target is the route point `lookahead` meters of arc length past the
/// vehicle's projection onto the route.
pub fn expert_steering(
    state: &VehicleState,
    route: &Route,
    params: &VehicleParams,
    lookahead: f64,
) -> Result<f64> {
    if !(lookahead > 0.0 && lookahead.is_finite()) {
        return Err(Error::invalid(format!(
            "lookahead must be positive, got {lookahead}"
        )));
    }
    let proj = route.project(state.position());
    if proj.distance > RECOVERY_DISTANCE {
        return Err(Error::RouteLost {
            distance: proj.distance,
        });
    }
    let target = route.point_at(proj.s + lookahead);
    let (dx, dy) = (target[0] - state.x, target[1] - state.y);
    let (c, s) = (state.heading.cos(), state.heading.sin());
    let ahead = c * dx + s * dy;
    let right = -s * dx + c * dy;
    let alpha = right.atan2(ahead);
    let dist = ahead.hypot(right);
    if dist == 0.0 {
        return Ok(0.0);
    }
    let wheel = (2.0 * params.wheelbase * alpha.sin() / dist).atan();
    Ok((wheel / params.max_steer).clamp(-1.0, 1.0))
}
