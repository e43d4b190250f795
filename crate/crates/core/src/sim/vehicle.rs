use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time constant of the first-order speed response, in seconds.
pub const SPEED_TIME_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Radians, positive turns right.
    pub heading: f64,
    pub speed: f64,
}

impl VehicleState {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    fn validate(&self) -> Result<()> {
        for v in [self.x, self.y, self.heading, self.speed] {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
        }
        if self.speed < 0.0 {
            return Err(Error::invalid(format!("negative speed {}", self.speed)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Meters.
    pub wheelbase: f64,
    /// Wheel angle at normalized steering 1, radians.
    pub max_steer: f64,
    /// m/s.
    pub target_speed: f64,
    /// Control period, seconds.
    pub dt: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            wheelbase: 2.875,
            max_steer: 35f64.to_radians(),
            target_speed: 8.0,
            dt: 0.05,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wheelbase", self.wheelbase),
            ("max_steer", self.max_steer),
            ("target_speed", self.target_speed),
            ("dt", self.dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Turning radius for a normalized steering command.
    pub fn turn_radius(&self, steering_norm: f64) -> f64 {
        self.wheelbase / (steering_norm * self.max_steer).tan()
    }
}

/// Binary throttle: coast at 0 or drive at 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Throttle {
    Coast,
    Drive,
}

impl Throttle {
    pub fn value(self) -> f64 {
        match self {
            Throttle::Coast => 0.0,
            Throttle::Drive => 0.5,
        }
    }

    /// Bang-bang speed controller.
    pub fn for_speed(speed: f64, target: f64) -> Throttle {
        if speed < target {
            Throttle::Drive
        } else {
            Throttle::Coast
        }
    }
}

/// Advances a kinematic bicycle by one control period.
///
/// Steering and speed are held over the period and the pose is integrated in
/// closed form, so constant inputs trace an exact circular arc. Speed then
/// relaxes toward `target_speed` (drive) or toward zero (coast).
pub fn step_vehicle(
    state: &VehicleState,
    steering_norm: f64,
    throttle: Throttle,
    params: &VehicleParams,
) -> Result<VehicleState> {
    state.validate()?;
    params.validate()?;
    if !steering_norm.is_finite() {
        return Err(Error::NonFinite(steering_norm));
    }
    if !(-1.0..=1.0).contains(&steering_norm) {
        return Err(Error::invalid(format!(
            "steering {steering_norm} outside [-1, 1]"
        )));
    }

    let dt = params.dt;
    let v = state.speed;
    let yaw_rate = v / params.wheelbase * (steering_norm * params.max_steer).tan();
    let dh = yaw_rate * dt;
    let h0 = state.heading;
    let (x, y) = if dh.abs() < 1e-12 {
        (state.x + v * h0.cos() * dt, state.y + v * h0.sin() * dt)
    } else {
        let r = v / yaw_rate;
        let h1 = h0 + dh;
        (
            state.x + r * (h1.sin() - h0.sin()),
            state.y - r * (h1.cos() - h0.cos()),
        )
    };

    let decay = (-dt / SPEED_TIME_CONSTANT).exp();
    let speed = match throttle {
        Throttle::Drive => params.target_speed + (v - params.target_speed) * decay,
        Throttle::Coast => v * decay,
    };

    Ok(VehicleState {
        x,
        y,
        heading: h0 + dh,
        speed: speed.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_motion() {
        let p = VehicleParams::default();
        let s = VehicleState {
            x: 1.0,
            y: 2.0,
            heading: 0.0,
            speed: 8.0,
        };
        let n = step_vehicle(&s, 0.0, Throttle::Drive, &p).unwrap();
        assert!((n.x - (1.0 + 8.0 * p.dt)).abs() < 1e-12);
        assert_eq!(n.y, 2.0);
        assert_eq!(n.heading, 0.0);
        assert_eq!(n.speed, 8.0);
    }

    #[test]
    fn positive_steering_turns_right() {
        let p = VehicleParams::default();
        let mut s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: 8.0,
        };
        for _ in 0..10 {
            s = step_vehicle(&s, 0.3, Throttle::Drive, &p).unwrap();
        }
        assert!(s.heading > 0.0 && s.y > 0.0);
    }

    #[test]
    fn coasting_decays_speed() {
        let p = VehicleParams::default();
        let mut s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: 8.0,
        };
        for _ in 0..100 {
            let n = step_vehicle(&s, 0.0, Throttle::Coast, &p).unwrap();
            assert!(n.speed < s.speed && n.speed >= 0.0);
            s = n;
        }
    }

    #[test]
    fn closes_circle_after_one_period() {
        let steer = 0.5;
        let base = VehicleParams::default();
        let radius = base.turn_radius(steer);
        let period = std::f64::consts::TAU * radius / base.target_speed;
        let steps = (period / base.dt).round() as usize;
        let p = VehicleParams {
            dt: period / steps as f64,
            ..base
        };
        let start = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: p.target_speed,
        };
        let center = [0.0, radius];
        let mut s = start;
        for _ in 0..steps {
            s = step_vehicle(&s, steer, Throttle::Drive, &p).unwrap();
            let r = ((s.x - center[0]).powi(2) + (s.y - center[1]).powi(2)).sqrt();
            assert!((r - radius).abs() < 0.01 * radius);
        }
        let gap = (s.x.powi(2) + s.y.powi(2)).sqrt();
        assert!(gap < 0.01 * radius, "gap {gap} radius {radius}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = VehicleParams::default();
        let s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: 1.0,
        };
        assert!(step_vehicle(&s, 1.5, Throttle::Drive, &p).is_err());
        assert!(step_vehicle(&s, f64::NAN, Throttle::Drive, &p).is_err());
        let neg = VehicleState { speed: -1.0, ..s };
        assert!(step_vehicle(&neg, 0.0, Throttle::Drive, &p).is_err());
        let bad = VehicleParams { dt: 0.0, ..p };
        assert!(step_vehicle(&s, 0.0, Throttle::Drive, &bad).is_err());
    }

    #[test]
    fn bang_bang_throttle() {
        assert_eq!(Throttle::for_speed(7.9, 8.0), Throttle::Drive);
        assert_eq!(Throttle::for_speed(8.0, 8.0), Throttle::Coast);
        assert_eq!(Throttle::Drive.value(), 0.5);
    }
}
