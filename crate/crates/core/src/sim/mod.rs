//! Desk-scale closed-loop driving simulation.
//!
//! Coordinates follow a right-handed-steering convention: `x` points along
//! the initial heading, `y` points to the vehicle's right, and positive
//! heading changes and positive normalized steering both turn right.

mod expert;
mod predictor;
mod route;
mod trial;
mod vehicle;

pub use expert::{expert_steering, DEFAULT_LOOKAHEAD, RECOVERY_DISTANCE};
pub use predictor::{predict, predict_from_expert, PredictorStubConfig};
pub use route::{Projection, Route, RouteKind};
pub use trial::{run_expert, run_trial, Mode, SimConfig, StepRecord, TrialOutcome};
pub use vehicle::{step_vehicle, Throttle, VehicleParams, VehicleState, SPEED_TIME_CONSTANT};
