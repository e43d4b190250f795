use std::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correction::{correct, CorrectionConfig, CorrectionOutcome, DualHeadOutput};
use crate::error::{Error, Result};
use crate::steering_space::{SteeringSpace, DEFAULT_BINS};
use crate::traj_metrics::Trajectory;

use super::expert::{expert_steering, DEFAULT_LOOKAHEAD};
use super::predictor::{predict_from_expert, PredictorStubConfig};
use super::route::Route;
use super::vehicle::{step_vehicle, Throttle, VehicleParams, VehicleState};

/// A rollout finishes once its projection is this close to the route end, meters.
const END_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Corrected,
    Uncorrected,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Corrected => "corrected",
            Mode::Uncorrected => "uncorrected",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub vehicle: VehicleParams,
    pub predictor: PredictorStubConfig,
    pub correction: CorrectionConfig,
    pub n_bins: usize,
    /// Pure-pursuit lookahead, meters.
    pub lookahead: f64,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            vehicle: VehicleParams::default(),
            predictor: PredictorStubConfig::default(),
            correction: CorrectionConfig::default(),
            n_bins: DEFAULT_BINS,
            lookahead: DEFAULT_LOOKAHEAD,
            max_steps: 5000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.predictor.validate()?;
        self.correction.validate()?;
        if !(self.lookahead > 0.0 && self.lookahead.is_finite()) {
            return Err(Error::invalid(format!(
                "lookahead must be positive, got {}",
                self.lookahead
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be >= 1"));
        }
        SteeringSpace::new(self.n_bins).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub output: DualHeadOutput,
    /// What the correction produced; only applied in corrected mode.
    pub outcome: CorrectionOutcome,
    /// Steering actually sent to the vehicle.
    pub applied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Start position followed by one point per control step.
    pub trajectory: Trajectory,
    pub states: Vec<VehicleState>,
    /// Empty for expert-only rollouts.
    pub log: Vec<StepRecord>,
    pub route_lost: bool,
    pub reached_end: bool,
}

impl TrialOutcome {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

fn start_state(route: &Route, params: &VehicleParams) -> VehicleState {
    let [x, y] = route.waypoints()[0];
    VehicleState {
        x,
        y,
        heading: route.start_heading(),
        speed: params.target_speed,
    }
}

/// Closed-loop rollout; `policy` maps (step, state, expert steering) to the
/// applied steering and an optional log record.
fn rollout<F>(route: &Route, cfg: &SimConfig, mut policy: F) -> Result<TrialOutcome>
where
    F: FnMut(usize, f64) -> Result<(f64, Option<StepRecord>)>,
{
    cfg.validate()?;
    let params = &cfg.vehicle;
    let mut state = start_state(route, params);
    let mut states = vec![state];
    let mut log = Vec::new();
    let mut route_lost = false;
    let mut reached_end = false;

    for step in 0..cfg.max_steps {
        if route.project(state.position()).s >= route.length() - END_MARGIN {
            reached_end = true;
            break;
        }
        let expert = match expert_steering(&state, route, params, cfg.lookahead) {
            Ok(v) => v,
            Err(Error::RouteLost { .. }) => {
                route_lost = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let (steering, record) = policy(step, expert)?;
        log.extend(record);
        let throttle = Throttle::for_speed(state.speed, params.target_speed);
        state = step_vehicle(&state, steering, throttle, params)?;
        states.push(state);
    }
    if !reached_end && !route_lost {
        reached_end = route.project(state.position()).s >= route.length() - END_MARGIN;
    }

    // the start point plus at least one step is guaranteed unless the route
    // is shorter than the end margin
    let mut points: Vec<_> = states.iter().map(|s| s.position()).collect();
    if points.len() == 1 {
        points.push(points[0]);
    }
    Ok(TrialOutcome {
        trajectory: Trajectory::new(points)?,
        states,
        log,
        route_lost,
        reached_end,
    })
}

/// Expert-only rollout used as the reference trajectory.
pub fn run_expert(route: &Route, cfg: &SimConfig) -> Result<TrialOutcome> {
    rollout(route, cfg, |_, expert| Ok((expert, None)))
}

fn stream_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}

/// Rollout driven by the predictor stub, with or without correction.
///
/// Predictor and correction randomness come from independent streams keyed
/// by `seed`, so the same seed yields the same noise and fault schedule in
/// both modes.
pub fn run_trial(route: &Route, mode: Mode, cfg: &SimConfig, seed: u64) -> Result<TrialOutcome> {
    let space = SteeringSpace::new(cfg.n_bins)?;
    let mut predictor_rng = stream_rng(cfg.predictor.rng_seed, seed);
    let mut correction_rng = stream_rng(cfg.correction.rng_seed, seed);
    rollout(route, cfg, |step, expert| {
        let output = predict_from_expert(expert, &cfg.predictor, &space, &mut predictor_rng)?;
        let outcome = correct(&output, &space, &cfg.correction, &mut correction_rng)?;
        let applied = match mode {
            Mode::Corrected => outcome.y_final,
            Mode::Uncorrected => output.y_cont(),
        };
        Ok((
            applied,
            Some(StepRecord {
                step,
                output,
                outcome,
                applied,
            }),
        ))
    })
}
