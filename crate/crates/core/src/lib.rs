//! Confidence-guided fusion of a continuous (regression) and a discrete
//! (classification) steering head.
//!
//! The crate is organised bottom-up:
//!
//! * [`steering_space`] – the uniform bin lattice over normalized steering `[-1, 1]`.
//! * [`correction`] – entropy, confidence/alignment summary and the four-case correction rule.
//! * [`traj_metrics`] – discrete Fréchet, DTW, area between curves and curve-length measures.
//! * [`class_metrics`] – confusion matrix and precision/recall/F1 reporting.
//! * [`sim`] – kinematic bicycle vehicle, routes, a pure-pursuit expert and a noisy dual-head predictor.
//! * [`harness`] – seeded with/without-correction experiments and their aggregated reports.
//! * [`io`] – prediction logs, trajectory CSV files and report documents.

pub mod class_metrics;
pub mod correction;
pub mod error;
pub mod harness;
pub mod io;
pub mod sim;
pub mod steering_space;
pub mod traj_metrics;

pub use class_metrics::{confusion, report, ClassReport, ClassStats, ConfusionMatrix};
pub use correction::{
    correct, entropy, summarize, CaseHistogram, ConfidenceSummary, CorrectionCase,
    CorrectionConfig, CorrectionOutcome, DualHeadOutput,
};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentPlan, ExperimentReport, ExperimentRun, TrialReport};
pub use sim::{
    expert_steering, predict, run_trial, step_vehicle, Mode, PredictorStubConfig, Route, RouteKind,
    SimConfig, TrialOutcome, VehicleParams, VehicleState,
};
pub use steering_space::{scale_raw_steering, SteeringSpace};
pub use traj_metrics::{
    aggregate, area_between_curves, curve_length_measure, dtw_distance, frechet_distance,
    AggregateReport, SimilarityReport, Trajectory,
};
