//! Seeded with/without-correction experiments over the built-in routes.
//!
//! Trial `k` of every (route, mode) pair uses seed `base_seed + k`, so both
//! modes of a trial face the same noise and fault schedule. Each trial is
//! scored against the expert-only rollout of its route.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correction::CaseHistogram;
use crate::error::{Error, Result};
use crate::sim::{run_expert, run_trial, Mode, Route, RouteKind, SimConfig};
use crate::traj_metrics::{aggregate, AggregateReport, SimilarityReport, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub routes: Vec<RouteKind>,
    pub trials_per_route: usize,
    pub base_seed: u64,
    pub corrected: bool,
    pub uncorrected: bool,
    pub sim: SimConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            routes: RouteKind::ALL.to_vec(),
            trials_per_route: 10,
            base_seed: 0,
            corrected: true,
            uncorrected: true,
            sim: SimConfig::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_route == 0 {
            return Err(Error::invalid("trials_per_route must be >= 1"));
        }
        if self.routes.is_empty() {
            return Err(Error::invalid("plan has no routes"));
        }
        if !(self.corrected || self.uncorrected) {
            return Err(Error::invalid("plan enables neither mode"));
        }
        self.sim.validate()
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut modes = Vec::with_capacity(2);
        if self.corrected {
            modes.push(Mode::Corrected);
        }
        if self.uncorrected {
            modes.push(Mode::Uncorrected);
        }
        modes
    }

    pub fn seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub steps: usize,
    pub route_lost: bool,
    pub reached_end: bool,
    pub similarity: Option<SimilarityReport>,
    pub error: Option<String>,
    pub cases: CaseHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub route: RouteKind,
    pub mode: Mode,
    pub trials: Vec<TrialRecord>,
    /// Over trials that produced a similarity report; `None` if none did.
    pub aggregate: Option<AggregateReport>,
    pub case_histogram: CaseHistogram,
    pub total_steps: usize,
}

impl TrialReport {
    pub fn similarities(&self) -> Vec<SimilarityReport> {
        self.trials.iter().filter_map(|t| t.similarity).collect()
    }
}

/// Pooled across routes for one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallSummary {
    pub mode: Mode,
    pub aggregate: Option<AggregateReport>,
    pub case_histogram: CaseHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub reports: Vec<TrialReport>,
    pub overall: Vec<OverallSummary>,
}

impl ExperimentReport {
    pub fn find(&self, route: RouteKind, mode: Mode) -> Option<&TrialReport> {
        self.reports
            .iter()
            .find(|r| r.route == route && r.mode == mode)
    }

    pub fn overall(&self, mode: Mode) -> Option<&OverallSummary> {
        self.overall.iter().find(|o| o.mode == mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrajectory {
    pub route: RouteKind,
    pub mode: Mode,
    pub trial: usize,
    pub trajectory: Trajectory,
}

/// Report plus every trajectory it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    /// Ordered by route, mode, then trial index.
    pub trajectories: Vec<TrialTrajectory>,
    pub references: Vec<(RouteKind, Trajectory)>,
}

struct Job {
    route_idx: usize,
    mode: Mode,
    trial: usize,
}

struct JobResult {
    record: TrialRecord,
    trajectory: Option<Trajectory>,
}

fn run_job(
    plan: &ExperimentPlan,
    route: &Route,
    reference: &Result<Trajectory, String>,
    job: &Job,
) -> JobResult {
    let seed = plan.seed(job.trial);
    let mut record = TrialRecord {
        trial: job.trial,
        seed,
        steps: 0,
        route_lost: false,
        reached_end: false,
        similarity: None,
        error: None,
        cases: CaseHistogram::default(),
    };
    let outcome = match run_trial(route, job.mode, &plan.sim, seed) {
        Ok(o) => o,
        Err(e) => {
            record.error = Some(e.to_string());
            return JobResult {
                record,
                trajectory: None,
            };
        }
    };
    record.steps = outcome.steps();
    record.route_lost = outcome.route_lost;
    record.reached_end = outcome.reached_end;
    for step in &outcome.log {
        record.cases.record(step.outcome.case_id);
    }
    match reference {
        Ok(reference) => match SimilarityReport::compute(&outcome.trajectory, reference) {
            Ok(sim) => record.similarity = Some(sim),
            Err(e) => record.error = Some(e.to_string()),
        },
        Err(e) => record.error = Some(format!("reference rollout failed: {e}")),
    }
    JobResult {
        record,
        trajectory: Some(outcome.trajectory),
    }
}

/// Runs every (route, mode, trial) combination of `plan`.
///
/// Trials run in parallel; results are assembled in (route, mode, trial)
/// order so the output does not depend on scheduling. Per-trial failures are
/// recorded in the report instead of aborting the sweep.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentRun> {
    plan.validate()?;
    let routes: Vec<Route> = plan.routes.iter().map(|&k| Route::new(k)).collect();
    let references: Vec<Result<Trajectory, String>> = routes
        .par_iter()
        .map(|r| {
            run_expert(r, &plan.sim)
                .map(|o| o.trajectory)
                .map_err(|e| e.to_string())
        })
        .collect();

    let modes = plan.modes();
    let jobs: Vec<Job> = (0..routes.len())
        .flat_map(|route_idx| {
            let modes = &modes;
            modes.iter().flat_map(move |&mode| {
                (0..plan.trials_per_route).map(move |trial| Job {
                    route_idx,
                    mode,
                    trial,
                })
            })
        })
        .collect();
    let results: Vec<JobResult> = jobs
        .par_iter()
        .map(|job| {
            run_job(
                plan,
                &routes[job.route_idx],
                &references[job.route_idx],
                job,
            )
        })
        .collect();

    let mut reports = Vec::new();
    let mut trajectories = Vec::new();
    let mut results = results.into_iter();
    for (route_idx, route) in routes.iter().enumerate() {
        for &mode in &modes {
            let mut trials = Vec::with_capacity(plan.trials_per_route);
            let mut case_histogram = CaseHistogram::default();
            let mut total_steps = 0;
            for _ in 0..plan.trials_per_route {
                let r = results.next().expect("one result per job");
                case_histogram.merge(&r.record.cases);
                total_steps += r.record.steps;
                if let Some(trajectory) = r.trajectory {
                    trajectories.push(TrialTrajectory {
                        route: route.kind(),
                        mode,
                        trial: r.record.trial,
                        trajectory,
                    });
                }
                trials.push(r.record);
            }
            let sims: Vec<SimilarityReport> = trials.iter().filter_map(|t| t.similarity).collect();
            reports.push(TrialReport {
                route: plan.routes[route_idx],
                mode,
                aggregate: aggregate(&sims).ok(),
                trials,
                case_histogram,
                total_steps,
            });
        }
    }

    let overall = modes
        .iter()
        .map(|&mode| {
            let mut case_histogram = CaseHistogram::default();
            let mut sims = Vec::new();
            for r in reports.iter().filter(|r| r.mode == mode) {
                case_histogram.merge(&r.case_histogram);
                sims.extend(r.similarities());
            }
            OverallSummary {
                mode,
                aggregate: aggregate(&sims).ok(),
                case_histogram,
            }
        })
        .collect();

    let references = plan
        .routes
        .iter()
        .zip(references)
        .filter_map(|(&k, r)| r.ok().map(|t| (k, t)))
        .collect();

    Ok(ExperimentRun {
        report: ExperimentReport {
            plan: plan.clone(),
            reports,
            overall,
        },
        trajectories,
        references,
    })
}
