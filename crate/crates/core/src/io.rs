//! File formats: line-delimited JSON prediction logs, `x,y` trajectory CSV
//! files, single-column label CSV files and JSON report documents.

use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correction::{correct, CaseHistogram, CorrectionCase, CorrectionConfig, DualHeadOutput};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, ExperimentPlan, ExperimentReport};
use crate::steering_space::SteeringSpace;
use crate::traj_metrics::{Point, SimilarityReport, Trajectory};

/// One line of a prediction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub step: u64,
    pub y_cont: f64,
    pub probs: Vec<f64>,
}

/// A prediction log line with its correction appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedRecord {
    pub step: u64,
    pub y_cont: f64,
    pub probs: Vec<f64>,
    pub y_final: f64,
    pub case_id: CorrectionCase,
    pub c_max: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub steps: u64,
    #[serde(flatten)]
    pub cases: CaseHistogram,
}

/// Corrects every record of a prediction log.
///
/// Blank lines are skipped. All records are validated before anything is
/// written, so a malformed log produces no output.
pub fn correct_log<R: BufRead, W: Write>(
    input: R,
    output: &mut W,
    space: &SteeringSpace,
    cfg: &CorrectionConfig,
) -> Result<CaseSummary> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let mut summary = CaseSummary::default();
    let mut buf = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let rec: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.probs.len() != space.n_bins() {
            return Err(parse_err(format!(
                "expected {} probabilities, got {}",
                space.n_bins(),
                rec.probs.len()
            )));
        }
        let out = DualHeadOutput::new(rec.y_cont, rec.probs.clone())
            .map_err(|e| parse_err(e.to_string()))?;
        let outcome = correct(&out, space, cfg, &mut rng).map_err(|e| parse_err(e.to_string()))?;
        let corrected = CorrectedRecord {
            step: rec.step,
            y_cont: rec.y_cont,
            probs: rec.probs,
            y_final: outcome.y_final,
            case_id: outcome.case_id,
            c_max: outcome.summary.c_max,
            entropy: outcome.summary.h,
        };
        serde_json::to_writer(&mut buf, &corrected)?;
        buf.push(b'\n');
        summary.steps += 1;
        summary.cases.record(outcome.case_id);
    }
    output.write_all(&buf)?;
    Ok(summary)
}

pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: &mut W) -> Result<()> {
    let mut s = String::with_capacity(24 * trajectory.len() + 4);
    s.push_str("x,y\n");
    for p in trajectory.points() {
        s.push_str(&format!("{:.6},{:.6}\n", p[0], p[1]));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn record_line(record: &csv::StringRecord, fallback: usize) -> usize {
    record
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback)
}

/// Reads an `x,y` CSV file; a non-numeric first row is treated as a header.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory> {
    let mut points: Vec<Point> = Vec::new();
    for (idx, record) in csv_reader(input).records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let line = record_line(&record, idx + 1);
        let parsed = match (record.len(), record.get(0), record.get(1)) {
            (2, Some(x), Some(y)) => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => points.push([x, y]),
            None if idx == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line,
                    message: "expected two numeric columns x,y".into(),
                });
            }
        }
    }
    Trajectory::new(points)
}

/// Reads a single-column CSV of non-negative integer labels; a non-numeric
/// first row is treated as a header.
pub fn read_labels_csv<R: Read>(input: R) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (idx, record) in csv_reader(input).records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let line = record_line(&record, idx + 1);
        let parsed = match record.len() {
            1 => record[0].parse::<usize>().ok(),
            _ => None,
        };
        match parsed {
            Some(l) => labels.push(l),
            None if idx == 0 && record.len() == 1 && record[0].parse::<i64>().is_err() => continue,
            None => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "expected one non-negative integer, got {:?}",
                        record.as_slice()
                    ),
                });
            }
        }
    }
    Ok(labels)
}

/// Similarity metrics as a JSON object with six decimals per value.
pub fn metrics_json(r: &SimilarityReport) -> String {
    format!(
        "{{\"frechet\": {:.6}, \"dtw\": {:.6}, \"abc\": {:.6}, \"cl\": {:.6}}}",
        r.frechet, r.dtw, r.abc, r.cl
    )
}

pub fn write_report_json<W: Write, T: Serialize>(report: &T, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub const REPORT_FILE: &str = "report.json";
pub const REFERENCE_DIR: &str = "reference";

pub fn trial_file_name(
    route: impl std::fmt::Display,
    mode: impl std::fmt::Display,
    trial: usize,
) -> String {
    format!("{route}-{mode}-{trial:02}.csv")
}

/// Runs `plan` and writes its outputs under `dir`:
///
/// * `<route>-<mode>-<trial>.csv` for every trial,
/// * `reference/<route>.csv` for each expert reference,
/// * `report.json` with the full experiment report.
pub fn write_simulation(plan: &ExperimentPlan, dir: &Path) -> Result<ExperimentReport> {
    // validate before touching the filesystem
    plan.validate()?;
    fs::create_dir_all(dir.join(REFERENCE_DIR))?;
    let run = run_experiment(plan)?;
    for t in &run.trajectories {
        let mut buf = Vec::new();
        write_trajectory_csv(&t.trajectory, &mut buf)?;
        fs::write(dir.join(trial_file_name(t.route, t.mode, t.trial)), buf)?;
    }
    for (route, reference) in &run.references {
        let mut buf = Vec::new();
        write_trajectory_csv(reference, &mut buf)?;
        fs::write(dir.join(REFERENCE_DIR).join(format!("{route}.csv")), buf)?;
    }
    let mut buf = Vec::new();
    write_report_json(&run.report, &mut buf)?;
    fs::write(dir.join(REPORT_FILE), buf)?;
    Ok(run.report)
}
