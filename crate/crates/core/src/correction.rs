//! Confidence-guided correction of a regression steering output using the
//! probability distribution emitted by a parallel classification head.
//!
//! Each timestep is summarized by three signals: the classifier's peak
//! probability `c_max`, its entropy `h`, and whether the regression output
//! falls in the argmax bin or one of its immediate neighbours. The summary
//! routes the step into exactly one of four cases, evaluated in order:
//!
//! | case    | condition                                   | action                                         |
//! |---------|---------------------------------------------|------------------------------------------------|
//! | `Case1` | `c_max >= tau` and aligned                  | keep `y_cont`                                  |
//! | `Case2` | `c_max >= tau` and not aligned              | mean of `U(lo, hi)` draws over the argmax bin  |
//! | `Case3` | `c_max < low_conf` and `h > entropy_gate`   | keep `y_cont`                                  |
//! | `Case4` | otherwise                                   | mean of `N(y_cont, sigma^2)` draws             |
//!
//! `sigma^2` is the variance of the categorical distribution over bin
//! centers, so it is expressed in squared steering units.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::steering_space::SteeringSpace;

/// Allowed deviation of a probability vector's sum from one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// One timestep's pair of head outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutput")]
pub struct DualHeadOutput {
    y_cont: f64,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawOutput {
    y_cont: f64,
    probs: Vec<f64>,
}

impl TryFrom<RawOutput> for DualHeadOutput {
    type Error = Error;

    fn try_from(r: RawOutput) -> Result<Self> {
        DualHeadOutput::new(r.y_cont, r.probs)
    }
}

impl DualHeadOutput {
    /// Validates `probs` and clamps `y_cont` into `[-1, 1]`.
    pub fn new(y_cont: f64, probs: Vec<f64>) -> Result<Self> {
        if !y_cont.is_finite() {
            return Err(Error::NonFinite(y_cont));
        }
        validate_probs(&probs)?;
        Ok(DualHeadOutput {
            y_cont: y_cont.clamp(-1.0, 1.0),
            probs,
        })
    }

    pub fn y_cont(&self) -> f64 {
        self.y_cont
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("empty".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidProbabilities(format!(
            "entry {p} is not a probability"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::InvalidProbabilities(format!("sums to {sum}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorrectionCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl CorrectionCase {
    pub const ALL: [CorrectionCase; 4] = [
        CorrectionCase::Case1,
        CorrectionCase::Case2,
        CorrectionCase::Case3,
        CorrectionCase::Case4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CorrectionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Case{}", self.index() + 1)
    }
}

/// Number of steps routed to each case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseHistogram {
    #[serde(rename = "Case1")]
    pub case1: u64,
    #[serde(rename = "Case2")]
    pub case2: u64,
    #[serde(rename = "Case3")]
    pub case3: u64,
    #[serde(rename = "Case4")]
    pub case4: u64,
}

impl CaseHistogram {
    pub fn record(&mut self, case: CorrectionCase) {
        *self.slot(case) += 1;
    }

    pub fn count(&self, case: CorrectionCase) -> u64 {
        match case {
            CorrectionCase::Case1 => self.case1,
            CorrectionCase::Case2 => self.case2,
            CorrectionCase::Case3 => self.case3,
            CorrectionCase::Case4 => self.case4,
        }
    }

    pub fn total(&self) -> u64 {
        self.case1 + self.case2 + self.case3 + self.case4
    }

    pub fn merge(&mut self, other: &CaseHistogram) {
        for c in CorrectionCase::ALL {
            *self.slot(c) += other.count(c);
        }
    }

    fn slot(&mut self, case: CorrectionCase) -> &mut u64 {
        match case {
            CorrectionCase::Case1 => &mut self.case1,
            CorrectionCase::Case2 => &mut self.case2,
            CorrectionCase::Case3 => &mut self.case3,
            CorrectionCase::Case4 => &mut self.case4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    /// Confidence threshold on `c_max`.
    pub tau: f64,
    /// Upper bound on `c_max` for the high-entropy keep case.
    pub low_conf: f64,
    /// Entropy threshold in nats.
    pub entropy_gate: f64,
    /// Number of draws averaged by the stochastic cases.
    pub sample_count: usize,
    /// Guard inside the entropy logarithm.
    pub epsilon: f64,
    pub rng_seed: u64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            tau: 0.9,
            low_conf: 0.5,
            entropy_gate: 1.5,
            sample_count: 32,
            epsilon: 1e-12,
            rng_seed: 0,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.low_conf > 0.0 && self.low_conf <= self.tau && self.tau <= 1.0) {
            return Err(Error::invalid(format!(
                "thresholds must satisfy 0 < low_conf <= tau <= 1 (low_conf = {}, tau = {})",
                self.low_conf, self.tau
            )));
        }
        if !(self.entropy_gate > 0.0 && self.entropy_gate.is_finite()) {
            return Err(Error::invalid(format!(
                "entropy_gate must be positive, got {}",
                self.entropy_gate
            )));
        }
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be >= 1"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Random source seeded from `rng_seed`.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSummary {
    pub c_max: f64,
    pub i_max: usize,
    /// Entropy in nats, floored at zero.
    pub h: f64,
    pub i_cont: usize,
    pub aligned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOutcome {
    pub y_final: f64,
    pub case_id: CorrectionCase,
    pub summary: ConfidenceSummary,
    pub sampled: bool,
}

/// Shannon entropy `-sum p ln(p + epsilon)` in nats.
pub fn entropy(probs: &[f64], epsilon: f64) -> Result<f64> {
    validate_probs(probs)?;
    Ok(-probs.iter().map(|&p| p * (p + epsilon).ln()).sum::<f64>())
}

pub fn summarize(
    out: &DualHeadOutput,
    space: &SteeringSpace,
    cfg: &CorrectionConfig,
) -> Result<ConfidenceSummary> {
    let n = space.n_bins();
    if out.probs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: out.probs.len(),
        });
    }
    // Strict `>` keeps the lowest index on ties.
    let (i_max, c_max) =
        out.probs
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, out.probs[0]),
                |best, (i, p)| if p > best.1 { (i, p) } else { best },
            );
    let h = entropy(&out.probs, cfg.epsilon)?.max(0.0);
    let i_cont = space.digitize(out.y_cont)?;
    let aligned = i_cont.abs_diff(i_max) <= 1;
    Ok(ConfidenceSummary {
        c_max,
        i_max,
        h,
        i_cont,
        aligned,
    })
}

/// Variance of the categorical distribution over bin centers.
pub fn categorical_variance(probs: &[f64], centers: &[f64]) -> f64 {
    let mean: f64 = probs.iter().zip(centers).map(|(p, c)| p * c).sum();
    probs
        .iter()
        .zip(centers)
        .map(|(p, c)| p * (c - mean) * (c - mean))
        .sum()
}

/// Routes a summary to its case without drawing any samples.
pub fn route(summary: &ConfidenceSummary, cfg: &CorrectionConfig) -> CorrectionCase {
    if summary.c_max >= cfg.tau {
        if summary.aligned {
            CorrectionCase::Case1
        } else {
            CorrectionCase::Case2
        }
    } else if summary.c_max < cfg.low_conf && summary.h > cfg.entropy_gate {
        CorrectionCase::Case3
    } else {
        CorrectionCase::Case4
    }
}

/// Applies the four-case correction to one dual-head output.
///
/// Randomness is drawn only in `Case2` and in `Case4` with a non-zero
/// variance; the number of draws is `cfg.sample_count`.
pub fn correct<R: Rng + ?Sized>(
    out: &DualHeadOutput,
    space: &SteeringSpace,
    cfg: &CorrectionConfig,
    rng: &mut R,
) -> Result<CorrectionOutcome> {
    cfg.validate()?;
    let summary = summarize(out, space, cfg)?;
    let case_id = route(&summary, cfg);
    let n = cfg.sample_count;

    let (y_final, sampled) = match case_id {
        CorrectionCase::Case1 | CorrectionCase::Case3 => (out.y_cont, false),
        CorrectionCase::Case2 => {
            let (lo, hi) = space.bounds(summary.i_max);
            let sum: f64 = (0..n).map(|_| rng.random_range(lo..hi)).sum();
            ((sum / n as f64).clamp(lo, hi), true)
        }
        CorrectionCase::Case4 => {
            let var = categorical_variance(&out.probs, space.centers());
            if var > 0.0 {
                let normal = Normal::new(out.y_cont, var.sqrt())
                    .map_err(|e| Error::invalid(format!("sampling width: {e}")))?;
                let sum: f64 = (0..n).map(|_| normal.sample(rng)).sum();
                (sum / n as f64, true)
            } else {
                (out.y_cont, false)
            }
        }
    };

    Ok(CorrectionOutcome {
        y_final: y_final.clamp(-1.0, 1.0),
        case_id,
        summary,
        sampled,
    })
}
