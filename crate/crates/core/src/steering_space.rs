//! Uniform discretization of normalized steering.
//!
//! The lattice splits `[-1, 1]` into `n_bins` equal-width bins. Bins are
//! half-open `[lo, hi)` except the top bin, which is closed so that `+1.0`
//! belongs to it. Values outside the range clamp to the first or last bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of steering bins.
pub const DEFAULT_BINS: usize = 11;

/// Factor that maps raw simulator steering in `[-0.25, 0.25]` to `[-1, 1]`.
pub const RAW_STEERING_SCALE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct SteeringSpace {
    edges: Vec<f64>,
    centers: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    n_bins: usize,
}

impl TryFrom<SpaceRepr> for SteeringSpace {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        SteeringSpace::new(r.n_bins)
    }
}

impl From<SteeringSpace> for SpaceRepr {
    fn from(s: SteeringSpace) -> Self {
        SpaceRepr { n_bins: s.n_bins() }
    }
}

impl Default for SteeringSpace {
    fn default() -> Self {
        SteeringSpace::new(DEFAULT_BINS).expect("default bin count is valid")
    }
}

impl SteeringSpace {
    pub fn new(n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::invalid(format!("n_bins must be >= 2, got {n_bins}")));
        }
        let n = n_bins as f64;
        // -1 + 2i/n keeps both end points exact.
        let edges: Vec<f64> = (0..=n_bins).map(|i| -1.0 + 2.0 * i as f64 / n).collect();
        let centers = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(SteeringSpace { edges, centers })
    }

    pub fn n_bins(&self) -> usize {
        self.centers.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Nominal bin width, `2 / n_bins`.
    pub fn width(&self) -> f64 {
        2.0 / self.n_bins() as f64
    }

    /// Lower and upper edge of bin `i`.
    ///
    /// Panics if `i >= n_bins`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    /// Index of the bin containing `value`.
    pub fn digitize(&self, value: f64) -> Result<usize> {
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        // Number of edges <= value, minus one, is the containing bin.
        let above = self.edges.partition_point(|&e| e <= value);
        Ok(above.saturating_sub(1).min(self.n_bins() - 1))
    }
}

/// Scales raw steering by 4 and clamps the result to `[-1, 1]`.
pub fn scale_raw_steering(raw: f64) -> Result<f64> {
    if !raw.is_finite() {
        return Err(Error::NonFinite(raw));
    }
    Ok((raw * RAW_STEERING_SCALE).clamp(-1.0, 1.0))
}
