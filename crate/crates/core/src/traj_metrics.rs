//! Route similarity metrics between a driven trajectory and a reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of arc-length samples used by [`area_between_curves`].
pub const DEFAULT_ABC_SAMPLES: usize = 200;

pub type Point = [f64; 2];

/// Ordered 2D positions in meters. Always holds at least two finite points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Trajectory {
    points: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Trajectory {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Trajectory::new(points)
    }
}

impl From<Trajectory> for Vec<Point> {
    fn from(t: Trajectory) -> Self {
        t.points
    }
}

impl Trajectory {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(Error::InvalidTrajectory(format!("non-finite point {p:?}")));
        }
        Ok(Trajectory { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Trajectory {
        Trajectory {
            points: self.points.iter().map(|p| [p[0] + dx, p[1] + dy]).collect(),
        }
    }

    /// `m` points spaced uniformly by arc length, end points included.
    pub fn resample(&self, m: usize) -> Result<Vec<Point>> {
        if m < 2 {
            return Err(Error::invalid(format!(
                "resample count must be >= 2, got {m}"
            )));
        }
        let mut cum = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in self.points.windows(2) {
            acc += dist(&w[0], &w[1]);
            cum.push(acc);
        }
        let total = acc;
        if total <= 0.0 {
            return Err(Error::InvalidTrajectory("zero arc length".into()));
        }

        let mut out = Vec::with_capacity(m);
        let mut seg = 0;
        for k in 0..m {
            let s = total * k as f64 / (m - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let (a, b) = (self.points[seg], self.points[seg + 1]);
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 {
                ((s - cum[seg]) / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        // pin the end point against rounding in the running sum
        out[m - 1] = *self.points.last().unwrap();
        Ok(out)
    }
}

/// Euclidean distance.
#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub frechet: f64,
    pub dtw: f64,
    pub abc: f64,
    pub cl: f64,
}

impl SimilarityReport {
    /// All four metrics of `pred` against `reference`.
    pub fn compute(pred: &Trajectory, reference: &Trajectory) -> Result<Self> {
        Ok(SimilarityReport {
            frechet: frechet_distance(pred, reference),
            dtw: dtw_distance(pred, reference),
            abc: area_between_curves(pred, reference, DEFAULT_ABC_SAMPLES)?,
            cl: curve_length_measure(pred, reference)?,
        })
    }

    fn as_array(&self) -> [f64; 4] {
        [self.frechet, self.dtw, self.abc, self.cl]
    }

    fn from_array(a: [f64; 4]) -> Self {
        SimilarityReport {
            frechet: a[0],
            dtw: a[1],
            abc: a[2],
            cl: a[3],
        }
    }
}

/// Discrete Fréchet distance.
pub fn frechet_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let (pa, pb) = (a.points(), b.points());
    let m = pb.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, p) in pa.iter().enumerate() {
        for (j, q) in pb.iter().enumerate() {
            let d = dist(p, q);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Dynamic time warping with Euclidean local cost and summed path cost.
pub fn dtw_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let (pa, pb) = (a.points(), b.points());
    let m = pb.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, p) in pa.iter().enumerate() {
        for (j, q) in pb.iter().enumerate() {
            let d = dist(p, q);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1] + d,
                (_, 0) => prev[0] + d,
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]) + d,
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
}

/// Area enclosed between two curves.
///
/// Both curves are resampled to `samples` points by arc length. Each pair of
/// consecutive correspondences spans a quadrilateral whose area is taken as
/// the mean of its two triangulations, which makes the measure symmetric in
/// its arguments and exact for convex quadrilaterals.
pub fn area_between_curves(a: &Trajectory, b: &Trajectory, samples: usize) -> Result<f64> {
    let ra = a.resample(samples)?;
    let rb = b.resample(samples)?;
    let mut total = 0.0;
    for k in 0..samples - 1 {
        let (p0, p1, p2, p3) = (&ra[k], &ra[k + 1], &rb[k + 1], &rb[k]);
        let split_02 = triangle_area(p0, p1, p2) + triangle_area(p0, p2, p3);
        let split_13 = triangle_area(p0, p1, p3) + triangle_area(p1, p2, p3);
        total += 0.5 * (split_02 + split_13);
    }
    Ok(total)
}

/// Relative arc-length deviation of `a` from the reference `b`.
pub fn curve_length_measure(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let reference = b.arc_length();
    if reference <= 0.0 {
        return Err(Error::InvalidTrajectory(
            "reference has zero arc length".into(),
        ));
    }
    Ok((a.arc_length() - reference).abs() / reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub mean: SimilarityReport,
    /// Population standard deviation.
    pub std: SimilarityReport,
    pub count: usize,
}

/// Per-metric mean and population standard deviation (Welford).
pub fn aggregate(reports: &[SimilarityReport]) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty report list"));
    }
    let mut mean = [0.0; 4];
    let mut m2 = [0.0; 4];
    for (k, r) in reports.iter().enumerate() {
        let n = (k + 1) as f64;
        for (idx, x) in r.as_array().into_iter().enumerate() {
            let delta = x - mean[idx];
            mean[idx] += delta / n;
            m2[idx] += delta * (x - mean[idx]);
        }
    }
    let n = reports.len() as f64;
    let std = m2.map(|v| (v / n).max(0.0).sqrt());
    Ok(AggregateReport {
        mean: SimilarityReport::from_array(mean),
        std: SimilarityReport::from_array(std),
        count: reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn traj(points: &[Point]) -> Trajectory {
        Trajectory::new(points.to_vec()).unwrap()
    }

    fn line(y: f64, n: usize, len: f64) -> Trajectory {
        traj(
            &(0..n)
                .map(|i| [len * i as f64 / (n - 1) as f64, y])
                .collect::<Vec<_>>(),
        )
    }

    fn arc(r: f64, n: usize) -> Trajectory {
        traj(
            &(0..n)
                .map(|i| {
                    let t = FRAC_PI_2 * i as f64 / (n - 1) as f64;
                    [r * t.cos(), r * t.sin()]
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rejects_short_or_non_finite() {
        assert!(Trajectory::new(vec![[0.0, 0.0]]).is_err());
        assert!(Trajectory::new(vec![[0.0, 0.0], [f64::NAN, 1.0]]).is_err());
        assert!(serde_json::from_str::<Trajectory>("[[0.0,0.0]]").is_err());
    }

    #[test]
    fn identical_curves_are_zero() {
        let a = traj(&[[0.0, 0.0], [1.0, 2.0], [3.0, 2.5], [4.0, 0.0]]);
        assert_eq!(frechet_distance(&a, &a), 0.0);
        assert_eq!(dtw_distance(&a, &a), 0.0);
        assert!(area_between_curves(&a, &a, 200).unwrap().abs() < 1e-12);
        assert_eq!(curve_length_measure(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn parallel_offset() {
        let a = line(0.0, 11, 1.0);
        let b = line(0.7, 11, 1.0);
        assert!((frechet_distance(&a, &b) - 0.7).abs() < 1e-12);
        assert!((area_between_curves(&a, &b, 200).unwrap() - 0.7).abs() < 1e-6);
        // different sampling densities still span the same rectangle
        let c = line(0.7, 4, 1.0);
        assert!((area_between_curves(&a, &c, 200).unwrap() - 0.7).abs() < 1e-6);
    }

    #[test]
    fn dtw_two_by_two() {
        let a = traj(&[[0.0, 0.0], [0.0, 0.0]]);
        let b = traj(&[[3.0, 4.0], [3.0, 4.0]]);
        assert_eq!(dtw_distance(&a, &b), 10.0);
        assert_eq!(frechet_distance(&a, &b), 5.0);
    }

    #[test]
    fn quarter_annulus_area() {
        let inner = arc(10.0, 400);
        let outer = arc(11.0, 250);
        let expected = std::f64::consts::PI / 4.0 * (121.0 - 100.0);
        let got = area_between_curves(&inner, &outer, 2000).unwrap();
        assert!(
            (got - expected).abs() / expected < 0.02,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn zero_length_curves_rejected_for_area_and_length() {
        let dot = traj(&[[1.0, 1.0], [1.0, 1.0]]);
        let l = line(0.0, 3, 1.0);
        assert!(area_between_curves(&dot, &l, 50).is_err());
        assert!(curve_length_measure(&l, &dot).is_err());
        assert!(curve_length_measure(&dot, &l).is_ok());
    }

    #[test]
    fn curve_length_ratio() {
        let a = line(0.0, 5, 15.0);
        let b = line(3.0, 9, 10.0);
        assert!((curve_length_measure(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curve_length_grows_with_oscillation() {
        let wavy = |amp: f64| {
            traj(
                &(0..=400)
                    .map(|i| {
                        let x = i as f64 * 0.25;
                        [x, amp * (x * 0.5).sin()]
                    })
                    .collect::<Vec<_>>(),
            )
        };
        let straight = line(0.0, 2, 100.0);
        let small = curve_length_measure(&wavy(0.2), &straight).unwrap();
        let large = curve_length_measure(&wavy(1.0), &straight).unwrap();
        assert!(0.0 < small && small < large, "{small} {large}");
    }

    #[test]
    fn resample_endpoints_and_spacing() {
        let t = traj(&[[0.0, 0.0], [0.0, 0.0], [3.0, 0.0], [3.0, 4.0]]);
        let r = t.resample(8).unwrap();
        assert_eq!(r[0], [0.0, 0.0]);
        assert_eq!(r[7], [3.0, 4.0]);
        for w in r.windows(2) {
            assert!((dist(&w[0], &w[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_examples() {
        let r = SimilarityReport {
            frechet: 2.0,
            dtw: 3.0,
            abc: 4.0,
            cl: 0.1,
        };
        let one = aggregate(&[r]).unwrap();
        assert_eq!(one.mean, r);
        assert_eq!(
            one.std,
            SimilarityReport {
                frechet: 0.0,
                dtw: 0.0,
                abc: 0.0,
                cl: 0.0
            }
        );

        let r2 = SimilarityReport { frechet: 4.0, ..r };
        let two = aggregate(&[r, r2]).unwrap();
        assert_eq!(two.mean.frechet, 3.0);
        assert_eq!(two.std.frechet, 1.0);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_matches_two_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let reports: Vec<SimilarityReport> = (0..10)
            .map(|_| SimilarityReport {
                frechet: rng.random_range(0.0..30.0),
                dtw: rng.random_range(0.0..7000.0),
                abc: rng.random_range(0.0..4000.0),
                cl: rng.random_range(0.0..2.0),
            })
            .collect();
        let agg = aggregate(&reports).unwrap();
        let two_pass = |f: fn(&SimilarityReport) -> f64| {
            let n = reports.len() as f64;
            let mean = reports.iter().map(f).sum::<f64>() / n;
            let var = reports.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        type Field = fn(&SimilarityReport) -> f64;
        let checks: [(Field, f64, f64); 4] = [
            (|r| r.frechet, agg.mean.frechet, agg.std.frechet),
            (|r| r.dtw, agg.mean.dtw, agg.std.dtw),
            (|r| r.abc, agg.mean.abc, agg.std.abc),
            (|r| r.cl, agg.mean.cl, agg.std.cl),
        ];
        for (f, m, s) in checks {
            let (em, es) = two_pass(f);
            assert!((m - em).abs() <= 1e-12 * em.abs().max(1.0));
            assert!((s - es).abs() <= 1e-10 * es.abs().max(1.0));
        }
    }

    fn arb_traj() -> impl Strategy<Value = Trajectory> {
        prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..12)
            .prop_map(|v| Trajectory::new(v.into_iter().map(|(x, y)| [x, y]).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn metrics_symmetric_and_non_negative(a in arb_traj(), b in arb_traj()) {
            prop_assert_eq!(frechet_distance(&a, &b), frechet_distance(&b, &a));
            prop_assert!((dtw_distance(&a, &b) - dtw_distance(&b, &a)).abs() <= 1e-9 * dtw_distance(&a, &b).max(1.0));
            prop_assert!(frechet_distance(&a, &b) >= 0.0);
            prop_assert!(dtw_distance(&a, &b) >= 0.0);
            if a.arc_length() > 1e-9 && b.arc_length() > 1e-9 {
                let ab = area_between_curves(&a, &b, 64).unwrap();
                let ba = area_between_curves(&b, &a, 64).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
                prop_assert!(curve_length_measure(&a, &b).unwrap() >= 0.0);
            }
        }

        #[test]
        fn frechet_bounded_below_by_directed_hausdorff(a in arb_traj(), b in arb_traj()) {
            let hausdorff = b.points().iter()
                .map(|q| a.points().iter().map(|p| dist(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            prop_assert!(frechet_distance(&a, &b) >= hausdorff);
        }

        #[test]
        fn translation_invariance(a in arb_traj(), b in arb_traj(), dx in -100.0f64..100.0, dy in -100.0f64..100.0) {
            let (ta, tb) = (a.translated(dx, dy), b.translated(dx, dy));
            let f = frechet_distance(&a, &b);
            let d = dtw_distance(&a, &b);
            prop_assert!((frechet_distance(&ta, &tb) - f).abs() <= 1e-9 * f.max(1.0));
            prop_assert!((dtw_distance(&ta, &tb) - d).abs() <= 1e-9 * d.max(1.0));
        }
    }
}
