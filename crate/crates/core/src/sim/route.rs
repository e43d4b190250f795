use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traj_metrics::{dist, Point};

/// Waypoint spacing used when generating the built-in routes.
const WAYPOINT_SPACING: f64 = 0.5;
const LEG: f64 = 100.0;
const TURN_RADIUS: f64 = 30.0;
const CONNECTOR: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteKind {
    Straight,
    OneTurn,
    TwoTurn,
}

impl RouteKind {
    pub const ALL: [RouteKind; 3] = [RouteKind::Straight, RouteKind::OneTurn, RouteKind::TwoTurn];

    pub fn as_str(self) -> &'static str {
        match self {
            RouteKind::Straight => "straight",
            RouteKind::OneTurn => "one-turn",
            RouteKind::TwoTurn => "two-turn",
        }
    }
}

impl fmt::Display for RouteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for RouteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RouteKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown route '{s}' (expected straight, one-turn or two-turn)"
                ))
            })
    }
}

/// Closest point on a route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Arc-length position of the closest point.
    pub s: f64,
    /// Distance from the query point, i.e. the cross-track error.
    pub distance: f64,
}

/// Reference lane as a polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    kind: RouteKind,
    waypoints: Vec<Point>,
    cum: Vec<f64>,
}

struct PathBuilder {
    pos: Point,
    heading: f64,
    points: Vec<Point>,
}

impl PathBuilder {
    fn new() -> Self {
        PathBuilder {
            pos: [0.0, 0.0],
            heading: 0.0,
            points: vec![[0.0, 0.0]],
        }
    }

    fn straight(mut self, length: f64) -> Self {
        let n = (length / WAYPOINT_SPACING).ceil() as usize;
        let (c, s) = (self.heading.cos(), self.heading.sin());
        let start = self.pos;
        for i in 1..=n {
            let d = length * i as f64 / n as f64;
            self.points.push([start[0] + d * c, start[1] + d * s]);
        }
        self.pos = *self.points.last().unwrap();
        self
    }

    /// Positive `angle` turns right.
    fn arc(mut self, radius: f64, angle: f64) -> Self {
        let length = radius * angle.abs();
        let n = (length / WAYPOINT_SPACING).ceil() as usize;
        let curvature = angle.signum() / radius;
        let (start, h0) = (self.pos, self.heading);
        for i in 1..=n {
            let h = h0 + angle * i as f64 / n as f64;
            self.points.push([
                start[0] + (h.sin() - h0.sin()) / curvature,
                start[1] - (h.cos() - h0.cos()) / curvature,
            ]);
        }
        self.pos = *self.points.last().unwrap();
        self.heading = h0 + angle;
        self
    }
}

impl Route {
    /// Built-in geometry for each route kind, starting at the origin heading +x.
    ///
    /// * straight: a 200 m segment
    /// * one-turn: 100 m, a 90° right turn of radius 30 m, 100 m
    /// * two-turn: as one-turn with a 60 m connector and a 90° left turn before the last leg
    pub fn new(kind: RouteKind) -> Route {
        let b = PathBuilder::new();
        let b = match kind {
            RouteKind::Straight => b.straight(2.0 * LEG),
            RouteKind::OneTurn => b.straight(LEG).arc(TURN_RADIUS, FRAC_PI_2).straight(LEG),
            RouteKind::TwoTurn => b
                .straight(LEG)
                .arc(TURN_RADIUS, FRAC_PI_2)
                .straight(CONNECTOR)
                .arc(TURN_RADIUS, -FRAC_PI_2)
                .straight(LEG),
        };
        Route::from_waypoints(kind, b.points).expect("built-in routes are valid")
    }

    pub fn from_waypoints(kind: RouteKind, waypoints: Vec<Point>) -> Result<Route> {
        if waypoints.len() < 2 {
            return Err(Error::invalid("a route needs at least 2 waypoints"));
        }
        if waypoints
            .iter()
            .any(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(Error::invalid("route waypoints must be finite"));
        }
        let mut cum = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in waypoints.windows(2) {
            acc += dist(&w[0], &w[1]);
            cum.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::invalid("route has zero length"));
        }
        Ok(Route {
            kind,
            waypoints,
            cum,
        })
    }

    pub fn kind(&self) -> RouteKind {
        self.kind
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn start_heading(&self) -> f64 {
        let (a, b) = self.first_segment();
        (b[1] - a[1]).atan2(b[0] - a[0])
    }

    fn first_segment(&self) -> (Point, Point) {
        let i = self.cum.iter().position(|&c| c > 0.0).unwrap();
        (self.waypoints[i - 1], self.waypoints[i])
    }

    fn last_segment(&self) -> (Point, Point) {
        let n = self.cum.len();
        let i = (1..n)
            .rev()
            .find(|&i| self.cum[i] > self.cum[i - 1])
            .unwrap();
        (self.waypoints[i - 1], self.waypoints[i])
    }

    /// Closest point on the polyline to `p`.
    pub fn project(&self, p: Point) -> Projection {
        let mut best = Projection {
            s: 0.0,
            distance: f64::INFINITY,
        };
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = [a[0] + t * dx, a[1] + t * dy];
            let d = dist(&p, &q);
            if d < best.distance {
                best = Projection {
                    s: self.cum[i] + t * (self.cum[i + 1] - self.cum[i]),
                    distance: d,
                };
            }
        }
        best
    }

    /// Point at arc length `s`, extrapolated linearly beyond either end.
    pub fn point_at(&self, s: f64) -> Point {
        let extrapolate = |(a, b): (Point, Point), from: Point, by: f64| {
            let len = dist(&a, &b);
            [
                from[0] + by * (b[0] - a[0]) / len,
                from[1] + by * (b[1] - a[1]) / len,
            ]
        };
        if s <= 0.0 {
            return extrapolate(self.first_segment(), self.waypoints[0], s);
        }
        let total = self.length();
        if s >= total {
            return extrapolate(
                self.last_segment(),
                *self.waypoints.last().unwrap(),
                s - total,
            );
        }
        let i = self.cum.partition_point(|&c| c <= s).max(1);
        let (a, b) = (self.waypoints[i - 1], self.waypoints[i]);
        let len = self.cum[i] - self.cum[i - 1];
        let t = (s - self.cum[i - 1]) / len;
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }
}
