//! Trajectory data model: timestamped 2D positions with linear interpolation
//! between consecutive instants, plus the exact predicates used during query
//! refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stbox::STBox;

/// Opaque identifier of the tuple a trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TupleId(pub u64);

/// One position-timestamp observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instant {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Instant {
    pub fn new(x: f64, y: f64, t: f64) -> Instant {
        Instant { x, y, t }
    }
}

/// Closed time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub tstart: f64,
    pub tend: f64,
}

impl Period {
    pub fn new(tstart: f64, tend: f64) -> Period {
        assert!(tstart <= tend, "inverted period");
        Period { tstart, tend }
    }
}

/// Axis-aligned spatial rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Region {
        assert!(xmin <= xmax && ymin <= ymax, "inverted region");
        Region { xmin, xmax, ymin, ymax }
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.xmin <= x && x <= self.xmax && self.ymin <= y && y <= self.ymax
    }
}

/// Ordered sequence of instants with strictly increasing timestamps.
/// Positions between stored instants are linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySequence {
    tuple_id: TupleId,
    instants: Vec<Instant>,
}

impl TrajectorySequence {
    pub fn new(tuple_id: TupleId, instants: Vec<Instant>) -> Result<TrajectorySequence> {
        if instants.is_empty() {
            return Err(Error::InvalidTrajectory("no instants".into()));
        }
        for inst in &instants {
            if !(inst.x.is_finite() && inst.y.is_finite() && inst.t.is_finite()) {
                return Err(Error::InvalidTrajectory("non-finite instant".into()));
            }
        }
        for pair in instants.windows(2) {
            if pair[0].t >= pair[1].t {
                return Err(Error::InvalidTrajectory(format!(
                    "timestamps not strictly increasing at t={}",
                    pair[1].t
                )));
            }
        }
        Ok(TrajectorySequence { tuple_id, instants })
    }

    pub fn tuple_id(&self) -> TupleId {
        self.tuple_id
    }

    pub fn instants(&self) -> &[Instant] {
        &self.instants
    }

    pub fn num_instants(&self) -> usize {
        self.instants.len()
    }

    pub fn num_segments(&self) -> usize {
        self.instants.len() - 1
    }

    pub fn start_time(&self) -> f64 {
        self.instants[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.instants[self.instants.len() - 1].t
    }

    /// Interpolated position at time `t`.
    pub fn position_at(&self, t: f64) -> Result<(f64, f64)> {
        let (t0, tn) = (self.start_time(), self.end_time());
        if t < t0 || t > tn {
            return Err(Error::OutOfDomain { t, start: t0, end: tn });
        }
        // partition_point: index of the first instant with timestamp >= t
        let idx = self.instants.partition_point(|i| i.t < t);
        if self.instants[idx].t == t {
            return Ok((self.instants[idx].x, self.instants[idx].y));
        }
        let a = self.instants[idx - 1];
        let b = self.instants[idx];
        let w = (t - a.t) / (b.t - a.t);
        Ok((a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)))
    }

    /// Smallest box containing every stored (and, by linearity, every
    /// interpolated) position.
    pub fn bbox(&self) -> STBox {
        let first = self.instants[0];
        let mut b = STBox::point(first.x, first.y, first.t);
        for inst in &self.instants[1..] {
            b.xmin = b.xmin.min(inst.x);
            b.xmax = b.xmax.max(inst.x);
            b.ymin = b.ymin.min(inst.y);
            b.ymax = b.ymax.max(inst.y);
        }
        b.tmin = first.t;
        b.tmax = self.end_time();
        b
    }

    /// Bounding box of segment `i` (instants `i` and `i + 1`).
    pub fn segment_bbox(&self, i: usize) -> Result<STBox> {
        if self.num_instants() < 2 || i >= self.num_segments() {
            return Err(Error::SegmentOutOfRange { index: i, count: self.num_segments() });
        }
        let a = self.instants[i];
        let b = self.instants[i + 1];
        Ok(STBox::new(a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y), a.t, b.t))
    }

    /// Restriction to a period. Boundary instants are synthesized by
    /// interpolation; `None` when the period misses the domain.
    pub fn at_time(&self, p: Period) -> Option<TrajectorySequence> {
        let start = p.tstart.max(self.start_time());
        let end = p.tend.min(self.end_time());
        if start > end {
            return None;
        }
        let mut out = Vec::new();
        let (sx, sy) = self.position_at(start).expect("start within domain");
        out.push(Instant::new(sx, sy, start));
        out.extend(self.instants.iter().filter(|i| i.t > start && i.t < end));
        if end > start {
            let (ex, ey) = self.position_at(end).expect("end within domain");
            out.push(Instant::new(ex, ey, end));
        }
        Some(TrajectorySequence { tuple_id: self.tuple_id, instants: out })
    }

    /// True if any segment (as a 2D line segment) intersects the rectangle.
    pub fn eintersects_region(&self, r: &Region) -> bool {
        if self.num_instants() == 1 {
            let i = self.instants[0];
            return r.contains_point(i.x, i.y);
        }
        self.instants
            .windows(2)
            .any(|s| segment_intersects_rect((s[0].x, s[0].y), (s[1].x, s[1].y), r))
    }

    /// True if the trajectory ever passes within `eps` of the point.
    pub fn eintersects_point(&self, q: (f64, f64), eps: f64) -> bool {
        self.min_point_distance(q) <= eps
    }

    /// Minimum Euclidean distance between the (optionally time-restricted)
    /// trajectory and a point.
    pub fn nearest_approach_distance(&self, q: (f64, f64), p: Option<Period>) -> Result<f64> {
        match p {
            None => Ok(self.min_point_distance(q)),
            Some(p) => {
                let restricted = self.at_time(p).ok_or(Error::EmptyRestriction)?;
                Ok(restricted.min_point_distance(q))
            }
        }
    }

    fn min_point_distance(&self, q: (f64, f64)) -> f64 {
        if self.num_instants() == 1 {
            let i = self.instants[0];
            return ((i.x - q.0).powi(2) + (i.y - q.1).powi(2)).sqrt();
        }
        let mut min = f64::INFINITY;
        for s in self.instants.windows(2) {
            let d = point_segment_distance(q, (s[0].x, s[0].y), (s[1].x, s[1].y));
            if d < min {
                min = d;
            }
        }
        min
    }
}

/// Euclidean distance from a point to a line segment.
pub fn point_segment_distance(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let w = if len2 == 0.0 {
        0.0
    } else {
        (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (px, py) = (a.0 + w * dx, a.1 + w * dy);
    ((q.0 - px).powi(2) + (q.1 - py).powi(2)).sqrt()
}

/// Liang-Barsky clip; closed semantics, so grazing a boundary edge counts.
pub fn segment_intersects_rect(p0: (f64, f64), p1: (f64, f64), r: &Region) -> bool {
    let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let clips = [
        (-dx, p0.0 - r.xmin),
        (dx, r.xmax - p0.0),
        (-dy, p0.1 - r.ymin),
        (dy, r.ymax - p0.1),
    ];
    for (p, q) in clips {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                if t > t1 {
                    return false;
                }
                if t > t0 {
                    t0 = t;
                }
            } else {
                if t < t0 {
                    return false;
                }
                if t < t1 {
                    t1 = t;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(points: &[(f64, f64, f64)]) -> TrajectorySequence {
        TrajectorySequence::new(
            TupleId(0),
            points.iter().map(|&(x, y, t)| Instant::new(x, y, t)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn position_at_midpoint() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.position_at(5.0).unwrap(), (5.0, 0.0));
    }

    #[test]
    fn position_at_endpoint_identity() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.position_at(0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn position_at_interior() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 20.0, 10.0)]);
        let (x, y) = t.position_at(7.0).unwrap();
        assert!((x - 7.0).abs() < 1e-12);
        assert!((y - 14.0).abs() < 1e-12);
    }

    #[test]
    fn position_at_outside_domain_errors() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert!(matches!(t.position_at(11.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn bbox_of_straight_trip() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.bbox(), STBox::new(0.0, 10.0, 0.0, 0.0, 0.0, 10.0));
    }

    #[test]
    fn bbox_of_single_instant_is_degenerate() {
        let t = traj(&[(3.0, 4.0, 7.0)]);
        assert_eq!(t.bbox(), STBox::point(3.0, 4.0, 7.0));
    }

    #[test]
    fn bbox_min_max_per_dimension() {
        let t = traj(&[(0.0, 0.0, 0.0), (-5.0, 2.0, 1.0), (1.0, 1.0, 2.0)]);
        assert_eq!(t.bbox(), STBox::new(-5.0, 1.0, 0.0, 2.0, 0.0, 2.0));
    }

    #[test]
    fn segment_bbox_cases() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0), (10.0, 5.0, 20.0)]);
        assert_eq!(t.segment_bbox(1).unwrap(), STBox::new(10.0, 10.0, 0.0, 5.0, 10.0, 20.0));
        assert_eq!(t.segment_bbox(0).unwrap(), STBox::new(0.0, 10.0, 0.0, 0.0, 0.0, 10.0));
        assert!(matches!(t.segment_bbox(2), Err(Error::SegmentOutOfRange { .. })));
    }

    #[test]
    fn at_time_interpolates_boundaries() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        let r = t.at_time(Period::new(2.0, 4.0)).unwrap();
        assert_eq!(r.instants(), &[Instant::new(2.0, 0.0, 2.0), Instant::new(4.0, 0.0, 4.0)]);
    }

    #[test]
    fn at_time_full_period_is_identity() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.at_time(Period::new(0.0, 10.0)).unwrap(), t);
    }

    #[test]
    fn at_time_disjoint_is_empty() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert!(t.at_time(Period::new(20.0, 30.0)).is_none());
    }

    #[test]
    fn at_time_is_idempotent() {
        let t = traj(&[(0.0, 0.0, 0.0), (3.0, 4.0, 5.0), (10.0, 0.0, 10.0)]);
        let p = Period::new(2.0, 8.0);
        let once = t.at_time(p).unwrap();
        let twice = once.at_time(p).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn eintersects_region_crossing() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 10.0, 10.0)]);
        assert!(t.eintersects_region(&Region::new(4.0, 6.0, 4.0, 6.0)));
    }

    #[test]
    fn eintersects_region_disjoint() {
        let t = traj(&[(0.0, 0.0, 0.0), (1.0, 1.0, 10.0)]);
        assert!(!t.eintersects_region(&Region::new(5.0, 6.0, 5.0, 6.0)));
    }

    #[test]
    fn eintersects_region_grazing_edge() {
        // Horizontal segment along y=5 grazing the top edge of the region.
        let t = traj(&[(0.0, 5.0, 0.0), (10.0, 5.0, 10.0)]);
        let r = Region::new(2.0, 8.0, 0.0, 5.0);
        assert!(t.eintersects_region(&r));
        // Independent check: sample interpolated positions at fine time steps.
        let mut hit = false;
        for step in 0..=10_000 {
            let tt = 10.0 * step as f64 / 10_000.0;
            let (x, y) = t.position_at(tt).unwrap();
            if r.contains_point(x, y) {
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn eintersects_point_cases() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert!(t.eintersects_point((5.0, 0.0), 0.0));
        assert!(!t.eintersects_point((5.0, 1.0), 0.5));
        assert!(t.eintersects_point((5.0, 1.0), 1.0));
    }

    #[test]
    fn nearest_approach_perpendicular() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.nearest_approach_distance((5.0, 3.0), None).unwrap(), 3.0);
    }

    #[test]
    fn nearest_approach_to_endpoint() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        assert_eq!(t.nearest_approach_distance((-2.0, 0.0), None).unwrap(), 2.0);
    }

    #[test]
    fn nearest_approach_restricted() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        let d = t.nearest_approach_distance((0.0, 0.0), Some(Period::new(5.0, 10.0))).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn nearest_approach_empty_restriction_errors() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        let r = t.nearest_approach_distance((0.0, 0.0), Some(Period::new(20.0, 30.0)));
        assert!(matches!(r, Err(Error::EmptyRestriction)));
    }

    #[test]
    fn zero_eps_intersection_matches_zero_distance() {
        let t = traj(&[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]);
        for q in [(5.0, 0.0), (5.0, 1.0), (-1.0, 0.0)] {
            let hit = t.eintersects_point(q, 0.0);
            let dist = t.nearest_approach_distance(q, None).unwrap();
            assert_eq!(hit, dist == 0.0);
        }
    }

    #[test]
    fn non_monotone_timestamps_rejected() {
        let r = TrajectorySequence::new(
            TupleId(0),
            vec![Instant::new(0.0, 0.0, 1.0), Instant::new(1.0, 0.0, 1.0)],
        );
        assert!(r.is_err());
    }
}
