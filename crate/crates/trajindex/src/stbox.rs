//! Spatio-temporal bounding boxes (2D space + time) and the padded volume
//! model used to rank candidate boxes during splitting and insertion.

use serde::{Deserialize, Serialize};

/// Axis-aligned spatio-temporal bounding box.
///
/// Data boxes are always finite. Query boxes may leave the temporal
/// dimension unbounded (see [`STBox::spatial`]) to express spatial-only
/// queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct STBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub tmin: f64,
    pub tmax: f64,
}

impl STBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, tmin: f64, tmax: f64) -> STBox {
        assert!(xmin <= xmax && ymin <= ymax && tmin <= tmax, "inverted box extents");
        assert!(
            xmin.is_finite() && xmax.is_finite() && ymin.is_finite() && ymax.is_finite(),
            "non-finite spatial extent"
        );
        assert!(!tmin.is_nan() && !tmax.is_nan(), "NaN temporal extent");
        STBox { xmin, xmax, ymin, ymax, tmin, tmax }
    }

    /// Degenerate box around a single spatio-temporal point.
    pub fn point(x: f64, y: f64, t: f64) -> STBox {
        STBox::new(x, x, y, y, t, t)
    }

    /// Spatial rectangle with unbounded time, for spatial-only queries.
    pub fn spatial(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> STBox {
        STBox::new(xmin, xmax, ymin, ymax, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn union(&self, other: &STBox) -> STBox {
        STBox {
            xmin: self.xmin.min(other.xmin),
            xmax: self.xmax.max(other.xmax),
            ymin: self.ymin.min(other.ymin),
            ymax: self.ymax.max(other.ymax),
            tmin: self.tmin.min(other.tmin),
            tmax: self.tmax.max(other.tmax),
        }
    }

    /// Closed-interval overlap on all three dimensions: boundary touch counts.
    pub fn overlaps(&self, other: &STBox) -> bool {
        self.xmin <= other.xmax
            && other.xmin <= self.xmax
            && self.ymin <= other.ymax
            && other.ymin <= self.ymax
            && self.tmin <= other.tmax
            && other.tmin <= self.tmax
    }

    /// True if `other` lies entirely within `self` (closed intervals).
    pub fn contains(&self, other: &STBox) -> bool {
        self.xmin <= other.xmin
            && other.xmax <= self.xmax
            && self.ymin <= other.ymin
            && other.ymax <= self.ymax
            && self.tmin <= other.tmin
            && other.tmax <= self.tmax
    }

    /// Strictly left of `other` along x.
    pub fn left_of(&self, other: &STBox) -> bool {
        self.xmax < other.xmin
    }

    pub fn time_overlaps(&self, other: &STBox) -> bool {
        self.tmin <= other.tmax && other.tmin <= self.tmax
    }

    /// Minimum spatial distance to `query`, gated on temporal overlap.
    ///
    /// Returns the Euclidean distance between the two spatial rectangles
    /// (0 when they overlap) if the time intervals intersect, and +inf
    /// otherwise. This lower-bounds the nearest-approach distance of any
    /// trajectory portion covered by `self`.
    pub fn min_distance(&self, query: &STBox) -> f64 {
        if !self.time_overlaps(query) {
            return f64::INFINITY;
        }
        let dx = (query.xmin - self.xmax).max(self.xmin - query.xmax).max(0.0);
        let dy = (query.ymin - self.ymax).max(self.ymin - query.ymax).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn centroid(&self) -> [f64; 3] {
        [
            (self.xmin + self.xmax) / 2.0,
            (self.ymin + self.ymax) / 2.0,
            (self.tmin + self.tmax) / 2.0,
        ]
    }

    pub fn x_extent(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn y_extent(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn t_extent(&self) -> f64 {
        self.tmax - self.tmin
    }

    /// Total order over boxes, used only for deterministic tie-breaking.
    pub fn cmp_total(&self, other: &STBox) -> std::cmp::Ordering {
        let a = [self.xmin, self.ymin, self.tmin, self.xmax, self.ymax, self.tmax];
        let b = [other.xmin, other.ymin, other.tmin, other.xmax, other.ymax, other.tmax];
        for (x, y) in a.iter().zip(b.iter()) {
            let ord = x.total_cmp(y);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Padded volume of a box: product over dimensions of (extent + pad).
///
/// Degenerate extents (a straight east-west trip has zero y-extent) make the
/// raw volume zero and collapse the ordering of merge candidates, so every
/// dimension is padded by a small epsilon. The temporal extent is converted
/// to spatial units by `time_scale` before padding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeModel {
    pub pad_x: f64,
    pub pad_y: f64,
    pub pad_t: f64,
    pub time_scale: f64,
}

impl Default for VolumeModel {
    fn default() -> VolumeModel {
        VolumeModel { pad_x: 1e-6, pad_y: 1e-6, pad_t: 1e-6, time_scale: 1.0 }
    }
}

impl VolumeModel {
    /// Pads set to 1e-6 of the dataset extent per dimension, floored at 1e-9
    /// so fully degenerate dimensions still order deterministically.
    pub fn from_extent(extent: &STBox, time_scale: f64) -> VolumeModel {
        let rel = 1e-6;
        VolumeModel {
            pad_x: (rel * extent.x_extent()).max(1e-9),
            pad_y: (rel * extent.y_extent()).max(1e-9),
            pad_t: (rel * extent.t_extent() * time_scale).max(1e-9),
            time_scale,
        }
    }

    pub fn volume(&self, b: &STBox) -> f64 {
        (b.x_extent() + self.pad_x)
            * (b.y_extent() + self.pad_y)
            * (b.t_extent() * self.time_scale + self.pad_t)
    }

    /// Increase in volume of `a` needed to absorb `b`.
    pub fn enlargement(&self, a: &STBox, b: &STBox) -> f64 {
        self.volume(&a.union(b)) - self.volume(a)
    }

    /// Increase in total volume when two boxes merge into one.
    pub fn merge_cost(&self, a: &STBox, b: &STBox) -> f64 {
        self.volume(&a.union(b)) - self.volume(a) - self.volume(b)
    }
}
