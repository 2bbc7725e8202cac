//! Multi-box indexing for trajectory data.
//!
//! A trajectory's single bounding box is a poor search predicate: a vehicle
//! circling a city "covers" the whole city in box terms while visiting only
//! a thin ring of it. This crate splits each trajectory into several
//! spatiotemporal boxes before indexing, stores all of them as entries that
//! point back to the same tuple, and deduplicates at query time. Three index
//! structures are provided behind one facade — an R-tree style balanced tree
//! plus quad- and kd-flavored space-partitioning trees — together with range
//! and nearest-neighbor search, a brute-force oracle for validation, and a
//! benchmark harness with a CSV/JSON interface.
//!
//! Start with [`traj::TrajectorySequence`], [`split::SplitConfig`],
//! [`index::Index`] and [`query::search`] / [`query::knn`]; the `examples/`
//! directory walks through each capability.

pub mod bench;
pub mod error;
pub mod index;
pub mod oracle;
pub mod query;
pub mod split;
pub mod stbox;
pub mod traj;

pub use error::{Error, Result};
pub use index::{Index, IndexEntry, IndexKind, TreeParams};
pub use query::{KnnQuery, Operator, RangeQuery, RefinePredicate, Store};
pub use split::{extract_value, SplitAlgorithm, SplitConfig};
pub use stbox::{STBox, VolumeModel};
pub use traj::{Instant, Period, Region, TrajectorySequence, TupleId};
