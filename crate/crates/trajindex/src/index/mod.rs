//! Index structures: a balanced tree (R-tree keyset) and space-partitioning
//! trees (Quad-Tree and KD-Tree keysets), all storing multiple box entries
//! per tuple.

pub mod balanced;
pub mod space;

use serde::{Deserialize, Serialize};

pub use balanced::{BalancedKeyset, BalancedTree, RTreeKeyset};
pub use space::{KdKeyset, QuadKeyset, SpKeyset, SpTree, SplitRule};

use crate::stbox::{STBox, VolumeModel};
use crate::traj::TupleId;

/// One index entry: a bounding-box predicate plus the tuple it points back
/// to. Many entries may share one tuple id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEntry {
    pub bounds: STBox,
    pub tuple_id: TupleId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    RTree,
    QuadTree,
    KdTree,
}

impl IndexKind {
    pub const ALL: [IndexKind; 3] = [IndexKind::RTree, IndexKind::QuadTree, IndexKind::KdTree];

    pub fn name(&self) -> &'static str {
        match self {
            IndexKind::RTree => "rtree",
            IndexKind::QuadTree => "quadtree",
            IndexKind::KdTree => "kdtree",
        }
    }
}

/// Tree sizing knobs. `node_capacity` and `fill_factor` apply to the
/// balanced tree, `bucket` to the space-partitioning trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub node_capacity: usize,
    pub fill_factor: f64,
    pub bucket: usize,
}

impl Default for TreeParams {
    fn default() -> TreeParams {
        TreeParams { node_capacity: 64, fill_factor: 0.4, bucket: 16 }
    }
}

/// A built index of any of the three kinds, behind one query surface.
pub enum Index {
    RTree(BalancedTree<RTreeKeyset>),
    QuadTree(SpTree<QuadKeyset>),
    KdTree(SpTree<KdKeyset>),
}

impl Index {
    pub fn new(kind: IndexKind, params: &TreeParams, volume: VolumeModel) -> Index {
        match kind {
            IndexKind::RTree => Index::RTree(BalancedTree::new(
                params.node_capacity,
                params.fill_factor,
                RTreeKeyset { volume },
            )),
            IndexKind::QuadTree => Index::QuadTree(SpTree::new(params.bucket, QuadKeyset)),
            IndexKind::KdTree => Index::KdTree(SpTree::new(params.bucket, KdKeyset)),
        }
    }

    pub fn kind(&self) -> IndexKind {
        match self {
            Index::RTree(_) => IndexKind::RTree,
            Index::QuadTree(_) => IndexKind::QuadTree,
            Index::KdTree(_) => IndexKind::KdTree,
        }
    }

    pub fn insert(&mut self, entry: IndexEntry) {
        match self {
            Index::RTree(t) => t.insert(entry),
            Index::QuadTree(t) => t.insert(entry),
            Index::KdTree(t) => t.insert(entry),
        }
    }

    pub fn insert_all(&mut self, entries: impl IntoIterator<Item = IndexEntry>) {
        for e in entries {
            self.insert(e);
        }
    }

    pub fn entry_count(&self) -> usize {
        match self {
            Index::RTree(t) => t.entry_count(),
            Index::QuadTree(t) => t.entry_count(),
            Index::KdTree(t) => t.entry_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Index::RTree(t) => t.node_count(),
            Index::QuadTree(t) => t.node_count(),
            Index::KdTree(t) => t.node_count(),
        }
    }

    /// Stream of entries whose box passes `accept`; nodes are pruned with
    /// `descend`, which must hold for any node that can contain an accepted
    /// entry.
    pub fn visit<'a>(
        &'a self,
        query: STBox,
        descend: fn(&STBox, &STBox) -> bool,
        accept: fn(&STBox, &STBox) -> bool,
    ) -> Box<dyn Iterator<Item = &'a IndexEntry> + 'a> {
        match self {
            Index::RTree(t) => Box::new(t.visit(query, descend, accept)),
            Index::QuadTree(t) => Box::new(t.visit(query, descend, accept)),
            Index::KdTree(t) => Box::new(t.visit(query, descend, accept)),
        }
    }

    /// Best-first stream of (entry, lower-bound distance), nondecreasing.
    pub fn visit_nearest(&self, query: STBox) -> NearestStream<'_> {
        match self {
            Index::RTree(t) => NearestStream::RTree(t.visit_nearest(query)),
            Index::QuadTree(t) => NearestStream::Quad(t.visit_nearest(query)),
            Index::KdTree(t) => NearestStream::Kd(t.visit_nearest(query)),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            Index::RTree(t) => t.validate(),
            Index::QuadTree(t) => t.validate(),
            Index::KdTree(t) => t.validate(),
        }
    }
}

pub enum NearestStream<'a> {
    RTree(balanced::VisitNearest<'a, RTreeKeyset>),
    Quad(space::SpVisitNearest<'a, QuadKeyset>),
    Kd(space::SpVisitNearest<'a, KdKeyset>),
}

impl<'a> NearestStream<'a> {
    pub fn peek_distance(&self) -> Option<f64> {
        match self {
            NearestStream::RTree(s) => s.peek_distance(),
            NearestStream::Quad(s) => s.peek_distance(),
            NearestStream::Kd(s) => s.peek_distance(),
        }
    }
}

impl<'a> Iterator for NearestStream<'a> {
    type Item = (&'a IndexEntry, f64);

    fn next(&mut self) -> Option<(&'a IndexEntry, f64)> {
        match self {
            NearestStream::RTree(s) => s.next(),
            NearestStream::Quad(s) => s.next(),
            NearestStream::Kd(s) => s.next(),
        }
    }
}
