//! Multi-entry query semantics: deduplicating range search with a
//! filter-refine pipeline, and exact k-nearest-neighbor search over
//! box-distance lower bounds.

use std::collections::{BTreeMap, BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::stbox::STBox;
use crate::traj::{Period, Region, TrajectorySequence, TupleId};

pub type Store = BTreeMap<TupleId, TrajectorySequence>;

/// Box-level comparison operator between a trajectory and a query box.
///
/// `Overlaps` needs only one entry of a tuple to match; the other operators
/// need every entry to match, so the index acts as an existence filter and
/// the operator is rechecked on the trajectory's own bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Overlaps,
    ContainedBy,
    Left,
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    ExistsMatch,
    AllMatch,
}

fn consistent_overlaps(a: &STBox, q: &STBox) -> bool {
    a.overlaps(q)
}
fn consistent_contained_by(a: &STBox, q: &STBox) -> bool {
    q.contains(a)
}
fn consistent_left(a: &STBox, q: &STBox) -> bool {
    a.left_of(q)
}
fn consistent_disjoint(a: &STBox, q: &STBox) -> bool {
    !a.overlaps(q)
}
// Node-level pruning for all-match operators: a node must be visited if any
// box inside it could satisfy the entry predicate.
fn descend_contained_by(node: &STBox, q: &STBox) -> bool {
    // Some sub-box of the node fits in q iff the two intersect.
    node.overlaps(q)
}
fn descend_left(node: &STBox, q: &STBox) -> bool {
    // Entries have xmin >= node.xmin, so some entry can end before q starts
    // only if the node starts there too.
    node.xmin < q.xmin
}
fn descend_disjoint(node: &STBox, q: &STBox) -> bool {
    // Every sub-box of the node overlaps q iff the node's interval is inside
    // q's interval on every axis; descend otherwise.
    !q.contains(node)
}

impl Operator {
    pub fn class(&self) -> OperatorClass {
        match self {
            Operator::Overlaps => OperatorClass::ExistsMatch,
            Operator::ContainedBy | Operator::Left | Operator::Disjoint => OperatorClass::AllMatch,
        }
    }

    /// Per-entry consistency check used during the index scan.
    pub fn consistent_fn(&self) -> fn(&STBox, &STBox) -> bool {
        match self {
            Operator::Overlaps => consistent_overlaps,
            Operator::ContainedBy => consistent_contained_by,
            Operator::Left => consistent_left,
            Operator::Disjoint => consistent_disjoint,
        }
    }

    /// Node-level pruning check: must hold for every node that can hold a
    /// consistent entry, even when the node's union box itself is not one.
    pub fn descend_fn(&self) -> fn(&STBox, &STBox) -> bool {
        match self {
            Operator::Overlaps => consistent_overlaps,
            Operator::ContainedBy => descend_contained_by,
            Operator::Left => descend_left,
            Operator::Disjoint => descend_disjoint,
        }
    }

    /// Exact box-level evaluation on a trajectory's own bounding box.
    pub fn eval(&self, bounds: &STBox, q: &STBox) -> bool {
        self.consistent_fn()(bounds, q)
    }
}

/// Exact predicate rechecked on candidate trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefinePredicate {
    /// Trajectory (restricted to `period` if given) passes within `eps` of
    /// the point.
    Point { x: f64, y: f64, eps: f64, period: Option<Period> },
    /// Trajectory (restricted to `period` if given) intersects the region.
    Region { region: Region, period: Option<Period> },
}

impl RefinePredicate {
    pub fn eval(&self, t: &TrajectorySequence) -> bool {
        match self {
            RefinePredicate::Point { x, y, eps, period } => match period {
                None => t.eintersects_point((*x, *y), *eps),
                Some(p) => t.at_time(*p).is_some_and(|r| r.eintersects_point((*x, *y), *eps)),
            },
            RefinePredicate::Region { region, period } => match period {
                None => t.eintersects_region(region),
                Some(p) => t.at_time(*p).is_some_and(|r| r.eintersects_region(region)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeQuery {
    pub bounds: STBox,
    pub operator: Operator,
    pub refine: Option<RefinePredicate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnQuery {
    pub x: f64,
    pub y: f64,
    pub period: Option<Period>,
    pub k: usize,
}

impl KnnQuery {
    /// Degenerate query box: a point, with the period as temporal extent
    /// when present.
    pub fn query_box(&self) -> STBox {
        match self.period {
            Some(p) => STBox::new(self.x, self.x, self.y, self.y, p.tstart, p.tend),
            None => STBox::spatial(self.x, self.x, self.y, self.y),
        }
    }
}

/// Per-query counters: entries passing the index filter, distinct tuples
/// after dedup, and tuples surviving refinement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub matched_entries: usize,
    pub candidates: usize,
    pub results: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeResult {
    /// Matching tuple ids, ascending. No id appears twice.
    pub tuples: Vec<TupleId>,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnResult {
    /// (tuple, exact distance) pairs in nondecreasing distance order, ties
    /// by ascending tuple id.
    pub hits: Vec<(TupleId, f64)>,
    /// Set when fewer than k distinct tuples were available.
    pub short: bool,
    pub stats: QueryStats,
}

/// Range search: stream consistent entries, dedup on tuple id, then refine.
///
/// All-match operators use the index as an existence filter (if every entry
/// must match, at least one does) and recheck the operator on the
/// trajectory's bounding box. The optional exact predicate is evaluated
/// once per candidate.
pub fn search(index: &Index, store: &Store, q: &RangeQuery) -> Result<RangeResult> {
    let mut stats = QueryStats::default();
    let mut seen: HashSet<TupleId> = HashSet::new();
    let mut tuples = Vec::new();
    for entry in index.visit(q.bounds, q.operator.descend_fn(), q.operator.consistent_fn()) {
        stats.matched_entries += 1;
        if !seen.insert(entry.tuple_id) {
            continue;
        }
        let t = store.get(&entry.tuple_id).ok_or(Error::UnknownTuple(entry.tuple_id))?;
        if q.operator.class() == OperatorClass::AllMatch && !q.operator.eval(&t.bbox(), &q.bounds) {
            continue;
        }
        if let Some(refine) = &q.refine {
            if !refine.eval(t) {
                continue;
            }
        }
        tuples.push(entry.tuple_id);
    }
    stats.candidates = seen.len();
    stats.results = tuples.len();
    tuples.sort_unstable();
    Ok(RangeResult { tuples, stats })
}

/// Candidate waiting for emission, ordered by (exact distance, tuple id).
struct Ready {
    dist: f64,
    tuple: TupleId,
}
impl PartialEq for Ready {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Ready {}
impl PartialOrd for Ready {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ready {
    // Reversed: BinaryHeap pops the smallest distance first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.dist.total_cmp(&self.dist).then(other.tuple.cmp(&self.tuple))
    }
}

/// Exact KNN: pop entries by nondecreasing box-distance lower bound; on the
/// first pop of a tuple compute its exact nearest-approach distance; emit a
/// tuple once its exact distance is no greater than the next lower bound
/// still in the queue.
///
/// Tuples whose period restriction is empty are skipped, mirroring the
/// period prefilter of time-scoped nearest-neighbor queries.
pub fn knn(index: &Index, store: &Store, q: &KnnQuery) -> Result<KnnResult> {
    let mut stats = QueryStats::default();
    let mut seen: HashSet<TupleId> = HashSet::new();
    let mut ready: BinaryHeap<Ready> = BinaryHeap::new();
    let mut hits: Vec<(TupleId, f64)> = Vec::new();

    let mut stream = index.visit_nearest(q.query_box());
    while hits.len() < q.k {
        let next = stream.next();
        let frontier = stream.peek_distance().unwrap_or(f64::INFINITY);
        match next {
            None => break,
            Some((entry, _lower_bound)) => {
                stats.matched_entries += 1;
                if seen.insert(entry.tuple_id) {
                    let t = store.get(&entry.tuple_id).ok_or(Error::UnknownTuple(entry.tuple_id))?;
                    match t.nearest_approach_distance((q.x, q.y), q.period) {
                        Ok(d) => ready.push(Ready { dist: d, tuple: entry.tuple_id }),
                        Err(Error::EmptyRestriction) => {} // outside the query period
                        Err(e) => return Err(e),
                    }
                }
                while hits.len() < q.k {
                    match ready.peek() {
                        Some(r) if r.dist <= frontier => {
                            let r = ready.pop().unwrap();
                            hits.push((r.tuple, r.dist));
                        }
                        _ => break,
                    }
                }
            }
        }
    }
    while hits.len() < q.k {
        match ready.pop() {
            Some(r) => hits.push((r.tuple, r.dist)),
            None => break,
        }
    }
    stats.candidates = seen.len();
    stats.results = hits.len();
    let short = hits.len() < q.k;
    Ok(KnnResult { hits, short, stats })
}

/// Counters only; identical traversal to [`search`].
pub fn candidate_stats(index: &Index, store: &Store, q: &RangeQuery) -> Result<QueryStats> {
    Ok(search(index, store, q)?.stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{IndexEntry, IndexKind, TreeParams};
    use crate::split::{extract_value, SplitAlgorithm, SplitConfig};
    use crate::stbox::VolumeModel;
    use crate::traj::Instant;

    fn traj(id: u64, points: &[(f64, f64, f64)]) -> TrajectorySequence {
        TrajectorySequence::new(
            TupleId(id),
            points.iter().map(|&(x, y, t)| Instant::new(x, y, t)).collect(),
        )
        .unwrap()
    }

    fn build(store: &Store, algorithm: SplitAlgorithm) -> Index {
        let vm = VolumeModel::default();
        let cfg = SplitConfig::new(algorithm, vm).unwrap();
        let mut index = Index::new(IndexKind::RTree, &TreeParams::default(), vm);
        for t in store.values() {
            index.insert_all(extract_value(t, &cfg).unwrap());
        }
        index
    }

    #[test]
    fn split_tuple_returned_once() {
        let mut store = Store::new();
        store.insert(
            TupleId(1),
            traj(1, &[(0.0, 0.0, 0.0), (5.0, 0.0, 5.0), (5.0, 5.0, 10.0), (0.0, 5.0, 15.0)]),
        );
        let index = build(&store, SplitAlgorithm::Seg { m: 1 });
        assert_eq!(index.entry_count(), 3);
        let q = RangeQuery {
            bounds: STBox::new(-1.0, 6.0, -1.0, 6.0, -1.0, 16.0),
            operator: Operator::Overlaps,
            refine: None,
        };
        let r = search(&index, &store, &q).unwrap();
        assert_eq!(r.tuples, vec![TupleId(1)]);
        assert_eq!(r.stats.matched_entries, 3);
        assert_eq!(r.stats.candidates, 1);
    }

    #[test]
    fn all_match_candidate_removed_by_refine() {
        let mut store = Store::new();
        // One entry fits inside the query box, the trajectory does not.
        store.insert(TupleId(1), traj(1, &[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0), (50.0, 0.0, 2.0)]));
        let index = build(&store, SplitAlgorithm::Seg { m: 1 });
        let q = RangeQuery {
            bounds: STBox::new(-1.0, 2.0, -1.0, 1.0, -1.0, 3.0),
            operator: Operator::ContainedBy,
            refine: None,
        };
        let r = search(&index, &store, &q).unwrap();
        assert_eq!(r.stats.candidates, 1);
        assert!(r.tuples.is_empty());
    }

    #[test]
    fn unknown_tuple_is_integrity_error() {
        let store = Store::new();
        let mut index = Index::new(IndexKind::RTree, &TreeParams::default(), VolumeModel::default());
        index.insert(IndexEntry { bounds: STBox::point(0.0, 0.0, 0.0), tuple_id: TupleId(9) });
        let q = RangeQuery {
            bounds: STBox::spatial(-1.0, 1.0, -1.0, 1.0),
            operator: Operator::Overlaps,
            refine: None,
        };
        assert!(matches!(search(&index, &store, &q), Err(Error::UnknownTuple(TupleId(9)))));
    }

    #[test]
    fn knn_single_trajectory() {
        let mut store = Store::new();
        store.insert(TupleId(4), traj(4, &[(0.0, 0.0, 0.0), (10.0, 0.0, 10.0)]));
        let index = build(&store, SplitAlgorithm::None);
        let q = KnnQuery { x: 5.0, y: 3.0, period: None, k: 1 };
        let r = knn(&index, &store, &q).unwrap();
        assert_eq!(r.hits, vec![(TupleId(4), 3.0)]);
        assert!(!r.short);
    }

    #[test]
    fn knn_exact_order_beats_bbox_order() {
        let mut store = Store::new();
        // L-shaped trajectory whose bbox touches the query point but whose
        // path stays far from it.
        store.insert(
            TupleId(1),
            traj(1, &[(0.0, 10.0, 0.0), (10.0, 10.0, 10.0), (10.0, 0.0, 20.0)]),
        );
        // Straight trajectory with a larger bbox distance on one axis but a
        // closer actual path.
        store.insert(TupleId(2), traj(2, &[(0.0, 3.0, 0.0), (10.0, 3.0, 10.0)]));
        let index = build(&store, SplitAlgorithm::None);
        let q = KnnQuery { x: 0.0, y: 0.0, period: None, k: 2 };
        // Box of tuple 1 contains the query point: box distance 0. Exact
        // distances say tuple 2 is nearer.
        let d1 = store[&TupleId(1)].nearest_approach_distance((0.0, 0.0), None).unwrap();
        let d2 = store[&TupleId(2)].nearest_approach_distance((0.0, 0.0), None).unwrap();
        assert!(d2 < d1);
        let r = knn(&index, &store, &q).unwrap();
        assert_eq!(r.hits[0].0, TupleId(2));
        assert_eq!(r.hits[1].0, TupleId(1));
        assert_eq!(r.hits[0].1, d2);
        assert_eq!(r.hits[1].1, d1);
    }

    #[test]
    fn knn_short_when_k_exceeds_tuples() {
        let mut store = Store::new();
        store.insert(TupleId(1), traj(1, &[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]));
        let index = build(&store, SplitAlgorithm::None);
        let q = KnnQuery { x: 0.0, y: 0.0, period: None, k: 5 };
        let r = knn(&index, &store, &q).unwrap();
        assert_eq!(r.hits.len(), 1);
        assert!(r.short);
    }

    #[test]
    fn knn_period_filters_tuples() {
        let mut store = Store::new();
        store.insert(TupleId(1), traj(1, &[(0.0, 0.0, 0.0), (1.0, 0.0, 10.0)]));
        store.insert(TupleId(2), traj(2, &[(100.0, 0.0, 50.0), (101.0, 0.0, 60.0)]));
        let index = build(&store, SplitAlgorithm::None);
        let q = KnnQuery { x: 0.0, y: 0.0, period: Some(Period::new(45.0, 70.0)), k: 5 };
        let r = knn(&index, &store, &q).unwrap();
        assert_eq!(r.hits.len(), 1);
        assert_eq!(r.hits[0].0, TupleId(2));
    }

    #[test]
    fn stats_disjoint_query_all_zero() {
        let mut store = Store::new();
        store.insert(TupleId(1), traj(1, &[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]));
        let index = build(&store, SplitAlgorithm::None);
        let q = RangeQuery {
            bounds: STBox::new(100.0, 101.0, 0.0, 1.0, 0.0, 1.0),
            operator: Operator::Overlaps,
            refine: None,
        };
        let s = candidate_stats(&index, &store, &q).unwrap();
        assert_eq!(s, QueryStats { matched_entries: 0, candidates: 0, results: 0 });
    }

    #[test]
    fn stats_exists_no_refine_candidates_equal_results() {
        let mut store = Store::new();
        for id in 0..5u64 {
            let f = id as f64 * 10.0;
            store.insert(TupleId(id), traj(id, &[(f, 0.0, 0.0), (f + 1.0, 0.0, 1.0)]));
        }
        let index = build(&store, SplitAlgorithm::None);
        let q = RangeQuery {
            bounds: STBox::spatial(-1.0, 15.0, -1.0, 1.0),
            operator: Operator::Overlaps,
            refine: None,
        };
        let s = candidate_stats(&index, &store, &q).unwrap();
        assert_eq!(s.candidates, s.results);
        assert_eq!(s.results, 2);
    }
}
