//! Brute-force reference evaluation by linear scan over the store. Used by
//! the correctness checks; deliberately shares no code with the index
//! traversal paths.

use crate::error::{Error, Result};
use crate::query::{KnnQuery, OperatorClass, RangeQuery};
use crate::query::Store;
use crate::traj::TupleId;

/// Exact result set of a range query, by scanning every trajectory.
///
/// For all-match operators the operator is evaluated on the trajectory's
/// bounding box. For the overlaps operator with a refine predicate the
/// refine predicate alone decides (the query boxes used in this crate are
/// built to cover everything the predicate can accept, so the box filter
/// never removes a true match). A plain overlaps query without refinement
/// is answered on the bounding box.
pub fn range_scan(store: &Store, q: &RangeQuery) -> Vec<TupleId> {
    let mut out: Vec<TupleId> = store
        .iter()
        .filter(|(_, t)| match (&q.refine, q.operator.class()) {
            (Some(refine), OperatorClass::ExistsMatch) => refine.eval(t),
            (Some(refine), OperatorClass::AllMatch) => {
                q.operator.eval(&t.bbox(), &q.bounds) && refine.eval(t)
            }
            (None, _) => q.operator.eval(&t.bbox(), &q.bounds),
        })
        .map(|(id, _)| *id)
        .collect();
    out.sort_unstable();
    out
}

/// Exact top-k by nearest-approach distance, ties by ascending tuple id.
/// Tuples with an empty period restriction are excluded.
pub fn knn_scan(store: &Store, q: &KnnQuery) -> Result<Vec<(TupleId, f64)>> {
    let mut all: Vec<(TupleId, f64)> = Vec::new();
    for (id, t) in store {
        match t.nearest_approach_distance((q.x, q.y), q.period) {
            Ok(d) => all.push((*id, d)),
            Err(Error::EmptyRestriction) => {}
            Err(e) => return Err(e),
        }
    }
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(q.k);
    Ok(all)
}
