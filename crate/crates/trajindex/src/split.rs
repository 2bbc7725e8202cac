//! Trajectory splitting: turn one trajectory into a set of bounding boxes
//! covering contiguous segment runs. These implement the value-extraction
//! step that multi-entry indexes apply before insertion.
//!
//! Five algorithms are provided, plus an exact dynamic-programming optimum
//! used as a test oracle for the greedy merge heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::index::IndexEntry;
use crate::stbox::{STBox, VolumeModel};
use crate::traj::TrajectorySequence;

/// Which splitting algorithm to run and its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitAlgorithm {
    /// Single entry: the trajectory's bounding box.
    None,
    /// Fixed number of boxes `k`; each box covers ceil(n/k) segments.
    Equi { k: usize },
    /// Fixed number of segments `m` per box; ceil(n/m) boxes.
    Seg { m: usize },
    /// Greedy adjacent merges down to `k` boxes, minimizing volume increase.
    Merge { k: usize },
    /// MergeSplit with k = ceil(n/m), so longer trajectories get more boxes.
    Adapt { m: usize },
    /// Single pass, closing the current box when extending it costs more
    /// than starting a new one under the expected-query cost model.
    Linear { qx: f64, qy: f64, qt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub algorithm: SplitAlgorithm,
    pub volume: VolumeModel,
}

impl SplitConfig {
    pub fn new(algorithm: SplitAlgorithm, volume: VolumeModel) -> Result<SplitConfig> {
        match algorithm {
            SplitAlgorithm::Equi { k } | SplitAlgorithm::Merge { k } if k < 1 => {
                return Err(Error::InvalidParameter("k must be >= 1".into()))
            }
            SplitAlgorithm::Seg { m } | SplitAlgorithm::Adapt { m } if m < 1 => {
                return Err(Error::InvalidParameter("m must be >= 1".into()))
            }
            SplitAlgorithm::Linear { qx, qy, qt } if qx < 0.0 || qy < 0.0 || qt < 0.0 => {
                return Err(Error::InvalidParameter("query extents must be >= 0".into()))
            }
            _ => {}
        }
        Ok(SplitConfig { algorithm, volume })
    }
}

/// Box over the contiguous run of segments `[start, end)`.
fn run_box(t: &TrajectorySequence, start: usize, end: usize) -> STBox {
    let mut b = t.segment_bbox(start).expect("run within range");
    for i in start + 1..end {
        b = b.union(&t.segment_bbox(i).expect("run within range"));
    }
    b
}

fn boxes_for_runs(t: &TrajectorySequence, run_len: usize) -> Vec<STBox> {
    let n = t.num_segments();
    (0..n).step_by(run_len).map(|s| run_box(t, s, (s + run_len).min(n))).collect()
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Split into at most `k` boxes of ceil(n/k) consecutive segments each.
pub fn equi_split(t: &TrajectorySequence, k: usize) -> Result<Vec<STBox>> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if t.num_instants() == 1 {
        return Ok(vec![t.bbox()]);
    }
    Ok(boxes_for_runs(t, ceil_div(t.num_segments(), k)))
}

/// Split into ceil(n/m) boxes of `m` consecutive segments each.
pub fn seg_split(t: &TrajectorySequence, m: usize) -> Result<Vec<STBox>> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if t.num_instants() == 1 {
        return Ok(vec![t.bbox()]);
    }
    Ok(boxes_for_runs(t, m))
}

struct MergeCandidate {
    cost: f64,
    left: usize,
    right: usize,
    left_version: u64,
    right_version: u64,
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for MergeCandidate {}
impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MergeCandidate {
    // Max-heap on Reverse: cheapest cost first, ties by smallest left index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then(self.left.cmp(&other.left))
    }
}

/// Start from one box per segment and greedily merge the adjacent pair with
/// the least padded-volume increase until `min(k, n)` boxes remain.
pub fn merge_split(t: &TrajectorySequence, k: usize, vm: &VolumeModel) -> Result<Vec<STBox>> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if t.num_instants() == 1 {
        return Ok(vec![t.bbox()]);
    }
    let n = t.num_segments();
    let target = k.min(n);
    let mut boxes: Vec<STBox> = (0..n).map(|i| t.segment_bbox(i).unwrap()).collect();
    // Runs as a linked list over start-segment slots; `n` is the end sentinel.
    let mut next: Vec<usize> = (1..=n).collect();
    let mut prev: Vec<usize> = (0..n).map(|i| i.wrapping_sub(1)).collect();
    let mut alive = vec![true; n];
    let mut version = vec![0u64; n];
    let mut live = n;

    let mut heap: BinaryHeap<std::cmp::Reverse<MergeCandidate>> = BinaryHeap::new();
    let push_pair = |heap: &mut BinaryHeap<std::cmp::Reverse<MergeCandidate>>,
                         boxes: &[STBox],
                         version: &[u64],
                         left: usize,
                         right: usize| {
        heap.push(std::cmp::Reverse(MergeCandidate {
            cost: vm.merge_cost(&boxes[left], &boxes[right]),
            left,
            right,
            left_version: version[left],
            right_version: version[right],
        }));
    };
    for i in 0..n - 1 {
        push_pair(&mut heap, &boxes, &version, i, i + 1);
    }

    while live > target {
        let std::cmp::Reverse(cand) = heap.pop().expect("pairs remain while live > 1");
        let stale = !alive[cand.left]
            || !alive[cand.right]
            || next[cand.left] != cand.right
            || version[cand.left] != cand.left_version
            || version[cand.right] != cand.right_version;
        if stale {
            continue;
        }
        boxes[cand.left] = boxes[cand.left].union(&boxes[cand.right]);
        version[cand.left] += 1;
        alive[cand.right] = false;
        next[cand.left] = next[cand.right];
        if next[cand.right] < n {
            prev[next[cand.right]] = cand.left;
        }
        live -= 1;
        if cand.left > 0 {
            let p = prev[cand.left];
            if p < n && alive[p] {
                push_pair(&mut heap, &boxes, &version, p, cand.left);
            }
        }
        if next[cand.left] < n {
            push_pair(&mut heap, &boxes, &version, cand.left, next[cand.left]);
        }
    }

    Ok((0..n).filter(|&i| alive[i]).map(|i| boxes[i]).collect())
}

/// MergeSplit with the box count derived from segments-per-box `m`.
pub fn adapt_split(t: &TrajectorySequence, m: usize, vm: &VolumeModel) -> Result<Vec<STBox>> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if t.num_instants() == 1 {
        return Ok(vec![t.bbox()]);
    }
    merge_split(t, ceil_div(t.num_segments(), m), vm)
}

fn linear_cost(b: &STBox, qx: f64, qy: f64, qt: f64) -> f64 {
    (b.x_extent() + qx) * (b.y_extent() + qy) * (b.t_extent() + qt)
}

/// One left-to-right pass: extend the current box with the next segment
/// unless closing it and starting fresh is cheaper under the expected
/// range-query cost (extent + query extent, per dimension).
pub fn linear_split(t: &TrajectorySequence, qx: f64, qy: f64, qt: f64) -> Result<Vec<STBox>> {
    if qx < 0.0 || qy < 0.0 || qt < 0.0 {
        return Err(Error::InvalidParameter("query extents must be >= 0".into()));
    }
    if t.num_instants() == 1 {
        return Ok(vec![t.bbox()]);
    }
    let mut out = Vec::new();
    let mut current = t.segment_bbox(0).unwrap();
    for i in 1..t.num_segments() {
        let seg = t.segment_bbox(i).unwrap();
        let merged = current.union(&seg);
        if linear_cost(&merged, qx, qy, qt)
            > linear_cost(&current, qx, qy, qt) + linear_cost(&seg, qx, qy, qt)
        {
            out.push(current);
            current = seg;
        } else {
            current = merged;
        }
    }
    out.push(current);
    Ok(out)
}

/// Exact minimum-total-volume split into `min(k, n)` contiguous runs,
/// by O(n^2 k) dynamic programming. Test oracle; only run on small inputs.
pub fn optimal_split_volume(
    t: &TrajectorySequence,
    k: usize,
    vm: &VolumeModel,
) -> Result<(Vec<STBox>, f64)> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if t.num_instants() == 1 {
        let b = t.bbox();
        return Ok((vec![b], vm.volume(&b)));
    }
    let n = t.num_segments();
    let target = k.min(n);
    // run_vol[s][e] = padded volume of the box over segments [s, e)
    let mut run_vol = vec![vec![0.0f64; n + 1]; n];
    let mut run_boxes = vec![vec![None; n + 1]; n];
    for s in 0..n {
        let mut b = t.segment_bbox(s).unwrap();
        run_vol[s][s + 1] = vm.volume(&b);
        run_boxes[s][s + 1] = Some(b);
        for e in s + 2..=n {
            b = b.union(&t.segment_bbox(e - 1).unwrap());
            run_vol[s][e] = vm.volume(&b);
            run_boxes[s][e] = Some(b);
        }
    }
    // dp[j][i] = min total volume splitting segments [0, i) into j runs
    let mut dp = vec![vec![f64::INFINITY; n + 1]; target + 1];
    let mut back = vec![vec![0usize; n + 1]; target + 1];
    dp[0][0] = 0.0;
    for j in 1..=target {
        for i in j..=n {
            for s in (j - 1)..i {
                let cost = dp[j - 1][s] + run_vol[s][i];
                if cost < dp[j][i] {
                    dp[j][i] = cost;
                    back[j][i] = s;
                }
            }
        }
    }
    let mut boxes = Vec::with_capacity(target);
    let mut i = n;
    for j in (1..=target).rev() {
        let s = back[j][i];
        boxes.push(run_boxes[s][i].unwrap());
        i = s;
    }
    boxes.reverse();
    Ok((boxes, dp[target][n]))
}

/// Dispatch to the configured algorithm and wrap each box with the
/// trajectory's tuple id. Never returns an empty set.
pub fn extract_value(t: &TrajectorySequence, cfg: &SplitConfig) -> Result<Vec<IndexEntry>> {
    let boxes = match cfg.algorithm {
        SplitAlgorithm::None => vec![t.bbox()],
        SplitAlgorithm::Equi { k } => equi_split(t, k)?,
        SplitAlgorithm::Seg { m } => seg_split(t, m)?,
        SplitAlgorithm::Merge { k } => merge_split(t, k, &cfg.volume)?,
        SplitAlgorithm::Adapt { m } => adapt_split(t, m, &cfg.volume)?,
        SplitAlgorithm::Linear { qx, qy, qt } => linear_split(t, qx, qy, qt)?,
    };
    debug_assert!(!boxes.is_empty());
    Ok(boxes.into_iter().map(|b| IndexEntry { bounds: b, tuple_id: t.tuple_id() }).collect())
}
