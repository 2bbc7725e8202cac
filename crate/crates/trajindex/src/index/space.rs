//! Space-partitioning multi-entry search tree with Quad-Tree and KD-Tree
//! keysets.
//!
//! Entries are routed by the centroid of their box; every node additionally
//! stores the exact union box of all entries beneath it, which is what the
//! consistency check and the distance lower bound operate on. Leaves whose
//! centroids are all identical stay oversized so insertion terminates on
//! duplicate data.

use std::collections::BinaryHeap;

use crate::index::balanced::NearestKey;
use crate::index::IndexEntry;
use crate::stbox::STBox;

/// How an inner node routes centroids to children.
#[derive(Debug, Clone, Copy)]
pub enum SplitRule {
    /// Compare per dimension against a split point; ties go low. Fanout 8.
    Octant { point: [f64; 3] },
    /// Centroid component <= value goes left. Fanout 2.
    Halfplane { dim: usize, value: f64 },
}

impl SplitRule {
    pub fn fanout(&self) -> usize {
        match self {
            SplitRule::Octant { .. } => 8,
            SplitRule::Halfplane { .. } => 2,
        }
    }

    pub fn route(&self, c: [f64; 3]) -> usize {
        match self {
            SplitRule::Octant { point } => {
                (c[0] > point[0]) as usize
                    | (((c[1] > point[1]) as usize) << 1)
                    | (((c[2] > point[2]) as usize) << 2)
            }
            SplitRule::Halfplane { dim, value } => usize::from(c[*dim] > *value),
        }
    }
}

pub trait SpKeyset {
    /// Split rule for an overfull bucket at the given tree level.
    fn split(&self, centroids: &[[f64; 3]], level: usize) -> SplitRule;
    fn distance(&self, bounds: &STBox, query: &STBox) -> f64;
}

/// Octant partitioning around the centroid of centroids.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadKeyset;

impl SpKeyset for QuadKeyset {
    fn split(&self, centroids: &[[f64; 3]], _level: usize) -> SplitRule {
        let n = centroids.len() as f64;
        let mut point = [0.0f64; 3];
        for c in centroids {
            for d in 0..3 {
                point[d] += c[d];
            }
        }
        for p in &mut point {
            *p /= n;
        }
        SplitRule::Octant { point }
    }

    fn distance(&self, bounds: &STBox, query: &STBox) -> f64 {
        bounds.min_distance(query)
    }
}

/// Median halfplane split cycling through x, y, t by level.
#[derive(Debug, Clone, Copy, Default)]
pub struct KdKeyset;

impl SpKeyset for KdKeyset {
    fn split(&self, centroids: &[[f64; 3]], level: usize) -> SplitRule {
        let dim = level % 3;
        let mut values: Vec<f64> = centroids.iter().map(|c| c[dim]).collect();
        values.sort_by(f64::total_cmp);
        // Inclusive-left median: odd counts put ceil(n/2) on the left.
        let value = values[values.len().div_ceil(2) - 1];
        SplitRule::Halfplane { dim, value }
    }

    fn distance(&self, bounds: &STBox, query: &STBox) -> f64 {
        bounds.min_distance(query)
    }
}

enum SpNode {
    Leaf { bounds: STBox, entries: Vec<IndexEntry> },
    Inner { bounds: STBox, rule: SplitRule, children: Vec<Option<Box<SpNode>>> },
}

impl SpNode {
    fn bounds(&self) -> &STBox {
        match self {
            SpNode::Leaf { bounds, .. } => bounds,
            SpNode::Inner { bounds, .. } => bounds,
        }
    }
}

fn all_centroids_identical(centroids: &[[f64; 3]]) -> bool {
    centroids.windows(2).all(|w| w[0] == w[1])
}

/// Space-partitioning multi-entry tree. Immutable after construction;
/// concurrent readers each carry private traversal state.
pub struct SpTree<K: SpKeyset> {
    root: Option<Box<SpNode>>,
    max_bucket: usize,
    keyset: K,
}

impl<K: SpKeyset> SpTree<K> {
    pub fn new(max_bucket: usize, keyset: K) -> SpTree<K> {
        assert!(max_bucket >= 1, "bucket size must be at least 1");
        SpTree { root: None, max_bucket, keyset }
    }

    pub fn insert(&mut self, entry: IndexEntry) {
        match self.root.take() {
            None => {
                self.root =
                    Some(Box::new(SpNode::Leaf { bounds: entry.bounds, entries: vec![entry] }));
            }
            Some(mut root) => {
                self.insert_rec(&mut root, entry, 0);
                self.root = Some(root);
            }
        }
    }

    pub fn insert_all(&mut self, entries: impl IntoIterator<Item = IndexEntry>) {
        for e in entries {
            self.insert(e);
        }
    }

    fn insert_rec(&self, node: &mut Box<SpNode>, entry: IndexEntry, level: usize) {
        match node.as_mut() {
            SpNode::Leaf { bounds, entries } => {
                *bounds = bounds.union(&entry.bounds);
                entries.push(entry);
                if entries.len() > self.max_bucket {
                    let replacement =
                        self.split_leaf(std::mem::take(entries), *bounds, level);
                    **node = replacement;
                }
            }
            SpNode::Inner { bounds, rule, children } => {
                *bounds = bounds.union(&entry.bounds);
                let slot = rule.route(entry.bounds.centroid());
                match &mut children[slot] {
                    Some(child) => self.insert_rec(child, entry, level + 1),
                    empty => {
                        *empty = Some(Box::new(SpNode::Leaf {
                            bounds: entry.bounds,
                            entries: vec![entry],
                        }));
                    }
                }
            }
        }
    }

    /// Turn an overfull bucket into an inner node, recursively re-splitting
    /// children that are still overfull. Unsplittable buckets (identical
    /// centroids) are kept oversized.
    fn split_leaf(&self, entries: Vec<IndexEntry>, bounds: STBox, level: usize) -> SpNode {
        let centroids: Vec<[f64; 3]> = entries.iter().map(|e| e.bounds.centroid()).collect();
        if all_centroids_identical(&centroids) {
            return SpNode::Leaf { bounds, entries };
        }
        let rule = self.keyset.split(&centroids, level);
        let mut buckets: Vec<Vec<IndexEntry>> = (0..rule.fanout()).map(|_| Vec::new()).collect();
        for (e, c) in entries.into_iter().zip(centroids) {
            buckets[rule.route(c)].push(e);
        }
        let children = buckets
            .into_iter()
            .map(|bucket| {
                if bucket.is_empty() {
                    return None;
                }
                let cb = bucket.iter().skip(1).fold(bucket[0].bounds, |a, e| a.union(&e.bounds));
                let child = if bucket.len() > self.max_bucket {
                    self.split_leaf(bucket, cb, level + 1)
                } else {
                    SpNode::Leaf { bounds: cb, entries: bucket }
                };
                Some(Box::new(child))
            })
            .collect();
        SpNode::Inner { bounds, rule, children }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn entry_count(&self) -> usize {
        fn count(node: &SpNode) -> usize {
            match node {
                SpNode::Leaf { entries, .. } => entries.len(),
                SpNode::Inner { children, .. } => {
                    children.iter().flatten().map(|c| count(c)).sum()
                }
            }
        }
        self.root.as_deref().map_or(0, count)
    }

    pub fn node_count(&self) -> usize {
        fn count(node: &SpNode) -> usize {
            match node {
                SpNode::Leaf { .. } => 1,
                SpNode::Inner { children, .. } => {
                    1 + children.iter().flatten().map(|c| count(c)).sum::<usize>()
                }
            }
        }
        self.root.as_deref().map_or(0, count)
    }

    /// Structural checks: union boxes exact, bucket sizes within bounds
    /// unless unsplittable, fanout within the rule's limit.
    pub fn validate(&self) -> Result<(), String> {
        fn walk<K: SpKeyset>(tree: &SpTree<K>, node: &SpNode) -> Result<STBox, String> {
            match node {
                SpNode::Leaf { bounds, entries } => {
                    if entries.is_empty() {
                        return Err("empty leaf".into());
                    }
                    if entries.len() > tree.max_bucket {
                        let centroids: Vec<[f64; 3]> =
                            entries.iter().map(|e| e.bounds.centroid()).collect();
                        if !all_centroids_identical(&centroids) {
                            return Err(format!(
                                "splittable leaf of size {} exceeds bucket {}",
                                entries.len(),
                                tree.max_bucket
                            ));
                        }
                    }
                    let union =
                        entries.iter().skip(1).fold(entries[0].bounds, |a, e| a.union(&e.bounds));
                    if union != *bounds {
                        return Err("stale leaf union box".into());
                    }
                    Ok(union)
                }
                SpNode::Inner { bounds, rule, children } => {
                    if children.len() != rule.fanout() {
                        return Err("child slot count does not match rule fanout".into());
                    }
                    let mut union: Option<STBox> = None;
                    for child in children.iter().flatten() {
                        let cb = walk(tree, child)?;
                        union = Some(union.map_or(cb, |u| u.union(&cb)));
                    }
                    let union = union.ok_or("inner node with no children")?;
                    if union != *bounds {
                        return Err("stale inner union box".into());
                    }
                    Ok(union)
                }
            }
        }
        if let Some(root) = &self.root {
            walk(self, root)?;
        }
        Ok(())
    }

    /// Stream of leaf entries accepted by `accept`; traversal pruned by
    /// applying `descend` to each node's stored union box.
    pub fn visit<'a, D, A>(&'a self, query: STBox, descend: D, accept: A) -> SpVisit<'a, D, A>
    where
        D: Fn(&STBox, &STBox) -> bool,
        A: Fn(&STBox, &STBox) -> bool,
    {
        let mut stack = Vec::new();
        if let Some(root) = &self.root {
            stack.push(root.as_ref());
        }
        SpVisit { stack, leaf: [].iter(), query, descend, accept }
    }

    /// Best-first stream of (entry, lower-bound distance), nondecreasing,
    /// with the same tie order as the balanced tree.
    pub fn visit_nearest<'a>(&'a self, query: STBox) -> SpVisitNearest<'a, K> {
        let mut heap = BinaryHeap::new();
        if let Some(root) = &self.root {
            heap.push(SpNearestItem {
                key: NearestKey::node(self.keyset.distance(root.bounds(), &query)),
                target: SpTarget::Node(root),
            });
        }
        SpVisitNearest { heap, query, keyset: &self.keyset }
    }
}

pub struct SpVisit<'a, D, A> {
    stack: Vec<&'a SpNode>,
    leaf: std::slice::Iter<'a, IndexEntry>,
    query: STBox,
    descend: D,
    accept: A,
}

impl<'a, D, A> Iterator for SpVisit<'a, D, A>
where
    D: Fn(&STBox, &STBox) -> bool,
    A: Fn(&STBox, &STBox) -> bool,
{
    type Item = &'a IndexEntry;

    fn next(&mut self) -> Option<&'a IndexEntry> {
        loop {
            for e in self.leaf.by_ref() {
                if (self.accept)(&e.bounds, &self.query) {
                    return Some(e);
                }
            }
            let node = self.stack.pop()?;
            if !(self.descend)(node.bounds(), &self.query) {
                continue;
            }
            match node {
                SpNode::Leaf { entries, .. } => self.leaf = entries.iter(),
                SpNode::Inner { children, .. } => {
                    self.stack.extend(children.iter().flatten().map(|c| c.as_ref()))
                }
            }
        }
    }
}

enum SpTarget<'a> {
    Node(&'a SpNode),
    Entry(&'a IndexEntry),
}

struct SpNearestItem<'a> {
    key: NearestKey,
    target: SpTarget<'a>,
}

impl PartialEq for SpNearestItem<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for SpNearestItem<'_> {}
impl PartialOrd for SpNearestItem<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SpNearestItem<'_> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.key.cmp_key(&self.key)
    }
}

pub struct SpVisitNearest<'a, K: SpKeyset> {
    heap: BinaryHeap<SpNearestItem<'a>>,
    query: STBox,
    keyset: &'a K,
}

impl<'a, K: SpKeyset> SpVisitNearest<'a, K> {
    pub fn peek_distance(&self) -> Option<f64> {
        self.heap.peek().map(|i| i.key.dist)
    }
}

impl<'a, K: SpKeyset> Iterator for SpVisitNearest<'a, K> {
    type Item = (&'a IndexEntry, f64);

    fn next(&mut self) -> Option<(&'a IndexEntry, f64)> {
        while let Some(item) = self.heap.pop() {
            match item.target {
                SpTarget::Entry(e) => return Some((e, item.key.dist)),
                SpTarget::Node(SpNode::Leaf { entries, .. }) => {
                    for e in entries {
                        let d = self.keyset.distance(&e.bounds, &self.query);
                        self.heap.push(SpNearestItem {
                            key: NearestKey::entry(d, e),
                            target: SpTarget::Entry(e),
                        });
                    }
                }
                SpTarget::Node(SpNode::Inner { children, .. }) => {
                    for c in children.iter().flatten() {
                        let d = self.keyset.distance(c.bounds(), &self.query);
                        self.heap.push(SpNearestItem {
                            key: NearestKey::node(d),
                            target: SpTarget::Node(c),
                        });
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traj::TupleId;

    fn entry_at(id: u64, x: f64, y: f64, t: f64) -> IndexEntry {
        IndexEntry { bounds: STBox::point(x, y, t), tuple_id: TupleId(id) }
    }

    #[test]
    fn empty_insert_makes_single_leaf() {
        let mut t = SpTree::new(4, QuadKeyset);
        t.insert(entry_at(1, 0.0, 0.0, 0.0));
        assert_eq!(t.node_count(), 1);
        t.validate().unwrap();
    }

    #[test]
    fn overflow_with_distinct_centroids_splits() {
        let mut t = SpTree::new(4, QuadKeyset);
        for i in 0..5 {
            t.insert(entry_at(i, i as f64, i as f64, i as f64));
        }
        assert!(t.node_count() > 1);
        assert_eq!(t.entry_count(), 5);
        t.validate().unwrap();
    }

    #[test]
    fn identical_centroids_keep_oversized_leaf() {
        let mut t = SpTree::new(4, QuadKeyset);
        for i in 0..10 {
            t.insert(entry_at(i, 1.0, 2.0, 3.0));
        }
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.entry_count(), 10);
        t.validate().unwrap();
    }

    #[test]
    fn octant_split_two_corners_two_buckets() {
        let ks = QuadKeyset;
        let centroids = vec![[0.0, 0.0, 0.0], [0.1, 0.1, 0.0], [10.0, 10.0, 0.0], [10.1, 10.1, 0.0]];
        let rule = ks.split(&centroids, 0);
        let mut used = std::collections::HashSet::new();
        for c in &centroids {
            used.insert(rule.route(*c));
        }
        assert_eq!(used.len(), 2);
    }

    #[test]
    fn octant_ties_go_low() {
        let rule = SplitRule::Octant { point: [1.0, 1.0, 1.0] };
        assert_eq!(rule.route([1.0, 1.0, 1.0]), 0);
        assert_eq!(rule.route([1.1, 1.0, 1.0]), 1);
        assert_eq!(rule.route([1.0, 1.1, 1.0]), 2);
        assert_eq!(rule.route([1.0, 1.0, 1.1]), 4);
    }

    #[test]
    fn octant_uniform_random_hits_all_eight() {
        // Statistical check: 1000 spread-out centroids should use all octants.
        let ks = QuadKeyset;
        let mut centroids = Vec::new();
        let mut state = 12345u64;
        for _ in 0..1000 {
            let mut c = [0.0f64; 3];
            for v in &mut c {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v = ((state >> 33) % 1000) as f64;
            }
            centroids.push(c);
        }
        let rule = ks.split(&centroids, 0);
        let used: std::collections::HashSet<usize> =
            centroids.iter().map(|c| rule.route(*c)).collect();
        assert_eq!(used.len(), 8);
    }

    #[test]
    fn kd_cycles_dimensions() {
        let ks = KdKeyset;
        let centroids = vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        for (level, dim) in [(0, 0), (1, 1), (2, 2), (3, 0)] {
            match ks.split(&centroids, level) {
                SplitRule::Halfplane { dim: d, .. } => assert_eq!(d, dim),
                _ => panic!("expected halfplane"),
            }
        }
    }

    #[test]
    fn kd_median_inclusive_left() {
        let ks = KdKeyset;
        let centroids: Vec<[f64; 3]> = (0..5).map(|i| [i as f64, 0.0, 0.0]).collect();
        let rule = ks.split(&centroids, 0);
        let left = centroids.iter().filter(|c| rule.route(**c) == 0).count();
        assert_eq!(left, 3); // ceil(5/2)
    }

    #[test]
    fn visit_extremes() {
        let mut t = SpTree::new(4, KdKeyset);
        for i in 0..20 {
            t.insert(entry_at(i, i as f64, 0.0, i as f64));
        }
        let miss = STBox::new(100.0, 101.0, 0.0, 1.0, 0.0, 1.0);
        assert_eq!(t.visit(miss, |a, b| a.overlaps(b), |a, b| a.overlaps(b)).count(), 0);
        let all = STBox::new(-1.0, 21.0, -1.0, 1.0, -1.0, 21.0);
        assert_eq!(t.visit(all, |a, b| a.overlaps(b), |a, b| a.overlaps(b)).count(), 20);
    }

    #[test]
    fn visit_nearest_overlap_first() {
        let mut t = SpTree::new(2, QuadKeyset);
        t.insert(entry_at(1, 5.0, 5.0, 0.0));
        t.insert(entry_at(2, 0.0, 0.0, 0.0));
        t.insert(entry_at(3, 9.0, 9.0, 0.0));
        let got: Vec<_> = t.visit_nearest(STBox::point(0.0, 0.0, 0.0)).collect();
        assert_eq!(got[0].0.tuple_id, TupleId(2));
        assert_eq!(got[0].1, 0.0);
        assert!(got.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
