//! Balanced multi-entry search tree with a pluggable keyset.
//!
//! The tree handles descent, node splitting and bounding-predicate
//! maintenance; the keyset decides union, penalty, split partitioning and
//! distance. The R-tree keyset (Guttman quadratic split, enlargement
//! penalty) is the provided instantiation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::index::IndexEntry;
use crate::stbox::{STBox, VolumeModel};

pub trait BalancedKeyset {
    fn union(&self, boxes: &[STBox]) -> STBox;
    fn penalty(&self, node: &STBox, incoming: &STBox) -> f64;
    /// Partition `boxes` (an overfull node) into two index sets, each of
    /// size at least `min_fill`.
    fn picksplit(&self, boxes: &[STBox], min_fill: usize) -> (Vec<usize>, Vec<usize>);
    fn distance(&self, bounds: &STBox, query: &STBox) -> f64;
    /// Size measure used for tie-breaking during descent.
    fn key_size(&self, bounds: &STBox) -> f64;
}

/// Quadratic-split R-tree key methods over padded volumes.
#[derive(Debug, Clone, Copy)]
pub struct RTreeKeyset {
    pub volume: VolumeModel,
}

impl BalancedKeyset for RTreeKeyset {
    fn union(&self, boxes: &[STBox]) -> STBox {
        boxes.iter().skip(1).fold(boxes[0], |acc, b| acc.union(b))
    }

    fn penalty(&self, node: &STBox, incoming: &STBox) -> f64 {
        self.volume.enlargement(node, incoming)
    }

    fn picksplit(&self, boxes: &[STBox], min_fill: usize) -> (Vec<usize>, Vec<usize>) {
        let n = boxes.len();
        // Seeds: the pair wasting the most dead space in their union.
        let (mut seed_a, mut seed_b) = (0, 1);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let waste = self.volume.merge_cost(&boxes[i], &boxes[j]);
                if waste > worst {
                    worst = waste;
                    seed_a = i;
                    seed_b = j;
                }
            }
        }
        let mut left = vec![seed_a];
        let mut right = vec![seed_b];
        let mut left_box = boxes[seed_a];
        let mut right_box = boxes[seed_b];
        let mut remaining: Vec<usize> = (0..n).filter(|&i| i != seed_a && i != seed_b).collect();

        while !remaining.is_empty() {
            // Starvation guard: hand the rest to the short side.
            if left.len() + remaining.len() == min_fill {
                left.append(&mut remaining);
                break;
            }
            if right.len() + remaining.len() == min_fill {
                right.append(&mut remaining);
                break;
            }
            // PickNext: entry with the largest penalty difference.
            let mut pick = 0;
            let mut best_diff = f64::NEG_INFINITY;
            for (pos, &i) in remaining.iter().enumerate() {
                let d_left = self.volume.enlargement(&left_box, &boxes[i]);
                let d_right = self.volume.enlargement(&right_box, &boxes[i]);
                let diff = (d_left - d_right).abs();
                if diff > best_diff {
                    best_diff = diff;
                    pick = pos;
                }
            }
            let i = remaining.swap_remove(pick);
            let d_left = self.volume.enlargement(&left_box, &boxes[i]);
            let d_right = self.volume.enlargement(&right_box, &boxes[i]);
            let go_left = match d_left.total_cmp(&d_right) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => match self
                    .volume
                    .volume(&left_box)
                    .total_cmp(&self.volume.volume(&right_box))
                {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => left.len() <= right.len(),
                },
            };
            if go_left {
                left_box = left_box.union(&boxes[i]);
                left.push(i);
            } else {
                right_box = right_box.union(&boxes[i]);
                right.push(i);
            }
        }
        (left, right)
    }

    fn distance(&self, bounds: &STBox, query: &STBox) -> f64 {
        bounds.min_distance(query)
    }

    fn key_size(&self, bounds: &STBox) -> f64 {
        self.volume.volume(bounds)
    }
}

enum Node {
    Leaf { bounds: STBox, entries: Vec<IndexEntry> },
    Inner { bounds: STBox, children: Vec<Node> },
}

impl Node {
    fn bounds(&self) -> &STBox {
        match self {
            Node::Leaf { bounds, .. } => bounds,
            Node::Inner { bounds, .. } => bounds,
        }
    }

    fn fanout(&self) -> usize {
        match self {
            Node::Leaf { entries, .. } => entries.len(),
            Node::Inner { children, .. } => children.len(),
        }
    }
}

/// Balanced multi-entry tree. Immutable after construction; concurrent
/// readers each carry private traversal state.
pub struct BalancedTree<K: BalancedKeyset = RTreeKeyset> {
    root: Option<Node>,
    max_entries: usize,
    min_fill: usize,
    keyset: K,
}

impl<K: BalancedKeyset> BalancedTree<K> {
    pub fn new(max_entries: usize, fill_factor: f64, keyset: K) -> BalancedTree<K> {
        assert!(max_entries >= 2, "node capacity must be at least 2");
        assert!(fill_factor > 0.0 && fill_factor <= 0.5, "fill factor in (0, 0.5]");
        let min_fill = ((fill_factor * max_entries as f64).ceil() as usize).max(1);
        BalancedTree { root: None, max_entries, min_fill, keyset }
    }

    pub fn insert(&mut self, entry: IndexEntry) {
        match self.root.take() {
            None => {
                self.root = Some(Node::Leaf { bounds: entry.bounds, entries: vec![entry] });
            }
            Some(mut root) => {
                if let Some(sibling) = self.insert_rec(&mut root, entry) {
                    let bounds = self.keyset.union(&[*root.bounds(), *sibling.bounds()]);
                    root = Node::Inner { bounds, children: vec![root, sibling] };
                }
                self.root = Some(root);
            }
        }
    }

    pub fn insert_all(&mut self, entries: impl IntoIterator<Item = IndexEntry>) {
        for e in entries {
            self.insert(e);
        }
    }

    fn insert_rec(&mut self, node: &mut Node, entry: IndexEntry) -> Option<Node> {
        match node {
            Node::Leaf { bounds, entries } => {
                entries.push(entry);
                if entries.len() <= self.max_entries {
                    *bounds = self.boxes_union(entries.iter().map(|e| e.bounds));
                    return None;
                }
                let boxes: Vec<STBox> = entries.iter().map(|e| e.bounds).collect();
                let (left_idx, right_idx) = self.keyset.picksplit(&boxes, self.min_fill);
                let all = std::mem::take(entries);
                let left: Vec<IndexEntry> = left_idx.iter().map(|&i| all[i]).collect();
                let right: Vec<IndexEntry> = right_idx.iter().map(|&i| all[i]).collect();
                *entries = left;
                *bounds = self.boxes_union(entries.iter().map(|e| e.bounds));
                let rbounds = self.boxes_union(right.iter().map(|e| e.bounds));
                Some(Node::Leaf { bounds: rbounds, entries: right })
            }
            Node::Inner { bounds, children } => {
                let pick = self.choose_subtree(children, &entry.bounds);
                let sibling = self.insert_rec(&mut children[pick], entry);
                if let Some(s) = sibling {
                    children.push(s);
                }
                if children.len() <= self.max_entries {
                    *bounds = self.boxes_union(children.iter().map(|c| *c.bounds()));
                    return None;
                }
                let boxes: Vec<STBox> = children.iter().map(|c| *c.bounds()).collect();
                let (left_idx, right_idx) = self.keyset.picksplit(&boxes, self.min_fill);
                let mut all: Vec<Option<Node>> =
                    std::mem::take(children).into_iter().map(Some).collect();
                let left: Vec<Node> = left_idx.iter().map(|&i| all[i].take().unwrap()).collect();
                let right: Vec<Node> = right_idx.iter().map(|&i| all[i].take().unwrap()).collect();
                *children = left;
                *bounds = self.boxes_union(children.iter().map(|c| *c.bounds()));
                let rbounds = self.boxes_union(right.iter().map(|c| *c.bounds()));
                Some(Node::Inner { bounds: rbounds, children: right })
            }
        }
    }

    /// Minimum penalty; ties by smaller node volume, then leftmost child.
    fn choose_subtree(&self, children: &[Node], incoming: &STBox) -> usize {
        let mut best = 0;
        let mut best_penalty = f64::INFINITY;
        for (i, child) in children.iter().enumerate() {
            let p = self.keyset.penalty(child.bounds(), incoming);
            let better = match p.total_cmp(&best_penalty) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    self.keyset.key_size(child.bounds())
                        < self.keyset.key_size(children[best].bounds())
                }
            };
            if better {
                best = i;
                best_penalty = p;
            }
        }
        best
    }

    fn boxes_union(&self, boxes: impl Iterator<Item = STBox>) -> STBox {
        let collected: Vec<STBox> = boxes.collect();
        self.keyset.union(&collected)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn entry_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            match node {
                Node::Leaf { entries, .. } => entries.len(),
                Node::Inner { children, .. } => children.iter().map(count).sum(),
            }
        }
        self.root.as_ref().map_or(0, count)
    }

    pub fn node_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Inner { children, .. } => 1 + children.iter().map(count).sum::<usize>(),
            }
        }
        self.root.as_ref().map_or(0, count)
    }

    pub fn depth(&self) -> usize {
        let mut d = 0;
        let mut node = self.root.as_ref();
        while let Some(n) = node {
            d += 1;
            node = match n {
                Node::Leaf { .. } => None,
                Node::Inner { children, .. } => children.first(),
            };
        }
        d
    }

    /// Structural checks: equal leaf depth, exact union boxes, and occupancy
    /// bounds on every non-root node. Returns a description of the first
    /// violation found.
    pub fn validate(&self) -> Result<(), String> {
        fn walk<K: BalancedKeyset>(
            tree: &BalancedTree<K>,
            node: &Node,
            is_root: bool,
            leaf_depths: &mut Vec<usize>,
            depth: usize,
        ) -> Result<(), String> {
            if !is_root && (node.fanout() < tree.min_fill || node.fanout() > tree.max_entries) {
                return Err(format!(
                    "node occupancy {} outside [{}, {}]",
                    node.fanout(),
                    tree.min_fill,
                    tree.max_entries
                ));
            }
            match node {
                Node::Leaf { bounds, entries } => {
                    if entries.is_empty() {
                        return Err("empty leaf".into());
                    }
                    let expect = tree.boxes_union(entries.iter().map(|e| e.bounds));
                    if expect != *bounds {
                        return Err("stale leaf bounds".into());
                    }
                    leaf_depths.push(depth);
                }
                Node::Inner { bounds, children } => {
                    if children.len() < 2 {
                        return Err("inner node with fewer than 2 children".into());
                    }
                    let expect = tree.boxes_union(children.iter().map(|c| *c.bounds()));
                    if expect != *bounds {
                        return Err("stale inner bounds".into());
                    }
                    for c in children {
                        walk(tree, c, false, leaf_depths, depth + 1)?;
                    }
                }
            }
            Ok(())
        }
        let mut leaf_depths = Vec::new();
        if let Some(root) = &self.root {
            walk(self, root, true, &mut leaf_depths, 0)?;
            if leaf_depths.windows(2).any(|w| w[0] != w[1]) {
                return Err("leaves at unequal depth".into());
            }
        }
        Ok(())
    }

    /// Depth-first stream of leaf entries accepted by `accept`, descending
    /// only into nodes passing `descend`. The two differ for operators like
    /// containment, where a node's union box can fail the entry predicate
    /// while an entry below it passes.
    pub fn visit<'a, D, A>(&'a self, query: STBox, descend: D, accept: A) -> Visit<'a, D, A>
    where
        D: Fn(&STBox, &STBox) -> bool,
        A: Fn(&STBox, &STBox) -> bool,
    {
        let mut stack = Vec::new();
        if let Some(root) = &self.root {
            stack.push(root);
        }
        Visit { stack, leaf: [].iter(), query, descend, accept }
    }

    /// Best-first stream of (entry, lower-bound distance), nondecreasing.
    /// Ties resolve by tuple id, then box, for reproducible output.
    pub fn visit_nearest<'a>(&'a self, query: STBox) -> VisitNearest<'a, K> {
        let mut heap = BinaryHeap::new();
        if let Some(root) = &self.root {
            heap.push(NearestItem {
                key: NearestKey::node(self.keyset.distance(root.bounds(), &query)),
                target: Target::Node(root),
            });
        }
        VisitNearest { heap, query, keyset: &self.keyset }
    }
}

pub struct Visit<'a, D, A> {
    stack: Vec<&'a Node>,
    leaf: std::slice::Iter<'a, IndexEntry>,
    query: STBox,
    descend: D,
    accept: A,
}

impl<'a, D, A> Iterator for Visit<'a, D, A>
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
                Node::Leaf { entries, .. } => self.leaf = entries.iter(),
                Node::Inner { children, .. } => self.stack.extend(children.iter()),
            }
        }
    }
}

/// Heap ordering for best-first search: nearest first; at equal distance
/// nodes expand before entries so entry ties can resolve by tuple id.
#[derive(Clone, Copy)]
pub(crate) struct NearestKey {
    pub dist: f64,
    pub is_entry: bool,
    pub tuple: u64,
    pub bounds: [f64; 6],
}

impl NearestKey {
    pub(crate) fn node(dist: f64) -> NearestKey {
        NearestKey { dist, is_entry: false, tuple: 0, bounds: [0.0; 6] }
    }

    pub(crate) fn entry(dist: f64, e: &IndexEntry) -> NearestKey {
        NearestKey {
            dist,
            is_entry: true,
            tuple: e.tuple_id.0,
            bounds: [
                e.bounds.xmin,
                e.bounds.ymin,
                e.bounds.tmin,
                e.bounds.xmax,
                e.bounds.ymax,
                e.bounds.tmax,
            ],
        }
    }

    pub(crate) fn cmp_key(&self, other: &NearestKey) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.is_entry.cmp(&other.is_entry))
            .then(self.tuple.cmp(&other.tuple))
            .then_with(|| {
                for (a, b) in self.bounds.iter().zip(other.bounds.iter()) {
                    let ord = a.total_cmp(b);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            })
    }
}

enum Target<'a> {
    Node(&'a Node),
    Entry(&'a IndexEntry),
}

struct NearestItem<'a> {
    key: NearestKey,
    target: Target<'a>,
}

impl PartialEq for NearestItem<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.key.cmp_key(&other.key) == Ordering::Equal
    }
}
impl Eq for NearestItem<'_> {}
impl PartialOrd for NearestItem<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NearestItem<'_> {
    // BinaryHeap is a max-heap; reverse for nearest-first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp_key(&self.key)
    }
}

pub struct VisitNearest<'a, K: BalancedKeyset> {
    heap: BinaryHeap<NearestItem<'a>>,
    query: STBox,
    keyset: &'a K,
}

impl<'a, K: BalancedKeyset> VisitNearest<'a, K> {
    /// Lower-bound distance of the next item in the stream, if any.
    pub fn peek_distance(&self) -> Option<f64> {
        self.heap.peek().map(|i| i.key.dist)
    }
}

impl<'a, K: BalancedKeyset> Iterator for VisitNearest<'a, K> {
    type Item = (&'a IndexEntry, f64);

    fn next(&mut self) -> Option<(&'a IndexEntry, f64)> {
        while let Some(item) = self.heap.pop() {
            match item.target {
                Target::Entry(e) => return Some((e, item.key.dist)),
                Target::Node(Node::Leaf { entries, .. }) => {
                    for e in entries {
                        let d = self.keyset.distance(&e.bounds, &self.query);
                        self.heap
                            .push(NearestItem { key: NearestKey::entry(d, e), target: Target::Entry(e) });
                    }
                }
                Target::Node(Node::Inner { children, .. }) => {
                    for c in children {
                        let d = self.keyset.distance(c.bounds(), &self.query);
                        self.heap
                            .push(NearestItem { key: NearestKey::node(d), target: Target::Node(c) });
                    }
                }
            }
        }
        None
    }
}
