//! Exact ball tree over a fixed point set, specialised for first-neighbor
//! queries of points that belong to the set.
//!
//! Nodes are split along the line through two mutually distant points and
//! each node keeps a bounding ball, so pruning uses full Euclidean distances
//! rather than single coordinates. That keeps queries local on clustered
//! data in a few dozen dimensions, where axis-aligned cells stop pruning.
//!
//! Queries do not return a single winner. They return every point whose
//! squared distance is within `slack` of the minimum, so that the caller can
//! settle near-ties with its own distance function and tie-break rule.
//!
//! [`BallTree::all_nearest_candidates`] answers the query for every point at
//! once with a dual-tree traversal: a query node is compared against a
//! reference node as a whole, so a tight group of queries is certified
//! against far away groups in a single step instead of once per point.

use crate::par;

const LEAF_SIZE: usize = 16;
/// Query subtrees up to this many points form one independent task.
const TASK_SIZE: usize = 512;
/// Below this depth nodes split halfway between their two pivots, which keeps
/// well separated groups in separate subtrees. Deeper nodes split at the
/// median so the depth stays logarithmic on adversarial inputs.
const MIDPOINT_DEPTH: usize = 48;

struct Node {
    start: usize,
    end: usize,
    radius: f64,
    /// Child node ids; `None` for leaves.
    children: Option<(usize, usize)>,
}

pub struct BallTree {
    dim: usize,
    /// Point coordinates permuted into tree order.
    points: Vec<f64>,
    /// `index[pos]` is the caller's index of the point stored at `pos`.
    index: Vec<usize>,
    /// Position of each caller index inside `points`.
    position: Vec<usize>,
    nodes: Vec<Node>,
    centers: Vec<f64>,
}

impl BallTree {
    /// Builds a tree over `coords.len() / dim` points stored row-major.
    pub fn build(coords: &[f64], dim: usize) -> Self {
        assert!(dim > 0 && coords.len().is_multiple_of(dim));
        let len = coords.len() / dim;
        let mut builder = Builder {
            coords,
            dim,
            index: (0..len).collect(),
            nodes: Vec::with_capacity(2 * len / LEAF_SIZE + 1),
            centers: Vec::new(),
            proj: vec![0.0; len],
        };
        if len > 0 {
            builder.build(0, len, 0);
        }
        let Builder {
            index, nodes, centers, ..
        } = builder;
        let mut points = Vec::with_capacity(coords.len());
        let mut position = vec![0; len];
        for (pos, &i) in index.iter().enumerate() {
            points.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
            position[i] = pos;
        }
        BallTree {
            dim,
            points,
            index,
            position,
            nodes,
            centers,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn point(&self, pos: usize) -> &[f64] {
        &self.points[pos * self.dim..(pos + 1) * self.dim]
    }

    fn center(&self, node: usize) -> &[f64] {
        &self.centers[node * self.dim..(node + 1) * self.dim]
    }

    /// Distance from `q` to the ball surface of `node`, negative inside.
    fn gap(&self, node: usize, q: &[f64]) -> f64 {
        sq_dist(q, self.center(node)).sqrt() - self.nodes[node].radius
    }

    /// All points other than `query` whose squared Euclidean distance to it
    /// is at most `min + slack`, as `(squared distance, index)` pairs.
    pub fn nearest_candidates(&self, query: usize, slack: f64) -> Vec<(f64, usize)> {
        let q = self.point(self.position[query]);
        let mut search = Search {
            tree: self,
            q,
            skip: query,
            slack,
            best: f64::INFINITY,
            found: Vec::new(),
        };
        if !self.nodes.is_empty() {
            search.visit(0, 0.0);
        }
        let bound = search.best + slack;
        let mut found = search.found;
        found.retain(|&(d, _)| d <= bound);
        found
    }

    /// [`nearest_candidates`](Self::nearest_candidates) for every point,
    /// indexed by the caller's point index.
    pub fn all_nearest_candidates(&self, slack: f64) -> Vec<Vec<(f64, usize)>> {
        let mut tasks = Vec::new();
        if !self.nodes.is_empty() {
            self.collect_tasks(0, &mut tasks);
        }
        let parts = par::map_indices(tasks.len(), |t| {
            let mut search = DualSearch::new(self, tasks[t], slack);
            let gap = self.node_gap(tasks[t], 0);
            search.visit(tasks[t], 0, gap);
            search.finish()
        });
        let mut out = vec![Vec::new(); self.len()];
        for (i, found) in parts.into_iter().flatten() {
            out[i] = found;
        }
        out
    }

    fn collect_tasks(&self, node: usize, tasks: &mut Vec<usize>) {
        let n = &self.nodes[node];
        match n.children {
            Some((left, right)) if n.end - n.start > TASK_SIZE => {
                self.collect_tasks(left, tasks);
                self.collect_tasks(right, tasks);
            }
            _ => tasks.push(node),
        }
    }

    /// Lower bound on the distance between members of two nodes, negative
    /// when the balls overlap.
    fn node_gap(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return -1.0;
        }
        sq_dist(self.center(a), self.center(b)).sqrt() - self.nodes[a].radius - self.nodes[b].radius
    }

    /// Nodes are numbered in preorder, so a subtree is the id range from its
    /// root to its rightmost descendant.
    fn subtree_end(&self, mut node: usize) -> usize {
        while let Some((_, right)) = self.nodes[node].children {
            node = right;
        }
        node + 1
    }
}

struct Builder<'a> {
    coords: &'a [f64],
    dim: usize,
    index: Vec<usize>,
    nodes: Vec<Node>,
    centers: Vec<f64>,
    proj: Vec<f64>,
}

impl Builder<'_> {
    fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let dim = self.dim;
        let count = (end - start) as f64;
        let mut center = vec![0.0; dim];
        for &i in &self.index[start..end] {
            for (c, x) in center.iter_mut().zip(self.coord(i)) {
                *c += x;
            }
        }
        center.iter_mut().for_each(|c| *c /= count);

        let mut far_a = self.index[start];
        let mut far_d = -1.0;
        for &i in &self.index[start..end] {
            let d = sq_dist(self.coord(i), &center);
            if d > far_d {
                far_d = d;
                far_a = i;
            }
        }
        // Widened by a few ulps so the ball contains every member despite rounding.
        let radius = far_d.max(0.0).sqrt() * (1.0 + 1e-12);

        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            radius,
            children: None,
        });
        self.centers.extend_from_slice(&center);

        if end - start <= LEAF_SIZE || far_d <= 0.0 {
            return id;
        }

        // Split along the line through `far_a` and the member farthest from it.
        let a = self.coord(far_a).to_vec();
        let mut far_b = far_a;
        let mut best = -1.0;
        for &i in &self.index[start..end] {
            let d = sq_dist(self.coord(i), &a);
            if d > best {
                best = d;
                far_b = i;
            }
        }
        let dir: Vec<f64> = self.coord(far_b).iter().zip(&a).map(|(b, a)| b - a).collect();
        for &i in &self.index[start..end] {
            self.proj[i] = self.coord(i).iter().zip(&dir).map(|(x, d)| x * d).sum();
        }
        let proj = &self.proj;
        let slice = &mut self.index[start..end];
        let threshold = 0.5 * (proj[far_a] + proj[far_b]);
        let mut mid = 0;
        if depth < MIDPOINT_DEPTH {
            slice.sort_unstable_by_key(|&i| (proj[i] >= threshold, i));
            mid = slice.partition_point(|&i| proj[i] < threshold);
        }
        if mid == 0 || mid == slice.len() {
            mid = slice.len() / 2;
            slice.select_nth_unstable_by(mid, |x, y| proj[*x].total_cmp(&proj[*y]).then(x.cmp(y)));
        }

        let left = self.build(start, start + mid, depth + 1);
        let right = self.build(start + mid, end, depth + 1);
        self.nodes[id].children = Some((left, right));
        id
    }
}

struct Search<'a> {
    tree: &'a BallTree,
    q: &'a [f64],
    skip: usize,
    slack: f64,
    best: f64,
    found: Vec<(f64, usize)>,
}

impl Search<'_> {
    fn visit(&mut self, node: usize, bound: f64) {
        if bound > self.best + self.slack {
            return;
        }
        let Node {
            start, end, children, ..
        } = self.tree.nodes[node];
        match children {
            None => {
                for pos in start..end {
                    let idx = self.tree.index[pos];
                    if idx == self.skip {
                        continue;
                    }
                    let limit = self.best + self.slack;
                    if let Some(d) = sq_dist_bounded(self.q, self.tree.point(pos), limit) {
                        self.found.push((d, idx));
                        if d < self.best {
                            self.best = d;
                        }
                    }
                }
            }
            Some((left, right)) => {
                // The deeper-inside child is searched first; the squared
                // positive part of the gap bounds every member's distance.
                let lg = self.tree.gap(left, self.q);
                let rg = self.tree.gap(right, self.q);
                let bound = |g: f64| if g > 0.0 { g * g } else { 0.0 };
                if lg <= rg {
                    self.visit(left, bound(lg));
                    self.visit(right, bound(rg));
                } else {
                    self.visit(right, bound(rg));
                    self.visit(left, bound(lg));
                }
            }
        }
    }
}

/// All-points search restricted to the queries of one subtree.
struct DualSearch<'a> {
    tree: &'a BallTree,
    slack: f64,
    /// First node id and first point position of the query subtree.
    node_base: usize,
    pos_base: usize,
    /// Largest current best among the queries below each node.
    bound: Vec<f64>,
    best: Vec<f64>,
    found: Vec<Vec<(f64, usize)>>,
}

impl<'a> DualSearch<'a> {
    fn new(tree: &'a BallTree, root: usize, slack: f64) -> Self {
        let points = tree.nodes[root].end - tree.nodes[root].start;
        DualSearch {
            tree,
            slack,
            node_base: root,
            pos_base: tree.nodes[root].start,
            bound: vec![f64::INFINITY; tree.subtree_end(root) - root],
            best: vec![f64::INFINITY; points],
            found: vec![Vec::new(); points],
        }
    }

    fn visit(&mut self, q: usize, r: usize, gap: f64) {
        if gap > 0.0 && gap * gap > self.bound[q - self.node_base] + self.slack {
            return;
        }
        let tree = self.tree;
        let (qn, rn) = (&tree.nodes[q], &tree.nodes[r]);
        match (qn.children, rn.children) {
            (None, None) => self.base_case(q, r),
            (Some(qc), Some(_)) if qn.radius >= rn.radius => self.split_query(q, qc, r),
            (Some(qc), None) => self.split_query(q, qc, r),
            (_, Some((rl, rr))) => {
                let gl = tree.node_gap(q, rl);
                let gr = tree.node_gap(q, rr);
                if gl <= gr {
                    self.visit(q, rl, gl);
                    self.visit(q, rr, gr);
                } else {
                    self.visit(q, rr, gr);
                    self.visit(q, rl, gl);
                }
            }
        }
    }

    fn split_query(&mut self, q: usize, (ql, qr): (usize, usize), r: usize) {
        let tree = self.tree;
        self.visit(ql, r, tree.node_gap(ql, r));
        self.visit(qr, r, tree.node_gap(qr, r));
        let b = self.bound[ql - self.node_base].max(self.bound[qr - self.node_base]);
        self.bound[q - self.node_base] = b;
    }

    fn base_case(&mut self, q: usize, r: usize) {
        let tree = self.tree;
        let (qn, rn) = (&tree.nodes[q], &tree.nodes[r]);
        let mut bound: f64 = 0.0;
        for qp in qn.start..qn.end {
            let local = qp - self.pos_base;
            let point = tree.point(qp);
            let gap = sq_dist(point, tree.center(r)).sqrt() - rn.radius;
            if gap > 0.0 && gap * gap > self.best[local] + self.slack {
                bound = bound.max(self.best[local]);
                continue;
            }
            for rp in (rn.start..rn.end).filter(|&rp| rp != qp) {
                let limit = self.best[local] + self.slack;
                if let Some(d) = sq_dist_bounded(point, tree.point(rp), limit) {
                    self.found[local].push((d, tree.index[rp]));
                    if d < self.best[local] {
                        self.best[local] = d;
                    }
                }
            }
            bound = bound.max(self.best[local]);
        }
        self.bound[q - self.node_base] = bound;
    }

    fn finish(self) -> Vec<(usize, Vec<(f64, usize)>)> {
        let (tree, slack, pos_base) = (self.tree, self.slack, self.pos_base);
        self.found
            .into_iter()
            .zip(self.best)
            .enumerate()
            .map(|(local, (mut found, best))| {
                found.retain(|&(d, _)| d <= best + slack);
                (tree.index[pos_base + local], found)
            })
            .collect()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distance, or `None` once the partial sum exceeds `limit`.
#[inline]
fn sq_dist_bounded(a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (ca, cb) in a.chunks(8).zip(b.chunks(8)) {
        for (x, y) in ca.iter().zip(cb) {
            let d = x - y;
            acc += d * d;
        }
        if acc > limit {
            return None;
        }
    }
    Some(acc)
}
