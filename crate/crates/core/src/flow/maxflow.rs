//! Dinic's blocking-flow algorithm on real-valued capacities.
//!
//! Each undirected edge becomes a pair of arcs that are each other's
//! reverse, both starting at the full capacity. Pushing `f` along one arc
//! frees `f` on the other, so the pair behaves as a single shared capacity.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<f64>,
    original: Vec<f64>,
    // below this a residual is treated as exhausted
    eps: f64,
}

/// Absolute floor for capacity comparisons.
pub const ABS_TOL: f64 = 1e-15;
/// Relative tolerance for capacity comparisons.
pub const REL_TOL: f64 = 1e-9;

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        FlowGraph {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            residual: Vec::new(),
            original: Vec::new(),
            eps: ABS_TOL,
        }
    }

    pub fn node_count(&self) -> usize {
        self.head.len()
    }

    /// Add an undirected edge; returns the index of its forward arc.
    pub fn add_undirected(&mut self, u: usize, v: usize, cap: f64) -> usize {
        let a = self.to.len();
        self.to.push(v);
        self.residual.push(cap);
        self.original.push(cap);
        self.head[u].push(a);
        self.to.push(u);
        self.residual.push(cap);
        self.original.push(cap);
        self.head[v].push(a + 1);
        // scale the exhaustion threshold with the largest finite capacity
        if cap.is_finite() {
            self.eps = self.eps.max(cap * 1e-14);
        }
        a
    }

    /// Net flow carried by an undirected edge from its first to its second
    /// endpoint.
    pub fn edge_flow(&self, arc: usize) -> f64 {
        (self.original[arc] - self.residual[arc] - (self.original[arc + 1] - self.residual[arc + 1])) / 2.0
    }

    fn levels(&self, s: usize, t: usize, level: &mut [usize]) -> bool {
        level.fill(usize::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if level[v] == usize::MAX && self.residual[a] > self.eps {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level[t] != usize::MAX
    }

    // Iterative DFS for one augmenting path in the level graph.
    fn augment(&mut self, s: usize, t: usize, level: &[usize], next: &mut [usize]) -> f64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let f = path.iter().map(|&a| self.residual[a]).fold(f64::INFINITY, f64::min);
                for &a in &path {
                    self.residual[a] -= f;
                    self.residual[a ^ 1] += f;
                }
                return f;
            }
            let mut advanced = false;
            while next[u] < self.head[u].len() {
                let a = self.head[u][next[u]];
                let v = self.to[a];
                if self.residual[a] > self.eps && level[v] == level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                match path.pop() {
                    Some(a) => {
                        u = self.to[a ^ 1];
                        next[u] += 1;
                    }
                    None => return 0.0,
                }
            }
        }
    }

    /// Maximum `s`-`t` flow. Leaves the residual state in place for
    /// [`FlowGraph::source_side`].
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        if s == t {
            return f64::INFINITY;
        }
        let n = self.node_count();
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        let mut total = 0.0;
        while self.levels(s, t, &mut level) {
            next.fill(0);
            loop {
                let f = self.augment(s, t, &level, &mut next);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual graph.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if !seen[v] && self.residual[a] > self.eps {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// `a` and `b` agree to relative [`REL_TOL`] with absolute floor [`ABS_TOL`].
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= ABS_TOL.max(REL_TOL * a.abs().max(b.abs()))
}

/// `a <= b` up to the same tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b || approx_eq(a, b)
}
