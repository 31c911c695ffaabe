//! Undirected spatial network model.
//!
//! A [`Network`] is immutable once built. Neighbour lists are kept sorted so
//! that common-neighbour counts reduce to a linear merge of two short lists,
//! which is what every commonality query below relies on.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    /// Planar position in km.
    pub position: [f64; 2],
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length_km: f64,
    /// Single-edge capacity in bits per use. `None` means "derive from the
    /// length through the PLOB bound".
    pub capacity: Option<f64>,
}

impl Edge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }
}

/// Sorted multiset of adjacent commonalities of one node, one entry per
/// neighbour. Ordering is lexicographic on the sorted values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommonalityMultiset(Vec<u32>);

impl CommonalityMultiset {
    pub fn new(mut values: Vec<u32>) -> Self {
        values.sort_unstable();
        CommonalityMultiset(values)
    }

    /// `pattern` repeated `times` times, e.g. `{4,8,8,8}^4`.
    pub fn repeated(pattern: &[u32], times: usize) -> Self {
        let mut v = Vec::with_capacity(pattern.len() * times);
        for _ in 0..times {
            v.extend_from_slice(pattern);
        }
        Self::new(v)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bulk-cut objective `sum(k - lambda - 1)`; `None` when some element is
    /// not below `k`.
    pub fn bulk_cut_sum(&self, k: u32) -> Option<u32> {
        self.0
            .iter()
            .try_fold(0u32, |acc, &l| (l < k).then(|| acc + (k - l - 1)))
    }
}

impl fmt::Display for CommonalityMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserPair {
    pub a: NodeId,
    pub b: NodeId,
}

impl UserPair {
    pub fn new(a: NodeId, b: NodeId) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "user pair needs two distinct nodes, got {a} twice"
            )));
        }
        Ok(UserPair { a, b })
    }

    pub fn both(&self) -> [NodeId; 2] {
        [self.a, self.b]
    }
}

/// Which nodes feed a commonality superset.
#[derive(Debug, Clone, Default)]
pub enum NodeSelection {
    #[default]
    Internal,
    All,
    Subset(Vec<NodeId>),
}

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    neighbours: Vec<Vec<NodeId>>,
    // incident[x][i] is the edge joining x and neighbours[x][i]
    incident: Vec<Vec<usize>>,
}

impl Network {
    /// Validates and indexes a node/edge list. Node ids must be `0..n` in
    /// order.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id.0 != i {
                return Err(Error::Malformed(format!(
                    "node ids must be contiguous from 0; position {i} holds id {}",
                    n.id
                )));
            }
            if !n.position.iter().all(|c| c.is_finite()) {
                return Err(Error::Malformed(format!("node {i} has a non-finite position")));
            }
        }
        let n = nodes.len();
        let mut adj: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            if e.u.0 >= n || e.v.0 >= n {
                return Err(Error::Malformed(format!(
                    "edge {ei} references a missing node ({}, {})",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::Malformed(format!("edge {ei} is a self-loop on {}", e.u)));
            }
            if !(e.length_km.is_finite() && e.length_km > 0.0) {
                return Err(Error::Malformed(format!(
                    "edge {ei} has non-positive length {}",
                    e.length_km
                )));
            }
            if let Some(c) = e.capacity {
                if !(c >= 0.0) {
                    return Err(Error::Malformed(format!("edge {ei} has capacity {c}")));
                }
            }
            adj[e.u.0].push((e.v, ei));
            adj[e.v.0].push((e.u, ei));
        }
        let mut neighbours = Vec::with_capacity(n);
        let mut incident = Vec::with_capacity(n);
        for (x, mut list) in adj.into_iter().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::Malformed(format!(
                    "duplicate edge between {x} and {}",
                    w[0].0
                )));
            }
            neighbours.push(list.iter().map(|p| p.0).collect());
            incident.push(list.iter().map(|p| p.1).collect());
        }
        Ok(Network {
            nodes,
            edges,
            neighbours,
            incident,
        })
    }

    /// Abstract topology on `n` nodes. Positions come from a deterministic
    /// circular layout of radius 1 km and lengths follow from them.
    pub fn from_topology(n: usize, pairs: &[(usize, usize)], capacities: Option<&[f64]>) -> Result<Self> {
        if let Some(c) = capacities {
            if c.len() != pairs.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} capacities for {} edges",
                    c.len(),
                    pairs.len()
                )));
            }
        }
        let nodes: Vec<Node> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n.max(1) as f64;
                Node {
                    id: NodeId(i),
                    position: [t.cos(), t.sin()],
                    boundary: false,
                }
            })
            .collect();
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| {
                let length_km = if u < n && v < n {
                    distance(nodes[u].position, nodes[v].position)
                } else {
                    1.0
                };
                Edge {
                    u: NodeId(u),
                    v: NodeId(v),
                    length_km,
                    capacity: capacities.map(|c| c[i]),
                }
            })
            .collect();
        Network::from_parts(nodes, edges)
    }

    pub fn into_parts(self) -> (Vec<Node>, Vec<Edge>) {
        (self.nodes, self.edges)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, x: NodeId) -> Result<&Node> {
        self.nodes.get(x.0).ok_or(Error::UnknownNode(x))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| !n.boundary).map(|n| n.id)
    }

    fn check(&self, x: NodeId) -> Result<()> {
        if x.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(x))
        }
    }

    /// `N_x`, sorted ascending.
    pub fn neighborhood(&self, x: NodeId) -> Result<&[NodeId]> {
        self.check(x)?;
        Ok(&self.neighbours[x.0])
    }

    /// Indices into [`Network::edges`] of the edges incident to `x`, aligned
    /// with [`Network::neighborhood`].
    pub fn edge_neighborhood(&self, x: NodeId) -> Result<&[usize]> {
        self.check(x)?;
        Ok(&self.incident[x.0])
    }

    pub fn degree(&self, x: NodeId) -> Result<usize> {
        Ok(self.neighborhood(x)?.len())
    }

    pub fn edge_between(&self, x: NodeId, y: NodeId) -> Option<usize> {
        let list = self.neighbours.get(x.0)?;
        list.binary_search(&y).ok().map(|i| self.incident[x.0][i])
    }

    pub fn are_adjacent(&self, x: NodeId, y: NodeId) -> bool {
        self.edge_between(x, y).is_some()
    }

    fn common_count(&self, x: NodeId, y: NodeId) -> usize {
        let (a, b) = (&self.neighbours[x.0], &self.neighbours[y.0]);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Number of common neighbours of two adjacent nodes.
    pub fn adjacent_commonality(&self, x: NodeId, y: NodeId) -> Result<u32> {
        self.check(x)?;
        self.check(y)?;
        if !self.are_adjacent(x, y) {
            return Err(Error::NotAdjacent(x, y));
        }
        Ok(self.common_count(x, y) as u32)
    }

    /// Number of common neighbours of two distinct, non-adjacent nodes.
    pub fn nonadjacent_commonality(&self, x: NodeId, y: NodeId) -> Result<u32> {
        self.check(x)?;
        self.check(y)?;
        if x == y {
            return Err(Error::InvalidArgument(format!("node {x} paired with itself")));
        }
        if self.are_adjacent(x, y) {
            return Err(Error::Adjacent(x, y));
        }
        Ok(self.common_count(x, y) as u32)
    }

    pub fn commonality_multiset(&self, x: NodeId) -> Result<CommonalityMultiset> {
        let values = self
            .neighborhood(x)?
            .iter()
            .map(|&y| self.common_count(x, y) as u32)
            .collect();
        Ok(CommonalityMultiset::new(values))
    }

    /// The distinct commonality multisets over a node selection (internal
    /// nodes by default).
    pub fn commonality_superset(&self, selection: &NodeSelection) -> Result<BTreeSet<CommonalityMultiset>> {
        let ids: Vec<NodeId> = match selection {
            NodeSelection::Internal => self.internal_nodes().collect(),
            NodeSelection::All => self.node_ids().collect(),
            NodeSelection::Subset(s) => s.clone(),
        };
        if ids.is_empty() {
            return Err(Error::InvalidArgument("empty node selection".into()));
        }
        ids.into_iter().map(|x| self.commonality_multiset(x)).collect()
    }

    /// Replace boundary flags, keeping everything else.
    pub fn with_boundary_flags(mut self, boundary: &[bool]) -> Result<Self> {
        if boundary.len() != self.nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} flags for {} nodes",
                boundary.len(),
                self.nodes.len()
            )));
        }
        for (n, &b) in self.nodes.iter_mut().zip(boundary) {
            n.boundary = b;
        }
        Ok(self)
    }

    /// Copy with every edge capacity replaced.
    pub fn with_capacities(&self, capacities: &[f64]) -> Result<Self> {
        if capacities.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} capacities for {} edges",
                capacities.len(),
                self.edges.len()
            )));
        }
        let mut out = self.clone();
        for (e, &c) in out.edges.iter_mut().zip(capacities) {
            e.capacity = Some(c);
        }
        Ok(out)
    }

    /// Copy with every edge length replaced; capacities are reset to `None`
    /// so that they follow the new lengths.
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} lengths for {} edges",
                lengths.len(),
                self.edges.len()
            )));
        }
        let (nodes, mut edges) = self.clone().into_parts();
        for (e, &l) in edges.iter_mut().zip(lengths) {
            e.length_km = l;
            e.capacity = None;
        }
        Network::from_parts(nodes, edges)
    }

    /// Subgraph induced by `keep`, renumbered in the order given.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(keep.len());
        for (i, &x) in keep.iter().enumerate() {
            let n = self.node(x)?;
            if map[x.0] != usize::MAX {
                return Err(Error::InvalidArgument(format!("node {x} listed twice")));
            }
            map[x.0] = i;
            nodes.push(Node {
                id: NodeId(i),
                ..n.clone()
            });
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.u.0] != usize::MAX && map[e.v.0] != usize::MAX)
            .map(|e| Edge {
                u: NodeId(map[e.u.0]),
                v: NodeId(map[e.v.0]),
                ..e.clone()
            })
            .collect();
        Network::from_parts(nodes, edges)
    }

    /// Hop distance from `x` to every node (`usize::MAX` when unreachable).
    pub fn hop_distances(&self, x: NodeId) -> Result<Vec<usize>> {
        self.check(x)?;
        let mut dist = vec![usize::MAX; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[x.0] = 0;
        queue.push_back(x);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbours[u.0] {
                if dist[v.0] == usize::MAX {
                    dist[v.0] = dist[u.0] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }
}

pub fn distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// The commonality multiset minimising the bulk-cut objective
/// `sum(k - lambda - 1)`. Ties go to the lexicographically smaller multiset.
pub fn min_commonality_multiset(
    superset: &BTreeSet<CommonalityMultiset>,
    k: u32,
) -> Result<CommonalityMultiset> {
    let mut best: Option<(u32, &CommonalityMultiset)> = None;
    for m in superset {
        if m.len() != k as usize {
            return Err(Error::InvalidArgument(format!(
                "multiset {m} has {} elements, expected k = {k}",
                m.len()
            )));
        }
        let sum = m
            .bulk_cut_sum(k)
            .ok_or_else(|| Error::InvalidArgument(format!("multiset {m} has an element >= k = {k}")))?;
        // BTreeSet iterates in ascending order, so strict < keeps the
        // lexicographically smallest among ties.
        if best.is_none_or(|(s, _)| sum < s) {
            best = Some((sum, m));
        }
    }
    best.map(|(_, m)| m.clone())
        .ok_or_else(|| Error::InvalidArgument("empty commonality superset".into()))
}

/// Minimum bulk-cut cardinality `sum(k - lambda - 1)` over `lambda_star`.
pub fn delta(k: u32, lambda_star: &CommonalityMultiset) -> Result<u32> {
    if lambda_star.len() != k as usize {
        return Err(Error::InvalidArgument(format!(
            "lambda* has {} elements, expected k = {k}",
            lambda_star.len()
        )));
    }
    lambda_star
        .bulk_cut_sum(k)
        .ok_or_else(|| Error::InvalidArgument(format!("lambda* {lambda_star} has an element >= k = {k}")))
}

/// Worst-case performance factor `2(k-1)/delta`, exact.
pub fn omega(k: u32, delta: u32) -> Result<Ratio<u64>> {
    if delta == 0 {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    Ok(Ratio::new(2 * (k as u64 - 1), delta as u64))
}

// ---------------------------------------------------------------------------
// Graph JSON schema

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub length_km: f64,
    #[serde(default)]
    pub capacity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl From<&Network> for GraphFile {
    fn from(net: &Network) -> Self {
        GraphFile {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    x: n.position[0],
                    y: n.position[1],
                    boundary: n.boundary,
                })
                .collect(),
            edges: net
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u.0,
                    v: e.v.0,
                    length_km: e.length_km,
                    capacity: e.capacity,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphFile> for Network {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let mut records = file.nodes;
        records.sort_by_key(|n| n.id);
        let nodes = records
            .into_iter()
            .map(|r| Node {
                id: NodeId(r.id),
                position: [r.x, r.y],
                boundary: r.boundary,
            })
            .collect();
        let edges = file
            .edges
            .into_iter()
            .map(|r| Edge {
                u: NodeId(r.u),
                v: NodeId(r.v),
                length_km: r.length_km,
                capacity: r.capacity,
            })
            .collect();
        Network::from_parts(nodes, edges)
    }
}

impl Network {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph records always serialize")
    }

    /// Parse the graph JSON schema. Syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Network::try_from(file)
    }
}
