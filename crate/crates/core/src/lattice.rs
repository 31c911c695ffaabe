//! Generators for the four weakly-regular lattice families.
//!
//! Every generator works on integer lattice coordinates first and only maps
//! to km at the end, so node ids, edge order and lengths are reproducible
//! bit for bit. Node ids follow the sorted integer coordinates.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, CapacitySource, FlowProblem};
use crate::netgraph::{self, CommonalityMultiset, Edge, Network, Node, NodeId, UserPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeFamily {
    Honeycomb,
    Hexagonal,
    Manhattan8,
    Manhattan16,
}

impl LatticeFamily {
    pub const ALL: [LatticeFamily; 4] = [
        LatticeFamily::Honeycomb,
        LatticeFamily::Hexagonal,
        LatticeFamily::Manhattan8,
        LatticeFamily::Manhattan16,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeFamily::Honeycomb => "honeycomb",
            LatticeFamily::Hexagonal => "hexagonal",
            LatticeFamily::Manhattan8 => "manhattan8",
            LatticeFamily::Manhattan16 => "manhattan16",
        }
    }

    pub fn k(self) -> u32 {
        match self {
            LatticeFamily::Honeycomb => 3,
            LatticeFamily::Hexagonal => 6,
            LatticeFamily::Manhattan8 => 8,
            LatticeFamily::Manhattan16 => 16,
        }
    }

    /// Commonality multisets an internal node may carry.
    pub fn permitted_multisets(self) -> Vec<CommonalityMultiset> {
        use CommonalityMultiset as M;
        match self {
            LatticeFamily::Honeycomb => vec![M::repeated(&[0], 3)],
            LatticeFamily::Hexagonal => vec![M::repeated(&[2], 6)],
            LatticeFamily::Manhattan8 => vec![M::repeated(&[2, 4], 4)],
            // corner, quarter-point, mid-side and cell-centre nodes
            LatticeFamily::Manhattan16 => vec![
                M::new([vec![3; 8], vec![4; 4], vec![7; 4]].concat()),
                M::new([vec![3, 3], vec![5; 6], vec![6; 4], vec![7, 7, 8, 8]].concat()),
                M::new([vec![5; 12], vec![7, 7, 8, 8]].concat()),
                M::repeated(&[4, 8, 8, 8], 4),
            ],
        }
    }

    pub fn characteristics(self) -> WrnCharacteristics {
        let k = self.k();
        let lambda_superset = self.permitted_multisets();
        let set: BTreeSet<_> = lambda_superset.iter().cloned().collect();
        let lambda_star = netgraph::min_commonality_multiset(&set, k).expect("family table is consistent");
        let delta = netgraph::delta(k, &lambda_star).expect("family table is consistent");
        let omega = netgraph::omega(k, delta).expect("delta is positive");
        let (xi, n_min) = match self {
            LatticeFamily::Honeycomb => (4.0 / (3.0 * 3f64.sqrt()), 54),
            LatticeFamily::Hexagonal => (2.0 / 3f64.sqrt(), 89),
            LatticeFamily::Manhattan8 => (2.0, 110),
            LatticeFamily::Manhattan16 => (6.0, 197),
        };
        WrnCharacteristics {
            k,
            lambda_star,
            delta,
            omega,
            xi,
            n_min,
            lambda_superset,
        }
    }
}

impl fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "honeycomb" | "hc" | "k3" => Ok(LatticeFamily::Honeycomb),
            "hexagonal" | "hex" | "k6" => Ok(LatticeFamily::Hexagonal),
            "manhattan8" | "mh8" | "k8" => Ok(LatticeFamily::Manhattan8),
            "manhattan16" | "mh16" | "k16" => Ok(LatticeFamily::Manhattan16),
            _ => Err(Error::InvalidArgument(format!("unknown lattice family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrnCharacteristics {
    pub k: u32,
    pub lambda_star: CommonalityMultiset,
    pub delta: u32,
    pub omega: Ratio<u64>,
    pub xi: f64,
    pub n_min: usize,
    /// Every commonality multiset allowed on an internal node.
    pub lambda_superset: Vec<CommonalityMultiset>,
}

impl WrnCharacteristics {
    pub fn omega_f64(&self) -> f64 {
        *self.omega.numer() as f64 / *self.omega.denom() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub family: LatticeFamily,
    pub rings: usize,
    /// Length of the longest edge class, km.
    pub edge_scale: f64,
}

impl LatticeSpec {
    pub fn new(family: LatticeFamily, rings: usize, edge_scale: f64) -> Result<Self> {
        let spec = LatticeSpec {
            family,
            rings,
            edge_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.rings < 1 {
            return Err(Error::InvalidArgument("rings must be at least 1".into()));
        }
        if !(self.edge_scale.is_finite() && self.edge_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge scale must be positive, got {}",
                self.edge_scale
            )));
        }
        Ok(())
    }
}

pub fn node_count(family: LatticeFamily, r: usize) -> Result<usize> {
    if r < 1 {
        return Err(Error::InvalidArgument("rings must be at least 1".into()));
    }
    Ok(match family {
        LatticeFamily::Honeycomb => 6 * r * r,
        LatticeFamily::Hexagonal => 1 + 3 * r * (3 * r - 1),
        LatticeFamily::Manhattan8 => (r + 1) * (r + 1),
        LatticeFamily::Manhattan16 => (7 * r + 1) * (r + 1) + r * r,
    })
}

/// Area assigned to a build for density purposes, km².
pub fn lattice_area(family: LatticeFamily, r: usize, edge_scale: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::InvalidArgument("rings must be at least 1".into()));
    }
    let (r, d2) = (r as f64, edge_scale * edge_scale);
    Ok(match family {
        LatticeFamily::Honeycomb | LatticeFamily::Hexagonal => 1.5 * 3f64.sqrt() * (1.0 + 3.0 * r * (r + 1.0)) * d2,
        LatticeFamily::Manhattan8 => 0.5 * r * r * d2,
        LatticeFamily::Manhattan16 => 4.0 / 3.0 * r * r * d2,
    })
}

/// Nodes per km² of a build, using [`lattice_area`].
pub fn lattice_density(spec: &LatticeSpec) -> Result<f64> {
    spec.validate()?;
    Ok(node_count(spec.family, spec.rings)? as f64 / lattice_area(spec.family, spec.rings, spec.edge_scale)?)
}

/// Integer coordinates plus a length per edge, before mapping to km.
struct Sketch {
    positions: Vec<[f64; 2]>,
    edges: Vec<(usize, usize, f64)>,
}

impl Sketch {
    fn into_network(self) -> Result<Network> {
        let nodes = self
            .positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| Node {
                id: NodeId(i),
                position,
                boundary: false,
            })
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|(u, v, length_km)| Edge {
                u: NodeId(u),
                v: NodeId(v),
                length_km,
                capacity: None,
            })
            .collect();
        Network::from_parts(nodes, edges)
    }
}

/// Index lookup over sorted integer points.
fn index_of(points: &[(i64, i64)]) -> std::collections::HashMap<(i64, i64), usize> {
    points.iter().enumerate().map(|(i, &p)| (p, i)).collect()
}

// Triangular lattice in axial coordinates (i, j) -> (i + j/2, j sqrt3/2).
const TRI_STEPS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

fn triangular(r: usize, d: f64, with_centres: bool) -> Sketch {
    let rr = r as i64 - 1;
    let mut set = BTreeSet::new();
    for p in -rr..=rr {
        for q in -rr..=rr {
            if (p.abs() + q.abs() + (p + q).abs()) / 2 > rr {
                continue;
            }
            // hexagon centres sit on the index-3 sublattice spanned by (1,1), (-1,2)
            let c = (p - q, p + 2 * q);
            for (di, dj) in TRI_STEPS {
                set.insert((c.1 + dj, c.0 + di));
            }
            if with_centres {
                set.insert((c.1, c.0));
            }
        }
    }
    // sorted by (j, i)
    let points: Vec<(i64, i64)> = set.into_iter().collect();
    let index = index_of(&points);
    let h = 3f64.sqrt() / 2.0;
    let positions = points
        .iter()
        .map(|&(j, i)| [(i as f64 + j as f64 / 2.0) * d, j as f64 * h * d])
        .collect();
    let mut edges = Vec::new();
    for (u, &(j, i)) in points.iter().enumerate() {
        for (di, dj) in [(1, 0), (0, 1), (-1, 1)] {
            if let Some(&v) = index.get(&(j + dj, i + di)) {
                edges.push((u, v, d));
            }
        }
    }
    Sketch { positions, edges }
}

fn king(r: usize, d: f64) -> Sketch {
    let n = r as i64 + 1;
    let s = d / 2f64.sqrt();
    let half = r as f64 / 2.0;
    let mut positions = Vec::new();
    for j in 0..n {
        for i in 0..n {
            positions.push([(i as f64 - half) * s, (j as f64 - half) * s]);
        }
    }
    let id = |i: i64, j: i64| (j * n + i) as usize;
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            for (di, dj, len) in [(1, 0, s), (0, 1, s), (1, 1, d), (-1, 1, d)] {
                let (a, b) = (i + di, j + dj);
                if (0..n).contains(&a) && (0..n).contains(&b) {
                    edges.push((id(i, j), id(a, b), len));
                }
            }
        }
    }
    Sketch { positions, edges }
}

// Manhattan16 works in units of a quarter cell side. A point is a node when
// it lies on a cell edge or at a cell centre; edges are the orbits below
// under the cell's square symmetry combined with translation by whole cells.
const M16_PERIOD: i64 = 4;
const M16_ORBITS: [((i64, i64), (i64, i64)); 13] = [
    ((0, 0), (-1, 0)),
    ((0, 1), (0, 2)),
    ((0, 1), (-1, 0)),
    ((0, 1), (0, -1)),
    ((0, 1), (0, 3)),
    ((0, 2), (-2, 2)),
    ((0, 1), (-2, 2)),
    ((0, 0), (-2, -2)),
    ((0, 2), (-2, 0)),
    ((0, 1), (-2, 4)),
    ((0, 1), (-4, 1)),
    ((0, 0), (-4, -1)),
    ((0, 1), (-4, 2)),
];
// squared length of the longest orbit, in units
const M16_LONGEST2: i64 = 17;

fn m16_is_node(x: i64, y: i64) -> bool {
    let (a, b) = (x.rem_euclid(M16_PERIOD), y.rem_euclid(M16_PERIOD));
    a == 0 || b == 0 || (a == 2 && b == 2)
}

fn m16_symmetry(p: (i64, i64), rot: u8, flip: bool) -> (i64, i64) {
    let (mut x, mut y) = if flip { (p.1, p.0) } else { p };
    for _ in 0..rot {
        (x, y) = (-y, x);
    }
    (x, y)
}

fn m16_canonical(u: (i64, i64), v: (i64, i64)) -> ((i64, i64), (i64, i64)) {
    let mut best = None;
    for rot in 0..4 {
        for flip in [false, true] {
            let a = m16_symmetry(u, rot, flip);
            let b = m16_symmetry(v, rot, flip);
            for (p, q) in [(a, b), (b, a)] {
                let tx = p.0.div_euclid(M16_PERIOD) * M16_PERIOD;
                let ty = p.1.div_euclid(M16_PERIOD) * M16_PERIOD;
                let key = ((p.0 - tx, p.1 - ty), (q.0 - tx, q.1 - ty));
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
    }
    best.expect("symmetry group is non-empty")
}

fn manhattan16(r: usize, d: f64) -> Sketch {
    let side = M16_PERIOD * r as i64;
    let unit = d / (M16_LONGEST2 as f64).sqrt();
    let mut points = Vec::new();
    for y in 0..=side {
        for x in 0..=side {
            if m16_is_node(x, y) {
                points.push((y, x));
            }
        }
    }
    let index = index_of(&points);
    let orbits: HashSet<_> = M16_ORBITS.iter().copied().collect();
    let half = side as f64 / 2.0;
    let positions = points
        .iter()
        .map(|&(y, x)| [(x as f64 - half) * unit, (y as f64 - half) * unit])
        .collect();
    let mut edges = Vec::new();
    let reach = (M16_LONGEST2 as f64).sqrt() as i64;
    for (ui, &(y, x)) in points.iter().enumerate() {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let l2 = dx * dx + dy * dy;
                if l2 == 0 || l2 > M16_LONGEST2 {
                    continue;
                }
                let Some(&vi) = index.get(&(y + dy, x + dx)) else {
                    continue;
                };
                if vi <= ui {
                    continue;
                }
                if orbits.contains(&m16_canonical((x, y), (x + dx, y + dy))) {
                    edges.push((ui, vi, (l2 as f64).sqrt() * unit));
                }
            }
        }
    }
    Sketch { positions, edges }
}

/// Build a lattice with its boundary classified.
pub fn build(spec: &LatticeSpec) -> Result<Network> {
    spec.validate()?;
    let (r, d) = (spec.rings, spec.edge_scale);
    let sketch = match spec.family {
        LatticeFamily::Honeycomb => triangular(r, d, false),
        LatticeFamily::Hexagonal => triangular(r, d, true),
        LatticeFamily::Manhattan8 => king(r, d),
        LatticeFamily::Manhattan16 => manhattan16(r, d),
    };
    classify_boundary(sketch.into_network()?, spec.family)
}

/// Flag every node whose degree or commonality multiset is not one the
/// family allows on an internal node.
pub fn classify_boundary(net: Network, family: LatticeFamily) -> Result<Network> {
    let k = family.k() as usize;
    let permitted: HashSet<_> = family.permitted_multisets().into_iter().collect();
    let flags = net
        .node_ids()
        .map(|x| {
            let deg = net.degree(x)?;
            Ok(deg != k || !permitted.contains(&net.commonality_multiset(x)?))
        })
        .collect::<Result<Vec<bool>>>()?;
    net.with_boundary_flags(&flags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub internal_nodes: usize,
    pub degree_violations: Vec<NodeId>,
    pub commonality_violations: Vec<NodeId>,
    pub warnings: Vec<String>,
}

/// Check that internal nodes have degree `k` and a permitted multiset.
pub fn validate_wrn(net: &Network, chars: &WrnCharacteristics) -> ValidationReport {
    let permitted: HashSet<_> = chars.lambda_superset.iter().collect();
    let mut report = ValidationReport {
        passed: true,
        internal_nodes: 0,
        degree_violations: Vec::new(),
        commonality_violations: Vec::new(),
        warnings: Vec::new(),
    };
    for x in net.internal_nodes() {
        report.internal_nodes += 1;
        let neighbours = net.neighborhood(x).expect("id comes from the network");
        if neighbours.len() != chars.k as usize {
            report.degree_violations.push(x);
            continue;
        }
        let m = net.commonality_multiset(x).expect("id comes from the network");
        if !permitted.contains(&m) {
            report.commonality_violations.push(x);
        }
    }
    if report.internal_nodes == 0 {
        report.warnings.push("no internal nodes; nothing to validate".into());
    }
    report.passed = report.degree_violations.is_empty() && report.commonality_violations.is_empty();
    report
}

/// Hop distance from each node to the nearest boundary node.
pub fn boundary_depth(net: &Network) -> Vec<usize> {
    let mut depth = vec![usize::MAX; net.node_count()];
    let mut queue = VecDeque::new();
    for n in net.nodes().iter().filter(|n| n.boundary) {
        depth[n.id.0] = 0;
        queue.push_back(n.id);
    }
    while let Some(u) = queue.pop_front() {
        for &v in net.neighborhood(u).expect("id comes from the network") {
            if depth[v.0] == usize::MAX {
                depth[v.0] = depth[u.0] + 1;
                queue.push_back(v);
            }
        }
    }
    depth
}

// Candidates are tried in order; a lattice that fails this many of its
// deepest pairs is treated as too small.
const DEEP_PAIR_ATTEMPTS: usize = 64;

/// Pick two internal nodes that share no edge or neighbour and whose
/// unit-capacity cuts are not shortened by the boundary: Menger cardinality
/// `k` and smallest bulk cut at least `delta`.
pub fn select_deep_users(net: &Network, family: LatticeFamily) -> Result<UserPair> {
    let chars = family.characteristics();
    let too_small = Error::NoDeepPair {
        n_min: chars.n_min,
        nodes: net.node_count(),
    };
    if net.node_count() < chars.n_min {
        return Err(too_small);
    }
    let depth = boundary_depth(net);
    let internal: Vec<NodeId> = net.internal_nodes().collect();
    let mut candidates = Vec::new();
    for (i, &a) in internal.iter().enumerate() {
        let hops = net.hop_distances(a)?;
        for &b in &internal[i + 1..] {
            // three hops or more means no shared edge and no shared neighbour
            if hops[b.0] < 3 || hops[b.0] == usize::MAX {
                continue;
            }
            let shallow = depth[a.0].min(depth[b.0]);
            candidates.push((std::cmp::Reverse(shallow), hops[b.0], a, b));
        }
    }
    candidates.sort_unstable();
    for &(_, _, a, b) in candidates.iter().take(DEEP_PAIR_ATTEMPTS) {
        let users = UserPair::new(a, b)?;
        if flow::menger_cardinality(net, users)? != chars.k as usize {
            continue;
        }
        let prob = FlowProblem::new(net, users, CapacitySource::Unit)?;
        let bulk = flow::bulk_min_cut(&prob)?;
        if bulk.cut_set.len() >= chars.delta as usize {
            return Ok(users);
        }
    }
    Err(too_small)
}

/// Smallest ring count at which [`select_deep_users`] succeeds, searching up
/// to `max_rings`.
pub fn min_deep_rings(family: LatticeFamily, max_rings: usize) -> Option<usize> {
    (1..=max_rings).find(|&r| {
        node_count(family, r).is_ok_and(|n| n >= family.characteristics().n_min)
            && LatticeSpec::new(family, r, 1.0)
                .and_then(|s| build(&s))
                .and_then(|net| select_deep_users(&net, family))
                .is_ok()
    })
}
