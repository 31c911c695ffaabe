//! Exact flooding capacity between two users, plus the cut-theoretic
//! checks of the threshold results.

pub mod maxflow;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::capacity::{self, FibreParams};
use crate::error::{Error, Result};
use crate::lattice::WrnCharacteristics;
use crate::netgraph::{Network, NodeId, UserPair};

pub use maxflow::{approx_eq, approx_le, FlowGraph, ABS_TOL, REL_TOL};
pub use verify::{verify_threshold_theorem, LengthModel, VerificationReport, VerifyMode, VerifySettings};

/// Where edge capacities come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacitySource {
    /// Every edge carries 1.
    Unit,
    /// Capacities stored on the edges; a missing one is an error.
    Explicit,
    /// Stored capacity if present, otherwise the PLOB bound of the length.
    Plob(FibreParams),
}

#[derive(Debug, Clone)]
pub struct FlowProblem<'a> {
    pub net: &'a Network,
    pub users: UserPair,
    pub capacity_source: CapacitySource,
}

impl<'a> FlowProblem<'a> {
    pub fn new(net: &'a Network, users: UserPair, capacity_source: CapacitySource) -> Result<Self> {
        net.node(users.a)?;
        net.node(users.b)?;
        Ok(FlowProblem {
            net,
            users,
            capacity_source,
        })
    }

    /// One capacity per edge, in edge order.
    pub fn capacities(&self) -> Result<Vec<f64>> {
        self.net
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| match self.capacity_source {
                CapacitySource::Unit => Ok(1.0),
                CapacitySource::Explicit => e.capacity.ok_or(Error::MissingCapacity(i)),
                CapacitySource::Plob(p) => match e.capacity {
                    Some(c) => Ok(c),
                    None => capacity::plob_capacity(e.length_km, &p),
                },
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    /// Sum of capacities over the cut-set.
    pub value: f64,
    /// Indices into the network's edge list.
    pub cut_set: Vec<usize>,
    pub source_side: Vec<NodeId>,
    pub sink_side: Vec<NodeId>,
}

impl CutResult {
    fn from_partition(net: &Network, caps: &[f64], side: &[bool]) -> Self {
        let cut_set: Vec<usize> = net
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| side[e.u.0] != side[e.v.0])
            .map(|(i, _)| i)
            .collect();
        let value = cut_set.iter().map(|&i| caps[i]).sum();
        let (source_side, sink_side) = net.node_ids().partition(|x| side[x.0]);
        CutResult {
            value,
            cut_set,
            source_side,
            sink_side,
        }
    }
}

fn solve(net: &Network, caps: &[f64], users: UserPair) -> (f64, CutResult) {
    let mut g = FlowGraph::new(net.node_count());
    for (e, &c) in net.edges().iter().zip(caps) {
        g.add_undirected(e.u.0, e.v.0, c);
    }
    let flow = g.max_flow(users.a.0, users.b.0);
    let side = g.source_side(users.a.0);
    let cut = CutResult::from_partition(net, caps, &side);
    debug_assert!(
        approx_eq(flow, cut.value),
        "max-flow {flow} and min-cut {} disagree",
        cut.value
    );
    (flow, cut)
}

/// Minimum multi-edge cut between the users, via max-flow. The reported cut
/// is the set of nodes reachable from `a` in the final residual graph.
pub fn flooding_capacity(prob: &FlowProblem) -> Result<CutResult> {
    let caps = prob.capacities()?;
    Ok(solve(prob.net, &caps, prob.users).1)
}

/// Max-flow value alongside the extracted cut, for duality checks.
pub fn flow_and_cut(prob: &FlowProblem) -> Result<(f64, CutResult)> {
    let caps = prob.capacities()?;
    Ok(solve(prob.net, &caps, prob.users))
}

fn neighbourhood_sum(prob: &FlowProblem, caps: &[f64], x: NodeId) -> Result<f64> {
    Ok(prob.net.edge_neighborhood(x)?.iter().map(|&i| caps[i]).sum())
}

/// Capacity of the cheaper user isolation, and that user. Ties go to `a`.
pub fn min_neighborhood_capacity(prob: &FlowProblem) -> Result<(f64, NodeId)> {
    let caps = prob.capacities()?;
    let sa = neighbourhood_sum(prob, &caps, prob.users.a)?;
    let sb = neighbourhood_sum(prob, &caps, prob.users.b)?;
    Ok(if sb < sa { (sb, prob.users.b) } else { (sa, prob.users.a) })
}

/// The cut collecting exactly the edges incident to `user`.
pub fn isolation_cut(prob: &FlowProblem, user: NodeId) -> Result<CutResult> {
    if user != prob.users.a && user != prob.users.b {
        return Err(Error::InvalidArgument(format!("{user} is not one of the users")));
    }
    let caps = prob.capacities()?;
    let mut side = vec![user != prob.users.a; prob.net.node_count()];
    side[user.0] = user == prob.users.a;
    Ok(CutResult::from_partition(prob.net, &caps, &side))
}

/// Maximum number of edge-disjoint paths between two non-adjacent users.
pub fn menger_cardinality(net: &Network, users: UserPair) -> Result<usize> {
    net.node(users.a)?;
    net.node(users.b)?;
    if net.are_adjacent(users.a, users.b) {
        return Err(Error::Adjacent(users.a, users.b));
    }
    let caps = vec![1.0; net.edge_count()];
    Ok(solve(net, &caps, users).1.value.round() as usize)
}

/// Predicted smallest bulk-cut cardinality, `sum(k - lambda - 1)` over λ*.
pub fn bulk_cut_cardinality(chars: &WrnCharacteristics) -> u32 {
    chars.lambda_star.values().iter().map(|&l| chars.k - l - 1).sum()
}

/// Minimum cut that may not use edges incident to either user. Those
/// edges are made uncuttable and the cut recomputed.
pub fn bulk_min_cut(prob: &FlowProblem) -> Result<CutResult> {
    let (a, b) = (prob.users.a, prob.users.b);
    if prob.net.are_adjacent(a, b) || prob.net.nonadjacent_commonality(a, b)? > 0 {
        return Err(Error::BulkCutInfeasible(a, b));
    }
    let caps = prob.capacities()?;
    let total: f64 = caps.iter().filter(|c| c.is_finite()).sum();
    let uncuttable = 2.0 * total + 1.0;
    let mut adjusted = caps;
    for x in [a, b] {
        for &i in prob.net.edge_neighborhood(x)? {
            adjusted[i] = uncuttable;
        }
    }
    let (_, cut) = solve(prob.net, &adjusted, prob.users);
    if cut.value >= uncuttable {
        // only possible if a user edge had to go, which the precondition rules out
        return Err(Error::BulkCutInfeasible(a, b));
    }
    Ok(cut)
}

/// Node limit for [`brute_force_min_cut`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Exhaustive minimum over all bipartitions separating the users. Test
/// oracle only.
pub fn brute_force_min_cut(prob: &FlowProblem) -> Result<CutResult> {
    let net = prob.net;
    let n = net.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge(n, BRUTE_FORCE_LIMIT));
    }
    let (a, b) = (prob.users.a.0, prob.users.b.0);
    if a == b {
        return Err(Error::InvalidArgument("users must differ".into()));
    }
    let caps = prob.capacities()?;
    let free: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
    let mut side = vec![false; n];
    let mut best: Option<(f64, Vec<bool>)> = None;
    for mask in 0u64..(1u64 << free.len()) {
        side.fill(false);
        side[a] = true;
        for (bit, &x) in free.iter().enumerate() {
            side[x] = mask >> bit & 1 == 1;
        }
        let value: f64 = net
            .edges()
            .iter()
            .zip(&caps)
            .filter(|(e, _)| side[e.u.0] != side[e.v.0])
            .map(|(_, &c)| c)
            .sum();
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, side.clone()));
        }
    }
    let (_, side) = best.expect("at least one bipartition exists");
    Ok(CutResult::from_partition(net, &caps, &side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{self, LatticeFamily, LatticeSpec};

    fn pair(a: usize, b: usize) -> UserPair {
        UserPair::new(NodeId(a), NodeId(b)).unwrap()
    }

    #[test]
    fn single_edge_value() {
        let net = Network::from_topology(2, &[(0, 1)], Some(&[0.7])).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 1), CapacitySource::Explicit).unwrap();
        let cut = flooding_capacity(&prob).unwrap();
        assert_eq!(cut.value, 0.7);
        assert_eq!(cut.cut_set, vec![0]);
        assert_eq!(brute_force_min_cut(&prob).unwrap().value, 0.7);
    }

    #[test]
    fn disconnected_users() {
        let net = Network::from_topology(3, &[(0, 1)], Some(&[1.0])).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 2), CapacitySource::Explicit).unwrap();
        let cut = flooding_capacity(&prob).unwrap();
        assert_eq!(cut.value, 0.0);
        assert!(cut.cut_set.is_empty());
        assert_eq!(brute_force_min_cut(&prob).unwrap().value, 0.0);
    }

    #[test]
    fn missing_capacity() {
        let net = Network::from_topology(2, &[(0, 1)], None).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 1), CapacitySource::Explicit).unwrap();
        assert_eq!(flooding_capacity(&prob), Err(Error::MissingCapacity(0)));
        let plob = FlowProblem::new(&net, pair(0, 1), CapacitySource::Plob(FibreParams::default())).unwrap();
        assert!(flooding_capacity(&plob).unwrap().value > 0.0);
    }

    #[test]
    fn unknown_user_rejected() {
        let net = Network::from_topology(2, &[(0, 1)], None).unwrap();
        assert!(FlowProblem::new(&net, pair(0, 5), CapacitySource::Unit).is_err());
    }

    #[test]
    fn path_menger() {
        let net = Network::from_topology(3, &[(0, 1), (1, 2)], None).unwrap();
        assert_eq!(menger_cardinality(&net, pair(0, 2)), Ok(1));
        assert_eq!(menger_cardinality(&net, pair(0, 1)), Err(Error::Adjacent(NodeId(0), NodeId(1))));
    }

    #[test]
    fn symmetric_users_tie_to_a() {
        let net = Network::from_topology(3, &[(0, 1), (1, 2)], None).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 2), CapacitySource::Unit).unwrap();
        assert_eq!(min_neighborhood_capacity(&prob).unwrap(), (1.0, NodeId(0)));
    }

    #[test]
    fn isolation_cut_collects_user_edges() {
        let spec = LatticeSpec::new(LatticeFamily::Honeycomb, 3, 10.0).unwrap();
        let net = lattice::build(&spec).unwrap();
        let users = lattice::select_deep_users(&net, LatticeFamily::Honeycomb).unwrap();
        let prob = FlowProblem::new(&net, users, CapacitySource::Unit).unwrap();
        let cut = isolation_cut(&prob, users.b).unwrap();
        assert_eq!(cut.cut_set.len(), 3);
        assert_eq!(cut.value, 3.0);
        assert_eq!(cut.sink_side, vec![users.b]);
        assert!(isolation_cut(&prob, NodeId(usize::MAX - 1)).is_err());
    }

    #[test]
    fn two_node_bulk_cut_is_infeasible() {
        let net = Network::from_topology(2, &[(0, 1)], None).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 1), CapacitySource::Unit).unwrap();
        assert_eq!(bulk_min_cut(&prob), Err(Error::BulkCutInfeasible(NodeId(0), NodeId(1))));
    }

    #[test]
    fn shared_neighbour_bulk_cut_is_infeasible() {
        let net = Network::from_topology(3, &[(0, 1), (1, 2)], None).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 2), CapacitySource::Unit).unwrap();
        assert!(matches!(bulk_min_cut(&prob), Err(Error::BulkCutInfeasible(..))));
    }

    #[test]
    fn oracle_refuses_large_graphs() {
        let net = Network::from_topology(21, &[], None).unwrap();
        let prob = FlowProblem::new(&net, pair(0, 1), CapacitySource::Unit).unwrap();
        assert_eq!(brute_force_min_cut(&prob), Err(Error::OracleTooLarge(21, 20)));
    }

    #[test]
    fn bulk_cardinality_formula() {
        let want = [(LatticeFamily::Honeycomb, 6), (LatticeFamily::Hexagonal, 18), (LatticeFamily::Manhattan8, 32), (LatticeFamily::Manhattan16, 128)];
        for (f, d) in want {
            let chars = f.characteristics();
            assert_eq!(bulk_cut_cardinality(&chars), d);
            assert_eq!(bulk_cut_cardinality(&chars), chars.delta);
        }
    }
}
