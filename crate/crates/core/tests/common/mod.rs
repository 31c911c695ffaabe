#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wrn_core::flow::{self, CapacitySource, FlowProblem};
use wrn_core::lattice::{self, LatticeFamily, LatticeSpec};
use wrn_core::{Network, NodeId, UserPair};

/// A lattice large enough to carve 16-node pieces from without running
/// into its edge everywhere.
pub fn parent_lattice(family: LatticeFamily) -> Network {
    let r = match family {
        LatticeFamily::Honeycomb => 3,
        LatticeFamily::Hexagonal => 3,
        LatticeFamily::Manhattan8 => 6,
        LatticeFamily::Manhattan16 => 2,
    };
    lattice::build(&LatticeSpec::new(family, r, 1.0).unwrap()).unwrap()
}

/// Random piece of `parent` with 2..=16 nodes and capacities in (0, 1].
/// Mostly grown from a seed node along edges; now and then a node is
/// added from anywhere, which can leave the piece disconnected.
pub fn random_piece(parent: &Network, rng: &mut ChaCha8Rng) -> (Network, UserPair) {
    let n = parent.node_count();
    let size = rng.random_range(2..=16usize.min(n));
    let mut keep = vec![NodeId(rng.random_range(0..n))];
    let mut inside = vec![false; n];
    inside[keep[0].0] = true;
    while keep.len() < size {
        let frontier: Vec<NodeId> = keep
            .iter()
            .flat_map(|&x| parent.neighborhood(x).unwrap().iter().copied())
            .filter(|y| !inside[y.0])
            .collect();
        let next = if frontier.is_empty() || rng.random_bool(0.1) {
            NodeId(rng.random_range(0..n))
        } else {
            *frontier.choose(rng).unwrap()
        };
        if !inside[next.0] {
            inside[next.0] = true;
            keep.push(next);
        }
    }
    let piece = parent.induced_subgraph(&keep).unwrap();
    let caps: Vec<f64> = (0..piece.edge_count()).map(|_| rng.random_range(1e-3..=1.0)).collect();
    let piece = piece.with_capacities(&caps).unwrap();
    let a = rng.random_range(0..size);
    let mut b = rng.random_range(0..size - 1);
    if b >= a {
        b += 1;
    }
    (piece, UserPair::new(NodeId(a), NodeId(b)).unwrap())
}

/// Number of pieces on which the solver and the exhaustive oracle disagree.
pub fn oracle_mismatches(family: LatticeFamily, samples: usize, seed: u64) -> usize {
    let parent = parent_lattice(family);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .filter(|_| {
            let (piece, users) = random_piece(&parent, &mut rng);
            let prob = FlowProblem::new(&piece, users, CapacitySource::Explicit).unwrap();
            let fast = flow::flooding_capacity(&prob).unwrap().value;
            let slow = flow::brute_force_min_cut(&prob).unwrap().value;
            !flow::approx_eq(fast, slow)
        })
        .count()
}

/// Pairs of non-adjacent internal nodes whose edge connectivity differs
/// from `k`.
pub fn menger_violations(net: &Network, k: usize) -> (usize, usize) {
    let internal: Vec<NodeId> = net.internal_nodes().collect();
    let mut checked = 0;
    let mut bad = 0;
    for (i, &a) in internal.iter().enumerate() {
        for &b in &internal[i + 1..] {
            if net.are_adjacent(a, b) {
                continue;
            }
            checked += 1;
            if flow::menger_cardinality(net, UserPair::new(a, b).unwrap()).unwrap() != k {
                bad += 1;
            }
        }
    }
    (checked, bad)
}
