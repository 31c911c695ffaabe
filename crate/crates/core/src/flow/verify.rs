//! Randomised checks of the threshold results on generated lattices.
//!
//! Each trial draws fresh fibre lengths, converts them to PLOB capacities
//! and compares the exact flooding capacity with the min-neighbourhood
//! capacity `S` of the chosen users. Trials are independent and seeded per
//! trial index, so results do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{flooding_capacity, min_neighborhood_capacity, approx_eq, approx_le, CapacitySource, FlowProblem};
use crate::capacity::{self, FibreParams};
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeFamily, LatticeSpec};
use crate::netgraph::{GraphFile, Network, UserPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// All links within `d_max`; expect `omega S <= F <= S`.
    Bounds,
    /// User links also within the stricter `d_max^i`; expect `F = S`.
    Equality,
}

impl std::str::FromStr for VerifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(VerifyMode::Bounds),
            "equality" => Ok(VerifyMode::Equality),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?} (bounds or equality)"))),
        }
    }
}

/// How trial link lengths are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthModel {
    /// Bulk links in `[d_max/2, d_max]`, user links in
    /// `[d_max_user/2, d_max_user]`, both limits taken from the target.
    #[default]
    Target,
    /// Each user gets one common length for all its links, drawn from the
    /// user range. Bulk links are then drawn below the smaller of `d_max`
    /// and the limit recomputed from the realised `S`, so the thresholds
    /// hold relative to `S` itself while every link stays within the
    /// target's limits.
    Consistent,
}

impl std::str::FromStr for LengthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(LengthModel::Target),
            "consistent" => Ok(LengthModel::Consistent),
            _ => Err(Error::InvalidArgument(format!("unknown length model {s:?} (target or consistent)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub family: LatticeFamily,
    pub rings: usize,
    /// Capacity target the link lengths are derived from.
    pub target: f64,
    pub mode: VerifyMode,
    pub trials: usize,
    pub seed: u64,
    pub params: FibreParams,
    /// Stretch one random bulk link to this multiple of `d_max`. Only the
    /// upper bound is asserted then.
    pub stretch: Option<f64>,
    pub lengths: LengthModel,
}

impl VerifySettings {
    pub fn new(family: LatticeFamily, rings: usize, target: f64, mode: VerifyMode) -> Self {
        VerifySettings {
            family,
            rings,
            target,
            mode,
            trials: 100,
            seed: 0,
            params: FibreParams::default(),
            stretch: None,
            lengths: LengthModel::Target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Flooding capacity.
    pub value: f64,
    /// Min-neighbourhood capacity `S`.
    pub min_neighbourhood: f64,
    pub weaker_user: usize,
    /// `omega S`.
    pub lower_bound: f64,
    pub min_bulk_capacity: f64,
    pub min_user_capacity: f64,
    /// Whether the link capacities clear the thresholds computed from `S`
    /// itself rather than from the target.
    pub thresholds_met_for_s: bool,
    /// `F = S` within tolerance.
    pub saturated: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub family: LatticeFamily,
    pub rings: usize,
    pub target: f64,
    pub mode: VerifyMode,
    pub seed: u64,
    pub trials: usize,
    pub stretch: Option<f64>,
    pub lengths: LengthModel,
    pub users: [usize; 2],
    pub d_max: f64,
    pub d_max_user: f64,
    pub omega: f64,
    pub passed: bool,
    pub failures: usize,
    pub saturation_frequency: f64,
    pub thresholds_met_frequency: f64,
    pub records: Vec<TrialRecord>,
    /// Network of the first failing trial, lengths and capacities filled in.
    pub counterexample: Option<GraphFile>,
}

/// Built lattice, users and length limits shared by all trials.
pub struct TrialSetup {
    pub net: Network,
    pub users: UserPair,
    pub user_edge: Vec<bool>,
    /// Which user (0 for `a`, 1 for `b`) each user link belongs to.
    pub owner: Vec<Option<usize>>,
    pub params: FibreParams,
    pub d_max: f64,
    pub d_max_user: f64,
    pub omega: f64,
    pub k: u32,
    pub delta: u32,
}

impl TrialSetup {
    pub fn new(s: &VerifySettings) -> Result<Self> {
        s.params.validate()?;
        if !(s.target.is_finite() && s.target > 0.0) {
            return Err(Error::InvalidArgument(format!("target must be positive, got {}", s.target)));
        }
        let chars = s.family.characteristics();
        let net = lattice::build(&LatticeSpec::new(s.family, s.rings, 1.0)?)?;
        let users = lattice::select_deep_users(&net, s.family)?;
        let mut user_edge = vec![false; net.edge_count()];
        let mut owner = vec![None; net.edge_count()];
        for (j, x) in users.both().into_iter().enumerate() {
            for &i in net.edge_neighborhood(x)? {
                user_edge[i] = true;
                owner[i] = Some(j);
            }
        }
        let d_max = capacity::max_link_length(s.target, chars.delta, &s.params)?;
        let d_max_user = match s.mode {
            VerifyMode::Bounds => d_max,
            VerifyMode::Equality => capacity::neighborhood_max_link_length(s.target, chars.k, chars.delta, &s.params)?,
        };
        Ok(TrialSetup {
            net,
            users,
            user_edge,
            owner,
            params: s.params,
            d_max,
            d_max_user,
            omega: chars.omega_f64(),
            k: chars.k,
            delta: chars.delta,
        })
    }

    /// Seeded lengths for one trial under the given model. A stretch
    /// factor replaces one random bulk link with `f * d_max`.
    pub fn draw_lengths(&self, seed: u64, trial: usize, model: LengthModel, stretch: Option<f64>) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut lengths: Vec<f64> = match model {
            LengthModel::Target => self
                .user_edge
                .iter()
                .map(|&user| {
                    let hi = if user { self.d_max_user } else { self.d_max };
                    rng.random_range(0.5 * hi..=hi)
                })
                .collect(),
            LengthModel::Consistent => {
                let per_user = [
                    rng.random_range(0.5 * self.d_max_user..=self.d_max_user),
                    rng.random_range(0.5 * self.d_max_user..=self.d_max_user),
                ];
                let weakest = per_user[0].max(per_user[1]);
                let s = self.k as f64 * capacity::plob_capacity(weakest, &self.params)?;
                let hi = capacity::max_link_length(s, self.delta, &self.params)?.min(self.d_max);
                self.owner
                    .iter()
                    .map(|o| match o {
                        Some(j) => per_user[*j],
                        None => rng.random_range(0.5 * hi..=hi),
                    })
                    .collect()
            }
        };
        if let Some(f) = stretch {
            let bulk: Vec<usize> = (0..lengths.len()).filter(|&i| !self.user_edge[i]).collect();
            if !bulk.is_empty() {
                let pick = bulk[rng.random_range(0..bulk.len())];
                lengths[pick] = f * self.d_max;
            }
        }
        Ok(lengths)
    }
}

fn run_trial(setup: &TrialSetup, s: &VerifySettings, trial: usize) -> Result<(TrialRecord, Option<Network>)> {
    let lengths = setup.draw_lengths(s.seed, trial, s.lengths, s.stretch)?;
    let net = setup.net.with_lengths(&lengths)?;
    let caps = lengths
        .iter()
        .map(|&d| capacity::plob_capacity(d, &s.params))
        .collect::<Result<Vec<f64>>>()?;
    let net = net.with_capacities(&caps)?;
    let prob = FlowProblem::new(&net, setup.users, CapacitySource::Explicit)?;
    let value = flooding_capacity(&prob)?.value;
    let (min_nb, weaker) = min_neighborhood_capacity(&prob)?;

    let fold_min = |user: bool| {
        caps.iter()
            .zip(&setup.user_edge)
            .filter(|(_, &u)| u == user)
            .map(|(&c, _)| c)
            .fold(f64::INFINITY, f64::min)
    };
    let min_bulk = fold_min(false);
    let min_user = fold_min(true);
    let bulk_threshold = min_nb / setup.delta as f64;
    let user_threshold = match s.mode {
        VerifyMode::Bounds => bulk_threshold,
        VerifyMode::Equality => (1.0 / (setup.k - 1) as f64 - 1.0 / setup.delta as f64) * min_nb,
    };
    let thresholds_met = approx_le(bulk_threshold, min_bulk) && approx_le(user_threshold, min_user);

    let lower = setup.omega * min_nb;
    let saturated = approx_eq(value, min_nb);
    let upper_ok = approx_le(value, min_nb);
    let passed = match (s.stretch, s.mode) {
        (Some(_), _) => upper_ok,
        (None, VerifyMode::Bounds) => upper_ok && approx_le(lower, value),
        (None, VerifyMode::Equality) => saturated,
    };
    let record = TrialRecord {
        trial,
        value,
        min_neighbourhood: min_nb,
        weaker_user: weaker.0,
        lower_bound: lower,
        min_bulk_capacity: min_bulk,
        min_user_capacity: min_user,
        thresholds_met_for_s: thresholds_met,
        saturated,
        passed,
    };
    Ok((record, (!passed).then_some(net)))
}

pub fn verify_threshold_theorem(s: &VerifySettings) -> Result<VerificationReport> {
    if s.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let Some(f) = s.stretch {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidArgument(format!("stretch factor must be positive, got {f}")));
        }
    }
    let setup = TrialSetup::new(s)?;
    let results = (0..s.trials)
        .into_par_iter()
        .map(|t| run_trial(&setup, s, t))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(results.len());
    let mut counterexample = None;
    for (rec, failed) in results {
        if counterexample.is_none() {
            counterexample = failed.as_ref().map(GraphFile::from);
        }
        records.push(rec);
    }
    let n = records.len() as f64;
    let failures = records.iter().filter(|r| !r.passed).count();
    Ok(VerificationReport {
        family: s.family,
        rings: s.rings,
        target: s.target,
        mode: s.mode,
        seed: s.seed,
        trials: s.trials,
        stretch: s.stretch,
        lengths: s.lengths,
        users: [setup.users.a.0, setup.users.b.0],
        d_max: setup.d_max,
        d_max_user: setup.d_max_user,
        omega: setup.omega,
        passed: failures == 0,
        failures,
        saturation_frequency: records.iter().filter(|r| r.saturated).count() as f64 / n,
        thresholds_met_frequency: records.iter().filter(|r| r.thresholds_met_for_s).count() as f64 / n,
        records,
        counterexample,
    })
}
