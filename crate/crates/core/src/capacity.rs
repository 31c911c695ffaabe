//! Closed-form relations between single-edge capacity, fibre length and
//! nodal density for pure-loss channels.
//!
//! Capacities are in bits per channel use, lengths in km and densities in
//! nodes per km². Everything is evaluated in `f64`; beyond roughly 1000 km at
//! the default loss rate the transmissivity underflows and the capacity is
//! simply 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::WrnCharacteristics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FibreParams {
    /// Loss exponent per km (transmissivity is `10^(-gamma d)`).
    pub gamma: f64,
    /// Channel uses per second.
    pub alpha: f64,
    /// Seconds per day.
    pub t_daily: f64,
}

impl Default for FibreParams {
    fn default() -> Self {
        FibreParams {
            gamma: 0.02,
            alpha: 1.0e7,
            t_daily: 8.64e4,
        }
    }
}

impl FibreParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("alpha", self.alpha), ("t_daily", self.t_daily)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Constants of the expected-capacity regression for random spatial graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaxmanParams {
    pub zeta: f64,
    pub rho_crit: f64,
}

impl Default for WaxmanParams {
    fn default() -> Self {
        WaxmanParams {
            zeta: 4358.0,
            rho_crit: 4.25e-4,
        }
    }
}

fn check_target(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("capacity target must be positive, got {c}")))
    }
}

fn check_delta(delta: u32) -> Result<()> {
    if delta == 0 {
        Err(Error::InvalidArgument("delta must be positive".into()))
    } else {
        Ok(())
    }
}

pub fn transmissivity(d: f64, p: &FibreParams) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!("length must be non-negative, got {d}")));
    }
    Ok(10f64.powf(-p.gamma * d))
}

/// `-log2(1 - eta)` for a fibre of length `d`.
pub fn plob_capacity(d: f64, p: &FibreParams) -> Result<f64> {
    let eta = transmissivity(d, p)?;
    if d == 0.0 {
        return Err(Error::InfiniteCapacity);
    }
    // ln_1p keeps precision when eta is tiny
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Inverse of [`plob_capacity`]: the length at which a fibre carries exactly
/// `c` bits per use. Infinite for `c == 0`.
pub fn plob_length(c: f64, p: &FibreParams) -> Result<f64> {
    if !(c >= 0.0) || c.is_nan() {
        return Err(Error::InvalidArgument(format!("capacity must be non-negative, got {c}")));
    }
    // 1 - 2^(-c) written with expm1 so small c stays accurate
    let one_minus = -(-c * std::f64::consts::LN_2).exp_m1();
    Ok(-one_minus.log10() / p.gamma)
}

/// Single-edge threshold `C / delta`.
pub fn threshold_capacity(target: f64, delta: u32) -> Result<f64> {
    check_delta(delta)?;
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacity target must be non-negative, got {target}")));
    }
    Ok(target / delta as f64)
}

/// Stricter threshold on user-connected edges, `(1/(k-1) - 1/delta) C`.
pub fn neighborhood_threshold_capacity(target: f64, k: u32, delta: u32) -> Result<f64> {
    check_delta(delta)?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacity target must be non-negative, got {target}")));
    }
    let inv_k = 1.0 / (k - 1) as f64;
    let inv_delta = 1.0 / delta as f64;
    if inv_k < inv_delta {
        return Err(Error::DegenerateThreshold { inv_k, inv_delta });
    }
    Ok((inv_k - inv_delta) * target)
}

/// Longest bulk fibre for which every edge clears `C / delta`.
pub fn max_link_length(target: f64, delta: u32, p: &FibreParams) -> Result<f64> {
    check_target(target)?;
    plob_length(threshold_capacity(target, delta)?, p)
}

/// Longest user-connected fibre for which the stricter threshold holds.
pub fn neighborhood_max_link_length(target: f64, k: u32, delta: u32, p: &FibreParams) -> Result<f64> {
    check_target(target)?;
    plob_length(neighborhood_threshold_capacity(target, k, delta)?, p)
}

/// `xi * gamma^2 / log10(1 - 2^(-C/delta))^2`, i.e. `xi / d_max^2`.
pub fn min_nodal_density(target: f64, delta: u32, xi: f64, p: &FibreParams) -> Result<f64> {
    check_target(target)?;
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
    }
    let c = threshold_capacity(target, delta)?;
    let l = (-(-c * std::f64::consts::LN_2).exp_m1()).log10();
    Ok(xi * p.gamma * p.gamma / (l * l))
}

/// Minimum nodal density for one bit per network use.
pub fn critical_density(chars: &WrnCharacteristics, p: &FibreParams) -> Result<f64> {
    min_nodal_density(1.0, chars.delta, chars.xi, p)
}

/// Regression line for the expected flooding capacity of random spatial
/// graphs at density `rho`. Negative values are returned unchanged.
pub fn waxman_expected_capacity(rho: f64, w: &WaxmanParams) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!("density must be non-negative, got {rho}")));
    }
    Ok(w.zeta * (rho - w.rho_crit) - 1.0)
}

/// `[omega C, C]`.
pub fn flooding_bounds(target: f64, chars: &WrnCharacteristics) -> Result<(f64, f64)> {
    check_target(target)?;
    Ok((chars.omega_f64() * target, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeFamily;

    fn p() -> FibreParams {
        FibreParams::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn transmissivity_values() {
        assert_eq!(transmissivity(0.0, &p()).unwrap(), 1.0);
        assert!(rel(transmissivity(50.0, &p()).unwrap(), 0.1) < 1e-14);
        let half = 2f64.log10() / 0.02;
        assert!(rel(transmissivity(half, &p()).unwrap(), 0.5) < 1e-14);
        assert!(transmissivity(-1.0, &p()).is_err());
    }

    #[test]
    fn plob_values() {
        assert_eq!(plob_capacity(0.0, &p()), Err(Error::InfiniteCapacity));
        assert!(plob_capacity(-3.0, &p()).is_err());
        let half = 2f64.log10() / 0.02;
        assert!((half - 15.0515).abs() < 1e-4);
        assert!(rel(plob_capacity(half, &p()).unwrap(), 1.0) < 1e-12);
        // eta = 10^-4.3, capacity ~ eta / ln 2 to first order
        let eta = 10f64.powf(-4.3);
        let expect = -(1.0 - eta).log2();
        assert!(rel(plob_capacity(215.0, &p()).unwrap(), expect) < 1e-12);
        assert!((plob_capacity(215.0, &p()).unwrap() - 7.23e-5).abs() < 0.01e-5);
        assert_eq!(plob_capacity(1e5, &p()).unwrap(), 0.0);
    }

    #[test]
    fn thresholds() {
        assert!(rel(threshold_capacity(1.0, 18).unwrap(), 1.0 / 18.0) < 1e-15);
        assert!(rel(threshold_capacity(1.0, 6).unwrap(), 1.0 / 6.0) < 1e-15);
        assert_eq!(threshold_capacity(10.0, 128).unwrap(), 0.078125);
        let t = neighborhood_threshold_capacity(1.0, 6, 18).unwrap();
        assert!(rel(t, 0.2 - 1.0 / 18.0) < 1e-14);
        assert!((t - 0.1444).abs() < 1e-4);
        assert!(rel(neighborhood_threshold_capacity(1.0, 3, 6).unwrap(), 1.0 / 3.0) < 1e-14);
        assert_eq!(neighborhood_threshold_capacity(0.0, 6, 18).unwrap(), 0.0);
        assert!(matches!(
            neighborhood_threshold_capacity(1.0, 8, 4),
            Err(Error::DegenerateThreshold { .. })
        ));
    }

    #[test]
    fn link_lengths() {
        // independent evaluation with plain log10/powf
        let direct = |c: f64| -(1.0 - 2f64.powf(-c)).log10() / 0.02;
        let d18 = max_link_length(1.0, 18, &p()).unwrap();
        assert!(rel(d18, direct(1.0 / 18.0)) < 1e-12);
        assert!((d18 - 71.15).abs() < 0.02);
        let d6 = max_link_length(1.0, 6, &p()).unwrap();
        assert!((d6 - 48.11).abs() < 0.01);
        let di = neighborhood_max_link_length(1.0, 6, 18, &p()).unwrap();
        assert!(rel(di, direct(0.2 - 1.0 / 18.0)) < 1e-12);
        assert!((di - 51.05).abs() < 0.01);
        let di3 = neighborhood_max_link_length(1.0, 3, 6, &p()).unwrap();
        assert!((di3 - 34.27).abs() < 0.01);
        assert!(di <= d18 && di3 <= d6);
        assert!(max_link_length(1e-6, 6, &p()).unwrap() > 300.0);
        assert!(max_link_length(1e-3, 6, &p()).unwrap() > max_link_length(1e-2, 6, &p()).unwrap());
        assert!(max_link_length(0.0, 6, &p()).is_err());
    }

    #[test]
    fn densities() {
        let hex = LatticeFamily::Hexagonal.characteristics();
        let hc = LatticeFamily::Honeycomb.characteristics();
        assert!(rel(critical_density(&hex, &p()).unwrap(), 2.28e-4) < 0.01);
        assert!(rel(critical_density(&hc, &p()).unwrap(), 3.33e-4) < 0.01);
        let d = max_link_length(1.0, hex.delta, &p()).unwrap();
        let rho = min_nodal_density(1.0, hex.delta, hex.xi, &p()).unwrap();
        assert!(rel(rho * d * d, hex.xi) < 1e-12);
        let m16 = LatticeFamily::Manhattan16.characteristics();
        assert!(critical_density(&hex, &p()).unwrap() < critical_density(&m16, &p()).unwrap());
    }

    #[test]
    fn waxman_line() {
        let w = WaxmanParams::default();
        assert_eq!(waxman_expected_capacity(4.25e-4, &w).unwrap(), -1.0);
        assert!(waxman_expected_capacity(4.25e-4 + 1.0 / 4358.0, &w).unwrap().abs() < 1e-12);
        let one_bit: f64 = 4.25e-4 + 2.0 / 4358.0;
        assert!((one_bit - 8.84e-4).abs() < 0.01e-4);
        assert!((waxman_expected_capacity(one_bit, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!(waxman_expected_capacity(-1.0, &w).is_err());
    }

    #[test]
    fn bounds() {
        let hc = LatticeFamily::Honeycomb.characteristics();
        let (lo, hi) = flooding_bounds(1.0, &hc).unwrap();
        assert!(rel(lo, 2.0 / 3.0) < 1e-15);
        assert_eq!(hi, 1.0);
        let m16 = LatticeFamily::Manhattan16.characteristics();
        let (lo, hi) = flooding_bounds(2.0, &m16).unwrap();
        assert!(rel(lo, 2.0 * 15.0 / 64.0) < 1e-15);
        assert!(rel(hi - lo, (1.0 - 15.0 / 64.0) * 2.0) < 1e-15);
    }
}
