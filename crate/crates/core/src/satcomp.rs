//! Daily secret-key rates of ground fibre networks against a single
//! quantum satellite, and the separations and densities at which the two
//! break even.
//!
//! Satellite physics enters only through four published orbital rates
//! (bits per use at zenith) and an effective transit time `t_Q`. The transit
//! time is calibrated once so that a repeater chain breaks even at 215 km
//! against the night-time downlink; every preset shares it unless overridden.
//!
//! The daily rate of a lattice with link length `d` is the flooding
//! capacity `delta * PLOB(d)` times the uses per day, with `delta`
//! multiplying the single-edge capacity. This follows from inverting the
//! maximum link-length relation and is the only placement that reproduces
//! the published break-even points, even though a printed version of the
//! rate formula divides by `delta` instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capacity::{self, FibreParams};
use crate::error::{Error, Result};
use crate::lattice::WrnCharacteristics;

/// Break-even repeater-chain separation used to calibrate `t_Q`, km.
pub const CHAIN_BREAK_EVEN_KM: f64 = 215.0;

/// Root bracket for break-even searches, km.
pub const SEARCH_BRACKET_KM: (f64, f64) = (1.0, 2000.0);
/// Bisection stops once the bracket is narrower than this, km.
pub const SEARCH_TOL_KM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarthGeom {
    pub radius_km: f64,
}

impl Default for EarthGeom {
    fn default() -> Self {
        EarthGeom { radius_km: 6371.0 }
    }
}

/// Which slant-range expression to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlantForm {
    /// `sqrt(h^2 + 2 h R + R^2 cos^2 t) - R cos t`, which reduces to `h` at
    /// zenith.
    #[default]
    Standard,
    /// The same with `2 h R^2` under the root. Dimensionally inconsistent;
    /// kept only to reproduce the printed expression.
    Printed,
}

/// Line-of-sight distance from a ground station to a satellite at altitude
/// `h` seen at zenith angle `theta`.
pub fn slant_distance(h: f64, theta: f64, geom: &EarthGeom, form: SlantForm) -> Result<f64> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("altitude must be non-negative, got {h}")));
    }
    if !(theta.abs() <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("zenith angle must lie in [-pi/2, pi/2], got {theta}")));
    }
    let r = geom.radius_km;
    let c = theta.cos();
    let cross = match form {
        SlantForm::Standard => 2.0 * h * r,
        SlantForm::Printed => 2.0 * h * r * r,
    };
    Ok((h * h + cross + r * r * c * c).sqrt() - r * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SatLabel {
    DownNight,
    DownDay,
    UpNight,
    UpDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Downlink,
    Uplink,
}

impl SatLabel {
    pub const ALL: [SatLabel; 4] = [SatLabel::DownNight, SatLabel::DownDay, SatLabel::UpNight, SatLabel::UpDay];

    pub fn name(self) -> &'static str {
        match self {
            SatLabel::DownNight => "down-night",
            SatLabel::DownDay => "down-day",
            SatLabel::UpNight => "up-night",
            SatLabel::UpDay => "up-day",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            SatLabel::DownNight | SatLabel::DownDay => Direction::Downlink,
            SatLabel::UpNight | SatLabel::UpDay => Direction::Uplink,
        }
    }

    pub fn is_night(self) -> bool {
        matches!(self, SatLabel::DownNight | SatLabel::UpNight)
    }

    /// Published zenith rate, bits per use.
    pub fn orbital_rate(self) -> f64 {
        match self {
            SatLabel::DownNight => 3.066e-2,
            SatLabel::DownDay => 3.041e-2,
            SatLabel::UpNight => 4.244e-2,
            SatLabel::UpDay => 2.737e-2,
        }
    }

    pub fn altitude_km(self) -> f64 {
        match self.direction() {
            Direction::Downlink => 530.0,
            Direction::Uplink => 103.0,
        }
    }

    /// Initial beam waist, m. Documentation only.
    pub fn beam_waist_m(self) -> f64 {
        match self.direction() {
            Direction::Downlink => 0.40,
            Direction::Uplink => 0.60,
        }
    }

    /// Receiver aperture, m. Documentation only.
    pub fn aperture_m(self) -> f64 {
        match self.direction() {
            Direction::Downlink => 1.0,
            Direction::Uplink => 2.0,
        }
    }
}

impl fmt::Display for SatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SatLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SatLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown satellite preset {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatConfig {
    pub label: SatLabel,
    /// Zenith rate, bits per use.
    pub orbital_rate: f64,
    pub altitude_km: f64,
    /// Effective transit time of one zenith pass, s.
    pub transit_time_s: f64,
}

impl SatConfig {
    pub fn preset(label: SatLabel, transit_time_s: f64) -> Self {
        SatConfig {
            label,
            orbital_rate: label.orbital_rate(),
            altitude_km: label.altitude_km(),
            transit_time_s,
        }
    }

    /// Preset with `t_Q` calibrated on the chain break-even against the
    /// night-time downlink.
    pub fn calibrated(label: SatLabel, p: &FibreParams) -> Result<Self> {
        let reference = SatConfig::preset(SatLabel::DownNight, 1.0);
        let t_q = calibrate_transit_time(&reference, CHAIN_BREAK_EVEN_KM, p)?;
        Ok(SatConfig::preset(label, t_q))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.orbital_rate.is_finite() && self.orbital_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("orbital rate must be positive, got {}", self.orbital_rate)));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km >= 100.0) {
            return Err(Error::InvalidArgument(format!("altitude must be at least 100 km, got {}", self.altitude_km)));
        }
        if !(self.transit_time_s.is_finite() && self.transit_time_s > 0.0) {
            return Err(Error::InvalidArgument(format!("transit time must be positive, got {}", self.transit_time_s)));
        }
        Ok(())
    }
}

/// Secret bits per day from one satellite, `alpha * t_Q * R_orb`.
pub fn sat_daily_rate(cfg: &SatConfig, p: &FibreParams) -> Result<f64> {
    cfg.validate()?;
    p.validate()?;
    Ok(p.alpha * cfg.transit_time_s * cfg.orbital_rate)
}

fn flooded_daily_rate(d: f64, delta: u32, p: &FibreParams) -> Result<f64> {
    p.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("link length must be positive, got {d}")));
    }
    Ok(p.alpha * p.t_daily * delta as f64 * capacity::plob_capacity(d, p)?)
}

/// Secret bits per day of a lattice whose links all have length `d_max`.
pub fn wrn_daily_rate(d_max: f64, chars: &WrnCharacteristics, p: &FibreParams) -> Result<f64> {
    flooded_daily_rate(d_max, chars.delta, p)
}

/// Secret bits per day of a repeater chain with spacing `d_max`.
pub fn chain_daily_rate(d_max: f64, p: &FibreParams) -> Result<f64> {
    flooded_daily_rate(d_max, 1, p)
}

/// `10 log10(ground / sat)` in dB. Negative values favour the satellite.
pub fn daily_advantage(ground: f64, sat: f64) -> Result<f64> {
    if !(ground > 0.0 && ground.is_finite() && sat > 0.0 && sat.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "daily rates must be positive, got ground {ground} and satellite {sat}"
        )));
    }
    if ground == sat {
        return Ok(0.0);
    }
    Ok(10.0 * (ground / sat).log10())
}

/// Ground architecture compared against the satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ground {
    Chain,
    Wrn { delta: u32 },
}

impl From<&WrnCharacteristics> for Ground {
    fn from(c: &WrnCharacteristics) -> Self {
        Ground::Wrn { delta: c.delta }
    }
}

impl Ground {
    fn delta(self) -> u32 {
        match self {
            Ground::Chain => 1,
            Ground::Wrn { delta } => delta,
        }
    }

    pub fn daily_rate(self, d: f64, p: &FibreParams) -> Result<f64> {
        flooded_daily_rate(d, self.delta(), p)
    }

    /// Advantage in dB at separation `d`. Long links whose capacity
    /// underflows to zero give negative infinity.
    pub fn advantage(self, d: f64, cfg: &SatConfig, p: &FibreParams) -> Result<f64> {
        let sat = sat_daily_rate(cfg, p)?;
        let ground = self.daily_rate(d, p)?;
        if ground == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        daily_advantage(ground, sat)
    }
}

/// Separation at which the ground network and the satellite deliver the same
/// daily rate, found by bisection on [`SEARCH_BRACKET_KM`].
pub fn critical_separation(ground: Ground, cfg: &SatConfig, p: &FibreParams) -> Result<f64> {
    let (mut lo, mut hi) = SEARCH_BRACKET_KM;
    let f = |d: f64| ground.advantage(d, cfg, p);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    // advantage decreases with separation
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoCriticalPoint { lo, hi });
    }
    while hi - lo > SEARCH_TOL_KM {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sparsest-lattice density `xi / d*^2` at the break-even separation.
pub fn critical_density(chars: &WrnCharacteristics, cfg: &SatConfig, p: &FibreParams) -> Result<f64> {
    let d = critical_separation(chars.into(), cfg, p)?;
    Ok(chars.xi / (d * d))
}

/// Stations needed to cover `area_km2` at the break-even density.
pub fn critical_station_count(chars: &WrnCharacteristics, cfg: &SatConfig, p: &FibreParams, area_km2: f64) -> Result<f64> {
    if !(area_km2 > 0.0 && area_km2.is_finite()) {
        return Err(Error::InvalidArgument(format!("area must be positive, got {area_km2}")));
    }
    Ok(critical_density(chars, cfg, p)? * area_km2)
}

/// Transit time making a chain with spacing `d_star` break even against
/// `cfg`: `t_daily * PLOB(d_star) / R_orb`.
pub fn calibrate_transit_time(cfg: &SatConfig, d_star: f64, p: &FibreParams) -> Result<f64> {
    if !(cfg.orbital_rate.is_finite() && cfg.orbital_rate > 0.0) {
        return Err(Error::InvalidArgument(format!("orbital rate must be positive, got {}", cfg.orbital_rate)));
    }
    if !(d_star > 0.0 && d_star.is_finite()) {
        return Err(Error::InvalidArgument(format!("break-even separation must be positive, got {d_star}")));
    }
    p.validate()?;
    Ok(p.t_daily * capacity::plob_capacity(d_star, p)? / cfg.orbital_rate)
}

/// Quantity swept along an advantage curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveAxis {
    DMax,
    Rho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageCurve {
    pub axis: CurveAxis,
    pub ground: Ground,
    /// `(x, advantage in dB)` in sweep order.
    pub points: Vec<(f64, f64)>,
    /// Break-even value of `x`, if the bracket contains one.
    pub critical: Option<f64>,
}

/// Advantage against link length for each of `ds`.
pub fn advantage_vs_separation(ground: Ground, cfg: &SatConfig, p: &FibreParams, ds: &[f64]) -> Result<AdvantageCurve> {
    let points = ds
        .iter()
        .map(|&d| Ok((d, ground.advantage(d, cfg, p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AdvantageCurve {
        axis: CurveAxis::DMax,
        ground,
        points,
        critical: optional_root(critical_separation(ground, cfg, p))?,
    })
}

/// Advantage against the sparsest-lattice density `rho = xi / d^2`.
pub fn advantage_vs_density(chars: &WrnCharacteristics, cfg: &SatConfig, p: &FibreParams, rhos: &[f64]) -> Result<AdvantageCurve> {
    let ground = Ground::from(chars);
    let points = rhos
        .iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidArgument(format!("density must be positive, got {rho}")));
            }
            Ok((rho, ground.advantage((chars.xi / rho).sqrt(), cfg, p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdvantageCurve {
        axis: CurveAxis::Rho,
        ground,
        points,
        critical: optional_root(critical_density(chars, cfg, p))?,
    })
}

fn optional_root(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoCriticalPoint { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
