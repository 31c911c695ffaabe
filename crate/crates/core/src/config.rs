//! Run configuration file, TOML or JSON.
//!
//! Every key is optional and unknown keys are rejected. A minimal TOML file:
//!
//! ```toml
//! seed = 7
//!
//! [fibre]
//! gamma = 0.02
//!
//! [satellite]
//! calibration_km = 215.0
//!
//! [satellite.presets.up-night]
//! transit_time_s = 150.0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::{FibreParams, WaxmanParams};
use crate::error::{Error, Result};
use crate::satcomp::{self, EarthGeom, SatConfig, SatLabel, SlantForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Per-preset overrides. Missing fields keep the published values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetOverride {
    pub orbital_rate: Option<f64>,
    pub altitude_km: Option<f64>,
    pub transit_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SatelliteSection {
    /// Shared transit time. When absent it is calibrated from
    /// `calibration_km` against the night-time downlink.
    pub transit_time_s: Option<f64>,
    pub calibration_km: f64,
    pub slant: SlantForm,
    pub earth: EarthGeom,
    pub presets: BTreeMap<SatLabel, PresetOverride>,
}

impl Default for SatelliteSection {
    fn default() -> Self {
        SatelliteSection {
            transit_time_s: None,
            calibration_km: satcomp::CHAIN_BREAK_EVEN_KM,
            slant: SlantForm::default(),
            earth: EarthGeom::default(),
            presets: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fibre: FibreParams,
    pub waxman: WaxmanParams,
    pub satellite: SatelliteSection,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses by extension: `.json` as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => RunConfig::from_json_str(&text),
            _ => RunConfig::from_toml_str(&text),
        };
        parsed.map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.fibre.validate()?;
        if !(self.waxman.zeta.is_finite() && self.waxman.rho_crit.is_finite()) {
            return Err(Error::Config("waxman constants must be finite".into()));
        }
        let sat = &self.satellite;
        if !(sat.calibration_km > 0.0 && sat.calibration_km.is_finite()) {
            return Err(Error::Config(format!("calibration_km must be positive, got {}", sat.calibration_km)));
        }
        if !(sat.earth.radius_km > 0.0 && sat.earth.radius_km.is_finite()) {
            return Err(Error::Config(format!("earth radius must be positive, got {}", sat.earth.radius_km)));
        }
        for label in SatLabel::ALL {
            self.sat_config(label)?;
        }
        Ok(())
    }

    fn apply(&self, label: SatLabel, t_q: f64) -> SatConfig {
        let mut cfg = SatConfig::preset(label, t_q);
        if let Some(o) = self.satellite.presets.get(&label) {
            cfg.orbital_rate = o.orbital_rate.unwrap_or(cfg.orbital_rate);
            cfg.altitude_km = o.altitude_km.unwrap_or(cfg.altitude_km);
            cfg.transit_time_s = o.transit_time_s.unwrap_or(cfg.transit_time_s);
        }
        cfg
    }

    /// Shared transit time: the explicit value or the calibrated one.
    pub fn transit_time(&self) -> Result<f64> {
        match self.satellite.transit_time_s {
            Some(t) => Ok(t),
            None => {
                let reference = self.apply(SatLabel::DownNight, 1.0);
                satcomp::calibrate_transit_time(&reference, self.satellite.calibration_km, &self.fibre)
            }
        }
    }

    /// Preset for `label` with every override applied.
    pub fn sat_config(&self, label: SatLabel) -> Result<SatConfig> {
        let cfg = self.apply(label, self.transit_time()?);
        cfg.validate().map_err(|e| Error::Config(format!("preset {label}: {e}")))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let t = cfg.transit_time().unwrap();
        assert!((t - 203.8).abs() < 0.1);
        assert_eq!(RunConfig::from_json_str("{}").unwrap(), cfg);
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::from_toml_str(
            r#"
seed = 9
format = "json"

[fibre]
gamma = 0.03

[satellite]
transit_time_s = 100.0

[satellite.presets.up-night]
altitude_km = 400.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.format, Some(OutputFormat::Json));
        assert_eq!(cfg.fibre.gamma, 0.03);
        assert_eq!(cfg.fibre.alpha, 1e7);
        let up = cfg.sat_config(SatLabel::UpNight).unwrap();
        assert_eq!(up.altitude_km, 400.0);
        assert_eq!(up.transit_time_s, 100.0);
        assert_eq!(up.orbital_rate, 4.244e-2);
    }

    #[test]
    fn json_preset_override() {
        let cfg = RunConfig::from_json_str(r#"{"satellite": {"presets": {"down-day": {"transit_time_s": 50.0}}}}"#).unwrap();
        assert_eq!(cfg.sat_config(SatLabel::DownDay).unwrap().transit_time_s, 50.0);
        assert!((cfg.sat_config(SatLabel::DownNight).unwrap().transit_time_s - 203.8).abs() < 0.1);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(RunConfig::from_toml_str("colour = 1"), Err(Error::Config(_))));
        assert!(RunConfig::from_toml_str("[fibre]\nbeta = 1.0").is_err());
        assert!(RunConfig::from_toml_str("[fibre]\ngamma = -1.0").is_err());
        assert!(RunConfig::from_toml_str("[satellite.presets.sideways]\naltitude_km = 500.0").is_err());
        assert!(RunConfig::from_toml_str("[satellite.presets.up-day]\naltitude_km = 50.0").is_err());
        let e = RunConfig::from_json_str("{\n  \"seed\": }").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
