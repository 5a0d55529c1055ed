//! Lumped circuit descriptions for a load capacitor switching through a
//! conductive resistance `R` and a radiation resistance `R_rad`.
//!
//! Three topologies are supported: series RC, parallel RC (conductive and
//! radiative branches in parallel across the capacitor) and series RLC.

mod config;

pub use config::{parse_kv, Resolved, SpecConfig};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};

/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Above this `l/lambda` the short-dipole radiation resistance is no longer accurate.
pub const SHORT_DIPOLE_LIMIT: f64 = 0.1;

/// `|zeta - 1|` below which a series RLC is treated as critically damped.
pub const CRITICAL_DAMPING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    SeriesRc,
    ParallelRc,
    SeriesRlc,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::SeriesRc, Topology::ParallelRc, Topology::SeriesRlc];

    pub fn token(self) -> &'static str {
        match self {
            Topology::SeriesRc => "series_rc",
            Topology::ParallelRc => "parallel_rc",
            Topology::SeriesRlc => "series_rlc",
        }
    }

    pub fn is_series(self) -> bool {
        !matches!(self, Topology::ParallelRc)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// Accepts `series_rc`, `SeriesRC`, `series-rc` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "seriesrc" => Ok(Topology::SeriesRc),
            "parallelrc" => Ok(Topology::ParallelRc),
            "seriesrlc" => Ok(Topology::SeriesRlc),
            _ => Err(Error::validation(format!("unknown topology `{s}`"))),
        }
    }
}

/// Element values of one circuit. All quantities are SI.
///
/// `v0_volt` is the initial capacitor voltage in discharge mode and the
/// supply voltage `V_DD` in the charging modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub topology: Topology,
    pub r_ohm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_henry: Option<f64>,
    pub c_farad: f64,
    pub r_rad_ohm: f64,
    pub v0_volt: f64,
}

impl CircuitSpec {
    pub fn series_rc(r_ohm: f64, r_rad_ohm: f64, c_farad: f64, v0_volt: f64) -> Self {
        Self {
            topology: Topology::SeriesRc,
            r_ohm,
            l_henry: None,
            c_farad,
            r_rad_ohm,
            v0_volt,
        }
    }

    pub fn parallel_rc(r_ohm: f64, r_rad_ohm: f64, c_farad: f64, v0_volt: f64) -> Self {
        Self {
            topology: Topology::ParallelRc,
            ..Self::series_rc(r_ohm, r_rad_ohm, c_farad, v0_volt)
        }
    }

    pub fn series_rlc(r_ohm: f64, r_rad_ohm: f64, l_henry: f64, c_farad: f64, v0_volt: f64) -> Self {
        Self {
            topology: Topology::SeriesRlc,
            l_henry: Some(l_henry),
            ..Self::series_rc(r_ohm, r_rad_ohm, c_farad, v0_volt)
        }
    }

    /// Same element values with a different conductive resistance.
    pub fn with_r(self, r_ohm: f64) -> Self {
        Self { r_ohm, ..self }
    }

    /// `R + R_rad`, the loop resistance of the series topologies.
    pub fn total_resistance(&self) -> f64 {
        self.r_ohm + self.r_rad_ohm
    }

    /// `E0 = C V0^2 / 2`.
    pub fn e0_j(&self) -> f64 {
        0.5 * self.c_farad * self.v0_volt * self.v0_volt
    }

    pub fn inductance(&self) -> f64 {
        self.l_henry.unwrap_or(0.0)
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        let mut errs = Vec::new();
        let finite = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite (got {v})"));
            }
        };
        finite("r_ohm", self.r_ohm, &mut errs);
        finite("c_farad", self.c_farad, &mut errs);
        finite("r_rad_ohm", self.r_rad_ohm, &mut errs);
        finite("v0_volt", self.v0_volt, &mut errs);

        if !(self.c_farad > 0.0) {
            errs.push("capacitance must be positive (c_farad)".into());
        }
        if !(self.v0_volt > 0.0) {
            errs.push("voltage must be positive (v0_volt)".into());
        }
        if self.r_ohm < 0.0 {
            errs.push("resistance must be non-negative (r_ohm)".into());
        }
        if self.r_rad_ohm < 0.0 {
            errs.push("radiation resistance must be non-negative (r_rad_ohm)".into());
        }
        if self.r_ohm >= 0.0 && self.r_rad_ohm >= 0.0 && !(self.total_resistance() > 0.0) {
            errs.push("r_ohm + r_rad_ohm must be positive".into());
        }
        match (self.topology, self.l_henry) {
            (Topology::SeriesRlc, None) => {
                errs.push("series_rlc requires inductance (l_henry)".into());
            }
            (Topology::SeriesRlc, Some(l)) if !(l > 0.0 && l.is_finite()) => {
                errs.push(format!("inductance must be positive and finite (l_henry = {l})"));
            }
            (Topology::SeriesRc | Topology::ParallelRc, Some(_)) => {
                errs.push(format!("l_henry is only valid for series_rlc, not {}", self.topology));
            }
            _ => {}
        }
        if self.topology == Topology::ParallelRc {
            if !(self.r_ohm > 0.0) {
                errs.push("parallel_rc requires r_ohm > 0 (conductive branch must conduct)".into());
            }
            if !(self.r_rad_ohm > 0.0) {
                errs.push("parallel_rc requires r_rad_ohm > 0 (radiative branch must conduct)".into());
            }
        }
        ValidationError::from_messages(errs)
    }

    /// Damping factor `zeta = ((R + R_rad) / 2) sqrt(C / L)`; `None` unless series RLC.
    pub fn zeta(&self) -> Option<f64> {
        match (self.topology, self.l_henry) {
            (Topology::SeriesRlc, Some(l)) => Some(0.5 * self.total_resistance() * (self.c_farad / l).sqrt()),
            _ => None,
        }
    }

    pub fn damping(&self) -> Option<Damping> {
        self.zeta().map(Damping::classify)
    }
}

/// Returns the spec unchanged when every invariant holds.
pub fn validate_spec(spec: CircuitSpec) -> std::result::Result<CircuitSpec, ValidationError> {
    spec.validate().map(|()| spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    Underdamped,
    Critical,
    Overdamped,
}

impl Damping {
    pub fn classify(zeta: f64) -> Self {
        if (zeta - 1.0).abs() < CRITICAL_DAMPING_TOLERANCE {
            Damping::Critical
        } else if zeta < 1.0 {
            Damping::Underdamped
        } else {
            Damping::Overdamped
        }
    }
}

/// Geometry of the effective radiator formed by the switching current path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiationGeometry {
    pub path_length_m: f64,
    pub frequency_hz: f64,
}

impl RadiationGeometry {
    pub fn new(path_length_m: f64, frequency_hz: f64) -> std::result::Result<Self, ValidationError> {
        let g = Self {
            path_length_m,
            frequency_hz,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        let mut errs = Vec::new();
        if !(self.path_length_m >= 0.0 && self.path_length_m.is_finite()) {
            errs.push(format!("path length must be non-negative (path_length_m = {})", self.path_length_m));
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            errs.push(format!("frequency must be positive (frequency_hz = {})", self.frequency_hz));
        }
        ValidationError::from_messages(errs)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn electrical_length(&self) -> f64 {
        self.path_length_m / self.wavelength_m()
    }

    /// False once `l/lambda` exceeds [`SHORT_DIPOLE_LIMIT`]; the resistance is still computed.
    pub fn short_dipole_valid(&self) -> bool {
        self.electrical_length() <= SHORT_DIPOLE_LIMIT
    }
}

/// Short-dipole radiation resistance `80 pi^2 (l / lambda)^2` in ohms.
pub fn radiation_resistance(geom: &RadiationGeometry) -> Result<f64> {
    geom.validate()?;
    let x = geom.electrical_length();
    Ok(80.0 * PI * PI * x * x)
}

/// Characteristic quantities of a spec. Fields that do not apply to the
/// topology are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub tau_s: Option<f64>,
    pub omega0_rad_s: Option<f64>,
    pub zeta: Option<f64>,
    pub r_parallel_ohm: Option<f64>,
}

pub fn derive_params(spec: &CircuitSpec) -> Result<DerivedParams> {
    spec.validate()?;
    let c = spec.c_farad;
    Ok(match spec.topology {
        Topology::SeriesRc => DerivedParams {
            tau_s: Some(spec.total_resistance() * c),
            omega0_rad_s: None,
            zeta: None,
            r_parallel_ohm: None,
        },
        Topology::ParallelRc => {
            let rp = 1.0 / (1.0 / spec.r_ohm + 1.0 / spec.r_rad_ohm);
            DerivedParams {
                tau_s: Some(rp * c),
                omega0_rad_s: None,
                zeta: None,
                r_parallel_ohm: Some(rp),
            }
        }
        Topology::SeriesRlc => {
            let l = spec.inductance();
            DerivedParams {
                tau_s: None,
                omega0_rad_s: Some(1.0 / (l * c).sqrt()),
                zeta: spec.zeta(),
                r_parallel_ohm: None,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radiation_resistance_tenth_wavelength() {
        let g = RadiationGeometry::new(0.1, 299_792_458.0 * 10.0).unwrap();
        assert_relative_eq!(g.electrical_length(), 1.0, max_relative = 1e-15);
        let g = RadiationGeometry::new(0.1, 299.792458e6).unwrap();
        let r = radiation_resistance(&g).unwrap();
        assert_relative_eq!(r, 80.0 * PI * PI * 0.01, max_relative = 1e-12);
        assert!((r - 7.8957).abs() < 1e-4);
        assert!(g.short_dipole_valid());
    }

    #[test]
    fn radiation_resistance_quadratic_and_zero() {
        let f = 299.792458e6;
        let r1 = radiation_resistance(&RadiationGeometry::new(0.1, f).unwrap()).unwrap();
        let r05 = radiation_resistance(&RadiationGeometry::new(0.05, f).unwrap()).unwrap();
        assert!((r05 - 1.9739).abs() < 1e-4);
        assert_relative_eq!(r05 * 4.0, r1, max_relative = 1e-12);
        assert_eq!(radiation_resistance(&RadiationGeometry::new(0.0, f).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn long_radiator_is_flagged_but_computed() {
        let g = RadiationGeometry::new(0.5, 299.792458e6).unwrap();
        assert!(!g.short_dipole_valid());
        assert!(radiation_resistance(&g).unwrap() > 0.0);
    }

    #[test]
    fn nonpositive_frequency_rejected() {
        assert!(RadiationGeometry::new(0.1, 0.0).is_err());
        let g = RadiationGeometry {
            path_length_m: 0.1,
            frequency_hz: -1.0,
        };
        assert!(matches!(radiation_resistance(&g), Err(Error::Validation(_))));
    }

    #[test]
    fn derive_series_rc() {
        let p = derive_params(&CircuitSpec::series_rc(1e3, 0.0, 1e-6, 1.0)).unwrap();
        assert_relative_eq!(p.tau_s.unwrap(), 1e-3, max_relative = 1e-15);
        assert!(p.zeta.is_none() && p.omega0_rad_s.is_none() && p.r_parallel_ohm.is_none());
    }

    #[test]
    fn derive_parallel_rc() {
        let p = derive_params(&CircuitSpec::parallel_rc(2.0, 2.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.r_parallel_ohm, Some(1.0));
        assert_eq!(p.tau_s, Some(1.0));
    }

    #[test]
    fn derive_series_rlc() {
        let spec = CircuitSpec::series_rlc(1.5, 0.5, 1e-3, 1e-6, 1.0);
        let p = derive_params(&spec).unwrap();
        assert!((p.omega0_rad_s.unwrap() - 31_622.8).abs() < 0.1);
        assert!((p.zeta.unwrap() - 0.0316).abs() < 1e-4);
        assert_eq!(spec.damping(), Some(Damping::Underdamped));
    }

    #[test]
    fn zeta_scaling_pattern() {
        // zeta(kR, k^2 L, C) = zeta(R, L, C)
        let base = CircuitSpec::series_rlc(3.0, 1.0, 2e-6, 5e-9, 1.0);
        for k in [0.5, 2.0, 7.0] {
            let scaled = CircuitSpec::series_rlc(3.0 * k, 1.0 * k, 2e-6 * k * k, 5e-9, 1.0);
            assert_relative_eq!(base.zeta().unwrap(), scaled.zeta().unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn zeta_matches_discriminant() {
        let (l, c): (f64, f64) = (1e-6, 1e-9);
        let crit = 2.0 * (l / c).sqrt();
        for rt in [0.1 * crit, 0.99 * crit, 1.01 * crit, 10.0 * crit] {
            let s = CircuitSpec::series_rlc(rt, 0.0, l, c, 1.0);
            assert_eq!(s.zeta().unwrap() < 1.0, rt < crit);
        }
    }

    #[test]
    fn validation_reports_every_violation() {
        let bad = CircuitSpec {
            topology: Topology::SeriesRlc,
            r_ohm: -1.0,
            l_henry: None,
            c_farad: 0.0,
            r_rad_ohm: 0.0,
            v0_volt: 1.0,
        };
        let err = bad.validate().unwrap_err();
        assert!(err.messages.iter().any(|m| m.contains("capacitance must be positive")));
        assert!(err.messages.iter().any(|m| m.contains("l_henry")));
        assert!(err.messages.iter().any(|m| m.contains("r_ohm")));
        assert_eq!(err.messages.len(), 3);
    }

    #[test]
    fn validation_topology_specific_rules() {
        assert!(CircuitSpec::parallel_rc(0.0, 1.0, 1.0, 1.0).validate().is_err());
        assert!(CircuitSpec::parallel_rc(1.0, 0.0, 1.0, 1.0).validate().is_err());
        assert!(CircuitSpec::series_rc(0.0, 0.0, 1.0, 1.0).validate().is_err());
        assert!(CircuitSpec::series_rc(0.0, 1.0, 1.0, 1.0).validate().is_ok());
        let mut rc_with_l = CircuitSpec::series_rc(1.0, 1.0, 1.0, 1.0);
        rc_with_l.l_henry = Some(1.0);
        assert!(rc_with_l.validate().is_err());
    }

    #[test]
    fn valid_spec_passes_unchanged() {
        let s = CircuitSpec::series_rlc(1.0, 2.0, 3e-9, 4e-12, 1.2);
        assert_eq!(validate_spec(s).unwrap(), s);
    }

    #[test]
    fn topology_tokens() {
        for t in Topology::ALL {
            assert_eq!(t.token().parse::<Topology>().unwrap(), t);
        }
        assert_eq!("SeriesRLC".parse::<Topology>().unwrap(), Topology::SeriesRlc);
        assert!("bridge".parse::<Topology>().is_err());
    }
}
