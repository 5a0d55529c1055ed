use serde::{Deserialize, Serialize};

use super::{radiation_resistance, CircuitSpec, RadiationGeometry, Topology};
use crate::error::{Error, Result, ValidationError};

/// Raw circuit configuration as read from a file, before resolution into a
/// [`CircuitSpec`]. Keys match the on-disk names exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub topology: Option<Topology>,
    pub r_ohm: Option<f64>,
    pub l_henry: Option<f64>,
    pub c_farad: Option<f64>,
    pub r_rad_ohm: Option<f64>,
    pub v0_volt: Option<f64>,
    pub path_length_m: Option<f64>,
    pub frequency_hz: Option<f64>,
}

/// Parses the `key = value` format: one pair per line, `#` starts a comment,
/// values are SI floats except `topology`, which is a bare or quoted token.
pub fn parse_kv(text: &str) -> Result<SpecConfig> {
    let mut cfg = SpecConfig::default();
    let mut errs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errs.push(format!("line {}: expected `key = value`", lineno + 1));
            continue;
        };
        let key = key.trim();
        let value = value.trim().trim_matches('"').trim_matches('\'');
        let num = |errs: &mut Vec<String>| match value.parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                errs.push(format!("line {}: `{key}` is not a number: `{value}`", lineno + 1));
                None
            }
        };
        let slot = match key {
            "topology" => {
                match value.parse::<Topology>() {
                    Ok(t) => cfg.topology = Some(t),
                    Err(e) => errs.push(format!("line {}: {e}", lineno + 1)),
                }
                continue;
            }
            "r_ohm" => &mut cfg.r_ohm,
            "l_henry" => &mut cfg.l_henry,
            "c_farad" => &mut cfg.c_farad,
            "r_rad_ohm" => &mut cfg.r_rad_ohm,
            "v0_volt" => &mut cfg.v0_volt,
            "path_length_m" => &mut cfg.path_length_m,
            "frequency_hz" => &mut cfg.frequency_hz,
            other => {
                errs.push(format!("line {}: unknown key `{other}`", lineno + 1));
                continue;
            }
        };
        if slot.is_some() {
            errs.push(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
        *slot = num(&mut errs);
    }
    ValidationError::from_messages(errs)?;
    Ok(cfg)
}

/// A resolved configuration plus any non-fatal notes about how it was resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub spec: CircuitSpec,
    pub geometry: Option<RadiationGeometry>,
    pub warnings: Vec<String>,
}

impl SpecConfig {
    pub fn from_spec(spec: &CircuitSpec) -> Self {
        Self {
            topology: Some(spec.topology),
            r_ohm: Some(spec.r_ohm),
            l_henry: spec.l_henry,
            c_farad: Some(spec.c_farad),
            r_rad_ohm: Some(spec.r_rad_ohm),
            v0_volt: Some(spec.v0_volt),
            path_length_m: None,
            frequency_hz: None,
        }
    }

    /// Builds and validates the spec. A direct `r_rad_ohm` wins over geometry;
    /// when both are present a warning is recorded.
    pub fn resolve(&self) -> Result<Resolved> {
        let mut errs = Vec::new();
        let mut warnings = Vec::new();
        let mut need = |name: &str, v: Option<f64>| {
            v.unwrap_or_else(|| {
                errs.push(format!("missing required key `{name}`"));
                f64::NAN
            })
        };
        let r_ohm = need("r_ohm", self.r_ohm);
        let c_farad = need("c_farad", self.c_farad);
        let v0_volt = need("v0_volt", self.v0_volt);

        let geometry = match (self.path_length_m, self.frequency_hz) {
            (Some(l), Some(f)) => match RadiationGeometry::new(l, f) {
                Ok(g) => Some(g),
                Err(e) => {
                    errs.extend(e.messages);
                    None
                }
            },
            (None, None) => None,
            _ => {
                errs.push("path_length_m and frequency_hz must be given together".into());
                None
            }
        };
        if let Some(g) = &geometry {
            if !g.short_dipole_valid() {
                warnings.push(format!(
                    "l/lambda = {:.4} exceeds {}; short-dipole radiation resistance is approximate",
                    g.electrical_length(),
                    super::SHORT_DIPOLE_LIMIT
                ));
            }
        }
        let r_rad_ohm = match (self.r_rad_ohm, &geometry) {
            (Some(direct), Some(g)) => {
                let derived = radiation_resistance(g).unwrap_or(f64::NAN);
                warnings.push(format!(
                    "r_rad_ohm = {direct} given directly; ignoring geometry-derived value {derived}"
                ));
                direct
            }
            (Some(direct), None) => direct,
            (None, Some(g)) => radiation_resistance(g)?,
            (None, None) => {
                errs.push("missing `r_rad_ohm` (or `path_length_m` + `frequency_hz`)".into());
                f64::NAN
            }
        };
        let topology = self.topology.unwrap_or_else(|| {
            errs.push("missing required key `topology`".into());
            Topology::SeriesRc
        });
        ValidationError::from_messages(errs)?;

        let spec = CircuitSpec {
            topology,
            r_ohm,
            l_henry: self.l_henry,
            c_farad,
            r_rad_ohm,
            v0_volt,
        };
        spec.validate().map_err(Error::from)?;
        Ok(Resolved {
            spec,
            geometry,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_scientific_notation() {
        let text = "# load\ntopology = series_rlc\nr_ohm = 1.5e0  # conductive\nl_henry=1e-3\n\
                    c_farad = 1e-6\nr_rad_ohm = 0.5\nv0_volt = 1\n";
        let r = parse_kv(text).unwrap().resolve().unwrap();
        assert_eq!(r.spec, CircuitSpec::series_rlc(1.5, 0.5, 1e-3, 1e-6, 1.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn quoted_topology_token() {
        let cfg = parse_kv("topology = \"parallel_rc\"").unwrap();
        assert_eq!(cfg.topology, Some(Topology::ParallelRc));
    }

    #[test]
    fn geometry_derives_radiation_resistance() {
        let text = "topology = series_rc\nr_ohm = 10\nc_farad = 1e-12\nv0_volt = 1\n\
                    path_length_m = 0.1\nfrequency_hz = 299.792458e6\n";
        let r = parse_kv(text).unwrap().resolve().unwrap();
        assert!((r.spec.r_rad_ohm - 7.8957).abs() < 1e-4);
    }

    #[test]
    fn direct_radiation_resistance_wins_with_warning() {
        let text = "topology = series_rc\nr_ohm = 10\nc_farad = 1e-12\nv0_volt = 1\nr_rad_ohm = 3\n\
                    path_length_m = 0.1\nfrequency_hz = 299.792458e6\n";
        let r = parse_kv(text).unwrap().resolve().unwrap();
        assert_eq!(r.spec.r_rad_ohm, 3.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn errors_are_aggregated() {
        let err = parse_kv("topology = loop\nr_ohm = abc\nbogus = 1\nnot a pair").unwrap_err();
        let Error::Validation(v) = err else { panic!() };
        assert_eq!(v.messages.len(), 4);
    }

    #[test]
    fn missing_inductance_is_named() {
        let text = "topology = series_rlc\nr_ohm = 1\nc_farad = 1e-6\nr_rad_ohm = 1\nv0_volt = 1\n";
        let err = parse_kv(text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("l_henry"));
    }
}
