//! Config-file schema and canonical hashing.
//!
//! Shape (JSON): field declared once, all rationals as `"p/q"` strings,
//! scalars either a plain rational string or `{"coeffs": [...]}` in the
//! declared field:
//!
//! ```json
//! {
//!   "field": { "minpoly": [-1, -1, 1], "interval": ["3/2", "2"] },
//!   "systems": [
//!     { "maps": [ { "ratio": "1/3", "translation": "0" } ], "probs": ["1"] }
//!   ],
//!   "theta": ["1"],
//!   "seed": 12345
//! }
//! ```

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{parse_rational, FieldError, FieldScalar, NumberField};
use crate::model::{Ifs, ModelError, Rifs, SimilarityMap};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    pub systems: Vec<SystemSpec>,
    pub theta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpec {
    /// integer coefficients `[c0, ..., cg]`, monic
    pub minpoly: Vec<i64>,
    /// isolating interval for the intended real root
    pub interval: (String, String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub maps: Vec<MapSpec>,
    pub probs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpec {
    pub ratio: ScalarSpec,
    pub translation: ScalarSpec,
}

/// A field scalar in config form: a rational string, or explicit coefficients
/// over the declared field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Rational(String),
    Coeffs { coeffs: Vec<String> },
}

impl ScalarSpec {
    pub fn build(&self, field: &Arc<NumberField>) -> Result<FieldScalar, FieldError> {
        match self {
            ScalarSpec::Rational(s) => Ok(field.from_rational(parse_rational(s)?)),
            ScalarSpec::Coeffs { coeffs } => {
                let coeffs = coeffs
                    .iter()
                    .map(|c| parse_rational(c))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(field.scalar(coeffs))
            }
        }
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build_field(&self) -> Result<Arc<NumberField>, ConfigError> {
        match &self.field {
            None => Ok(NumberField::rationals()),
            Some(spec) => {
                let minpoly = spec.minpoly.iter().map(|&c| BigInt::from(c)).collect();
                let lo = parse_rational(&spec.interval.0)?;
                let hi = parse_rational(&spec.interval.1)?;
                Ok(NumberField::new(minpoly, lo, hi)?)
            }
        }
    }

    pub fn build(&self) -> Result<Rifs, ConfigError> {
        let field = self.build_field()?;
        let mut systems = Vec::with_capacity(self.systems.len());
        for spec in &self.systems {
            let maps = spec
                .maps
                .iter()
                .map(|m| {
                    Ok(SimilarityMap {
                        ratio: m.ratio.build(&field)?,
                        translation: m.translation.build(&field)?,
                    })
                })
                .collect::<Result<Vec<_>, FieldError>>()?;
            let probs = spec
                .probs
                .iter()
                .map(|p| parse_rational(p))
                .collect::<Result<Vec<BigRational>, _>>()?;
            systems.push(Ifs::new(maps, probs)?);
        }
        let theta = self
            .theta
            .iter()
            .map(|t| parse_rational(t))
            .collect::<Result<Vec<BigRational>, _>>()?;
        Ok(Rifs::new(field, systems, theta)?)
    }

    /// Hash of the geometry and probabilities (field, maps, probs) after
    /// normalizing every rational to canonical `p/q` form. The selection
    /// vector theta and the seed are excluded: the characteristic-vector
    /// graph does not depend on them, so caches stay valid across theta.
    pub fn graph_hash(&self) -> Result<String, ConfigError> {
        let field = self.build_field()?;
        let mut h = Sha256::new();
        h.update(b"rifs-graph-v1");
        for c in field.minpoly() {
            h.update(c.to_string().as_bytes());
            h.update([0x1f]);
        }
        let (lo, hi) = field.isolating_interval();
        h.update(crate::field::format_rational(lo).as_bytes());
        h.update([0x1f]);
        h.update(crate::field::format_rational(hi).as_bytes());
        for spec in &self.systems {
            h.update([0x1e]);
            for (m, p) in spec.maps.iter().zip(&spec.probs) {
                let ratio = m.ratio.build(&field)?;
                let translation = m.translation.build(&field)?;
                for c in ratio.coeffs().iter().chain(translation.coeffs()) {
                    h.update(crate::field::format_rational(c).as_bytes());
                    h.update([0x1f]);
                }
                h.update(crate::field::format_rational(&parse_rational(p)?).as_bytes());
                h.update([0x1f]);
            }
        }
        Ok(hex_string(&h.finalize()))
    }

    /// Hash of the full config including theta and seed.
    pub fn config_hash(&self) -> Result<String, ConfigError> {
        let mut h = Sha256::new();
        h.update(b"rifs-config-v1");
        h.update(self.graph_hash()?.as_bytes());
        for t in &self.theta {
            h.update(crate::field::format_rational(&parse_rational(t)?).as_bytes());
            h.update([0x1f]);
        }
        h.update(self.seed.unwrap_or(0).to_le_bytes());
        Ok(hex_string(&h.finalize()))
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEC61: &str = r#"{
        "systems": [
            { "maps": [
                { "ratio": "1/3", "translation": "0" },
                { "ratio": "1/3", "translation": "1/3" },
                { "ratio": "1/3", "translation": "2/3" }
              ],
              "probs": ["1/6", "2/3", "1/6"] },
            { "maps": [
                { "ratio": "1/3", "translation": "0" },
                { "ratio": "1/3", "translation": "1/9" },
                { "ratio": "1/3", "translation": "1/3" },
                { "ratio": "1/3", "translation": "2/3" }
              ],
              "probs": ["1/6", "1/6", "1/2", "1/6"] }
        ],
        "theta": ["1/2", "1/2"],
        "seed": 2024
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ConfigFile::from_json(SEC61).unwrap();
        let rifs = cfg.build().unwrap();
        assert_eq!(rifs.alphabet_len(), 2);
        assert!(rifs.is_equicontractive());
        assert_eq!(cfg.seed, Some(2024));
    }

    #[test]
    fn golden_field_scalar_coeffs() {
        let text = r#"{
            "field": { "minpoly": [-1, -1, 1], "interval": ["3/2", "2"] },
            "systems": [
                { "maps": [
                    { "ratio": { "coeffs": ["-1", "1"] }, "translation": "0" },
                    { "ratio": { "coeffs": ["-1", "1"] }, "translation": { "coeffs": ["2", "-1"] } }
                  ],
                  "probs": ["1/4", "3/4"] }
            ],
            "theta": ["1"]
        }"#;
        let cfg = ConfigFile::from_json(text).unwrap();
        let rifs = cfg.build().unwrap();
        // ratio = rho - 1 = 1/rho ~ 0.618
        let r = rifs.common_ratio().unwrap().to_f64();
        assert!((r - 0.6180339887498949).abs() < 1e-12);
        // translation + ratio = 1 exactly
        let m = &rifs.systems()[0].maps()[1];
        assert_eq!(m.translation.add(&m.ratio).unwrap(), rifs.field().one());
    }

    #[test]
    fn hashes_ignore_seed_and_theta_for_graph() {
        let a = ConfigFile::from_json(SEC61).unwrap();
        let mut b = a.clone();
        b.seed = Some(999);
        b.theta = vec!["1/4".into(), "3/4".into()];
        assert_eq!(a.graph_hash().unwrap(), b.graph_hash().unwrap());
        assert_ne!(a.config_hash().unwrap(), b.config_hash().unwrap());
    }

    #[test]
    fn hash_is_representation_independent() {
        let a = ConfigFile::from_json(SEC61).unwrap();
        let changed = SEC61.replace("\"1/3\"", "\"2/6\"");
        let b = ConfigFile::from_json(&changed).unwrap();
        assert_eq!(a.graph_hash().unwrap(), b.graph_hash().unwrap());
    }
}
