//! Run configuration: command-line flags and the equivalent config file.
//!
//! A config file (JSON, or TOML when the path ends in `.toml`) uses the flag
//! names as keys; flags given on the command line take precedence.
//!
//! ```toml
//! norm = "mixed"
//! p = 3.0
//! seed = 42
//! samples = 1000
//! tol = 1e-6
//! ```
//!
//! Norm specs: `lp:P` (dimension from the inputs, else 3), `lp:P:DIM`,
//! `mixed` or `default` (the default mixed-block model),
//! `mixed:P:SIZE@Q,SIZE@Q,...`, inline JSON starting with `{`, or
//! `file:PATH` holding a JSON norm config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{Block, NormConfig, NormModel, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every tunable of a command. Absent fields take command defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        let bad = |e: String| Error::InvalidArgument(format!("malformed config {}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
        }
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Self {
        Self {
            norm: over.norm.or(self.norm),
            p: over.p.or(self.p),
            subspace: over.subspace.or(self.subspace),
            x: over.x.or(self.x),
            y: over.y.or(self.y),
            seed: over.seed.or(self.seed),
            samples: over.samples.or(self.samples),
            tol: over.tol.or(self.tol),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerances must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Comma-separated reals.
pub fn parse_vector(s: &str) -> Result<Vector> {
    let coords = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("not a number: {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Vector::new(coords)
}

/// Basis vectors separated by `;`.
pub fn parse_subspace(s: &str) -> Result<Vec<Vector>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_vector).collect()
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::InvalidArgument(format!("bad {what} {s:?}")))
}

/// Parses a norm spec; `dim_hint` fills in the dimension of `lp:P`.
pub fn parse_norm(spec: &str, dim_hint: Option<usize>) -> Result<NormModel> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        let cfg: NormConfig =
            serde_json::from_str(spec).map_err(|e| Error::InvalidArgument(format!("bad norm config: {e}")))?;
        return NormModel::try_from(cfg);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read norm file {path}: {e}")))?;
        return parse_norm(&text, dim_hint);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["mixed"] | ["default"] => Ok(NormModel::default_mixed()),
        ["lp", p] => NormModel::lp(parse_f64(p, "exponent")?, dim_hint.unwrap_or(3)),
        ["lp", p, d] => {
            let dim = d
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad dimension {d:?}")))?;
            NormModel::lp(parse_f64(p, "exponent")?, dim)
        }
        ["mixed", p, blocks] | ["mixed", p, blocks, _] => {
            let blocks = blocks
                .split(',')
                .map(|b| {
                    let (size, q) = b
                        .split_once('@')
                        .ok_or_else(|| Error::InvalidArgument(format!("block {b:?} is not SIZE@Q")))?;
                    Ok(Block {
                        size: size
                            .trim()
                            .parse()
                            .map_err(|_| Error::InvalidArgument(format!("bad block size {size:?}")))?,
                        q: parse_f64(q.trim(), "block exponent")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let scale = match parts.get(3) {
                Some(s) => parse_f64(s, "scale")?,
                None => 1.0,
            };
            NormModel::mixed_block(parse_f64(p, "exponent")?, blocks, scale)
        }
        _ => Err(Error::InvalidArgument(format!("unrecognised norm spec {spec:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormKind;

    #[test]
    fn norm_specs() {
        assert_eq!(parse_norm("lp:3", Some(2)).unwrap(), NormModel::lp(3.0, 2).unwrap());
        assert_eq!(parse_norm("lp:1.5:4", None).unwrap().dim(), 4);
        assert_eq!(parse_norm("default", None).unwrap(), NormModel::default_mixed());
        assert_eq!(parse_norm("mixed:4:1@2,2@2", None).unwrap(), NormModel::default_mixed());
        let j = parse_norm(r#"{"kind": "lp", "p": 2.0, "dim": 5}"#, None).unwrap();
        assert!(matches!(j.kind(), NormKind::Lp { .. }) && j.dim() == 5);
        assert!(parse_norm("hilbert", None).is_err());
    }

    #[test]
    fn vectors_and_subspaces() {
        assert_eq!(parse_vector("1, -1").unwrap().as_slice(), &[1.0, -1.0]);
        assert_eq!(parse_subspace("1,1,0;0,0,1").unwrap().len(), 2);
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn toml_and_json_configs_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(&t, "norm = \"lp:3\"\nseed = 7\ntol = 1e-6\nformat = \"csv\"\n").unwrap();
        let j = dir.path().join("c.json");
        std::fs::write(&j, r#"{"norm": "lp:3", "seed": 7, "tol": 1e-6, "format": "csv"}"#).unwrap();
        assert_eq!(RunConfig::load(&t).unwrap(), RunConfig::load(&j).unwrap());
        std::fs::write(&j, r#"{"nrom": "lp:3"}"#).unwrap();
        assert!(RunConfig::load(&j).is_err());
    }
}
