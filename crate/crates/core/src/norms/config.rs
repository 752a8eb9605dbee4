//! Structured configuration documents for norm models.
//!
//! ```json
//! {"kind": "lp", "p": 3.0, "dim": 3}
//! {"kind": "mixed_block", "p": 4.0, "blocks": [{"size": 1, "q": 2.0}, {"size": 2, "q": 2.0}]}
//! {"kind": "sum_space", "p": 3.0, "components": [{"kind": "lp", "p": 3.0, "dim": 2}]}
//! {"kind": "quotient", "ambient": {...}, "subspace": [[1.0, 1.0, 0.0]]}
//! ```
//!
//! `scale` is optional on `mixed_block` (default 1). Converting a model to its
//! config and back yields an equal model.

use serde::{Deserialize, Serialize};

use super::model::{Block, NormKind, NormModel};
use super::Vector;
use crate::error::Error;
use crate::ortho::SubspaceBasis;
use crate::quotient::QuotientSpace;

fn one() -> f64 {
    1.0
}

fn is_one(s: &f64) -> bool {
    *s == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormConfig {
    Lp {
        p: f64,
        dim: usize,
    },
    MixedBlock {
        p: f64,
        blocks: Vec<Block>,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
    },
    SumSpace {
        p: f64,
        components: Vec<NormConfig>,
    },
    Quotient {
        ambient: Box<NormConfig>,
        subspace: Vec<Vec<f64>>,
    },
}

impl TryFrom<NormConfig> for NormModel {
    type Error = Error;

    fn try_from(cfg: NormConfig) -> Result<Self, Error> {
        match cfg {
            NormConfig::Lp { p, dim } => NormModel::lp(p, dim),
            NormConfig::MixedBlock { p, blocks, scale } => NormModel::mixed_block(p, blocks, scale),
            NormConfig::SumSpace { p, components } => {
                let comps = components
                    .into_iter()
                    .map(NormModel::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                NormModel::sum_space(p, comps)
            }
            NormConfig::Quotient { ambient, subspace } => {
                let ambient = NormModel::try_from(*ambient)?;
                let basis = subspace
                    .into_iter()
                    .map(Vector::new)
                    .collect::<Result<Vec<_>, _>>()?;
                let sub = SubspaceBasis::new(basis, ambient)?;
                Ok(QuotientSpace::new(sub)?.coordinate_model())
            }
        }
    }
}

impl From<NormModel> for NormConfig {
    fn from(m: NormModel) -> Self {
        NormConfig::from(&m)
    }
}

impl From<&NormModel> for NormConfig {
    fn from(m: &NormModel) -> Self {
        match m.kind() {
            NormKind::Lp { p } => NormConfig::Lp { p: *p, dim: m.dim() },
            NormKind::MixedBlock { p, blocks, scale } => NormConfig::MixedBlock {
                p: *p,
                blocks: blocks.clone(),
                scale: *scale,
            },
            NormKind::SumSpace { p, components } => NormConfig::SumSpace {
                p: *p,
                components: components.iter().map(NormConfig::from).collect(),
            },
            NormKind::Quotient(q) => NormConfig::Quotient {
                ambient: Box::new(NormConfig::from(q.ambient())),
                subspace: q
                    .subspace()
                    .vectors()
                    .iter()
                    .map(|v| v.as_slice().to_vec())
                    .collect(),
            },
        }
    }
}
