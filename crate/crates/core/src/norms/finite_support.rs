use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{lp_norm, NormKind, NormModel};
use super::Vector;
use crate::error::{Error, Result};

/// Position of a block inside a two-stream `ℓ_p`-sum
/// `(W ⊕_p W ⊕_p …) ⊕_p (X ⊕_p X ⊕_p …)`.
///
/// Finite sums ([`NormKind::SumSpace`]) address their components through the
/// `X` stream only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "stream", content = "index", rename_all = "lowercase")]
pub enum BlockIndex {
    W(usize),
    X(usize),
}

/// An element of an `ℓ_p`-sum with finitely many stored blocks; absent blocks are zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<BlockEntry>", into = "Vec<BlockEntry>")]
pub struct FiniteSupportElement {
    entries: BTreeMap<BlockIndex, Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BlockEntry {
    block: BlockIndex,
    coords: Vector,
}

impl From<Vec<BlockEntry>> for FiniteSupportElement {
    fn from(v: Vec<BlockEntry>) -> Self {
        Self {
            entries: v.into_iter().map(|e| (e.block, e.coords)).collect(),
        }
    }
}

impl From<FiniteSupportElement> for Vec<BlockEntry> {
    fn from(z: FiniteSupportElement) -> Self {
        z.entries
            .into_iter()
            .map(|(block, coords)| BlockEntry { block, coords })
            .collect()
    }
}

impl FiniteSupportElement {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blocks `X(0), X(1), …` in order, the layout used by finite sums.
    pub fn from_blocks(blocks: Vec<Vector>) -> Self {
        Self {
            entries: blocks
                .into_iter()
                .enumerate()
                .map(|(i, b)| (BlockIndex::X(i), b))
                .collect(),
        }
    }

    pub fn with(mut self, idx: BlockIndex, v: Vector) -> Self {
        self.insert(idx, v);
        self
    }

    pub fn insert(&mut self, idx: BlockIndex, v: Vector) {
        self.entries.insert(idx, v);
    }

    pub fn get(&self, idx: BlockIndex) -> Option<&Vector> {
        self.entries.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BlockIndex, &Vector)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// Number of stored blocks.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    /// `α·self + β·other`, blockwise over the union of supports.
    pub fn lincomb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.entries {
            out.insert(*k, v.scaled(alpha));
        }
        for (k, v) in &other.entries {
            match out.get_mut(k) {
                Some(acc) => {
                    if acc.dim() != v.dim() {
                        return Err(Error::BlockLayout(format!(
                            "block {k:?} has dimensions {} and {}",
                            acc.dim(),
                            v.dim()
                        )));
                    }
                    *acc = acc.axpy(beta, v);
                }
                None => {
                    out.insert(*k, v.scaled(beta));
                }
            }
        }
        Ok(Self { entries: out })
    }

    /// Largest blockwise coordinate difference (absent blocks read as zero).
    pub fn linf_distance(&self, other: &Self) -> f64 {
        let diff = self.lincomb(1.0, other, -1.0);
        match diff {
            Ok(d) => d.entries.values().fold(0.0, |m, v| m.max(v.max_abs())),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Anything that assigns a component norm to block positions of an `ℓ_p`-sum.
pub trait BlockSpace {
    fn exponent(&self) -> f64;
    fn block_model(&self, idx: BlockIndex) -> Result<&NormModel>;

    /// Checks every stored block against its component dimension.
    fn validate(&self, z: &FiniteSupportElement) -> Result<()> {
        for (idx, v) in z.iter() {
            let m = self.block_model(idx)?;
            if v.dim() != m.dim() {
                return Err(Error::BlockLayout(format!(
                    "block {idx:?} has dimension {}, component expects {}",
                    v.dim(),
                    m.dim()
                )));
            }
        }
        Ok(())
    }

    /// `(Σ ‖zᵢ‖ᵢᵖ)^{1/p}` over the stored blocks.
    fn sum_norm(&self, z: &FiniteSupportElement) -> Result<f64> {
        self.validate(z)?;
        let norms = z
            .iter()
            .map(|(idx, v)| self.block_model(idx)?.norm(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(lp_norm(&norms, self.exponent()))
    }
}

impl BlockSpace for NormModel {
    fn exponent(&self) -> f64 {
        match self.kind() {
            NormKind::SumSpace { p, .. } => *p,
            _ => f64::NAN,
        }
    }

    fn block_model(&self, idx: BlockIndex) -> Result<&NormModel> {
        let NormKind::SumSpace { components, .. } = self.kind() else {
            return Err(Error::Unsupported(format!("{self} is not a sum space")));
        };
        match idx {
            BlockIndex::X(i) if i < components.len() => Ok(&components[i]),
            _ => Err(Error::BlockLayout(format!(
                "block {idx:?} outside the {} components of the sum",
                components.len()
            ))),
        }
    }
}

/// The infinite two-stream sum `(W ⊕_p W ⊕_p …) ⊕_p (X ⊕_p X ⊕_p …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSum {
    pub p: f64,
    pub w: NormModel,
    pub x: NormModel,
}

impl BlockSpace for SequenceSum {
    fn exponent(&self) -> f64 {
        self.p
    }

    fn block_model(&self, idx: BlockIndex) -> Result<&NormModel> {
        Ok(match idx {
            BlockIndex::W(_) => &self.w,
            BlockIndex::X(_) => &self.x,
        })
    }
}

/// Concatenates the blocks of a finite-sum element into one coordinate vector.
pub fn flatten(z: &FiniteSupportElement, sum: &NormModel) -> Result<Vector> {
    let NormKind::SumSpace { components, .. } = sum.kind() else {
        return Err(Error::Unsupported(format!("{sum} is not a sum space")));
    };
    sum.validate(z)?;
    let mut out = Vec::with_capacity(sum.dim());
    for (i, c) in components.iter().enumerate() {
        match z.get(BlockIndex::X(i)) {
            Some(v) => out.extend_from_slice(v),
            None => out.extend(std::iter::repeat_n(0.0, c.dim())),
        }
    }
    Ok(Vector::from(out))
}

/// Splits a coordinate vector of a finite sum into `X(i)` blocks (all stored).
pub fn unflatten(x: &Vector, sum: &NormModel) -> Result<FiniteSupportElement> {
    let NormKind::SumSpace { components, .. } = sum.kind() else {
        return Err(Error::Unsupported(format!("{sum} is not a sum space")));
    };
    x.check_dim(sum.dim())?;
    let mut start = 0;
    let mut blocks = Vec::with_capacity(components.len());
    for c in components {
        blocks.push(Vector::from(&x.as_slice()[start..start + c.dim()]));
        start += c.dim();
    }
    Ok(FiniteSupportElement::from_blocks(blocks))
}

/// `‖z‖` for a finite-support element of a sum space.
pub fn norm_eval_blocks<S: BlockSpace + ?Sized>(z: &FiniteSupportElement, space: &S) -> Result<f64> {
    space.sum_norm(z)
}
