use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::NormConfig;
use super::Vector;
use crate::error::{Error, Result};
use crate::quotient::QuotientSpace;

/// One block of a [`NormKind::MixedBlock`] norm: `size` consecutive coordinates
/// measured with the inner exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub size: usize,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// `(Σ |xᵢ|ᵖ)^{1/p}`
    Lp { p: f64 },
    /// `scale · (Σ ‖b_j‖_{q_j}ᵖ)^{1/p}` over consecutive coordinate blocks.
    MixedBlock { p: f64, blocks: Vec<Block>, scale: f64 },
    /// Finite `ℓ_p`-sum of component models, coordinates concatenated.
    SumSpace { p: f64, components: Vec<NormModel> },
    /// Coordinate model of a quotient `X/Y`, see [`QuotientSpace::coordinate_model`].
    Quotient(Box<QuotientSpace>),
}

/// Which numerical route an evaluation takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    ClosedForm,
    Solver,
}

impl EvalPath {
    /// Default tolerance for residuals produced along this path.
    pub fn default_tolerance(self) -> f64 {
        match self {
            EvalPath::ClosedForm => 1e-10,
            EvalPath::Solver => 1e-6,
        }
    }
}

impl fmt::Display for EvalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalPath::ClosedForm => "closed_form",
            EvalPath::Solver => "solver",
        })
    }
}

/// Norm value and unit supporting functional at a non-zero point.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub norm: f64,
    pub functional: Vector,
}

/// A norm on `ℝⁿ` together with its smoothness and strict-convexity flags.
///
/// Models are immutable once built; every evaluation is a pure function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormConfig", into = "NormConfig")]
pub struct NormModel {
    dim: usize,
    kind: NormKind,
    smooth: bool,
    strictly_convex: bool,
}

fn check_exponent(p: f64, what: &str) -> Result<bool> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidModel(format!(
            "{what} exponent must be finite and >= 1, got {p}"
        )));
    }
    Ok(p > 1.0)
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return m * x.iter().map(|c| (c / m) * (c / m)).sum::<f64>().sqrt();
    }
    m * x
        .iter()
        .map(|c| (c.abs() / m).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `sgn(yᵢ)·(|yᵢ|/‖y‖_p)^{p−1}`, the unit supporting functional of `ℓ_p` at `y`.
fn lp_gradient(y: &[f64], p: f64, norm: f64, out: &mut [f64], weight: f64) {
    for (o, &c) in out.iter_mut().zip(y) {
        *o = if c == 0.0 {
            0.0
        } else {
            weight * c.signum() * (c.abs() / norm).powf(p - 1.0)
        };
    }
}

pub(crate) fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

impl NormModel {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be >= 1".into()));
        }
        let nice = check_exponent(p, "lp")?;
        Ok(Self {
            dim,
            kind: NormKind::Lp { p },
            smooth: nice,
            strictly_convex: nice,
        })
    }

    pub fn mixed_block(p: f64, blocks: Vec<Block>, scale: f64) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.size == 0) {
            return Err(Error::InvalidModel("mixed blocks must be non-empty".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidModel(format!("scale must be positive, got {scale}")));
        }
        let mut nice = check_exponent(p, "outer")?;
        for b in &blocks {
            nice &= check_exponent(b.q, "inner")?;
        }
        Ok(Self {
            dim: blocks.iter().map(|b| b.size).sum(),
            kind: NormKind::MixedBlock { p, blocks, scale },
            smooth: nice,
            strictly_convex: nice,
        })
    }

    /// The default three-dimensional smooth, strictly convex, non-Euclidean model:
    /// `(|x₁|⁴ + (x₂² + x₃²)²)^{1/4}`.
    pub fn default_mixed() -> Self {
        Self::mixed_block(
            4.0,
            vec![Block { size: 1, q: 2.0 }, Block { size: 2, q: 2.0 }],
            1.0,
        )
        .expect("default model is valid")
    }

    pub fn sum_space(p: f64, components: Vec<NormModel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel("sum space needs components".into()));
        }
        let nice = check_exponent(p, "sum")?;
        Ok(Self {
            dim: components.iter().map(|c| c.dim).sum(),
            smooth: nice && components.iter().all(|c| c.smooth),
            strictly_convex: nice && components.iter().all(|c| c.strictly_convex),
            kind: NormKind::SumSpace { p, components },
        })
    }

    pub(crate) fn quotient(space: QuotientSpace) -> Self {
        let ambient = space.ambient();
        // finite dimensions: smoothness and strict convexity pass to quotients
        let (smooth, strictly_convex) = (ambient.smooth, ambient.strictly_convex);
        Self {
            dim: space.quotient_dim(),
            kind: NormKind::Quotient(Box::new(space)),
            smooth,
            strictly_convex,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    /// True when the norm is generated by an inner product (all exponents equal 2).
    pub fn is_euclidean(&self) -> bool {
        match &self.kind {
            NormKind::Lp { p } => *p == 2.0,
            NormKind::MixedBlock { p, blocks, .. } => {
                *p == 2.0 && blocks.iter().all(|b| b.q == 2.0)
            }
            NormKind::SumSpace { p, components } => {
                *p == 2.0 && components.iter().all(|c| c.is_euclidean())
            }
            NormKind::Quotient(q) => q.ambient().is_euclidean(),
        }
    }

    pub fn path(&self) -> EvalPath {
        match &self.kind {
            NormKind::Lp { .. } | NormKind::MixedBlock { .. } => EvalPath::ClosedForm,
            NormKind::SumSpace { components, .. } => {
                if components.iter().all(|c| c.path() == EvalPath::ClosedForm) {
                    EvalPath::ClosedForm
                } else {
                    EvalPath::Solver
                }
            }
            NormKind::Quotient(_) => EvalPath::Solver,
        }
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim)?;
        self.eval(x)
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match &self.kind {
            NormKind::Lp { p } => lp_norm(x, *p),
            NormKind::MixedBlock { p, blocks, scale } => {
                let mut start = 0;
                let inner: Vec<f64> = blocks
                    .iter()
                    .map(|b| {
                        let n = lp_norm(&x[start..start + b.size], b.q);
                        start += b.size;
                        n
                    })
                    .collect();
                scale * lp_norm(&inner, *p)
            }
            NormKind::SumSpace { p, components } => {
                let mut start = 0;
                let mut inner = Vec::with_capacity(components.len());
                for c in components {
                    inner.push(c.eval(&x[start..start + c.dim])?);
                    start += c.dim;
                }
                lp_norm(&inner, *p)
            }
            NormKind::Quotient(q) => q.coordinate_norm(x)?,
        })
    }

    /// Norm and unit supporting functional at `y ≠ 0`.
    pub fn support(&self, y: &Vector) -> Result<Support> {
        y.check_dim(self.dim)?;
        if !self.smooth {
            return Err(Error::Unsupported(format!(
                "{self} is not smooth; its supporting functional is not unique"
            )));
        }
        if y.is_zero() {
            return Err(Error::ZeroSupport);
        }
        let mut out = vec![0.0; self.dim];
        let norm = self.support_into(y, &mut out)?;
        Ok(Support {
            norm,
            functional: Vector::from(out),
        })
    }

    /// Writes `weight·φ_y` into `out` and returns `‖y‖`; `y` may be zero.
    fn support_into(&self, y: &[f64], out: &mut [f64]) -> Result<f64> {
        self.support_weighted(y, out, 1.0)
    }

    fn support_weighted(&self, y: &[f64], out: &mut [f64], weight: f64) -> Result<f64> {
        match &self.kind {
            NormKind::Lp { p } => {
                let n = lp_norm(y, *p);
                if n == 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                } else {
                    lp_gradient(y, *p, n, out, weight);
                }
                Ok(n)
            }
            NormKind::MixedBlock { p, blocks, scale } => {
                let mut start = 0;
                let mut inner = Vec::with_capacity(blocks.len());
                for b in blocks {
                    inner.push(lp_norm(&y[start..start + b.size], b.q));
                    start += b.size;
                }
                let total = lp_norm(&inner, *p);
                start = 0;
                for (b, &n) in blocks.iter().zip(&inner) {
                    let seg = start..start + b.size;
                    if n == 0.0 || total == 0.0 {
                        out[seg].iter_mut().for_each(|o| *o = 0.0);
                    } else {
                        let w = weight * scale * (n / total).powf(p - 1.0);
                        lp_gradient(&y[seg.clone()], b.q, n, &mut out[seg], w);
                    }
                    start += b.size;
                }
                Ok(scale * total)
            }
            NormKind::SumSpace { p, components } => {
                let mut start = 0;
                let mut inner = Vec::with_capacity(components.len());
                for c in components {
                    let seg = start..start + c.dim;
                    inner.push(c.support_weighted(&y[seg.clone()], &mut out[seg], 1.0)?);
                    start += c.dim;
                }
                let total = lp_norm(&inner, *p);
                start = 0;
                for (c, &n) in components.iter().zip(&inner) {
                    let w = if total == 0.0 {
                        0.0
                    } else {
                        weight * (n / total).powf(p - 1.0)
                    };
                    out[start..start + c.dim].iter_mut().for_each(|o| *o *= w);
                    start += c.dim;
                }
                Ok(total)
            }
            NormKind::Quotient(q) => {
                let (n, f) = q.coordinate_support(y)?;
                for (o, v) in out.iter_mut().zip(f.iter()) {
                    *o = weight * v;
                }
                Ok(n)
            }
        }
    }

    /// Dual norm of a functional given by its coordinates in the dual basis.
    pub fn dual_norm(&self, c: &Vector) -> Result<f64> {
        c.check_dim(self.dim)?;
        self.dual_eval(c)
    }

    fn dual_eval(&self, c: &[f64]) -> Result<f64> {
        Ok(match &self.kind {
            NormKind::Lp { p } => lp_norm(c, dual_exponent(*p)),
            NormKind::MixedBlock { p, blocks, scale } => {
                let mut start = 0;
                let inner: Vec<f64> = blocks
                    .iter()
                    .map(|b| {
                        let n = lp_norm(&c[start..start + b.size], dual_exponent(b.q));
                        start += b.size;
                        n
                    })
                    .collect();
                lp_norm(&inner, dual_exponent(*p)) / scale
            }
            NormKind::SumSpace { p, components } => {
                let mut start = 0;
                let mut inner = Vec::with_capacity(components.len());
                for comp in components {
                    inner.push(comp.dual_eval(&c[start..start + comp.dim])?);
                    start += comp.dim;
                }
                lp_norm(&inner, dual_exponent(*p))
            }
            NormKind::Quotient(q) => q.coordinate_dual_norm(c)?,
        })
    }

    /// SHA-256 of the canonical JSON configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("norm models serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl fmt::Display for NormModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Lp { p } => write!(f, "lp(p={p}, dim={})", self.dim),
            NormKind::MixedBlock { p, blocks, scale } => {
                write!(f, "mixed(p={p}; ")?;
                for (i, b) in blocks.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}@{}", b.size, b.q)?;
                }
                if *scale != 1.0 {
                    write!(f, "; scale={scale}")?;
                }
                f.write_str(")")
            }
            NormKind::SumSpace { p, components } => {
                write!(f, "sum(p={p}; {} components, dim={})", components.len(), self.dim)
            }
            NormKind::Quotient(q) => {
                write!(f, "quotient({} / {}-dim subspace)", q.ambient(), q.subspace().len())
            }
        }
    }
}

/// `‖x‖` under `m`.
pub fn norm_eval(x: &Vector, m: &NormModel) -> Result<f64> {
    m.norm(x)
}

/// Coefficients of the unit supporting functional `φ_y` in the coordinate dual basis.
pub fn support_functional(y: &Vector, m: &NormModel) -> Result<Vector> {
    m.support(y).map(|s| s.functional)
}

/// Central-difference gradient of `‖·‖` at `y`; the independent oracle for
/// [`support_functional`].
pub fn finite_difference_gradient(y: &Vector, m: &NormModel, h: f64) -> Result<Vector> {
    y.check_dim(m.dim())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if y.is_zero() {
        return Err(Error::ZeroSupport);
    }
    let mut probe = y.as_slice().to_vec();
    let mut grad = Vec::with_capacity(y.dim());
    for i in 0..y.dim() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = m.eval(&probe)?;
        probe[i] = orig - h;
        let down = m.eval(&probe)?;
        probe[i] = orig;
        grad.push((up - down) / (2.0 * h));
    }
    Ok(Vector::from(grad))
}
