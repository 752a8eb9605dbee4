//! Quotient spaces `X/Y` represented by ambient representatives.
//!
//! `‖[x]‖ = dist(x, Y)`, and with `u = u₁ + u₂`, `w = w₁ + w₂` split along
//! `Y + Y^⊥` the quotient semi-inner product is `[[u]|[w]] = ⟨u₂|w₂⟩`.
//! In a strictly convex ambient the split is unique, so `[x] ↦ x − P_Y x`
//! is a well-defined section of the canonical surjection; it preserves the
//! semi-inner product but is non-linear whenever `Y^⊥` is.
//!
//! A coordinate view of `X/Y` is fixed by a complementary coordinate slice
//! (see [`crate::linalg::complement_slice`]): `c ↦ [E c]` where `E` places
//! `c` on the slice coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{NormModel, Vector};
use crate::ortho::{best_approximation_with, ApproxOptions, Approximation, SubspaceBasis};
use crate::sampling;
use crate::sip::sip_eval;

/// Solver tolerance used when the quotient norm is evaluated as a norm model.
pub const COORDINATE_SOLVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpace {
    subspace: SubspaceBasis,
    slice: Vec<usize>,
    pivots: Vec<usize>,
}

/// A coset `[x] = x + Y`, held by any representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientElement {
    pub representative: Vector,
}

impl QuotientElement {
    pub fn new(representative: Vector) -> Self {
        Self { representative }
    }
}

impl From<Vector> for QuotientElement {
    fn from(v: Vector) -> Self {
        Self::new(v)
    }
}

impl QuotientSpace {
    pub fn new(subspace: SubspaceBasis) -> Result<Self> {
        if !subspace.is_proper() {
            return Err(Error::InvalidSubspace(format!(
                "quotient needs a proper subspace, got {} vectors in dimension {}",
                subspace.len(),
                subspace.ambient().dim()
            )));
        }
        let m = subspace.ambient();
        if !m.is_smooth() || !m.is_strictly_convex() {
            return Err(Error::Unsupported(format!(
                "{m} must be smooth and strictly convex"
            )));
        }
        let n = m.dim();
        let slice = linalg::complement_slice(subspace.vectors(), n);
        let pivots = (0..n).filter(|i| !slice.contains(i)).collect();
        Ok(Self {
            subspace,
            slice,
            pivots,
        })
    }

    pub fn ambient(&self) -> &NormModel {
        self.subspace.ambient()
    }

    pub fn subspace(&self) -> &SubspaceBasis {
        &self.subspace
    }

    pub fn quotient_dim(&self) -> usize {
        self.slice.len()
    }

    /// Ambient coordinates carrying the quotient coordinates.
    pub fn slice(&self) -> &[usize] {
        &self.slice
    }

    /// `E c`: the slice embedding of quotient coordinates.
    pub fn embed(&self, c: &[f64]) -> Vector {
        let mut out = vec![0.0; self.ambient().dim()];
        for (&i, &v) in self.slice.iter().zip(c) {
            out[i] = v;
        }
        Vector::from(out)
    }

    /// Quotient coordinates of `[x]`: the unique `c` with `x − E c ∈ Y`.
    pub fn coords_of(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.ambient().dim())?;
        let t = self.pivot_solve(&self.pivots.iter().map(|&i| x[i]).collect::<Vec<_>>())?;
        let shifted = x - &self.subspace.combine(&t);
        Ok(Vector::from(self.slice.iter().map(|&i| shifted[i]).collect::<Vec<_>>()))
    }

    /// Solves `Σⱼ tⱼ bⱼ[i] = rhs[i]` over the pivot coordinates.
    fn pivot_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let cols: Vec<Vector> = self
            .subspace
            .vectors()
            .iter()
            .map(|b| Vector::from(self.pivots.iter().map(|&i| b[i]).collect::<Vec<_>>()))
            .collect();
        linalg::solve_columns(&cols, rhs)
            .ok_or_else(|| Error::InvalidSubspace("pivot system is singular".into()))
    }

    /// The norm model of `X/Y` in slice coordinates.
    pub fn coordinate_model(&self) -> NormModel {
        NormModel::quotient(self.clone())
    }

    fn project(&self, x: &Vector, tol: f64) -> Result<Approximation> {
        best_approximation_with(x, &self.subspace, &ApproxOptions::with_tol(tol))
    }

    pub(crate) fn coordinate_norm(&self, c: &[f64]) -> Result<f64> {
        if c.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(self.project(&self.embed(c), COORDINATE_SOLVER_TOL)?.distance)
    }

    /// `(‖[E c]‖, E^T φ_z)` with `z` the orthogonal part of `E c`.
    pub(crate) fn coordinate_support(&self, c: &[f64]) -> Result<(f64, Vector)> {
        if c.iter().all(|&v| v == 0.0) {
            return Ok((0.0, Vector::zeros(c.len())));
        }
        let a = self.project(&self.embed(c), COORDINATE_SOLVER_TOL)?;
        let s = self.ambient().support(&a.remainder)?;
        let pulled = self.slice.iter().map(|&i| s.functional[i]).collect::<Vec<_>>();
        Ok((s.norm, Vector::from(pulled)))
    }

    /// Dual norm of a quotient functional `g`: the ambient dual norm of the
    /// unique `G` with `G∘E = g` and `G|_Y = 0`.
    pub(crate) fn coordinate_dual_norm(&self, g: &[f64]) -> Result<f64> {
        let n = self.ambient().dim();
        let mut full = vec![0.0; n];
        for (&i, &v) in self.slice.iter().zip(g) {
            full[i] = v;
        }
        // pivot values so that G(bⱼ) = 0 for every basis vector
        let rhs: Vec<f64> = self
            .subspace
            .vectors()
            .iter()
            .map(|b| -self.slice.iter().zip(g).map(|(&i, &v)| v * b[i]).sum::<f64>())
            .collect();
        let cols: Vec<Vector> = self
            .pivots
            .iter()
            .map(|&i| Vector::from(self.subspace.vectors().iter().map(|b| b[i]).collect::<Vec<_>>()))
            .collect();
        let piv = linalg::solve_columns(&cols, &rhs)
            .ok_or_else(|| Error::InvalidSubspace("pivot system is singular".into()))?;
        for (&i, v) in self.pivots.iter().zip(piv) {
            full[i] = v;
        }
        self.ambient().dual_norm(&Vector::from(full))
    }

    /// `[a] = [b]` up to `dist(a − b, Y) ≤ 1e−8·(1 + max(‖a‖, ‖b‖))`.
    pub fn same_coset(&self, a: &QuotientElement, b: &QuotientElement) -> Result<bool> {
        let m = self.ambient();
        let d = &a.representative - &b.representative;
        let dist = if d.is_zero() { 0.0 } else { self.project(&d, 1e-12)?.distance };
        let scale = 1.0 + m.norm(&a.representative)?.max(m.norm(&b.representative)?);
        Ok(dist <= 1e-8 * scale)
    }
}

/// `‖[x]‖ = dist(x, Y)`
pub fn quotient_norm(q: &QuotientElement, space: &QuotientSpace, tol: f64) -> Result<f64> {
    if q.representative.is_zero() {
        return Ok(0.0);
    }
    Ok(space.project(&q.representative, tol)?.distance)
}

/// `[[u]|[w]] = ⟨u₂|w₂⟩` with `u₂, w₂` the `Y^⊥` parts of the representatives.
pub fn quotient_sip(u: &QuotientElement, w: &QuotientElement, space: &QuotientSpace, tol: f64) -> Result<f64> {
    let u2 = section_map(u, space, tol)?;
    let w2 = section_map(w, space, tol)?;
    sip_eval(&u2, &w2, space.ambient())
}

/// The unique `z ∈ Y^⊥` with `[z] = q`.
pub fn section_map(q: &QuotientElement, space: &QuotientSpace, tol: f64) -> Result<Vector> {
    if q.representative.is_zero() {
        return Ok(q.representative.clone());
    }
    Ok(space.project(&q.representative, tol)?.remainder)
}

/// Sampled evidence that the section preserves the semi-inner product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCertificate {
    pub n_pairs: usize,
    pub seed: u64,
    pub tol: f64,
    /// `max |⟨f(u)|f(w)⟩_X − [[u]|[w]]|`, the right side evaluated by the
    /// coordinate quotient model (norm gradient route).
    pub max_residual: f64,
    /// `max |‖f(u)‖ − ‖[u]‖|`
    pub max_norm_residual: f64,
    /// `max ‖f(u + w) − f(u) − f(w)‖`
    pub max_nonlinearity: f64,
    pub nonlinearity_witness: Option<(Vector, Vector)>,
}

impl SectionCertificate {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol && self.max_norm_residual <= self.tol
    }
}

pub fn verify_section_sip(space: &QuotientSpace, n_pairs: usize, seed: u64, tol: f64) -> Result<SectionCertificate> {
    let model = space.coordinate_model();
    let ambient = space.ambient();
    let mut rng = sampling::rng(seed);
    let solver_tol = 1e-12;
    let (mut max_residual, mut max_norm_residual, mut max_nonlinearity) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut witness = None;
    for _ in 0..n_pairs {
        let u = QuotientElement::new(sampling::scaled_sphere(&mut rng, ambient.dim()));
        let w = QuotientElement::new(sampling::scaled_sphere(&mut rng, ambient.dim()));
        let fu = section_map(&u, space, solver_tol)?;
        let fw = section_map(&w, space, solver_tol)?;
        let lhs = sip_eval(&fu, &fw, ambient)?;
        let cu = space.coords_of(&u.representative)?;
        let cw = space.coords_of(&w.representative)?;
        let rhs = sip_eval(&cu, &cw, &model)?;
        max_residual = max_residual.max((lhs - rhs).abs());
        max_norm_residual = max_norm_residual.max((ambient.norm(&fu)? - model.norm(&cu)?).abs());

        let sum = QuotientElement::new(&u.representative + &w.representative);
        let fsum = section_map(&sum, space, solver_tol)?;
        let defect = ambient.norm(&(&(&fsum - &fu) - &fw))?;
        if defect > max_nonlinearity {
            max_nonlinearity = defect;
            witness = Some((u.representative.clone(), w.representative.clone()));
        }
    }
    Ok(SectionCertificate {
        n_pairs,
        seed,
        tol,
        max_residual,
        max_norm_residual,
        max_nonlinearity,
        nonlinearity_witness: witness,
    })
}
