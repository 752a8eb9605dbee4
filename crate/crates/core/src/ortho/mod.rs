//! Birkhoff orthogonality, best approximation and orthogonal decompositions.
//!
//! In a smooth space `x ⊥ y` (Birkhoff: `‖x‖ ≤ ‖x + αy‖` for all `α`) holds
//! exactly when `[y|x] = 0`. For a subspace `Y`, every `x` splits as
//! `x = y + z` with `y ∈ Y` the best approximation and `z ∈ Y^⊥`; the cone
//! `Y^⊥` is generally not a linear subspace, which
//! [`complement_linearity_probe`] detects numerically.

mod line;
mod solver;

use serde::{Deserialize, Serialize};

pub use solver::{ApproxOptions, Approximation, DEFAULT_TOL, MAX_ITER};

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{NormModel, Vector};
use crate::sampling;
use crate::sip::sip_eval;

/// An ordered, linearly independent family spanning a subspace of `ambient`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: Vec<Vector>,
    ambient: NormModel,
}

impl SubspaceBasis {
    pub fn new(basis: Vec<Vector>, ambient: NormModel) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidSubspace("basis must contain at least one vector".into()));
        }
        for b in &basis {
            b.check_dim(ambient.dim())?;
        }
        linalg::check_independent(&basis)?;
        Ok(Self { basis, ambient })
    }

    pub fn span(v: Vector, ambient: NormModel) -> Result<Self> {
        Self::new(vec![v], ambient)
    }

    /// `span{e_i : i ∈ indices}`
    pub fn coordinate(indices: &[usize], ambient: NormModel) -> Result<Self> {
        let n = ambient.dim();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSubspace(format!(
                "coordinate {bad} out of range for dimension {n}"
            )));
        }
        Self::new(indices.iter().map(|&i| Vector::basis(n, i)).collect(), ambient)
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn ambient(&self) -> &NormModel {
        &self.ambient
    }

    /// `{0} ≠ Y ≠ X`
    pub fn is_proper(&self) -> bool {
        self.len() < self.ambient.dim()
    }

    pub fn combine(&self, coeffs: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.ambient.dim());
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out = out.axpy(*c, b);
        }
        out
    }
}

/// `x = y + z` with `y ∈ Y` and `z ∈ Y^⊥`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub y: Vector,
    pub z: Vector,
    /// `max_b |⟨b|z⟩| / (‖b‖‖z‖)`; zero when `z = 0`.
    pub residual_orth: f64,
}

/// Outcome of the norm-only Birkhoff test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    pub orthogonal: bool,
    /// Minimizer of `‖x + αy‖ + tol·|α|·‖y‖`.
    pub alpha: f64,
    /// `‖x + αy‖` at that minimizer.
    pub min_value: f64,
    pub norm_x: f64,
}

/// Floating-point slack when comparing a minimum against `‖x‖`.
const ROUNDOFF: f64 = 16.0 * f64::EPSILON;

/// Birkhoff orthogonality `x ⊥ y` decided from norm values alone.
///
/// Tests `‖x + αy‖ ≥ ‖x‖ − tol·|α|·‖y‖` for every `α`, i.e. that the convex
/// function `α ↦ ‖x + αy‖ + tol·|α|·‖y‖` is minimized at `α = 0`. The slack
/// grows linearly in `|α|`, so for smooth norms the test accepts exactly the
/// pairs with `|[y|x]| ≤ tol·‖x‖‖y‖`, the same threshold as [`sip_orthogonal`].
/// Each half-line is bracketed and searched by golden section, then polished
/// with a Newton step on finite differences.
pub fn birkhoff_report(x: &Vector, y: &Vector, m: &NormModel, tol: f64) -> Result<BirkhoffReport> {
    x.check_dim(m.dim())?;
    y.check_dim(m.dim())?;
    let nx = m.norm(x)?;
    let ny = m.norm(y)?;
    if nx == 0.0 || ny == 0.0 {
        return Ok(BirkhoffReport {
            orthogonal: true,
            alpha: 0.0,
            min_value: nx,
            norm_x: nx,
        });
    }
    let mut failure = None;
    let mut g = |alpha: f64| -> f64 {
        match m.norm(&x.axpy(alpha, y)) {
            Ok(v) => v + tol * alpha.abs() * ny,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    let step = nx / ny;
    let mut best = (0.0, nx);
    for sign in [1.0, -1.0] {
        let (u, gu) = line::golden_halfline(|u| g(sign * u), nx, step);
        if gu < best.1 {
            best = (sign * u, gu);
        }
    }
    if best.0 != 0.0 {
        // Newton polish on the golden-section minimizer
        let h = 1e-5 * best.0.abs().max(1e-3 * step);
        for _ in 0..2 {
            let a = best.0;
            let (gm, g0, gp) = (g(a - h), g(a), g(a + h));
            let curv = (gp - 2.0 * g0 + gm) / (h * h);
            if curv > 0.0 {
                let cand = a - (gp - gm) / (2.0 * h) / curv;
                if cand.signum() == a.signum() {
                    let gc = g(cand);
                    if gc < best.1 {
                        best = (cand, gc);
                    }
                }
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(BirkhoffReport {
        orthogonal: best.1 >= nx * (1.0 - ROUNDOFF),
        alpha: best.0,
        min_value: m.norm(&x.axpy(best.0, y))?,
        norm_x: nx,
    })
}

pub fn birkhoff_check(x: &Vector, y: &Vector, m: &NormModel, tol: f64) -> Result<bool> {
    birkhoff_report(x, y, m, tol).map(|r| r.orthogonal)
}

/// `x ⊥ y ⇔ [y|x] = 0` (note the order), within `tol·‖x‖‖y‖`.
pub fn sip_orthogonal(x: &Vector, y: &Vector, m: &NormModel, tol: f64) -> Result<bool> {
    let s = sip_eval(y, x, m)?;
    Ok(s.abs() <= tol * m.norm(x)? * m.norm(y)?)
}

/// `max_b |⟨b|z⟩| / (‖b‖‖z‖)` over a basis; zero for `z = 0`.
pub fn orthogonality_residual(z: &Vector, sub: &SubspaceBasis) -> Result<f64> {
    let m = sub.ambient();
    z.check_dim(m.dim())?;
    if z.is_zero() {
        return Ok(0.0);
    }
    let s = m.support(z)?;
    sub.vectors().iter().try_fold(0.0_f64, |acc, b| {
        Ok(acc.max(s.functional.dot(b).abs() / m.norm(b)?))
    })
}

fn require_strictly_convex(sub: &SubspaceBasis) -> Result<()> {
    let m = sub.ambient();
    if !m.is_smooth() || !m.is_strictly_convex() {
        return Err(Error::Unsupported(format!(
            "{m} must be smooth and strictly convex for unique best approximations"
        )));
    }
    Ok(())
}

/// Best approximation with full solver output.
pub fn best_approximation_with(x: &Vector, sub: &SubspaceBasis, opts: &ApproxOptions) -> Result<Approximation> {
    require_strictly_convex(sub)?;
    solver::solve(x, sub, opts)
}

/// The unique `y* ∈ span(Y)` minimizing `‖x − y‖`, certified to Birkhoff residual `tol`.
pub fn best_approximation(x: &Vector, sub: &SubspaceBasis, tol: f64) -> Result<Vector> {
    best_approximation_with(x, sub, &ApproxOptions::with_tol(tol)).map(|a| a.point)
}

pub fn orthogonal_decompose(x: &Vector, sub: &SubspaceBasis, tol: f64) -> Result<Decomposition> {
    let a = best_approximation_with(x, sub, &ApproxOptions::with_tol(tol))?;
    Ok(Decomposition {
        y: a.point,
        z: a.remainder,
        residual_orth: a.residual,
    })
}

/// Pair of complement vectors whose sum leaves `Y^⊥`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementWitness {
    pub z1: Vector,
    pub z2: Vector,
    /// Orthogonality residual of `z1 + z2`.
    pub residual: f64,
}

/// Result of sampling `Y^⊥` for closure under addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementProbe {
    pub n_pairs: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_residual: f64,
    /// Largest residual pair found; a violation when `max_residual > tol`.
    pub witness: Option<ComplementWitness>,
}

impl ComplementProbe {
    pub fn violation(&self) -> bool {
        self.max_residual > self.tol
    }
}

/// Solver tolerance for decompositions inside probes.
pub(crate) const PROBE_SOLVER_TOL: f64 = 1e-12;

/// Samples pairs `z₁, z₂ ∈ Y^⊥` (orthogonal parts of random vectors) and measures
/// how far `z₁ + z₂` is from `Y^⊥`.
pub fn complement_linearity_probe(sub: &SubspaceBasis, n_pairs: usize, seed: u64, tol: f64) -> Result<ComplementProbe> {
    require_strictly_convex(sub)?;
    let mut rng = sampling::rng(seed);
    let dim = sub.ambient().dim();
    let mut max_residual = 0.0;
    let mut witness = None;
    for _ in 0..n_pairs {
        let a = sampling::scaled_sphere(&mut rng, dim);
        let b = sampling::scaled_sphere(&mut rng, dim);
        let z1 = orthogonal_decompose(&a, sub, PROBE_SOLVER_TOL)?.z;
        let z2 = orthogonal_decompose(&b, sub, PROBE_SOLVER_TOL)?.z;
        let r = orthogonality_residual(&(&z1 + &z2), sub)?;
        if witness.is_none() || r > max_residual {
            max_residual = r;
            witness = Some(ComplementWitness { z1, z2, residual: r });
        }
    }
    Ok(ComplementProbe {
        n_pairs,
        seed,
        tol,
        max_residual,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from(c.to_vec())
    }

    #[test]
    fn birkhoff_examples() {
        for p in [1.5, 2.0, 3.0, 4.0] {
            let m = NormModel::lp(p, 2).unwrap();
            assert!(birkhoff_check(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]), &m, 1e-9).unwrap());
        }
        let l3 = NormModel::lp(3.0, 2).unwrap();
        assert!(birkhoff_check(&v(&[1.0, 1.0]), &v(&[1.0, -1.0]), &l3, 1e-9).unwrap());
        let l2 = NormModel::lp(2.0, 2).unwrap();
        let r = birkhoff_report(&v(&[1.0, 1.0]), &v(&[1.0, 0.0]), &l2, 1e-9).unwrap();
        assert!(!r.orthogonal);
        assert!((r.alpha + 1.0).abs() < 1e-6);
        assert!((r.min_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sip_orthogonality_examples() {
        let l3 = NormModel::lp(3.0, 2).unwrap();
        assert!(sip_orthogonal(&v(&[1.0, 1.0]), &v(&[1.0, -1.0]), &l3, 1e-12).unwrap());
        assert!(sip_orthogonal(&v(&[0.3, 2.0]), &v(&[0.0, 0.0]), &l3, 1e-12).unwrap());
    }

    #[test]
    fn coordinate_best_approximation() {
        for p in [1.5, 2.0, 3.0, 4.0] {
            let m = NormModel::lp(p, 3).unwrap();
            let y = SubspaceBasis::coordinate(&[0], m).unwrap();
            let b = best_approximation(&v(&[5.0, 3.0, 4.0]), &y, 1e-10).unwrap();
            assert!(b.linf_distance(&v(&[5.0, 0.0, 0.0])) < 1e-6, "p={p}: {b:?}");
        }
    }

    #[test]
    fn euclidean_projection_is_zero() {
        let m = NormModel::lp(2.0, 2).unwrap();
        let y = SubspaceBasis::span(v(&[1.0, -1.0]), m).unwrap();
        let b = best_approximation(&v(&[1.0, 1.0]), &y, 1e-12).unwrap();
        assert!(b.max_abs() < 1e-12);
    }

    #[test]
    fn decomposition_examples() {
        let m = NormModel::lp(2.0, 3).unwrap();
        let y = SubspaceBasis::coordinate(&[0], m).unwrap();
        let d = orthogonal_decompose(&v(&[5.0, 3.0, 4.0]), &y, 1e-12).unwrap();
        assert!(d.y.linf_distance(&v(&[5.0, 0.0, 0.0])) < 1e-12);
        assert!(d.z.linf_distance(&v(&[0.0, 3.0, 4.0])) < 1e-12);
        assert_eq!(&d.y + &d.z, v(&[5.0, 3.0, 4.0]));

        let d = orthogonal_decompose(&v(&[2.0, 0.0, 0.0]), &y, 1e-12).unwrap();
        assert!(d.z.is_zero());
        assert_eq!(d.residual_orth, 0.0);
    }

    #[test]
    fn two_dimensional_subspace_in_mixed_norm() {
        let m = NormModel::mixed_block(
            3.0,
            vec![
                crate::norms::Block { size: 2, q: 1.5 },
                crate::norms::Block { size: 3, q: 4.0 },
            ],
            1.0,
        )
        .unwrap();
        let y = SubspaceBasis::new(
            vec![v(&[1.0, 0.5, -0.2, 0.3, 0.0]), v(&[0.1, -1.0, 0.7, 0.0, 0.4])],
            m,
        )
        .unwrap();
        let a = best_approximation_with(&v(&[0.3, 1.2, -0.8, 0.5, 1.1]), &y, &ApproxOptions::with_tol(1e-10)).unwrap();
        assert!(a.residual <= 1e-10);
    }

    #[test]
    fn rejects_non_smooth_ambient() {
        let m = NormModel::lp(1.0, 3).unwrap();
        let y = SubspaceBasis::coordinate(&[0], m).unwrap();
        assert!(matches!(
            best_approximation(&v(&[1.0, 1.0, 1.0]), &y, 1e-9),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn basis_guards() {
        let m = NormModel::lp(3.0, 3).unwrap();
        assert!(SubspaceBasis::new(vec![], m.clone()).is_err());
        assert!(matches!(
            SubspaceBasis::new(vec![v(&[1.0, 1.0, 0.0]), v(&[2.0, 2.0, 0.0])], m.clone()),
            Err(Error::RankDeficient { .. })
        ));
        assert!(matches!(
            SubspaceBasis::new(vec![v(&[1.0, 1.0])], m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complement_probes() {
        let m = NormModel::lp(2.0, 3).unwrap();
        let y = SubspaceBasis::span(v(&[0.3, -1.0, 0.5]), m).unwrap();
        let p = complement_linearity_probe(&y, 20, 3, 1e-8).unwrap();
        assert!(!p.violation(), "{}", p.max_residual);

        let m = NormModel::lp(3.0, 4).unwrap();
        let y = SubspaceBasis::coordinate(&[1, 3], m).unwrap();
        let p = complement_linearity_probe(&y, 20, 3, 1e-8).unwrap();
        assert!(!p.violation(), "{}", p.max_residual);

        let y = SubspaceBasis::span(v(&[1.0, 1.0, 0.0]), NormModel::default_mixed()).unwrap();
        let p = complement_linearity_probe(&y, 20, 3, 1e-2).unwrap();
        assert!(p.violation());
        assert!(p.max_residual >= 1e-2);
    }
}
