//! The unique semi-inner product of a smooth norm.
//!
//! `[x|y] = ‖y‖·φ_y(x)` with `φ_0 ≡ 0`. It is linear in `x`, homogeneous in
//! `y`, bounded by `‖x‖‖y‖`, reproduces `‖x‖²` on the diagonal, and is
//! generally not symmetric.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::norms::{BlockSpace, EvalPath, FiniteSupportElement, NormConfig, NormModel, Vector};
use crate::sampling;

/// `[x|y] = ‖y‖·φ_y(x)`; zero when `y = 0`.
pub fn sip_eval(x: &Vector, y: &Vector, m: &NormModel) -> Result<f64> {
    x.check_dim(m.dim())?;
    y.check_dim(m.dim())?;
    if !m.is_smooth() {
        return Err(Error::Unsupported(format!(
            "{m} is not smooth; its semi-inner product is not unique"
        )));
    }
    if y.is_zero() {
        return Ok(0.0);
    }
    let s = m.support(y)?;
    Ok(s.norm * s.functional.dot(x))
}

/// Semi-inner product of an `ℓ_p`-sum from its components:
/// `⟨x|y⟩ = ‖y‖^{2−p} Σᵢ ‖yᵢ‖^{p−2} ⟨xᵢ|yᵢ⟩ᵢ`, summed over blocks with `yᵢ ≠ 0`.
pub fn sip_sum_eval<S: BlockSpace + ?Sized>(x: &FiniteSupportElement, y: &FiniteSupportElement, space: &S) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    let p = space.exponent();
    let mut weighted = 0.0;
    let mut norms = Vec::new();
    for (idx, yi) in y.iter() {
        if yi.is_zero() {
            continue;
        }
        let model = space.block_model(idx)?;
        if !model.is_smooth() {
            return Err(Error::Unsupported(format!("component {model} is not smooth")));
        }
        let s = model.support(yi)?;
        norms.push(s.norm);
        if let Some(xi) = x.get(idx) {
            // ‖yᵢ‖^{p−2}·⟨xᵢ|yᵢ⟩ᵢ = ‖yᵢ‖^{p−1}·φ_{yᵢ}(xᵢ)
            weighted += s.norm.powf(p - 1.0) * s.functional.dot(xi);
        }
    }
    if norms.is_empty() {
        return Ok(0.0);
    }
    let total = crate::norms::lp_norm(&norms, p);
    Ok(total.powf(2.0 - p) * weighted)
}

/// Worst residual of one axiom over the sampled inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomResidual {
    pub axiom: String,
    pub worst_residual: f64,
    pub witness: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub model: NormConfig,
    pub path: EvalPath,
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub axioms: Vec<AxiomResidual>,
}

impl AxiomReport {
    pub fn worst(&self) -> f64 {
        self.axioms.iter().fold(0.0, |m, a| m.max(a.worst_residual))
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tol
    }
}

struct Worst {
    residual: f64,
    witness: serde_json::Value,
}

impl Worst {
    fn new() -> Self {
        Self {
            residual: 0.0,
            witness: serde_json::Value::Null,
        }
    }

    fn offer(&mut self, r: f64, witness: impl FnOnce() -> serde_json::Value) {
        if r > self.residual || self.witness.is_null() {
            self.residual = r;
            self.witness = witness();
        }
    }
}

/// Samples `(sip1)–(sip4)` and reports scale-normalized worst residuals:
///
/// - `sip1`: `|[αx+βy|z] − α[x|z] − β[y|z]| / ((|α|‖x‖+|β|‖y‖)‖z‖)`
/// - `sip2`: `|[x|λy] − λ[x|y]| / (|λ|‖x‖‖y‖)`, `λ` of either sign
/// - `sip3`: `max(0, |[x|y]| − ‖x‖‖y‖) / (‖x‖‖y‖)`
/// - `sip4`: `|[x|x] − ‖x‖²| / (1 + ‖x‖²)`
pub fn axioms_check(m: &NormModel, n_samples: usize, seed: u64, tol: f64) -> Result<AxiomReport> {
    if !m.is_smooth() {
        return Err(Error::Unsupported(format!("{m} is not smooth")));
    }
    let mut rng = sampling::rng(seed);
    let dim = m.dim();
    let (mut s1, mut s2, mut s3, mut s4) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    for _ in 0..n_samples {
        let x = sampling::scaled_sphere(&mut rng, dim);
        let y = sampling::scaled_sphere(&mut rng, dim);
        let z = sampling::scaled_sphere(&mut rng, dim);
        let alpha = sampling::scalar(&mut rng);
        let beta = sampling::scalar(&mut rng);
        let lambda = sampling::scalar(&mut rng);
        let (nx, ny, nz) = (m.norm(&x)?, m.norm(&y)?, m.norm(&z)?);

        let comb = x.scaled(alpha).axpy(beta, &y);
        let lhs = sip_eval(&comb, &z, m)?;
        let xz = sip_eval(&x, &z, m)?;
        let yz = sip_eval(&y, &z, m)?;
        let r1 = (lhs - alpha * xz - beta * yz).abs() / ((alpha.abs() * nx + beta.abs() * ny) * nz);
        s1.offer(r1, || json!({"x": x, "y": y, "z": z, "alpha": alpha, "beta": beta}));

        let xy = sip_eval(&x, &y, m)?;
        let r2 = (sip_eval(&x, &y.scaled(lambda), m)? - lambda * xy).abs() / (lambda.abs() * nx * ny);
        s2.offer(r2, || json!({"x": x, "y": y, "lambda": lambda}));

        let r3 = (xy.abs() - nx * ny).max(0.0) / (nx * ny);
        s3.offer(r3, || json!({"x": x, "y": y}));

        let r4 = (sip_eval(&x, &x, m)? - nx * nx).abs() / (1.0 + nx * nx);
        s4.offer(r4, || json!({"x": x}));
    }
    let axioms = [("sip1", s1), ("sip2", s2), ("sip3", s3), ("sip4", s4)]
        .into_iter()
        .map(|(name, w)| AxiomResidual {
            axiom: name.into(),
            worst_residual: w.residual,
            witness: w.witness,
        })
        .collect();
    Ok(AxiomReport {
        model: NormConfig::from(m),
        path: m.path(),
        n_samples,
        seed,
        tol,
        axioms,
    })
}

/// Searches sampled pairs for `|[x|y] − [y|x]| > threshold`.
pub fn asymmetry_witness(m: &NormModel, n_samples: usize, seed: u64, threshold: f64) -> Result<Option<(Vector, Vector, f64)>> {
    let mut rng = sampling::rng(seed);
    let mut best: Option<(Vector, Vector, f64)> = None;
    for _ in 0..n_samples {
        let x = sampling::scaled_sphere(&mut rng, m.dim());
        let y = sampling::scaled_sphere(&mut rng, m.dim());
        let gap = (sip_eval(&x, &y, m)? - sip_eval(&y, &x, m)?).abs();
        if best.as_ref().is_none_or(|b| gap > b.2) {
            best = Some((x, y, gap));
        }
    }
    Ok(best.filter(|b| b.2 > threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from(c.to_vec())
    }

    /// `‖y‖^{2−p} Σ xᵢ |yᵢ|^{p−1} sgn(yᵢ)`
    fn lp_closed_form(x: &[f64], y: &[f64], p: f64) -> f64 {
        let n = y.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        n.powf(2.0 - p)
            * x.iter()
                .zip(y)
                .map(|(a, b)| a * b.abs().powf(p - 1.0) * b.signum())
                .sum::<f64>()
    }

    #[test]
    fn diagonal_unit_vector() {
        let m = NormModel::lp(3.0, 2).unwrap();
        assert!((sip_eval(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn l3_orthogonal_pair() {
        let m = NormModel::lp(3.0, 2).unwrap();
        let got = sip_eval(&v(&[1.0, -1.0]), &v(&[1.0, 1.0]), &m).unwrap();
        assert_eq!(lp_closed_form(&[1.0, -1.0], &[1.0, 1.0], 3.0), 0.0);
        assert!(got.abs() < 1e-15);
    }

    #[test]
    fn coordinate_functional() {
        for p in [1.5, 2.0, 3.0, 7.0] {
            let m = NormModel::lp(p, 3).unwrap();
            let x = v(&[0.3, -2.0, 5.0]);
            assert!((sip_eval(&x, &Vector::basis(3, 0), &m).unwrap() - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_lp_closed_form() {
        let mut rng = sampling::rng(11);
        for p in [1.5, 3.0, 4.5] {
            let m = NormModel::lp(p, 4).unwrap();
            for _ in 0..50 {
                let x = sampling::scaled_sphere(&mut rng, 4);
                let y = sampling::scaled_sphere(&mut rng, 4);
                let want = lp_closed_form(&x, &y, p);
                assert!((sip_eval(&x, &y, &m).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_second_argument() {
        let m = NormModel::lp(3.0, 2).unwrap();
        assert_eq!(sip_eval(&v(&[1.0, 2.0]), &v(&[0.0, 0.0]), &m).unwrap(), 0.0);
    }

    #[test]
    fn non_smooth_is_unsupported() {
        let m = NormModel::lp(1.0, 2).unwrap();
        assert!(matches!(
            sip_eval(&v(&[1.0, 2.0]), &v(&[1.0, 0.0]), &m),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn negative_lambda_homogeneity() {
        let m = NormModel::lp(3.0, 3).unwrap();
        let x = v(&[0.2, -1.0, 0.7]);
        let y = v(&[1.1, 0.4, -0.3]);
        let base = sip_eval(&x, &y, &m).unwrap();
        for lambda in [-2.5, -1.0, -0.1] {
            let got = sip_eval(&x, &y.scaled(lambda), &m).unwrap();
            assert!((got - lambda * base).abs() < 1e-14);
        }
    }

    #[test]
    fn sum_space_unit_reduction() {
        let line = NormModel::lp(3.0, 1).unwrap();
        let sum = NormModel::sum_space(3.0, vec![line.clone(), line]).unwrap();
        let x = FiniteSupportElement::from_blocks(vec![v(&[1.0]), v(&[1.0])]);
        let y = FiniteSupportElement::from_blocks(vec![v(&[1.0]), v(&[0.0])]);
        assert!((sip_sum_eval(&x, &y, &sum).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sip_sum_eval(&x, &FiniteSupportElement::new(), &sum).unwrap(), 0.0);
    }

    #[test]
    fn sum_space_diagonal() {
        let sum = NormModel::sum_space(
            1.7,
            vec![NormModel::lp(3.0, 2).unwrap(), NormModel::default_mixed()],
        )
        .unwrap();
        let y = FiniteSupportElement::from_blocks(vec![v(&[0.4, -1.0]), v(&[1.0, 0.2, 0.3])]);
        let n = crate::norms::norm_eval_blocks(&y, &sum).unwrap();
        assert!((sip_sum_eval(&y, &y, &sum).unwrap() - n * n).abs() < 1e-13);
    }

    #[test]
    fn lp_axioms_are_tight() {
        let r = axioms_check(&NormModel::lp(2.0, 3).unwrap(), 1000, 1, 1e-9).unwrap();
        assert!(r.passed(), "{:?}", r.axioms);
        assert_eq!(r.path, EvalPath::ClosedForm);
        let json = serde_json::to_value(&r.axioms[0]).unwrap();
        assert!(json.get("axiom").is_some() && json.get("worst_residual").is_some() && json.get("witness").is_some());
    }

    #[test]
    fn lp3_is_asymmetric() {
        let m = NormModel::lp(3.0, 3).unwrap();
        let w = asymmetry_witness(&m, 1000, 5, 0.1).unwrap();
        assert!(w.is_some());
        let e = NormModel::lp(2.0, 3).unwrap();
        assert!(asymmetry_witness(&e, 200, 5, 1e-12).unwrap().is_none());
    }
}
