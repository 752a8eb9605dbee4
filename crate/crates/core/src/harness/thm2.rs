//! Numerical check of the forward construction for a map preserving the
//! semi-inner product.
//!
//! Given `f: D → C` with `⟨f(x)|f(y)⟩ = ⟨x|y⟩`, set
//! `Y = {y : ⟨y|f(w)⟩ = 0 for every w}`. Then
//! `f(αx + βy) − αf(x) − βf(y) ∈ Y`, and `x ↦ [f(x)] ∈ C/Y` is a linear
//! isometry. Here `Y` is estimated as the common kernel of the sampled
//! functionals `y ↦ ⟨y|f(w)⟩`, and both consequences are measured on samples.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::suites::apply;
use crate::counterexample::{shift_map_h, CounterexampleInstance};
use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{BlockIndex, FiniteSupportElement, NormModel, Vector};
use crate::ortho::{best_approximation_with, ApproxOptions, SubspaceBasis};
use crate::sampling;
use crate::sip::sip_eval;

/// A map that can be evaluated at arbitrary points of a finite-coordinate domain.
pub trait ProbeMap: Sync {
    fn name(&self) -> String;
    fn domain(&self) -> &NormModel;
    fn codomain(&self) -> &NormModel;
    fn apply(&self, x: &Vector) -> Result<Vector>;
}

/// `x ↦ T x`.
pub struct LinearMap {
    pub matrix: DMatrix<f64>,
    pub src: NormModel,
    pub dst: NormModel,
}

impl ProbeMap for LinearMap {
    fn name(&self) -> String {
        format!("linear({}x{})", self.matrix.nrows(), self.matrix.ncols())
    }
    fn domain(&self) -> &NormModel {
        &self.src
    }
    fn codomain(&self) -> &NormModel {
        &self.dst
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.src.dim())?;
        Ok(apply(&self.matrix, x))
    }
}

/// Euclidean map rotating the `(x₁, x₂)` plane by the angle `‖x‖`: it
/// preserves norms but not the inner product, and is not linear.
pub struct NormScramble {
    pub model: NormModel,
}

impl NormScramble {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("scramble needs dimension at least 2".into()));
        }
        Ok(Self {
            model: NormModel::lp(2.0, dim)?,
        })
    }
}

impl ProbeMap for NormScramble {
    fn name(&self) -> String {
        "norm_scramble".into()
    }
    fn domain(&self) -> &NormModel {
        &self.model
    }
    fn codomain(&self) -> &NormModel {
        &self.model
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        let (s, c) = self.model.norm(x)?.sin_cos();
        let mut y = x.clone().into_inner();
        let (a, b) = (x[0], x[1]);
        y[0] = c * a - s * b;
        y[1] = s * a + c * b;
        Ok(Vector::from(y))
    }
}

/// The shift map restricted to `W^K × X^L → W^{K−1} × X^{L+1}`, as finite
/// `ℓ_p`-sums with concatenated coordinates (W blocks first).
pub struct HSection<'a> {
    inst: &'a CounterexampleInstance,
    k: usize,
    l: usize,
    domain: NormModel,
    codomain: NormModel,
}

impl<'a> HSection<'a> {
    pub fn new(inst: &'a CounterexampleInstance, k: usize, l: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("the section needs at least one W block".into()));
        }
        let sum = |kw: usize, lx: usize| {
            let comps = std::iter::repeat_n(inst.w_model.clone(), kw)
                .chain(std::iter::repeat_n(inst.x3.clone(), lx))
                .collect();
            NormModel::sum_space(inst.p, comps)
        };
        Ok(Self {
            inst,
            k,
            l,
            domain: sum(k, l)?,
            codomain: sum(k - 1, l + 1)?,
        })
    }

    fn layout(&self, kw: usize, lx: usize) -> Vec<(BlockIndex, usize)> {
        let (wd, xd) = (self.inst.w_model.dim(), self.inst.x3.dim());
        (0..kw)
            .map(|i| (BlockIndex::W(i), wd))
            .chain((0..lx).map(|j| (BlockIndex::X(j), xd)))
            .collect()
    }
}

impl ProbeMap for HSection<'_> {
    fn name(&self) -> String {
        format!("h_section(W^{} x X^{})", self.k, self.l)
    }
    fn domain(&self) -> &NormModel {
        &self.domain
    }
    fn codomain(&self) -> &NormModel {
        &self.codomain
    }
    fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.domain.dim())?;
        let mut z = FiniteSupportElement::new();
        let mut start = 0;
        for (idx, d) in self.layout(self.k, self.l) {
            z.insert(idx, Vector::from(&x.as_slice()[start..start + d]));
            start += d;
        }
        let hz = shift_map_h(&z, self.inst)?;
        let mut out = Vec::with_capacity(self.codomain.dim());
        for (idx, d) in self.layout(self.k - 1, self.l + 1) {
            match hz.get(idx) {
                Some(v) => out.extend_from_slice(v),
                None => out.extend(std::iter::repeat_n(0.0, d)),
            }
        }
        Ok(Vector::from(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm2Options {
    pub n_probe: usize,
    pub seed: u64,
    pub tol: f64,
    /// Singular values below `null_threshold·σ_max` count as zero.
    pub null_threshold: f64,
    /// Required ratio across the rank cut.
    pub min_gap: f64,
}

impl Thm2Options {
    pub fn new(n_probe: usize, seed: u64, tol: f64) -> Self {
        Self {
            n_probe,
            seed,
            tol,
            null_threshold: 1e-7,
            min_gap: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Report {
    pub map: String,
    pub options: Thm2Options,
    /// `max |⟨f(x)|f(y)⟩ − ⟨x|y⟩| / max(1, ‖x‖‖y‖)`
    pub gate_residual: f64,
    pub gate_passed: bool,
    pub singular_values: Vec<f64>,
    pub y_dim: usize,
    pub gap_ratio: f64,
    pub conclusive: bool,
    /// `max dist(f(αx+βy) − αf(x) − βf(y), Y) / max(1, |α|‖x‖ + |β|‖y‖)`
    pub membership_residual: f64,
    /// `max |‖[f(x)]‖ − ‖x‖| / max(1, ‖x‖)`
    pub isometry_residual: f64,
    /// Same normalisation as the membership residual, without the quotient.
    pub nonlinearity: f64,
    pub passed: bool,
}

fn distance_to(v: &Vector, y: Option<&SubspaceBasis>, m: &NormModel) -> Result<f64> {
    match y {
        None => m.norm(v),
        Some(_) if v.is_zero() => Ok(0.0),
        Some(y) => Ok(best_approximation_with(v, y, &ApproxOptions::with_tol(1e-12))?.distance),
    }
}

pub fn thm2_forward_harness(f: &dyn ProbeMap, opts: &Thm2Options) -> Result<Thm2Report> {
    let (dom, cod) = (f.domain(), f.codomain());
    let mut rng = sampling::rng(opts.seed);
    let scale = |a: f64| a.max(1.0);

    let mut gate_residual = 0.0_f64;
    let mut rows = Vec::with_capacity(opts.n_probe);
    for _ in 0..opts.n_probe {
        let x = sampling::scaled_sphere(&mut rng, dom.dim());
        let w = sampling::scaled_sphere(&mut rng, dom.dim());
        let (fx, fw) = (f.apply(&x)?, f.apply(&w)?);
        let r = (sip_eval(&fx, &fw, cod)? - sip_eval(&x, &w, dom)?).abs();
        gate_residual = gate_residual.max(r / scale(dom.norm(&x)? * dom.norm(&w)?));
        if !fw.is_zero() {
            // y ↦ ⟨y|f(w)⟩ = ‖f(w)‖·φ_{f(w)}(y), normalised for the rank estimate
            let g = cod.support(&fw)?.functional;
            rows.push(g.scaled(1.0 / g.euclidean()));
        }
    }
    let est = linalg::nullspace(&rows, cod.dim(), opts.null_threshold, opts.min_gap);
    let y = if est.basis.is_empty() || est.basis.len() == cod.dim() {
        None
    } else {
        Some(SubspaceBasis::new(est.basis.clone(), cod.clone())?)
    };
    let whole = est.basis.len() == cod.dim();

    let (mut membership, mut isometry, mut nonlinearity) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..opts.n_probe {
        let x = sampling::scaled_sphere(&mut rng, dom.dim());
        let u = sampling::scaled_sphere(&mut rng, dom.dim());
        let (a, b) = (sampling::scalar(&mut rng), sampling::scalar(&mut rng));
        let combo = x.scaled(a).axpy(b, &u);
        let fx = f.apply(&x)?;
        let fu = f.apply(&u)?;
        let defect = f.apply(&combo)?.axpy(-a, &fx).axpy(-b, &fu);
        let s = scale(a.abs() * dom.norm(&x)? + b.abs() * dom.norm(&u)?);
        let d = if whole { 0.0 } else { distance_to(&defect, y.as_ref(), cod)? };
        membership = membership.max(d / s);
        nonlinearity = nonlinearity.max(cod.norm(&defect)? / s);
        let qn = if whole { 0.0 } else { distance_to(&fx, y.as_ref(), cod)? };
        isometry = isometry.max((qn - dom.norm(&x)?).abs() / scale(dom.norm(&x)?));
    }
    let gate_passed = gate_residual <= opts.tol;
    Ok(Thm2Report {
        map: f.name(),
        options: *opts,
        gate_residual,
        gate_passed,
        singular_values: est.singular_values,
        y_dim: est.basis.len(),
        gap_ratio: est.gap_ratio,
        conclusive: est.conclusive,
        membership_residual: membership,
        isometry_residual: isometry,
        nonlinearity,
        passed: est.conclusive && gate_passed && membership <= opts.tol && isometry <= opts.tol,
    })
}
