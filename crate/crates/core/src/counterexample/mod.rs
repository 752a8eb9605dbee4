//! A non-linear map that preserves the semi-inner product.
//!
//! Starting from a three-dimensional smooth, strictly convex norm `X` that is
//! not Euclidean, the pipeline
//!
//! 1. finds a line `Y ⊂ X` whose complement `Y^⊥` is not closed under addition
//!    ([`search_nonlinear_complement`]);
//! 2. takes `W = X/Y` in slice coordinates and the metric-projection section
//!    `f: W → X`, which preserves the semi-inner product but is not linear
//!    ([`build_f`]);
//! 3. forms `Z = (W ⊕_p W ⊕_p …) ⊕_p (X ⊕_p X ⊕_p …)` over finitely supported
//!    sequences and the shift
//!    `h((w₁, w₂, …), (x₁, x₂, …)) = ((w₂, …), (f(w₁), x₁, x₂, …))`
//!    ([`shift_map_h`]);
//! 4. certifies that `h` preserves `⟨·|·⟩_Z` on samples and that it is not
//!    linear on a witness inherited from `f` ([`certify_h`]).
//!
//! Every step emits a replayable [`Certificate`].

mod certificate;
mod family;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use certificate::{replay, Certificate, CertificateKind, Evidence, InstanceRecord, ReplayMode, ReplayOutcome};
pub use family::{near_lp_family, NEAR_LP_EXPONENT};

use crate::error::{Error, Result};
use crate::norms::{BlockIndex, BlockSpace, FiniteSupportElement, NormModel, SequenceSum, Vector};
use crate::ortho::{complement_linearity_probe, ComplementProbe, SubspaceBasis};
use crate::quotient::{section_map, QuotientElement, QuotientSpace};
use crate::sampling;
use crate::sip::sip_sum_eval;

pub const DEFAULT_P: f64 = 3.0;
pub const DEFAULT_DIRECTIONS: usize = 10_000;
pub const DEFAULT_THRESHOLD: f64 = 1e-2;
/// Pairs probed per sweep direction.
pub const SWEEP_PAIRS: usize = 4;
/// Pairs probed for the final complement certificate.
pub const CERTIFICATE_PAIRS: usize = 64;
pub const REFINE_STEPS: usize = 48;
/// Solver tolerance for every section evaluation in the pipeline.
pub const SECTION_TOL: f64 = 1e-12;
/// Largest support drawn when sampling elements of `Z`.
pub const MAX_SUPPORT: usize = 5;
/// Block positions `0..BLOCK_WINDOW` of each stream are eligible for sampling.
const BLOCK_WINDOW: usize = 6;

/// Everything the construction needs, built from `(X, direction of Y, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleInstance {
    pub x3: NormModel,
    pub direction: Vector,
    pub quotient: QuotientSpace,
    /// `W = X/Y` in slice coordinates.
    pub w_model: NormModel,
    pub p: f64,
    pub z: SequenceSum,
}

impl CounterexampleInstance {
    pub fn new(x3: NormModel, direction: Vector, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidArgument(format!("sum exponent must lie in (1, inf), got {p}")));
        }
        let y = SubspaceBasis::span(direction.clone(), x3.clone())?;
        let quotient = QuotientSpace::new(y)?;
        let w_model = quotient.coordinate_model();
        let z = SequenceSum {
            p,
            w: w_model.clone(),
            x: x3.clone(),
        };
        Ok(Self {
            x3,
            direction,
            quotient,
            w_model,
            p,
            z,
        })
    }

    pub fn subspace(&self) -> &SubspaceBasis {
        self.quotient.subspace()
    }

    pub fn record(&self) -> InstanceRecord {
        InstanceRecord::new(&self.x3, &self.direction, Some(self.p))
    }

    /// `max |‖u‖_W − ‖[E u]‖|` over sampled W coordinates, both sides evaluated
    /// independently (coordinate model vs. direct quotient norm of the embedding).
    pub fn w_norm_consistency(&self, n: usize, seed: u64) -> Result<f64> {
        let mut rng = sampling::rng(seed);
        let mut worst = 0.0_f64;
        for _ in 0..n {
            let u = sampling::scaled_sphere(&mut rng, self.w_model.dim());
            let direct = crate::quotient::quotient_norm(
                &QuotientElement::new(self.quotient.embed(&u)),
                &self.quotient,
                SECTION_TOL,
            )?;
            worst = worst.max((self.w_model.norm(&u)? - direct).abs());
        }
        Ok(worst)
    }
}

/// The section `f: W → X`, `f(u) = the Y^⊥ part of E u`.
#[derive(Debug, Clone, Copy)]
pub struct SectionMap<'a> {
    quotient: &'a QuotientSpace,
}

impl SectionMap<'_> {
    pub fn eval(&self, u: &Vector) -> Result<Vector> {
        u.check_dim(self.quotient.quotient_dim())?;
        section_map(&QuotientElement::new(self.quotient.embed(u)), self.quotient, SECTION_TOL)
    }
}

pub fn build_f(inst: &CounterexampleInstance) -> SectionMap<'_> {
    SectionMap {
        quotient: &inst.quotient,
    }
}

/// Upper-hemisphere Fibonacci grid; antipodal directions span the same line.
pub fn fibonacci_hemisphere(n: usize) -> Vec<Vector> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            Vector::from(vec![r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

/// Search budget and acceptance threshold for [`search_nonlinear_complement`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub n_dirs: usize,
    pub seed: u64,
    pub threshold: f64,
    pub sweep_pairs: usize,
    pub certificate_pairs: usize,
    pub refine_steps: usize,
}

impl SearchOptions {
    pub fn new(n_dirs: usize, seed: u64, threshold: f64) -> Self {
        Self {
            n_dirs,
            seed,
            threshold,
            sweep_pairs: SWEEP_PAIRS,
            certificate_pairs: CERTIFICATE_PAIRS,
            refine_steps: REFINE_STEPS,
        }
    }
}

/// Worker pool bounded by `SIPLAB_THREADS` when set.
pub(crate) fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SIPLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("SIPLAB_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn probe_line(x3: &NormModel, d: &Vector, pairs: usize, seed: u64, threshold: f64) -> Option<ComplementProbe> {
    let y = SubspaceBasis::span(d.clone(), x3.clone()).ok()?;
    complement_linearity_probe(&y, pairs, seed, threshold).ok()
}

/// Probe seed of the final complement certificate.
pub(crate) fn certificate_probe_seed(seed: u64) -> u64 {
    sampling::derive_seed(seed, u64::MAX)
}

/// Sweeps lines `span(d)` for a non-linear complement and certifies the best one.
///
/// The sweep is parallel; candidates are merged by (residual descending,
/// grid index ascending), so the outcome depends on the seed only.
pub fn search_nonlinear_complement(x3: &NormModel, opts: &SearchOptions) -> Result<(SubspaceBasis, Certificate)> {
    if x3.dim() != 3 {
        return Err(Error::InvalidArgument(format!("the search runs in dimension 3, got {}", x3.dim())));
    }
    if !x3.is_smooth() || !x3.is_strictly_convex() {
        return Err(Error::Unsupported(format!("{x3} must be smooth and strictly convex")));
    }
    let grid = fibonacci_hemisphere(opts.n_dirs);
    let scores: Vec<f64> = pool()?.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, d)| {
                probe_line(x3, d, opts.sweep_pairs, sampling::derive_seed(opts.seed, i as u64), opts.threshold)
                    .map_or(f64::NEG_INFINITY, |p| p.max_residual)
            })
            .collect()
    });
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_finite() && best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let Some((index, _)) = best else {
        return Err(Error::NoNonlinearComplement {
            threshold: opts.threshold,
            best: 0.0,
            directions: opts.n_dirs,
        });
    };

    // seeded local refinement around the best grid direction, scored on a common seed
    let score_seed = sampling::derive_seed(opts.seed, opts.n_dirs as u64);
    let score = |d: &Vector| {
        probe_line(x3, d, 2 * opts.sweep_pairs, score_seed, opts.threshold).map_or(f64::NEG_INFINITY, |p| p.max_residual)
    };
    let mut dir = grid[index].clone();
    let mut current = score(&dir);
    let mut radius = (2.0 / opts.n_dirs.max(1) as f64).sqrt().min(0.5);
    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, opts.n_dirs as u64 + 1));
    for _ in 0..opts.refine_steps {
        let step = sampling::unit_sphere(&mut rng, 3).scaled(radius * rng.random_range(0.25..1.0));
        let cand = &dir + &step;
        let cand = cand.scaled(1.0 / cand.euclidean());
        let s = score(&cand);
        if s > current {
            dir = cand;
            current = s;
        } else {
            radius *= 0.8;
        }
    }

    let y = SubspaceBasis::span(dir.clone(), x3.clone())?;
    let probe_seed = certificate_probe_seed(opts.seed);
    let probe = complement_linearity_probe(&y, opts.certificate_pairs, probe_seed, opts.threshold)?;
    if !probe.violation() {
        return Err(Error::NoNonlinearComplement {
            threshold: opts.threshold,
            best: probe.max_residual,
            directions: opts.n_dirs,
        });
    }
    let cert = Certificate::complement(InstanceRecord::new(x3, &dir, None), opts.seed, probe_seed, &probe);
    Ok((y, cert))
}

/// `h((w₁, w₂, …), (x₁, x₂, …)) = ((w₂, …), (f(w₁), x₁, x₂, …))`.
pub fn shift_map_h(z: &FiniteSupportElement, inst: &CounterexampleInstance) -> Result<FiniteSupportElement> {
    inst.z.validate(z)?;
    let f = build_f(inst);
    let mut out = FiniteSupportElement::new();
    for (idx, v) in z.iter() {
        match idx {
            BlockIndex::W(0) => out.insert(BlockIndex::X(0), f.eval(v)?),
            BlockIndex::W(i) => out.insert(BlockIndex::W(i - 1), v.clone()),
            BlockIndex::X(j) => out.insert(BlockIndex::X(j + 1), v.clone()),
        }
    }
    Ok(out)
}

/// Finitely supported element of `Z` with at most [`MAX_SUPPORT`] blocks on
/// the first [`BLOCK_WINDOW`] positions of each stream; `W(0)` is included
/// three times out of four so `f` is exercised.
pub fn sample_element<R: Rng + ?Sized>(rng: &mut R, inst: &CounterexampleInstance) -> FiniteSupportElement {
    let mut z = FiniteSupportElement::new();
    let size = rng.random_range(1..=MAX_SUPPORT);
    if rng.random_bool(0.75) {
        z.insert(BlockIndex::W(0), sampling::scaled_sphere(rng, inst.w_model.dim()));
    }
    while z.support_len() < size {
        let i = rng.random_range(0..BLOCK_WINDOW);
        let idx = if rng.random::<bool>() { BlockIndex::W(i) } else { BlockIndex::X(i) };
        if z.get(idx).is_none() {
            let dim = inst.z.block_model(idx).expect("both streams exist").dim();
            z.insert(idx, sampling::scaled_sphere(rng, dim));
        }
    }
    z
}

/// Residuals of `h` on one sampled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairResiduals {
    pub sip: f64,
    pub norm: f64,
    pub sip4: f64,
}

pub(crate) fn pair_residuals(
    inst: &CounterexampleInstance,
    z: &FiniteSupportElement,
    a: &FiniteSupportElement,
) -> Result<PairResiduals> {
    let (hz, ha) = (shift_map_h(z, inst)?, shift_map_h(a, inst)?);
    let nz = inst.z.sum_norm(z)?;
    let na = inst.z.sum_norm(a)?;
    let before = sip_sum_eval(z, a, &inst.z)?;
    let after = sip_sum_eval(&hz, &ha, &inst.z)?;
    let diag = sip_sum_eval(&hz, &hz, &inst.z)?;
    Ok(PairResiduals {
        sip: (after - before).abs() / (nz * na).max(1.0),
        norm: (inst.z.sum_norm(&hz)? - nz).abs() / (1.0 + nz),
        sip4: (diag - nz * nz).abs() / (nz * nz).max(1.0),
    })
}

/// Measures `⟨h(z)|h(a)⟩_Z` against `⟨z|a⟩_Z` on `n_pairs` seeded pairs.
pub fn certify_preservation(inst: &CounterexampleInstance, n_pairs: usize, seed: u64, tol: f64) -> Result<Certificate> {
    let mut rng = sampling::rng(seed);
    let pairs: Vec<_> = (0..n_pairs)
        .map(|_| (sample_element(&mut rng, inst), sample_element(&mut rng, inst)))
        .collect();
    let residuals = pool()?.install(|| {
        pairs
            .par_iter()
            .map(|(z, a)| pair_residuals(inst, z, a))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut worst = (0usize, f64::NEG_INFINITY);
    let (mut max_norm, mut max_sip4) = (0.0_f64, 0.0_f64);
    for (i, r) in residuals.iter().enumerate() {
        if r.sip > worst.1 {
            worst = (i, r.sip);
        }
        max_norm = max_norm.max(r.norm);
        max_sip4 = max_sip4.max(r.sip4);
    }
    let worst_pair = pairs.get(worst.0).cloned();
    Ok(Certificate::preservation(
        inst.record(),
        seed,
        tol,
        n_pairs,
        worst.1.max(0.0),
        max_norm,
        max_sip4,
        worst_pair,
    ))
}

/// `‖h(αz + βa) − αh(z) − βh(a)‖_Z`.
pub fn h_violation(inst: &CounterexampleInstance, alpha: f64, beta: f64, z: &FiniteSupportElement, a: &FiniteSupportElement) -> Result<f64> {
    let combo = z.lincomb(alpha, a, beta)?;
    let lhs = shift_map_h(&combo, inst)?;
    let rhs = shift_map_h(z, inst)?.lincomb(alpha, &shift_map_h(a, inst)?, beta)?;
    inst.z.sum_norm(&lhs.lincomb(1.0, &rhs, -1.0)?)
}

/// Non-linearity of `h` on the complement witness `(z₁, z₂)` placed in block `w₁`.
pub fn certify_nonlinearity(
    inst: &CounterexampleInstance,
    z1: &Vector,
    z2: &Vector,
    seed: u64,
    threshold: f64,
) -> Result<Certificate> {
    let q = &inst.quotient;
    let z = FiniteSupportElement::new().with(BlockIndex::W(0), q.coords_of(z1)?);
    let a = FiniteSupportElement::new().with(BlockIndex::W(0), q.coords_of(z2)?);
    let violation = h_violation(inst, 1.0, 1.0, &z, &a)?;
    Ok(Certificate::nonlinearity(inst.record(), seed, threshold, 1.0, 1.0, z, a, violation))
}

/// Both certificates for `h`: preservation on `n_pairs` samples and the
/// non-linearity witness inherited from the complement certificate.
pub fn certify_h(
    inst: &CounterexampleInstance,
    complement: &Certificate,
    n_pairs: usize,
    seed: u64,
    tol: f64,
    threshold: f64,
) -> Result<(Certificate, Certificate)> {
    let Evidence::Complement { witness: Some(w), .. } = &complement.evidence else {
        return Err(Error::InvalidArgument("complement certificate carries no witness".into()));
    };
    let preservation = certify_preservation(inst, n_pairs, seed, tol)?;
    let nonlinearity = certify_nonlinearity(inst, &w.z1, &w.z2, seed, threshold)?;
    Ok((preservation, nonlinearity))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub x3: NormModel,
    pub p: f64,
    pub seed: u64,
    pub search: SearchOptions,
    pub n_pairs: usize,
    pub tol: f64,
}

impl PipelineConfig {
    pub fn new(x3: NormModel, p: f64, seed: u64) -> Self {
        Self {
            x3,
            p,
            seed,
            search: SearchOptions::new(DEFAULT_DIRECTIONS, seed, DEFAULT_THRESHOLD),
            n_pairs: 1000,
            tol: 1e-6,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::new(NormModel::default_mixed(), DEFAULT_P, 42)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub instance: CounterexampleInstance,
    pub complement: Certificate,
    pub preservation: Certificate,
    pub nonlinearity: Certificate,
}

impl PipelineResult {
    pub fn certificates(&self) -> [&Certificate; 3] {
        [&self.complement, &self.preservation, &self.nonlinearity]
    }

    pub fn passed(&self) -> bool {
        self.certificates().iter().all(|c| c.passed)
    }
}

/// Search, build and certify in one go.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineResult> {
    let (y, mut complement) = search_nonlinear_complement(&cfg.x3, &cfg.search)?;
    let instance = CounterexampleInstance::new(cfg.x3.clone(), y.vectors()[0].clone(), cfg.p)?;
    complement.instance = instance.record();
    let (preservation, nonlinearity) = certify_h(&instance, &complement, cfg.n_pairs, cfg.seed, cfg.tol, cfg.search.threshold)?;
    Ok(PipelineResult {
        instance,
        complement,
        preservation,
        nonlinearity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from(c.to_vec())
    }

    fn instance() -> CounterexampleInstance {
        CounterexampleInstance::new(NormModel::default_mixed(), v(&[1.0, 1.0, 0.0]), 3.0).unwrap()
    }

    #[test]
    fn grid_is_on_the_upper_hemisphere() {
        let g = fibonacci_hemisphere(100);
        assert!(g.iter().all(|d| (d.euclidean() - 1.0).abs() < 1e-12 && d[2] > 0.0));
    }

    #[test]
    fn f_of_zero_is_zero() {
        let inst = instance();
        assert!(build_f(&inst).eval(&Vector::zeros(2)).unwrap().is_zero());
    }

    #[test]
    fn h_of_zero_is_zero() {
        let inst = instance();
        assert!(shift_map_h(&FiniteSupportElement::new(), &inst).unwrap().is_zero());
    }

    #[test]
    fn h_shifts_x_stream() {
        let inst = instance();
        let z = FiniteSupportElement::new()
            .with(BlockIndex::X(0), v(&[1.0, 2.0, 3.0]))
            .with(BlockIndex::X(2), v(&[0.0, -1.0, 0.5]));
        let hz = shift_map_h(&z, &inst).unwrap();
        assert_eq!(hz.get(BlockIndex::X(1)), z.get(BlockIndex::X(0)));
        assert_eq!(hz.get(BlockIndex::X(3)), z.get(BlockIndex::X(2)));
        assert_eq!(hz.support_len(), 2);
        let (a, b) = (inst.z.sum_norm(&z).unwrap(), inst.z.sum_norm(&hz).unwrap());
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn h_rejects_bad_blocks() {
        let inst = instance();
        let z = FiniteSupportElement::new().with(BlockIndex::W(1), v(&[1.0, 2.0, 3.0]));
        assert!(matches!(shift_map_h(&z, &inst), Err(Error::BlockLayout(_))));
    }

    #[test]
    fn unit_w_block_maps_to_unit_x_block() {
        let inst = instance();
        let mut u = v(&[0.3, -0.8]);
        u = u.scaled(1.0 / inst.w_model.norm(&u).unwrap());
        let z = FiniteSupportElement::new().with(BlockIndex::W(0), u);
        let hz = shift_map_h(&z, &inst).unwrap();
        assert_eq!(hz.support_len(), 1);
        assert!((inst.z.sum_norm(&hz).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn w_model_matches_direct_quotient_norm() {
        assert!(instance().w_norm_consistency(20, 1).unwrap() < 1e-7);
    }

    #[test]
    fn h_preserves_on_a_few_pairs() {
        let c = certify_preservation(&instance(), 40, 3, 1e-6).unwrap();
        assert!(c.passed, "{c:?}");
    }
}
