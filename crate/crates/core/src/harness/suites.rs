//! Isometry invariance, Hanner inequalities and the coordinate `ℓ_p` checks.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{NormModel, Vector};
use crate::ortho::{best_approximation, orthogonality_residual, SubspaceBasis};
use crate::quotient::QuotientSpace;
use crate::sampling;
use crate::sip::sip_eval;

pub fn apply(t: &DMatrix<f64>, x: &Vector) -> Vector {
    let y = t * DVector::from_column_slice(x);
    Vector::from(y.iter().copied().collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub n_pairs: usize,
    pub seed: u64,
    pub tol: f64,
    /// `max |‖Tx‖_dst − ‖x‖_src| / ‖x‖_src`
    pub gate_residual: f64,
    pub gate_passed: bool,
    /// First sample breaking the gate.
    pub gate_violation: Option<Vector>,
    /// `max |[Tx|Ty]_dst − [x|y]_src| / (‖x‖‖y‖)`; absent when the gate failed.
    pub sip_residual: Option<f64>,
    pub passed: bool,
}

/// `[Tx|Ty] = [x|y]` for a linear surjective isometry `T`, checked on samples
/// after confirming `‖Tx‖ = ‖x‖` on the same samples.
pub fn isometry_invariance_check(
    t: &DMatrix<f64>,
    src: &NormModel,
    dst: &NormModel,
    n_pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<IsometryReport> {
    let n = src.dim();
    if t.nrows() != t.ncols() || t.ncols() != n || dst.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "T must be square of size {n}, got {}x{} into dimension {}",
            t.nrows(),
            t.ncols(),
            dst.dim()
        )));
    }
    let cols: Vec<Vector> = (0..n).map(|j| Vector::from(t.column(j).iter().copied().collect::<Vec<_>>())).collect();
    linalg::check_independent(&cols)?;

    let mut rng = sampling::rng(seed);
    let pairs: Vec<(Vector, Vector)> = (0..n_pairs)
        .map(|_| (sampling::scaled_sphere(&mut rng, n), sampling::scaled_sphere(&mut rng, n)))
        .collect();
    let mut gate_residual = 0.0_f64;
    let mut gate_violation = None;
    for x in pairs.iter().flat_map(|(x, y)| [x, y]) {
        let r = (dst.norm(&apply(t, x))? - src.norm(x)?).abs() / src.norm(x)?;
        gate_residual = gate_residual.max(r);
        if r > tol && gate_violation.is_none() {
            gate_violation = Some(x.clone());
        }
    }
    let gate_passed = gate_violation.is_none();
    let sip_residual = if gate_passed {
        let mut worst = 0.0_f64;
        for (x, y) in &pairs {
            let before = sip_eval(x, y, src)?;
            let after = sip_eval(&apply(t, x), &apply(t, y), dst)?;
            worst = worst.max((after - before).abs() / (src.norm(x)? * src.norm(y)?));
        }
        Some(worst)
    } else {
        None
    };
    Ok(IsometryReport {
        n_pairs,
        seed,
        tol,
        gate_residual,
        gate_passed,
        gate_violation,
        passed: sip_residual.is_some_and(|r| r <= tol),
        sip_residual,
    })
}

/// A seeded signed permutation matrix, an isometry of every `ℓ_p`.
pub fn signed_permutation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = sampling::rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut t = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        t[(i, j)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    t
}

/// Rotation by `theta` in the plane of coordinates `(i, j)`.
pub fn plane_rotation(n: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut t = DMatrix::identity(n, n);
    let (s, c) = theta.sin_cos();
    t[(i, i)] = c;
    t[(j, j)] = c;
    t[(i, j)] = -s;
    t[(j, i)] = s;
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HannerReport {
    pub p: f64,
    /// `‖u + v‖ᵖ + ‖u − v‖ᵖ`
    pub lhs: f64,
    /// `2(‖u‖ᵖ + ‖v‖ᵖ)`
    pub rhs: f64,
    pub scale: f64,
    /// `lhs ≥ rhs` for `p ≥ 2`, `lhs ≤ rhs` for `p ≤ 2`, up to `1e-12·scale`.
    pub satisfied: bool,
    /// `|lhs − rhs| ≤ 1e-12·scale`
    pub equal: bool,
}

pub const HANNER_REL_TOL: f64 = 1e-12;

pub fn hanner_check(u: &Vector, v: &Vector, p: f64) -> Result<HannerReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    u.check_dim(v.dim())?;
    // ‖x‖ₚᵖ summed directly, not raised back from the norm
    let n = |x: &Vector| x.iter().map(|c| c.abs().powf(p)).sum::<f64>();
    let lhs = n(&(u + v)) + n(&(u - v));
    let rhs = 2.0 * (n(u) + n(v));
    let scale = lhs.max(rhs);
    let slack = HANNER_REL_TOL * scale;
    let satisfied = (p < 2.0 || lhs >= rhs - slack) && (p > 2.0 || lhs <= rhs + slack);
    Ok(HannerReport {
        p,
        lhs,
        rhs,
        scale,
        satisfied,
        equal: (lhs - rhs).abs() <= slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HannerSuite {
    pub p: f64,
    pub dim: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub violations: usize,
    pub first_violation: Option<(Vector, Vector)>,
}

/// [`hanner_check`] on `n_pairs` seeded pairs.
pub fn hanner_suite(p: f64, dim: usize, n_pairs: usize, seed: u64) -> Result<HannerSuite> {
    let mut rng = sampling::rng(seed);
    let mut violations = 0;
    let mut first_violation = None;
    for _ in 0..n_pairs {
        let u = sampling::scaled_sphere(&mut rng, dim);
        let v = sampling::scaled_sphere(&mut rng, dim);
        if !hanner_check(&u, &v, p)?.satisfied {
            violations += 1;
            first_violation.get_or_insert((u, v));
        }
    }
    Ok(HannerSuite {
        p,
        dim,
        n_pairs,
        seed,
        violations,
        first_violation,
    })
}

/// One instance of the coordinate-subspace claim in `ℓ_p^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlSample {
    pub a: Vec<(usize, f64)>,
    pub b: Vec<(usize, f64)>,
    /// Orthogonality residuals of `x`, `y`, `x + y` against `Y`.
    pub residual_x: f64,
    pub residual_y: f64,
    pub residual_sum: f64,
    /// `‖m₁‖`, `‖m₂‖`: best approximations of `x ± y` in `Y`.
    pub m1: f64,
    pub m2: f64,
    /// `|dist(x+y, Y)ᵖ + dist(x−y, Y)ᵖ − 2(Σ|aᵢ|ᵖ + Σ|bᵢ|ᵖ)|`, relative.
    pub chain_coefficients: f64,
    /// `|2(Σ|aᵢ|ᵖ + Σ|bᵢ|ᵖ) − 2(‖x‖ᵖ + ‖y‖ᵖ)|`, relative.
    pub chain_norms: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlReport {
    pub n: usize,
    pub p: f64,
    pub coords: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub samples: Vec<SlSample>,
    pub worst: f64,
    pub first_failure: Option<usize>,
    pub passed: bool,
}

/// Draws per call of [`lp_sl_coordinate_case`].
pub const SL_SAMPLES: usize = 16;

fn coordinate_y(n: usize, p: f64, coords: &[usize]) -> Result<SubspaceBasis> {
    if coords.is_empty() || coords.len() >= n || coords.iter().any(|&c| c >= n) {
        return Err(Error::InvalidSubspace(format!("{coords:?} is not a proper coordinate set of 0..{n}")));
    }
    SubspaceBasis::coordinate(coords, NormModel::lp(p, n)?)
}

/// Checks the claim for one pair of disjoint coefficient families on the
/// complementary unit vectors `zᵢ = eᵢ`, `i ∉ coords`.
pub fn lp_sl_coordinate_instance(
    n: usize,
    p: f64,
    coords: &[usize],
    a: &[(usize, f64)],
    b: &[(usize, f64)],
    tol: f64,
) -> Result<SlSample> {
    let y_sub = coordinate_y(n, p, coords)?;
    let m = y_sub.ambient().clone();
    for &(i, _) in a.iter().chain(b) {
        if coords.contains(&i) || i >= n {
            return Err(Error::InvalidArgument(format!("index {i} is not a complementary coordinate")));
        }
    }
    if a.iter().any(|(i, _)| b.iter().any(|(j, _)| i == j)) {
        return Err(Error::InvalidArgument("index sets A and B must be disjoint".into()));
    }
    let build = |c: &[(usize, f64)]| {
        let mut v = vec![0.0; n];
        for &(i, s) in c {
            v[i] += s;
        }
        Vector::from(v)
    };
    let (x, y) = (build(a), build(b));
    let sum = &x + &y;
    let diff = &x - &y;
    let m1 = best_approximation(&sum, &y_sub, 1e-12)?;
    let m2 = best_approximation(&diff, &y_sub, 1e-12)?;
    let pp = |v: f64| v.powf(p);
    let coeffs = 2.0 * a.iter().chain(b).map(|(_, s)| s.abs().powf(p)).sum::<f64>();
    let dists = pp(m.norm(&(&sum - &m1))?) + pp(m.norm(&(&diff - &m2))?);
    let norms = 2.0 * (pp(m.norm(&x)?) + pp(m.norm(&y)?));
    let rel = |d: f64| d.abs() / coeffs.max(1.0);
    let mut s = SlSample {
        a: a.to_vec(),
        b: b.to_vec(),
        residual_x: orthogonality_residual(&x, &y_sub)?,
        residual_y: orthogonality_residual(&y, &y_sub)?,
        residual_sum: orthogonality_residual(&sum, &y_sub)?,
        m1: m.norm(&m1)?,
        m2: m.norm(&m2)?,
        chain_coefficients: rel(dists - coeffs),
        chain_norms: rel(coeffs - norms),
        passed: false,
    };
    s.passed = [s.residual_x, s.residual_y, s.residual_sum, s.m1, s.m2, s.chain_coefficients, s.chain_norms]
        .iter()
        .all(|&v| v <= tol);
    Ok(s)
}

/// [`lp_sl_coordinate_instance`] on [`SL_SAMPLES`] seeded disjoint splits of
/// the complementary coordinates.
pub fn lp_sl_coordinate_case(n: usize, p: f64, coords: &[usize], seed: u64, tol: f64) -> Result<SlReport> {
    coordinate_y(n, p, coords)?;
    let free: Vec<usize> = (0..n).filter(|i| !coords.contains(i)).collect();
    let mut rng = sampling::rng(seed);
    let mut samples = Vec::with_capacity(SL_SAMPLES);
    for _ in 0..SL_SAMPLES {
        let mut idx = free.clone();
        idx.shuffle(&mut rng);
        let na = rng.random_range(0..=idx.len());
        let nb = rng.random_range(0..=idx.len() - na);
        let a: Vec<_> = idx[..na].iter().map(|&i| (i, sampling::scalar(&mut rng))).collect();
        let b: Vec<_> = idx[na..na + nb].iter().map(|&i| (i, sampling::scalar(&mut rng))).collect();
        samples.push(lp_sl_coordinate_instance(n, p, coords, &a, &b, tol)?);
    }
    let worst = samples
        .iter()
        .flat_map(|s| [s.residual_x, s.residual_y, s.residual_sum, s.m1, s.m2, s.chain_coefficients, s.chain_norms])
        .fold(0.0_f64, f64::max);
    let first_failure = samples.iter().position(|s| !s.passed);
    Ok(SlReport {
        n,
        p,
        coords: coords.to_vec(),
        seed,
        tol,
        samples,
        worst,
        first_failure,
        passed: first_failure.is_none(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAttempt {
    pub coords: Vec<usize>,
    pub quotient_dim: usize,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDimReport {
    pub dim: usize,
    pub n_attempts: usize,
    pub seed: u64,
    pub attempts: Vec<DimensionAttempt>,
    pub passed: bool,
}

pub const DIMENSION_VERDICT: &str = "no isometric copy possible: dimension";

/// Dimension accounting for finite-dimensional spaces: every proper quotient
/// `X/Y` has smaller dimension than `X`, so no subspace of it is linearly
/// isometric to `X`.
pub fn finite_dim_sl_probe(m: &NormModel, n_attempts: usize, seed: u64) -> Result<FiniteDimReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidArgument("need dimension at least 2 for a proper subspace".into()));
    }
    let mut rng = sampling::rng(seed);
    let mut attempts = Vec::with_capacity(n_attempts);
    for _ in 0..n_attempts {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let k = rng.random_range(1..n);
        let mut coords = idx[..k].to_vec();
        coords.sort_unstable();
        let q = QuotientSpace::new(SubspaceBasis::coordinate(&coords, m.clone())?)?;
        let qd = q.quotient_dim();
        attempts.push(DimensionAttempt {
            coords,
            quotient_dim: qd,
            verdict: if qd < n {
                DIMENSION_VERDICT.to_string()
            } else {
                "dimension does not exclude a copy".to_string()
            },
        });
    }
    let passed = attempts.iter().all(|a| a.quotient_dim < n);
    Ok(FiniteDimReport {
        dim: n,
        n_attempts,
        seed,
        attempts,
        passed,
    })
}

/// Registers `V = span[vᵢ] ⊂ X/Y`; rejects families that are dependent in
/// the quotient, in particular any family larger than `dim(X/Y)`.
pub fn register_quotient_subspace(q: &QuotientSpace, v: &[Vector]) -> Result<Vec<Vector>> {
    let coords = v.iter().map(|x| q.coords_of(x)).collect::<Result<Vec<_>>>()?;
    linalg::check_independent(&coords)?;
    Ok(coords)
}
