//! Best approximation `argmin_{c} ‖x − Σ cⱼ bⱼ‖` over a finite basis.
//!
//! The objective is convex and smooth; its gradient is pulled back from the
//! supporting functional of the remainder. Each iteration picks a Newton
//! direction (finite-difference Hessian of the analytic gradient, with a
//! gradient fallback) and minimizes exactly along it by root-finding on the
//! directional derivative. Convergence is declared on the Birkhoff residual
//! `maxⱼ |φ_z(bⱼ)| / ‖bⱼ‖`, which doubles as the optimality certificate.

use nalgebra::{DMatrix, DVector};

use super::line::monotone_root;
use super::SubspaceBasis;
use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{NormModel, Vector};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITER: usize = 10_000;
const FLOOR_FACTOR: f64 = 64.0;

#[derive(Debug, Clone)]
pub struct ApproxOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial subspace coefficients; zero when absent.
    pub start: Option<Vec<f64>>,
}

impl ApproxOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            max_iter: MAX_ITER,
            start: None,
        }
    }

    pub fn start(mut self, c: Vec<f64>) -> Self {
        self.start = Some(c);
        self
    }
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self::with_tol(DEFAULT_TOL)
    }
}

/// A certified best approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub coefficients: Vec<f64>,
    /// `y* = Σ cⱼ bⱼ`
    pub point: Vector,
    /// `z = x − y*`
    pub remainder: Vector,
    /// `‖z‖ = dist(x, Y)`
    pub distance: f64,
    /// `maxⱼ |⟨bⱼ|z⟩| / (‖bⱼ‖‖z‖)`, zero when `z = 0`.
    pub residual: f64,
    pub iterations: usize,
}

struct State {
    norm: f64,
    /// `φ_z(bⱼ)`
    dots: Vec<f64>,
    residual: f64,
    /// Smallest residual resolvable in floating point at this iterate.
    floor: f64,
}

impl State {
    /// Gradient of `½‖x − Bc‖²`.
    fn grad(&self) -> Vec<f64> {
        self.dots.iter().map(|d| -self.norm * d).collect()
    }
}

struct Problem<'a> {
    x: &'a Vector,
    basis: &'a [Vector],
    model: &'a NormModel,
    bnorms: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn remainder(&self, c: &[f64]) -> Vector {
        let mut z = self.x.clone();
        for (cj, b) in c.iter().zip(self.basis) {
            z = z.axpy(-cj, b);
        }
        z
    }

    fn state(&self, c: &[f64]) -> Result<State> {
        let z = self.remainder(c);
        if z.is_zero() {
            return Ok(State {
                norm: 0.0,
                dots: vec![0.0; c.len()],
                residual: 0.0,
                floor: 0.0,
            });
        }
        let s = self.model.support(&z)?;
        let dots: Vec<f64> = self.basis.iter().map(|b| s.functional.dot(b)).collect();
        let residual = dots
            .iter()
            .zip(&self.bnorms)
            .fold(0.0_f64, |m, (d, bn)| m.max(d.abs() / bn));
        // z = x − Bc carries absolute rounding of order ε·(|x| + Σ|cⱼ||bⱼ|),
        // which bounds how well φ_z can be resolved once z is that small
        let scale = self.x.max_abs()
            + c.iter()
                .zip(self.basis)
                .map(|(cj, b)| cj.abs() * b.max_abs())
                .sum::<f64>();
        Ok(State {
            norm: s.norm,
            dots,
            residual,
            floor: FLOOR_FACTOR * f64::EPSILON * scale / z.max_abs(),
        })
    }

    /// Exact minimization of `t ↦ ‖x − B(c + t v)‖`; returns the step taken.
    fn line_minimize(&self, c: &[f64], v: &[f64], step_guess: Option<f64>, target_rel: f64) -> Result<f64> {
        let mut w = Vector::zeros(self.x.dim());
        for (vj, b) in v.iter().zip(self.basis) {
            w = w.axpy(*vj, b);
        }
        if w.is_zero() {
            return Ok(0.0);
        }
        let z0 = self.remainder(c);
        if z0.is_zero() {
            return Ok(0.0);
        }
        let s0 = self.model.support(&z0)?;
        let d0 = -s0.functional.dot(&w);
        if d0 == 0.0 {
            return Ok(0.0);
        }
        let sign = if d0 < 0.0 { 1.0 } else { -1.0 };
        let wn = self.model.norm(&w)?;
        let step = step_guess.unwrap_or_else(|| d0.abs() * s0.norm / (wn * wn));
        let target = target_rel * wn;
        let mut failure = None;
        let deriv = |u: f64| -> f64 {
            let z = z0.axpy(-sign * u, &w);
            if z.is_zero() {
                return 0.0;
            }
            match self.model.support(&z) {
                Ok(s) => -sign * s.functional.dot(&w),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let (u, _, _) = monotone_root(deriv, -d0.abs(), step, target, 400);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(sign * u)
    }

    fn newton_direction(&self, c: &[f64], st: &State) -> Result<Option<Vec<f64>>> {
        let k = c.len();
        let g = st.grad();
        let scale = c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let h = 1e-6 * scale;
        let mut hess = DMatrix::zeros(k, k);
        let mut probe = c.to_vec();
        for j in 0..k {
            probe[j] = c[j] + h;
            let up = self.state(&probe)?.grad();
            probe[j] = c[j] - h;
            let down = self.state(&probe)?.grad();
            probe[j] = c[j];
            for i in 0..k {
                hess[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let rhs = -DVector::from_column_slice(&g);
        let trace = hess.trace().abs().max(f64::MIN_POSITIVE);
        let mut mu = 0.0;
        for _ in 0..8 {
            let shifted = &hess + DMatrix::identity(k, k) * mu;
            if let Some(ch) = shifted.cholesky() {
                let d: Vec<f64> = ch.solve(&rhs).iter().copied().collect();
                let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
                if slope < 0.0 && d.iter().all(|v| v.is_finite()) {
                    return Ok(Some(d));
                }
            }
            mu = if mu == 0.0 { 1e-10 * trace } else { mu * 100.0 };
        }
        Ok(None)
    }
}

/// `x` already lies in `Y` up to rounding of the least-squares fit.
fn in_span(x: &Vector, z: &Vector) -> bool {
    z.max_abs() <= 1e-13 * x.max_abs()
}

pub(crate) fn solve(x: &Vector, sub: &SubspaceBasis, opts: &ApproxOptions) -> Result<Approximation> {
    let model = sub.ambient();
    x.check_dim(model.dim())?;
    let basis = sub.vectors();
    let k = basis.len();
    let bnorms = basis
        .iter()
        .map(|b| model.norm(b))
        .collect::<Result<Vec<_>>>()?;
    let prob = Problem {
        x,
        basis,
        model,
        bnorms,
    };
    let mut c = match &opts.start {
        Some(s) if s.len() == k => s.clone(),
        Some(s) => {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: s.len(),
            })
        }
        None => linalg::least_squares(basis, x.as_slice()).unwrap_or_else(|| vec![0.0; k]),
    };
    if in_span(x, &prob.remainder(&c)) {
        return Ok(Approximation {
            point: x.clone(),
            remainder: Vector::zeros(x.dim()),
            coefficients: c,
            distance: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut st = prob.state(&c)?;
    let mut iterations = 0;
    let mut stalls = 0;
    while st.residual > opts.tol.max(st.floor) {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: st.residual,
                last: c,
            });
        }
        iterations += 1;
        let before = st.residual;
        if k == 1 {
            // the derivative may vanish to high order at the minimizer (p > 2),
            // so run the bracket down to rounding instead of stopping on |f|
            let t = prob.line_minimize(&c, &[1.0], None, 0.0)?;
            c[0] += t;
        } else {
            let (dir, guess) = match prob.newton_direction(&c, &st)? {
                Some(d) => (d, Some(1.0)),
                None => (st.grad().iter().map(|g| -g).collect(), None),
            };
            let target = 0.1 * before;
            let t = prob.line_minimize(&c, &dir, guess, target)?;
            for (cj, dj) in c.iter_mut().zip(&dir) {
                *cj += t * dj;
            }
        }
        st = prob.state(&c)?;
        if st.residual >= before {
            // no progress along the chosen direction: cyclic exact coordinate sweep
            for j in 0..k {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                let t = prob.line_minimize(&c, &e, None, 0.5 * opts.tol)?;
                c[j] += t;
            }
            st = prob.state(&c)?;
            if st.residual >= before {
                stalls += 1;
                if stalls >= 3 {
                    return Err(Error::NoConvergence {
                        iterations,
                        residual: st.residual,
                        last: c,
                    });
                }
            }
        } else {
            stalls = 0;
        }
    }
    let point = sub.combine(&c);
    let remainder = x - &point;
    Ok(Approximation {
        coefficients: c,
        distance: st.norm,
        point,
        remainder,
        residual: st.residual,
        iterations,
    })
}
