//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use siplab::norms::Block;
use siplab::{sampling, NormModel, Vector};

pub fn v(c: &[f64]) -> Vector {
    Vector::from(c.to_vec())
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `‖y‖^{2−p} Σ xᵢ|yᵢ|^{p−1} sgn yᵢ`
pub fn lp_sip(x: &[f64], y: &[f64], p: f64) -> f64 {
    let ny = lp_norm(y, p);
    if ny == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().zip(y).map(|(a, b)| a * b.abs().powf(p - 1.0) * b.signum()).sum();
    ny.powf(2.0 - p) * s
}

/// A smooth strictly convex model of the requested dimension, cycling through
/// lp and mixed-block shapes.
pub fn model_for(dim: usize, k: usize) -> NormModel {
    match k % 3 {
        0 => NormModel::lp(1.5, dim).unwrap(),
        1 => NormModel::lp(3.0, dim).unwrap(),
        _ => NormModel::mixed_block(
            4.0,
            vec![Block { size: 1, q: 2.0 }, Block { size: dim - 1, q: 3.0 }],
            1.0,
        )
        .unwrap(),
    }
}

/// Orthonormal (Euclidean) vectors by Gram–Schmidt on sphere samples.
pub fn orthonormal<R: rand::Rng>(rng: &mut R, dim: usize, k: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    while out.len() < k {
        let mut u = sampling::unit_sphere(rng, dim);
        for b in &out {
            u = u.axpy(-u.dot(b), b);
        }
        let n = u.euclidean();
        if n > 1e-3 {
            out.push(u.scaled(1.0 / n));
        }
    }
    out
}

/// Lower bound for `‖u‖/‖u‖₂` from sphere samples, halved for safety.
pub fn euclidean_ratio_floor(m: &NormModel, seed: u64) -> f64 {
    let mut rng = sampling::rng(seed);
    let mut lo = f64::INFINITY;
    for _ in 0..2000 {
        lo = lo.min(m.norm(&sampling::unit_sphere(&mut rng, m.dim())).unwrap());
    }
    0.5 * lo
}

/// Minimizes a convex function of one variable on `[a, b]`: dense grid, then
/// golden section around the best grid point.
pub fn grid_golden(f: impl Fn(f64) -> f64, a: f64, b: f64, grid: usize) -> (f64, f64) {
    let h = (b - a) / grid as f64;
    let (mut best, mut fbest) = (a, f(a));
    for i in 1..=grid {
        let t = a + h * i as f64;
        let ft = f(t);
        if ft < fbest {
            best = t;
            fbest = ft;
        }
    }
    let (mut lo, mut hi) = (best - h, best + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t).min(fbest))
}

/// `dist(x, span(basis))` for one or two Euclidean-orthonormal basis vectors,
/// by (nested) grid plus golden-section search over the coefficients.
pub fn distance_oracle(x: &Vector, basis: &[Vector], m: &NormModel, ratio_floor: f64) -> f64 {
    // ‖Σtⱼbⱼ‖ ≤ 2‖x‖ at the optimum, and orthonormality bounds |t|₂ by that / floor
    let r = 2.0 * m.norm(x).unwrap() / ratio_floor + 1e-9;
    match basis {
        [b] => grid_golden(|t| m.norm(&x.axpy(-t, b)).unwrap(), -r, r, 400).1,
        [b1, b2] => {
            let inner = |t1: f64| {
                let x1 = x.axpy(-t1, b1);
                grid_golden(|t2| m.norm(&x1.axpy(-t2, b2)).unwrap(), -r, r, 60).1
            };
            grid_golden(inner, -r, r, 60).1
        }
        _ => panic!("oracle handles one or two directions"),
    }
}
