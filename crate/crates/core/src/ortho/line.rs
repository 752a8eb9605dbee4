//! One-dimensional convex minimization primitives.

/// Root of a nondecreasing function on `[0, ∞)` with `f(0) < 0`.
///
/// Expands a bracket from `step`, then runs Illinois regula falsi with
/// bisection fallback. Stops once `|f| ≤ target` or the bracket collapses.
/// Returns `(u, f(u), evaluations)`.
pub(crate) fn monotone_root<F>(mut f: F, f0: f64, step: f64, target: f64, max_evals: usize) -> (f64, f64, usize)
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(f0 < 0.0);
    let mut evals = 0;
    let (mut lo, mut flo) = (0.0_f64, f0);
    let mut hi = step.max(f64::MIN_POSITIVE);
    let mut fhi;
    loop {
        fhi = f(hi);
        evals += 1;
        if fhi.abs() <= target {
            return (hi, fhi, evals);
        }
        if fhi > 0.0 || evals >= max_evals {
            break;
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
    }
    if fhi < 0.0 {
        return (hi, fhi, evals);
    }
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let mut side = 0i8;
    let mut width = hi - lo;
    while evals < max_evals {
        let mut u = (lo * fhi - hi * flo) / (fhi - flo);
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        let fu = f(u);
        evals += 1;
        if fu.abs() < best.1.abs() {
            best = (u, fu);
        }
        if fu.abs() <= target {
            return (u, fu, evals);
        }
        if fu < 0.0 {
            lo = u;
            flo = fu;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = u;
            fhi = fu;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        let new_width = hi - lo;
        if new_width > 0.5 * width {
            // regula falsi stalled on one side: bisect
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            evals += 1;
            if fm.abs() < best.1.abs() {
                best = (m, fm);
            }
            if fm.abs() <= target {
                return (m, fm, evals);
            }
            if fm < 0.0 {
                lo = m;
                flo = fm;
            } else {
                hi = m;
                fhi = fm;
            }
            side = 0;
        }
        width = hi - lo;
        if width <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (best.0, best.1, evals)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a convex function on `[0, ∞)` from function values only:
/// bracket by doubling from `step`, then golden-section search.
/// Returns `(u, g(u))`.
pub(crate) fn golden_halfline<G>(mut g: G, g0: f64, step: f64) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    let mut a = 0.0;
    let mut b = step;
    let mut gb = g(b);
    if gb >= g0 {
        // minimum inside [0, step]
        return golden_section(&mut g, 0.0, step, (0.0, g0));
    }
    let mut c = 2.0 * b;
    let mut gc = g(c);
    let mut guard = 0;
    while gc < gb && guard < 200 {
        a = b;
        b = c;
        gb = gc;
        c *= 2.0;
        gc = g(c);
        guard += 1;
    }
    golden_section(&mut g, a, c, (b, gb))
}

fn golden_section<G>(g: &mut G, mut a: f64, mut b: f64, best: (f64, f64)) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    let mut best = best;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..200 {
        if g1 < best.1 {
            best = (x1, g1);
        }
        if g2 < best.1 {
            best = (x2, g2);
        }
        if (b - a) <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        }
    }
    best
}
