//! Adaptive quadrature.
//!
//! Adaptive Simpson with an absolute tolerance and a hard cap on interval
//! splitting (2^20 leaf intervals). Semi-infinite integrals are mapped to
//! [0,1) by x = a + t/(1-t).

/// Default absolute tolerance used by the density/MGF evaluators.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Maximum recursion depth; 2^20 leaf intervals at the limit.
const MAX_DEPTH: u32 = 20;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Integrate `f` over the finite interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    adapt(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Integrate `f` over [a, +inf) via the substitution x = a + t/(1-t).
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let x = a + t / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integrate over a support that may have an infinite upper bound.
pub fn integrate_support<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi.is_finite() {
        integrate(f, lo, hi, tol)
    } else {
        integrate_to_inf(f, lo, tol)
    }
}
