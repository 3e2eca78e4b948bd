//! Exponential subcarrier-magnitude family.
//!
//! The normalized squared magnitude of a noisy Gaussian subcarrier is
//! exponentially distributed with common mean `mean`. This module carries
//! the closed forms built on that law: truncated densities and their MGF,
//! the top-l partial-sum MGF/density out of n draws, and the joint law of
//! (minimum of the selected l, sum of the remaining l-1).
//!
//! The partial-sum MGF uses the spacing representation of exponential
//! order statistics: sum of the top l of n = sum_{k<=l} E_k + sum_{k>l} (l/k) E_k
//! with E_k i.i.d. exponentials, which yields the product form directly.

use crate::error::{Error, Result};

/// Upper-truncated exponential density on (0, upper).
pub fn tau_pdf(mean: f64, upper: f64, x: f64) -> Result<f64> {
    check_mean(mean)?;
    if upper <= 0.0 {
        return Err(Error::Param("upper bound must be positive".into()));
    }
    if x <= 0.0 || x >= upper {
        return Ok(0.0);
    }
    Ok(((-x / mean).exp() / mean) / (1.0 - (-upper / mean).exp()))
}

/// Two-sided truncated exponential density on [delta, upper].
pub fn zeta_pdf(mean: f64, delta: f64, upper: f64, x: f64) -> Result<f64> {
    check_bounds(mean, delta, upper)?;
    if x < delta || x > upper {
        return Ok(0.0);
    }
    let denom = (-delta / mean).exp() - (-upper / mean).exp();
    Ok((-x / mean).exp() / (mean * denom))
}

/// MGF of the two-sided truncated exponential:
///
///   M(w) = (e^{w delta - delta/m} - e^{w upper - upper/m})
///          / ((e^{-delta/m} - e^{-upper/m}) (1 - w m)).
pub fn zeta_mgf(mean: f64, delta: f64, upper: f64, w: f64) -> Result<f64> {
    check_bounds(mean, delta, upper)?;
    let denom = (-delta / mean).exp() - (-upper / mean).exp();
    let a = w - 1.0 / mean;
    if (w * mean - 1.0).abs() < 1e-12 {
        // integrand is constant 1/(m * denom) on [delta, upper]
        return Ok((upper - delta) / (mean * denom));
    }
    Ok(((a * delta).exp() - (a * upper).exp()) / (denom * (1.0 - w * mean)))
}

/// One factor of the partial-sum MGF product: (1 - w m)^{-1} for k <= l and
/// (1 - w m l / k)^{-1} beyond.
pub fn alpha_term_mgf(l: usize, mean: f64, k: usize, w: f64) -> Result<f64> {
    check_mean(mean)?;
    if k == 0 {
        return Err(Error::Param("term index starts at 1".into()));
    }
    let scale = if k <= l { mean } else { mean * l as f64 / k as f64 };
    if w * scale >= 1.0 {
        return Err(Error::Domain(format!("MGF diverges at w = {w}")));
    }
    Ok(1.0 / (1.0 - w * scale))
}

/// MGF of the sum of the largest l among n i.i.d. exponentials:
///
///   M(w) = (1 - w m)^{-l} prod_{k=l+1}^{n} (1 - w m l / k)^{-1}.
pub fn alpha_mgf(n: usize, l: usize, mean: f64, w: f64) -> Result<f64> {
    check_counts(n, l)?;
    check_mean(mean)?;
    if w * mean >= 1.0 {
        return Err(Error::Domain(format!("MGF diverges at w = {w} (w*mean >= 1)")));
    }
    let mut v = (1.0 - w * mean).powi(-(l as i32));
    for k in l + 1..=n {
        v /= 1.0 - w * mean * l as f64 / k as f64;
    }
    Ok(v)
}

/// Closed density of the top-l partial sum, with a cancellation flag.
#[derive(Debug, Clone, Copy)]
pub struct AlphaPdf {
    pub value: f64,
    /// Set when the alternating series lost more than ~4 leading digits;
    /// the returned value is the compensated sum and should be treated as
    /// low precision rather than discarded.
    pub precision_flagged: bool,
}

/// Density of the sum of the largest l among n i.i.d. exponentials:
///
///   C(n,l) e^{-x/m} [ x^{l-1}/(m^l (l-1)!)
///     + (1/m) sum_{k=1}^{n-l} (-1)^{l+k-1} C(n-l,k) (l/k)^{l-1}
///         ( e^{-kx/(l m)} - sum_{j=0}^{l-2} (1/j!) (-kx/(l m))^j ) ].
pub fn alpha_pdf(n: usize, l: usize, mean: f64, x: f64) -> Result<AlphaPdf> {
    check_counts(n, l)?;
    check_mean(mean)?;
    if x < 0.0 {
        return Ok(AlphaPdf { value: 0.0, precision_flagged: false });
    }
    let m = mean;
    let head = x.powi(l as i32 - 1) / (m.powi(l as i32) * factorial(l - 1));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut max_term = head.abs();
    let mut add = |v: f64, sum: &mut f64, comp: &mut f64| {
        max_term = max_term.max(v.abs());
        let t = *sum + v;
        if sum.abs() >= v.abs() {
            *comp += (*sum - t) + v;
        } else {
            *comp += (v - t) + *sum;
        }
        *sum = t;
    };
    add(head, &mut sum, &mut comp);
    for k in 1..=(n - l) {
        let kf = k as f64;
        let sign = if (l + k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binomial(n - l, k) * (l as f64 / kf).powi(l as i32 - 1) / m;
        let t = -kf * x / (l as f64 * m);
        // e^t minus its truncated Taylor series up to degree l-2
        let mut tail = t.exp();
        let mut pow = 1.0;
        for j in 0..=(l.saturating_sub(2)) {
            if l >= 2 && j <= l - 2 {
                tail -= pow;
                pow *= t / (j as f64 + 1.0);
            }
        }
        add(coeff * tail, &mut sum, &mut comp);
    }
    let total = sum + comp;
    let value = binomial(n, l) * (-x / m).exp() * total;
    let flagged = total.abs() > 0.0 && max_term / total.abs() > 1e4;
    Ok(AlphaPdf { value: value.max(0.0), precision_flagged: flagged })
}

/// Residual density of one subcarrier above y: (1/m) e^{-(x-y)/m}, x >= y.
pub fn residual_exp_pdf(mean: f64, y: f64, x: f64) -> Result<f64> {
    check_mean(mean)?;
    if x < y {
        return Ok(0.0);
    }
    Ok((-(x - y) / mean).exp() / mean)
}

/// Conditional density of Gamma_1 (sum of the l-1 above the minimum) given
/// Gamma_2 = y: a Gamma(l-1) shifted by (l-1)y,
///
///   (x - (l-1)y)^{l-2} e^{-(x-(l-1)y)/m} / ((l-2)! m^{l-1}), x >= (l-1)y.
pub fn cond_gamma1_pdf(l: usize, mean: f64, y: f64, x: f64) -> Result<f64> {
    check_mean(mean)?;
    if l < 2 {
        return Err(Error::Param("conditional sum needs l >= 2".into()));
    }
    let shift = (l - 1) as f64 * y;
    if x < shift {
        return Ok(0.0);
    }
    let u = x - shift;
    Ok(u.powi(l as i32 - 2) * (-u / mean).exp() / (factorial(l - 2) * mean.powi(l as i32 - 1)))
}

/// Marginal density of the minimum of the selected l out of n:
///
///   (n!/((l-1)! m)) sum_{h=0}^{n-l} (-1)^h / ((n-l-h)! h!) e^{-(l+h)x/m}.
pub fn marginal_g2_pdf(n: usize, l: usize, mean: f64, x: f64) -> Result<f64> {
    check_counts(n, l)?;
    check_mean(mean)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for h in 0..=(n - l) {
        let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
        s += sign / (factorial(n - l - h) * factorial(h)) * (-(l + h) as f64 * x / mean).exp();
    }
    Ok((factorial(n) / (factorial(l - 1) * mean) * s).max(0.0))
}

/// Joint density of (Gamma_2, Gamma_1) = (minimum of the selected l, sum of
/// the rest), expanded from the marginal times the conditional:
///
///   sum_h (-1)^h n! / ((n-l-h)! (l-1)! (l-2)! h! m^l)
///         (y - (l-1)x)^{l-2} e^{-(y + (h+1)x)/m},  x >= 0, y >= (l-1)x.
///
/// The power of the mean is m^l (one factor from the marginal, l-1 from the
/// conditional); the factorization joint = marginal x conditional holds
/// identically for every mean.
pub fn joint_g2_g1_pdf(n: usize, l: usize, mean: f64, x: f64, y: f64) -> Result<f64> {
    check_counts(n, l)?;
    check_mean(mean)?;
    if l < 2 {
        return Err(Error::Param("joint law needs l >= 2".into()));
    }
    if x < 0.0 || y < (l - 1) as f64 * x {
        return Ok(0.0);
    }
    let u = y - (l - 1) as f64 * x;
    let mut s = 0.0;
    for h in 0..=(n - l) {
        let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
        s += sign / (factorial(n - l - h) * factorial(h))
            * (-(y + (h as f64 + 1.0) * x) / mean).exp();
    }
    let c = factorial(n) / (factorial(l - 1) * factorial(l - 2) * mean.powi(l as i32));
    Ok((c * u.powi(l as i32 - 2) * s).max(0.0))
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Param("mean must be positive".into()));
    }
    Ok(())
}

fn check_bounds(mean: f64, delta: f64, upper: f64) -> Result<()> {
    check_mean(mean)?;
    if !(0.0 <= delta && delta < upper) {
        return Err(Error::Param(format!("need 0 <= delta < upper, got {delta}, {upper}")));
    }
    Ok(())
}

fn check_counts(n: usize, l: usize) -> Result<()> {
    if l == 0 || l > n {
        return Err(Error::Param(format!("need 1 <= l <= n, got l={l} n={n}")));
    }
    Ok(())
}

pub(crate) fn factorial(n: usize) -> f64 {
    (2..=n).map(|j| j as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0;
    for j in 0..k {
        v = v * (n - j) as f64 / (j + 1) as f64;
    }
    v
}
