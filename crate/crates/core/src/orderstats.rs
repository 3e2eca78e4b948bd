//! Order statistics of i.i.d. sub-channel coefficients.
//!
//! All order indices are 1-based with index 1 the maximum (the underlying
//! descending convention starts at 0; the API shifts by one). Densities
//! return 0 outside their ordering region.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::quad;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SampleFn = Arc<dyn Fn(&mut ChaCha12Rng) -> f64 + Send + Sync>;

/// A PDF/CDF pair with support bounds; the common unordered law feeding
/// the ordered-statistics formulas.
#[derive(Clone)]
pub struct DistributionDescriptor {
    pdf: RealFn,
    cdf: RealFn,
    /// [lo, hi]; hi may be +inf.
    pub support: (f64, f64),
    /// Common mean, set for the exponential family.
    pub mean: Option<f64>,
    sampler: Option<SampleFn>,
}

impl std::fmt::Debug for DistributionDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistributionDescriptor")
            .field("support", &self.support)
            .field("mean", &self.mean)
            .finish()
    }
}

impl DistributionDescriptor {
    pub fn new<P, C>(pdf: P, cdf: C, support: (f64, f64)) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DistributionDescriptor {
            pdf: Arc::new(pdf),
            cdf: Arc::new(cdf),
            support,
            mean: None,
            sampler: None,
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    pub fn with_sampler<S>(mut self, sampler: S) -> Self
    where
        S: Fn(&mut ChaCha12Rng) -> f64 + Send + Sync + 'static,
    {
        self.sampler = Some(Arc::new(sampler));
        self
    }

    /// Exponential law with the given mean; the common law of normalized
    /// squared DFT magnitudes of circular-symmetric Gaussian gains.
    pub fn exponential(mean: f64) -> Self {
        let m = mean;
        DistributionDescriptor::new(
            move |x: f64| if x < 0.0 { 0.0 } else { (-x / m).exp() / m },
            move |x: f64| if x < 0.0 { 0.0 } else { 1.0 - (-x / m).exp() },
            (0.0, f64::INFINITY),
        )
        .with_mean(mean)
        .with_sampler(move |rng| {
            use rand::Rng;
            m * rng.sample::<f64, _>(rand_distr::Exp1)
        })
    }

    /// Gamma law with integer shape k and the given scale.
    pub fn gamma(k: usize, scale: f64) -> Self {
        let kf = k as f64;
        let log_gamma_k = (1..k).map(|j| (j as f64).ln()).sum::<f64>();
        let s = scale;
        DistributionDescriptor::new(
            move |x: f64| {
                if x <= 0.0 {
                    return 0.0;
                }
                ((kf - 1.0) * (x / s).ln() - x / s - log_gamma_k).exp() / s
            },
            move |x: f64| {
                if x <= 0.0 {
                    return 0.0;
                }
                // regularized lower incomplete gamma at integer shape:
                // 1 - e^{-t} sum_{j<k} t^j/j!
                let t = x / s;
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..k {
                    term *= t / j as f64;
                    sum += term;
                }
                1.0 - (-t).exp() * sum
            },
            (0.0, f64::INFINITY),
        )
        .with_mean(kf * scale)
        .with_sampler(move |rng| {
            use rand::Rng;
            (0..k).map(|_| s * rng.sample::<f64, _>(rand_distr::Exp1)).sum()
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (self.pdf)(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// Draw one value; uses the attached sampler or inverse-CDF bisection.
    pub fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        if let Some(s) = &self.sampler {
            return s(rng);
        }
        use rand::Rng;
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    fn quantile(&self, u: f64) -> f64 {
        let (lo0, hi0) = self.support;
        let mut lo = lo0;
        let mut hi = if hi0.is_finite() { hi0 } else { lo0.max(1.0) };
        while !hi0.is_finite() && self.cdf(hi) < u {
            hi *= 2.0;
            if hi > 1e300 {
                break;
            }
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if self.cdf(m) < u {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    /// Check the descriptor is a proper law: cdf(lo) = 0 and cdf(hi) = 1
    /// within 1e-9, pdf integrates to 1 within 1e-6, cdf nondecreasing on a
    /// coarse grid.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support;
        if self.cdf(lo).abs() > 1e-9 {
            return Err(Error::Param("cdf(lo) must be 0".into()));
        }
        let top = if hi.is_finite() { self.cdf(hi) } else { self.cdf(1e12) };
        if (top - 1.0).abs() > 1e-9 {
            return Err(Error::Param("cdf(hi) must be 1".into()));
        }
        let mass = quad::integrate_support(|x| self.pdf(x), lo, hi, 1e-10);
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Param(format!("pdf integrates to {mass}, not 1")));
        }
        let top_probe = if hi.is_finite() { hi } else { lo + 50.0 * (1.0 + lo.abs()) };
        let mut prev = -1.0;
        for i in 0..=64 {
            let x = lo + (top_probe - lo) * i as f64 / 64.0;
            let c = self.cdf(x);
            if c < prev - 1e-12 {
                return Err(Error::Param("cdf must be nondecreasing".into()));
            }
            prev = c;
        }
        Ok(())
    }
}

/// l ordered draws out of a population of n, all from `base`.
#[derive(Debug, Clone)]
pub struct OrderedEnsemble {
    pub l: usize,
    pub n: usize,
    pub base: DistributionDescriptor,
}

impl OrderedEnsemble {
    pub fn new(l: usize, n: usize, base: DistributionDescriptor) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::Param(format!("need 1 <= l <= n, got l={l} n={n}")));
        }
        Ok(OrderedEnsemble { l, n, base })
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

fn falling_ratio(l: usize, i: usize) -> f64 {
    // l! / ((l-i)! (i-1)!)
    (ln_factorial(l) - ln_factorial(l - i) - ln_factorial(i - 1)).exp()
}

/// Density of the i-th ordered coefficient out of `ens.l` (i = 1 is the
/// maximum):
///
///   l!/((l-i)!(i-1)!) * F(x)^{l-i} (1-F(x))^{i-1} f(x).
pub fn ordered_pdf(ens: &OrderedEnsemble, i: usize, x: f64) -> Result<f64> {
    let l = ens.l;
    if i == 0 || i > l {
        return Err(Error::Param(format!("order index {i} outside 1..={l}")));
    }
    let f = ens.base.cdf(x);
    let p = ens.base.pdf(x);
    Ok(falling_ratio(l, i) * f.powi((l - i) as i32) * (1.0 - f).powi((i - 1) as i32) * p)
}

/// Joint-density selector for [`joint_pdf`].
#[derive(Debug, Clone, Copy)]
pub enum JointMode {
    /// (k-th, m-th) ordered pair out of l, m > k; point = (x_k, x_m), x_k >= x_m.
    Pair { k: usize, m: usize },
    /// All l order statistics; point descending, density l! prod f(x_i).
    AllOrdered,
    /// Top-l out of n: n!/(n-l)! F(x_{l-1})^{n-l} prod f(x_i).
    SelectedFromN,
}

pub fn joint_pdf(ens: &OrderedEnsemble, mode: JointMode, point: &[f64]) -> Result<f64> {
    let l = ens.l;
    let base = &ens.base;
    match mode {
        JointMode::Pair { k, m } => {
            if point.len() != 2 {
                return Err(Error::Param("pair mode expects a 2-point".into()));
            }
            if k == 0 || m <= k || m > l {
                return Err(Error::Param(format!("need 1 <= k < m <= l, got k={k} m={m}")));
            }
            let (x, y) = (point[0], point[1]);
            if x < y {
                return Ok(0.0);
            }
            let fx = base.cdf(x);
            let fy = base.cdf(y);
            let ln_c = ln_factorial(l)
                - ln_factorial(k - 1)
                - ln_factorial(m - k - 1)
                - ln_factorial(l - m);
            Ok(ln_c.exp()
                * (1.0 - fx).powi((k - 1) as i32)
                * base.pdf(x)
                * (fx - fy).max(0.0).powi((m - k - 1) as i32)
                * base.pdf(y)
                * fy.powi((l - m) as i32))
        }
        JointMode::AllOrdered => {
            if point.len() != l {
                return Err(Error::Param(format!("expected {l} coordinates")));
            }
            if !descending(point) {
                return Ok(0.0);
            }
            let mut v = ln_factorial(l).exp();
            for &x in point {
                v *= base.pdf(x);
            }
            Ok(v)
        }
        JointMode::SelectedFromN => {
            if point.len() != l {
                return Err(Error::Param(format!("expected {l} coordinates")));
            }
            if !descending(point) {
                return Ok(0.0);
            }
            let n = ens.n;
            let mut v = (ln_factorial(n) - ln_factorial(n - l)).exp()
                * base.cdf(point[l - 1]).powi((n - l) as i32);
            for &x in point {
                v *= base.pdf(x);
            }
            Ok(v)
        }
    }
}

fn descending(p: &[f64]) -> bool {
    p.windows(2).all(|w| w[0] >= w[1])
}

/// Conditional density of the m-th ordered coefficient given the i-th
/// equals y (m > i, so x <= y):
///
///   (l-i)!/((m-i-1)!(l-m)!) * (1 - F(x)/F(y))^{m-i-1} (F(x)/F(y))^{l-m}
///                            * f(x)/F(y).
pub fn conditional_pdf(ens: &OrderedEnsemble, m: usize, i: usize, y: f64, x: f64) -> Result<f64> {
    let l = ens.l;
    if i == 0 || m <= i || m > l {
        return Err(Error::Param(format!("need 1 <= i < m <= l, got i={i} m={m}")));
    }
    let fy = ens.base.cdf(y);
    if fy <= 0.0 {
        return Err(Error::Singular("conditioning value has zero CDF".into()));
    }
    if x > y {
        return Ok(0.0);
    }
    let fx = ens.base.cdf(x);
    let r = (fx / fy).clamp(0.0, 1.0);
    let ln_c = ln_factorial(l - i) - ln_factorial(m - i - 1) - ln_factorial(l - m);
    Ok(ln_c.exp() * (1.0 - r).powi((m - i - 1) as i32) * r.powi((l - m) as i32) * ens.base.pdf(x)
        / fy)
}

/// Residual density of a coefficient conditioned to exceed y:
/// f(x)/(1 - F(y)) for x >= y.
pub fn residual_pdf(base: &DistributionDescriptor, y: f64, x: f64) -> Result<f64> {
    let fy = base.cdf(y);
    if fy >= 1.0 {
        return Err(Error::Singular("conditioning value has full CDF".into()));
    }
    if x < y {
        return Ok(0.0);
    }
    Ok(base.pdf(x) / (1.0 - fy))
}

/// Density of the partial sum of the l ordered coefficients,
/// |A_j|^2 = Gamma_1 + Gamma_2 with Gamma_2 the minimum and Gamma_1 the sum
/// of the remaining l-1:
///
///   P(x) = int_0^{x/l} P_min(y) * P_{Gamma_1 | Gamma_2 = y}(x - y) dy.
///
/// The conditional law of Gamma_1 is the (l-1)-fold convolution of the
/// residual density above y; the outer limit honors Gamma_1 >= (l-1) Gamma_2.
pub fn partial_sum_pdf(ens: &OrderedEnsemble, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let l = ens.l;
    if l == 1 {
        return ordered_pdf(ens, 1, x);
    }
    let base = &ens.base;
    let lo = ens.base.support.0;
    let outer = quad::integrate(
        |y: f64| {
            let pmin = falling_ratio(l, l) * (1.0 - base.cdf(y)).powi((l - 1) as i32) * base.pdf(y);
            if pmin == 0.0 {
                return 0.0;
            }
            pmin * residual_sum_pdf(base, y, l - 1, x - y)
        },
        lo.max(0.0),
        x / l as f64,
        1e-8,
    );
    Ok(outer.max(0.0))
}

/// k-fold convolution of the residual density above y, evaluated at s.
fn residual_sum_pdf(base: &DistributionDescriptor, y: f64, k: usize, s: f64) -> f64 {
    if s < k as f64 * y {
        return 0.0;
    }
    let tail = 1.0 - base.cdf(y);
    if tail <= 0.0 {
        return 0.0;
    }
    match k {
        0 => 0.0,
        1 => base.pdf(s) / tail,
        _ => quad::integrate(
            |t: f64| base.pdf(t) / tail * residual_sum_pdf(base, y, k - 1, s - t),
            y,
            s - (k - 1) as f64 * y,
            1e-7,
        ),
    }
}
