//! Moment-generating functions and Craig-form Gaussian tail integrals.
//!
//! M(c) = int_0^inf P(x) e^{cx} dx for a nonnegative variable; at c < 0 this
//! is the Laplace transform of the density at -c. Error-rate averages of the
//! form E[a Q(sqrt(b X))] reduce to (a/pi) int_0^{pi/2} M(-b/(2 sin^2 phi)) dphi,
//! which avoids the outer expectation entirely.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orderstats::DistributionDescriptor;
use crate::quad;

/// sin^2(pi/2): the constant in the quadrature-level error-probability
/// integrand, kept named so the formula stays recognizable.
pub const G_SIN_SQ_HALF_PI: f64 = 1.0;

/// An MGF as an evaluator with its open interval of convergence.
#[derive(Clone)]
pub struct MgfRepr {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// (c_lo, c_hi); evaluation outside is a domain error.
    pub domain: (f64, f64),
}

impl std::fmt::Debug for MgfRepr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MgfRepr").field("domain", &self.domain).finish()
    }
}

impl MgfRepr {
    pub fn new<F>(eval: F, domain: (f64, f64)) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MgfRepr { eval: Arc::new(eval), domain }
    }

    /// Quadrature-backed MGF of a density descriptor.
    pub fn from_pdf(d: &DistributionDescriptor, c_hi: f64) -> Self {
        let d = d.clone();
        MgfRepr::new(
            move |c| {
                let (lo, hi) = d.support;
                quad::integrate_support(|x| d.pdf(x) * (c * x).exp(), lo, hi, quad::DEFAULT_TOL)
            },
            (f64::NEG_INFINITY, c_hi),
        )
    }

    /// MGF of a point mass at `s`.
    pub fn point_mass(s: f64) -> Self {
        MgfRepr::new(move |c| (c * s).exp(), (f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Empirical MGF of a sample: mean of e^{c x_i}.
    pub fn from_sample(sample: Vec<f64>) -> Self {
        MgfRepr::new(
            move |c| sample.iter().map(|&x| (c * x).exp()).sum::<f64>() / sample.len() as f64,
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    pub fn eval(&self, c: f64) -> Result<f64> {
        if c <= self.domain.0 || c >= self.domain.1 {
            return Err(Error::Domain(format!(
                "c = {c} outside the convergence interval ({}, {})",
                self.domain.0, self.domain.1
            )));
        }
        Ok((self.eval)(c))
    }
}

/// Constants of the error-rate template R_err(x) = a Q(sqrt(b x)).
#[derive(Debug, Clone, Copy)]
pub struct ErrorRateSpec {
    pub a: f64,
    pub b: f64,
    /// Scaled SNR sigma_w0^2 / (2 sigma_N^2); carried for reporting.
    pub snr_hat: f64,
}

impl ErrorRateSpec {
    pub fn new(a: f64, b: f64, snr_hat: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || snr_hat < 0.0 {
            return Err(Error::Param("need a > 0, b > 0, snr_hat >= 0".into()));
        }
        Ok(ErrorRateSpec { a, b, snr_hat })
    }
}

/// M(c) = int P(x) e^{cx} dx by quadrature, with divergence detection: the
/// transformed integrand must vanish toward the upper end of the support.
pub fn mgf_from_pdf(d: &DistributionDescriptor, c: f64) -> Result<f64> {
    let (lo, hi) = d.support;
    if !hi.is_finite() && c > 0.0 {
        // probe the far tail: growth there means the integral diverges
        let scale = 1.0 + lo.abs();
        let probes = [1e3 * scale, 1e4 * scale, 1e5 * scale];
        let mut prev = d.pdf(probes[0]) * (c * probes[0]).exp();
        for &x in &probes[1..] {
            let v = d.pdf(x) * (c * x).exp();
            if !v.is_finite() || (v > prev && v > 1e-12) {
                return Err(Error::Domain(format!("MGF integral diverges at c = {c}")));
            }
            prev = v;
        }
    }
    Ok(quad::integrate_support(|x| d.pdf(x) * (c * x).exp(), lo, hi, quad::DEFAULT_TOL))
}

/// k-th moment (k = 1..=4) via central differences of M at 0 with one
/// Richardson extrapolation step.
pub fn mgf_moment(m: &MgfRepr, k: usize) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::Param("moment order must be 1..=4".into()));
    }
    // keep the widest stencil point inside the convergence interval
    let room = m.domain.1.min(1.0);
    let mut h = match k {
        1 => 1e-3,
        2 => 1e-2,
        3 => 4e-2,
        _ => 8e-2,
    };
    if 2.0 * h >= room {
        h = room / 4.0;
    }
    let d = |h: f64| -> Result<f64> {
        let v = |c: f64| m.eval(c);
        Ok(match k {
            1 => (v(h)? - v(-h)?) / (2.0 * h),
            2 => (v(h)? - 2.0 * v(0.0)? + v(-h)?) / (h * h),
            3 => (v(2.0 * h)? - 2.0 * v(h)? + 2.0 * v(-h)? - v(-2.0 * h)?) / (2.0 * h * h * h),
            _ => {
                (v(2.0 * h)? - 4.0 * v(h)? + 6.0 * v(0.0)? - 4.0 * v(-h)? + v(-2.0 * h)?)
                    / (h * h * h * h)
            }
        })
    };
    // central stencils have O(h^2) error: Richardson with factor 4
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Craig-form Gaussian tail: Q(x) = (1/pi) int_0^{pi/2} exp(-x^2/(2 sin^2 phi)) dphi.
/// The squared variant integrates to pi/4 instead. x = 0 returns 1/2 (or 1/4).
pub fn q_craig(x: f64, squared: bool) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Param("q_craig requires x >= 0".into()));
    }
    let upper = if squared { PI / 4.0 } else { PI / 2.0 };
    if x == 0.0 {
        return Ok(upper / PI);
    }
    let v = quad::integrate(
        |phi: f64| {
            let s = phi.sin();
            if s <= 0.0 {
                return 0.0;
            }
            (-x * x / (2.0 * s * s)).exp()
        },
        0.0,
        upper,
        1e-13,
    );
    Ok(v / PI)
}

/// Average error rate E[a Q(sqrt(b X))] through the MGF route:
/// (a/pi) int_0^{pi/2} M(-b/(2 sin^2 phi)) dphi.
pub fn avg_error_rate(spec: &ErrorRateSpec, snr_mgf: &MgfRepr) -> Result<f64> {
    let reach = -spec.b / 2.0;
    if reach <= snr_mgf.domain.0 {
        return Err(Error::Domain("MGF not evaluable on the Craig contour".into()));
    }
    Ok(spec.a * craig_average(snr_mgf, spec.b / 2.0)?)
}

/// Quadrature-level error probability at a selection operator:
/// (1/pi) int_0^{pi/2} M(-g snr_hat / sin^2 phi) dphi with g = sin^2(pi/2).
///
/// The MGF argument is taken negative so the contour stays inside the
/// convergence region of any unbounded coefficient law; the value lies in
/// [0, 1/2] with equality only at zero SNR.
pub fn p_err_operator(op_mgf: &MgfRepr, snr_hat: f64) -> Result<f64> {
    if snr_hat < 0.0 {
        return Err(Error::Param("snr_hat must be nonnegative".into()));
    }
    if snr_hat == 0.0 {
        return Ok(0.5);
    }
    let v = craig_average(op_mgf, G_SIN_SQ_HALF_PI * snr_hat)?;
    Ok(v.clamp(0.0, 0.5))
}

/// (1/pi) int_0^{pi/2} M(-g / sin^2 phi) dphi. The phi = 0 endpoint maps to
/// M(-inf); integration starts at a negligible offset instead.
fn craig_average(m: &MgfRepr, g: f64) -> Result<f64> {
    if m.domain.0.is_finite() {
        return Err(Error::Domain("Craig contour needs an MGF defined on all of (-inf, 0]".into()));
    }
    let eps = 1e-9;
    let v = quad::integrate(
        |phi: f64| {
            let s = phi.sin();
            if s <= 0.0 {
                return 0.0;
            }
            (m.eval)(-g / (s * s))
        },
        eps,
        PI / 2.0,
        1e-12,
    );
    Ok(v / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{mean_var, run_trials, TrialPlan};
    use rand::Rng;
    use rand_distr::Exp1;

    /// Complementary error function by series/continued fraction; an
    /// oracle independent of the Craig integral.
    fn erfc_oracle(x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 - erfc_oracle(-x);
        }
        if x < 2.0 {
            // erf by Taylor series, then complement
            let mut term = x;
            let mut sum = x;
            let x2 = x * x;
            for n in 1..200 {
                term *= -x2 / n as f64;
                sum += term / (2 * n + 1) as f64;
                if term.abs() < 1e-18 {
                    break;
                }
            }
            1.0 - 2.0 / PI.sqrt() * sum
        } else {
            // Lentz continued fraction for the upper tail
            let x2 = x * x;
            let mut f = x;
            let mut c = f64::MAX;
            let mut d = 0.0f64;
            for n in 1..400 {
                let a = 0.5 * n as f64;
                d = x + a * d;
                if d == 0.0 {
                    d = 1e-300;
                }
                d = 1.0 / d;
                c = x + a / c;
                if c == 0.0 {
                    c = 1e-300;
                }
                f *= c * d;
                if (c * d - 1.0).abs() < 1e-17 {
                    break;
                }
                // alternate continued-fraction coefficient structure:
                // handled by the same loop because a increments by 1/2
            }
            (-x2).exp() / PI.sqrt() / f
        }
    }

    fn q_oracle(x: f64) -> f64 {
        0.5 * erfc_oracle(x / 2.0f64.sqrt())
    }

    #[test]
    fn mgf_normalization_and_laplace() {
        let exp = DistributionDescriptor::exponential(1.0);
        assert!((mgf_from_pdf(&exp, 0.0).unwrap() - 1.0).abs() < 1e-8);
        // Laplace transform of exp(1) at 1: 1/2
        assert!((mgf_from_pdf(&exp, -1.0).unwrap() - 0.5).abs() < 1e-8);
        // Gamma(3) at c = -0.7: (1.7)^{-3}
        let g3 = DistributionDescriptor::gamma(3, 1.0);
        assert!((mgf_from_pdf(&g3, -0.7).unwrap() - 1.7f64.powi(-3)).abs() < 1e-8);
        // divergence beyond the exponential abscissa
        assert!(mgf_from_pdf(&exp, 1.5).is_err());
    }

    #[test]
    fn moments_of_exponential() {
        let exp = DistributionDescriptor::exponential(1.0);
        let m = MgfRepr::new(|c| 1.0 / (1.0 - c), (f64::NEG_INFINITY, 1.0));
        assert!((mgf_moment(&m, 1).unwrap() - 1.0).abs() < 1e-6);
        assert!((mgf_moment(&m, 2).unwrap() - 2.0).abs() < 1e-5);
        assert!((mgf_moment(&m, 3).unwrap() - 6.0).abs() < 2e-3);
        assert!((mgf_moment(&m, 4).unwrap() - 24.0).abs() < 2e-2);
        // the quadrature-backed route agrees on the first moment
        let mq = MgfRepr::from_pdf(&exp, 1.0);
        assert!((mgf_moment(&mq, 1).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn top_l_mgf_first_moment_matches_monte_carlo() {
        use crate::subcarrier::alpha_mgf;
        let (n, l) = (4usize, 2usize);
        let m = MgfRepr::new(move |c| alpha_mgf(n, l, 1.0, c).unwrap(), (f64::NEG_INFINITY, 1.0));
        let anal = mgf_moment(&m, 1).unwrap();
        let vals = run_trials(&TrialPlan::new(200_000, 80), |_, rng| {
            let mut v = [0.0f64; 4];
            for b in v.iter_mut() {
                *b = rng.sample::<f64, _>(Exp1);
            }
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v[0] + v[1]
        })
        .unwrap();
        let (mean, var) = mean_var(&vals);
        let se = (var / vals.len() as f64).sqrt();
        assert!((anal - mean).abs() < 3.0 * se, "anal {anal} mc {mean} se {se}");
    }

    #[test]
    fn q_craig_limits_and_oracle() {
        assert!((q_craig(0.0, false).unwrap() - 0.5).abs() < 1e-15);
        assert!(q_craig(-1.0, false).is_err());
        // Q(1) = 0.1586552539...
        assert!((q_craig(1.0, false).unwrap() - 0.15865525393145707).abs() < 1e-10);
        // against the erfc oracle across [0, 6]
        let mut x = 0.0;
        while x <= 6.0 {
            let q = q_craig(x, false).unwrap();
            assert!((q - q_oracle(x)).abs() < 1e-10, "x={x}: {q} vs {}", q_oracle(x));
            x += 0.1;
        }
        // Q^2 identity
        let q2 = q_craig(1.0, true).unwrap();
        let q = q_craig(1.0, false).unwrap();
        assert!((q2 - q * q).abs() < 1e-9);
    }

    #[test]
    fn avg_error_rate_point_mass_and_limits() {
        let spec = ErrorRateSpec::new(1.0, 2.0, 0.0).unwrap();
        let s = 1.3;
        let m = MgfRepr::point_mass(s);
        let v = avg_error_rate(&spec, &m).unwrap();
        let expect = q_craig((spec.b * s).sqrt(), false).unwrap();
        assert!((v - expect).abs() < 1e-9);

        // b -> 0 gives a/2
        let spec = ErrorRateSpec::new(2.0, 1e-14, 0.0).unwrap();
        let v = avg_error_rate(&spec, &m).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
    }

    #[test]
    fn two_route_identity_on_the_corpus() {
        // Eq-26 average by direct quadrature vs the Craig/MGF route
        let laws: Vec<(DistributionDescriptor, MgfRepr)> = vec![
            (
                DistributionDescriptor::exponential(1.0),
                MgfRepr::new(|c| 1.0 / (1.0 - c), (f64::NEG_INFINITY, 1.0)),
            ),
            (
                DistributionDescriptor::gamma(3, 0.5),
                MgfRepr::new(|c| (1.0 - 0.5 * c).powi(-3), (f64::NEG_INFINITY, 2.0)),
            ),
        ];
        let spec = ErrorRateSpec::new(1.0, 2.0, 0.0).unwrap();
        for (pdf, mgf) in &laws {
            let direct = quad::integrate_to_inf(
                |x| spec.a * q_craig((spec.b * x).sqrt(), false).unwrap() * pdf.pdf(x),
                0.0,
                1e-10,
            );
            let via_mgf = avg_error_rate(&spec, mgf).unwrap();
            assert!((direct - via_mgf).abs() < 1e-7, "direct {direct} mgf {via_mgf}");
        }
        // point mass: closed on both routes
        let m = MgfRepr::point_mass(0.8);
        let direct = spec.a * q_craig((spec.b * 0.8).sqrt(), false).unwrap();
        assert!((avg_error_rate(&spec, &m).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn p_err_zero_snr_and_range() {
        let m = MgfRepr::new(|c| 1.0 / (1.0 - c), (f64::NEG_INFINITY, 1.0));
        assert_eq!(p_err_operator(&m, 0.0).unwrap(), 0.5);
        for s in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = p_err_operator(&m, s).unwrap();
            assert!(p > 0.0 && p < 0.5);
        }
    }

    #[test]
    fn p_err_strictly_decreasing_and_matches_symbol_flips() {
        let m = MgfRepr::new(|c| 1.0 / (1.0 - c), (f64::NEG_INFINITY, 1.0));
        let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
        let mut prev = 0.5;
        for &s in &grid {
            let p = p_err_operator(&m, s).unwrap();
            assert!(p < prev, "p_err not decreasing at {s}");
            prev = p;
        }
        // Monte Carlo cross-check: a unit symbol with Gaussian noise at SNR
        // s*X flips with probability Q(sqrt(2 s X)); p_err is its average.
        let s = 2.0;
        let vals = run_trials(&TrialPlan::new(2_000_000, 81), |_, rng| {
            let x: f64 = rng.sample(Exp1);
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            // error iff noise exceeds the symbol distance sqrt(2 s x)
            if noise > (2.0 * s * x).sqrt() {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let (emp, var) = mean_var(&vals);
        let se = (var / vals.len() as f64).sqrt();
        let p = p_err_operator(&m, s).unwrap();
        assert!((p - emp).abs() < 3.0 * se + 1e-4, "p {p} emp {emp}");
    }
}
