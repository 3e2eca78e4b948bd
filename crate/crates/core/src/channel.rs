//! Gaussian sub-channel model: transmittance ensembles, their discrete
//! Fourier images, single-carrier coefficients, SNR* quantities and the
//! security thresholds used by the selection operators.
//!
//! Conventions:
//! - the forward DFT is the unnormalized sum F_i = sum_k T_k e^{-i 2 pi i k / n};
//!   the inverse divides by n, so a round trip is the identity;
//! - a per-channel squared magnitude is "normalized" when divided by the
//!   used sub-channel count l, i.e. (1/l)|F(T_i)|^2.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::trial_rng;

/// Modulation and noise variances of the multicarrier link.
#[derive(Debug, Clone)]
pub struct ModulationConfig {
    /// Total sub-channel count n.
    pub n: usize,
    /// Used sub-channel count l, 1 <= l <= n.
    pub l: usize,
    /// Single-carrier quadrature modulation variance.
    pub sigma_omega0_sq: f64,
    /// Subcarrier modulation variance.
    pub sigma_omega_sq: f64,
    /// Per-sub-channel Gaussian noise variance on each quadrature, length n.
    pub sigma_n_sq: Vec<f64>,
    /// Vacuum noise variance.
    pub sigma_0_sq: f64,
}

impl ModulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 || self.l > self.n {
            return Err(Error::Param(format!("need 1 <= l <= n, got l={} n={}", self.l, self.n)));
        }
        if self.sigma_omega0_sq <= 0.0 || !self.sigma_omega0_sq.is_finite() {
            return Err(Error::Param("sigma_omega0_sq must be positive".into()));
        }
        if self.sigma_omega_sq <= 0.0 || !self.sigma_omega_sq.is_finite() {
            return Err(Error::Param("sigma_omega_sq must be positive".into()));
        }
        if self.sigma_0_sq <= 0.0 || !self.sigma_0_sq.is_finite() {
            return Err(Error::Param("sigma_0_sq must be positive".into()));
        }
        if self.sigma_n_sq.len() != self.n {
            return Err(Error::Param("sigma_N_sq must have length n".into()));
        }
        if self.sigma_n_sq.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Param("sigma_N_sq entries must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Eavesdropper parameters per sub-channel.
#[derive(Debug, Clone)]
pub struct EavesdropperModel {
    /// EPR variance W_i >= 1.
    pub w: Vec<f64>,
    /// Beam-splitter transmittance |T_Eve,i|^2 in [0, 1).
    pub t_eve_sq: Vec<f64>,
}

impl EavesdropperModel {
    pub fn new(w: Vec<f64>, t_eve_sq: Vec<f64>) -> Result<Self> {
        if w.len() != t_eve_sq.len() {
            return Err(Error::Param("W and |T_Eve|^2 must have equal length".into()));
        }
        if w.iter().any(|&v| v < 1.0) {
            return Err(Error::Param("EPR variance W_i must be >= 1".into()));
        }
        if t_eve_sq.iter().any(|&v| !(0.0..1.0).contains(&v)) {
            return Err(Error::Param("|T_Eve,i|^2 must lie in [0, 1)".into()));
        }
        Ok(EavesdropperModel { w, t_eve_sq })
    }

    /// Couple Eve's beam splitter to a transmittance vector:
    /// |T_Eve,i|^2 = 1 - |T_i|^2.
    pub fn from_transmittance(tv: &TransmittanceVector, w: Vec<f64>) -> Result<Self> {
        let t_eve_sq: Vec<f64> = tv.t.iter().map(|t| (1.0 - t.norm_sqr()).clamp(0.0, 1.0 - 1e-15)).collect();
        Self::new(w, t_eve_sq)
    }

    /// Excess noise N_i = (W_i - 1) |T_Eve,i|^2 / (1 - |T_Eve,i|^2).
    pub fn excess_noise(&self, i: usize) -> f64 {
        (self.w[i] - 1.0) * self.t_eve_sq[i] / (1.0 - self.t_eve_sq[i])
    }
}

/// Per-sub-channel complex gains with their DFT image and normalized
/// squared magnitudes (1/l)|F(T_i)|^2.
#[derive(Debug, Clone)]
pub struct TransmittanceVector {
    pub t: Vec<Complex64>,
    pub ft: Vec<Complex64>,
    pub mag_norm: Vec<f64>,
    /// Normalization count l used for `mag_norm`.
    pub l: usize,
}

impl TransmittanceVector {
    pub fn from_gains(t: Vec<Complex64>, l: usize) -> Result<Self> {
        if t.is_empty() || l == 0 {
            return Err(Error::Param("empty gain vector or l = 0".into()));
        }
        let ft = dft_transmittance(&t);
        let mag_norm = ft.iter().map(|f| f.norm_sqr() / l as f64).collect();
        Ok(TransmittanceVector { t, ft, mag_norm, l })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Draw n i.i.d. circular-symmetric complex Gaussian gains with
/// E|T_i|^2 = sigma_t_sq. With `clamp` set, each quadrature is
/// rejection-sampled into [0, 1/sqrt(2)] before the DFT is taken.
/// `mag_norm` is normalized by l = n.
pub fn sample_transmittance_vector(
    n: usize,
    sigma_t_sq: f64,
    seed: u64,
    clamp: bool,
) -> Result<TransmittanceVector> {
    if n == 0 {
        return Err(Error::Param("n must be >= 1".into()));
    }
    if !(sigma_t_sq > 0.0) || !sigma_t_sq.is_finite() {
        return Err(Error::Param("sigma_T_sq must be positive".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let comp_sd = (sigma_t_sq / 2.0).sqrt();
    let hi = 1.0 / 2.0f64.sqrt();
    let mut draw = |rng: &mut rand_chacha::ChaCha12Rng| -> f64 {
        if clamp {
            loop {
                let v: f64 = comp_sd * rng.sample::<f64, _>(StandardNormal);
                if (0.0..=hi).contains(&v) {
                    return v;
                }
            }
        } else {
            comp_sd * rng.sample::<f64, _>(StandardNormal)
        }
    };
    let t: Vec<Complex64> = (0..n)
        .map(|_| {
            let re = draw(&mut rng);
            let im = draw(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    TransmittanceVector::from_gains(t, n)
}

/// Unnormalized forward DFT: F_i = sum_k x_k e^{-i 2 pi i k / n}.
pub fn dft_transmittance(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse of [`dft_transmittance`] (divides by n).
pub fn idft_transmittance(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Single-carrier channel coefficient A_j = (1/l) sum_{i in selected} F(T_i)
/// with l = |selected|.
pub fn single_carrier_coefficient(ft: &[Complex64], selected: &[usize]) -> Result<Complex64> {
    if selected.is_empty() {
        return Err(Error::Param("selection must be nonempty".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &i in selected {
        let v = ft.get(i).ok_or_else(|| Error::Param(format!("index {i} out of range")))?;
        acc += v;
    }
    Ok(acc / selected.len() as f64)
}

/// Companion real form |A_j|^2 = (1/l) sum |F(T_i)|^2.
pub fn single_carrier_magnitude_sq(ft_mag_sq: &[f64], selected: &[usize]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::Param("selection must be nonempty".into()));
    }
    let mut acc = 0.0;
    for &i in selected {
        acc += ft_mag_sq.get(i).ok_or_else(|| Error::Param(format!("index {i} out of range")))?;
    }
    Ok(acc / selected.len() as f64)
}

/// SNR* of the selected sub-channels for private-information transmission.
///
/// Per channel: N_i from the eavesdropper model, sigma_X^2 = sigma_0^2 + N_i,
/// and the effective noise
///   sigma_N*^2 = sigma_w^2 * [ (sigma_w^2 |F|^2 + sigma_X^2)
///                              / (1 + sigma_X^2 sigma_w^2 |F|^2) - 1 ]^{-1}.
/// The returned value is sum_i sigma_w^2 / sigma_N*^2. A bracket <= 0 is the
/// zero-information limit and contributes 0.
pub fn snr_star(
    cfg: &ModulationConfig,
    eve: &EavesdropperModel,
    ft_mag_sq: &[f64],
    selected: &[usize],
) -> Result<f64> {
    cfg.validate()?;
    let mut total = 0.0;
    for &i in selected {
        let fmag = *ft_mag_sq
            .get(i)
            .ok_or_else(|| Error::Param(format!("index {i} out of range")))?;
        if fmag < 0.0 {
            return Err(Error::Param("|F(T_i)|^2 must be nonnegative".into()));
        }
        if i >= eve.t_eve_sq.len() {
            return Err(Error::Param(format!("eavesdropper model has no channel {i}")));
        }
        if eve.t_eve_sq[i] >= 1.0 {
            return Err(Error::Param("|T_Eve,i|^2 must be < 1".into()));
        }
        let sigma_x_sq = cfg.sigma_0_sq + eve.excess_noise(i);
        let sw = cfg.sigma_omega_sq;
        let bracket = (sw * fmag + sigma_x_sq) / (1.0 + sigma_x_sq * sw * fmag) - 1.0;
        if bracket > 0.0 {
            // sigma_w^2 / sigma_N*^2 = bracket
            total += bracket;
        }
    }
    Ok(total)
}

/// Which rule produced a [`Threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdVariant {
    /// Apriori fixed threshold from the expected transmittance under the
    /// optimal Gaussian attack.
    Fixed,
    /// Fallback t*^2 = mu * max_l (1/l)|F(T_i)|^2.
    Fallback,
    /// Fixed threshold reevaluated after a progressive scan topped up from
    /// the bad set.
    LambdaPrime,
}

/// Security threshold of the selection operators.
///
/// `t_star_sq` is the per-channel comparison value in the same normalized
/// units as `TransmittanceVector::mag_norm`. `lambda` is the Lagrange
/// multiplier lambda = (1/l) sum_i |F(T*_i)|^2; under the uniform reading
/// |F(T*_i)|^2 = lambda for all i, so t_star_sq = lambda / l. The security
/// bound against the optimal Gaussian attack is nu_Eve = 1/lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub t_star_sq: f64,
    pub lambda: f64,
    pub mu: Option<f64>,
    /// Nonnegative offset varpi of the reevaluated multiplier, in the same
    /// normalized units as `t_star_sq`; zero unless variant is LambdaPrime.
    pub varpi: f64,
    pub variant: ThresholdVariant,
}

impl Threshold {
    /// Plain threshold at a known comparison value.
    pub fn at(t_star_sq: f64, l: usize) -> Self {
        Threshold {
            t_star_sq,
            lambda: t_star_sq * l as f64,
            mu: None,
            varpi: 0.0,
            variant: ThresholdVariant::Fixed,
        }
    }

    /// nu_Eve = 1/lambda.
    pub fn nu_eve(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// Inputs for [`security_threshold`].
pub enum ThresholdSpec<'a> {
    /// lambda = (1/l) sum_{i<l} |F(T*)_i|^2 over the DFT of the expected
    /// transmittance vector; t*^2 = lambda / l.
    Fixed { t_star: &'a [Complex64], l: usize },
    /// t*^2 = mu * max(mags), 0 < mu < 1.
    Fallback { mags: &'a [f64], mu: f64, l: usize },
    /// Fixed rule plus varpi = t*^2 - min(bad_mags); the reevaluated
    /// multiplier is lambda' = l * (t*^2 + varpi).
    LambdaPrime { t_star: &'a [Complex64], l: usize, bad_mags: &'a [f64] },
}

pub fn security_threshold(spec: ThresholdSpec<'_>) -> Result<Threshold> {
    match spec {
        ThresholdSpec::Fixed { t_star, l } => fixed_threshold(t_star, l),
        ThresholdSpec::Fallback { mags, mu, l } => {
            if !(0.0 < mu && mu < 1.0) {
                return Err(Error::Param("mu must lie in (0, 1)".into()));
            }
            if mags.is_empty() {
                return Err(Error::Param("fallback needs a nonempty magnitude list".into()));
            }
            let max = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let t = mu * max;
            Ok(Threshold {
                t_star_sq: t,
                lambda: t * l as f64,
                mu: Some(mu),
                varpi: 0.0,
                variant: ThresholdVariant::Fallback,
            })
        }
        ThresholdSpec::LambdaPrime { t_star, l, bad_mags } => {
            if bad_mags.is_empty() {
                return Err(Error::Param("lambda_prime needs a nonempty bad set".into()));
            }
            let base = fixed_threshold(t_star, l)?;
            let min_bad = bad_mags.iter().cloned().fold(f64::INFINITY, f64::min);
            let varpi = (base.t_star_sq - min_bad).max(0.0);
            Ok(Threshold {
                t_star_sq: base.t_star_sq,
                lambda: (base.t_star_sq + varpi) * l as f64,
                mu: None,
                varpi,
                variant: ThresholdVariant::LambdaPrime,
            })
        }
    }
}

fn fixed_threshold(t_star: &[Complex64], l: usize) -> Result<Threshold> {
    if t_star.is_empty() {
        return Err(Error::Param("empty expected-transmittance vector".into()));
    }
    if l == 0 || l > t_star.len() {
        return Err(Error::Param("need 1 <= l <= n".into()));
    }
    let ft = dft_transmittance(t_star);
    let lambda = ft.iter().take(l).map(|f| f.norm_sqr()).sum::<f64>() / l as f64;
    Ok(Threshold {
        t_star_sq: lambda / l as f64,
        lambda,
        mu: None,
        varpi: 0.0,
        variant: ThresholdVariant::Fixed,
    })
}
