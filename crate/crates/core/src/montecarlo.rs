//! Monte Carlo harness: empirical distributions, Kolmogorov-Smirnov
//! distance, Gram-matrix spectra and a reproducible trial runner.
//!
//! The runner hands each trial its own counter-based RNG stream (see
//! [`crate::rng::trial_rng`]), so results do not depend on the number of
//! workers. Aggregation reduces in trial order with compensated summation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::trial_rng;

/// How many trials to run, under which master seed.
#[derive(Debug, Clone, Copy)]
pub struct TrialPlan {
    pub trials: usize,
    pub seed: u64,
    /// Concurrency hint; 0 lets rayon decide. Results never depend on it.
    pub workers: usize,
}

impl TrialPlan {
    pub fn new(trials: usize, seed: u64) -> Self {
        TrialPlan { trials, seed, workers: 0 }
    }
}

/// Sorted sample with step-function CDF access.
#[derive(Debug, Clone)]
pub struct EmpiricalDist {
    sorted: Vec<f64>,
}

impl EmpiricalDist {
    pub fn new(mut sample: Vec<f64>) -> Self {
        sample.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
        EmpiricalDist { sorted: sample }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sample(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF: fraction of the sample <= x.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.sorted.len();
        if n == 0 {
            return 0.0;
        }
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / n as f64
    }

    pub fn mean(&self) -> f64 {
        mean_var(&self.sorted).0
    }
}

/// sup_x |F_n(x) - F(x)| evaluated at both sides of every sample step.
pub fn ks_distance<F: Fn(f64) -> f64>(d: &EmpiricalDist, cdf: F) -> f64 {
    let n = d.sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in d.sorted.iter().enumerate() {
        let fx = cdf(x);
        let lo = (i as f64 / n - fx).abs();
        let hi = ((i + 1) as f64 / n - fx).abs();
        sup = sup.max(lo).max(hi);
    }
    sup
}

/// Nonnegative eigenvalues of the Gram matrix of `m`, computed on the
/// smaller orientation (F^H F when cols < rows). Count = min(rows, cols);
/// round-off negatives are clamped to zero.
pub fn empirical_spectrum(m: &DMatrix<Complex64>) -> Result<EmpiricalDist> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Err(Error::Param("empty matrix".into()));
    }
    let gram = if c <= r { m.adjoint() * m } else { m * m.adjoint() };
    let eig = gram
        .try_symmetric_eigen(1e-13, 10_000)
        .ok_or_else(|| Error::Numeric("hermitian eigensolver did not converge".into()))?;
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| if v < 0.0 { 0.0 } else { v }).collect();
    Ok(EmpiricalDist::new(vals))
}

/// Run `plan.trials` independent trials. Trial i receives stream
/// (plan.seed, i); output order follows trial index regardless of
/// scheduling. A panicking trial aborts the batch and reports its index.
pub fn run_trials<T, F>(plan: &TrialPlan, trial_fn: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha12Rng) -> T + Sync,
{
    if plan.trials == 0 {
        return Err(Error::Param("trials must be >= 1".into()));
    }
    let run = |i: usize| -> std::result::Result<T, usize> {
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut rng = trial_rng(plan.seed, i as u64);
            trial_fn(i as u64, &mut rng)
        }))
        .map_err(|_| i)
    };
    let results: Vec<std::result::Result<T, usize>> = if plan.workers == 1 {
        (0..plan.trials).map(run).collect()
    } else {
        (0..plan.trials).into_par_iter().map(run).collect()
    };
    let mut out = Vec::with_capacity(plan.trials);
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(i) => {
                return Err(Error::Numeric(format!(
                    "trial {i} panicked (seed {}, stream {i})",
                    plan.seed
                )))
            }
        }
    }
    Ok(out)
}

/// Mean and (population) variance by Neumaier-compensated summation in a
/// fixed reduction order.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| {
        let d = v - mean;
        d * d
    })) / n;
    (mean, var)
}

/// Neumaier variant of Kahan summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Fixed-width histogram over [lo, hi].
#[derive(Debug, Clone)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn build(sample: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        let w = (hi - lo) / bins as f64;
        let mut total = 0u64;
        for &x in sample {
            if x < lo || x >= hi {
                continue;
            }
            let b = ((x - lo) / w) as usize;
            counts[b.min(bins - 1)] += 1;
            total += 1;
        }
        Histogram { lo, hi, counts, total }
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    /// Bin density normalized by the full sample size (out-of-range mass
    /// included in the denominator).
    pub fn density(&self, i: usize, sample_size: usize) -> f64 {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        self.counts[i] as f64 / (sample_size as f64 * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::Exp1;

    #[test]
    fn ecdf_steps() {
        let d = EmpiricalDist::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(3.5), 1.0);
        assert!((d.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_and_maximal() {
        let d = EmpiricalDist::new(vec![0.0]);
        // point mass at 1: F(x) = 0 for x < 1
        assert!((ks_distance(&d, |x| if x < 1.0 { 0.0 } else { 1.0 }) - 1.0).abs() < 1e-15);
        // a step CDF identical to the sample's own ECDF
        let d2 = EmpiricalDist::new(vec![1.0, 2.0]);
        let ecdf = d2.clone();
        assert_eq!(ks_distance(&d2, move |x| ecdf.cdf(x)), 0.0);
    }

    #[test]
    fn ks_within_dkw_band() {
        // n = 1e5 uniform sample against its own law; DKW gives
        // P(sup > 0.01) <= 2 exp(-2 * 1e5 * 1e-4) = 4e-9.
        let vals = run_trials(&TrialPlan::new(100_000, 5), |_, rng| rng.gen::<f64>()).unwrap();
        let d = EmpiricalDist::new(vals);
        assert!(ks_distance(&d, |x| x.clamp(0.0, 1.0)) < 0.01);
    }

    #[test]
    fn spectrum_trivials() {
        let z = DMatrix::<Complex64>::zeros(4, 3);
        let s = empirical_spectrum(&z).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.sample().iter().all(|&v| v == 0.0));

        let id = DMatrix::<Complex64>::identity(4, 4);
        let s = empirical_spectrum(&id).unwrap();
        assert!(s.sample().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn run_trials_aggregates() {
        let one = run_trials(&TrialPlan::new(1, 9), |_, rng| rng.gen::<f64>()).unwrap();
        let again = run_trials(&TrialPlan::new(1, 9), |_, rng| rng.gen::<f64>()).unwrap();
        assert_eq!(one, again);

        let consts = run_trials(&TrialPlan::new(100, 9), |_, _| 2.5).unwrap();
        let (m, v) = mean_var(&consts);
        assert_eq!(m, 2.5);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn exp_mean_within_three_standard_errors() {
        let vals = run_trials(&TrialPlan::new(1_000_000, 11), |_, rng| rng.sample::<f64, _>(Exp1))
            .unwrap();
        let (m, _) = mean_var(&vals);
        assert!((m - 1.0).abs() < 0.003, "mean {m}");
    }

    #[test]
    fn aggregate_invariant_to_workers() {
        let mut plan = TrialPlan::new(10_000, 3);
        plan.workers = 1;
        let seq = run_trials(&plan, |_, rng| rng.gen::<f64>()).unwrap();
        plan.workers = 0;
        let par = run_trials(&plan, |_, rng| rng.gen::<f64>()).unwrap();
        assert_eq!(seq, par);
    }
}
