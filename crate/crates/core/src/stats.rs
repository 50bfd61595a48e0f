//! Streaming moments, Monte Carlo estimates, the Hill estimator and the
//! two-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedFormTarget;
use crate::error::{param, Result};

/// Monte Carlo point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub target: Option<ClosedFormTarget>,
    pub z_score: Option<f64>,
}

impl EstimateResult {
    pub fn from_moments(m: &Moments, seed: u64) -> EstimateResult {
        EstimateResult {
            mean: m.mean(),
            stderr: m.stderr(),
            trials: m.count(),
            seed,
            target: None,
            z_score: None,
        }
    }

    pub fn from_samples(xs: &[f64], seed: u64) -> EstimateResult {
        let mut m = Moments::new();
        xs.iter().for_each(|&x| m.push(x));
        EstimateResult::from_moments(&m, seed)
    }

    /// Attaches a target and fills in `z_score` when `stderr > 0`.
    pub fn with_target(mut self, target: ClosedFormTarget) -> EstimateResult {
        self.z_score = (self.stderr > 0.0).then(|| (self.mean - target.value) / self.stderr);
        self.target = Some(target);
        self
    }

    pub fn target_value(&self) -> Option<f64> {
        self.target.as_ref().map(|t| t.value)
    }

    pub fn rel_error(&self) -> Option<f64> {
        self.target_value()
            .map(|t| if t == 0.0 { (self.mean - t).abs() } else { ((self.mean - t) / t).abs() })
    }
}

/// Welford accumulator. `merge` combines two accumulators exactly as if the
/// samples had been pushed into one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Moments {
        Moments::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = (self.n + other.n) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n;
        self.n += other.n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Moments {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Hill estimate `k / Σ_{i≤k} log(X_(i)/X_(k+1))` from the top `k` order statistics.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= samples.len() {
        return Err(param(format!("hill_tail_index needs 0 < k < {}, got k = {k}", samples.len())));
    }
    if samples.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(param("hill_tail_index needs finite positive samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = xs[k].ln();
    let s: f64 = xs[..k].iter().map(|x| x.ln() - threshold).sum();
    Ok(k as f64 / s)
}

/// Hill estimates at `k/4, k/2, k, 2k` (where available) and their relative spread.
pub fn hill_stability(samples: &[f64], k: usize) -> Result<(Vec<(usize, f64)>, f64)> {
    let mut out = Vec::new();
    for kk in [k / 4, k / 2, k, 2 * k] {
        if kk > 0 && kk < samples.len() {
            out.push((kk, hill_tail_index(samples, kk)?));
        }
    }
    if out.is_empty() {
        return Err(param("no admissible k for the Hill stability probe"));
    }
    let lo = out.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = out.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let mid = hill_tail_index(samples, k.clamp(1, samples.len() - 1))?;
    Ok((out, (hi - lo) / mid))
}

/// Asymptotic Kolmogorov distribution tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS statistic and asymptotic p-value (Stephens' small-sample correction).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(param("ks_two_sample needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(param("ks_two_sample got NaN"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let p = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    Ok((d, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Exp, StandardNormal};

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25, 0.5];
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 6.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((m.mean() - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-12);
        assert!((m.stderr() - (var / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 17) as f64 * 0.3).collect();
        let all: Moments = xs.iter().copied().collect();
        let mut a: Moments = xs[..40].iter().copied().collect();
        let b: Moments = xs[40..].iter().copied().collect();
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-13);
        assert!((a.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn z_score_attached() {
        let r = EstimateResult::from_samples(&[1.0, 2.0, 3.0, 4.0], 0)
            .with_target(ClosedFormTarget::new("t", &[], 2.0, "1"));
        assert!((r.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-14);
        assert!((r.z_score.unwrap() - 0.5 / r.stderr).abs() < 1e-12);
    }

    #[test]
    fn hill_on_pareto() {
        let mut rng = trial_rng(11, 0, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 1.5))
            .collect();
        let h = hill_tail_index(&xs, 1000).unwrap();
        assert!((h - 1.5).abs() < 0.15, "{h}");
    }

    #[test]
    fn hill_on_exponential_drifts() {
        let mut rng = trial_rng(12, 0, 0);
        let e = Exp::new(1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| e.sample(&mut rng)).collect();
        let (_, spread) = hill_stability(&xs, 1000).unwrap();
        assert!(spread > 0.2, "{spread}");
    }

    #[test]
    fn hill_rejects_bad_input() {
        assert!(hill_tail_index(&[1.0, -1.0, 2.0], 1).is_err());
        assert!(hill_tail_index(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn ks_trivial_cases() {
        let a = [0.1, 0.5, 0.9, 1.3];
        assert_eq!(ks_two_sample(&a, &a).unwrap().0, 0.0);
        let b = [5.0, 6.0];
        assert_eq!(ks_two_sample(&a, &b).unwrap().0, 1.0);
        assert!(ks_two_sample(&[], &b).is_err());
    }

    #[test]
    fn ks_statistic_against_brute_force() {
        let mut rng = trial_rng(13, 0, 0);
        let a: Vec<f64> = (0..57).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..31).map(|_| 0.3 + rng.sample::<f64, _>(StandardNormal)).collect();
        let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&x| x <= t).count() as f64 / s.len() as f64;
        let brute = a
            .iter()
            .chain(&b)
            .map(|&t| (ecdf(&a, t) - ecdf(&b, t)).abs())
            .fold(0.0, f64::max);
        assert!((ks_two_sample(&a, &b).unwrap().0 - brute).abs() < 1e-15);
    }

    #[test]
    fn ks_pvalues_roughly_uniform() {
        let mut rng = trial_rng(14, 0, 0);
        let mut passes = 0;
        for _ in 0..40 {
            let a: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
            if ks_two_sample(&a, &b).unwrap().1 > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 38, "{passes}");
    }

    #[test]
    fn kolmogorov_q_values() {
        // Q(1.36) ≈ 0.049 and Q(1.63) ≈ 0.0098 are the usual 5% / 1% points
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-3);
    }
}
