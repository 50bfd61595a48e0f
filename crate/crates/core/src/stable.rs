//! Seedable samplers for symmetric stable laws and discretized Lévy paths.
//!
//! Scalars use the Chambers–Mallows–Stuck transform. Isotropic vectors use
//! the sub-Gaussian representation `X = c^{1/α} sqrt(2A) G`, where `A` is a
//! positive `(α/2)`-stable variable with Laplace transform `exp(-λ^{α/2})`
//! (Kanter's construction) and `G` is standard Gaussian. The characteristic
//! function of `X` is then `exp(-c |u|^α)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Smallest accepted scale parameter.
pub const MIN_SCALE: f64 = 1e-12;

/// Lower end of the Pareto law used for heavy-tailed jump norms:
/// `P(|J| > r) = (r / PARETO_SCALE)^{-tail_alpha}` for `r >= PARETO_SCALE`.
pub const PARETO_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum Flavor {
    /// Spherically symmetric α-stable, `E exp(i<X(1),u>) = exp(-c |u|^α)`.
    Isotropic,
    /// Brownian motion with `E exp(i<X(1),u>) = exp(-c |u|^2)`; `c = 1/2` is standard.
    Brownian,
    /// Compound Poisson process with Pareto(`tail_alpha`) jump norms, uniform
    /// jump directions and a linear drift between jumps.
    CompoundPoissonHeavy {
        tail_alpha: f64,
        jump_rate: f64,
        drift: Vec<f64>,
    },
    /// Compound Poisson process with standard Gaussian jumps plus drift.
    CompoundPoissonGaussian { jump_rate: f64, drift: Vec<f64> },
}

impl Flavor {
    pub fn is_compound_poisson(&self) -> bool {
        matches!(
            self,
            Flavor::CompoundPoissonHeavy { .. } | Flavor::CompoundPoissonGaussian { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableSpec {
    pub alpha: f64,
    pub c: f64,
    pub d: usize,
    pub flavor: Flavor,
}

impl StableSpec {
    pub fn new(alpha: f64, c: f64, d: usize, flavor: Flavor) -> Result<Self> {
        let spec = StableSpec { alpha, c, d, flavor };
        spec.validate()?;
        Ok(spec)
    }

    pub fn brownian(d: usize) -> Self {
        StableSpec {
            alpha: 2.0,
            c: 0.5,
            d,
            flavor: Flavor::Brownian,
        }
    }

    pub fn isotropic(alpha: f64, c: f64, d: usize) -> Result<Self> {
        Self::new(alpha, c, d, Flavor::Isotropic)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(param(format!("alpha = {} outside (0, 2]", self.alpha)));
        }
        if !(self.c > MIN_SCALE) || !self.c.is_finite() {
            return Err(param(format!("scale c = {} must exceed {MIN_SCALE}", self.c)));
        }
        if self.d == 0 {
            return Err(param("dimension d must be at least 1"));
        }
        match &self.flavor {
            Flavor::Brownian if self.alpha != 2.0 => {
                Err(param("Brownian flavor requires alpha = 2"))
            }
            Flavor::CompoundPoissonHeavy {
                tail_alpha,
                jump_rate,
                drift,
            } => {
                if !(*tail_alpha > 0.0 && *tail_alpha < 2.0) {
                    return Err(param(format!("tail_alpha = {tail_alpha} outside (0, 2)")));
                }
                check_cpp(*jump_rate, drift, self.d)
            }
            Flavor::CompoundPoissonGaussian { jump_rate, drift } => {
                check_cpp(*jump_rate, drift, self.d)
            }
            _ => Ok(()),
        }
    }
}

fn check_cpp(rate: f64, drift: &[f64], d: usize) -> Result<()> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(param(format!("jump_rate = {rate} must be finite and >= 0")));
    }
    if drift.len() != d {
        return Err(param(format!(
            "drift has {} components, expected {d}",
            drift.len()
        )));
    }
    Ok(())
}

/// One discretized path. Points are stored row-major in `coords`.
///
/// When `drift` is set the path moves linearly with that velocity between
/// consecutive records and jumps at the recorded times; `points[i]` is then
/// the post-jump position at `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub dim: usize,
    pub times: Vec<f64>,
    pub coords: Vec<f64>,
    pub drift: Option<Vec<f64>>,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn endpoint(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Number of jumps of a compound Poisson path (records other than 0 and the horizon).
    pub fn jump_count(&self) -> usize {
        self.len().saturating_sub(2)
    }

    /// Position just before the record at index `i` (equal to `point(i)` for grid paths).
    pub fn pre_point(&self, i: usize) -> Vec<f64> {
        match (&self.drift, i) {
            (Some(v), i) if i > 0 => {
                let dt = self.times[i] - self.times[i - 1];
                self.point(i - 1)
                    .iter()
                    .zip(v)
                    .map(|(x, vx)| x + vx * dt)
                    .collect()
            }
            _ => self.point(i).to_vec(),
        }
    }

    /// All points whose convex hull equals the hull of the path's range.
    pub fn range_coords(&self) -> Vec<f64> {
        if self.drift.is_none() {
            return self.coords.clone();
        }
        let mut out = Vec::with_capacity(2 * self.coords.len());
        out.extend_from_slice(self.point(0));
        for i in 1..self.len() {
            out.extend(self.pre_point(i));
            out.extend_from_slice(self.point(i));
        }
        out
    }
}

/// Symmetric α-stable scalar with `E exp(isR) = exp(-scale^α |s|^α)`.
#[derive(Debug, Clone, Copy)]
pub struct StableScalar {
    alpha: f64,
    scale: f64,
}

impl StableScalar {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(param(format!("alpha = {alpha} outside (0, 2]")));
        }
        if !(scale > MIN_SCALE) || !scale.is_finite() {
            return Err(param(format!("scale = {scale} must exceed {MIN_SCALE}")));
        }
        Ok(StableScalar { alpha, scale })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * standard_symmetric_stable(self.alpha, rng)
    }
}

/// CMS draw with unit scale.
#[inline]
pub fn standard_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let g: f64 = StandardNormal.sample(rng);
        return std::f64::consts::SQRT_2 * g;
    }
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let cos_v = v.cos();
    (alpha * v).sin() / cos_v.powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable variable with `E exp(-λA) = exp(-λ^γ)`, `0 < γ < 1` (Kanter).
#[inline]
pub fn positive_stable<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    // u must stay in the open interval (0, pi)
    let u = loop {
        let u = PI * rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let w: f64 = Exp1.sample(rng);
    let s = u.sin();
    (gamma * u).sin() / s.powf(1.0 / gamma)
        * (((1.0 - gamma) * u).sin() / w).powf((1.0 - gamma) / gamma)
}

pub fn sample_stable_1d<R: Rng + ?Sized>(alpha: f64, scale: f64, rng: &mut R) -> Result<f64> {
    Ok(StableScalar::new(alpha, scale)?.sample(rng))
}

/// Sampler for `X(1)` of an isotropic stable or Brownian spec.
#[derive(Debug, Clone)]
pub struct IsotropicSampler {
    alpha: f64,
    d: usize,
    /// `sqrt(2) c^{1/α}`
    gauss_scale: f64,
}

impl IsotropicSampler {
    pub fn new(spec: &StableSpec) -> Result<Self> {
        spec.validate()?;
        match spec.flavor {
            Flavor::Isotropic | Flavor::Brownian => Ok(IsotropicSampler {
                alpha: spec.alpha,
                d: spec.d,
                gauss_scale: std::f64::consts::SQRT_2 * spec.c.powf(1.0 / spec.alpha),
            }),
            _ => Err(param("isotropic sampler needs an Isotropic or Brownian flavor")),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Writes one draw of `factor * X(1)` into `out`.
    #[inline]
    pub fn sample_scaled_into<R: Rng + ?Sized>(&self, factor: f64, rng: &mut R, out: &mut [f64]) {
        let mut s = self.gauss_scale * factor;
        if self.alpha < 2.0 {
            s *= positive_stable(0.5 * self.alpha, rng).sqrt();
        }
        for x in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *x = s * g;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        self.sample_scaled_into(1.0, rng, &mut v);
        v
    }

    /// Row-major positions `S_0 = 0, S_1, ..., S_n` of the walk embedded at
    /// times `i * horizon / n`.
    pub fn walk_coords<R: Rng + ?Sized>(&self, n: usize, horizon: f64, rng: &mut R, out: &mut Vec<f64>) {
        let d = self.d;
        let factor = (horizon / n as f64).powf(1.0 / self.alpha);
        out.clear();
        out.resize((n + 1) * d, 0.0);
        let mut step = vec![0.0; d];
        for i in 1..=n {
            self.sample_scaled_into(factor, rng, &mut step);
            for k in 0..d {
                out[i * d + k] = out[(i - 1) * d + k] + step[k];
            }
        }
    }
}

pub fn sample_isotropic_stable_vec<R: Rng + ?Sized>(spec: &StableSpec, rng: &mut R) -> Result<Vec<f64>> {
    Ok(IsotropicSampler::new(spec)?.sample(rng))
}

pub fn sample_walk_path<R: Rng + ?Sized>(
    spec: &StableSpec,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<PathSample> {
    if n == 0 {
        return Err(param("step count n must be at least 1"));
    }
    if !(horizon > 0.0) {
        return Err(param(format!("horizon = {horizon} must be positive")));
    }
    let sampler = IsotropicSampler::new(spec)?;
    let mut coords = Vec::new();
    sampler.walk_coords(n, horizon, rng, &mut coords);
    let times = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    Ok(PathSample {
        dim: spec.d,
        times,
        coords,
        drift: None,
    })
}

/// Uniform direction on the unit sphere of `R^d`.
pub fn unit_direction<R: Rng + ?Sized>(d: usize, rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut().take(d) {
            let g: f64 = StandardNormal.sample(rng);
            *x = g;
            norm2 += g * g;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Jump law of a compound Poisson spec.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    d: usize,
    tail_alpha: Option<f64>,
    pub rate: f64,
    pub drift: Vec<f64>,
}

impl JumpSampler {
    pub fn new(spec: &StableSpec) -> Result<Self> {
        spec.validate()?;
        match &spec.flavor {
            Flavor::CompoundPoissonHeavy {
                tail_alpha,
                jump_rate,
                drift,
            } => Ok(JumpSampler {
                d: spec.d,
                tail_alpha: Some(*tail_alpha),
                rate: *jump_rate,
                drift: drift.clone(),
            }),
            Flavor::CompoundPoissonGaussian { jump_rate, drift } => Ok(JumpSampler {
                d: spec.d,
                tail_alpha: None,
                rate: *jump_rate,
                drift: drift.clone(),
            }),
            _ => Err(param("compound Poisson sampler needs a compound Poisson flavor")),
        }
    }

    /// Pareto(`tail_alpha`) norm with lower end [`PARETO_SCALE`].
    #[inline]
    pub fn pareto_norm<R: Rng + ?Sized>(tail_alpha: f64, rng: &mut R) -> f64 {
        let u = 1.0 - rng.random::<f64>();
        PARETO_SCALE * u.powf(-1.0 / tail_alpha)
    }

    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.tail_alpha {
            Some(a) => {
                unit_direction(self.d, rng, out);
                let r = Self::pareto_norm(a, rng);
                out.iter_mut().for_each(|x| *x *= r);
            }
            None => {
                for x in out.iter_mut() {
                    *x = StandardNormal.sample(rng);
                }
            }
        }
    }

    /// Waiting time to the next jump (`inf` when the rate is zero).
    pub fn waiting_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate <= 0.0 {
            return f64::INFINITY;
        }
        let e: f64 = Exp1.sample(rng);
        e / self.rate
    }
}

pub fn sample_cpp_path<R: Rng + ?Sized>(spec: &StableSpec, horizon: f64, rng: &mut R) -> Result<PathSample> {
    if !(horizon > 0.0) {
        return Err(param(format!("horizon = {horizon} must be positive")));
    }
    let jumps = JumpSampler::new(spec)?;
    let d = spec.d;
    let mut times = vec![0.0];
    let mut coords = vec![0.0; d];
    let mut pos = vec![0.0; d];
    let mut jump = vec![0.0; d];
    let mut t = 0.0;
    loop {
        let next = t + jumps.waiting_time(rng);
        if next >= horizon {
            break;
        }
        jumps.sample_jump(rng, &mut jump);
        for k in 0..d {
            pos[k] += jumps.drift[k] * (next - t) + jump[k];
        }
        t = next;
        times.push(t);
        coords.extend_from_slice(&pos);
    }
    for k in 0..d {
        pos[k] += jumps.drift[k] * (horizon - t);
    }
    times.push(horizon);
    coords.extend_from_slice(&pos);
    Ok(PathSample {
        dim: d,
        times,
        coords,
        drift: Some(jumps.drift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    fn rng(seed: u64) -> crate::rng::TrialRng {
        trial_rng(seed, 11, 0)
    }

    #[test]
    fn gaussian_reduction_variance() {
        let mut r = rng(1);
        let n = 1_000_000;
        let s = StableScalar::new(2.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let (mut m, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.sample(&mut r);
            m += x;
            m2 += x * x;
        }
        let mean = m / n as f64;
        let var = m2 / n as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn cauchy_median_at_zero() {
        let mut r = rng(2);
        let n = 1_000_000;
        let below = (0..n)
            .filter(|_| sample_stable_1d(1.0, 1.0, &mut r).unwrap() <= 0.0)
            .count();
        let f = below as f64 / n as f64;
        assert!((f - 0.5).abs() < 0.002, "cdf(0) = {f}");
    }

    #[test]
    fn empirical_characteristic_function_1d() {
        let mut r = rng(3);
        let n = 1_000_000;
        let s = StableScalar::new(1.5, 1.0).unwrap();
        let phi: f64 = (0..n).map(|_| s.sample(&mut r).cos()).sum::<f64>() / n as f64;
        assert!((phi - (-1.0f64).exp()).abs() < 0.005, "phi = {phi}");
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut r = rng(4);
        let n = 400_000;
        for gamma in [0.3, 0.75, 0.95] {
            let lt: f64 = (0..n).map(|_| (-positive_stable(gamma, &mut r)).exp()).sum::<f64>() / n as f64;
            assert!((lt - (-1.0f64).exp()).abs() < 0.004, "gamma {gamma}: {lt}");
        }
    }

    #[test]
    fn brownian_vector_covariance_is_identity() {
        let spec = StableSpec::isotropic(2.0, 0.5, 2).unwrap();
        let s = IsotropicSampler::new(&spec).unwrap();
        let mut r = rng(5);
        let n = 1_000_000;
        let mut c = [[0.0; 2]; 2];
        let mut v = [0.0; 2];
        for _ in 0..n {
            s.sample_scaled_into(1.0, &mut r, &mut v);
            for a in 0..2 {
                for b in 0..2 {
                    c[a][b] += v[a] * v[b];
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((c[a][b] / n as f64 - want).abs() < 0.01);
            }
        }
    }

    #[test]
    fn isotropic_characteristic_function_and_mean() {
        let spec = StableSpec::isotropic(1.5, 1.0, 2).unwrap();
        let s = IsotropicSampler::new(&spec).unwrap();
        let mut r = rng(6);
        let n = 1_000_000;
        let mut v = [0.0; 2];
        let mut phi = 0.0;
        let mut signs = [0i64; 2];
        for _ in 0..n {
            s.sample_scaled_into(1.0, &mut r, &mut v);
            phi += v[0].cos();
            for k in 0..2 {
                signs[k] += if v[k] > 0.0 { 1 } else { -1 };
            }
        }
        phi /= n as f64;
        assert!((phi - (-1.0f64).exp()).abs() < 0.005, "phi {phi}");
        // heavy tails: test the sign balance (stderr of the sign mean is 1/sqrt(n))
        for k in 0..2 {
            assert!((signs[k] as f64 / n as f64).abs() < 3.0 / (n as f64).sqrt() * 1.5);
        }
    }

    #[test]
    fn flavor_mismatch_is_rejected() {
        let spec = StableSpec::new(
            1.5,
            1.0,
            2,
            Flavor::CompoundPoissonHeavy {
                tail_alpha: 1.5,
                jump_rate: 1.0,
                drift: vec![0.0, 0.0],
            },
        )
        .unwrap();
        assert!(IsotropicSampler::new(&spec).is_err());
        assert!(JumpSampler::new(&StableSpec::brownian(2)).is_err());
        assert!(StableSpec::new(1.5, 0.5, 2, Flavor::Brownian).is_err());
        assert!(StableSpec::isotropic(2.5, 1.0, 2).is_err());
        assert!(StableSpec::isotropic(1.5, 0.0, 2).is_err());
        assert!(sample_stable_1d(0.0, 1.0, &mut rng(0)).is_err());
    }

    #[test]
    fn walk_path_shape_and_determinism() {
        let spec = StableSpec::isotropic(1.5, 1.0, 2).unwrap();
        let p = sample_walk_path(&spec, 1, 1.0, &mut rng(9)).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.point(0), &[0.0, 0.0]);
        assert_eq!(p.times, vec![0.0, 1.0]);
        let a = sample_walk_path(&spec, 100, 2.0, &mut rng(9)).unwrap();
        let b = sample_walk_path(&spec, 100, 2.0, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert!(sample_walk_path(&spec, 0, 1.0, &mut rng(9)).is_err());
    }

    #[test]
    fn brownian_endpoint_variance() {
        let spec = StableSpec::new(2.0, 0.5, 1, Flavor::Brownian).unwrap();
        let s = IsotropicSampler::new(&spec).unwrap();
        let trials = 100_000;
        let mut buf = Vec::new();
        let mut m2 = 0.0;
        for k in 0..trials {
            let mut r = trial_rng(10, 1, k);
            s.walk_coords(10_000, 1.0, &mut r, &mut buf);
            let e = buf[buf.len() - 1];
            m2 += e * e;
        }
        let var = m2 / trials as f64;
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn walk_endpoint_characteristic_function() {
        let spec = StableSpec::isotropic(1.5, 1.0, 2).unwrap();
        let trials = 40_000;
        let mut phi = 0.0;
        for k in 0..trials {
            let p = sample_walk_path(&spec, 100, 2.0, &mut trial_rng(12, 1, k)).unwrap();
            phi += p.endpoint()[0].cos();
        }
        phi /= trials as f64;
        assert!((phi - (-2.0f64).exp()).abs() < 0.01, "phi {phi}");
    }

    #[test]
    fn cpp_drift_only_path() {
        let spec = StableSpec::new(
            1.5,
            1.0,
            2,
            Flavor::CompoundPoissonHeavy {
                tail_alpha: 1.5,
                jump_rate: 0.0,
                drift: vec![1.0, -2.0],
            },
        )
        .unwrap();
        let p = sample_cpp_path(&spec, 3.0, &mut rng(1)).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.endpoint(), &[3.0, -6.0]);
    }

    #[test]
    fn cpp_jump_count_mean() {
        let spec = StableSpec::new(
            1.5,
            1.0,
            2,
            Flavor::CompoundPoissonHeavy {
                tail_alpha: 1.5,
                jump_rate: 3.0,
                drift: vec![0.0, 0.0],
            },
        )
        .unwrap();
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|k| sample_cpp_path(&spec, 10.0, &mut trial_rng(3, 3, k)).unwrap().jump_count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 30.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn cpp_range_includes_pre_jump_points() {
        let p = PathSample {
            dim: 1,
            times: vec![0.0, 1.0, 2.0],
            coords: vec![0.0, 5.0, 6.0],
            drift: Some(vec![1.0]),
        };
        assert_eq!(p.range_coords(), vec![0.0, 1.0, 5.0, 6.0, 6.0]);
    }
}
