//! Support-function arithmetic and `V_p(B^d, M)`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::closed_form::{self, kappa, ClosedFormTarget};
use crate::error::{domain, param, Error, Result};
use crate::experiments::{base_params, two_sided_verdict, ExperimentConfig, ExperimentOutput, ResultRow, Verdict};
use crate::hull::{hull_of_coords, Polytope};
use crate::rng::{map_trials, stream_id, TrialRng};
use crate::stable::{unit_direction, IsotropicSampler, StableScalar, StableSpec};
use crate::stats::{EstimateResult, Moments};

/// A convex body given through its support function.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportFn {
    Polytope(Polytope),
    Ball { dim: usize, r: f64 },
}

impl SupportFn {
    pub fn dim(&self) -> usize {
        match self {
            SupportFn::Polytope(p) => p.dim,
            SupportFn::Ball { dim, .. } => *dim,
        }
    }

    /// `h(K, u)`; `u` need not be a unit vector.
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            SupportFn::Polytope(p) => p.support(u),
            SupportFn::Ball { r, .. } => r * u.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

/// Deterministic probe directions on `S^{d-1}` (`d ∈ {2,3}`).
fn probe_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..64)
            .map(|k| {
                let t = TAU * k as f64 / 64.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci lattice
            let m = 200;
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    let mut v = vec![r * phi.cos(), r * phi.sin(), z];
                    v.resize(d, 0.0);
                    v
                })
                .collect()
        }
    }
}

/// Pointwise `L_p` sum `u ↦ (h_a(u)^p + h_b(u)^p)^{1/p}`.
#[derive(Debug, Clone)]
pub struct LpSum {
    a: SupportFn,
    b: SupportFn,
    p: f64,
}

impl LpSum {
    pub fn eval(&self, u: &[f64]) -> f64 {
        let x = self.a.eval(u).max(0.0);
        let y = self.b.eval(u).max(0.0);
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        if hi == 0.0 {
            return 0.0;
        }
        hi * (1.0 + (lo / hi).powf(self.p)).powf(1.0 / self.p)
    }
}

/// Builds the `L_p` sum of two bodies that contain the origin.
pub fn lp_sum_support(a: SupportFn, b: SupportFn, p: f64) -> Result<LpSum> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain(format!("p = {p} must be a finite value >= 1")));
    }
    if a.dim() != b.dim() {
        return Err(param("lp_sum_support: bodies have different dimensions"));
    }
    for u in probe_directions(a.dim()) {
        for (name, body) in [("a", &a), ("b", &b)] {
            let h = body.eval(&u);
            if h < -1e-12 {
                return Err(domain(format!("support of {name} is negative ({h}) at {u:?}: origin not inside")));
            }
        }
    }
    Ok(LpSum { a, b, p })
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_a^b f` by composite 8-point Gauss–Legendre with `panels` panels.
fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    s * 0.5 * h
}

/// `∫_0^{2π} h(M, θ)^p dθ` for a planar body.
fn circle_integral(m: &SupportFn, p: f64, quad_points: usize) -> Result<f64> {
    let pow = |h: f64| -> Result<f64> {
        if h < 0.0 {
            if h > -1e-12 {
                return Ok(0.0);
            }
            return Err(domain(format!("negative support value {h}: origin not inside")));
        }
        Ok(h.powf(p))
    };
    match m {
        SupportFn::Polytope(poly) if poly.dim == 2 => {
            let v = &poly.vertices;
            let n = v.len();
            if n == 1 {
                let x = &v[0];
                return gl_checked(|t| pow(x[0] * t.cos() + x[1] * t.sin()), 0.0, TAU, quad_points.div_ceil(8).max(1));
            }
            // outward normal angle of edge i -> i+1 (counterclockwise order)
            let normal = |i: usize| {
                let a = &v[i];
                let b = &v[(i + 1) % n];
                (-(b[0] - a[0])).atan2(b[1] - a[1])
            };
            let mut total = 0.0;
            for i in 0..n {
                let t0 = normal((i + n - 1) % n);
                let mut t1 = normal(i);
                while t1 < t0 {
                    t1 += TAU;
                }
                let arc = t1 - t0;
                if arc <= 0.0 {
                    continue;
                }
                let panels = ((quad_points as f64 * arc / TAU) / 8.0).ceil().max(1.0) as usize;
                let x = &v[i];
                total += gl_checked(|t| pow(x[0] * t.cos() + x[1] * t.sin()), t0, t1, panels)?;
            }
            Ok(total)
        }
        SupportFn::Polytope(_) => Err(Error::Dimension("circle quadrature needs a planar body".into())),
        SupportFn::Ball { .. } => {
            // trapezoid on the periodic integrand
            let mut s = 0.0;
            for k in 0..quad_points {
                let t = TAU * k as f64 / quad_points as f64;
                s += pow(m.eval(&[t.cos(), t.sin()]))?;
            }
            Ok(s * TAU / quad_points as f64)
        }
    }
}

fn gl_checked<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, panels: usize) -> Result<f64> {
    let mut err = None;
    let v = gauss_legendre(
        |t| match f(t) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        panels,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `V_p(B^d, M) = (1/d) ∫_{S^{d-1}} h(M,u)^p σ(du)`.
///
/// `d = 2` is deterministic quadrature with about `quad_points` nodes (split
/// at the breakpoints of `h` for polygons); `d = 3` averages over
/// `quad_points` uniform directions from a fixed stream.
pub fn vp_ball_mixed(m: &SupportFn, p: f64, d: usize, quad_points: usize) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain(format!("p = {p} must be a finite value >= 1")));
    }
    if m.dim() != d {
        return Err(param(format!("body dimension {} vs d = {d}", m.dim())));
    }
    match d {
        2 => Ok(0.5 * circle_integral(m, p, quad_points)?),
        3 => {
            let mut rng = TrialRng::seed_from_u64(stream_id("vp_ball_mixed/sphere") ^ quad_points as u64);
            Ok(vp_ball_mixed_mc(m, p, quad_points, &mut rng)?.0)
        }
        _ => Err(Error::Dimension(format!("vp_ball_mixed supports d in {{2,3}}, got {d}"))),
    }
}

/// Sphere Monte Carlo for `V_p(B^d, M)`: `(estimate, stderr)`.
pub fn vp_ball_mixed_mc<R: Rng + ?Sized>(m: &SupportFn, p: f64, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    let d = m.dim();
    let area = d as f64 * kappa(d);
    let mut u = vec![0.0; d];
    let mut acc = Moments::new();
    for _ in 0..samples {
        unit_direction(d, rng, &mut u);
        let h = m.eval(&u);
        if h < -1e-12 {
            return Err(domain(format!("negative support value {h}: origin not inside")));
        }
        acc.push(h.max(0.0).powf(p));
    }
    let f = area / d as f64;
    Ok((f * acc.mean(), f * acc.stderr()))
}

fn walk_vp(
    spec: &StableSpec,
    p_values: &[f64],
    n_steps: usize,
    trials: usize,
    seed: u64,
    stream: u64,
    quad_points: usize,
    sphere_points: usize,
) -> Result<Vec<Vec<f64>>> {
    let sampler = IsotropicSampler::new(spec)?;
    let d = spec.d;
    let rows = map_trials(seed, stream, trials, |_, rng| -> Result<Vec<f64>> {
        let mut coords = Vec::new();
        sampler.walk_coords(n_steps, 1.0, rng, &mut coords);
        let body = SupportFn::Polytope(hull_of_coords(d, &coords)?);
        p_values
            .iter()
            .map(|&p| {
                if d == 2 {
                    vp_ball_mixed(&body, p, 2, quad_points)
                } else {
                    Ok(vp_ball_mixed_mc(&body, p, sphere_points, rng)?.0)
                }
            })
            .collect()
    });
    rows.into_iter().collect()
}

fn lp_brownian_target(p: f64, d: usize) -> Result<ClosedFormTarget> {
    Ok(ClosedFormTarget::new(
        "ev_lp_brownian_ball",
        &[("p", p), ("d", d as f64)],
        closed_form::ev_lp_brownian_ball(p, d)?,
        format!("length^{p}"),
    ))
}

/// Monte Carlo `E V_p(B^d, Z)` over standard Brownian hulls, with target.
pub fn verify_lp_brownian(p: f64, d: usize, n_steps: usize, trials: usize, seed: u64) -> Result<EstimateResult> {
    if !(2..=3).contains(&d) {
        return Err(Error::Dimension(format!("verify_lp_brownian supports d in {{2,3}}, got {d}")));
    }
    let spec = StableSpec::brownian(d);
    let vals = walk_vp(&spec, &[p], n_steps, trials, seed, stream_id(&format!("lp_brownian/p={p}")), 4096, 256)?;
    let m: Moments = vals.iter().map(|v| v[0]).collect();
    Ok(EstimateResult::from_moments(&m, seed).with_target(lp_brownian_target(p, d)?))
}

/// Per-path `(sup_{i ≤ grid_n} R(i/grid_n))^p` for a standard symmetric
/// α-stable `R`.
fn sup_moments(alpha: f64, p: f64, grid_n: usize, trials: usize, seed: u64, stream: u64) -> Result<Moments> {
    let step = StableScalar::new(alpha, (1.0 / grid_n as f64).powf(1.0 / alpha))?;
    let vals = map_trials(seed, stream, trials, |_, rng| {
        let mut x = 0.0;
        let mut sup: f64 = 0.0;
        for _ in 0..grid_n {
            x += step.sample(rng);
            sup = sup.max(x);
        }
        sup.powf(p)
    });
    Ok(vals.into_iter().collect())
}

/// Hull-side and sup-side estimates of `E V_p(B^d, Z)` for an isotropic
/// stable process with `1 <= p < α < 2`.
#[allow(clippy::too_many_arguments)]
pub fn verify_lp_stable_consistency(
    alpha: f64,
    c: f64,
    p: f64,
    d: usize,
    n_steps: usize,
    trials: usize,
    grid_n: usize,
    seed: u64,
) -> Result<(EstimateResult, EstimateResult)> {
    if !(p < alpha) {
        return Err(domain(format!("E (sup R)^p is finite only for p < alpha; got p = {p}, alpha = {alpha}")));
    }
    if !(p >= 1.0) || !(alpha < 2.0) {
        return Err(domain(format!("need 1 <= p < alpha < 2, got p = {p}, alpha = {alpha}")));
    }
    let spec = StableSpec::isotropic(alpha, c, d)?;
    let vals = walk_vp(&spec, &[p], n_steps, trials, seed, stream_id(&format!("lp_stable/hull/p={p}")), 4096, 256)?;
    let hm: Moments = vals.iter().map(|v| v[0]).collect();
    let hull_side = EstimateResult::from_moments(&hm, seed);
    let sm = sup_moments(alpha, p, grid_n, trials, seed, stream_id(&format!("lp_stable/sup/p={p}")))?;
    let f = c.powf(p / alpha) * kappa(d);
    let sup_side = EstimateResult {
        mean: f * sm.mean(),
        stderr: f * sm.stderr(),
        trials,
        seed,
        target: None,
        z_score: None,
    };
    Ok((hull_side, sup_side))
}

/// Agreement rule for the two stable estimates: `|a − b| <= sigma·se + band·|b|`.
pub fn lp_estimates_agree(a: &EstimateResult, b: &EstimateResult, sigma: f64, band: f64) -> bool {
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    (a.mean - b.mean).abs() <= sigma * se + band * b.mean.abs()
}

fn p_list(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.p_values.is_empty() {
        vec![1.0]
    } else {
        cfg.p_values.clone()
    }
}

pub(crate) fn lp_brownian_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let d = cfg.spec.d;
    let ps = p_list(cfg);
    let vals = walk_vp(&cfg.spec, &ps, cfg.n_steps, cfg.trials, cfg.master_seed, cfg.stream("hull"), cfg.quad_points, cfg.sphere_points)?;
    for (i, &p) in ps.iter().enumerate() {
        let m: Moments = vals.iter().map(|v| v[i]).collect();
        let e = EstimateResult::from_moments(&m, cfg.master_seed).with_target(lp_brownian_target(p, d)?);
        let v = two_sided_verdict(&e, cfg.tolerance_sigma, cfg.default_rel_band());
        let mut params = base_params(cfg);
        params.insert("p".into(), json!(p));
        params.insert("n".into(), json!(cfg.n_steps));
        out.rows.push(ResultRow::new(&name, params, None, e, v));
    }
    Ok(out)
}

pub(crate) fn lp_stable_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let spec = &cfg.spec;
    let grid_n = cfg.grid_n.unwrap_or(cfg.n_steps);
    let ps = p_list(cfg);
    let vals = walk_vp(spec, &ps, cfg.n_steps, cfg.trials, cfg.master_seed, cfg.stream("hull"), cfg.quad_points, cfg.sphere_points)?;
    for (i, &p) in ps.iter().enumerate() {
        let hm: Moments = vals.iter().map(|v| v[i]).collect();
        let hull_side = EstimateResult::from_moments(&hm, cfg.master_seed);
        let sm = sup_moments(spec.alpha, p, grid_n, cfg.trials, cfg.master_seed, cfg.stream(&format!("sup/p={p}")))?;
        let f = spec.c.powf(p / spec.alpha) * kappa(spec.d);
        let sup_side = EstimateResult {
            mean: f * sm.mean(),
            stderr: f * sm.stderr(),
            trials: cfg.trials,
            seed: cfg.master_seed,
            target: None,
            z_score: None,
        };
        let agree = lp_estimates_agree(&hull_side, &sup_side, cfg.tolerance_sigma, cfg.default_rel_band());
        for (side, e) in [("hull", &hull_side), ("sup", &sup_side)] {
            let mut params = base_params(cfg);
            params.insert("p".into(), json!(p));
            params.insert("side".into(), json!(side));
            params.insert("n".into(), json!(cfg.n_steps));
            params.insert("grid_n".into(), json!(grid_n));
            params.insert("agree".into(), json!(agree));
            out.rows.push(ResultRow::new(&name, params, None, e.clone(), Verdict::Info));
        }
        out.notes.push(format!(
            "p={p}: hull {:.5}±{:.5}, sup {:.5}±{:.5}, agree={agree}",
            hull_side.mean, hull_side.stderr, sup_side.mean, sup_side.stderr
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::hull2d;
    use crate::rng::trial_rng;

    fn square(half: f64) -> SupportFn {
        SupportFn::Polytope(hull2d(&[[-half, -half], [half, -half], [half, half], [-half, half]]).unwrap())
    }

    #[test]
    fn ball_values() {
        let b = SupportFn::Ball { dim: 2, r: 1.0 };
        assert!((vp_ball_mixed(&b, 1.0, 2, 4096).unwrap() - PI).abs() < 1e-12);
        let b2 = SupportFn::Ball { dim: 2, r: 2.0 };
        assert!((vp_ball_mixed(&b2, 3.0, 2, 4096).unwrap() - PI * 8.0).abs() < 1e-11);
        let b3 = SupportFn::Ball { dim: 3, r: 1.0 };
        assert!((vp_ball_mixed(&b3, 2.0, 3, 1000).unwrap() - kappa(3)).abs() < 1e-12);
    }

    #[test]
    fn square_p1_is_half_perimeter() {
        // Cauchy: ∫ h dθ = perimeter = 4, so V_1(B², M) = 2
        let v = vp_ball_mixed(&square(0.5), 1.0, 2, 4096).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn square_p2_exact() {
        // each vertex owns a quarter arc with h = (cos t + sin t)/2 in local angle
        // t, and ∫_0^{π/2} h² dt = π/8 + 1/4
        let v = vp_ball_mixed(&square(0.5), 2.0, 2, 64).unwrap();
        let want = 0.5 * 4.0 * (PI / 8.0 + 0.25);
        assert!((v - want).abs() < 1e-13, "{v} vs {want}");
    }

    #[test]
    fn quadrature_doubling_is_stable() {
        let mut rng = trial_rng(31, 0, 0);
        let pts: Vec<[f64; 2]> = (0..300).map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]).collect();
        let m = SupportFn::Polytope(hull2d(&pts).unwrap());
        for p in [1.0, 2.5, 4.0] {
            let a = vp_ball_mixed(&m, p, 2, 4096).unwrap();
            let b = vp_ball_mixed(&m, p, 2, 8192).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn lp_sum_examples() {
        let b = || SupportFn::Ball { dim: 2, r: 1.0 };
        let s = lp_sum_support(b(), b(), 2.0).unwrap();
        assert!((s.eval(&[0.6, 0.8]) - 2f64.sqrt()).abs() < 1e-15);
        let big = lp_sum_support(square(1.0), square(0.5), 1.0).unwrap();
        let u = [0.3, -0.7];
        let minkowski = square(1.5).eval(&u);
        assert!((big.eval(&u) - minkowski).abs() < 1e-15);
        let huge = lp_sum_support(square(1.0), b(), 1e4).unwrap();
        let u = [0.8, 0.6];
        assert!((huge.eval(&u) - square(1.0).eval(&u).max(1.0)).abs() < 1e-6);
        let off = SupportFn::Polytope(hull2d(&[[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]).unwrap());
        assert!(matches!(lp_sum_support(off, b(), 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn stable_consistency_domain() {
        assert!(matches!(
            verify_lp_stable_consistency(1.5, 1.0, 1.7, 2, 10, 10, 10, 0),
            Err(Error::Domain(_))
        ));
    }
}
