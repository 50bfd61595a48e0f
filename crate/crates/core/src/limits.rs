//! Successive exit times from unit balls, renewal counts and the
//! distributional convergence probes built on them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::closed_form::ClosedFormTarget;
use crate::error::{param, Error, Result};
use crate::experiments::{base_params, ExperimentConfig, ExperimentOutput, PlotSeries, ResultRow, Verdict};
use crate::hull::{hausdorff, hull_of_coords, intrinsic_volumes, Polytope};
use crate::rng::{map_trials, stream_id, TrialRng};
use crate::stable::{
    sample_cpp_path, standard_symmetric_stable, Flavor, IsotropicSampler, JumpSampler, PathSample, StableSpec,
};
use crate::stats::{hill_stability, hill_tail_index, ks_two_sample, EstimateResult, Moments};

/// Default grid step for exit scanning of continuous flavors.
pub const DEFAULT_DT: f64 = 0.01;
/// Default size of the independent batch that estimates `E T_1`.
pub const DEFAULT_BATCH: usize = 100_000;
/// Block length used when fitting the scale of the stable limit.
pub const FIT_BLOCK: usize = 64;

/// Exit times `T_1 < T_2 < ...` and positions `X(T_i)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub exit_times: Vec<f64>,
    pub exit_points: Vec<Vec<f64>>,
    pub horizon: f64,
}

impl ExitRecord {
    /// `N_s`, the number of exits up to time `s`.
    pub fn count_by(&self, s: f64) -> usize {
        self.exit_times.partition_point(|&t| t <= s)
    }

    /// Increments `X(T_i) - X(T_{i-1})` with `X(T_0) = start`.
    pub fn increments(&self, start: &[f64]) -> Vec<Vec<f64>> {
        let mut prev = start.to_vec();
        let mut out = Vec::with_capacity(self.exit_points.len());
        for p in &self.exit_points {
            out.push(p.iter().zip(&prev).map(|(a, b)| a - b).collect());
            prev.clone_from(p);
        }
        out
    }
}

/// Streaming exit detection. Points are fed in time order; linear drift
/// segments are scanned exactly.
#[derive(Debug, Clone)]
pub struct ExitScanner {
    anchor: Vec<f64>,
    pub record: ExitRecord,
}

impl ExitScanner {
    pub fn new(start: &[f64], horizon: f64) -> ExitScanner {
        ExitScanner {
            anchor: start.to_vec(),
            record: ExitRecord {
                horizon,
                ..Default::default()
            },
        }
    }

    fn exit(&mut self, t: f64, x: &[f64]) {
        self.anchor.clear();
        self.anchor.extend_from_slice(x);
        self.record.exit_times.push(t);
        self.record.exit_points.push(x.to_vec());
    }

    /// Checks the point `x` observed at time `t`; returns true on an exit.
    pub fn observe(&mut self, t: f64, x: &[f64]) -> bool {
        let r2: f64 = x.iter().zip(&self.anchor).map(|(a, b)| (a - b) * (a - b)).sum();
        if r2 > 1.0 {
            self.exit(t, x);
            true
        } else {
            false
        }
    }

    /// Linear motion `x0 + v·τ`, `0 < τ < dur`, starting at time `t0`.
    pub fn drift(&mut self, t0: f64, x0: &[f64], v: &[f64], dur: f64) {
        let vv: f64 = v.iter().map(|a| a * a).sum();
        if vv == 0.0 || dur <= 0.0 {
            return;
        }
        let mut tau0 = 0.0;
        loop {
            // q = position at tau0 relative to the anchor, inside the ball
            let q: Vec<f64> = (0..x0.len()).map(|k| x0[k] + v[k] * tau0 - self.anchor[k]).collect();
            let qv: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
            let qq: f64 = q.iter().map(|a| a * a).sum();
            let disc = (qv * qv - vv * (qq - 1.0)).max(0.0);
            let tau = tau0 + (-qv + disc.sqrt()) / vv;
            if !(tau < dur) || tau <= tau0 {
                return;
            }
            let x: Vec<f64> = (0..x0.len()).map(|k| x0[k] + v[k] * tau).collect();
            self.exit(t0 + tau, &x);
            tau0 = tau;
        }
    }
}

/// Exit record of a sampled path: exact event scan when the path carries a
/// drift, first grid point outside the ball otherwise.
pub fn exit_times(path: &PathSample) -> Result<ExitRecord> {
    if path.is_empty() {
        return Err(param("exit_times needs a non-empty path"));
    }
    let mut sc = ExitScanner::new(path.point(0), path.horizon());
    match &path.drift {
        Some(v) => {
            for i in 1..path.len() {
                let (t0, t1) = (path.times[i - 1], path.times[i]);
                sc.drift(t0, path.point(i - 1), v, t1 - t0);
                sc.observe(t1, path.point(i));
            }
        }
        None => {
            for i in 1..path.len() {
                sc.observe(path.times[i], path.point(i));
            }
        }
    }
    Ok(sc.record)
}

/// Simulates one path until its first exit: `(T_1, X(T_1))`.
///
/// Compound Poisson flavors are scanned exactly at events; continuous
/// flavors on a grid of step `dt`. Returns `None` when no exit happens
/// before `max_time`.
pub fn first_exit<R: Rng + ?Sized>(spec: &StableSpec, dt: f64, max_time: f64, rng: &mut R) -> Result<Option<(f64, Vec<f64>)>> {
    let d = spec.d;
    let origin = vec![0.0; d];
    let mut sc = ExitScanner::new(&origin, max_time);
    if spec.flavor.is_compound_poisson() {
        let jumps = JumpSampler::new(spec)?;
        let mut t = 0.0;
        let mut x = origin.clone();
        let mut j = vec![0.0; d];
        while t < max_time {
            let w = jumps.waiting_time(rng).min(max_time - t);
            sc.drift(t, &x, &jumps.drift, w);
            if let Some(&t1) = sc.record.exit_times.first() {
                return Ok(Some((t1, sc.record.exit_points[0].clone())));
            }
            for k in 0..d {
                x[k] += jumps.drift[k] * w;
            }
            t += w;
            if t >= max_time {
                break;
            }
            jumps.sample_jump(rng, &mut j);
            for k in 0..d {
                x[k] += j[k];
            }
            if sc.observe(t, &x) {
                return Ok(Some((t, x)));
            }
        }
        Ok(None)
    } else {
        let sampler = IsotropicSampler::new(spec)?;
        let factor = dt.powf(1.0 / spec.alpha);
        let mut x = origin;
        let mut step = vec![0.0; d];
        let mut i = 0u64;
        loop {
            i += 1;
            let t = i as f64 * dt;
            if t > max_time {
                return Ok(None);
            }
            sampler.sample_scaled_into(factor, rng, &mut step);
            for k in 0..d {
                x[k] += step[k];
            }
            if sc.observe(t, &x) {
                return Ok(Some((t, x)));
            }
        }
    }
}

/// `Ê T_1` from `trials` independent first exits.
pub fn mean_first_exit(spec: &StableSpec, dt: f64, trials: usize, seed: u64, stream: u64) -> Result<Moments> {
    let out = map_trials(seed, stream, trials, |_, rng| first_exit(spec, dt, 1e6, rng));
    let mut m = Moments::new();
    for r in out {
        match r? {
            Some((t, _)) => m.push(t),
            None => return Err(Error::Resource("no exit before t = 1e6".into())),
        }
    }
    Ok(m)
}

/// Exit counts `N_t` for each `t` in `ts` (sorted ascending) along one path.
fn exit_counts<R: Rng + ?Sized>(spec: &StableSpec, ts: &[f64], dt: f64, rng: &mut R) -> Result<Vec<usize>> {
    let horizon = ts.iter().copied().fold(0.0, f64::max);
    let d = spec.d;
    let record = if spec.flavor.is_compound_poisson() {
        exit_times(&sample_cpp_path(spec, horizon, rng)?)?
    } else {
        let sampler = IsotropicSampler::new(spec)?;
        let factor = dt.powf(1.0 / spec.alpha);
        let mut sc = ExitScanner::new(&vec![0.0; d], horizon);
        let mut x = vec![0.0; d];
        let mut step = vec![0.0; d];
        let steps = (horizon / dt).round() as u64;
        for i in 1..=steps {
            sampler.sample_scaled_into(factor, rng, &mut step);
            for k in 0..d {
                x[k] += step[k];
            }
            sc.observe(i as f64 * dt, &x);
        }
        sc.record
    };
    Ok(ts.iter().map(|&t| record.count_by(t + 1e-9 * dt)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalOptions {
    pub dt: f64,
    pub batch_trials: usize,
}

impl Default for RenewalOptions {
    fn default() -> Self {
        RenewalOptions {
            dt: DEFAULT_DT,
            batch_trials: DEFAULT_BATCH,
        }
    }
}

/// `E[N_t/t]` for each `t`, with `1/Ê T_1` from an independent batch as target.
pub fn renewal_ratio_experiment(spec: &StableSpec, t_values: &[f64], trials: usize, seed: u64) -> Result<Vec<EstimateResult>> {
    Ok(renewal_with(spec, t_values, trials, seed, RenewalOptions::default(), stream_id("renewal"))?.0)
}

/// Renewal estimates plus the batch moments of `T_1`.
pub fn renewal_with(
    spec: &StableSpec,
    t_values: &[f64],
    trials: usize,
    seed: u64,
    opts: RenewalOptions,
    stream: u64,
) -> Result<(Vec<EstimateResult>, Moments)> {
    spec.validate()?;
    let mut ts = t_values.to_vec();
    ts.sort_by(f64::total_cmp);
    if ts.first().is_none_or(|t| !(*t > 0.0)) {
        return Err(param("renewal needs positive t values"));
    }
    let t1 = mean_first_exit(spec, opts.dt, opts.batch_trials, seed, stream ^ stream_id("batch"))?;
    let rate = 1.0 / t1.mean();
    let rate_se = t1.stderr() / (t1.mean() * t1.mean());
    let counts = map_trials(seed, stream ^ stream_id("counts"), trials, |_, rng| exit_counts(spec, &ts, opts.dt, rng));
    let counts: Vec<Vec<usize>> = counts.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        let m: Moments = counts.iter().map(|c| c[i] as f64 / t).collect();
        let target = ClosedFormTarget::new("inverse_mean_exit_time", &[("t", t), ("target_stderr", rate_se)], rate, "1/time");
        out.push(EstimateResult::from_moments(&m, seed).with_target(target));
    }
    Ok((out, t1))
}

/// Gap summary for renewal estimates: `(relative gaps, combined stderrs)`.
pub fn renewal_gaps(est: &[EstimateResult], target_se: f64) -> (Vec<f64>, Vec<f64>) {
    est.iter()
        .map(|e| {
            let t = e.target_value().unwrap_or(f64::NAN);
            ((e.mean - t) / t, (e.stderr.powi(2) + target_se.powi(2)).sqrt() / t)
        })
        .unzip()
}

/// Decreasing-gap rule: `|gap|` never grows by more than `sigma` combined
/// standard errors between consecutive `t`, and the last gap is below the first.
pub fn gaps_decreasing(gaps: &[f64], ses: &[f64], sigma: f64) -> bool {
    let steps_ok = gaps
        .windows(2)
        .zip(ses.windows(2))
        .all(|(g, s)| g[1].abs() <= g[0].abs() + sigma * (s[0] * s[0] + s[1] * s[1]).sqrt());
    steps_ok && gaps.len() >= 2 && gaps[gaps.len() - 1].abs() < gaps[0].abs()
}

pub(crate) fn renewal_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let ts = if cfg.t_values.is_empty() { vec![10.0, 100.0, 1000.0] } else { cfg.t_values.clone() };
    let opts = RenewalOptions {
        dt: cfg.dt.unwrap_or(DEFAULT_DT),
        batch_trials: cfg.batch_trials.unwrap_or(DEFAULT_BATCH),
    };
    let (est, t1) = renewal_with(&cfg.spec, &ts, cfg.trials, cfg.master_seed, opts, cfg.stream("renewal"))?;
    let target_se = t1.stderr() / (t1.mean() * t1.mean());
    let (gaps, ses) = renewal_gaps(&est, target_se);
    let decreasing = gaps_decreasing(&gaps, &ses, cfg.trend_sigma);
    let mut series = PlotSeries::new(format!("{name}_vs_t"), &["t", "mean", "stderr", "target", "rel_gap"]);
    let mut sorted = ts.clone();
    sorted.sort_by(f64::total_cmp);
    for (i, e) in est.into_iter().enumerate() {
        let mut params = base_params(cfg);
        params.insert("t".into(), json!(sorted[i]));
        params.insert("dt".into(), json!(opts.dt));
        params.insert("rel_gap".into(), json!(gaps[i]));
        params.insert("gap_decreasing".into(), json!(decreasing));
        series.rows.push(vec![sorted[i], e.mean, e.stderr, e.target_value().unwrap_or(f64::NAN), gaps[i]]);
        out.rows.push(ResultRow::new(&name, params, None, e, Verdict::Info));
    }
    out.notes.push(format!("E T_1 = {} ± {} (batch {}), gaps {:?}, decreasing = {decreasing}", t1.mean(), t1.stderr(), t1.count(), gaps));
    out.series.push(series);
    Ok(out)
}

// ---------------------------------------------------------------------------
// scaled hulls and the stable limit

fn limit_alpha(spec: &StableSpec) -> Result<f64> {
    match &spec.flavor {
        Flavor::CompoundPoissonHeavy { tail_alpha, .. } => Ok(*tail_alpha),
        Flavor::CompoundPoissonGaussian { .. } => Ok(2.0),
        _ => Err(Error::Config("scaled hull convergence needs a compound Poisson spec".into())),
    }
}

/// Median of `|R(1)|` for a standard symmetric α-stable `R`, by simulation.
fn standard_abs_median(alpha: f64, seed: u64) -> f64 {
    let mut xs: Vec<f64> = map_trials(seed, stream_id("limit/median"), 200_000, |_, rng| standard_symmetric_stable(alpha, rng).abs());
    median(&mut xs)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Fitted limit: isotropic stable spec for `Y` and `Ê T_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitFit {
    pub spec: StableSpec,
    pub mean_t1: f64,
    pub blocks: usize,
}

/// Fits the scale of the limit process from normalized block sums of the
/// embedded walk increments (`ℓ ≡ 1`).
pub fn fit_limit(spec: &StableSpec, paths: usize, horizon: f64, seed: u64, stream: u64) -> Result<LimitFit> {
    let alpha = limit_alpha(spec)?;
    let d = spec.d;
    let recs = map_trials(seed, stream, paths, |_, rng| -> Result<ExitRecord> { exit_times(&sample_cpp_path(spec, horizon, rng)?) });
    let mut block_abs = Vec::new();
    let mut gaps = Moments::new();
    for r in recs {
        let r = r?;
        let mut prev_t = 0.0;
        for &t in &r.exit_times {
            gaps.push(t - prev_t);
            prev_t = t;
        }
        let inc = r.increments(&vec![0.0; d]);
        for block in inc.chunks_exact(FIT_BLOCK) {
            let s: f64 = block.iter().map(|v| v[0]).sum();
            block_abs.push((s / (FIT_BLOCK as f64).powf(1.0 / alpha)).abs());
        }
    }
    if block_abs.len() < 100 {
        return Err(Error::Resource(format!("only {} calibration blocks; raise the calibration horizon", block_abs.len())));
    }
    let sigma = median(&mut block_abs) / standard_abs_median(alpha, seed);
    let c = sigma.powf(alpha);
    Ok(LimitFit {
        spec: StableSpec::new(alpha, c, d, Flavor::Isotropic)?,
        mean_t1: gaps.mean(),
        blocks: block_abs.len(),
    })
}

/// `V_1(t^{-1/α} Z_t)` for one compound Poisson path.
fn scaled_v1<R: Rng + ?Sized>(spec: &StableSpec, alpha: f64, t: f64, rng: &mut R) -> Result<f64> {
    let path = sample_cpp_path(spec, t, rng)?;
    let p = hull_of_coords(spec.d, &path.range_coords())?;
    Ok(intrinsic_volumes(&p)?.get(1) * t.powf(-1.0 / alpha))
}

/// KS comparison of `V_1(t^{-1/α} Z_t)` with `V_1` of the fitted limit hull,
/// for one `t`: `(ks, p_value)`.
pub fn scaled_hull_convergence(spec: &StableSpec, t_large: f64, trials: usize, seed: u64) -> Result<(f64, f64, String)> {
    let alpha = limit_alpha(spec)?;
    let fit = fit_limit(spec, 200, 200.0, seed, stream_id("scaled/fit"))?;
    let limit = limit_sample(&fit, 1000, trials, seed, stream_id("scaled/limit"))?;
    let pre: Vec<f64> = map_trials(seed, stream_id(&format!("scaled/t={t_large}")), trials, |_, rng| scaled_v1(spec, alpha, t_large, rng))
        .into_iter()
        .collect::<Result<_>>()?;
    let (ks, p) = ks_two_sample(&pre, &limit)?;
    let report = format!("alpha={alpha} c_fit={:.5} E T_1={:.5} blocks={} t={t_large} ks={ks:.4} p={p:.4}", fit.spec.c, fit.mean_t1, fit.blocks);
    Ok((ks, p, report))
}

/// `V_1` of hulls of the fitted limit run to time `1/Ê T_1`.
pub fn limit_sample(fit: &LimitFit, n_steps: usize, trials: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let sampler = IsotropicSampler::new(&fit.spec)?;
    let horizon = 1.0 / fit.mean_t1;
    let d = fit.spec.d;
    map_trials(seed, stream, trials, |_, rng| -> Result<f64> {
        let mut coords = Vec::new();
        sampler.walk_coords(n_steps, horizon, rng, &mut coords);
        Ok(intrinsic_volumes(&hull_of_coords(d, &coords)?)?.get(1))
    })
    .into_iter()
    .collect()
}

pub(crate) fn scaled_hull_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let spec = &cfg.spec;
    let alpha = limit_alpha(spec)?;
    let ts = if cfg.t_values.is_empty() { vec![100.0, 1000.0, 10_000.0] } else { cfg.t_values.clone() };
    let repeats = cfg.repeats.unwrap_or(5).max(1);
    let fit = fit_limit(spec, cfg.batch_trials.unwrap_or(200), 200.0, cfg.master_seed, cfg.stream("fit"))?;
    let mut per_t: Vec<Moments> = vec![Moments::new(); ts.len()];
    let mut pvals: Vec<Vec<f64>> = vec![Vec::new(); ts.len()];
    for r in 0..repeats {
        let limit = limit_sample(&fit, cfg.n_steps, cfg.trials, cfg.master_seed, cfg.stream(&format!("limit/r={r}")))?;
        for (i, &t) in ts.iter().enumerate() {
            let pre: Vec<f64> = map_trials(cfg.master_seed, cfg.stream(&format!("t={t}/r={r}")), cfg.trials, |_, rng| scaled_v1(spec, alpha, t, rng))
                .into_iter()
                .collect::<Result<_>>()?;
            let (ks, p) = ks_two_sample(&pre, &limit)?;
            per_t[i].push(ks);
            pvals[i].push(p);
        }
    }
    let first = &per_t[0];
    let last = &per_t[ts.len() - 1];
    let drop = first.mean() - last.mean();
    let se = (first.stderr().powi(2) + last.stderr().powi(2)).sqrt();
    let trend = ts.len() >= 2 && drop > cfg.trend_sigma * se;
    let mut series = PlotSeries::new(format!("{name}_vs_t"), &["t", "ks_mean", "ks_stderr", "p_median"]);
    for (i, &t) in ts.iter().enumerate() {
        let mut params = base_params(cfg);
        params.insert("t".into(), json!(t));
        params.insert("repeats".into(), json!(repeats));
        params.insert("fitted_c".into(), json!(fit.spec.c));
        params.insert("mean_t1".into(), json!(fit.mean_t1));
        params.insert("ks_decreasing".into(), json!(trend));
        let e = EstimateResult::from_moments(&per_t[i], cfg.master_seed);
        let pm = median(&mut pvals[i].clone());
        series.rows.push(vec![t, e.mean, e.stderr, pm]);
        out.rows.push(ResultRow::new(&name, params, None, e, Verdict::Info));
    }
    out.notes.push(format!("KS drop {drop:.4} vs {}·se = {:.4}: trend = {trend}", cfg.trend_sigma, cfg.trend_sigma * se));
    out.series.push(series);
    Ok(out)
}

// ---------------------------------------------------------------------------
// exit value tail

/// `‖X(T_1)‖` over `trials` independent first exits.
pub fn exit_norms(spec: &StableSpec, trials: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    map_trials(seed, stream, trials, |_, rng: &mut TrialRng| -> Result<f64> {
        match first_exit(spec, DEFAULT_DT, 1e6, rng)? {
            Some((_, x)) => Ok(x.iter().map(|a| a * a).sum::<f64>().sqrt()),
            None => Err(Error::Resource("no exit before t = 1e6".into())),
        }
    })
    .into_iter()
    .collect()
}

/// Hill index of `‖X(T_1)‖` (infinite when all norms coincide).
pub fn exit_value_tail_experiment(spec: &StableSpec, trials: usize, seed: u64) -> Result<f64> {
    let xs = exit_norms(spec, trials, seed, stream_id("exit_tail"))?;
    let k = ((trials as f64).powf(0.6) as usize).clamp(1, trials - 1);
    if is_degenerate(&xs) {
        return Ok(f64::INFINITY);
    }
    hill_tail_index(&xs, k)
}

fn is_degenerate(xs: &[f64]) -> bool {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= 1e-12 * hi.abs().max(1.0)
}

pub(crate) fn exit_tail_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let xs = exit_norms(&cfg.spec, cfg.trials, cfg.master_seed, cfg.stream("exit_tail"))?;
    let k = cfg.hill_k(xs.len());
    let mut params = base_params(cfg);
    params.insert("k".into(), json!(k));
    if is_degenerate(&xs) {
        params.insert("degenerate".into(), json!(true));
        let e = EstimateResult::from_samples(&xs, cfg.master_seed);
        out.notes.push("|X(T_1)| is constant: degenerate tail".into());
        out.rows.push(ResultRow::new(&name, params, None, e, Verdict::Info));
        return Ok(out);
    }
    let h = hill_tail_index(&xs, k)?;
    let (_, spread) = hill_stability(&xs, k)?;
    params.insert("hill_spread".into(), json!(spread));
    params.insert("heavy".into(), json!(spread <= 0.2));
    let mut e = EstimateResult {
        mean: h,
        stderr: h / (k as f64).sqrt(),
        trials: xs.len(),
        seed: cfg.master_seed,
        target: None,
        z_score: None,
    };
    let verdict = match &cfg.spec.flavor {
        Flavor::CompoundPoissonHeavy { tail_alpha, .. } => {
            e = e.with_target(ClosedFormTarget::new("tail_index", &[("tail_alpha", *tail_alpha)], *tail_alpha, "1"));
            Verdict::from_bool((h - tail_alpha).abs() <= cfg.abs_band.unwrap_or(0.2))
        }
        _ => Verdict::Info,
    };
    if spread > 0.2 {
        out.notes.push(format!("Hill estimates spread {spread:.3} across k: no stable tail index"));
    }
    out.rows.push(ResultRow::new(&name, params, None, e, verdict));
    Ok(out)
}

// ---------------------------------------------------------------------------
// geometric checks

/// `ρ_H(conv range A, conv range B) <= sup_t ‖A(t) − B(t)‖` on a common grid.
pub fn hull_range_continuity_check(a: &PathSample, b: &PathSample) -> Result<bool> {
    if a.times != b.times || a.dim != b.dim || a.drift.is_some() != b.drift.is_some() {
        return Err(param("continuity check needs paths on a common time grid"));
    }
    let ra = a.range_coords();
    let rb = b.range_coords();
    let d = a.dim;
    let sup = ra
        .chunks_exact(d)
        .zip(rb.chunks_exact(d))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let ha = hull_of_coords(d, &ra)?;
    let hb = hull_of_coords(d, &rb)?;
    let rho = hausdorff(&ha, &hb)?;
    Ok(rho <= sup + ha.eps.max(hb.eps) + 1e-12)
}

/// Hausdorff distance between `conv{0, S_1, ..., S_{N_t}}` and the hull of
/// the path range; at most 1 (up to tolerance) by construction of the exits.
pub fn sandwich_distance(path: &PathSample) -> Result<(f64, Polytope, Polytope)> {
    let rec = exit_times(path)?;
    let d = path.dim;
    let mut emb = path.point(0).to_vec();
    for p in &rec.exit_points {
        emb.extend_from_slice(p);
    }
    let inner = hull_of_coords(d, &emb)?;
    let outer = hull_of_coords(d, &path.range_coords())?;
    Ok((hausdorff(&inner, &outer)?, inner, outer))
}
