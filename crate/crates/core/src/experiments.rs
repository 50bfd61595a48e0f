//! Experiment configuration, dispatch and the Monte Carlo runners for hull
//! functionals, Gram determinants, boundary/interior frequencies and tail
//! indices.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::closed_form::{self, ClosedFormTarget};
use crate::error::{Error, Result};
use crate::hull::{self, faces_containing, hull_of_coords, intrinsic_volumes, Polytope};
use crate::rng::{map_trials, stream_id};
use crate::stable::{Flavor, IsotropicSampler, StableSpec};
use crate::stats::{hill_stability, hill_tail_index, EstimateResult, Moments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentKind {
    IntrinsicVolumes,
    GramDeterminant,
    BoundaryOrigin,
    InteriorEndpoint,
    TailIndex,
    FacesCount,
    ScalingRatio,
    LpBrownian,
    LpStableConsistency,
    Renewal,
    ScaledHullConvergence,
    ExitTail,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 12] = [
        ExperimentKind::IntrinsicVolumes,
        ExperimentKind::GramDeterminant,
        ExperimentKind::BoundaryOrigin,
        ExperimentKind::InteriorEndpoint,
        ExperimentKind::TailIndex,
        ExperimentKind::FacesCount,
        ExperimentKind::ScalingRatio,
        ExperimentKind::LpBrownian,
        ExperimentKind::LpStableConsistency,
        ExperimentKind::Renewal,
        ExperimentKind::ScaledHullConvergence,
        ExperimentKind::ExitTail,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::IntrinsicVolumes => "intrinsic_volumes",
            ExperimentKind::GramDeterminant => "gram_determinant",
            ExperimentKind::BoundaryOrigin => "boundary_origin",
            ExperimentKind::InteriorEndpoint => "interior_endpoint",
            ExperimentKind::TailIndex => "tail_index",
            ExperimentKind::FacesCount => "faces_count",
            ExperimentKind::ScalingRatio => "scaling_ratio",
            ExperimentKind::LpBrownian => "lp_brownian",
            ExperimentKind::LpStableConsistency => "lp_stable_consistency",
            ExperimentKind::Renewal => "renewal",
            ExperimentKind::ScaledHullConvergence => "scaled_hull_convergence",
            ExperimentKind::ExitTail => "exit_tail",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::IntrinsicVolumes => "E V_j of the walk hull against the stable closed form and the exact finite-n value",
            ExperimentKind::GramDeterminant => "E sqrt(det M^T M) for Gaussian columns against j! V_j((2π)^{-1/2} B^d)",
            ExperimentKind::BoundaryOrigin => "frequency of 0 on the hull boundary against the Markov bound E Y_n",
            ExperimentKind::InteriorEndpoint => "frequency of the endpoint S_n in the hull interior",
            ExperimentKind::TailIndex => "Hill index of V_j(Z) samples against alpha",
            ExperimentKind::FacesCount => "mean number of hull faces through 0 against E Y_n",
            ExperimentKind::ScalingRatio => "ratio of E V_j at horizons s and 1 against s^{j/alpha}",
            ExperimentKind::LpBrownian => "E V_p(B^d, Z) for Brownian hulls against the closed form",
            ExperimentKind::LpStableConsistency => "hull-side and sup-side estimates of E V_p(B^d, Z) for stable hulls",
            ExperimentKind::Renewal => "E[N_t/t] against 1/E T_1 from an independent batch",
            ExperimentKind::ScaledHullConvergence => "KS distance of t^{-1/alpha} V_1(Z_t) to the stable limit",
            ExperimentKind::ExitTail => "Hill index of |X(T_1)| against the jump tail index",
        }
    }
}

fn default_trials() -> usize {
    10_000
}
fn default_n_steps() -> usize {
    10_000
}
fn default_horizon() -> f64 {
    1.0
}
fn default_tolerance() -> f64 {
    4.0
}
fn default_trend_sigma() -> f64 {
    3.0
}
fn default_quad_points() -> usize {
    4096
}
fn default_sphere_points() -> usize {
    256
}

/// One experiment as read from a config file. Fields that do not apply to
/// the chosen kind are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub experiment: ExperimentKind,
    pub spec: StableSpec,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Empty means `1..=d`.
    #[serde(default)]
    pub j_orders: Vec<usize>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance_sigma: f64,
    /// Relative-error band that also counts as PASS for limit targets.
    #[serde(default)]
    pub rel_band: Option<f64>,
    /// Absolute band for index-type targets (tail experiments).
    #[serde(default)]
    pub abs_band: Option<f64>,
    #[serde(default = "default_trend_sigma")]
    pub trend_sigma: f64,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub horizons: Vec<f64>,
    #[serde(default)]
    pub p_values: Vec<f64>,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    #[serde(default = "default_sphere_points")]
    pub sphere_points: usize,
    #[serde(default)]
    pub hill_k: Option<usize>,
    /// Grid step for exit scanning of continuous flavors.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Lower bound for the interior-endpoint frequency at the largest n.
    #[serde(default)]
    pub floor: Option<f64>,
    /// Trials of the independent batch used to estimate `E T_1`.
    #[serde(default)]
    pub batch_trials: Option<usize>,
    /// Independent repetitions for trend statistics.
    #[serde(default)]
    pub repeats: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, spec: StableSpec) -> ExperimentConfig {
        ExperimentConfig {
            name: None,
            experiment,
            spec,
            n_steps: default_n_steps(),
            trials: default_trials(),
            j_orders: Vec::new(),
            horizon: 1.0,
            master_seed: 0,
            tolerance_sigma: 4.0,
            rel_band: None,
            abs_band: None,
            trend_sigma: 3.0,
            n_values: Vec::new(),
            horizons: Vec::new(),
            p_values: Vec::new(),
            t_values: Vec::new(),
            grid_n: None,
            quad_points: default_quad_points(),
            sphere_points: default_sphere_points(),
            hill_k: None,
            dt: None,
            floor: None,
            batch_trials: None,
            repeats: None,
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.label().to_string())
    }

    pub fn orders(&self) -> Vec<usize> {
        if self.j_orders.is_empty() {
            (1..=self.spec.d).collect()
        } else {
            self.j_orders.clone()
        }
    }

    pub fn hill_k(&self, samples: usize) -> usize {
        self.hill_k
            .unwrap_or_else(|| (samples as f64).powf(0.6).floor() as usize)
            .clamp(1, samples.saturating_sub(1).max(1))
    }

    /// Random stream for a labelled sub-run of this experiment.
    pub fn stream(&self, label: &str) -> u64 {
        stream_id(&format!("{}/{}/{label}", self.display_name(), self.experiment.label()))
    }

    pub fn default_rel_band(&self) -> f64 {
        if let Some(b) = self.rel_band {
            return b;
        }
        match self.experiment {
            ExperimentKind::IntrinsicVolumes if self.spec.alpha == 2.0 => 0.02,
            ExperimentKind::IntrinsicVolumes => 0.03,
            ExperimentKind::LpBrownian => 0.02,
            ExperimentKind::LpStableConsistency => 0.03,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Err(Error::Validation { field: field.into(), message });
        self.spec.validate().map_err(|e| Error::Validation {
            field: "spec".into(),
            message: e.to_string(),
        })?;
        if self.trials < 100 {
            return bad("trials", format!("{} < 100", self.trials));
        }
        if self.n_steps == 0 {
            return bad("n_steps", "must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon", format!("{} must be positive", self.horizon));
        }
        if !(self.tolerance_sigma >= 0.0) {
            return bad("tolerance_sigma", "must be non-negative".into());
        }
        let d = self.spec.d;
        if let Some(j) = self.j_orders.iter().find(|&&j| j == 0 || j > d) {
            return bad("j_orders", format!("order {j} outside 1..={d}"));
        }
        if self.n_values.contains(&0) {
            return bad("n_values", "step counts must be at least 1".into());
        }
        let continuous = matches!(self.spec.flavor, Flavor::Isotropic | Flavor::Brownian);
        use ExperimentKind::*;
        match self.experiment {
            IntrinsicVolumes | ScalingRatio | TailIndex | LpBrownian | LpStableConsistency | BoundaryOrigin
            | InteriorEndpoint | FacesCount => {
                if !continuous {
                    return bad("spec.flavor", "this experiment needs an Isotropic or Brownian spec".into());
                }
                if !(2..=3).contains(&d) {
                    return bad("spec.d", format!("hull experiments need d in {{2,3}}, got {d}"));
                }
            }
            GramDeterminant => {
                if d > 6 {
                    return bad("spec.d", format!("Gram experiment supports d <= 6, got {d}"));
                }
            }
            Renewal => {}
            ScaledHullConvergence | ExitTail => {
                if !self.spec.flavor.is_compound_poisson() {
                    return bad("spec.flavor", "this experiment needs a compound Poisson spec".into());
                }
            }
        }
        if matches!(self.experiment, IntrinsicVolumes | ScalingRatio | LpStableConsistency) && !(self.spec.alpha > 1.0) {
            return bad("spec.alpha", format!("the closed forms need alpha in (1,2], got {}", self.spec.alpha));
        }
        if matches!(self.experiment, BoundaryOrigin | InteriorEndpoint) && d != 2 {
            return bad("spec.d", "boundary and interior frequencies are implemented for d = 2".into());
        }
        if matches!(self.experiment, LpBrownian) {
            if !matches!(self.spec.flavor, Flavor::Brownian) || self.spec.c != 0.5 {
                return bad("spec", "LpBrownian needs the standard Brownian spec (c = 0.5)".into());
            }
            if let Some(p) = self.p_values.iter().find(|&&p| !(p >= 1.0)) {
                return bad("p_values", format!("p = {p} must be at least 1"));
            }
        }
        if matches!(self.experiment, LpStableConsistency) {
            let a = self.spec.alpha;
            if !(a < 2.0) {
                return bad("spec.alpha", "stable consistency needs alpha < 2".into());
            }
            if let Some(p) = self.p_values.iter().find(|&&p| !(p >= 1.0 && p < a)) {
                return bad("p_values", format!("p = {p} violates 1 <= p < alpha = {a}"));
            }
        }
        if matches!(self.experiment, ScaledHullConvergence) {
            if self.t_values.iter().any(|t| !(*t > 0.0)) {
                return bad("t_values", "times must be positive".into());
            }
        }
        if matches!(self.experiment, Renewal) && self.t_values.iter().any(|t| !(*t > 0.0)) {
            return bad("t_values", "times must be positive".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt", format!("{dt} must be positive"));
            }
        }
        if self.quad_points < 8 {
            return bad("quad_points", "need at least 8 nodes".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Two-sided check: `|z| <= tol` or relative error within `rel_band`.
pub fn two_sided_verdict(e: &EstimateResult, tol: f64, rel_band: f64) -> Verdict {
    let Some(target) = e.target_value() else {
        return Verdict::Info;
    };
    let within_sigma = match e.z_score {
        Some(z) => z.abs() <= tol,
        None => e.mean == target,
    };
    let within_band = e.rel_error().is_some_and(|r| r <= rel_band);
    Verdict::from_bool(within_sigma || within_band)
}

/// One-sided check `mean <= target + tol·stderr`.
pub fn upper_bound_verdict(e: &EstimateResult, tol: f64) -> Verdict {
    match e.target_value() {
        Some(t) => Verdict::from_bool(e.mean <= t + tol * e.stderr),
        None => Verdict::Info,
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub j: Option<usize>,
    pub estimate: EstimateResult,
    pub verdict: Verdict,
}

impl ResultRow {
    pub fn new(experiment: &str, params: BTreeMap<String, Value>, j: Option<usize>, estimate: EstimateResult, verdict: Verdict) -> ResultRow {
        ResultRow {
            experiment: experiment.to_string(),
            params,
            j,
            estimate,
            verdict,
        }
    }

    pub fn param_json(&self) -> String {
        serde_json::to_string(&self.params).expect("params serialize")
    }
}

/// Plot-ready table written as its own CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotSeries {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> PlotSeries {
        PlotSeries {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub name: String,
    pub rows: Vec<ResultRow>,
    pub series: Vec<PlotSeries>,
    pub notes: Vec<String>,
    /// Hull of the first trial, for debugging dumps.
    #[serde(skip)]
    pub sample_polytopes: Vec<Polytope>,
}

impl ExperimentOutput {
    pub fn new(name: String) -> ExperimentOutput {
        ExperimentOutput {
            name,
            ..Default::default()
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.rows.iter().any(|r| r.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Info
        }
    }
}

pub(crate) fn base_params(cfg: &ExperimentConfig) -> BTreeMap<String, Value> {
    let mut p = BTreeMap::new();
    p.insert("alpha".into(), json!(cfg.spec.alpha));
    p.insert("c".into(), json!(cfg.spec.c));
    p.insert("d".into(), json!(cfg.spec.d));
    p.insert("flavor".into(), json!(flavor_label(&cfg.spec.flavor)));
    p
}

fn flavor_label(f: &Flavor) -> &'static str {
    match f {
        Flavor::Isotropic => "isotropic",
        Flavor::Brownian => "brownian",
        Flavor::CompoundPoissonHeavy { .. } => "cpp_heavy",
        Flavor::CompoundPoissonGaussian { .. } => "cpp_gaussian",
    }
}

/// Runs one validated experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    use ExperimentKind::*;
    match cfg.experiment {
        IntrinsicVolumes => intrinsic_volume_output(cfg),
        GramDeterminant => gram_output(cfg),
        BoundaryOrigin => boundary_output(cfg),
        InteriorEndpoint => interior_output(cfg),
        FacesCount => faces_output(cfg),
        TailIndex => tail_index_output(cfg),
        ScalingRatio => scaling_output(cfg),
        LpBrownian => crate::lp::lp_brownian_output(cfg),
        LpStableConsistency => crate::lp::lp_stable_output(cfg),
        Renewal => crate::limits::renewal_output(cfg),
        ScaledHullConvergence => crate::limits::scaled_hull_output(cfg),
        ExitTail => crate::limits::exit_tail_output(cfg),
    }
}

// ---------------------------------------------------------------------------
// hull functionals of the embedded walk

/// Per-trial intrinsic volumes `(V_0..V_d)` of `conv{0, S_1, ..., S_n}`, plus
/// the first trial's hull.
pub fn walk_hull_volumes(
    spec: &StableSpec,
    n: usize,
    horizon: f64,
    trials: usize,
    master_seed: u64,
    stream: u64,
) -> Result<(Vec<Vec<f64>>, Option<Polytope>)> {
    let sampler = IsotropicSampler::new(spec)?;
    let d = spec.d;
    let out = map_trials(master_seed, stream, trials, |k, rng| -> Result<(Vec<f64>, Option<Polytope>)> {
        let mut coords = Vec::new();
        sampler.walk_coords(n, horizon, rng, &mut coords);
        let p = hull_of_coords(d, &coords)?;
        let v = intrinsic_volumes(&p)?.values;
        Ok((v, (k == 0).then_some(p)))
    });
    let mut vols = Vec::with_capacity(trials);
    let mut first = None;
    for r in out {
        let (v, p) = r?;
        vols.push(v);
        if p.is_some() {
            first = p;
        }
    }
    Ok((vols, first))
}

/// `V_j(K)` of the associated zonoid `c^{1/α} B^d`.
pub fn zonoid_vj(spec: &StableSpec, j: usize) -> Result<f64> {
    closed_form::ball_vj(spec.d, j, spec.c.powf(1.0 / spec.alpha))
}

/// Limit target `E V_j(Z_s)` for an isotropic or Brownian spec.
pub fn limit_target(spec: &StableSpec, j: usize, horizon: f64) -> Result<ClosedFormTarget> {
    let v = closed_form::ev_intrinsic_isotropic(spec.alpha, spec.c, spec.d, j)? * closed_form::horizon_factor(horizon, j, spec.alpha);
    Ok(ClosedFormTarget::new(
        "ev_intrinsic_isotropic",
        &[("alpha", spec.alpha), ("c", spec.c), ("d", spec.d as f64), ("j", j as f64), ("horizon", horizon)],
        v,
        format!("length^{j}"),
    ))
}

/// Exact finite-n target `E V_j(C_n)` when it is computable.
pub fn finite_n_target(spec: &StableSpec, j: usize, n: usize, horizon: f64) -> Option<ClosedFormTarget> {
    let vk = zonoid_vj(spec, j).ok()?;
    let v = closed_form::vysotsky_ev(n, j, spec.alpha, vk).ok()? * closed_form::horizon_factor(horizon, j, spec.alpha);
    Some(ClosedFormTarget::new(
        "vysotsky_ev",
        &[("alpha", spec.alpha), ("c", spec.c), ("d", spec.d as f64), ("j", j as f64), ("n", n as f64), ("horizon", horizon)],
        v,
        format!("length^{j}"),
    ))
}

/// Spec-level entry point: one estimate per requested order at `n_steps`,
/// with the limit target attached.
pub fn run_intrinsic_volume_experiment(cfg: &ExperimentConfig) -> Result<Vec<EstimateResult>> {
    cfg.validate()?;
    let (vols, _) = walk_hull_volumes(&cfg.spec, cfg.n_steps, cfg.horizon, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={}", cfg.n_steps)))?;
    cfg.orders()
        .into_iter()
        .map(|j| {
            let m: Moments = vols.iter().map(|v| v[j]).collect();
            Ok(EstimateResult::from_moments(&m, cfg.master_seed).with_target(limit_target(&cfg.spec, j, cfg.horizon)?))
        })
        .collect()
}

fn intrinsic_volume_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let band = cfg.default_rel_band();
    let mut ns = cfg.n_values.clone();
    if !ns.contains(&cfg.n_steps) {
        ns.push(cfg.n_steps);
    }
    ns.sort_unstable();
    let orders = cfg.orders();
    let mut series = PlotSeries::new(format!("{name}_vs_n"), &["n", "j", "mean", "stderr", "target", "limit"]);
    let mut by_n: Vec<(usize, Vec<Moments>)> = Vec::new();
    for &n in &ns {
        let (vols, first) = walk_hull_volumes(&cfg.spec, n, cfg.horizon, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={n}")))?;
        if n == cfg.n_steps {
            out.sample_polytopes.extend(first);
        }
        let mut ms = Vec::new();
        for &j in &orders {
            let m: Moments = vols.iter().map(|v| v[j]).collect();
            let limit = limit_target(&cfg.spec, j, cfg.horizon)?;
            let exact = finite_n_target(&cfg.spec, j, n, cfg.horizon);
            series.rows.push(vec![
                n as f64,
                j as f64,
                m.mean(),
                m.stderr(),
                exact.as_ref().map_or(f64::NAN, |t| t.value),
                limit.value,
            ]);
            let mut params = base_params(cfg);
            params.insert("n".into(), json!(n));
            params.insert("horizon".into(), json!(cfg.horizon));
            if n == cfg.n_steps {
                let mut p = params.clone();
                p.insert("target_kind".into(), json!("limit"));
                let e = EstimateResult::from_moments(&m, cfg.master_seed).with_target(limit);
                let v = two_sided_verdict(&e, cfg.tolerance_sigma, band);
                out.rows.push(ResultRow::new(&name, p, Some(j), e, v));
            }
            if let Some(t) = exact {
                params.insert("target_kind".into(), json!("finite_n"));
                let e = EstimateResult::from_moments(&m, cfg.master_seed).with_target(t);
                let v = two_sided_verdict(&e, cfg.tolerance_sigma, 0.0);
                out.rows.push(ResultRow::new(&name, params, Some(j), e, v));
            }
            ms.push(m);
        }
        by_n.push((n, ms));
    }
    // inner hulls grow with n: means must not drop by more than trend_sigma
    for w in by_n.windows(2) {
        for (idx, &j) in orders.iter().enumerate() {
            let (a, b) = (&w[0].1[idx], &w[1].1[idx]);
            let se = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
            if b.mean() < a.mean() - cfg.trend_sigma * se {
                out.notes.push(format!(
                    "monotone probe: j={j} mean drops from {} (n={}) to {} (n={})",
                    a.mean(),
                    w[0].0,
                    b.mean(),
                    w[1].0
                ));
            }
        }
    }
    out.series.push(series);
    Ok(out)
}

fn scaling_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let hs = if cfg.horizons.is_empty() { vec![1.0, 4.0] } else { cfg.horizons.clone() };
    let base_h = hs[0];
    let orders = cfg.orders();
    let (base, _) = walk_hull_volumes(&cfg.spec, cfg.n_steps, base_h, cfg.trials, cfg.master_seed, cfg.stream(&format!("h={base_h}")))?;
    let mut series = PlotSeries::new(format!("{name}_vs_horizon"), &["horizon", "j", "mean", "stderr", "target"]);
    for &s in &hs[1..] {
        let (vols, _) = walk_hull_volumes(&cfg.spec, cfg.n_steps, s, cfg.trials, cfg.master_seed, cfg.stream(&format!("h={s}")))?;
        for &j in &orders {
            let m1: Moments = base.iter().map(|v| v[j]).collect();
            let ms: Moments = vols.iter().map(|v| v[j]).collect();
            let ratio = ms.mean() / m1.mean();
            let se = ratio * ((ms.stderr() / ms.mean()).powi(2) + (m1.stderr() / m1.mean()).powi(2)).sqrt();
            let want = (s / base_h).powf(j as f64 / cfg.spec.alpha);
            let target = ClosedFormTarget::new(
                "horizon_factor",
                &[("s", s / base_h), ("j", j as f64), ("alpha", cfg.spec.alpha)],
                want,
                "1",
            );
            let e = EstimateResult {
                mean: ratio,
                stderr: se,
                trials: cfg.trials,
                seed: cfg.master_seed,
                target: None,
                z_score: None,
            }
            .with_target(target);
            let v = two_sided_verdict(&e, cfg.tolerance_sigma, 0.0);
            let mut params = base_params(cfg);
            params.insert("n".into(), json!(cfg.n_steps));
            params.insert("horizon".into(), json!(s));
            params.insert("base_horizon".into(), json!(base_h));
            out.rows.push(ResultRow::new(&name, params, Some(j), e, v));
            series.rows.push(vec![s, j as f64, ms.mean(), ms.stderr(), want * m1.mean()]);
        }
    }
    out.series.push(series);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Gram determinants

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramDist {
    StandardGaussian,
}

/// `j!·V_j((2π)^{-1/2} B^d)`.
pub fn gram_target(d: usize, j: usize) -> Result<ClosedFormTarget> {
    let v = closed_form::factorial_f64(j) * closed_form::ball_vj(d, j, (2.0 * std::f64::consts::PI).powf(-0.5))?;
    Ok(ClosedFormTarget::new("gram_gaussian", &[("d", d as f64), ("j", j as f64)], v, format!("length^{j}")))
}

pub fn run_gram_experiment(d: usize, j: usize, dist: GramDist, trials: usize, seed: u64) -> Result<EstimateResult> {
    let GramDist::StandardGaussian = dist;
    if j == 0 || j > d {
        return Err(Error::Parameter(format!("Gram experiment needs 1 <= j <= d, got j = {j}, d = {d}")));
    }
    let stream = stream_id(&format!("gram/d={d}/j={j}"));
    let vals = map_trials(seed, stream, trials, |_, rng| {
        let cols: Vec<Vec<f64>> = (0..j).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
        hull::gram_det(&cols)
    });
    let mut m = Moments::new();
    for v in vals {
        m.push(v?);
    }
    Ok(EstimateResult::from_moments(&m, seed).with_target(gram_target(d, j)?))
}

fn gram_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let d = cfg.spec.d;
    for j in cfg.orders() {
        let e = run_gram_experiment(d, j, GramDist::StandardGaussian, cfg.trials, cfg.master_seed ^ cfg.stream("gram"))?;
        let e = EstimateResult { seed: cfg.master_seed, ..e };
        let v = two_sided_verdict(&e, cfg.tolerance_sigma, 0.0);
        let mut params = BTreeMap::new();
        params.insert("d".into(), json!(d));
        params.insert("dist".into(), json!("standard_gaussian"));
        out.rows.push(ResultRow::new(&name, params, Some(j), e, v));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// faces through the origin, boundary and interior frequencies

/// Per-trial `(Y_n, origin on ∂C_n, S_n in Int C_n)` for the walk hull.
pub fn walk_face_stats(
    spec: &StableSpec,
    n: usize,
    trials: usize,
    master_seed: u64,
    stream: u64,
) -> Result<Vec<(usize, bool, bool)>> {
    let sampler = IsotropicSampler::new(spec)?;
    let d = spec.d;
    let out = map_trials(master_seed, stream, trials, |_, rng| -> Result<(usize, bool, bool)> {
        let mut coords = Vec::new();
        sampler.walk_coords(n, 1.0, rng, &mut coords);
        let p = hull_of_coords(d, &coords)?;
        let y = faces_containing(&p, &coords[..d])?;
        let end = &coords[n * d..];
        let interior = p.is_full_dimensional() && faces_containing(&p, end)? == 0;
        Ok((y, y > 0, interior))
    });
    out.into_iter().collect()
}

fn freq_estimate(xs: impl Iterator<Item = bool>, seed: u64) -> EstimateResult {
    let m: Moments = xs.map(|b| if b { 1.0 } else { 0.0 }).collect();
    EstimateResult::from_moments(&m, seed)
}

fn faces_target(n: usize, d: usize) -> Result<ClosedFormTarget> {
    Ok(ClosedFormTarget::new(
        "expected_faces_yn",
        &[("n", n as f64), ("d", d as f64)],
        closed_form::expected_faces_yn(n, d)?,
        "1",
    ))
}

fn n_list(cfg: &ExperimentConfig) -> Vec<usize> {
    if cfg.n_values.is_empty() {
        vec![cfg.n_steps]
    } else {
        cfg.n_values.clone()
    }
}

/// Spec-level entry point at `n_steps`: boundary frequency and the bound `E Y_n`.
pub fn run_boundary_origin_experiment(cfg: &ExperimentConfig) -> Result<(EstimateResult, f64)> {
    cfg.validate()?;
    let stats = walk_face_stats(&cfg.spec, cfg.n_steps, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={}", cfg.n_steps)))?;
    let bound = closed_form::expected_faces_yn(cfg.n_steps, cfg.spec.d)?;
    Ok((freq_estimate(stats.iter().map(|s| s.1), cfg.master_seed), bound))
}

pub fn run_interior_endpoint_experiment(cfg: &ExperimentConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let stats = walk_face_stats(&cfg.spec, cfg.n_steps, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={}", cfg.n_steps)))?;
    Ok(freq_estimate(stats.iter().map(|s| s.2), cfg.master_seed))
}

/// Row stating that consecutive values drop (or rise) by more than
/// `sigma` combined standard errors; `mean` is the smallest standardized step.
fn trend_row(
    cfg: &ExperimentConfig,
    name: &str,
    label: &str,
    points: &[(usize, EstimateResult)],
    decreasing: bool,
) -> ResultRow {
    let mut worst = f64::INFINITY;
    for w in points.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        let step = if decreasing { a.mean - b.mean } else { b.mean - a.mean };
        let z = if se > 0.0 { step / se } else if step > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        worst = worst.min(z);
    }
    let mut params = base_params(cfg);
    params.insert("check".into(), json!(label));
    params.insert("n_values".into(), json!(points.iter().map(|p| p.0).collect::<Vec<_>>()));
    let e = EstimateResult {
        mean: worst,
        stderr: 0.0,
        trials: cfg.trials,
        seed: cfg.master_seed,
        target: Some(ClosedFormTarget::new("trend_sigma", &[], cfg.trend_sigma, "sigma")),
        z_score: None,
    };
    let v = Verdict::from_bool(points.len() >= 2 && worst > cfg.trend_sigma);
    ResultRow::new(name, params, None, e, v)
}

fn boundary_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let d = cfg.spec.d;
    let mut series = PlotSeries::new(format!("{name}_vs_n"), &["n", "mean", "stderr", "target", "asymptotic"]);
    let mut pts = Vec::new();
    for n in n_list(cfg) {
        let stats = walk_face_stats(&cfg.spec, n, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={n}")))?;
        let e = freq_estimate(stats.iter().map(|s| s.1), cfg.master_seed).with_target(faces_target(n, d)?);
        let v = upper_bound_verdict(&e, cfg.tolerance_sigma);
        series.rows.push(vec![n as f64, e.mean, e.stderr, e.target_value().unwrap_or(f64::NAN), closed_form::expected_faces_asymptotic(n, d)]);
        let mut params = base_params(cfg);
        params.insert("n".into(), json!(n));
        params.insert("check".into(), json!("markov_bound"));
        out.rows.push(ResultRow::new(&name, params, None, e.clone(), v));
        pts.push((n, e));
    }
    if pts.len() >= 2 {
        out.rows.push(trend_row(cfg, &name, "decreasing", &pts, true));
    }
    out.series.push(series);
    Ok(out)
}

fn interior_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let mut series = PlotSeries::new(format!("{name}_vs_n"), &["n", "mean", "stderr"]);
    let mut pts = Vec::new();
    for n in n_list(cfg) {
        let stats = walk_face_stats(&cfg.spec, n, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={n}")))?;
        let e = freq_estimate(stats.iter().map(|s| s.2), cfg.master_seed);
        series.rows.push(vec![n as f64, e.mean, e.stderr]);
        let mut params = base_params(cfg);
        params.insert("n".into(), json!(n));
        out.rows.push(ResultRow::new(&name, params, None, e.clone(), Verdict::Info));
        pts.push((n, e));
    }
    if pts.len() >= 2 {
        // the first and last n are compared directly
        let ends = [pts[0].clone(), pts[pts.len() - 1].clone()];
        out.rows.push(trend_row(cfg, &name, "increasing", &ends, false));
    }
    if let Some(floor) = cfg.floor {
        let (n, last) = pts.last().cloned().expect("at least one n");
        let mut params = base_params(cfg);
        params.insert("n".into(), json!(n));
        params.insert("check".into(), json!("floor"));
        let e = EstimateResult {
            target: Some(ClosedFormTarget::new("interior_floor", &[("n", n as f64)], floor, "1")),
            ..last
        };
        let v = Verdict::from_bool(e.mean > floor);
        out.rows.push(ResultRow::new(&name, params, None, e, v));
    }
    out.series.push(series);
    Ok(out)
}

fn faces_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let d = cfg.spec.d;
    let mut series = PlotSeries::new(format!("{name}_vs_n"), &["n", "mean", "stderr", "target", "asymptotic"]);
    for n in n_list(cfg) {
        let stats = walk_face_stats(&cfg.spec, n, cfg.trials, cfg.master_seed, cfg.stream(&format!("n={n}")))?;
        let m: Moments = stats.iter().map(|s| s.0 as f64).collect();
        let e = EstimateResult::from_moments(&m, cfg.master_seed).with_target(faces_target(n, d)?);
        let v = two_sided_verdict(&e, cfg.tolerance_sigma, 0.0);
        series.rows.push(vec![n as f64, e.mean, e.stderr, e.target_value().unwrap_or(f64::NAN), closed_form::expected_faces_asymptotic(n, d)]);
        let mut params = base_params(cfg);
        params.insert("n".into(), json!(n));
        out.rows.push(ResultRow::new(&name, params, None, e, v));
    }
    out.series.push(series);
    Ok(out)
}

// ---------------------------------------------------------------------------
// tail index

fn tail_index_output(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let name = cfg.display_name();
    let mut out = ExperimentOutput::new(name.clone());
    let (vols, _) = walk_hull_volumes(&cfg.spec, cfg.n_steps, cfg.horizon, cfg.trials, cfg.master_seed, cfg.stream("tail"))?;
    let band = cfg.abs_band.unwrap_or(0.3);
    for j in cfg.orders() {
        let xs: Vec<f64> = vols.iter().map(|v| v[j]).filter(|x| *x > 0.0).collect();
        let k = cfg.hill_k(xs.len());
        let h = hill_tail_index(&xs, k)?;
        let (_, spread) = hill_stability(&xs, k)?;
        let mut params = base_params(cfg);
        params.insert("n".into(), json!(cfg.n_steps));
        params.insert("k".into(), json!(k));
        params.insert("hill_spread".into(), json!(spread));
        let e = EstimateResult {
            mean: h,
            stderr: h / (k as f64).sqrt(),
            trials: xs.len(),
            seed: cfg.master_seed,
            target: None,
            z_score: None,
        };
        let (e, v) = if cfg.spec.alpha < 2.0 {
            let e = e.with_target(ClosedFormTarget::new("tail_index", &[("alpha", cfg.spec.alpha)], cfg.spec.alpha, "1"));
            let v = Verdict::from_bool((h - cfg.spec.alpha).abs() <= band);
            (e, v)
        } else {
            (e, Verdict::Info)
        };
        if spread > 0.2 {
            out.notes.push(format!("j={j}: Hill estimates spread {spread:.3} across k, no stable tail index"));
        }
        out.rows.push(ResultRow::new(&name, params, Some(j), e, v));
    }
    Ok(out)
}
