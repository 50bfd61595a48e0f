//! Analytic expectations and constants used as Monte Carlo targets.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Error, Result};

/// A named analytic value attached to an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTarget {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    /// `"length^j"` or `"dimensionless"`.
    pub units: String,
}

impl ClosedFormTarget {
    pub fn new(name: &str, params: &[(&str, f64)], value: f64, units: impl Into<String>) -> Self {
        ClosedFormTarget {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            units: units.into(),
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos evaluation (g = 7, 9 terms) with reflection below 1/2.
pub(crate) fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    Ok(gamma(x))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Volume of the unit ball in `R^d`.
pub fn kappa(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

/// `V_j(r B^d) = C(d,j) κ_d / κ_{d-j} r^j`.
pub fn ball_vj(d: usize, j: usize, r: f64) -> Result<f64> {
    if j > d {
        return Err(param(format!("order j = {j} exceeds dimension d = {d}")));
    }
    if r < 0.0 {
        return Err(param(format!("radius r = {r} must be non-negative")));
    }
    Ok(binomial(d, j) * kappa(d) / kappa(d - j) * r.powi(j as i32))
}

/// `Γ(1-1/α)^j Γ(1/α)^j / (π^j Γ(j/α+1))`.
fn stable_constant(alpha: f64, j: usize) -> f64 {
    let jf = j as f64;
    (gamma(1.0 - 1.0 / alpha) * gamma(1.0 / alpha) / PI).powf(jf) / gamma(jf / alpha + 1.0)
}

fn check_alpha_gt1(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain(format!("formula requires alpha in (1, 2], got {alpha}")));
    }
    Ok(())
}

/// Expected `V_j` of the hull of a symmetric α-stable process on `[0,1]`,
/// given `V_j` of its associated zonoid.
pub fn ev_intrinsic_stable(alpha: f64, j: usize, vj_k: f64) -> Result<f64> {
    check_alpha_gt1(alpha)?;
    if j == 0 {
        return Err(param("order j must be at least 1"));
    }
    if vj_k < 0.0 {
        return Err(param(format!("V_j(K) = {vj_k} must be non-negative")));
    }
    Ok(stable_constant(alpha, j) * vj_k)
}

/// Expected `V_j` of the hull of standard Brownian motion on `[0,1]` in `R^d`.
pub fn ev_intrinsic_brownian(d: usize, j: usize) -> Result<f64> {
    if j == 0 || j > d {
        return Err(param(format!("order j = {j} must lie in 1..={d}")));
    }
    let (df, jf) = (d as f64, j as f64);
    Ok(binomial(d, j) * (PI / 2.0).powf(jf / 2.0) * gamma((df - jf) / 2.0 + 1.0)
        / (gamma(jf / 2.0 + 1.0) * gamma(df / 2.0 + 1.0)))
}

/// Expected `V_j` for the isotropic process with `E exp(i<X(1),u>) = exp(-c|u|^α)`,
/// whose associated zonoid is `c^{1/α} B^d`.
pub fn ev_intrinsic_isotropic(alpha: f64, c: f64, d: usize, j: usize) -> Result<f64> {
    check_alpha_gt1(alpha)?;
    if !(c >= 0.0) {
        return Err(param(format!("scale c = {c} must be non-negative")));
    }
    ev_intrinsic_stable(alpha, j, ball_vj(d, j, c.powf(1.0 / alpha))?)
}

/// `Γ(1/α)^j / Γ(j/α + 1)`, the limit of [`lattice_sum_partial`].
pub fn dirichlet_constant(alpha: f64, j: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) || j == 0 {
        return Err(param(format!("need alpha in (0,2] and j >= 1, got ({alpha}, {j})")));
    }
    let jf = j as f64;
    Ok(gamma(1.0 / alpha).powf(jf) / gamma(jf / alpha + 1.0))
}

pub const LATTICE_MAX_J: usize = 3;
/// Cap for `j = 3`, whose evaluation is quadratic in `n`.
pub const LATTICE_MAX_N: usize = 2000;
/// Cap for `j ≤ 2`, evaluated in linear time.
pub const LATTICE_MAX_N_LINEAR: usize = 10_000_000;

/// `n^{-j/α} Σ_{i_1+…+i_j ≤ n, i_k ≥ 1} (i_1⋯i_j)^{1/α-1}`, by enumeration
/// with prefix sums.
pub fn lattice_sum_partial(alpha: f64, j: usize, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(param(format!("alpha = {alpha} outside (0, 2]")));
    }
    if j == 0 || j > LATTICE_MAX_J {
        return Err(param(format!("order j = {j} must lie in 1..={LATTICE_MAX_J}")));
    }
    let cap = if j == 3 { LATTICE_MAX_N } else { LATTICE_MAX_N_LINEAR };
    if n == 0 || n > cap {
        return Err(Error::Resource(format!("n = {n} must lie in 1..={cap} for j = {j}")));
    }
    let beta = 1.0 / alpha - 1.0;
    // w[i] = i^beta, prefix[m] = sum_{i<=m} w[i]
    let w: Vec<f64> = (0..=n).map(|i| if i == 0 { 0.0 } else { (i as f64).powf(beta) }).collect();
    let mut prefix = vec![0.0; n + 1];
    for i in 1..=n {
        prefix[i] = prefix[i - 1] + w[i];
    }
    let sum = match j {
        1 => prefix[n],
        2 => (1..=n).map(|i| w[i] * prefix[n - i]).sum(),
        _ => {
            // pair[m] = sum_{a+b <= m} w[a] w[b]
            let pair: Vec<f64> = (0..=n)
                .map(|m| (1..=m).map(|a| w[a] * prefix[m - a]).sum())
                .collect();
            (1..=n).map(|i| w[i] * pair[n - i]).sum()
        }
    };
    Ok(sum * (n as f64).powf(-(j as f64) / alpha))
}

/// Exact `E V_j(C_n)` for the walk `S_i = X(i/n)` embedded in a symmetric
/// α-stable process whose associated zonoid has `V_j(K) = vj_k`.
pub fn vysotsky_ev(n: usize, j: usize, alpha: f64, vj_k: f64) -> Result<f64> {
    check_alpha_gt1(alpha)?;
    if vj_k < 0.0 {
        return Err(param(format!("V_j(K) = {vj_k} must be non-negative")));
    }
    let zonoid_factor = (gamma(1.0 - 1.0 / alpha) / PI).powi(j as i32);
    Ok(vj_k * zonoid_factor * lattice_sum_partial(alpha, j, n)?)
}

/// `(2m-1)!!/(2m)!!` for m = 0..=n, built as running products of ratios.
fn double_factorial_ratios(n: usize) -> Vec<f64> {
    let mut r = vec![1.0; n + 1];
    for m in 1..=n {
        r[m] = r[m - 1] * (2 * m - 1) as f64 / (2 * m) as f64;
    }
    r
}

/// Expected number of faces of `C_n` containing the origin, for a symmetric
/// walk in general position in `R^d` (`d ∈ {2,3}`).
pub fn expected_faces_yn(n: usize, d: usize) -> Result<f64> {
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    let ratio = double_factorial_ratios(n);
    match d {
        2 => Ok(2.0 * (1..=n).map(|i| ratio[n - i] / i as f64).sum::<f64>()),
        3 => {
            // inner[i3] = sum_{i2 < i3} 1 / (i2 (i3 - i2))
            let mut total = 0.0;
            for i3 in 2..=n {
                let inner: f64 = (1..i3).map(|i2| 1.0 / (i2 as f64 * (i3 - i2) as f64)).sum();
                total += ratio[n - i3] * inner;
            }
            Ok(2.0 * total)
        }
        _ => Err(param(format!("expected_faces_yn supports d in {{2,3}}, got {d}"))),
    }
}

/// Leading asymptotic `2 (log n)^{d-1} / sqrt(π n)` of [`expected_faces_yn`].
pub fn expected_faces_asymptotic(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    2.0 * nf.ln().powi(d as i32 - 1) / (PI * nf).sqrt()
}

/// `E (sup_{t≤1} sqrt(2) W(t))^p = 2^p Γ((p+1)/2) / sqrt(π)`.
pub fn ev_sup_brownian_p(p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain(format!("p = {p} must be a finite value >= 1")));
    }
    Ok(2f64.powf(p) / PI.sqrt() * gamma((p + 1.0) / 2.0))
}

/// Target of `E V_p(B^d, Z)` for standard Brownian motion:
/// `2^{p/2} Γ((p+1)/2) / sqrt(π) · κ_d`.
pub fn ev_lp_brownian_ball(p: f64, d: usize) -> Result<f64> {
    ev_sup_brownian_p(p)?;
    Ok(2f64.powf(p / 2.0) / PI.sqrt() * gamma((p + 1.0) / 2.0) * kappa(d))
}

/// `E V_j(Z_s) = s^{j/α} E V_j(Z)`.
pub fn horizon_factor(s: f64, j: usize, alpha: f64) -> f64 {
    s.powf(j as f64 / alpha)
}

pub fn factorial_f64(n: usize) -> f64 {
    factorial(n)
}
