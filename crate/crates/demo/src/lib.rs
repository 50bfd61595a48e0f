//! Browser demo: sample a walk hull, estimate expected intrinsic volumes and
//! tabulate the expected number of faces through the origin.

use levyhull::closed_form::{expected_faces_asymptotic, expected_faces_yn};
use levyhull::experiments::{limit_target, walk_hull_volumes};
use levyhull::hull::{hull_of_coords, intrinsic_volumes};
use levyhull::rng::{stream_id, trial_rng};
use levyhull::stable::{IsotropicSampler, StableSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Trials cap for the in-browser estimate.
pub const MAX_TRIALS: usize = 20_000;
pub const MAX_STEPS: usize = 100_000;

fn spec_for(alpha: f64) -> Result<StableSpec, String> {
    if alpha == 2.0 {
        Ok(StableSpec::brownian(2))
    } else {
        StableSpec::isotropic(alpha, 1.0, 2).map_err(|e| e.to_string())
    }
}

/// Planar walk of `n` steps on `[0, 1]` with its hull and intrinsic volumes.
pub fn sample_hull_json(alpha: f64, n: usize, seed: u64) -> Result<String, String> {
    if n == 0 || n > MAX_STEPS {
        return Err(format!("steps must lie in 1..={MAX_STEPS}"));
    }
    let spec = spec_for(alpha)?;
    let sampler = IsotropicSampler::new(&spec).map_err(|e| e.to_string())?;
    let mut rng = trial_rng(seed, stream_id("demo/hull"), 0);
    let mut coords = Vec::new();
    sampler.walk_coords(n, 1.0, &mut rng, &mut coords);
    let p = hull_of_coords(2, &coords).map_err(|e| e.to_string())?;
    let iv = intrinsic_volumes(&p).map_err(|e| e.to_string())?;
    Ok(json!({
        "path": coords,
        "hull": p.vertices,
        "volumes": iv.values,
    })
    .to_string())
}

/// Monte Carlo `E V_1`, `E V_2` against the closed forms.
pub fn estimate_volumes_json(alpha: f64, n: usize, trials: usize, seed: u64) -> Result<String, String> {
    if trials < 2 || trials > MAX_TRIALS || n == 0 || n > MAX_STEPS {
        return Err(format!("need 2 <= trials <= {MAX_TRIALS} and 1 <= steps <= {MAX_STEPS}"));
    }
    let spec = spec_for(alpha)?;
    let (vols, _) = walk_hull_volumes(&spec, n, 1.0, trials, seed, stream_id("demo/estimate")).map_err(|e| e.to_string())?;
    let rows: Vec<_> = (1..=2)
        .map(|j| {
            let xs: Vec<f64> = vols.iter().map(|v| v[j]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            let target = limit_target(&spec, j, 1.0).map(|t| t.value).unwrap_or(f64::NAN);
            json!({"j": j, "mean": mean, "stderr": (var / xs.len() as f64).sqrt(), "target": target})
        })
        .collect();
    Ok(json!(rows).to_string())
}

/// `E Y_n` and its asymptotic form for `n = 1..=n_max` on a log grid.
pub fn faces_curve_json(n_max: usize) -> Result<String, String> {
    if !(2..=1_000_000).contains(&n_max) {
        return Err("n_max must lie in 2..=1000000".into());
    }
    let mut rows = Vec::new();
    let mut n = 1usize;
    while n <= n_max {
        let exact = expected_faces_yn(n, 2).map_err(|e| e.to_string())?;
        rows.push(json!({"n": n, "exact": exact, "asymptotic": expected_faces_asymptotic(n, 2)}));
        n = ((n as f64) * 1.5).ceil() as usize;
    }
    Ok(json!(rows).to_string())
}

#[wasm_bindgen]
pub fn sample_hull(alpha: f64, n: usize, seed: u32) -> Result<String, JsValue> {
    sample_hull_json(alpha, n, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn estimate_volumes(alpha: f64, n: usize, trials: usize, seed: u32) -> Result<String, JsValue> {
    estimate_volumes_json(alpha, n, trials, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn faces_curve(n_max: usize) -> Result<String, JsValue> {
    faces_curve_json(n_max).map_err(|e| JsValue::from_str(&e))
}
