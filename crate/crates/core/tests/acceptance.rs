//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p levyhull --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use levyhull::closed_form::{dirichlet_constant, ev_intrinsic_brownian, ev_intrinsic_isotropic, ev_lp_brownian_ball, expected_faces_yn, lattice_sum_partial};
use levyhull::experiments::{run_experiment, run_gram_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, GramDist, ResultRow};
use levyhull::hull::{hull2d, hull3d, intrinsic_volumes, polygon_area, zonotope_intrinsic_volume};
use levyhull::limits::{exit_value_tail_experiment, renewal_gaps, renewal_with, RenewalOptions};
use levyhull::lp::{lp_estimates_agree, verify_lp_brownian, verify_lp_stable_consistency};
use levyhull::report::{run_all_with, smoke_suite, RunOptions};
use levyhull::rng::{stream_id, trial_rng};
use levyhull::stable::{Flavor, StableSpec};
use rand::Rng;

const SEED: u64 = 20_240_601;
const SIGMA: f64 = 4.0;
const TREND_SIGMA: f64 = 3.0;
const RATIO_SIGMA: f64 = 3.0;
const REL_BROWNIAN: f64 = 0.02;
const REL_STABLE: f64 = 0.03;
const REL_LP: f64 = 0.02;
const LP_STABLE_BAND: f64 = 0.03;
const ZONOTOPE_REL: f64 = 1e-9;
const LATTICE_REL: f64 = 0.02;
const INTERIOR_FLOOR: f64 = 0.85;
const RENEWAL_REL: f64 = 0.05;
const HILL_HULL: (f64, f64) = (1.2, 1.8);
const HILL_EXIT: (f64, f64) = (1.3, 1.7);
const STEINER_REL: f64 = 1e-6;
const EXACT_ABS: f64 = 1e-12;

type Outcome = (bool, String);

fn within(mean: f64, se: f64, target: f64, sigma: f64, rel: f64) -> bool {
    (mean - target).abs() <= (sigma * se).max(rel * target.abs())
}

fn row<'a>(out: &'a ExperimentOutput, j: Option<usize>, key: &str, value: serde_json::Value) -> &'a ResultRow {
    out.rows
        .iter()
        .find(|r| r.j == j && r.params.get(key) == Some(&value))
        .unwrap_or_else(|| panic!("no row j={j:?} {key}={value}"))
}

fn brownian_iv() -> ExperimentOutput {
    let mut c = ExperimentConfig::new(ExperimentKind::IntrinsicVolumes, StableSpec::brownian(2));
    c.trials = 10_000;
    c.n_steps = 10_000;
    c.master_seed = SEED;
    run_experiment(&c).expect("brownian run")
}

fn limit_check(out: &ExperimentOutput, j: usize, target: f64, rel: f64) -> Outcome {
    let r = row(out, Some(j), "target_kind", "limit".into());
    let e = &r.estimate;
    let finite = row(out, Some(j), "target_kind", "finite_n".into());
    (
        within(e.mean, e.stderr, target, SIGMA, rel),
        format!(
            "mean={:.5} stderr={:.5} target={target:.5} rel={:.4} (exact finite-n {:.5}, z={:.2})",
            e.mean,
            e.stderr,
            (e.mean - target) / target,
            finite.estimate.target_value().unwrap_or(f64::NAN),
            finite.estimate.z_score.unwrap_or(f64::NAN)
        ),
    )
}

fn c3_isotropic() -> Outcome {
    let spec = StableSpec::isotropic(1.5, 1.0, 2).unwrap();
    let mut c = ExperimentConfig::new(ExperimentKind::IntrinsicVolumes, spec);
    c.trials = 10_000;
    c.n_steps = 10_000;
    c.master_seed = SEED;
    let out = run_experiment(&c).expect("isotropic run");
    let mut ok = true;
    let mut detail = Vec::new();
    for j in 1..=2 {
        let t = ev_intrinsic_isotropic(1.5, 1.0, 2, j).unwrap();
        let (pass, d) = limit_check(&out, j, t, REL_STABLE);
        ok &= pass;
        detail.push(format!("j={j}: {d}"));
    }
    (ok, detail.join("; "))
}

fn c4_scaling() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (alpha, j) in [(2.0, 1), (2.0, 2), (1.5, 1)] {
        let spec = if alpha == 2.0 { StableSpec::brownian(2) } else { StableSpec::isotropic(alpha, 1.0, 2).unwrap() };
        let mut c = ExperimentConfig::new(ExperimentKind::ScalingRatio, spec);
        c.trials = 10_000;
        c.n_steps = 1000;
        c.horizons = vec![1.0, 4.0];
        c.j_orders = vec![j];
        c.master_seed = SEED;
        let out = run_experiment(&c).expect("scaling run");
        let e = &out.rows[0].estimate;
        let want = 4f64.powf(j as f64 / alpha);
        let pass = (e.mean - want).abs() <= RATIO_SIGMA * e.stderr;
        ok &= pass;
        detail.push(format!("(α={alpha},j={j}) ratio={:.4}±{:.4} vs {want:.4}", e.mean, e.stderr));
    }
    (ok, detail.join("; "))
}

fn c5_gram() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut spot = String::new();
    for d in 1..=4 {
        for j in 1..=d {
            let e = run_gram_experiment(d, j, GramDist::StandardGaussian, 1_000_000, SEED + (10 * d + j) as u64).unwrap();
            let z = e.z_score.unwrap();
            worst = worst.max(z.abs());
            ok &= z.abs() <= SIGMA;
            if (d, j) == (2, 1) {
                let t = e.target_value().unwrap();
                ok &= (t - (PI / 2.0).sqrt()).abs() < EXACT_ABS;
                spot = format!("d=2,j=1 mean={:.5} target={t:.5}", e.mean);
            }
        }
    }
    (ok, format!("max |z| = {worst:.2} over 10 (d,j); {spot}"))
}

fn c6_zonotope() -> Outcome {
    let mut rng = trial_rng(SEED, stream_id("acceptance/zonotope"), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(1..=8);
        let gens: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let mut pts = Vec::with_capacity(1 << m);
        for mask in 0u32..(1 << m) {
            let mut p = [0.0; 2];
            for (k, g) in gens.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    p[0] += g[0];
                    p[1] += g[1];
                }
            }
            pts.push(p);
        }
        let iv = intrinsic_volumes(&hull2d(&pts).unwrap()).unwrap();
        for j in 1..=2 {
            let z = zonotope_intrinsic_volume(&gens, j).unwrap();
            let h = iv.get(j);
            worst = worst.max((z - h).abs() / h.abs().max(f64::MIN_POSITIVE));
        }
    }
    (worst < ZONOTOPE_REL, format!("max relative difference {worst:.2e} over 20 sets"))
}

fn c7_lattice() -> Outcome {
    let mut ok = (dirichlet_constant(2.0, 2).unwrap() - PI).abs() < EXACT_ABS;
    let mut detail = Vec::new();
    for (a, j) in [(2.0, 1), (2.0, 2), (1.5, 1), (1.5, 2)] {
        let l = lattice_sum_partial(a, j, 2000).unwrap();
        let c = dirichlet_constant(a, j).unwrap();
        let rel = (l - c).abs() / c;
        ok &= rel < LATTICE_REL;
        detail.push(format!("(α={a},j={j}) {l:.5} vs {c:.5} rel={rel:.4}"));
    }
    (ok, detail.join("; "))
}

fn c8_boundary() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::BoundaryOrigin, StableSpec::brownian(2));
    c.trials = 10_000;
    c.n_values = vec![100, 1000, 10_000];
    c.master_seed = SEED;
    let out = run_experiment(&c).expect("boundary run");
    let mut ok = true;
    let mut freqs = Vec::new();
    for &n in &c.n_values {
        let e = &row(&out, None, "n", n.into()).estimate;
        ok &= e.mean <= expected_faces_yn(n, 2).unwrap() + SIGMA * e.stderr;
        freqs.push((e.mean, e.stderr));
    }
    for w in freqs.windows(2) {
        let se = (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt();
        ok &= w[0].0 - w[1].0 > TREND_SIGMA * se;
    }
    let shown: Vec<String> = freqs.iter().zip(&c.n_values).map(|((m, s), n)| format!("n={n}: {m:.4}±{s:.4} (E Y_n {:.4})", expected_faces_yn(*n, 2).unwrap())).collect();
    (ok, shown.join("; "))
}

fn c9_interior() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::InteriorEndpoint, StableSpec::brownian(2));
    c.trials = 10_000;
    c.n_values = vec![100, 10_000];
    c.master_seed = SEED;
    let out = run_experiment(&c).expect("interior run");
    let a = &row(&out, None, "n", 100.into()).estimate;
    let b = &row(&out, None, "n", 10_000.into()).estimate;
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    let ok = b.mean - a.mean > TREND_SIGMA * se && b.mean > INTERIOR_FLOOR;
    (ok, format!("n=100: {:.4}±{:.4}, n=10^4: {:.4}±{:.4}", a.mean, a.stderr, b.mean, b.stderr))
}

fn c10_lp_brownian() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [1.0, 2.0] {
        let e = verify_lp_brownian(p, 2, 10_000, 10_000, SEED).unwrap();
        let t = ev_lp_brownian_ball(p, 2).unwrap();
        if p == 2.0 {
            ok &= (t - PI).abs() < EXACT_ABS;
        }
        ok &= within(e.mean, e.stderr, t, SIGMA, REL_LP);
        detail.push(format!("p={p}: {:.5}±{:.5} vs {t:.5}", e.mean, e.stderr));
    }
    (ok, detail.join("; "))
}

fn c11_lp_stable() -> Outcome {
    let (hull, sup) = verify_lp_stable_consistency(1.5, 1.0, 1.0, 2, 2000, 10_000, 2000, SEED).unwrap();
    (
        lp_estimates_agree(&hull, &sup, SIGMA, LP_STABLE_BAND),
        format!("hull {:.5}±{:.5}, sup {:.5}±{:.5}", hull.mean, hull.stderr, sup.mean, sup.stderr),
    )
}

fn c12_renewal() -> Outcome {
    let ts = [10.0, 100.0, 1000.0];
    let opts = RenewalOptions { dt: 0.01, batch_trials: 100_000 };
    let (est, t1) = renewal_with(&StableSpec::brownian(2), &ts, 1000, SEED, opts, stream_id("acceptance/renewal")).unwrap();
    let target_se = t1.stderr() / (t1.mean() * t1.mean());
    let (gaps, ses) = renewal_gaps(&est, target_se);
    let last = gaps[2].abs();
    let decreasing = gaps.windows(2).zip(ses.windows(2)).all(|(g, s)| g[1].abs() <= g[0].abs() + TREND_SIGMA * (s[0] * s[0] + s[1] * s[1]).sqrt())
        && gaps[2].abs() < gaps[0].abs();
    (
        last < RENEWAL_REL && decreasing,
        format!("1/E T_1 = {:.5}; relative gaps {:.5?} ± {:.5?}", 1.0 / t1.mean(), gaps, ses),
    )
}

fn c13_tails() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::TailIndex, StableSpec::isotropic(1.5, 1.0, 2).unwrap());
    c.trials = 100_000;
    c.n_steps = 200;
    c.j_orders = vec![1];
    c.master_seed = SEED;
    let out = run_experiment(&c).expect("tail run");
    let h1 = out.rows[0].estimate.mean;
    let heavy = StableSpec::new(
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
    let h2 = exit_value_tail_experiment(&heavy, 100_000, SEED).unwrap();
    let ok = (HILL_HULL.0..=HILL_HULL.1).contains(&h1) && (HILL_EXIT.0..=HILL_EXIT.1).contains(&h2);
    (ok, format!("Hill V_1(Z) = {h1:.4}, Hill |X(T_1)| = {h2:.4}"))
}

fn c14_determinism() -> Outcome {
    let mut configs = smoke_suite(SEED);
    let mut lp = ExperimentConfig::new(ExperimentKind::LpStableConsistency, StableSpec::isotropic(1.5, 1.0, 2).unwrap());
    lp.trials = 200;
    lp.n_steps = 300;
    lp.quad_points = 256;
    lp.master_seed = SEED;
    configs.push(lp);
    let mut bytes = Vec::new();
    for threads in [1, 8] {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            threads: Some(threads),
            dump_polytopes: false,
        };
        run_all_with(&configs, dir.path(), &opts).unwrap();
        bytes.push(std::fs::read(dir.path().join("results.csv")).unwrap());
    }
    (bytes[0] == bytes[1], format!("results.csv {} bytes, identical = {}", bytes[0].len(), bytes[0] == bytes[1]))
}

fn c15_exact_geometry() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let cube: Vec<[f64; 3]> = (0..8).map(|i| [(i & 1) as f64, (i >> 1 & 1) as f64, (i >> 2 & 1) as f64]).collect();
    let v = intrinsic_volumes(&hull3d(&cube).unwrap()).unwrap().values;
    ok &= v.iter().zip([1.0, 3.0, 3.0, 1.0]).all(|(a, b)| (a - b).abs() < EXACT_ABS);
    let sq = intrinsic_volumes(&hull2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()).unwrap().values;
    ok &= sq.iter().zip([1.0, 2.0, 1.0]).all(|(a, b)| (a - b).abs() < EXACT_ABS);
    let tet = intrinsic_volumes(&hull3d(&[[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]).unwrap()).unwrap().values;
    // regular tetrahedron with edge 2√2
    let e = 2.0 * 2f64.sqrt();
    let want = [1.0, 3.0 * e * (-1.0f64 / 3.0).acos() / PI, 3f64.sqrt() * e * e / 2.0, e.powi(3) / (6.0 * 2f64.sqrt())];
    ok &= tet.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12 * b.max(1.0));
    // Steiner polynomial against the area of a densely sampled offset body
    let poly = [[0.0, 0.0], [3.0, 0.2], [2.5, 2.0], [0.7, 2.6], [-0.5, 1.1]];
    let p = hull2d(&poly).unwrap();
    let iv = intrinsic_volumes(&p).unwrap();
    let r = 0.7;
    let k = 20_000;
    let mut pts = Vec::with_capacity(poly.len() * k);
    for q in &poly {
        for i in 0..k {
            let t = 2.0 * PI * i as f64 / k as f64;
            pts.push([q[0] + r * t.cos(), q[1] + r * t.sin()]);
        }
    }
    let dense = polygon_area(&hull2d(&pts).unwrap().vertices);
    let steiner = iv.steiner_volume(r);
    let rel = (dense - steiner).abs() / steiner;
    ok &= rel < STEINER_REL;
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 1.0;
    (ok, format!("tetrahedron {tet:.6?}; Steiner rel diff {rel:.2e}; {elapsed:.3}s"))
}

fn main() {
    let t0 = Instant::now();
    let iv = brownian_iv();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("Brownian E V_2 (d=2)", Box::new(|| limit_check(&iv, 2, ev_intrinsic_brownian(2, 2).unwrap(), REL_BROWNIAN))),
        ("Brownian E V_1 (d=2)", Box::new(|| limit_check(&iv, 1, ev_intrinsic_brownian(2, 1).unwrap(), REL_BROWNIAN))),
        ("isotropic stable E V_1, E V_2", Box::new(c3_isotropic)),
        ("self-similarity ratios", Box::new(c4_scaling)),
        ("Gram determinant", Box::new(c5_gram)),
        ("zonotope formula", Box::new(c6_zonotope)),
        ("lattice-sum limit", Box::new(c7_lattice)),
        ("boundary frequency", Box::new(c8_boundary)),
        ("interior endpoint", Box::new(c9_interior)),
        ("L_p Brownian", Box::new(c10_lp_brownian)),
        ("L_p stable consistency", Box::new(c11_lp_stable)),
        ("renewal limit", Box::new(c12_renewal)),
        ("tail-index probes", Box::new(c13_tails)),
        ("determinism across threads", Box::new(c14_determinism)),
        ("exact-geometry suite", Box::new(c15_exact_geometry)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed in {:.0}s", criteria.len() - failed, criteria.len(), t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
