use levyhull::hull::{hull_of_coords, intrinsic_volumes};
use levyhull::rng::map_trials;
use levyhull::stable::{sample_cpp_path, sample_walk_path, Flavor, StableSpec};
use levyhull::stats::ks_two_sample;

const TRIALS: usize = 10_000;

fn specs() -> Vec<StableSpec> {
    vec![
        StableSpec::brownian(2),
        StableSpec::isotropic(1.5, 1.0, 2).unwrap(),
        StableSpec::isotropic(0.7, 2.0, 3).unwrap(),
    ]
}

fn v1(spec: &StableSpec, n: usize, horizon: f64, seed: u64, stream: u64) -> Vec<f64> {
    map_trials(seed, stream, TRIALS, |_, rng| {
        let p = sample_walk_path(spec, n, horizon, rng).unwrap();
        intrinsic_volumes(&hull_of_coords(spec.d, &p.coords).unwrap()).unwrap().get(1)
    })
}

#[test]
fn scaling_law_on_hull_width() {
    for spec in specs() {
        let lambda: f64 = 3.0;
        let base: Vec<f64> = v1(&spec, 50, 1.0, 1, 10).into_iter().map(|x| x * lambda.powf(1.0 / spec.alpha)).collect();
        let direct = v1(&spec, 50, lambda, 1, 11);
        let (d, p) = ks_two_sample(&base, &direct).unwrap();
        assert!(p > 0.01, "alpha={} ks={d} p={p}", spec.alpha);
    }
}

#[test]
fn paths_are_symmetric() {
    let heavy = StableSpec::new(
        1.5,
        1.0,
        2,
        Flavor::CompoundPoissonHeavy {
            tail_alpha: 1.5,
            jump_rate: 2.0,
            drift: vec![0.0, 0.0],
        },
    )
    .unwrap();
    let u = [0.6, -0.8];
    for spec in specs().into_iter().chain([heavy]) {
        let xs: Vec<f64> = map_trials(2, 20, TRIALS, |_, rng| {
            let p = if spec.flavor.is_compound_poisson() {
                sample_cpp_path(&spec, 1.0, rng).unwrap()
            } else {
                sample_walk_path(&spec, 10, 1.0, rng).unwrap()
            };
            let e = p.endpoint();
            e[0] * u[0] + e[1] * u[1]
        });
        let (half_a, half_b) = xs.split_at(TRIALS / 2);
        let neg: Vec<f64> = half_b.iter().map(|x| -x).collect();
        let (d, p) = ks_two_sample(half_a, &neg).unwrap();
        assert!(p > 0.01, "{:?}: ks={d} p={p}", spec.flavor);
    }
}

#[test]
fn endpoint_characteristic_function_at_five_vectors() {
    for spec in specs() {
        let d = spec.d;
        let ends: Vec<Vec<f64>> = map_trials(3, 30, 40_000, |_, rng| sample_walk_path(&spec, 20, 1.0, rng).unwrap().endpoint().to_vec());
        let us: [[f64; 3]; 5] = [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.7, -0.7, 0.0], [-1.2, 0.4, 0.3], [0.2, 0.3, -0.9]];
        for u in us {
            let norm = u[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
            let want = (-spec.c * norm.powf(spec.alpha)).exp();
            let vals: Vec<f64> = ends.iter().map(|x| x.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().cos()).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            let se = (var / vals.len() as f64).sqrt();
            assert!((m - want).abs() < 3.0 * se + 1e-3, "alpha={} u={u:?}: {m} vs {want} (se {se})", spec.alpha);
        }
    }
}
