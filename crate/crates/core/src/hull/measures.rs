use rand::Rng;

use super::planar::{monotone_chain, polygon_area, polygon_perimeter};
use super::{dist, IntrinsicVolumes, Polytope};
use crate::error::{param, Error, Result};
use crate::stable::unit_direction;
use crate::stats::{EstimateResult, Moments};

/// Largest generator count accepted by [`zonotope_intrinsic_volume`].
pub const ZONOTOPE_MAX_GENERATORS: usize = 25;

/// `(1, perimeter/2, area)` for a planar hull.
pub fn intrinsic_volumes_2d(p: &Polytope) -> Result<IntrinsicVolumes> {
    if p.dim != 2 {
        return Err(Error::Dimension(format!("intrinsic_volumes_2d got a {}-dimensional polytope", p.dim)));
    }
    Ok(IntrinsicVolumes {
        values: vec![1.0, 0.5 * polygon_perimeter(&p.vertices), polygon_area(&p.vertices)],
    })
}

/// `(1, V_1, V_2, V_3)` of a full-dimensional spatial hull.
pub fn intrinsic_volumes_3d(p: &Polytope) -> Result<IntrinsicVolumes> {
    if p.dim != 3 {
        return Err(Error::Dimension(format!("intrinsic_volumes_3d got a {}-dimensional polytope", p.dim)));
    }
    if !p.is_full_dimensional() || p.facets.is_empty() {
        return Err(Error::Dimension("intrinsic_volumes_3d needs a full-dimensional mesh".into()));
    }
    let mut volume = 0.0;
    let mut surface = 0.0;
    // each undirected edge is met twice; the first visit stores its facet normal
    let mut pending: std::collections::BTreeMap<(usize, usize), [f64; 3]> = Default::default();
    let mut edge_sum = 0.0;
    for f in &p.facets {
        let [a, b, c] = f.indices.map(|i| &p.vertices[i]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cr = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let area = 0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
        surface += area;
        volume += area * f.offset / 3.0;
        for k in 0..3 {
            let (i, j) = (f.indices[k], f.indices[(k + 1) % 3]);
            let key = (i.min(j), i.max(j));
            match pending.remove(&key) {
                Some(n) => {
                    let cos = (n[0] * f.normal[0] + n[1] * f.normal[1] + n[2] * f.normal[2]).clamp(-1.0, 1.0);
                    edge_sum += dist(&p.vertices[i], &p.vertices[j]) * cos.acos();
                }
                None => {
                    pending.insert(key, f.normal);
                }
            }
        }
    }
    if !pending.is_empty() {
        return Err(Error::Dimension("facet mesh is not closed".into()));
    }
    Ok(IntrinsicVolumes {
        values: vec![
            1.0,
            edge_sum / (2.0 * std::f64::consts::PI),
            0.5 * surface,
            volume.max(0.0),
        ],
    })
}

fn flat_polygon_area(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = &vertices[0];
    let mut acc = [0.0; 3];
    for i in 1..n - 1 {
        let a: Vec<f64> = (0..3).map(|k| vertices[i][k] - o[k]).collect();
        let b: Vec<f64> = (0..3).map(|k| vertices[i + 1][k] - o[k]).collect();
        acc[0] += a[1] * b[2] - a[2] * b[1];
        acc[1] += a[2] * b[0] - a[0] * b[2];
        acc[2] += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt()
}

fn flat_perimeter(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|i| dist(&vertices[i], &vertices[(i + 1) % n])).sum()
}

/// Intrinsic volumes of any hull returned by this module, including
/// lower-dimensional spatial ones (higher orders are then 0).
pub fn intrinsic_volumes(p: &Polytope) -> Result<IntrinsicVolumes> {
    match p.dim {
        2 => intrinsic_volumes_2d(p),
        3 if p.is_full_dimensional() => intrinsic_volumes_3d(p),
        3 => Ok(IntrinsicVolumes {
            values: vec![
                1.0,
                0.5 * flat_perimeter(&p.vertices),
                flat_polygon_area(&p.vertices),
                0.0,
            ],
        }),
        d => Err(Error::Dimension(format!("no intrinsic volumes for d = {d}"))),
    }
}

/// `sqrt(det MᵀM)` for the matrix with the given columns, via modified
/// Gram–Schmidt.
pub fn gram_det(vectors: &[Vec<f64>]) -> Result<f64> {
    let j = vectors.len();
    if j == 0 {
        return Err(param("gram_det needs at least one vector"));
    }
    let d = vectors[0].len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(param("gram_det vectors have different lengths"));
    }
    if j > d {
        return Err(param(format!("gram_det got j = {j} vectors in R^{d}")));
    }
    let mut q: Vec<Vec<f64>> = vectors.to_vec();
    let mut det = 1.0;
    for i in 0..j {
        let r = q[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return Ok(0.0);
        }
        det *= r;
        let (head, tail) = q.split_at_mut(i + 1);
        let qi = &mut head[i];
        qi.iter_mut().for_each(|x| *x /= r);
        for w in tail.iter_mut() {
            let c: f64 = qi.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(qi.iter()).for_each(|(x, a)| *x -= c * a);
        }
    }
    Ok(det.max(0.0))
}

fn canonical_generators(generators: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = generators
        .iter()
        .map(|v| {
            let flip = v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0);
            let sign = if flip { -1.0 } else { 1.0 };
            // `+ 0.0` turns -0.0 into 0.0 so that the sort below is canonical
            v.iter().map(|x| sign * x + 0.0).collect()
        })
        .collect();
    g.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    g
}

/// `V_j` of the zonotope `Σ_k [0, u_k]` as the sum of `D_j` over all
/// `j`-subsets of generators.
pub fn zonotope_intrinsic_volume(generators: &[Vec<f64>], j: usize) -> Result<f64> {
    let m = generators.len();
    if m > ZONOTOPE_MAX_GENERATORS {
        return Err(Error::Resource(format!(
            "zonotope with {m} generators exceeds the cap of {ZONOTOPE_MAX_GENERATORS}"
        )));
    }
    let d = generators.first().map_or(0, |g| g.len());
    if j == 0 || j > d {
        return Err(param(format!("zonotope order j = {j} outside 1..={d}")));
    }
    if generators.iter().any(|g| g.len() != d) {
        return Err(param("zonotope generators have different lengths"));
    }
    if m < j {
        return Ok(0.0);
    }
    let g = canonical_generators(generators);
    let mut idx: Vec<usize> = (0..j).collect();
    let mut sum = 0.0;
    let mut cols = Vec::with_capacity(j);
    loop {
        cols.clear();
        cols.extend(idx.iter().map(|&i| g[i].clone()));
        sum += gram_det(&cols)?;
        // next j-subset in lexicographic order
        let mut k = j;
        while k > 0 && idx[k - 1] == m - j + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for t in k..j {
            idx[t] = idx[t - 1] + 1;
        }
    }
    Ok(sum)
}

/// Random-projection estimate of `V_1` or `V_2` of a spatial polytope:
/// `V_1 = 2·E width(u)` and `V_2 = 2·E area(P|u^⊥)` for uniform `u`.
pub fn projection_vj_estimate<R: Rng + ?Sized>(
    p: &Polytope,
    j: usize,
    samples: usize,
    rng: &mut R,
) -> Result<EstimateResult> {
    if p.dim != 3 {
        return Err(Error::Dimension("projection estimator is implemented for d = 3".into()));
    }
    if !(1..=2).contains(&j) {
        return Err(param(format!("projection estimator supports j in {{1,2}}, got {j}")));
    }
    let mut m = Moments::new();
    let mut flat = Vec::with_capacity(p.vertices.len());
    let mut u = [0.0; 3];
    for _ in 0..samples {
        unit_direction(3, rng, &mut u);
        let x = if j == 1 {
            2.0 * (p.support(&u) + p.support(&[-u[0], -u[1], -u[2]]))
        } else {
            // orthonormal basis of u^⊥
            let a = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let c = super::dot(&a, &u);
            let mut e1 = [a[0] - c * u[0], a[1] - c * u[1], a[2] - c * u[2]];
            let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
            e1.iter_mut().for_each(|x| *x /= l);
            let e2 = [
                u[1] * e1[2] - u[2] * e1[1],
                u[2] * e1[0] - u[0] * e1[2],
                u[0] * e1[1] - u[1] * e1[0],
            ];
            flat.clear();
            flat.extend(p.vertices.iter().map(|v| [super::dot(v, &e1), super::dot(v, &e2)]));
            let ring: Vec<Vec<f64>> = monotone_chain(&flat, p.eps).iter().map(|q| q.to_vec()).collect();
            2.0 * polygon_area(&ring)
        };
        m.push(x);
    }
    Ok(EstimateResult::from_moments(&m, 0))
}
