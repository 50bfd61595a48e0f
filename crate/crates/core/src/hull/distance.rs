use super::{dist, Polytope};
use crate::error::{param, Result};

fn point_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let ax: Vec<f64> = a.iter().zip(x).map(|(p, q)| q - p).collect();
    let l2: f64 = ab.iter().map(|t| t * t).sum();
    if l2 == 0.0 {
        return dist(x, a);
    }
    let t = (ab.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>() / l2).clamp(0.0, 1.0);
    let proj: Vec<f64> = a.iter().zip(&ab).map(|(p, d)| p + t * d).collect();
    dist(x, &proj)
}

/// Distance from `p` to triangle `abc` (closest-feature classification by
/// barycentric regions).
fn point_triangle(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let sub = |u: [f64; 3], v: [f64; 3]| [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let len = |u: [f64; 3]| dot(u, u).sqrt();
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return len(ap);
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return len(bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return point_segment(&p, &a, &b);
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return len(cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return point_segment(&p, &a, &c);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return point_segment(&p, &b, &c);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q = [
        a[0] + ab[0] * v + ac[0] * w,
        a[1] + ab[1] * v + ac[1] * w,
        a[2] + ab[2] * v + ac[2] * w,
    ];
    len(sub(p, q))
}

fn arr3(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

/// Euclidean distance from `x` to the convex body `p` (0 inside).
pub fn distance_to_polytope(p: &Polytope, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim {
        return Err(param(format!("point of length {} vs polytope dimension {}", x.len(), p.dim)));
    }
    let v = &p.vertices;
    let n = v.len();
    if n == 0 {
        return Err(param("empty polytope"));
    }
    if n == 1 {
        return Ok(dist(x, &v[0]));
    }
    if n == 2 && p.affine_dim == 1 {
        return Ok(point_segment(x, &v[0], &v[1]));
    }
    match (p.dim, p.affine_dim) {
        (2, _) => {
            let mut inside = true;
            let mut best = f64::INFINITY;
            for i in 0..n {
                let a = &v[i];
                let b = &v[(i + 1) % n];
                let cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
                if cross < 0.0 {
                    inside = false;
                }
                best = best.min(point_segment(x, a, b));
            }
            Ok(if inside { 0.0 } else { best })
        }
        (3, 3) => {
            if p.max_facet_distance(x) <= 0.0 {
                return Ok(0.0);
            }
            let q = arr3(x);
            Ok(p
                .facets
                .iter()
                .map(|f| point_triangle(q, arr3(&v[f.indices[0]]), arr3(&v[f.indices[1]]), arr3(&v[f.indices[2]])))
                .fold(f64::INFINITY, f64::min))
        }
        (3, _) => {
            // flat polygon: fan triangulation
            let q = arr3(x);
            let o = arr3(&v[0]);
            Ok((1..n - 1)
                .map(|i| point_triangle(q, o, arr3(&v[i]), arr3(&v[i + 1])))
                .fold(f64::INFINITY, f64::min))
        }
        (d, _) => Err(param(format!("distance_to_polytope supports d in {{2,3}}, got {d}"))),
    }
}

/// Number of faces of dimension `dim - 1` whose closure contains `x` (within
/// the hull tolerance). A lower-dimensional hull is treated as a doubly covered
/// flat body, so it has two faces.
pub fn faces_containing(p: &Polytope, x: &[f64]) -> Result<usize> {
    if x.len() != p.dim {
        return Err(param(format!("point of length {} vs polytope dimension {}", x.len(), p.dim)));
    }
    let v = &p.vertices;
    let tol = p.eps;
    Ok(match (p.dim, p.affine_dim) {
        (2, 2) => (0..v.len())
            .filter(|&i| point_segment(x, &v[i], &v[(i + 1) % v.len()]) <= tol)
            .count(),
        (3, 3) => {
            let q = arr3(x);
            p.facets
                .iter()
                .filter(|f| {
                    point_triangle(q, arr3(&v[f.indices[0]]), arr3(&v[f.indices[1]]), arr3(&v[f.indices[2]])) <= tol
                })
                .count()
        }
        _ => {
            if distance_to_polytope(p, x)? <= tol {
                2
            } else {
                0
            }
        }
    })
}

/// Hausdorff distance between two polytopes of equal dimension.
///
/// The distance to a convex body is a convex function, so each one-sided
/// term is attained at a vertex.
pub fn hausdorff(a: &Polytope, b: &Polytope) -> Result<f64> {
    if a.dim != b.dim {
        return Err(param(format!("hausdorff: dimensions {} and {} differ", a.dim, b.dim)));
    }
    let mut r: f64 = 0.0;
    for v in &a.vertices {
        r = r.max(distance_to_polytope(b, v)?);
    }
    for v in &b.vertices {
        r = r.max(distance_to_polytope(a, v)?);
    }
    Ok(r)
}
