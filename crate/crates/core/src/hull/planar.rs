use super::{bbox_diagonal, Polytope, EPS_REL};
use crate::error::{param, Result};

#[inline]
fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

#[inline]
fn len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Monotone-chain hull. Returns counterclockwise vertices with collinear and
/// duplicate points removed.
pub(crate) fn monotone_chain(points: &[[f64; 2]], eps: f64) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| len(*a, *b) <= eps);
    if pts.len() < 3 {
        return pts;
    }
    // a turn o -> a -> b counts as strictly left only when a is more than eps
    // away from the line through o and b
    let left = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| cross(o, a, b) > eps * len(o, b);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len().min(64));
    for &p in &pts {
        while hull.len() >= 2 && !left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && !left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 2 && len(hull[0], hull[1]) <= eps {
        hull.truncate(1);
    }
    hull
}

/// Convex hull of planar points.
///
/// Degenerate inputs give a segment (`affine_dim = 1`) or a point (`affine_dim = 0`).
pub fn hull2d(points: &[[f64; 2]]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(param("hull2d needs at least one point"));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(param("hull2d input contains a non-finite coordinate"));
    }
    let eps = EPS_REL * bbox_diagonal(points);
    let hull = monotone_chain(points, eps);
    let affine_dim = match hull.len() {
        1 => 0,
        2 => 1,
        _ => 2,
    };
    Ok(Polytope {
        dim: 2,
        affine_dim,
        vertices: hull.iter().map(|p| p.to_vec()).collect(),
        facets: Vec::new(),
        eps,
    })
}

/// Boundary length of a closed polygon given by its vertices in order
/// (a two-vertex polygon counts the segment twice).
pub fn polygon_perimeter(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 2 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .sum()
}

/// Shoelace area of a counterclockwise polygon.
pub fn polygon_area(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = &vertices[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        let a = &vertices[i];
        let b = &vertices[i + 1];
        twice += (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    }
    0.5 * twice.abs()
}
