use std::collections::HashMap;

use robust::{orient3d, Coord3D};

use super::planar::monotone_chain;
use super::{bbox_diagonal, Facet, Polytope, EPS_REL};
use crate::error::{param, Result};

type V3 = [f64; 3];

#[inline]
fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn norm(a: V3) -> f64 {
    dot3(a, a).sqrt()
}

#[derive(Clone)]
struct Face {
    v: [usize; 3],
    n: V3,
    off: f64,
    alive: bool,
}

impl Face {
    fn new(pts: &[V3], v: [usize; 3]) -> Face {
        // anchor at the corner opposite the longest edge
        let len2 = |i: usize, j: usize| {
            let d = sub(pts[v[i]], pts[v[j]]);
            dot3(d, d)
        };
        let opp = [len2(1, 2), len2(2, 0), len2(0, 1)];
        let k = (0..3).max_by(|&a, &b| opp[a].total_cmp(&opp[b])).unwrap_or(0);
        let (a, b, c) = (pts[v[k]], pts[v[(k + 1) % 3]], pts[v[(k + 2) % 3]]);
        let n = cross(sub(b, a), sub(c, a));
        let l = norm(n);
        let n = if l > 0.0 { [n[0] / l, n[1] / l, n[2] / l] } else { n };
        Face {
            v,
            n,
            off: dot3(n, a),
            alive: true,
        }
    }

    #[inline]
    fn height(&self, p: V3) -> f64 {
        dot3(self.n, p) - self.off
    }

    /// Exact test: `p` lies strictly on the outer side of the face plane.
    #[inline]
    fn sees(&self, pts: &[V3], p: V3) -> bool {
        let c = |q: V3| Coord3D { x: q[0], y: q[1], z: q[2] };
        orient3d(c(pts[self.v[0]]), c(pts[self.v[1]]), c(pts[self.v[2]]), c(p)) < 0.0
    }
}

fn farthest_by<F: Fn(V3) -> f64>(pts: &[V3], f: F) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in pts.iter().enumerate() {
        let v = f(*p);
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Convex hull of points in `R^3` by incremental insertion.
///
/// Full-dimensional hulls carry an outward-oriented triangle mesh. Coplanar,
/// collinear and single-point inputs are returned with `affine_dim` 2, 1 or 0
/// and no facets (planar vertices are listed in boundary order).
pub fn hull3d(points: &[[f64; 3]]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(param("hull3d needs at least one point"));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(param("hull3d input contains a non-finite coordinate"));
    }
    let pts = points;
    let eps = EPS_REL * bbox_diagonal(pts);

    let (i0, _) = farthest_by(pts, |p| -p[0]);
    let (i1, d01) = farthest_by(pts, |p| norm(sub(p, pts[i0])));
    if d01 <= eps {
        return Ok(lower(vec![pts[i0].to_vec()], 0, eps));
    }
    let axis = sub(pts[i1], pts[i0]);
    let (i2, d2) = farthest_by(pts, |p| norm(cross(axis, sub(p, pts[i0]))) / d01);
    if d2 <= eps {
        // collinear: extreme points along the axis
        let (lo, _) = farthest_by(pts, |p| -dot3(axis, p));
        let (hi, _) = farthest_by(pts, |p| dot3(axis, p));
        return Ok(lower(vec![pts[lo].to_vec(), pts[hi].to_vec()], 1, eps));
    }
    let plane_n = {
        let n = cross(axis, sub(pts[i2], pts[i0]));
        let l = norm(n);
        [n[0] / l, n[1] / l, n[2] / l]
    };
    let (i3, d3) = farthest_by(pts, |p| dot3(plane_n, sub(p, pts[i0])).abs());
    if d3 <= eps {
        return Ok(planar(pts, pts[i0], axis, plane_n, eps));
    }

    let mut faces: Vec<Face> = Vec::new();
    let base = if dot3(plane_n, sub(pts[i3], pts[i0])) > 0.0 {
        [i0, i2, i1]
    } else {
        [i0, i1, i2]
    };
    faces.push(Face::new(pts, base));
    for (a, b) in [(base[0], base[1]), (base[1], base[2]), (base[2], base[0])] {
        // each side face uses the reversed base edge plus the apex
        faces.push(Face::new(pts, [b, a, i3]));
    }

    // quickhull-style conflict lists: every outside point is parked on one
    // face that sees it; interior points are dropped for good
    let mut outside: Vec<Vec<usize>> = vec![Vec::new(); 4];
    let seeds = [i0, i1, i2, i3];
    for (pi, &p) in pts.iter().enumerate() {
        if seeds.contains(&pi) {
            continue;
        }
        if let Some(fi) = (0..4).find(|&fi| faces[fi].sees(pts, p)) {
            outside[fi].push(pi);
        }
    }

    // directed edge -> face holding it; stale entries point at dead faces
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edge_face.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }
    let mut mark: Vec<u32> = vec![0; faces.len()];
    let mut round = 0u32;
    let mut visible: Vec<usize> = Vec::new();
    let mut horizon: Vec<(usize, usize)> = Vec::new();
    let mut orphans: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = (0..4).collect();
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || outside[fi].is_empty() {
            continue;
        }
        let apex = *outside[fi]
            .iter()
            .max_by(|&&a, &&b| faces[fi].height(pts[a]).total_cmp(&faces[fi].height(pts[b])))
            .expect("non-empty");
        let p = pts[apex];
        // flood fill from fi keeps the visible region connected
        round += 1;
        visible.clear();
        visible.push(fi);
        mark[fi] = round;
        let mut head = 0;
        while head < visible.len() {
            let g = faces[visible[head]].v;
            head += 1;
            for k in 0..3 {
                let h = edge_face[&(g[(k + 1) % 3], g[k])];
                if mark[h] != round && faces[h].sees(pts, p) {
                    mark[h] = round;
                    visible.push(h);
                }
            }
        }
        horizon.clear();
        orphans.clear();
        for &gi in &visible {
            let v = faces[gi].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                if mark[edge_face[&(b, a)]] != round {
                    horizon.push((a, b));
                }
            }
        }
        for &gi in &visible {
            faces[gi].alive = false;
            orphans.append(&mut outside[gi]);
        }
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let f = Face::new(pts, [a, b, apex]);
            let id = faces.len();
            for e in [(a, b), (b, apex), (apex, a)] {
                edge_face.insert(e, id);
            }
            faces.push(f);
            outside.push(Vec::new());
            mark.push(0);
        }
        for &q in &orphans {
            if q == apex {
                continue;
            }
            if let Some(gi) = (first_new..faces.len()).find(|&gi| faces[gi].sees(pts, pts[q])) {
                outside[gi].push(q);
            }
        }
        stack.extend(first_new..faces.len());
    }

    // compact vertex indices
    let mut remap = vec![usize::MAX; pts.len()];
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let v = f.v[k];
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(pts[v].to_vec());
            }
            idx[k] = remap[v];
        }
        facets.push(Facet {
            indices: idx,
            normal: f.n,
            offset: f.off,
        });
    }
    Ok(Polytope {
        dim: 3,
        affine_dim: 3,
        vertices,
        facets,
        eps,
    })
}

fn lower(vertices: Vec<Vec<f64>>, affine_dim: usize, eps: f64) -> Polytope {
    Polytope {
        dim: 3,
        affine_dim,
        vertices,
        facets: Vec::new(),
        eps,
    }
}

fn planar(pts: &[V3], origin: V3, axis: V3, n: V3, eps: f64) -> Polytope {
    let l = norm(axis);
    let e1 = [axis[0] / l, axis[1] / l, axis[2] / l];
    let e2 = cross(n, e1);
    let flat: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let q = sub(*p, origin);
            [dot3(q, e1), dot3(q, e2)]
        })
        .collect();
    let ring = monotone_chain(&flat, eps);
    let vertices = ring
        .iter()
        .map(|q| {
            (0..3)
                .map(|k| origin[k] + q[0] * e1[k] + q[1] * e2[k])
                .collect()
        })
        .collect();
    lower(vertices, 2, eps)
}
