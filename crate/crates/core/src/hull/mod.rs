//! Exact convex hulls in the plane and in space, together with the hull
//! functionals the experiments need.
//!
//! Orientation tests use a tolerance of [`EPS_REL`] times the input diameter;
//! exact predicates are not used.

mod distance;
mod measures;
mod planar;
mod spatial;

pub use distance::{distance_to_polytope, faces_containing, hausdorff};
pub use measures::{
    gram_det, intrinsic_volumes, intrinsic_volumes_2d, intrinsic_volumes_3d, projection_vj_estimate,
    zonotope_intrinsic_volume, ZONOTOPE_MAX_GENERATORS,
};
pub use planar::{hull2d, polygon_area, polygon_perimeter};
pub use spatial::hull3d;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Relative geometric tolerance: `ε_geom = EPS_REL · diameter`.
pub const EPS_REL: f64 = 1e-9;

/// Triangular facet of a spatial hull, oriented so that `normal` points outward
/// and `<normal, x> = offset` on the facet plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub indices: [usize; 3],
    pub normal: [f64; 3],
    pub offset: f64,
}

/// Vertex/facet description of a convex hull in `R^2` or `R^3`.
///
/// Planar hulls list vertices counterclockwise. Spatial hulls carry a closed
/// triangle mesh in `facets`; lower-dimensional spatial hulls have no facets
/// and keep their vertices in boundary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    /// Dimension of the affine hull (0 = point, 1 = segment, ...).
    pub affine_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    /// Absolute tolerance used while building the hull.
    pub eps: f64,
}

impl Polytope {
    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim
    }

    pub fn is_lower_dimensional(&self) -> bool {
        !self.is_full_dimensional()
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    /// `h(P, u) = max_v <v, u>`.
    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, lambda: f64) -> Polytope {
        Polytope {
            dim: self.dim,
            affine_dim: self.affine_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * lambda).collect())
                .collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    indices: f.indices,
                    normal: f.normal,
                    offset: f.offset * lambda,
                })
                .collect(),
            eps: self.eps * lambda.abs(),
        }
    }

    /// Largest signed distance from `x` to a facet plane (full-dimensional spatial hulls).
    pub fn max_facet_distance(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| dot(&f.normal, x) - f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polytope serializes")
    }
}

/// Hull of row-major coordinates in `R^dim`, `dim ∈ {2,3}`.
pub fn hull_of_coords(dim: usize, coords: &[f64]) -> Result<Polytope> {
    match dim {
        2 => {
            let pts: Vec<[f64; 2]> = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            hull2d(&pts)
        }
        3 => {
            let pts: Vec<[f64; 3]> = coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            hull3d(&pts)
        }
        _ => Err(param(format!("exact hulls are implemented for d in {{2,3}}, got {dim}"))),
    }
}

/// Intrinsic volumes `(V_0, ..., V_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicVolumes {
    pub values: Vec<f64>,
}

impl IntrinsicVolumes {
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Steiner polynomial `V_d(P + rB^d) = Σ_j κ_{d-j} r^{d-j} V_j(P)`.
    pub fn steiner_volume(&self, r: f64) -> f64 {
        let d = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| crate::closed_form::kappa(d - j) * r.powi((d - j) as i32) * v)
            .sum()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Bounding-box diagonal, used as the diameter scale for tolerances.
pub(crate) fn bbox_diagonal<const D: usize>(pts: &[[f64; D]]) -> f64 {
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for p in pts {
        for k in 0..D {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (0..D).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}
