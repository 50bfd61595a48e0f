//! Convex hulls of Lévy processes.
//!
//! The crate samples symmetric stable and compound Poisson paths, builds
//! exact convex hulls in the plane and in space, evaluates hull functionals
//! (intrinsic volumes, Gram determinants, zonotope volumes, `L_p` mixed
//! volumes against the ball) and compares Monte Carlo estimates with the
//! analytic expectations collected in [`closed_form`].
//!
//! Module map:
//!
//! * [`stable`]: seeded samplers for stable scalars, isotropic vectors and paths.
//! * [`hull`]: planar/spatial hulls, intrinsic volumes, Hausdorff distance.
//! * [`closed_form`]: Gamma function, ball constants and expectation formulas.
//! * [`stats`] / [`experiments`]: estimators, Hill and KS statistics, experiment runners.
//! * [`lp`]: support-function arithmetic and `V_p(B^d, ·)`.
//! * [`limits`]: exit times, renewal counts and long-time limit experiments.
//! * [`report`]: JSON configuration, orchestration and CSV/JSON output.

pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod hull;
pub mod limits;
pub mod lp;
pub mod report;
pub mod rng;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
