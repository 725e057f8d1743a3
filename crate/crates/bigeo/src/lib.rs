//! Bi-invariant geodesic regression on matrix Lie groups.
//!
//! The crate provides the calculus of the canonical Cartan-Schouten
//! connection on SO(3), SE(3) and R^n (exp/log, boundary-value geodesics,
//! directional differentials of the geodesic boundary maps and their
//! Jacobi-field inverses), the bi-invariant regression estimator with its
//! net-force fixed-point solver, a Riemannian geodesic-regression baseline
//! on SE(3) with the product metric, and deterministic, seeded experiment
//! drivers (synthetic equivariance/R^2 studies and a knee-joint frame
//! pipeline).

pub mod diff;
pub mod error;
pub mod experiments;
pub mod explog;
pub mod geodesic;
pub mod group;
pub mod knee;
pub mod metric;
pub mod regression;
pub mod scalar;
pub mod testutil;

pub use diff::{d_geodesic, inv_d_geodesic, DiffRequest, Endpoint};
pub use error::{Error, Result};
pub use explog::{group_exp, group_log, rotation_angle};
pub use geodesic::{ccs_exp, ccs_log, geodesic, GeodesicParams};
pub use group::{GroupId, GroupPoint, Side, Tangent};
pub use metric::{frechet_mean, riem_dist2, riem_exp, riem_geodesic, riem_log};
pub use regression::{
    fit_biinvariant, fit_riemannian, group_mean, net_force, r_squared, Dataset, FitResult, Init,
    Sample, SolverConfig,
};
