//! Directional differentials of the geodesic boundary maps and their
//! inverses.
//!
//! The forward differential is computed by threading dual numbers through
//! the closed-form geodesic expression. The inverse is obtained without
//! solving a linear system: the Jacobi field along gamma(.; g0, g1) with
//! J(t0) = w is, up to linear reparametrization, the endpoint-differential
//! Jacobi field of the geodesic through (g1, gamma(t0)), so
//!
//!   (d_{g0} gamma(t0; ., g1))^{-1}(w) = d_f gamma(1/(1-t0); g1, .)(w),
//!
//! and analogously with 1/t0 for the endpoint differential.

use crate::error::{Error, Result};
use crate::explog::exp_mat;
use crate::geodesic::{geodesic_mat, geodesic_points, GeodesicParams};
use crate::group::{invert_mat, project_to_algebra, GroupId, GroupPoint, Tangent};
use crate::scalar::Dual;
use nalgebra::DMatrix;

/// Which boundary point of the geodesic is varied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    End,
}

const T0_MARGIN: f64 = 1e-9;

/// A differential request: the geodesic, the evaluation parameter, the
/// varied endpoint, and the direction vector.
///
/// For [`d_geodesic`] the vector is based at the varied endpoint; for
/// [`inv_d_geodesic`] it is based at `gamma(t0)`.
#[derive(Clone, Debug)]
pub struct DiffRequest {
    pub params: GeodesicParams,
    pub t0: f64,
    pub endpoint: Endpoint,
    pub vector: Tangent,
}

impl DiffRequest {
    pub fn new(
        params: GeodesicParams,
        t0: f64,
        endpoint: Endpoint,
        vector: Tangent,
    ) -> Result<Self> {
        if vector.group() != params.group() {
            return Err(Error::GroupMismatch(
                vector.group().to_string(),
                params.group().to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&t0) {
            return Err(Error::Usage(format!("t0 = {t0} outside [0, 1]")));
        }
        // The start map is singular at t0 = 1, the end map at t0 = 0.
        match endpoint {
            Endpoint::Start if t0 > 1.0 - T0_MARGIN => {
                return Err(Error::Usage("t0 too close to 1 for the start map".into()))
            }
            Endpoint::End if t0 < T0_MARGIN => {
                return Err(Error::Usage("t0 too close to 0 for the end map".into()))
            }
            _ => {}
        }
        Ok(DiffRequest {
            params,
            t0,
            endpoint,
            vector,
        })
    }
}

/// Directional derivative of the boundary map
/// `p -> gamma(t0; p, g1)` (or `p -> gamma(t0; g0, p)`) along `req.vector`,
/// returned as a tangent at `gamma(t0)`.
pub fn d_geodesic(req: &DiffRequest) -> Result<Tangent> {
    let varied = match req.endpoint {
        Endpoint::Start => req.params.g0(),
        Endpoint::End => req.params.g1(),
    };
    if req.vector.base() != varied {
        return Err(Error::BaseMismatch(
            "d_geodesic expects the direction at the varied endpoint".into(),
        ));
    }
    let (value, raw) = raw_boundary_derivative(
        req.params.group(),
        req.params.g0().mat(),
        req.params.g1().mat(),
        req.t0,
        req.endpoint,
        req.vector.mat(),
    )?;
    let base = GroupPoint::new_unchecked(req.params.group(), value);
    project_at(&base, &raw)
}

/// Inverse of the boundary-map differential: maps `w` at `gamma(t0)` back to
/// the varied endpoint via the reparametrized Jacobi field.
pub fn inv_d_geodesic(req: &DiffRequest) -> Result<Tangent> {
    let group = req.params.group();
    let foot = geodesic_points(req.t0, req.params.g0(), req.params.g1())?;
    if (req.vector.base().mat() - foot.mat()).norm() > 1e-8 {
        return Err(Error::BaseMismatch(
            "inv_d_geodesic expects the vector at gamma(t0)".into(),
        ));
    }
    let (start, target, t_ext) = match req.endpoint {
        // Geodesic through (g1, f) evaluated at 1/(1-t0) reaches g0.
        Endpoint::Start => (req.params.g1(), req.params.g0(), 1.0 / (1.0 - req.t0)),
        // Geodesic through (g0, f) evaluated at 1/t0 reaches g1.
        Endpoint::End => (req.params.g0(), req.params.g1(), 1.0 / req.t0),
    };
    let (_, raw) = raw_boundary_derivative(
        group,
        start.mat(),
        foot.mat(),
        t_ext,
        Endpoint::End,
        req.vector.mat(),
    )?;
    // The evaluation point equals the stored endpoint up to roundoff; rebase
    // there so downstream comparisons are exact.
    project_at(target, &raw)
}

/// Dual-number derivative of `gamma(t; ., .)` in the ambient representation.
/// Returns the geodesic value and the raw derivative matrix.
fn raw_boundary_derivative(
    group: GroupId,
    g0: &DMatrix<f64>,
    g1: &DMatrix<f64>,
    t: f64,
    endpoint: Endpoint,
    v: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let varied = match endpoint {
        Endpoint::Start => g0,
        Endpoint::End => g1,
    };
    // Perturbation curve s -> p exp(s xi) with xi = p^-1 v, so c'(0) = v.
    let xi = invert_mat(group, varied) * v;
    let d = group.matrix_dim();
    let mut xi_dual = DMatrix::from_element(d, d, Dual::constant(0.0));
    for i in 0..d {
        for j in 0..d {
            xi_dual[(i, j)] = Dual::new(0.0, xi[(i, j)]);
        }
    }
    let step = exp_mat(group, &xi_dual);
    let lift = |m: &DMatrix<f64>| m.map(Dual::constant);
    let (a, b) = match endpoint {
        Endpoint::Start => (lift(varied) * step, lift(g1)),
        Endpoint::End => (lift(g0), lift(varied) * step),
    };
    let out = geodesic_mat(group, &a, &b, Dual::constant(t))?;
    Ok((out.map(|x| x.re), out.map(|x| x.eps)))
}

/// Project a raw ambient derivative onto the tangent structure at `base`:
/// left-translate to the identity, keep the Lie-algebra part, translate back.
fn project_at(base: &GroupPoint, raw: &DMatrix<f64>) -> Result<Tangent> {
    let group = base.group();
    let x = invert_mat(group, base.mat()) * raw;
    let proj = project_to_algebra(group, &x);
    Tangent::new(base.clone(), base.mat() * proj)
}
