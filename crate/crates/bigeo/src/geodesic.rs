//! Connection exponential/logarithm of the canonical Cartan-Schouten
//! connection and its boundary-value geodesics.
//!
//! Exp_g(v) = g exp(d_g L_{g^-1}(v)), Log_g(f) = d_e L_g(log(g^-1 f)), and
//! geodesics are translated 1-parameter subgroups
//! gamma(t; g0, g1) = g0 exp(t log(g0^-1 g1)). The parameter t is not
//! restricted to [0,1]; the formula is global, which the differential
//! inversion relies on.

use crate::error::{Error, Result};
use crate::explog::{exp_mat, group_log, log_mat};
use crate::group::{invert_mat, GroupId, GroupPoint, Tangent};
use crate::scalar::Ad;
use nalgebra::DMatrix;

/// Boundary-value parametrization (g0, g1) of a geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicParams {
    g0: GroupPoint,
    g1: GroupPoint,
}

impl GeodesicParams {
    /// Validates that `log(g0^-1 g1)` is defined (branch guard).
    pub fn new(g0: GroupPoint, g1: GroupPoint) -> Result<Self> {
        if g0.group() != g1.group() {
            return Err(Error::GroupMismatch(
                g0.group().to_string(),
                g1.group().to_string(),
            ));
        }
        let rel = g0.inverse().compose(&g1)?;
        group_log(&rel)?;
        Ok(GeodesicParams { g0, g1 })
    }

    pub fn g0(&self) -> &GroupPoint {
        &self.g0
    }

    pub fn g1(&self) -> &GroupPoint {
        &self.g1
    }

    pub fn group(&self) -> GroupId {
        self.g0.group()
    }

    /// The reversed geodesic (g1, g0).
    pub fn reversed(&self) -> GeodesicParams {
        GeodesicParams {
            g0: self.g1.clone(),
            g1: self.g0.clone(),
        }
    }

    pub fn translate(&self, h: &GroupPoint, side: crate::group::Side) -> Result<GeodesicParams> {
        Ok(GeodesicParams {
            g0: self.g0.translate(h, side)?,
            g1: self.g1.translate(h, side)?,
        })
    }
}

/// Exp_g(v) = g exp(g^-1 v) for a tangent v based at g.
pub fn ccs_exp(g: &GroupPoint, v: &Tangent) -> Result<GroupPoint> {
    if v.base() != g {
        return Err(Error::BaseMismatch(
            "ccs_exp expects a tangent based at g".into(),
        ));
    }
    let x = v.at_identity();
    let m = g.mat() * exp_mat(g.group(), &x);
    Ok(GroupPoint::new_unchecked(g.group(), m))
}

/// Log_g(f) = g log(g^-1 f) as a tangent based at g.
pub fn ccs_log(g: &GroupPoint, f: &GroupPoint) -> Result<Tangent> {
    if g.group() != f.group() {
        return Err(Error::GroupMismatch(
            g.group().to_string(),
            f.group().to_string(),
        ));
    }
    let rel = g.inverse().compose(f)?;
    let x = log_mat(g.group(), rel.mat())?;
    Tangent::new(g.clone(), g.mat() * x)
}

/// gamma(t; g0, g1) = g0 exp(t log(g0^-1 g1)).
pub fn geodesic(t: f64, params: &GeodesicParams) -> Result<GroupPoint> {
    let m = geodesic_mat(
        params.group(),
        params.g0.mat(),
        params.g1.mat(),
        t,
    )?;
    Ok(GroupPoint::new_unchecked(params.group(), m))
}

/// Generic-scalar geodesic evaluation; `t` may lie outside [0, 1].
pub(crate) fn geodesic_mat<S: Ad>(
    group: GroupId,
    g0: &DMatrix<S>,
    g1: &DMatrix<S>,
    t: S,
) -> Result<DMatrix<S>> {
    let rel = invert_mat(group, g0) * g1;
    let x = log_mat(group, &rel)?;
    Ok(g0 * exp_mat(group, &(x * t)))
}

/// Geodesic evaluation helper taking plain points.
pub(crate) fn geodesic_points(t: f64, g0: &GroupPoint, g1: &GroupPoint) -> Result<GroupPoint> {
    let m = geodesic_mat(g0.group(), g0.mat(), g1.mat(), t)?;
    Ok(GroupPoint::new_unchecked(g0.group(), m))
}
