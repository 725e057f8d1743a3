//! Closed-form group exponential and logarithm.
//!
//! SO(3) uses the Rodrigues formula, SE(3) the standard `(exp(W), V u)`
//! form, Euclidean groups reduce to vector addition. Everything is generic
//! over [`Ad`] so the same code path yields forward-mode directional
//! derivatives when instantiated with dual numbers.
//!
//! For rotation angles below 1e-4 the trigonometric coefficients are
//! evaluated by 4th-order Taylor expansions in theta^2; this keeps the dual
//! path free of 0/0 cancellations at the identity.

use crate::error::{Error, Result};
use crate::group::{GroupId, GroupPoint, Tangent};
use crate::scalar::Ad;
use nalgebra::DMatrix;

/// Branch-cut guard: logs are defined for rotation angles < pi - this margin.
pub const BRANCH_MARGIN: f64 = 1e-6;

const SMALL_ANGLE: f64 = 1e-4;

/// Group exponential of an identity-based tangent.
pub fn group_exp(v: &Tangent) -> Result<GroupPoint> {
    if !v.is_at_identity(1e-12) {
        return Err(Error::Usage(
            "group_exp expects a tangent based at the identity".into(),
        ));
    }
    let m = exp_mat(v.group(), v.mat());
    Ok(GroupPoint::new_unchecked(v.group(), m))
}

/// Principal-branch group logarithm; errors when the rotation angle reaches
/// `pi - 1e-6`.
pub fn group_log(g: &GroupPoint) -> Result<Tangent> {
    let m = log_mat(g.group(), g.mat())?;
    Tangent::new(GroupPoint::identity(g.group()), m)
}

/// Rotation angle of the 3x3 block of a group element (0 for Euclidean).
pub fn rotation_angle(g: &GroupPoint) -> f64 {
    rotation_angle_mat(g.group(), g.mat())
}

pub(crate) fn rotation_angle_mat<S: Ad>(group: GroupId, m: &DMatrix<S>) -> f64 {
    if group.rot_dim() == 0 {
        return 0.0;
    }
    let mut tr = 0.0;
    for i in 0..3 {
        tr += m[(i, i)].re();
    }
    // |(R - R^T)/2| gives sin(theta) for the atan2 branch.
    let mut s2 = 0.0;
    for (i, j) in [(2, 1), (0, 2), (1, 0)] {
        let a = 0.5 * (m[(i, j)].re() - m[(j, i)].re());
        s2 += a * a;
    }
    f64::atan2(s2.sqrt(), 0.5 * (tr - 1.0))
}

/// exp of a Lie-algebra element in ambient matrix form.
pub(crate) fn exp_mat<S: Ad>(group: GroupId, x: &DMatrix<S>) -> DMatrix<S> {
    let d = group.matrix_dim();
    match group {
        GroupId::EuclideanN(_) => {
            let mut m = DMatrix::from_element(d, d, S::zero());
            for i in 0..d {
                m[(i, i)] = S::one();
            }
            for i in 0..d - 1 {
                m[(i, d - 1)] = x[(i, d - 1)];
            }
            m
        }
        GroupId::SO3 | GroupId::SE3 => {
            let w = [x[(2, 1)], x[(0, 2)], x[(1, 0)]];
            let q = w[0] * w[0] + w[1] * w[1] + w[2] * w[2]; // theta^2
            let (a, b, c) = rodrigues_coeffs(q);
            // R = I + a W + b W^2, V = I + b W + c W^2.
            let mut m = DMatrix::from_element(d, d, S::zero());
            let w1 = skew3(&w);
            let w2 = mat3_mul(&w1, &w1);
            for i in 0..3 {
                for j in 0..3 {
                    let id = if i == j { S::one() } else { S::zero() };
                    m[(i, j)] = id + a * w1[i][j] + b * w2[i][j];
                }
            }
            if group == GroupId::SE3 {
                let u = [x[(0, 3)], x[(1, 3)], x[(2, 3)]];
                for i in 0..3 {
                    let mut t = u[i];
                    for j in 0..3 {
                        t += (b * w1[i][j] + c * w2[i][j]) * u[j];
                    }
                    m[(i, 3)] = t;
                }
                m[(3, 3)] = S::one();
            }
            m
        }
    }
}

/// log of a group element in ambient matrix form (principal branch).
pub(crate) fn log_mat<S: Ad>(group: GroupId, g: &DMatrix<S>) -> Result<DMatrix<S>> {
    let d = group.matrix_dim();
    match group {
        GroupId::EuclideanN(_) => {
            let mut x = DMatrix::from_element(d, d, S::zero());
            for i in 0..d - 1 {
                x[(i, d - 1)] = g[(i, d - 1)];
            }
            Ok(x)
        }
        GroupId::SO3 | GroupId::SE3 => {
            let angle = rotation_angle_mat(group, g);
            if angle >= std::f64::consts::PI - BRANCH_MARGIN {
                return Err(Error::BranchCut { angle });
            }
            // Skew part S = (R - R^T)/2; its axis vector has length sin(theta).
            let half = S::from_f64(0.5);
            let s = [
                half * (g[(2, 1)] - g[(1, 2)]),
                half * (g[(0, 2)] - g[(2, 0)]),
                half * (g[(1, 0)] - g[(0, 1)]),
            ];
            let sin2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            let cos = half * (g[(0, 0)] + g[(1, 1)] + g[(2, 2)] - S::one());
            // w = f * vee(S) with f = theta / sin(theta).
            let f = if sin2.re().sqrt() < SMALL_ANGLE && cos.re() > 0.0 {
                // theta^2 = sin^2 (1 + sin^2/3 + ...) to 4th order.
                let q = sin2 * (S::one() + sin2 / S::from_f64(3.0));
                S::one() + q / S::from_f64(6.0) + q * q * S::from_f64(7.0 / 360.0)
            } else {
                let sin = sin2.sqrt();
                let theta = sin.atan2(cos);
                theta / sin
            };
            let w = [f * s[0], f * s[1], f * s[2]];
            let mut x = DMatrix::from_element(d, d, S::zero());
            let w1 = skew3(&w);
            for i in 0..3 {
                for j in 0..3 {
                    x[(i, j)] = w1[i][j];
                }
            }
            if group == GroupId::SE3 {
                // u = V^{-1} x with V^{-1} = I - W/2 + e W^2,
                // e = (1 - a/(2b)) / theta^2.
                let q = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
                let e = vinv_coeff(q);
                let w2 = mat3_mul(&w1, &w1);
                let t = [g[(0, 3)], g[(1, 3)], g[(2, 3)]];
                for i in 0..3 {
                    let mut u = t[i];
                    for j in 0..3 {
                        u += (e * w2[i][j] - half * w1[i][j]) * t[j];
                    }
                    x[(i, 3)] = u;
                }
            }
            Ok(x)
        }
    }
}

/// Rodrigues coefficients (a, b, c) = (sin t / t, (1-cos t)/t^2, (t - sin t)/t^3)
/// as functions of q = t^2.
fn rodrigues_coeffs<S: Ad>(q: S) -> (S, S, S) {
    if q.re().sqrt() < SMALL_ANGLE {
        let a = S::one() - q / S::from_f64(6.0) + q * q / S::from_f64(120.0);
        let b = S::from_f64(0.5) - q / S::from_f64(24.0) + q * q / S::from_f64(720.0);
        let c = S::from_f64(1.0 / 6.0) - q / S::from_f64(120.0) + q * q / S::from_f64(5040.0);
        (a, b, c)
    } else {
        let t = q.sqrt();
        let (st, ct) = (t.sin(), t.cos());
        let a = st / t;
        let b = (S::one() - ct) / q;
        let c = (t - st) / (q * t);
        (a, b, c)
    }
}

/// Coefficient e of W^2 in V^{-1} = I - W/2 + e W^2, as a function of q = t^2.
fn vinv_coeff<S: Ad>(q: S) -> S {
    if q.re().sqrt() < SMALL_ANGLE {
        S::from_f64(1.0 / 12.0) + q / S::from_f64(720.0) + q * q / S::from_f64(30240.0)
    } else {
        let t = q.sqrt();
        let a = t.sin() / t;
        let b = (S::one() - t.cos()) / q;
        (S::one() - a / (b + b)) / q
    }
}

fn skew3<S: Ad>(w: &[S; 3]) -> [[S; 3]; 3] {
    let z = S::zero();
    [
        [z, -w[2], w[1]],
        [w[2], z, -w[0]],
        [-w[1], w[0], z],
    ]
}

fn mat3_mul<S: Ad>(a: &[[S; 3]; 3], b: &[[S; 3]; 3]) -> [[S; 3]; 3] {
    let mut out = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = S::zero();
            for k in 0..3 {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}
