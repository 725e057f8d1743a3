//! Riemannian structure on SE(3): product of the standard bi-invariant
//! metric of SO(3) (inner product tr(A^T B)/2 on skew matrices) and the
//! Euclidean metric on R^3. The Levi-Civita geodesics are component-wise:
//! a rotation geodesic paired with a straight translation line.

use crate::error::{Error, Result};
use crate::explog::{exp_mat, log_mat, rotation_angle};
use crate::group::{GroupId, GroupPoint, Tangent};
use nalgebra::{DMatrix, Matrix3, Vector3};

fn rot_mat3_to_d(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

fn so3_log(r: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let x = log_mat(GroupId::SO3, &rot_mat3_to_d(r))?;
    Ok(Matrix3::from_fn(|i, j| x[(i, j)]))
}

fn so3_exp(w: &Matrix3<f64>) -> Matrix3<f64> {
    let x = DMatrix::from_fn(3, 3, |i, j| w[(i, j)]);
    let m = exp_mat(GroupId::SO3, &x);
    Matrix3::from_fn(|i, j| m[(i, j)])
}

fn require_se3(g: &GroupPoint) -> Result<()> {
    if g.group() != GroupId::SE3 {
        return Err(Error::Usage(format!(
            "product-metric operation expects SE(3), got {}",
            g.group()
        )));
    }
    Ok(())
}

fn translation3(g: &GroupPoint) -> Vector3<f64> {
    Vector3::from_iterator(g.translation())
}

/// Squared product-metric distance: theta^2 + |x_a - x_b|^2 with theta the
/// rotation angle of R_a^T R_b.
pub fn riem_dist2(a: &GroupPoint, b: &GroupPoint) -> Result<f64> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch(
            a.group().to_string(),
            b.group().to_string(),
        ));
    }
    match a.group() {
        GroupId::SE3 => {
            let rel = a.rotation().transpose() * b.rotation();
            let theta = so3_relative_angle(&rel)?;
            let dx = translation3(a) - translation3(b);
            Ok(theta * theta + dx.norm_squared())
        }
        GroupId::SO3 => {
            let rel = a.rotation().transpose() * b.rotation();
            let theta = so3_relative_angle(&rel)?;
            Ok(theta * theta)
        }
        GroupId::EuclideanN(_) => {
            let dx: f64 = a
                .translation()
                .iter()
                .zip(b.translation())
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            Ok(dx)
        }
    }
}

fn so3_relative_angle(rel: &Matrix3<f64>) -> Result<f64> {
    let g = GroupPoint::new_unchecked(GroupId::SO3, rot_mat3_to_d(rel));
    let theta = rotation_angle(&g);
    if theta >= std::f64::consts::PI - crate::explog::BRANCH_MARGIN {
        return Err(Error::BranchCut { angle: theta });
    }
    Ok(theta)
}

/// Levi-Civita geodesic of the product metric, component-wise.
pub fn riem_geodesic(t: f64, g0: &GroupPoint, g1: &GroupPoint) -> Result<GroupPoint> {
    require_se3(g0)?;
    require_se3(g1)?;
    let r0 = g0.rotation();
    let w = so3_log(&(r0.transpose() * g1.rotation()))?;
    let r = r0 * so3_exp(&(w * t));
    let x = translation3(g0) * (1.0 - t) + translation3(g1) * t;
    GroupPoint::se3_from_parts(&r, &x)
}

/// Riemannian exponential at g for a tangent in ambient coordinates
/// `[R W | u; 0 0]`: rotation factor moves along `R exp(W)`, translation
/// factor along `x + u`.
pub fn riem_exp(g: &GroupPoint, v: &Tangent) -> Result<GroupPoint> {
    require_se3(g)?;
    if v.base() != g {
        return Err(Error::BaseMismatch("riem_exp expects a tangent at g".into()));
    }
    let r = g.rotation();
    let a = v.mat();
    // W = R^T A (skew part of the ambient rotation block derivative).
    let mut w = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += r[(k, i)] * a[(k, j)];
            }
            w[(i, j)] = s;
        }
    }
    let w = (w - w.transpose()) * 0.5;
    let u = Vector3::new(a[(0, 3)], a[(1, 3)], a[(2, 3)]);
    GroupPoint::se3_from_parts(&(r * so3_exp(&w)), &(translation3(g) + u))
}

/// Riemannian logarithm: ambient tangent `[R log(R^T Q) | y - x; 0 0]` at g.
pub fn riem_log(g: &GroupPoint, f: &GroupPoint) -> Result<Tangent> {
    require_se3(g)?;
    require_se3(f)?;
    let r = g.rotation();
    let w = so3_log(&(r.transpose() * f.rotation()))?;
    let rw = r * w;
    let u = translation3(f) - translation3(g);
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = rw[(i, j)];
        }
        m[(i, 3)] = u[i];
    }
    Tangent::new(g.clone(), m)
}

/// Product Frechet mean: iterative SO(3) rotation mean paired with the
/// arithmetic mean of translations.
pub fn frechet_mean(points: &[GroupPoint]) -> Result<GroupPoint> {
    if points.is_empty() {
        return Err(Error::Usage("frechet_mean of empty set".into()));
    }
    for p in points {
        require_se3(p)?;
    }
    let n = points.len() as f64;
    let x_mean = points
        .iter()
        .map(translation3)
        .fold(Vector3::zeros(), |a, b| a + b)
        / n;
    let mut r = points[0].rotation();
    for _ in 0..200 {
        let mut acc = Matrix3::zeros();
        for p in points {
            acc += so3_log(&(r.transpose() * p.rotation()))?;
        }
        acc /= n;
        let step = acc.norm() / std::f64::consts::SQRT_2; // |w| from |W|_F
        r *= so3_exp(&acc);
        if step < 1e-13 {
            break;
        }
    }
    GroupPoint::se3_from_parts(&r, &x_mean)
}
