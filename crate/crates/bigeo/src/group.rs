//! Matrix Lie group elements and tangent vectors.
//!
//! All supported groups are represented as homogeneous matrix groups so that
//! left/right translations and their differentials are plain matrix products.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix3, Vector3};

const ORTHO_TOL: f64 = 1e-9;

/// Which Lie group an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupId {
    /// 3x3 rotation matrices.
    SO3,
    /// Rigid-body motions as 4x4 homogeneous matrices.
    SE3,
    /// R^n under addition, as (n+1)x(n+1) homogeneous translation matrices.
    EuclideanN(usize),
}

impl GroupId {
    pub fn matrix_dim(&self) -> usize {
        match self {
            GroupId::SO3 => 3,
            GroupId::SE3 => 4,
            GroupId::EuclideanN(n) => n + 1,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn tangent_dim(&self) -> usize {
        match self {
            GroupId::SO3 => 3,
            GroupId::SE3 => 6,
            GroupId::EuclideanN(n) => *n,
        }
    }

    /// Size of the rotational block (0 for purely Euclidean groups).
    pub(crate) fn rot_dim(&self) -> usize {
        match self {
            GroupId::SO3 | GroupId::SE3 => 3,
            GroupId::EuclideanN(_) => 0,
        }
    }

    /// Whether the homogeneous representation carries a translation column.
    pub(crate) fn has_translation(&self) -> bool {
        !matches!(self, GroupId::SO3)
    }

    pub fn validate(&self) -> Result<()> {
        if let GroupId::EuclideanN(n) = self {
            if *n == 0 {
                return Err(Error::Usage("EuclideanN dimension must be >= 1".into()));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for GroupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupId::SO3 => write!(f, "SO(3)"),
            GroupId::SE3 => write!(f, "SE(3)"),
            GroupId::EuclideanN(n) => write!(f, "R^{n}"),
        }
    }
}

/// Translation side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// An element of a matrix Lie group in its homogeneous representation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    group: GroupId,
    mat: DMatrix<f64>,
}

impl GroupPoint {
    /// Validating constructor.
    pub fn new(group: GroupId, mat: DMatrix<f64>) -> Result<Self> {
        group.validate()?;
        let d = group.matrix_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidPoint(format!(
                "expected {d}x{d} matrix for {group}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let p = GroupPoint { group, mat };
        p.check_invariants()?;
        Ok(p)
    }

    /// Construct without re-validating; internal use after closed-form ops.
    pub(crate) fn new_unchecked(group: GroupId, mat: DMatrix<f64>) -> Self {
        GroupPoint { group, mat }
    }

    pub fn identity(group: GroupId) -> Self {
        let d = group.matrix_dim();
        GroupPoint {
            group,
            mat: DMatrix::identity(d, d),
        }
    }

    /// SE(3) element from a rotation matrix and a translation vector.
    pub fn se3_from_parts(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Self> {
        let mut m = DMatrix::identity(4, 4);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = rotation[(i, j)];
            }
            m[(i, 3)] = translation[i];
        }
        GroupPoint::new(GroupId::SE3, m)
    }

    /// SO(3) element from a rotation matrix.
    pub fn so3_from_matrix(rotation: &Matrix3<f64>) -> Result<Self> {
        let mut m = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = rotation[(i, j)];
            }
        }
        GroupPoint::new(GroupId::SO3, m)
    }

    /// Euclidean point from a coordinate vector.
    pub fn euclidean_from_vec(x: &[f64]) -> Result<Self> {
        let n = x.len();
        let mut m = DMatrix::identity(n + 1, n + 1);
        for i in 0..n {
            m[(i, n)] = x[i];
        }
        GroupPoint::new(GroupId::EuclideanN(n), m)
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Rotation block (SO3/SE3 only).
    pub fn rotation(&self) -> Matrix3<f64> {
        let mut r = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                r[(i, j)] = self.mat[(i, j)];
            }
        }
        r
    }

    /// Translation column (top entries of the last column).
    pub fn translation(&self) -> Vec<f64> {
        let d = self.group.matrix_dim();
        (0..d - 1).map(|i| self.mat[(i, d - 1)]).collect()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let d = self.group.matrix_dim();
        let id = DMatrix::identity(d, d);
        (&self.mat - id).norm() <= tol
    }

    pub fn check_invariants(&self) -> Result<()> {
        let d = self.group.matrix_dim();
        match self.group {
            GroupId::SO3 => check_rotation_block(&self.mat, 0),
            GroupId::SE3 => {
                check_rotation_block(&self.mat, 0)?;
                check_homogeneous_bottom_row(&self.mat, d)?;
                for j in 0..3 {
                    if self.mat[(3, j)] != 0.0 {
                        return Err(Error::InvalidPoint("SE3 bottom row must be (0,0,0,1)".into()));
                    }
                }
                Ok(())
            }
            GroupId::EuclideanN(n) => {
                check_homogeneous_bottom_row(&self.mat, d)?;
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        if (self.mat[(i, j)] - expect).abs() > 1e-12 {
                            return Err(Error::InvalidPoint(
                                "EuclideanN upper block must be the identity".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn require_same_group(&self, other: &GroupPoint) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(
                self.group.to_string(),
                other.group.to_string(),
            ));
        }
        Ok(())
    }

    /// Group operation: matrix product.
    pub fn compose(&self, other: &GroupPoint) -> Result<GroupPoint> {
        self.require_same_group(other)?;
        Ok(GroupPoint::new_unchecked(self.group, &self.mat * &other.mat))
    }

    /// Closed-form inverse: transpose of the rotation block, `(R^T, -R^T x)`
    /// for SE(3), negated translation for Euclidean groups.
    pub fn inverse(&self) -> GroupPoint {
        GroupPoint::new_unchecked(self.group, invert_mat(self.group, &self.mat))
    }

    /// `h * self` (left) or `self * h` (right).
    pub fn translate(&self, h: &GroupPoint, side: Side) -> Result<GroupPoint> {
        self.require_same_group(h)?;
        let m = match side {
            Side::Left => &h.mat * &self.mat,
            Side::Right => &self.mat * &h.mat,
        };
        Ok(GroupPoint::new_unchecked(self.group, m))
    }
}

/// Inverse in the homogeneous representation, generic over the scalar.
pub(crate) fn invert_mat<S: crate::scalar::Ad>(group: GroupId, m: &DMatrix<S>) -> DMatrix<S> {
    let d = group.matrix_dim();
    let r = group.rot_dim();
    let mut out = DMatrix::from_element(d, d, S::zero());
    // Transpose the rotation block.
    for i in 0..r {
        for j in 0..r {
            out[(i, j)] = m[(j, i)];
        }
    }
    if group.has_translation() {
        // -R^T x (R = I for Euclidean groups).
        for i in 0..d - 1 {
            let mut acc = S::zero();
            for k in 0..r {
                acc += m[(k, i)] * m[(k, d - 1)];
            }
            if r == 0 || i >= r {
                // Euclidean rows outside the rotation block.
                acc = m[(i, d - 1)];
            }
            out[(i, d - 1)] = -acc;
        }
        out[(d - 1, d - 1)] = S::one();
        // Euclidean identity block.
        for i in r..d - 1 {
            out[(i, i)] = S::one();
        }
    }
    out
}

fn check_rotation_block(m: &DMatrix<f64>, offset: usize) -> Result<()> {
    let mut r = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            r[(i, j)] = m[(offset + i, offset + j)];
        }
    }
    let ortho = (r.transpose() * r - Matrix3::identity()).norm();
    if ortho > ORTHO_TOL {
        return Err(Error::InvalidPoint(format!(
            "rotation block not orthogonal (|R^T R - I| = {ortho:.3e})"
        )));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > ORTHO_TOL {
        return Err(Error::InvalidPoint(format!(
            "rotation block determinant {det} != 1"
        )));
    }
    Ok(())
}

fn check_homogeneous_bottom_row(m: &DMatrix<f64>, d: usize) -> Result<()> {
    for j in 0..d - 1 {
        if m[(d - 1, j)] != 0.0 {
            return Err(Error::InvalidPoint("bottom row must be (0,...,0,1)".into()));
        }
    }
    if m[(d - 1, d - 1)] != 1.0 {
        return Err(Error::InvalidPoint("bottom-right entry must be 1".into()));
    }
    Ok(())
}

/// A tangent vector stored at its base point in ambient matrix coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: GroupPoint,
    mat: DMatrix<f64>,
}

impl Tangent {
    pub fn new(base: GroupPoint, mat: DMatrix<f64>) -> Result<Self> {
        let d = base.group().matrix_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidPoint(format!(
                "tangent matrix must be {d}x{d}"
            )));
        }
        Ok(Tangent { base, mat })
    }

    pub fn zero(base: GroupPoint) -> Self {
        let d = base.group().matrix_dim();
        Tangent {
            base,
            mat: DMatrix::zeros(d, d),
        }
    }

    /// Tangent at the identity from Lie-algebra coordinates:
    /// `(w1,w2,w3)` for SO(3), `(w1,w2,w3,u1,u2,u3)` for SE(3), `(u1..un)`
    /// for Euclidean groups.
    pub fn from_identity_coords(group: GroupId, coords: &[f64]) -> Result<Self> {
        if coords.len() != group.tangent_dim() {
            return Err(Error::Usage(format!(
                "expected {} coordinates for {group}, got {}",
                group.tangent_dim(),
                coords.len()
            )));
        }
        let d = group.matrix_dim();
        let mut m = DMatrix::zeros(d, d);
        match group {
            GroupId::SO3 | GroupId::SE3 => {
                m[(0, 1)] = -coords[2];
                m[(1, 0)] = coords[2];
                m[(0, 2)] = coords[1];
                m[(2, 0)] = -coords[1];
                m[(1, 2)] = -coords[0];
                m[(2, 1)] = coords[0];
                if group == GroupId::SE3 {
                    for i in 0..3 {
                        m[(i, 3)] = coords[3 + i];
                    }
                }
            }
            GroupId::EuclideanN(n) => {
                for i in 0..n {
                    m[(i, n)] = coords[i];
                }
            }
        }
        Ok(Tangent {
            base: GroupPoint::identity(group),
            mat: m,
        })
    }

    pub fn base(&self) -> &GroupPoint {
        &self.base
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn group(&self) -> GroupId {
        self.base.group()
    }

    pub fn is_at_identity(&self, tol: f64) -> bool {
        self.base.is_identity(tol)
    }

    /// Identity coordinates: `base^{-1} * mat`.
    pub fn at_identity(&self) -> DMatrix<f64> {
        invert_mat(self.group(), self.base.mat()) * &self.mat
    }

    /// Lie-algebra coordinate vector of `at_identity()`.
    pub fn identity_coords(&self) -> Vec<f64> {
        let x = self.at_identity();
        algebra_coords(self.group(), &x)
    }

    /// Derivative of the translation `L_h` / `R_h` applied to this vector:
    /// left gives `h * mat` at base `h * base`, right gives `mat * h`.
    pub fn d_translate(&self, h: &GroupPoint, side: Side) -> Result<Tangent> {
        if self.group() != h.group() {
            return Err(Error::GroupMismatch(
                self.group().to_string(),
                h.group().to_string(),
            ));
        }
        let (base, mat) = match side {
            Side::Left => (self.base.translate(h, Side::Left)?, h.mat() * &self.mat),
            Side::Right => (self.base.translate(h, Side::Right)?, &self.mat * h.mat()),
        };
        Ok(Tangent { base, mat })
    }

    pub fn scale(&self, s: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            mat: &self.mat * s,
        }
    }

    pub fn add(&self, other: &Tangent) -> Result<Tangent> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(
                "cannot add tangents at different base points".into(),
            ));
        }
        Ok(Tangent {
            base: self.base.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    /// Norm of the identity coordinates under the product inner product
    /// `tr(W^T W)/2 + |u|^2` (the auxiliary norm of the solvers).
    pub fn aux_norm(&self) -> f64 {
        let c = self.identity_coords();
        c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Extract Lie-algebra coordinates from an identity-tangent ambient matrix.
pub(crate) fn algebra_coords(group: GroupId, x: &DMatrix<f64>) -> Vec<f64> {
    match group {
        GroupId::SO3 => vec![x[(2, 1)], x[(0, 2)], x[(1, 0)]],
        GroupId::SE3 => vec![
            x[(2, 1)],
            x[(0, 2)],
            x[(1, 0)],
            x[(0, 3)],
            x[(1, 3)],
            x[(2, 3)],
        ],
        GroupId::EuclideanN(n) => (0..n).map(|i| x[(i, n)]).collect(),
    }
}

/// Project an ambient matrix onto the Lie algebra of `group`:
/// skew-symmetrize the rotational block, keep the translation column,
/// zero everything else.
pub(crate) fn project_to_algebra(group: GroupId, x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = group.matrix_dim();
    let r = group.rot_dim();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..r {
        for j in 0..r {
            out[(i, j)] = 0.5 * (x[(i, j)] - x[(j, i)]);
        }
    }
    if group.has_translation() {
        for i in 0..d - 1 {
            out[(i, d - 1)] = x[(i, d - 1)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_point, seeded_rng};

    #[test]
    fn se3_translation_composition_adds() {
        // (I, a) (I, b) = (I, a + b)
        let a = GroupPoint::se3_from_parts(&Matrix3::identity(), &Vector3::new(1.0, -2.0, 3.0))
            .unwrap();
        let b =
            GroupPoint::se3_from_parts(&Matrix3::identity(), &Vector3::new(0.5, 4.0, 1.0)).unwrap();
        let c = a.compose(&b).unwrap();
        assert_eq!(c.translation(), vec![1.5, 2.0, 4.0]);
        assert!((c.rotation() - Matrix3::identity()).norm() < 1e-15);
    }

    #[test]
    fn identity_composes_neutrally() {
        let mut rng = seeded_rng(1);
        for group in [GroupId::SO3, GroupId::SE3, GroupId::EuclideanN(2)] {
            let g = random_point(&mut rng, group, 1.0);
            let e = GroupPoint::identity(group);
            assert!((e.compose(&g).unwrap().mat() - g.mat()).norm() < 1e-15);
            assert!((g.compose(&e).unwrap().mat() - g.mat()).norm() < 1e-15);
        }
    }

    #[test]
    fn so3_compose_matches_matrix_multiply_oracle() {
        let mut rng = seeded_rng(2);
        for _ in 0..20 {
            let a = random_point(&mut rng, GroupId::SO3, 1.0);
            let b = random_point(&mut rng, GroupId::SO3, 1.0);
            let c = a.compose(&b).unwrap();
            // Entry-wise 3x3 multiply oracle.
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += a.mat()[(i, k)] * b.mat()[(k, j)];
                    }
                    assert!((c.mat()[(i, j)] - s).abs() < 1e-15);
                }
            }
            c.check_invariants().unwrap();
        }
    }

    #[test]
    fn se3_inverse_closed_form() {
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let g = random_point(&mut rng, GroupId::SE3, 1.0);
            let inv = g.inverse();
            // (R, x)^{-1} = (R^T, -R^T x)
            let r = g.rotation();
            let x = Vector3::from_iterator(g.translation());
            assert!((inv.rotation() - r.transpose()).norm() < 1e-14);
            let expect = -r.transpose() * x;
            let got = Vector3::from_iterator(inv.translation());
            assert!((got - expect).norm() < 1e-13);
            // g g^{-1} = I within 1e-12 against the numeric inverse oracle.
            let numeric = g.mat().clone().try_inverse().unwrap();
            assert!((inv.mat() - numeric).norm() < 1e-12);
            assert!(g.compose(&inv).unwrap().is_identity(1e-12));
        }
    }

    #[test]
    fn identity_inverse_is_identity() {
        let e = GroupPoint::identity(GroupId::SE3);
        assert!(e.inverse().is_identity(0.0));
    }

    #[test]
    fn group_mismatch_rejected() {
        let a = GroupPoint::identity(GroupId::SO3);
        let b = GroupPoint::identity(GroupId::SE3);
        assert!(matches!(a.compose(&b), Err(Error::GroupMismatch(_, _))));
    }

    #[test]
    fn euclidean_translate_is_vector_addition() {
        let g = GroupPoint::euclidean_from_vec(&[1.0, 2.0]).unwrap();
        let h = GroupPoint::euclidean_from_vec(&[-3.0, 5.0]).unwrap();
        for side in [Side::Left, Side::Right] {
            let t = g.translate(&h, side).unwrap();
            assert_eq!(t.translation(), vec![-2.0, 7.0]);
        }
        // d_translate acts as identity on the vector part.
        let v = Tangent::from_identity_coords(GroupId::EuclideanN(2), &[0.3, -0.4]).unwrap();
        let v = v.d_translate(&g, Side::Left).unwrap();
        let w = v.d_translate(&h, Side::Left).unwrap();
        assert_eq!(w.identity_coords(), vec![0.3, -0.4]);
    }

    #[test]
    fn d_translate_round_trip() {
        let mut rng = seeded_rng(4);
        for group in [GroupId::SO3, GroupId::SE3, GroupId::EuclideanN(3)] {
            for _ in 0..20 {
                let g = random_point(&mut rng, group, 1.0);
                let h = random_point(&mut rng, group, 1.0);
                let v = crate::testutil::random_tangent_at(&mut rng, &g, 1.0);
                for side in [Side::Left, Side::Right] {
                    let fwd = v.d_translate(&h, side).unwrap();
                    let back = fwd.d_translate(&h.inverse(), side).unwrap();
                    assert!((back.mat() - v.mat()).norm() < 1e-12);
                    assert!((back.base().mat() - v.base().mat()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn d_translate_by_identity_is_noop() {
        let mut rng = seeded_rng(5);
        let g = random_point(&mut rng, GroupId::SE3, 1.0);
        let v = crate::testutil::random_tangent_at(&mut rng, &g, 1.0);
        let e = GroupPoint::identity(GroupId::SE3);
        let w = v.d_translate(&e, Side::Left).unwrap();
        assert_eq!(w.mat(), v.mat());
    }
}
