//! Geodesic regression estimators.
//!
//! * [`fit_biinvariant`]: the equivariant estimator defined by the vanishing
//!   of the weighted inverse-differential sums, computed with a net-force
//!   fixed-point iteration.
//! * [`group_mean`]: the exponential barycenter, the constant-geodesic
//!   special case of the same iteration.
//! * [`fit_riemannian`]: the least-squares baseline on SE(3) under the
//!   product metric, with numerically evaluated gradients.
//! * [`r_squared`]: Riemannian coefficient of determination.

use crate::diff::{inv_d_geodesic, DiffRequest, Endpoint};
use crate::error::{Error, Result};
use crate::explog::exp_mat;
use crate::geodesic::{ccs_exp, ccs_log, geodesic_points, GeodesicParams};
use crate::group::{GroupId, GroupPoint, Tangent};
use crate::metric::{frechet_mean, riem_dist2, riem_geodesic};
use nalgebra::{Matrix3, Vector3};

/// One observation: a group element at a normalized time in [0, 1].
#[derive(Clone, Debug)]
pub struct Sample {
    pub point: GroupPoint,
    pub t: f64,
}

impl Sample {
    pub fn new(point: GroupPoint, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Usage(format!("sample time {t} outside [0, 1]")));
        }
        Ok(Sample { point, t })
    }
}

/// Ordered collection of samples from a single group.
#[derive(Clone, Debug)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Usage("dataset needs at least two samples".into()));
        }
        let group = samples[0].point.group();
        if samples.iter().any(|s| s.point.group() != group) {
            return Err(Error::Usage("dataset mixes groups".into()));
        }
        let t0 = samples[0].t;
        if samples.iter().all(|s| s.t == t0) {
            return Err(Error::Usage(
                "dataset needs at least two distinct time values".into(),
            ));
        }
        Ok(Dataset { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn group(&self) -> GroupId {
        self.samples[0].point.group()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Translate every sample point; times are unchanged.
    pub fn translate(&self, h: &GroupPoint, side: crate::group::Side) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(Sample {
                    point: s.point.translate(h, side)?,
                    t: s.t,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { samples })
    }

    /// Default initialization: the samples with minimal and maximal t,
    /// ties broken by dataset order.
    pub fn extremal_samples(&self) -> (GroupPoint, GroupPoint) {
        let mut lo = &self.samples[0];
        let mut hi = &self.samples[0];
        for s in &self.samples[1..] {
            if s.t < lo.t {
                lo = s;
            }
            if s.t > hi.t {
                hi = s;
            }
        }
        (lo.point.clone(), hi.point.clone())
    }
}

/// Initial guess for the geodesic endpoints.
#[derive(Clone, Debug)]
pub enum Init {
    ExtremalSamples,
    Explicit(GroupPoint, GroupPoint),
}

/// Fixed-point solver configuration.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub init: Init,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= 0.0 {
            return Err(Error::Usage("stepsize lambda must be positive".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::Usage("tolerance must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Usage("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Preset used by the knee pipeline (smaller stepsize).
    pub fn knee_preset() -> Self {
        SolverConfig {
            lambda: 0.01,
            ..SolverConfig::default()
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 0.1,
            max_iters: 5000,
            tol: 1e-9,
            init: Init::ExtremalSamples,
        }
    }
}

/// Result of a regression fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: GeodesicParams,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub converged: bool,
}

/// Net force the data exerts on the endpoints: the weighted sums of
/// inverse-differential pullbacks of `Log_{gamma(t_i)}(f_i)`.
///
/// Samples with t_i = 1 contribute zero to the g0 component and t_i = 0
/// zero to the g1 component; the vanishing weights make the skipped inverse
/// differential exact.
pub fn net_force(
    g0: &GroupPoint,
    g1: &GroupPoint,
    data: &Dataset,
) -> Result<(Tangent, Tangent)> {
    let params = GeodesicParams::new(g0.clone(), g1.clone())?;
    let mut v0 = Tangent::zero(g0.clone());
    let mut v1 = Tangent::zero(g1.clone());
    for s in data.samples() {
        let foot = geodesic_points(s.t, g0, g1)?;
        let w = ccs_log(&foot, &s.point)?;
        let w0 = 1.0 - s.t;
        if w0 > 1e-9 {
            let pulled = inv_d_geodesic(&DiffRequest::new(
                params.clone(),
                s.t,
                Endpoint::Start,
                w.clone(),
            )?)?;
            v0 = v0.add(&pulled.scale(w0 * w0))?;
        }
        if s.t > 1e-9 {
            let pulled =
                inv_d_geodesic(&DiffRequest::new(params.clone(), s.t, Endpoint::End, w)?)?;
            v1 = v1.add(&pulled.scale(s.t * s.t))?;
        }
    }
    Ok((v0, v1))
}

/// Auxiliary norm of an endpoint-tangent pair: identity-coordinate product
/// norms of both components, combined in quadrature.
pub fn pair_aux_norm(v0: &Tangent, v1: &Tangent) -> f64 {
    let a = v0.aux_norm();
    let b = v1.aux_norm();
    (a * a + b * b).sqrt()
}

/// Bi-invariant estimator via the net-force fixed-point iteration
/// `g_j <- Exp_{g_j}(lambda v_j)`.
///
/// Non-convergence within the iteration budget is reported through the
/// `converged` flag, not as an error; branch-cut failures abort.
pub fn fit_biinvariant(data: &Dataset, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    let (mut g0, mut g1) = match &cfg.init {
        Init::ExtremalSamples => data.extremal_samples(),
        Init::Explicit(a, b) => (a.clone(), b.clone()),
    };
    let mut norm = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        iterations = k;
        let (v0, v1) = net_force(&g0, &g1, data)?;
        norm = pair_aux_norm(&v0, &v1);
        if norm < cfg.tol {
            return Ok(FitResult {
                params: GeodesicParams::new(g0, g1)?,
                iterations,
                final_update_norm: norm,
                converged: true,
            });
        }
        g0 = ccs_exp(&g0, &v0.scale(cfg.lambda))?;
        g1 = ccs_exp(&g1, &v1.scale(cfg.lambda))?;
        iterations = k + 1;
    }
    Ok(FitResult {
        params: GeodesicParams::new(g0, g1)?,
        iterations,
        final_update_norm: norm,
        converged: false,
    })
}

/// Exponential barycenter: fixed point of `m <- Exp_m(lambda mean(Log_m f_i))`.
pub fn group_mean(points: &[GroupPoint], cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::Usage("group_mean of empty set".into()));
    }
    let mut m = points[0].clone();
    let n = points.len() as f64;
    let mut norm = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        iterations = k;
        let mut acc = Tangent::zero(m.clone());
        for p in points {
            acc = acc.add(&ccs_log(&m, p)?)?;
        }
        let mean = acc.scale(1.0 / n);
        norm = mean.aux_norm();
        if norm < cfg.tol {
            break;
        }
        m = ccs_exp(&m, &mean.scale(cfg.lambda))?;
        iterations = k + 1;
    }
    let converged = norm < cfg.tol;
    Ok(FitResult {
        params: GeodesicParams::new(m.clone(), m)?,
        iterations,
        final_update_norm: norm,
        converged,
    })
}

/// Sum-of-squared-error of the product-metric geodesic model.
pub fn riem_sse(data: &Dataset, g0: &GroupPoint, g1: &GroupPoint) -> Result<f64> {
    let mut e = 0.0;
    for s in data.samples() {
        let p = riem_geodesic(s.t, g0, g1)?;
        e += riem_dist2(&p, &s.point)?;
    }
    Ok(e)
}

fn perturb_se3(g: &GroupPoint, coords: &[f64; 6]) -> GroupPoint {
    // Product-manifold step: rotation factor along R exp(W), translation
    // factor along x + u. The basis is orthonormal for the product metric.
    let w = Tangent::from_identity_coords(GroupId::SO3, &coords[0..3]).unwrap();
    let e = exp_mat(GroupId::SO3, w.mat());
    let r = g.rotation() * Matrix3::from_fn(|i, j| e[(i, j)]);
    let x = Vector3::from_iterator(g.translation()) + Vector3::new(coords[3], coords[4], coords[5]);
    GroupPoint::se3_from_parts(&r, &x).unwrap()
}

/// Riemannian geodesic regression on SE(3): gradient descent on
/// E(g0, g1) = 1/2 sum dist^2(gamma_LC(t_i), f_i) with central-difference
/// gradients along an orthonormal tangent basis and stepsize backtracking.
pub fn fit_riemannian(data: &Dataset, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    if data.group() != GroupId::SE3 {
        return Err(Error::Usage(
            "fit_riemannian expects an SE(3) dataset".into(),
        ));
    }
    let (mut g0, mut g1) = match &cfg.init {
        Init::ExtremalSamples => data.extremal_samples(),
        Init::Explicit(a, b) => (a.clone(), b.clone()),
    };
    let energy = |a: &GroupPoint, b: &GroupPoint| -> Result<f64> {
        Ok(0.5 * riem_sse(data, a, b)?)
    };
    let fd = 1e-5;
    let mut e = energy(&g0, &g1)?;
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        iterations = k;
        // Central differences along the 12 basis directions.
        let mut grad0 = [0.0; 6];
        let mut grad1 = [0.0; 6];
        for i in 0..6 {
            let mut plus = [0.0; 6];
            plus[i] = fd;
            let mut minus = [0.0; 6];
            minus[i] = -fd;
            grad0[i] = (energy(&perturb_se3(&g0, &plus), &g1)?
                - energy(&perturb_se3(&g0, &minus), &g1)?)
                / (2.0 * fd);
            grad1[i] = (energy(&g0, &perturb_se3(&g1, &plus))?
                - energy(&g0, &perturb_se3(&g1, &minus))?)
                / (2.0 * fd);
        }
        grad_norm = grad0
            .iter()
            .chain(grad1.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if grad_norm < cfg.tol {
            return Ok(FitResult {
                params: GeodesicParams::new(g0, g1)?,
                iterations,
                final_update_norm: grad_norm,
                converged: true,
            });
        }
        // Descent step with halving when the energy does not decrease.
        let mut step = cfg.lambda;
        let mut accepted = false;
        for _ in 0..40 {
            let c0 = perturb_se3(&g0, &grad0.map(|x| -step * x));
            let c1 = perturb_se3(&g1, &grad1.map(|x| -step * x));
            let ec = energy(&c0, &c1)?;
            if ec < e {
                g0 = c0;
                g1 = c1;
                e = ec;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations = k + 1;
        if !accepted {
            // Stuck at FD resolution; report the last gradient norm.
            break;
        }
    }
    Ok(FitResult {
        params: GeodesicParams::new(g0, g1)?,
        iterations,
        final_update_norm: grad_norm,
        converged: grad_norm < cfg.tol,
    })
}

/// Riemannian coefficient of determination: 1 - SSE/SSvar with SSvar the
/// spread around the product Frechet mean.
pub fn r_squared(data: &Dataset, params: &GeodesicParams) -> Result<f64> {
    let sse = riem_sse(data, params.g0(), params.g1())?;
    let points: Vec<GroupPoint> = data.samples().iter().map(|s| s.point.clone()).collect();
    let mean = frechet_mean(&points)?;
    let mut ssvar = 0.0;
    for p in &points {
        ssvar += riem_dist2(p, &mean)?;
    }
    if ssvar <= 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    Ok(1.0 - sse / ssvar)
}

/// Closed-form OLS endpoints (intercept at t=0 and value at t=1) for
/// Euclidean data; the independent oracle for the Euclidean reduction.
pub fn ols_endpoints(ts: &[f64], ys: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = ts.len() as f64;
    let dim = ys[0].len();
    let t_mean = ts.iter().sum::<f64>() / n;
    let stt: f64 = ts.iter().map(|t| (t - t_mean) * (t - t_mean)).sum();
    let mut at_zero = vec![0.0; dim];
    let mut at_one = vec![0.0; dim];
    for d in 0..dim {
        let y_mean = ys.iter().map(|y| y[d]).sum::<f64>() / n;
        let sty: f64 = ts
            .iter()
            .zip(ys)
            .map(|(t, y)| (t - t_mean) * (y[d] - y_mean))
            .sum();
        let slope = sty / stt;
        let intercept = y_mean - slope * t_mean;
        at_zero[d] = intercept;
        at_one[d] = intercept + slope;
    }
    (at_zero, at_one)
}
