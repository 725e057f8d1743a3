//! Deterministic, seeded synthetic studies: dataset simulation on SE(3),
//! the equivariance comparison of the two estimators, and the R^2
//! distribution under random right translation.
//!
//! Every procedure is a pure function of (seed, config). Per-stage RNG
//! streams are split off the master seed so adding draws to one stage never
//! shifts another.

use crate::error::{Error, Result};
use crate::explog::group_exp;
use crate::geodesic::{ccs_exp, ccs_log, geodesic, GeodesicParams};
use crate::group::{GroupId, GroupPoint, Side, Tangent};
use crate::metric::{riem_exp, riem_geodesic};
use crate::regression::{
    fit_biinvariant, fit_riemannian, r_squared, Dataset, FitResult, Sample, SolverConfig,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Which geometric structure generates (and fits) the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connection {
    /// Canonical Cartan-Schouten connection (screw-motion geodesics).
    Ccs,
    /// Levi-Civita connection of the SO(3) x R^3 product metric.
    LeviCivita,
}

/// Configuration of the synthetic data model.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_points: usize,
    pub point_variance: f64,
    pub noise_variance: f64,
    pub connection: Connection,
}

impl SynthConfig {
    pub fn new(seed: u64, connection: Connection) -> Self {
        SynthConfig {
            seed,
            n_points: 10,
            point_variance: 1.0,
            noise_variance: 0.01,
            connection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Usage("need at least two time points".into()));
        }
        if self.point_variance < 0.0 || self.noise_variance < 0.0 {
            return Err(Error::Usage("variances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Seeded RNG for one experiment stage.
pub fn stage_rng(seed: u64, stage: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng
}

/// Draw an isotropic normal tangent at `base`: independent coordinates with
/// std sqrt(variance) on the orthonormal Lie-algebra basis, left-translated
/// to the base point.
pub fn sample_tangent<R: Rng>(rng: &mut R, variance: f64, base: &GroupPoint) -> Tangent {
    let std = variance.sqrt();
    let n = base.group().tangent_dim();
    let coords: Vec<f64> = (0..n)
        .map(|_| std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tangent::from_identity_coords(base.group(), &coords)
        .unwrap()
        .d_translate(base, Side::Left)
        .unwrap()
}

/// Simulate the geodesic model: a random truth geodesic perturbed at
/// equidistant times t_i = i/(N-1) by variance `noise_variance` tangents,
/// exponentiated with the configured structure.
pub fn make_dataset(cfg: &SynthConfig) -> Result<(Dataset, GeodesicParams)> {
    cfg.validate()?;
    let e = GroupPoint::identity(GroupId::SE3);
    let mut truth_rng = stage_rng(cfg.seed, 0);
    let g0 = group_exp(&sample_tangent(&mut truth_rng, cfg.point_variance, &e))?;
    let g1 = group_exp(&sample_tangent(&mut truth_rng, cfg.point_variance, &e))?;
    let truth = GeodesicParams::new(g0, g1)?;

    let mut noise_rng = stage_rng(cfg.seed, 1);
    let n = cfg.n_points;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let base = match cfg.connection {
                Connection::Ccs => geodesic(t, &truth)?,
                Connection::LeviCivita => riem_geodesic(t, truth.g0(), truth.g1())?,
            };
            let eps = sample_tangent(&mut noise_rng, cfg.noise_variance, &base);
            let point = match cfg.connection {
                Connection::Ccs => ccs_exp(&base, &eps)?,
                Connection::LeviCivita => riem_exp(&base, &eps)?,
            };
            Sample::new(point, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Dataset::new(samples)?, truth))
}

/// Which estimator an experiment row exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    Biinvariant,
    Riemannian,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Estimator::Biinvariant => write!(f, "biinvariant"),
            Estimator::Riemannian => write!(f, "riemannian"),
        }
    }
}

/// One row of the equivariance study.
#[derive(Clone, Debug)]
pub struct DeviationRow {
    pub index: usize,
    pub side: Side,
    pub estimator: Estimator,
    pub deviation: f64,
    pub converged: bool,
}

fn fit(data: &Dataset, estimator: Estimator, solver: &SolverConfig) -> Result<FitResult> {
    match estimator {
        Estimator::Biinvariant => fit_biinvariant(data, solver),
        Estimator::Riemannian => fit_riemannian(data, solver),
    }
}

/// Deviation between two endpoint pairs under the auxiliary norm of the
/// connecting logs; falls back to the Frobenius distance when a log leaves
/// its branch (far-apart estimates).
pub fn endpoint_deviation(a: &GeodesicParams, b: &GeodesicParams) -> f64 {
    let part = |p: &GroupPoint, q: &GroupPoint| match ccs_log(p, q) {
        Ok(v) => v.aux_norm(),
        Err(_) => (p.mat() - q.mat()).norm(),
    };
    let d0 = part(a.g0(), b.g0());
    let d1 = part(a.g1(), b.g1());
    (d0 * d0 + d1 * d1).sqrt()
}

/// Default solver for each estimator inside the studies. The Riemannian
/// gradient is a central-difference estimate, so its tolerance is looser.
pub fn study_solver(estimator: Estimator) -> SolverConfig {
    match estimator {
        Estimator::Biinvariant => SolverConfig::default(),
        Estimator::Riemannian => SolverConfig {
            tol: 1e-7,
            ..SolverConfig::default()
        },
    }
}

/// For each random translation h: fit the translated data and compare with
/// the translated fit, on both sides. Per-row non-convergence is recorded,
/// not fatal.
pub fn equivariance_study(
    cfg: &SynthConfig,
    n_translations: usize,
    translation_variance: f64,
    estimator: Estimator,
) -> Result<Vec<DeviationRow>> {
    equivariance_study_with(
        cfg,
        n_translations,
        translation_variance,
        estimator,
        &study_solver(estimator),
    )
}

/// [`equivariance_study`] with an explicit solver configuration.
pub fn equivariance_study_with(
    cfg: &SynthConfig,
    n_translations: usize,
    translation_variance: f64,
    estimator: Estimator,
    solver: &SolverConfig,
) -> Result<Vec<DeviationRow>> {
    let (data, _) = make_dataset(cfg)?;
    let base = fit(&data, estimator, solver)?;
    let e = GroupPoint::identity(GroupId::SE3);
    let mut h_rng = stage_rng(cfg.seed, 2);
    let mut rows = Vec::with_capacity(2 * n_translations);
    for index in 0..n_translations {
        let h = group_exp(&sample_tangent(&mut h_rng, translation_variance, &e))?;
        for side in [Side::Left, Side::Right] {
            let translated = data.translate(&h, side)?;
            let fit_t = fit(&translated, estimator, solver)?;
            let expect = base.params.translate(&h, side)?;
            rows.push(DeviationRow {
                index,
                side,
                estimator,
                deviation: endpoint_deviation(&fit_t.params, &expect),
                converged: base.converged && fit_t.converged,
            });
        }
    }
    Ok(rows)
}

/// R^2 values of the Riemannian fit under random right translation.
#[derive(Clone, Debug)]
pub struct R2Histogram {
    /// R^2 of the fit on the untranslated dataset.
    pub untranslated: f64,
    pub values: Vec<f64>,
    /// Rows dropped because R^2 was undefined.
    pub dropped: usize,
}

impl R2Histogram {
    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }
}

/// Fit the Riemannian model on the untranslated dataset and on each of
/// `n_translations` right-translated copies (translations drawn with the
/// given variance) and collect the coefficients of determination.
pub fn r2_histogram(
    cfg: &SynthConfig,
    n_translations: usize,
    translation_variance: f64,
) -> Result<R2Histogram> {
    r2_histogram_with(
        cfg,
        n_translations,
        translation_variance,
        &study_solver(Estimator::Riemannian),
    )
}

/// [`r2_histogram`] with an explicit solver configuration.
pub fn r2_histogram_with(
    cfg: &SynthConfig,
    n_translations: usize,
    translation_variance: f64,
    solver: &SolverConfig,
) -> Result<R2Histogram> {
    let (data, _) = make_dataset(cfg)?;
    let base = fit_riemannian(&data, solver)?;
    let untranslated = r_squared(&data, &base.params)?;
    let e = GroupPoint::identity(GroupId::SE3);
    let mut h_rng = stage_rng(cfg.seed, 3);
    let mut values = Vec::with_capacity(n_translations);
    let mut dropped = 0;
    for _ in 0..n_translations {
        let h = group_exp(&sample_tangent(&mut h_rng, translation_variance, &e))?;
        let translated = data.translate(&h, Side::Right)?;
        let fit_t = fit_riemannian(&translated, solver)?;
        match r_squared(&translated, &fit_t.params) {
            Ok(r2) => values.push(r2),
            Err(Error::UndefinedRSquared) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(R2Histogram {
        untranslated,
        values,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::geodesic;

    #[test]
    fn zero_variance_tangent_is_zero() {
        let e = GroupPoint::identity(GroupId::SE3);
        let mut rng = stage_rng(1, 0);
        let v = sample_tangent(&mut rng, 0.0, &e);
        assert_eq!(v.mat().norm(), 0.0);
    }

    #[test]
    fn sample_tangent_is_deterministic() {
        let e = GroupPoint::identity(GroupId::SE3);
        let a = sample_tangent(&mut stage_rng(7, 4), 1.0, &e);
        let b = sample_tangent(&mut stage_rng(7, 4), 1.0, &e);
        assert_eq!(a.mat(), b.mat());
    }

    #[test]
    fn sample_tangent_empirical_variance() {
        // Monte-Carlo estimate over 1e5 draws: per-coordinate variance within
        // 5% of the target.
        let e = GroupPoint::identity(GroupId::SE3);
        let mut rng = stage_rng(3, 0);
        let target = 0.7;
        let n = 100_000;
        let mut sums = [0.0f64; 6];
        let mut sq = [0.0f64; 6];
        for _ in 0..n {
            let v = sample_tangent(&mut rng, target, &e);
            for (i, c) in v.identity_coords().iter().enumerate() {
                sums[i] += c;
                sq[i] += c * c;
            }
        }
        for i in 0..6 {
            let mean = sums[i] / n as f64;
            let var = sq[i] / n as f64 - mean * mean;
            assert!((var - target).abs() / target < 0.05, "coord {i}: var {var}");
        }
    }

    #[test]
    fn noiseless_dataset_lies_on_truth() {
        let mut cfg = SynthConfig::new(5, Connection::Ccs);
        cfg.noise_variance = 0.0;
        let (data, truth) = make_dataset(&cfg).unwrap();
        for s in data.samples() {
            let on = geodesic(s.t, &truth).unwrap();
            assert!((s.point.mat() - on.mat()).norm() < 1e-12);
        }
    }

    #[test]
    fn time_grid_is_equidistant_with_endpoints() {
        let cfg = SynthConfig::new(5, Connection::Ccs);
        let (data, _) = make_dataset(&cfg).unwrap();
        let ts: Vec<f64> = data.samples().iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 10);
        for (i, t) in ts.iter().enumerate() {
            assert!((t - i as f64 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ccs_and_lc_datasets_share_truth_but_differ() {
        let ccs = SynthConfig::new(11, Connection::Ccs);
        let lc = SynthConfig::new(11, Connection::LeviCivita);
        let (d_ccs, t_ccs) = make_dataset(&ccs).unwrap();
        let (d_lc, t_lc) = make_dataset(&lc).unwrap();
        assert_eq!(t_ccs.g0().mat(), t_lc.g0().mat());
        assert_eq!(t_ccs.g1().mat(), t_lc.g1().mat());
        let diff: f64 = d_ccs
            .samples()
            .iter()
            .zip(d_lc.samples())
            .map(|(a, b)| (a.point.mat() - b.point.mat()).norm())
            .sum();
        assert!(diff > 1e-6);
    }

    #[test]
    fn translate_dataset_round_trip() {
        let cfg = SynthConfig::new(2, Connection::Ccs);
        let (data, _) = make_dataset(&cfg).unwrap();
        let e = GroupPoint::identity(GroupId::SE3);
        let mut rng = stage_rng(2, 9);
        let h = group_exp(&sample_tangent(&mut rng, 1.0, &e)).unwrap();
        // Identity translation is a no-op.
        let same = data.translate(&e, Side::Left).unwrap();
        for (a, b) in data.samples().iter().zip(same.samples()) {
            assert_eq!(a.point.mat(), b.point.mat());
            assert_eq!(a.t, b.t);
        }
        // h then h^-1 restores the dataset.
        for side in [Side::Left, Side::Right] {
            let back = data
                .translate(&h, side)
                .unwrap()
                .translate(&h.inverse(), side)
                .unwrap();
            for (a, b) in data.samples().iter().zip(back.samples()) {
                assert!((a.point.mat() - b.point.mat()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn commuting_translations_are_order_independent() {
        let cfg = SynthConfig::new(2, Connection::Ccs);
        let (data, _) = make_dataset(&cfg).unwrap();
        // Left and right translation commute as maps by associativity.
        let e = GroupPoint::identity(GroupId::SE3);
        let mut rng = stage_rng(2, 10);
        let h = group_exp(&sample_tangent(&mut rng, 1.0, &e)).unwrap();
        let a = data
            .translate(&h, Side::Left)
            .unwrap()
            .translate(&h, Side::Right)
            .unwrap();
        let b = data
            .translate(&h, Side::Right)
            .unwrap()
            .translate(&h, Side::Left)
            .unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert!((x.point.mat() - y.point.mat()).norm() < 1e-12);
        }
    }

    #[test]
    fn biinvariant_equivariance_rows_are_tiny() {
        let cfg = SynthConfig::new(7, Connection::Ccs);
        let rows = equivariance_study(&cfg, 3, 1.0, Estimator::Biinvariant).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert!(row.converged);
            assert!(row.deviation < 1e-6, "deviation {}", row.deviation);
        }
    }

    #[test]
    fn study_is_deterministic() {
        let cfg = SynthConfig::new(9, Connection::Ccs);
        let a = equivariance_study(&cfg, 2, 1.0, Estimator::Biinvariant).unwrap();
        let b = equivariance_study(&cfg, 2, 1.0, Estimator::Biinvariant).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.deviation.to_bits(), y.deviation.to_bits());
        }
    }
}
