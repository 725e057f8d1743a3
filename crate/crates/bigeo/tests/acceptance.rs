//! Acceptance gate: seven end-to-end criteria, one pass/fail line each.
//!
//! Every check prints `PASS <name>` on success; a failing check prints
//! `FAIL <name>: <reason>` before panicking, so the transcript always shows
//! the verdict for the criterion that ran.

use bigeo::experiments::{
    equivariance_study, make_dataset, r2_histogram, Connection, Estimator, SynthConfig,
};
use bigeo::knee::{generate_fixture, knee_regression, load_records};
use bigeo::regression::ols_endpoints;
use bigeo::testutil::{random_point, random_tangent_at, seeded_rng};
use bigeo::{
    ccs_exp, ccs_log, d_geodesic, fit_biinvariant, geodesic, group_exp, group_log,
    inv_d_geodesic, Dataset, DiffRequest, Endpoint, GeodesicParams, GroupId, GroupPoint, Sample,
    Side, SolverConfig, Tangent,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::time::{Duration, Instant};

fn report(name: &str, check: impl FnOnce() -> Result<(), String>) {
    match check() {
        Ok(()) => println!("PASS {name}"),
        Err(why) => {
            println!("FAIL {name}: {why}");
            panic!("{name}: {why}");
        }
    }
}

fn ensure(cond: bool, why: impl Fn() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn ensure_time(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= budget, || {
        format!("{what} took {took:?}, budget {budget:?}")
    })
}

/// Criterion 1: on R^3 the estimator reduces to ordinary least squares.
#[test]
fn acceptance_1_euclidean_reduction() {
    report("criterion 1: Euclidean reduction to OLS (20 seeds, 1e-8)", || {
        let start = Instant::now();
        for seed in 0..20u64 {
            let mut rng = seeded_rng(1000 + seed);
            let n = 10;
            let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let ys: Vec<Vec<f64>> = ts
                .iter()
                .map(|t| {
                    (0..3)
                        .map(|k| {
                            (k + 1) as f64 * t + 0.3 * rng.sample::<f64, _>(StandardNormal)
                        })
                        .collect()
                })
                .collect();
            let samples = ts
                .iter()
                .zip(&ys)
                .map(|(t, y)| {
                    Sample::new(GroupPoint::euclidean_from_vec(y).unwrap(), *t).unwrap()
                })
                .collect();
            let data = Dataset::new(samples).unwrap();
            let fit = fit_biinvariant(&data, &SolverConfig::default())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(fit.converged, || format!("seed {seed}: did not converge"))?;
            let (b0, b1) = ols_endpoints(&ts, &ys);
            let g0 = fit.params.g0().translation();
            let g1 = fit.params.g1().translation();
            for k in 0..3 {
                ensure((g0[k] - b0[k]).abs() < 1e-8, || {
                    format!("seed {seed}: g0[{k}] off by {}", (g0[k] - b0[k]).abs())
                })?;
                ensure((g1[k] - b1[k]).abs() < 1e-8, || {
                    format!("seed {seed}: g1[{k}] off by {}", (g1[k] - b1[k]).abs())
                })?;
            }
        }
        ensure_time(start, Duration::from_secs(1), "20 Euclidean fits")
    });
}

/// Criterion 2: the bi-invariant estimator is equivariant under left and
/// right translation to finite-precision accuracy.
#[test]
fn acceptance_2_biinvariant_equivariance() {
    report(
        "criterion 2: bi-invariant equivariance (20 h per side, < 1e-6)",
        || {
            let start = Instant::now();
            let cfg = SynthConfig::new(0, Connection::Ccs);
            let rows = equivariance_study(&cfg, 20, 1.0, Estimator::Biinvariant)
                .map_err(|e| e.to_string())?;
            ensure(rows.len() == 40, || format!("expected 40 rows, got {}", rows.len()))?;
            for row in &rows {
                ensure(row.converged, || {
                    format!("row {} ({}) did not converge", row.index, row.side)
                })?;
                ensure(row.deviation < 1e-6, || {
                    format!(
                        "row {} ({}): deviation {} >= 1e-6",
                        row.index, row.side, row.deviation
                    )
                })?;
            }
            ensure_time(start, Duration::from_secs(30), "equivariance study")
        },
    );
}

/// Criterion 3: the Riemannian baseline visibly breaks right-equivariance.
#[test]
fn acceptance_3_riemannian_variance_witness() {
    report(
        "criterion 3: Riemannian right-translation deviation witness (> 1e-2)",
        || {
            let cfg = SynthConfig::new(0, Connection::LeviCivita);
            let rows = equivariance_study(&cfg, 20, 100.0, Estimator::Riemannian)
                .map_err(|e| e.to_string())?;
            let max = rows
                .iter()
                .filter(|r| r.side == Side::Right)
                .map(|r| r.deviation)
                .fold(0.0f64, f64::max);
            ensure(max > 1e-2, || {
                format!("largest right-translation deviation {max} <= 1e-2")
            })
        },
    );
}

/// Criterion 4: the untranslated Riemannian fit is good (R^2 >= 0.9) while
/// the right-translated histogram contains clearly degraded instances.
#[test]
fn acceptance_4_r_squared_reproduction() {
    report(
        "criterion 4: R^2 >= 0.9 untranslated (9/10 seeds) and degraded tail",
        || {
            let start = Instant::now();
            let mut good = 0;
            for seed in 0..10u64 {
                let cfg = SynthConfig::new(seed, Connection::LeviCivita);
                let hist = r2_histogram(&cfg, 0, 100.0).map_err(|e| e.to_string())?;
                if hist.untranslated >= 0.9 {
                    good += 1;
                }
            }
            ensure(good >= 9, || {
                format!("only {good}/10 seeds reached R^2 >= 0.9")
            })?;
            let cfg = SynthConfig::new(0, Connection::LeviCivita);
            let hist = r2_histogram(&cfg, 100, 100.0).map_err(|e| e.to_string())?;
            let min = hist.min().ok_or("empty histogram")?;
            ensure(min < hist.untranslated - 0.1, || {
                format!(
                    "histogram min {min} not below untranslated {} - 0.1",
                    hist.untranslated
                )
            })?;
            ensure_time(start, Duration::from_secs(300), "R^2 study")
        },
    );
}

/// Criterion 5: calculus invariants over >= 1000 random instances.
#[test]
fn acceptance_5_calculus_invariants() {
    report("criterion 5: calculus invariant suite (>= 1000 instances)", || {
        let mut rng = seeded_rng(500);
        let mut instances = 0usize;
        let groups = [GroupId::SO3, GroupId::SE3];

        // Group exp/log round trip within 1e-10.
        for _ in 0..150 {
            for group in groups {
                let g = random_point(&mut rng, group, 0.7);
                let v = group_log(&g).map_err(|e| e.to_string())?;
                let back = group_exp(&v).map_err(|e| e.to_string())?;
                ensure((back.mat() - g.mat()).norm() < 1e-10, || {
                    "exp/log round trip exceeded 1e-10".into()
                })?;
                instances += 1;
            }
        }

        // CCS Exp/Log round trip within 1e-9.
        for _ in 0..100 {
            for group in groups {
                let g = random_point(&mut rng, group, 0.7);
                let f = random_point(&mut rng, group, 0.7);
                let v = match ccs_log(&g, &f) {
                    Ok(v) => v,
                    Err(_) => continue, // branch cut; not an instance
                };
                let back = ccs_exp(&g, &v).map_err(|e| e.to_string())?;
                ensure((back.mat() - f.mat()).norm() < 1e-9, || {
                    "CCS Exp/Log round trip exceeded 1e-9".into()
                })?;
                instances += 1;
            }
        }

        // Left and right one-parameter forms of Exp_g agree within 1e-10.
        for _ in 0..100 {
            for group in groups {
                let g = random_point(&mut rng, group, 0.7);
                let v = random_tangent_at(&mut rng, &g, 0.7);
                let left_arg = v
                    .d_translate(&g.inverse(), Side::Left)
                    .map_err(|e| e.to_string())?;
                let right_arg = v
                    .d_translate(&g.inverse(), Side::Right)
                    .map_err(|e| e.to_string())?;
                let lhs = g
                    .compose(&group_exp(&left_arg).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let rhs = group_exp(&right_arg)
                    .map_err(|e| e.to_string())?
                    .compose(&g)
                    .map_err(|e| e.to_string())?;
                ensure((lhs.mat() - rhs.mat()).norm() < 1e-10, || {
                    "left/right exponential forms disagree beyond 1e-10".into()
                })?;
                let direct = ccs_exp(&g, &v).map_err(|e| e.to_string())?;
                ensure((lhs.mat() - direct.mat()).norm() < 1e-10, || {
                    "Exp_g disagrees with its translated form beyond 1e-10".into()
                })?;
                instances += 1;
            }
        }

        // Geodesic triple equality within 1e-10: gamma(t), the exponential of
        // the scaled log, and the group-translated closed form.
        for _ in 0..60 {
            for group in groups {
                let g0 = random_point(&mut rng, group, 0.7);
                let g1 = random_point(&mut rng, group, 0.7);
                let params = match GeodesicParams::new(g0.clone(), g1.clone()) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let t: f64 = rng.gen_range(0.0..1.0);
                let a = geodesic(t, &params).map_err(|e| e.to_string())?;
                let v = ccs_log(&g0, &g1).map_err(|e| e.to_string())?;
                let b = ccs_exp(&g0, &v.scale(t)).map_err(|e| e.to_string())?;
                let w = group_log(&g0.inverse().compose(&g1).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let c = g0
                    .compose(&group_exp(&w.scale(t)).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                ensure(
                    (a.mat() - b.mat()).norm() < 1e-10 && (a.mat() - c.mat()).norm() < 1e-10,
                    || "geodesic triple equality exceeded 1e-10".into(),
                )?;
                instances += 1;
            }
        }

        // Geodesic equivariance under left/right translation within 1e-10.
        for _ in 0..50 {
            for group in groups {
                let g0 = random_point(&mut rng, group, 0.7);
                let g1 = random_point(&mut rng, group, 0.7);
                let h = random_point(&mut rng, group, 0.7);
                let params = match GeodesicParams::new(g0, g1) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let t: f64 = rng.gen_range(0.0..1.0);
                let base = geodesic(t, &params).map_err(|e| e.to_string())?;
                for side in [Side::Left, Side::Right] {
                    let translated = params.translate(&h, side).map_err(|e| e.to_string())?;
                    let lhs = geodesic(t, &translated).map_err(|e| e.to_string())?;
                    let rhs = base.translate(&h, side).map_err(|e| e.to_string())?;
                    ensure((lhs.mat() - rhs.mat()).norm() < 1e-10, || {
                        "geodesic equivariance exceeded 1e-10".into()
                    })?;
                    instances += 1;
                }
            }
        }

        // Boundary-map differential vs a 5-point central-difference oracle,
        // relative error 1e-6.
        for _ in 0..40 {
            for group in groups {
                for endpoint in [Endpoint::Start, Endpoint::End] {
                    let g0 = random_point(&mut rng, group, 0.7);
                    let g1 = random_point(&mut rng, group, 0.7);
                    let params = match GeodesicParams::new(g0, g1) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    let t0 = match endpoint {
                        Endpoint::Start => rng.gen_range(0.05..0.9),
                        Endpoint::End => rng.gen_range(0.1..0.95),
                    };
                    let varied = match endpoint {
                        Endpoint::Start => params.g0().clone(),
                        Endpoint::End => params.g1().clone(),
                    };
                    let v = random_tangent_at(&mut rng, &varied, 1.0);
                    let req = DiffRequest::new(params.clone(), t0, endpoint, v.clone())
                        .map_err(|e| e.to_string())?;
                    let ad = d_geodesic(&req).map_err(|e| e.to_string())?;
                    let fd = fd_boundary(&params, t0, endpoint, &v)?;
                    let rel = (ad.mat() - &fd).norm() / fd.norm().max(1e-12);
                    ensure(rel < 1e-6, || {
                        format!("differential vs finite differences: rel {rel}")
                    })?;
                    instances += 1;
                }
            }
        }

        // Inverse differential composes with the differential to the
        // identity, relative error 1e-6.
        for _ in 0..40 {
            for group in groups {
                for endpoint in [Endpoint::Start, Endpoint::End] {
                    let g0 = random_point(&mut rng, group, 0.7);
                    let g1 = random_point(&mut rng, group, 0.7);
                    let params = match GeodesicParams::new(g0, g1) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    let t0 = match endpoint {
                        Endpoint::Start => rng.gen_range(0.05..0.9),
                        Endpoint::End => rng.gen_range(0.1..0.95),
                    };
                    let varied = match endpoint {
                        Endpoint::Start => params.g0().clone(),
                        Endpoint::End => params.g1().clone(),
                    };
                    let v = random_tangent_at(&mut rng, &varied, 1.0);
                    let fwd = DiffRequest::new(params.clone(), t0, endpoint, v.clone())
                        .map_err(|e| e.to_string())?;
                    let w = d_geodesic(&fwd).map_err(|e| e.to_string())?;
                    let inv = DiffRequest::new(params.clone(), t0, endpoint, w)
                        .map_err(|e| e.to_string())?;
                    let back = inv_d_geodesic(&inv).map_err(|e| e.to_string())?;
                    let rel = (back.mat() - v.mat()).norm() / v.mat().norm().max(1e-12);
                    ensure(rel < 1e-6, || {
                        format!("inverse composition identity: rel {rel}")
                    })?;
                    instances += 1;
                }
            }
        }

        ensure(instances >= 1000, || {
            format!("only {instances} instances exercised")
        })
    });
}

/// Central-difference oracle for the boundary-map differential, built on the
/// public API only: the varied endpoint moves along p exp(s xi).
fn fd_boundary(
    params: &GeodesicParams,
    t0: f64,
    endpoint: Endpoint,
    v: &Tangent,
) -> Result<DMatrix<f64>, String> {
    let varied = match endpoint {
        Endpoint::Start => params.g0().clone(),
        Endpoint::End => params.g1().clone(),
    };
    let xi = v
        .d_translate(&varied.inverse(), Side::Left)
        .map_err(|e| e.to_string())?;
    let h = 1e-4;
    let eval = |s: f64| -> Result<DMatrix<f64>, String> {
        let step = group_exp(&xi.scale(s)).map_err(|e| e.to_string())?;
        let p = varied.compose(&step).map_err(|e| e.to_string())?;
        let moved = match endpoint {
            Endpoint::Start => GeodesicParams::new(p, params.g1().clone()),
            Endpoint::End => GeodesicParams::new(params.g0().clone(), p),
        }
        .map_err(|e| e.to_string())?;
        Ok(geodesic(t0, &moved).map_err(|e| e.to_string())?.mat().clone())
    };
    Ok((eval(-2.0 * h)? - eval(2.0 * h)? + (eval(h)? - eval(-h)?) * 8.0) / (12.0 * h))
}

/// Criterion 6: the fixed-point solver recovers noiseless truth and
/// converges on noisy data.
#[test]
fn acceptance_6_solver_contract() {
    report(
        "criterion 6: noiseless recovery 1e-7, noisy convergence 19/20 seeds",
        || {
            let mut noiseless_cfg = SynthConfig::new(0, Connection::Ccs);
            noiseless_cfg.noise_variance = 0.0;
            let (data, truth) = make_dataset(&noiseless_cfg).map_err(|e| e.to_string())?;
            let cfg = SolverConfig::default();
            let fit = fit_biinvariant(&data, &cfg).map_err(|e| e.to_string())?;
            ensure(fit.converged, || "noiseless fit did not converge".into())?;
            ensure(fit.final_update_norm < cfg.tol, || {
                format!("net-force norm {} >= tol {}", fit.final_update_norm, cfg.tol)
            })?;
            let d0 = (fit.params.g0().mat() - truth.g0().mat()).norm();
            let d1 = (fit.params.g1().mat() - truth.g1().mat()).norm();
            ensure(d0 < 1e-7 && d1 < 1e-7, || {
                format!("truth recovery off by ({d0}, {d1})")
            })?;

            let mut converged = 0;
            for seed in 0..20u64 {
                let noisy = SynthConfig::new(seed, Connection::Ccs);
                let (data, _) = make_dataset(&noisy).map_err(|e| e.to_string())?;
                let fit = fit_biinvariant(&data, &cfg).map_err(|e| e.to_string())?;
                if fit.converged {
                    converged += 1;
                }
            }
            ensure(converged >= 19, || {
                format!("only {converged}/20 noisy seeds converged")
            })
        },
    );
}

/// Criterion 7: the knee pipeline recovers strictly decreasing joint-space
/// translational norms on the implanted-narrowing fixture.
#[test]
fn acceptance_7_knee_pipeline() {
    report(
        "criterion 7: knee fixture norms strictly decreasing over grades",
        || {
            let start = Instant::now();
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let manifest = generate_fixture(dir.path(), 0, 10).map_err(|e| e.to_string())?;
            let records = load_records(&manifest).map_err(|e| e.to_string())?;
            ensure(records.len() == 50, || {
                format!("expected 50 records, got {}", records.len())
            })?;
            let table = knee_regression(&records, &SolverConfig::knee_preset())
                .map_err(|e| e.to_string())?;
            ensure(table.fit.converged, || "knee fit did not converge".into())?;
            let norms: Vec<f64> = table.rows.iter().map(|r| r.translational_norm).collect();
            ensure(norms.len() == 5, || format!("expected 5 rows, got {}", norms.len()))?;
            for w in norms.windows(2) {
                ensure(w[1] < w[0], || {
                    format!("norms not strictly decreasing: {norms:?}")
                })?;
            }
            ensure_time(start, Duration::from_secs(60), "knee pipeline")
        },
    );
}
