//! Acceptance suite: every exit criterion as one test, so the harness
//! prints one pass/fail line per criterion. The catalog sweep over all
//! pairs with dim M <= 60 is shared across criteria and computed once.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;

use brf_core::flow::{grf_rhs_raw, invariant_tensors, run_flow, FlowExit, FlowMethod, FlowState};
use brf_core::lie::{build_so, build_su};
use brf_core::oracle::{bismut_nomizu, curvature_max, ReductiveModel};
use brf_core::orbit::TangentModel;
use brf_core::report::{run_verification, Tolerances, VerificationReport};
use brf_core::symmetric::{catalog_entries, PairId};
use brf_core::tolerances;

const MAX_DIM: usize = 60;

struct PairData {
    id: PairId,
    report: VerificationReport,
    relation_residual: f64,
    rank_ok: bool,
    elapsed_seconds: f64,
}

struct CatalogData {
    pairs: Vec<PairData>,
}

fn catalog() -> &'static CatalogData {
    static DATA: OnceLock<CatalogData> = OnceLock::new();
    DATA.get_or_init(|| {
        let tols = Tolerances::default();
        let pairs = catalog_entries(MAX_DIM)
            .into_iter()
            .map(|id| {
                let start = Instant::now();
                let report = run_verification(&id, 0, &tols)
                    .unwrap_or_else(|e| panic!("verification of {id} failed to run: {e}"));
                let elapsed_seconds = start.elapsed().as_secs_f64();
                let pair = id.build().expect("catalog pair builds");
                PairData {
                    id,
                    report,
                    relation_residual: pair.relation_residual(),
                    rank_ok: pair.rank_c() == pair.algebra().rank(),
                    elapsed_seconds,
                }
            })
            .collect();
        CatalogData { pairs }
    })
}

fn assert_criterion(number: u32, label: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("PASS criterion {number}: {label}");
    } else {
        println!("FAIL criterion {number}: {label}");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {number} failed: {failures:?}");
    }
}

#[test]
fn criterion_01_bismut_ricci_flatness() {
    let data = catalog();
    let mut failures = Vec::new();

    // the sweep must cover at least the stated slice of the catalog
    let required: Vec<PairId> = {
        let mut ids: Vec<PairId> = Vec::new();
        for n in 2..=4u32 {
            for p in 1..n {
                ids.push(PairId::Aiii { n, p });
            }
        }
        ids.push(PairId::BdiOdd { n: 2, p: 1 });
        ids.push(PairId::BdiOdd { n: 3, p: 1 });
        ids.push(PairId::BdiOdd { n: 4, p: 1 });
        ids.push(PairId::BdiEven { n: 4, p: 1 });
        ids.push(PairId::Diii { n: 3 });
        ids.push(PairId::Diii { n: 4 });
        ids.push(PairId::Ci { n: 3 });
        ids.push(PairId::Cii { p: 1, q: 1 });
        ids
    };
    for id in required {
        if !data.pairs.iter().any(|p| p.id == id) {
            failures.push(format!("{id} missing from the sweep"));
        }
    }

    for p in &data.pairs {
        let r = p.report.residuals.ricci_max.0;
        if r > tolerances::RICCI_MAX {
            failures.push(format!("{}: max |Ric| = {r:.3e}", p.id));
        }
        if p.elapsed_seconds > tolerances::PAIR_RUNTIME_BUDGET {
            failures.push(format!(
                "{}: verification took {:.2} s (budget {} s)",
                p.id,
                p.elapsed_seconds,
                tolerances::PAIR_RUNTIME_BUDGET
            ));
        }
    }
    assert_criterion(
        1,
        "Bismut Ricci tensor vanishes on every catalog pair (dim M <= 60) within runtime budget",
        failures,
    );
}

#[test]
fn criterion_02_minimality() {
    let failures = catalog()
        .pairs
        .iter()
        .filter(|p| p.report.residuals.mean_curvature.0 > tolerances::MEAN_CURVATURE)
        .map(|p| {
            format!(
                "{}: |mu| = {:.3e}",
                p.id, p.report.residuals.mean_curvature.0
            )
        })
        .collect();
    assert_criterion(2, "mean curvature vanishes (minimal orbit)", failures);
}

#[test]
fn criterion_03_nonflatness() {
    let data = catalog();
    let mut failures = Vec::new();
    for p in &data.pairs {
        let w = p.report.witnesses.nonflat_value.0;
        if w > -tolerances::NONFLAT_FLOOR {
            failures.push(format!("{}: witness value {w:.3e}", p.id));
        }
    }
    let su2 = data
        .pairs
        .iter()
        .find(|p| p.id == PairId::Aiii { n: 2, p: 1 })
        .expect("5-dimensional pair present");
    let w = su2.report.witnesses.nonflat_value.0;
    if (w - (-0.25)).abs() > 1e-10 {
        failures.push(format!("AIII:n=2,p=1 witness {w:.12e} != -0.25"));
    }
    assert_criterion(
        3,
        "curvature witness is strictly negative; -0.25 on the 5-dimensional pair",
        failures,
    );
}

#[test]
fn criterion_04_oracle_equivalence() {
    let failures = catalog()
        .pairs
        .iter()
        .filter(|p| {
            p.report.residuals.oracle_curvature_gap.0 > tolerances::ORACLE_CURVATURE_GAP
                || p.report.residuals.oracle_ricci_gap.0 > tolerances::ORACLE_RICCI_GAP
        })
        .map(|p| {
            format!(
                "{}: curvature gap {:.3e}, Ricci gap {:.3e}",
                p.id,
                p.report.residuals.oracle_curvature_gap.0,
                p.report.residuals.oracle_ricci_gap.0
            )
        })
        .collect();
    assert_criterion(
        4,
        "operator-route curvature and Ricci agree entrywise with the closed forms",
        failures,
    );
}

#[test]
fn criterion_05_flat_models() {
    let mut failures = Vec::new();
    for alg in [build_su(2).unwrap(), build_su(3).unwrap(), build_so(5).unwrap()] {
        let model = ReductiveModel::flat_group(&alg).expect("flat model builds");
        let op = bismut_nomizu(&model, model.metric(), model.h_tensor()).expect("operator");
        let max_r = curvature_max(&model, &op, model.metric());
        if max_r > tolerances::FLAT_CURVATURE {
            failures.push(format!("{}: max |R| = {max_r:.3e}", alg.name()));
        }
    }
    assert_criterion(
        5,
        "bi-invariant models with the standard 3-form are Bismut flat",
        failures,
    );
}

#[test]
fn criterion_06_generic_ricci_identity() {
    let failures = catalog()
        .pairs
        .iter()
        .filter(|p| {
            p.report.residuals.ricci_identity.0 > tolerances::RICCI_IDENTITY
                || p.report.residuals.delta_h.0 > tolerances::DELTA_H
                || p.report.residuals.closedness.0 > tolerances::CLOSEDNESS
        })
        .map(|p| {
            format!(
                "{}: identity {:.3e}, delta H {:.3e}, dH {:.3e}",
                p.id,
                p.report.residuals.ricci_identity.0,
                p.report.residuals.delta_h.0,
                p.report.residuals.closedness.0
            )
        })
        .collect();
    assert_criterion(
        6,
        "Ric = Ric_g - H^2/4 - (delta H)/2 closes; H is harmonic and closed",
        failures,
    );
}

#[test]
fn criterion_07_nonparallel_torsion() {
    let failures = catalog()
        .pairs
        .iter()
        .filter(|p| {
            p.report.witnesses.cyclic_defect.0.abs() < tolerances::CYCLIC_DEFECT_FLOOR
                || p.report.witnesses.nabla_h_max.0 < tolerances::TORSION_GRADIENT_FLOOR
        })
        .map(|p| {
            format!(
                "{}: cyclic defect {:.3e}, max |DH| {:.3e}",
                p.id,
                p.report.witnesses.cyclic_defect.0,
                p.report.witnesses.nabla_h_max.0
            )
        })
        .collect();
    assert_criterion(
        7,
        "torsion is not parallel: cyclic defect and covariant gradient stay away from zero",
        failures,
    );
}

#[test]
fn criterion_08_flow_fixed_point() {
    let data = catalog();
    let mut failures = Vec::new();
    for p in &data.pairs {
        let r = p.report.residuals.flow_fixed_point.0;
        if r > tolerances::FLOW_FIXED_POINT {
            failures.push(format!("{}: |rhs| = {r:.3e}", p.id));
        }
    }
    // 100 rk4 steps of 1e-3 from the canonical pair must not drift
    for id_str in ["AIII:n=2,p=1", "AIII:n=3,p=1", "CII:p=1,q=1"] {
        let id: PairId = id_str.parse().unwrap();
        let pair = id.build().unwrap();
        let tangent = TangentModel::new(pair).unwrap();
        let model = ReductiveModel::from_tangent(&tangent).unwrap();
        let inv = invariant_tensors(&model).unwrap();
        let m = model.m_dim();
        let initial = FlowState {
            time: 0.0,
            metric: model.metric().clone(),
            two_form: DMatrix::zeros(m, m),
        };
        let trace = run_flow(
            &model,
            model.h_tensor(),
            &inv,
            initial,
            1e-3,
            100,
            FlowMethod::Rk4,
        )
        .unwrap();
        if trace.exit != FlowExit::Completed {
            failures.push(format!("{id_str}: flow exited early ({:?})", trace.exit));
            continue;
        }
        let last = trace.states.last().unwrap();
        let drift = (&last.metric - model.metric())
            .amax()
            .max(last.two_form.amax());
        if drift > tolerances::FLOW_DRIFT {
            failures.push(format!("{id_str}: drift {drift:.3e} after 100 rk4 steps"));
        }
    }
    assert_criterion(
        8,
        "generalized Ricci flow holds the canonical pair fixed",
        failures,
    );
}

#[test]
fn criterion_09_structural_hygiene() {
    let data = catalog();
    let mut failures = Vec::new();
    for p in &data.pairs {
        if p.report.residuals.jacobi.0 > tolerances::JACOBI {
            failures.push(format!(
                "{}: Jacobi {:.3e}",
                p.id, p.report.residuals.jacobi.0
            ));
        }
        if p.report.residuals.ad_invariance.0 > tolerances::AD_INVARIANCE {
            failures.push(format!(
                "{}: ad-invariance {:.3e}",
                p.id, p.report.residuals.ad_invariance.0
            ));
        }
        if !p.rank_ok {
            failures.push(format!("{}: rank(c) != rank(g)", p.id));
        }
        if p.relation_residual > 1e-10 {
            failures.push(format!(
                "{}: bracket relations {:.3e}",
                p.id, p.relation_residual
            ));
        }
    }
    assert_criterion(
        9,
        "Jacobi, Killing ad-invariance, rank equality, symmetric-pair relations",
        failures,
    );
}

#[test]
fn criterion_10_torsion_form_is_nonzero() {
    let failures = catalog()
        .pairs
        .iter()
        .filter(|p| p.report.witnesses.h_max.0 < tolerances::H_NORM_FLOOR)
        .map(|p| format!("{}: max |H| = {:.3e}", p.id, p.report.witnesses.h_max.0))
        .collect();
    assert_criterion(10, "the restricted 3-form never vanishes", failures);
}

#[test]
fn catalog_census_matches_dimension_bound() {
    let data = catalog();
    assert!(
        data.pairs.len() >= 30,
        "expected a substantial catalog at dim M <= 60, got {}",
        data.pairs.len()
    );
    for p in &data.pairs {
        assert!(p.report.dims.m <= MAX_DIM);
        assert!(p.report.passed(), "{} failed overall: {:?}", p.id, p.report.checks);
    }
}

#[test]
fn grf_rhs_raw_is_the_reported_flow_residual() {
    // spot check that the reported residual is reproducible from the parts
    let id: PairId = "AIII:n=2,p=1".parse().unwrap();
    let pair = id.build().unwrap();
    let tangent = TangentModel::new(pair).unwrap();
    let model = ReductiveModel::from_tangent(&tangent).unwrap();
    let m = model.m_dim();
    let b0 = DMatrix::zeros(m, m);
    let (rg, rb) = grf_rhs_raw(&model, model.h_tensor(), model.metric(), &b0).unwrap();
    let report = run_verification(&id, 0, &Tolerances::default()).unwrap();
    let direct = rg.amax().max(rb.amax());
    assert!((report.residuals.flow_fixed_point.0 - direct).abs() <= 1e-15);
}
