//! Verification driver and machine-readable reports.
//!
//! One report per catalog pair, with a fixed key order and floats emitted
//! at 17 significant digits so identical inputs produce byte-identical
//! output regardless of worker count.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{CoreError, Result};
use crate::flow::{grf_rhs_raw, FlowMethod, FlowTrace};
use crate::oracle::{bismut_nomizu, covariant_h_max, curvature_gap, ricci_identity, ricci_nomizu, ReductiveModel};
use crate::orbit::{TangentModel, TangentVector};
use crate::symmetric::{catalog_entries, PairId};
use crate::tolerances;

/// f64 wrapper serialized as a JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite value in report"));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Dims {
    pub d: usize,
    pub k: usize,
    pub q: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub jacobi: F17,
    pub ad_invariance: F17,
    pub metric_blocks: F17,
    pub mean_curvature: F17,
    pub ricci_max: F17,
    pub oracle_curvature_gap: F17,
    pub oracle_ricci_gap: F17,
    pub closedness: F17,
    pub delta_h: F17,
    pub ricci_identity: F17,
    pub flow_fixed_point: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub nonflat_s: usize,
    pub nonflat_t: usize,
    pub nonflat_value: F17,
    /// Squared xi-frame coefficients of [E_s, E_t]; the witness value is
    /// -4 times this.
    pub nonflat_frame_norm_sq: F17,
    /// -B([E_s, E_t], [E_s, E_t]); reported alongside because the norm
    /// convention differs across conventions and is not reconciled here.
    pub nonflat_killing_norm_sq: F17,
    pub cyclic_defect: F17,
    pub nabla_h_max: F17,
    pub h_max: F17,
}

/// Per-check tolerances; every residual must stay at or below its bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub jacobi: F17,
    pub ad_invariance: F17,
    pub metric_blocks: F17,
    pub mean_curvature: F17,
    pub ricci_max: F17,
    pub oracle_curvature_gap: F17,
    pub oracle_ricci_gap: F17,
    pub closedness: F17,
    pub delta_h: F17,
    pub ricci_identity: F17,
    pub flow_fixed_point: F17,
    pub nonflat_floor: F17,
    pub cyclic_defect_floor: F17,
    pub torsion_gradient_floor: F17,
    pub h_norm_floor: F17,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jacobi: F17(tolerances::JACOBI),
            ad_invariance: F17(tolerances::AD_INVARIANCE),
            metric_blocks: F17(tolerances::METRIC_BLOCKS),
            mean_curvature: F17(tolerances::MEAN_CURVATURE),
            ricci_max: F17(tolerances::RICCI_MAX),
            oracle_curvature_gap: F17(tolerances::ORACLE_CURVATURE_GAP),
            oracle_ricci_gap: F17(tolerances::ORACLE_RICCI_GAP),
            closedness: F17(tolerances::CLOSEDNESS),
            delta_h: F17(tolerances::DELTA_H),
            ricci_identity: F17(tolerances::RICCI_IDENTITY),
            flow_fixed_point: F17(tolerances::FLOW_FIXED_POINT),
            nonflat_floor: F17(tolerances::NONFLAT_FLOOR),
            cyclic_defect_floor: F17(tolerances::CYCLIC_DEFECT_FLOOR),
            torsion_gradient_floor: F17(tolerances::TORSION_GRADIENT_FLOOR),
            h_norm_floor: F17(tolerances::H_NORM_FLOOR),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    pub jacobi: &'static str,
    pub ad_invariance: &'static str,
    pub metric_blocks: &'static str,
    pub mean_curvature: &'static str,
    pub ricci_max: &'static str,
    pub oracle_curvature_gap: &'static str,
    pub oracle_ricci_gap: &'static str,
    pub closedness: &'static str,
    pub delta_h: &'static str,
    pub ricci_identity: &'static str,
    pub flow_fixed_point: &'static str,
    pub nonflat_witness: &'static str,
    pub cyclic_defect: &'static str,
    pub torsion_gradient: &'static str,
    pub h_norm: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub pair_id: String,
    pub seed: u64,
    pub dims: Dims,
    pub residuals: Residuals,
    pub witnesses: Witnesses,
    pub tolerances: Tolerances,
    pub checks: Checks,
    pub verdict: &'static str,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Run the full verification suite on one catalog pair.
pub fn run_verification(id: &PairId, seed: u64, tols: &Tolerances) -> Result<VerificationReport> {
    let pair = id.build()?;
    let alg = pair.algebra().clone();
    let (d, k, q, m) = id.dims();

    let tangent = TangentModel::new(pair.clone())?;
    let reductive = ReductiveModel::from_tangent(&tangent)?;

    let mut ricci_max = tangent.bismut_ricci_max();
    // seeded random tangent pairs, evaluated through the same formula
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..5 {
        let mut draw = || {
            let mut v = TangentVector::zero(k, q);
            for i in 0..k {
                v.p[i] = rng.gen_range(-1.0..1.0);
            }
            for s in 0..q {
                v.m1[s] = rng.gen_range(-1.0..1.0);
                v.m2[s] = rng.gen_range(-1.0..1.0);
            }
            v
        };
        let v = draw();
        let w = draw();
        let scale = tangent
            .induced_metric(&v, &v)
            .expect("valid")
            .max(tangent.induced_metric(&w, &w).expect("valid"))
            .max(1.0);
        ricci_max = ricci_max.max(tangent.bismut_ricci(&v, &w).expect("valid").abs() / scale);
    }

    let witness = tangent.nonflat_witness()?;
    let cyclic = tangent.cyclic_curvature_defect(&witness.x, &witness.y, &witness.z, &witness.u)?;

    let op = bismut_nomizu(&reductive, reductive.metric(), reductive.h_tensor())?;
    let curv_gap = curvature_gap(&reductive, &op, reductive.metric(), |a, b| {
        tangent.curvature_slice(a, b)
    });
    let ric_nomizu = ricci_nomizu(&reductive, &op);
    let ric_gap = (&ric_nomizu - tangent.ricci_matrix()).amax();
    let nabla_h = covariant_h_max(&op, reductive.h_tensor());

    let identity = ricci_identity(&reductive, reductive.metric(), reductive.h_tensor())?;

    let b0 = DMatrix::zeros(m, m);
    let (rhs_g, rhs_b) = grf_rhs_raw(&reductive, reductive.h_tensor(), reductive.metric(), &b0)?;
    let flow_residual = rhs_g.amax().max(rhs_b.amax());

    let residuals = Residuals {
        jacobi: F17(alg.jacobi_residual()),
        ad_invariance: F17(alg.ad_invariance_residual()),
        metric_blocks: F17(tangent.metric_blocks_residual()),
        mean_curvature: F17(tangent.mean_curvature().amax()),
        ricci_max: F17(ricci_max),
        oracle_curvature_gap: F17(curv_gap),
        oracle_ricci_gap: F17(ric_gap),
        closedness: F17(tangent.closedness_check()),
        delta_h: F17(identity.delta_h.amax()),
        ricci_identity: F17(identity.residual.amax()),
        flow_fixed_point: F17(flow_residual),
    };
    let witnesses = Witnesses {
        nonflat_s: witness.s,
        nonflat_t: witness.t,
        nonflat_value: F17(witness.value),
        nonflat_frame_norm_sq: F17(witness.frame_norm_sq),
        nonflat_killing_norm_sq: F17(witness.killing_norm_sq),
        cyclic_defect: F17(cyclic),
        nabla_h_max: F17(nabla_h),
        h_max: F17(tangent.h_max()),
    };

    for value in [
        residuals.jacobi.0,
        residuals.ad_invariance.0,
        residuals.metric_blocks.0,
        residuals.mean_curvature.0,
        residuals.ricci_max.0,
        residuals.oracle_curvature_gap.0,
        residuals.oracle_ricci_gap.0,
        residuals.closedness.0,
        residuals.delta_h.0,
        residuals.ricci_identity.0,
        residuals.flow_fixed_point.0,
    ] {
        if !value.is_finite() || value < 0.0 {
            return Err(CoreError::Structural(format!(
                "residual {value} is not a finite non-negative real"
            )));
        }
    }

    let checks = Checks {
        jacobi: verdict(residuals.jacobi.0 <= tols.jacobi.0),
        ad_invariance: verdict(residuals.ad_invariance.0 <= tols.ad_invariance.0),
        metric_blocks: verdict(residuals.metric_blocks.0 <= tols.metric_blocks.0),
        mean_curvature: verdict(residuals.mean_curvature.0 <= tols.mean_curvature.0),
        ricci_max: verdict(residuals.ricci_max.0 <= tols.ricci_max.0),
        oracle_curvature_gap: verdict(residuals.oracle_curvature_gap.0 <= tols.oracle_curvature_gap.0),
        oracle_ricci_gap: verdict(residuals.oracle_ricci_gap.0 <= tols.oracle_ricci_gap.0),
        closedness: verdict(residuals.closedness.0 <= tols.closedness.0),
        delta_h: verdict(residuals.delta_h.0 <= tols.delta_h.0),
        ricci_identity: verdict(residuals.ricci_identity.0 <= tols.ricci_identity.0),
        flow_fixed_point: verdict(residuals.flow_fixed_point.0 <= tols.flow_fixed_point.0),
        nonflat_witness: verdict(witnesses.nonflat_value.0 <= -tols.nonflat_floor.0),
        cyclic_defect: verdict(witnesses.cyclic_defect.0.abs() >= tols.cyclic_defect_floor.0),
        torsion_gradient: verdict(witnesses.nabla_h_max.0 >= tols.torsion_gradient_floor.0),
        h_norm: verdict(witnesses.h_max.0 >= tols.h_norm_floor.0),
    };
    let all_pass = [
        checks.jacobi,
        checks.ad_invariance,
        checks.metric_blocks,
        checks.mean_curvature,
        checks.ricci_max,
        checks.oracle_curvature_gap,
        checks.oracle_ricci_gap,
        checks.closedness,
        checks.delta_h,
        checks.ricci_identity,
        checks.flow_fixed_point,
        checks.nonflat_witness,
        checks.cyclic_defect,
        checks.torsion_gradient,
        checks.h_norm,
    ]
    .iter()
    .all(|&c| c == "pass");

    Ok(VerificationReport {
        pair_id: id.to_string(),
        seed,
        dims: Dims { d, k, q, m },
        residuals,
        witnesses,
        tolerances: *tols,
        checks,
        verdict: verdict(all_pass),
    })
}

/// Verify every catalog pair with dim M <= max_dim. Reports come back in
/// catalog order regardless of the worker count.
pub fn run_catalog(
    max_dim: usize,
    workers: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let ids = catalog_entries(max_dim);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CoreError::InvalidParameter(format!("worker pool: {e}")))?;
    let mut results: Vec<(usize, Result<VerificationReport>)> = pool.install(|| {
        ids.par_iter()
            .enumerate()
            .map(|(i, id)| (i, run_verification(id, seed, tols)))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

pub fn csv_header() -> String {
    "pair_id,d,k,q,m,jacobi,ad_invariance,metric_blocks,mean_curvature,ricci_max,\
     oracle_curvature_gap,oracle_ricci_gap,closedness,delta_h,ricci_identity,\
     flow_fixed_point,nonflat_value,cyclic_defect,nabla_h_max,h_max,verdict"
        .to_string()
}

pub fn csv_row(r: &VerificationReport) -> String {
    let f = |v: F17| format!("{:.16e}", v.0);
    format!(
        "\"{}\",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.pair_id,
        r.dims.d,
        r.dims.k,
        r.dims.q,
        r.dims.m,
        f(r.residuals.jacobi),
        f(r.residuals.ad_invariance),
        f(r.residuals.metric_blocks),
        f(r.residuals.mean_curvature),
        f(r.residuals.ricci_max),
        f(r.residuals.oracle_curvature_gap),
        f(r.residuals.oracle_ricci_gap),
        f(r.residuals.closedness),
        f(r.residuals.delta_h),
        f(r.residuals.ricci_identity),
        f(r.residuals.flow_fixed_point),
        f(r.witnesses.nonflat_value),
        f(r.witnesses.cyclic_defect),
        f(r.witnesses.nabla_h_max),
        f(r.witnesses.h_max),
        r.verdict
    )
}

#[derive(Debug, Serialize)]
struct FlowStateJson {
    time: F17,
    metric: Vec<Vec<F17>>,
    two_form: Vec<Vec<F17>>,
}

#[derive(Debug, Serialize)]
struct FlowMetaJson {
    rhs_metric_norm: F17,
    rhs_two_form_norm: F17,
    projection_defect: F17,
    min_metric_eigenvalue: F17,
}

#[derive(Debug, Serialize)]
struct FlowTraceJson {
    pair_id: String,
    method: &'static str,
    step_size: F17,
    requested_steps: usize,
    exit: String,
    states: Vec<FlowStateJson>,
    steps: Vec<FlowMetaJson>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<F17>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| F17(m[(r, c)])).collect())
        .collect()
}

/// Serialize a flow trace with the same float conventions as the reports.
pub fn flow_trace_json(
    pair_id: &PairId,
    method: FlowMethod,
    step_size: f64,
    requested_steps: usize,
    trace: &FlowTrace,
) -> String {
    let exit = match trace.exit {
        crate::flow::FlowExit::Completed => "completed".to_string(),
        crate::flow::FlowExit::DomainExit { step, min_eig } => {
            format!("domain_exit(step={step},min_eig={min_eig:.3e})")
        }
    };
    let doc = FlowTraceJson {
        pair_id: pair_id.to_string(),
        method: match method {
            FlowMethod::Euler => "euler",
            FlowMethod::Rk4 => "rk4",
        },
        step_size: F17(step_size),
        requested_steps,
        exit,
        states: trace
            .states
            .iter()
            .map(|s| FlowStateJson {
                time: F17(s.time),
                metric: matrix_rows(&s.metric),
                two_form: matrix_rows(&s.two_form),
            })
            .collect(),
        steps: trace
            .meta
            .iter()
            .map(|m| FlowMetaJson {
                rhs_metric_norm: F17(m.rhs_metric_norm),
                rhs_two_form_norm: F17(m.rhs_two_form_norm),
                projection_defect: F17(m.projection_defect),
                min_metric_eigenvalue: F17(m.min_metric_eigenvalue),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("trace serialization");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_pair_report_passes() {
        let id: PairId = "AIII:n=2,p=1".parse().unwrap();
        let report = run_verification(&id, 0, &Tolerances::default()).unwrap();
        assert!(report.passed(), "checks: {:?}", report.checks);
        assert!(report.residuals.ricci_max.0 <= 1e-9);
        assert!((report.witnesses.nonflat_value.0 - (-0.25)).abs() <= 1e-10);
        assert_eq!(report.dims.m, 5);
    }

    #[test]
    fn aiii_n3_report_dims() {
        let id: PairId = "AIII:n=3,p=1".parse().unwrap();
        let report = run_verification(&id, 0, &Tolerances::default()).unwrap();
        assert!(report.passed());
        assert_eq!(
            (report.dims.d, report.dims.k, report.dims.q, report.dims.m),
            (8, 4, 4, 12)
        );
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let id: PairId = "AIII:n=2,p=1".parse().unwrap();
        let a = run_verification(&id, 0, &Tolerances::default()).unwrap();
        let b = run_verification(&id, 0, &Tolerances::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_floats_carry_17_significant_digits() {
        let id: PairId = "AIII:n=2,p=1".parse().unwrap();
        let report = run_verification(&id, 0, &Tolerances::default()).unwrap();
        let json = report.to_json();
        // every float is scientific notation with 16 digits after the point
        let token = json
            .split("\"nonflat_value\": ")
            .nth(1)
            .unwrap()
            .split(',')
            .next()
            .unwrap()
            .trim();
        let mantissa = token.trim_start_matches('-');
        let (digits, exp) = mantissa.split_once('e').expect("scientific notation");
        assert_eq!(digits.split_once('.').unwrap().1.len(), 16, "{token}");
        assert!(!exp.is_empty());
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["verdict"], "pass");
        let witness = parsed["witnesses"]["nonflat_value"].as_f64().unwrap();
        assert!((witness - (-0.25)).abs() < 1e-12);
    }

    #[test]
    fn catalog_sweep_is_deterministic_across_worker_counts() {
        let tols = Tolerances::default();
        let one = run_catalog(14, 1, 0, &tols).unwrap();
        let four = run_catalog(14, 4, 0, &tols).unwrap();
        assert_eq!(one.len(), four.len());
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.to_json(), b.to_json());
            assert_eq!(csv_row(a), csv_row(b));
        }
    }

    #[test]
    fn tight_tolerance_override_fails_the_check() {
        // an unreachable witness floor must flip the verdict, and only it
        let id: PairId = "AIII:n=2,p=1".parse().unwrap();
        let mut tols = Tolerances::default();
        tols.nonflat_floor = F17(1.0);
        let report = run_verification(&id, 0, &tols).unwrap();
        assert!(!report.passed());
        assert_eq!(report.checks.nonflat_witness, "fail");
        assert_eq!(report.checks.ricci_max, "pass");
        assert_eq!(report.checks.mean_curvature, "pass");
    }

    #[test]
    fn csv_row_has_header_arity() {
        let id: PairId = "AIII:n=2,p=1".parse().unwrap();
        let report = run_verification(&id, 0, &Tolerances::default()).unwrap();
        let header_cols = csv_header().split(',').count();
        // count fields respecting the quoted pair id
        let row = csv_row(&report);
        let mut cols = 0;
        let mut in_quotes = false;
        for c in row.chars() {
            match c {
                '"' => in_quotes = !in_quotes,
                ',' if !in_quotes => cols += 1,
                _ => {}
            }
        }
        assert_eq!(header_cols, cols + 1);
        assert!(row.starts_with("\"AIII:n=2,p=1\","));
    }
}
