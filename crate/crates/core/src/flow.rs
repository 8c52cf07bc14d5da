//! Generalized Ricci flow restricted to invariant data on the reductive
//! model: g evolves by -2 Ric + H^2 / 2 and the potential b by -delta H,
//! with H = background + db. The canonical pair (metric, 0) is a fixed
//! point; perturbed trajectories are exploratory.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::linalg::{min_symmetric_eigenvalue, Tensor3};
use crate::oracle::{delta_h, h_squared, levi_civita_nomizu, ricci_nomizu, ReductiveModel};

/// Frobenius-orthonormal bases of the isotropy-invariant symmetric forms and
/// 2-forms on the frame of m.
#[derive(Debug)]
pub struct InvariantTensors {
    pub sym: Vec<DMatrix<f64>>,
    pub skew: Vec<DMatrix<f64>>,
}

impl InvariantTensors {
    pub fn sym_dim(&self) -> usize {
        self.sym.len()
    }

    pub fn skew_dim(&self) -> usize {
        self.skew.len()
    }

    /// Projection of a symmetric matrix onto the invariant span, with the
    /// max-norm defect.
    pub fn project_sym(&self, s: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        project(&self.sym, s)
    }

    pub fn project_skew(&self, s: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        project(&self.skew, s)
    }
}

fn project(basis: &[DMatrix<f64>], s: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let mut out = DMatrix::zeros(s.nrows(), s.ncols());
    for e in basis {
        let c = frobenius_dot(e, s);
        out += e * c;
    }
    let defect = (s - &out).amax();
    (out, defect)
}

fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Solve the invariance equations A^T S + S A = 0 over all isotropy
/// generators A, separately on symmetric matrices and on 2-forms.
pub fn invariant_tensors(model: &ReductiveModel) -> Result<InvariantTensors> {
    let m = model.m_dim();
    let sym = solve_invariance(model, m, true)?;
    if sym.is_empty() {
        return Err(CoreError::Structural(
            "empty invariant symmetric space; the metric itself must belong to it".into(),
        ));
    }
    let skew = solve_invariance(model, m, false)?;
    Ok(InvariantTensors { sym, skew })
}

fn solve_invariance(model: &ReductiveModel, m: usize, symmetric: bool) -> Result<Vec<DMatrix<f64>>> {
    // coordinate maps for the (anti)symmetric coefficient space
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..m {
        let start = if symmetric { a } else { a + 1 };
        for b in start..m {
            pairs.push((a, b));
        }
    }
    let n_coords = pairs.len();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    // matrix -> coordinates
    let to_coords = |s: &DMatrix<f64>| -> DVector<f64> {
        let mut v = DVector::zeros(n_coords);
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            v[idx] = if a == b {
                s[(a, a)]
            } else {
                (s[(a, b)] + if symmetric { s[(b, a)] } else { -s[(b, a)] }) * inv_sqrt2
            };
        }
        v
    };
    let from_coords = |v: &DVector<f64>| -> DMatrix<f64> {
        let mut s = DMatrix::zeros(m, m);
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            if a == b {
                s[(a, a)] = v[idx];
            } else {
                s[(a, b)] = v[idx] * inv_sqrt2;
                s[(b, a)] = if symmetric { v[idx] } else { -v[idx] } * inv_sqrt2;
            }
        }
        s
    };

    if model.iso_dim() == 0 {
        // trivial isotropy: the whole space is invariant
        return Ok((0..n_coords)
            .map(|i| {
                let mut v = DVector::zeros(n_coords);
                v[i] = 1.0;
                from_coords(&v)
            })
            .collect());
    }

    // accumulate P = sum over generators of Phi^T Phi via sparse rows
    let mut p = DMatrix::<f64>::zeros(n_coords, n_coords);
    for gen in model.iso_ad() {
        // rows[r] = list of (column index, value) of the stacked Phi matrix
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_coords];
        for (col, &(a, b)) in pairs.iter().enumerate() {
            // Phi(E_ab) = A^T E_ab + E_ab A on the basis element E_ab
            let mut image = DMatrix::zeros(m, m);
            let scale = if a == b { 1.0 } else { inv_sqrt2 };
            for r in 0..m {
                // A^T e_a e_b^T : column b gets A[(a, .)]^T? A^T e_a = row a of A
                image[(r, b)] += gen[(a, r)] * scale;
                if a != b {
                    let sign = if symmetric { 1.0 } else { -1.0 };
                    image[(r, a)] += gen[(b, r)] * scale * sign;
                }
            }
            for c in 0..m {
                image[(a, c)] += gen[(b, c)] * scale;
                if a != b {
                    let sign = if symmetric { 1.0 } else { -1.0 };
                    image[(b, c)] += gen[(a, c)] * scale * sign;
                }
            }
            let coords = to_coords(&image);
            for r in 0..n_coords {
                if coords[r] != 0.0 {
                    rows[r].push((col, coords[r]));
                }
            }
        }
        for row in &rows {
            for &(i, vi) in row {
                for &(j, vj) in row {
                    p[(i, j)] += vi * vj;
                }
            }
        }
    }

    let eig = p.clone().symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
        .max(1.0);
    // The eigensolver can mispair vectors inside the near-degenerate kernel
    // cluster, so only the eigenvalue count is trusted. The kernel span is
    // recovered by shift-invert subspace iteration from seeded random
    // vectors, then validated through the quadratic form.
    let kernel_dim = eig
        .eigenvalues
        .iter()
        .filter(|lam| lam.abs() <= 1e-10 * scale)
        .count();
    if kernel_dim == 0 {
        return Ok(Vec::new());
    }
    let shifted = &p + DMatrix::identity(n_coords, n_coords) * (1e-9 * scale);
    let chol = Cholesky::new(shifted).ok_or_else(|| {
        CoreError::Structural("invariance operator is not positive semidefinite".into())
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut candidates: Vec<DVector<f64>> = (0..kernel_dim)
        .map(|_| DVector::from_iterator(n_coords, (0..n_coords).map(|_| rng.gen_range(-1.0..1.0))))
        .collect();
    for _ in 0..3 {
        for v in candidates.iter_mut() {
            *v = chol.solve(v);
        }
        // modified Gram-Schmidt, two passes
        for i in 0..candidates.len() {
            for _ in 0..2 {
                for j in 0..i {
                    let c = candidates[j].dot(&candidates[i]);
                    let prev = candidates[j].clone();
                    candidates[i] -= prev * c;
                }
            }
            let norm = candidates[i].norm();
            if norm <= 1e-13 {
                return Err(CoreError::Structural(
                    "kernel candidates collapsed during refinement".into(),
                ));
            }
            candidates[i] /= norm;
        }
    }
    let mut basis = Vec::new();
    for v in &candidates {
        let quad = (&p * v).dot(v);
        if quad > 1e-12 * scale {
            return Err(CoreError::Structural(format!(
                "refined kernel vector fails invariance: quadratic form {quad:.3e}"
            )));
        }
        basis.push(from_coords(v));
    }
    Ok(basis)
}

/// Invariant metric with its invariance defect.
#[derive(Debug, Clone)]
pub struct InvariantMetric {
    pub matrix: DMatrix<f64>,
    pub invariance_defect: f64,
}

/// Invariant 2-form (potential of the torsion deformation).
#[derive(Debug, Clone)]
pub struct InvariantTwoForm {
    pub matrix: DMatrix<f64>,
    pub invariance_defect: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub time: f64,
    pub metric: DMatrix<f64>,
    pub two_form: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct StepMeta {
    pub rhs_metric_norm: f64,
    pub rhs_two_form_norm: f64,
    pub projection_defect: f64,
    pub min_metric_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowExit {
    Completed,
    DomainExit { step: usize, min_eig: f64 },
}

#[derive(Debug)]
pub struct FlowTrace {
    pub states: Vec<FlowState>,
    pub meta: Vec<StepMeta>,
    pub exit: FlowExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    Euler,
    Rk4,
}

impl FlowMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(FlowMethod::Euler),
            "rk4" => Ok(FlowMethod::Rk4),
            other => Err(CoreError::InvalidParameter(format!(
                "unknown integration method '{other}'"
            ))),
        }
    }
}

/// Raw right-hand side of the flow at (g, b):
/// (-2 Ric_g + H^2 / 2, -delta_g H) with H = background + db.
pub fn grf_rhs_raw(
    model: &ReductiveModel,
    background: &Tensor3,
    g: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if Cholesky::new(g.clone()).is_none() {
        return Err(CoreError::NotPositiveDefinite);
    }
    let h_t = background.add(&model.two_form_differential(b));
    let lc = levi_civita_nomizu(model, g)?;
    let ric = ricci_nomizu(model, &lc);
    let h2 = h_squared(model, g, &h_t)?;
    let dh = delta_h(model, &lc, g, &h_t)?;
    let rhs_g = &ric * -2.0 + &h2 * 0.5;
    let rhs_g = (&rhs_g + rhs_g.transpose()) * 0.5;
    let rhs_b = (&dh + dh.transpose()) * 0.5 - &dh;
    Ok((rhs_g, rhs_b))
}

/// Right-hand side projected onto the invariant tensor spaces, with the
/// projection defect.
pub fn grf_rhs(
    model: &ReductiveModel,
    background: &Tensor3,
    inv: &InvariantTensors,
    g: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let (raw_g, raw_b) = grf_rhs_raw(model, background, g, b)?;
    let (proj_g, defect_g) = inv.project_sym(&raw_g);
    let (proj_b, defect_b) = inv.project_skew(&raw_b);
    Ok((proj_g, proj_b, defect_g.max(defect_b)))
}

/// Integrate the flow from an initial state. Steps that leave the
/// positive-definite cone stop the trace with a domain-exit record;
/// non-finite values abort with an error.
pub fn run_flow(
    model: &ReductiveModel,
    background: &Tensor3,
    inv: &InvariantTensors,
    initial: FlowState,
    step: f64,
    n_steps: usize,
    method: FlowMethod,
) -> Result<FlowTrace> {
    if !step.is_finite() || step < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "step size must be non-negative, got {step}"
        )));
    }
    let mut states = vec![initial];
    let mut meta = Vec::with_capacity(n_steps);
    let mut exit = FlowExit::Completed;

    for idx in 0..n_steps {
        let current = states.last().expect("non-empty").clone();
        let min_eig = min_symmetric_eigenvalue(&current.metric);
        if min_eig <= 1e-10 {
            exit = FlowExit::DomainExit {
                step: idx,
                min_eig,
            };
            break;
        }
        let rhs = |g: &DMatrix<f64>, b: &DMatrix<f64>| grf_rhs(model, background, inv, g, b);
        let step_result = match method {
            FlowMethod::Euler => {
                let (kg, kb, defect) = rhs(&current.metric, &current.two_form)?;
                (
                    &current.metric + &kg * step,
                    &current.two_form + &kb * step,
                    kg.amax(),
                    kb.amax(),
                    defect,
                )
            }
            FlowMethod::Rk4 => {
                let (k1g, k1b, d1) = rhs(&current.metric, &current.two_form)?;
                let half = step * 0.5;
                let (k2g, k2b, d2) = rhs(
                    &(&current.metric + &k1g * half),
                    &(&current.two_form + &k1b * half),
                )?;
                let (k3g, k3b, d3) = rhs(
                    &(&current.metric + &k2g * half),
                    &(&current.two_form + &k2b * half),
                )?;
                let (k4g, k4b, d4) = rhs(
                    &(&current.metric + &k3g * step),
                    &(&current.two_form + &k3b * step),
                )?;
                let sixth = step / 6.0;
                (
                    &current.metric + (&k1g + &k2g * 2.0 + &k3g * 2.0 + &k4g) * sixth,
                    &current.two_form + (&k1b + &k2b * 2.0 + &k3b * 2.0 + &k4b) * sixth,
                    k1g.amax(),
                    k1b.amax(),
                    d1.max(d2).max(d3).max(d4),
                )
            }
        };
        let (next_g, next_b, rhs_g_norm, rhs_b_norm, defect) = step_result;
        if !next_g.iter().all(|v| v.is_finite()) || !next_b.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NumericalBlowup(idx));
        }
        meta.push(StepMeta {
            rhs_metric_norm: rhs_g_norm,
            rhs_two_form_norm: rhs_b_norm,
            projection_defect: defect,
            min_metric_eigenvalue: min_eig,
        });
        states.push(FlowState {
            time: current.time + step,
            metric: next_g,
            two_form: next_b,
        });
    }
    Ok(FlowTrace { states, meta, exit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_su;
    use crate::orbit::TangentModel;
    use crate::symmetric::PairId;

    fn orbit_model(id: &str) -> ReductiveModel {
        let pair = id.parse::<PairId>().unwrap().build().unwrap();
        let tangent = TangentModel::new(pair).unwrap();
        ReductiveModel::from_tangent(&tangent).unwrap()
    }

    #[test]
    fn invariant_space_dimensions_su2_pair() {
        let model = orbit_model("AIII:n=2,p=1");
        let inv = invariant_tensors(&model).unwrap();
        // diagonal family on (p, m1, m2) plus the two-parameter m1-m2
        // intertwiner; frozen as a regression value
        assert_eq!(inv.sym_dim(), 5);
        assert_eq!(inv.skew_dim(), 4);
        let (_, defect) = inv.project_sym(model.metric());
        assert!(defect <= 1e-10);
    }

    #[test]
    fn trivial_isotropy_gives_full_spaces() {
        let su2 = build_su(2).unwrap();
        let model = ReductiveModel::flat_group(&su2).unwrap();
        let inv = invariant_tensors(&model).unwrap();
        assert_eq!(inv.sym_dim(), 6);
        assert_eq!(inv.skew_dim(), 3);
    }

    #[test]
    fn invariant_projection_preserves_members() {
        let model = orbit_model("AIII:n=3,p=1");
        let inv = invariant_tensors(&model).unwrap();
        let (back, defect) = inv.project_sym(model.metric());
        assert!(defect <= 1e-10);
        assert!((back - model.metric()).amax() <= 1e-10);
    }

    #[test]
    fn fixed_point_rhs_vanishes() {
        for id in ["AIII:n=2,p=1", "AIII:n=3,p=1", "CII:p=1,q=1"] {
            let model = orbit_model(id);
            let b0 = DMatrix::zeros(model.m_dim(), model.m_dim());
            let (rg, rb) = grf_rhs_raw(&model, model.h_tensor(), model.metric(), &b0).unwrap();
            assert!(rg.amax() <= 1e-8, "{id}: metric rhs {:.3e}", rg.amax());
            assert!(rb.amax() <= 1e-8, "{id}: two-form rhs {:.3e}", rb.amax());
        }
    }

    #[test]
    fn zero_background_reduces_to_ricci_flow() {
        let model = orbit_model("AIII:n=2,p=1");
        let zero_h = Tensor3::zeros(model.m_dim());
        let b0 = DMatrix::zeros(model.m_dim(), model.m_dim());
        let (rg, rb) = grf_rhs_raw(&model, &zero_h, model.metric(), &b0).unwrap();
        let lc = levi_civita_nomizu(&model, model.metric()).unwrap();
        let ric = ricci_nomizu(&model, &lc);
        assert!((rg + ric * 2.0).amax() <= 1e-12);
        assert!(rb.amax() <= 1e-12);
    }

    #[test]
    fn ricci_is_scale_invariant() {
        let model = orbit_model("AIII:n=3,p=1");
        let lc1 = levi_civita_nomizu(&model, model.metric()).unwrap();
        let ric1 = ricci_nomizu(&model, &lc1);
        let scaled = model.metric() * 2.0;
        let lc2 = levi_civita_nomizu(&model, &scaled).unwrap();
        let ric2 = ricci_nomizu(&model, &lc2);
        assert!((ric1 - ric2).amax() <= 1e-9);
    }

    #[test]
    fn flow_holds_the_fixed_point() {
        let model = orbit_model("AIII:n=2,p=1");
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
        assert_eq!(trace.exit, FlowExit::Completed);
        assert_eq!(trace.states.len(), 101);
        let last = trace.states.last().unwrap();
        assert!((&last.metric - model.metric()).amax() <= 1e-6);
        assert!(last.two_form.amax() <= 1e-6);
        for meta in &trace.meta {
            assert!(meta.projection_defect <= 1e-8);
        }
    }

    #[test]
    fn perturbed_start_integrates_without_blowup() {
        let model = orbit_model("AIII:n=2,p=1");
        let inv = invariant_tensors(&model).unwrap();
        let m = model.m_dim();
        let initial = FlowState {
            time: 0.0,
            metric: model.metric() * 1.05,
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
        assert_eq!(trace.exit, FlowExit::Completed);
        assert_eq!(trace.states.len(), 101);
        for s in &trace.states {
            assert!(s.metric.iter().all(|v| v.is_finite()));
        }
        // the deformed torsion stays closed along the trajectory
        let last = trace.states.last().unwrap();
        let h_t = model
            .h_tensor()
            .add(&model.two_form_differential(&last.two_form));
        assert!(model.closedness_residual(&h_t) <= 1e-8);
    }

    #[test]
    fn euler_also_integrates() {
        let model = orbit_model("AIII:n=2,p=1");
        let inv = invariant_tensors(&model).unwrap();
        let m = model.m_dim();
        let initial = FlowState {
            time: 0.0,
            metric: model.metric() * 1.05,
            two_form: DMatrix::zeros(m, m),
        };
        let trace = run_flow(
            &model,
            model.h_tensor(),
            &inv,
            initial,
            1e-3,
            20,
            FlowMethod::Euler,
        )
        .unwrap();
        assert_eq!(trace.states.len(), 21);
    }

    #[test]
    fn zero_step_keeps_states_identical() {
        let model = orbit_model("AIII:n=2,p=1");
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
            0.0,
            5,
            FlowMethod::Rk4,
        )
        .unwrap();
        for s in &trace.states {
            assert!((&s.metric - model.metric()).amax() == 0.0);
        }
    }

    #[test]
    fn negative_step_is_rejected() {
        let model = orbit_model("AIII:n=2,p=1");
        let inv = invariant_tensors(&model).unwrap();
        let m = model.m_dim();
        let initial = FlowState {
            time: 0.0,
            metric: model.metric().clone(),
            two_form: DMatrix::zeros(m, m),
        };
        assert!(matches!(
            run_flow(
                &model,
                model.h_tensor(),
                &inv,
                initial,
                -1.0,
                5,
                FlowMethod::Rk4
            ),
            Err(CoreError::InvalidParameter(_))
        ));
    }

    #[test]
    fn near_singular_metric_exits_the_domain() {
        let model = orbit_model("AIII:n=2,p=1");
        let inv = invariant_tensors(&model).unwrap();
        let m = model.m_dim();
        let mut g = model.metric() * 1e-30;
        g[(0, 0)] = 1.0;
        let initial = FlowState {
            time: 0.0,
            metric: g,
            two_form: DMatrix::zeros(m, m),
        };
        let trace = run_flow(
            &model,
            model.h_tensor(),
            &inv,
            initial,
            1e-3,
            5,
            FlowMethod::Rk4,
        )
        .unwrap();
        assert!(matches!(trace.exit, FlowExit::DomainExit { step: 0, .. }));
        assert_eq!(trace.states.len(), 1);
    }
}
