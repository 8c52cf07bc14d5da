//! Independent recomputation of the curvature quantities through Nomizu
//! operators on a reductive decomposition l = isotropy + m.
//!
//! Nothing here reuses the closed-form contractions of the orbit module:
//! connections are solved from the Koszul relations, curvature comes from
//! operator commutators, and covariant derivatives act slotwise on tensors.
//! Agreement between the two routes is the central anti-bug property of the
//! whole laboratory.

use nalgebra::{Cholesky, DMatrix, DVector};
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::lie::LieAlgebra;
use crate::linalg::{gram_schmidt, Tensor3};
use crate::orbit::{exterior_derivative_max, TangentModel};

/// Reductive model: projected bracket tables on a fixed frame of m, the
/// isotropy action, an invariant metric and an invariant 3-form.
#[derive(Debug)]
pub struct ReductiveModel {
    m: usize,
    iso: usize,
    /// m-coordinates of [e_a, e_b], flat index a * m + b.
    bracket_m: Vec<DVector<f64>>,
    /// isotropy coordinates of [e_a, e_b].
    bracket_iso: Vec<DVector<f64>>,
    iso_ad: Vec<DMatrix<f64>>,
    metric: DMatrix<f64>,
    h: Tensor3,
    invariance_residual: f64,
}

impl ReductiveModel {
    /// Reductive model of the orbit: isotropy c_diag acting on p + m1 + m2.
    pub fn from_tangent(model: &TangentModel) -> Result<Self> {
        let m = model.m_dim();
        let iso = model.k_dim();
        let mut bracket_m = Vec::with_capacity(m * m);
        let mut bracket_iso = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                bracket_m.push(model.bracket_m_coords(a, b).clone());
                bracket_iso.push(model.bracket_iso_coords(a, b).clone());
            }
        }
        let (iso_ad, iso_leak) = model.isotropy_action();
        let metric = model.metric_matrix().clone();
        let h = model.h_tensor().clone();
        Self::assemble(m, iso, bracket_m, bracket_iso, iso_ad, metric, h, iso_leak)
    }

    /// Bi-invariant group model: trivial isotropy, metric -B in an
    /// orthonormalized frame, and the 3-form g([X, Y], Z).
    pub fn flat_group(alg: &Arc<LieAlgebra>) -> Result<Self> {
        let d = alg.dim();
        let killing = alg.killing_matrix();
        let form = -killing;
        let raw: Vec<DVector<f64>> = (0..d)
            .map(|a| {
                let mut v = DVector::zeros(d);
                v[a] = 1.0;
                v
            })
            .collect();
        let frame = gram_schmidt(&raw, &form)?;
        // dual rows: coefficient over the frame = -B(., frame_j)
        let duals: Vec<DVector<f64>> = frame.iter().map(|f| &form * f).collect();

        let mut bracket_m = vec![DVector::zeros(d); d * d];
        let mut h = Tensor3::zeros(d);
        for a in 0..d {
            let ad_a = alg.ad_matrix(&frame[a]);
            for b in 0..d {
                if a == b {
                    continue;
                }
                let br = &ad_a * &frame[b];
                let mut coords = DVector::zeros(d);
                for (j, dual) in duals.iter().enumerate() {
                    coords[j] = dual.dot(&br);
                }
                for (c, fc) in frame.iter().enumerate() {
                    // g([a, b], c) with g = -B
                    h.set(a, b, c, -alg.killing_coeffs(&br, fc));
                }
                bracket_m[a * d + b] = coords;
            }
        }
        let mut metric = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                metric[(a, b)] = -alg.killing_coeffs(&frame[a], &frame[b]);
            }
        }
        let bracket_iso = vec![DVector::zeros(0); d * d];
        Self::assemble(d, 0, bracket_m, bracket_iso, Vec::new(), metric, h, 0.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        m: usize,
        iso: usize,
        bracket_m: Vec<DVector<f64>>,
        bracket_iso: Vec<DVector<f64>>,
        iso_ad: Vec<DMatrix<f64>>,
        metric: DMatrix<f64>,
        h: Tensor3,
        iso_leak: f64,
    ) -> Result<Self> {
        // Isotropy invariance: brackets stay in m and the action is
        // skew-symmetric for the metric and a derivation killing the 3-form.
        let mut invariance = iso_leak;
        for a in iso_ad.iter() {
            invariance = invariance.max((&metric * a + a.transpose() * &metric).amax());
            invariance = invariance.max(derivation_residual(&h, a));
        }
        if invariance > 1e-10 {
            return Err(CoreError::Structural(format!(
                "isotropy does not preserve the invariant data: residual {invariance:.3e}"
            )));
        }
        Ok(Self {
            m,
            iso,
            bracket_m,
            bracket_iso,
            iso_ad,
            metric,
            h,
            invariance_residual: invariance,
        })
    }

    pub fn m_dim(&self) -> usize {
        self.m
    }

    pub fn iso_dim(&self) -> usize {
        self.iso
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn h_tensor(&self) -> &Tensor3 {
        &self.h
    }

    pub fn iso_ad(&self) -> &[DMatrix<f64>] {
        &self.iso_ad
    }

    pub fn invariance_residual(&self) -> f64 {
        self.invariance_residual
    }

    pub fn bracket_m(&self, a: usize, b: usize) -> &DVector<f64> {
        &self.bracket_m[a * self.m + b]
    }

    /// Chevalley-style exterior-derivative residual of a 3-form on this model.
    pub fn closedness_residual(&self, h: &Tensor3) -> f64 {
        exterior_derivative_max(self.m, h, |a, b| &self.bracket_m[a * self.m + b])
    }

    /// Exterior differential of an invariant 2-form.
    pub fn two_form_differential(&self, b: &DMatrix<f64>) -> Tensor3 {
        let m = self.m;
        let mut out = Tensor3::zeros(m);
        for x in 0..m {
            for y in (x + 1)..m {
                for z in (y + 1)..m {
                    let v = -two_form_on(b, self.bracket_m(x, y), z)
                        + two_form_on(b, self.bracket_m(x, z), y)
                        - two_form_on(b, self.bracket_m(y, z), x);
                    out.set(x, y, z, v);
                    out.set(y, z, x, v);
                    out.set(z, x, y, v);
                    out.set(y, x, z, -v);
                    out.set(x, z, y, -v);
                    out.set(z, y, x, -v);
                }
            }
        }
        out
    }
}

fn two_form_on(b: &DMatrix<f64>, w: &DVector<f64>, z: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..w.len() {
        if w[r] != 0.0 {
            acc += w[r] * b[(r, z)];
        }
    }
    acc
}

/// Derivation action of a frame endomorphism on a 3-form; zero for
/// invariant tensors.
fn derivation_residual(h: &Tensor3, a: &DMatrix<f64>) -> f64 {
    let m = h.dim();
    let mut worst = 0.0_f64;
    for x in 0..m {
        for y in (x + 1)..m {
            for z in (y + 1)..m {
                let mut acc = 0.0;
                for r in 0..m {
                    acc += a[(r, x)] * h.get(r, y, z)
                        + a[(r, y)] * h.get(x, r, z)
                        + a[(r, z)] * h.get(x, y, r);
                }
                worst = worst.max(acc.abs());
            }
        }
    }
    worst
}

/// Connection operators Lambda(e_a) on the frame of m.
#[derive(Debug)]
pub struct NomizuOperator {
    lambda: Vec<DMatrix<f64>>,
}

impl NomizuOperator {
    pub fn lambda(&self, a: usize) -> &DMatrix<f64> {
        &self.lambda[a]
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Operator of an arbitrary direction given by frame coordinates.
    pub fn lambda_of(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let m = self.lambda.len();
        let mut out = DMatrix::zeros(m, m);
        for c in 0..m {
            if w[c] != 0.0 {
                out += &self.lambda[c] * w[c];
            }
        }
        out
    }

    /// Max deviation of Lambda from skew-symmetry with respect to g.
    pub fn metric_compatibility_residual(&self, g: &DMatrix<f64>) -> f64 {
        self.lambda
            .iter()
            .map(|l| (g * l + l.transpose() * g).amax())
            .fold(0.0, f64::max)
    }
}

/// Levi-Civita connection of an invariant metric from the Koszul relations:
/// 2 g(Lambda(X)Y, Z) = g([X,Y]_m, Z) - g([Y,Z]_m, X) + g([Z,X]_m, Y).
pub fn levi_civita_nomizu(model: &ReductiveModel, g: &DMatrix<f64>) -> Result<NomizuOperator> {
    let m = model.m_dim();
    let chol = Cholesky::new(g.clone()).ok_or(CoreError::NotPositiveDefinite)?;
    // gw[a*m+b] = g * [e_a, e_b]_m
    let gw: Vec<DVector<f64>> = (0..m * m)
        .map(|idx| g * &model.bracket_m[idx])
        .collect();
    let mut lambda = Vec::with_capacity(m);
    for a in 0..m {
        let mut rhs = DMatrix::zeros(m, m);
        for b in 0..m {
            for c in 0..m {
                rhs[(c, b)] = gw[a * m + b][c] - gw[b * m + c][a] + gw[c * m + a][b];
            }
        }
        lambda.push(chol.solve(&rhs) * 0.5);
    }
    Ok(NomizuOperator { lambda })
}

/// Bismut operator: Levi-Civita plus half the torsion dual to the 3-form,
/// g(T(X, Y), Z) = H(X, Y, Z).
pub fn bismut_nomizu(
    model: &ReductiveModel,
    g: &DMatrix<f64>,
    h: &Tensor3,
) -> Result<NomizuOperator> {
    let lc = levi_civita_nomizu(model, g)?;
    let m = model.m_dim();
    let chol = Cholesky::new(g.clone()).ok_or(CoreError::NotPositiveDefinite)?;
    let mut lambda = Vec::with_capacity(m);
    for a in 0..m {
        let mut h_a = DMatrix::zeros(m, m);
        for b in 0..m {
            for c in 0..m {
                h_a[(c, b)] = h.get(a, b, c);
            }
        }
        lambda.push(lc.lambda(a) + chol.solve(&h_a) * 0.5);
    }
    Ok(NomizuOperator { lambda })
}

/// g(T(e_a, e_b), e_c) for the torsion of an operator.
pub fn torsion_tensor(model: &ReductiveModel, op: &NomizuOperator, g: &DMatrix<f64>) -> Tensor3 {
    let m = model.m_dim();
    let mut out = Tensor3::zeros(m);
    for a in 0..m {
        for b in 0..m {
            let t = op.lambda(a).column(b) - op.lambda(b).column(a) - &model.bracket_m[a * m + b];
            let gt = g * t;
            for c in 0..m {
                out.set(a, b, c, gt[c]);
            }
        }
    }
    out
}

/// Precomputed flattened operator tables for repeated curvature-slice
/// evaluation over one connection.
pub struct CurvatureEngine<'a> {
    model: &'a ReductiveModel,
    op: &'a NomizuOperator,
    g: &'a DMatrix<f64>,
    lam_flat: DMatrix<f64>,
    iso_flat: DMatrix<f64>,
}

impl<'a> CurvatureEngine<'a> {
    pub fn new(model: &'a ReductiveModel, op: &'a NomizuOperator, g: &'a DMatrix<f64>) -> Self {
        let m = model.m_dim();
        let iso = model.iso_dim();
        let mut lam_flat = DMatrix::zeros(m, m * m);
        for r in 0..m {
            for z in 0..m {
                for u in 0..m {
                    lam_flat[(r, z * m + u)] = op.lambda(r)[(z, u)];
                }
            }
        }
        let mut iso_flat = DMatrix::zeros(iso.max(1), m * m);
        for i in 0..iso {
            for z in 0..m {
                for u in 0..m {
                    iso_flat[(i, z * m + u)] = model.iso_ad[i][(z, u)];
                }
            }
        }
        Self {
            model,
            op,
            g,
            lam_flat,
            iso_flat,
        }
    }

    /// Covariant slices R(e_a, e_b, ., .) for all b at one fixed a:
    /// entry (z, u) = g(R(e_a, e_b) e_z, e_u).
    pub fn row(&self, a: usize) -> Vec<DMatrix<f64>> {
        let m = self.model.m_dim();
        let iso = self.model.iso_dim();
        let mut w_block = DMatrix::zeros(m, m);
        for b in 0..m {
            w_block.set_row(b, &self.model.bracket_m[a * m + b].transpose());
        }
        let lam_w = &w_block * &self.lam_flat; // row b = flattened Lambda(W_ab)
        let iso_w = if iso > 0 {
            let mut iso_block = DMatrix::zeros(m, iso);
            for b in 0..m {
                for i in 0..iso {
                    iso_block[(b, i)] = self.model.bracket_iso[a * m + b][i];
                }
            }
            &iso_block * &self.iso_flat
        } else {
            DMatrix::zeros(m, m * m)
        };

        let lambda_a = self.op.lambda(a);
        let mut out = Vec::with_capacity(m);
        for b in 0..m {
            let mut r_ab = lambda_a * self.op.lambda(b) - self.op.lambda(b) * lambda_a;
            for z in 0..m {
                for u in 0..m {
                    r_ab[(z, u)] -= lam_w[(b, z * m + u)] + iso_w[(b, z * m + u)];
                }
            }
            out.push((self.g * r_ab).transpose());
        }
        out
    }
}

/// Curvature slices R(e_a, e_b, ., .) for one fixed a, covariant in the last
/// two slots: entry (z, u) = g(R(e_a, e_b) e_z, e_u).
pub fn curvature_row(
    model: &ReductiveModel,
    op: &NomizuOperator,
    g: &DMatrix<f64>,
    a: usize,
) -> Vec<DMatrix<f64>> {
    CurvatureEngine::new(model, op, g).row(a)
}

/// Ricci tensor in the trace convention Ric(Y, Z) = sum_j g(R(e_j, Y) Z, e_j)
/// over a g-orthonormal frame; computed as the frame-coefficient trace, which
/// is metric-independent.
pub fn ricci_nomizu(model: &ReductiveModel, op: &NomizuOperator) -> DMatrix<f64> {
    let m = model.m_dim();
    let iso = model.iso_dim();
    // t[r] = sum_a Lambda_a[(a, r)]
    let mut t: DVector<f64> = DVector::zeros(m);
    for a in 0..m {
        for r in 0..m {
            t[r] += op.lambda(a)[(a, r)];
        }
    }
    let mut ric = DMatrix::zeros(m, m);
    for y in 0..m {
        let lam_y = op.lambda(y);
        // T1 = sum_a (Lambda_a Lambda_y)[a][z] = t . Lambda_y[., z]
        for z in 0..m {
            let mut acc = 0.0;
            for r in 0..m {
                acc += t[r] * lam_y[(r, z)];
            }
            ric[(y, z)] += acc;
        }
        // T2 = sum_a (Lambda_y Lambda_a)[a][z]
        for a in 0..m {
            let lam_a = op.lambda(a);
            for z in 0..m {
                let mut acc = 0.0;
                for r in 0..m {
                    acc += lam_y[(a, r)] * lam_a[(r, z)];
                }
                ric[(y, z)] -= acc;
            }
        }
        // T3 = sum_a (Lambda([e_a, e_y]_m))[a][z]
        for a in 0..m {
            let w = &model.bracket_m[a * m + y];
            for c in 0..m {
                if w[c] != 0.0 {
                    let lam_c = op.lambda(c);
                    for z in 0..m {
                        ric[(y, z)] -= w[c] * lam_c[(a, z)];
                    }
                }
            }
        }
        // T4 = sum_a ad([e_a, e_y]_iso)[a][z]
        for a in 0..m {
            let wi = &model.bracket_iso[a * m + y];
            for i in 0..iso {
                if wi[i] != 0.0 {
                    let ad_i = &model.iso_ad[i];
                    for z in 0..m {
                        ric[(y, z)] -= wi[i] * ad_i[(a, z)];
                    }
                }
            }
        }
    }
    ric
}

/// Covariant derivative of a 3-form in the direction e_u:
/// (D_u h)(x, y, z) = -h(L x, y, z) - h(x, L y, z) - h(x, y, L z) with
/// L = Lambda(e_u).
pub fn covariant_h_direction(op: &NomizuOperator, h: &Tensor3, u: usize) -> Tensor3 {
    let m = h.dim();
    let l = op.lambda(u);
    // row-major copy of Lambda(e_u) for contiguous inner loops
    let mut lt = vec![0.0_f64; m * m];
    for r in 0..m {
        for c in 0..m {
            lt[r * m + c] = l[(r, c)];
        }
    }
    let mut out = Tensor3::zeros(m);
    let hd = h.data().to_vec();
    let od = out.data_mut();
    // slot 1: out[x, ., .] -= sum_r l[r, x] h[r, ., .]
    for x in 0..m {
        let dst = &mut od[x * m * m..(x + 1) * m * m];
        for r in 0..m {
            let c = lt[r * m + x];
            if c != 0.0 {
                let src = &hd[r * m * m..(r + 1) * m * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= c * s;
                }
            }
        }
    }
    // slot 2: out[x, y, .] -= sum_r l[r, y] h[x, r, .]
    for x in 0..m {
        let hx = &hd[x * m * m..(x + 1) * m * m];
        let ox = &mut od[x * m * m..(x + 1) * m * m];
        for y in 0..m {
            let dst = &mut ox[y * m..(y + 1) * m];
            for r in 0..m {
                let c = lt[r * m + y];
                if c != 0.0 {
                    let src = &hx[r * m..(r + 1) * m];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= c * s;
                    }
                }
            }
        }
    }
    // slot 3: out[x, y, .] -= sum_r h[x, y, r] l[r, .]
    for xy in 0..m * m {
        let src = &hd[xy * m..(xy + 1) * m];
        let dst = &mut od[xy * m..(xy + 1) * m];
        for r in 0..m {
            let c = src[r];
            if c != 0.0 {
                let lrow = &lt[r * m..(r + 1) * m];
                for (d, s) in dst.iter_mut().zip(lrow) {
                    *d -= c * s;
                }
            }
        }
    }
    out
}

/// Max |(D_u h)(x, y, z)| over all directions and slots.
pub fn covariant_h_max(op: &NomizuOperator, h: &Tensor3) -> f64 {
    (0..h.dim())
        .map(|u| covariant_h_direction(op, h, u).amax())
        .fold(0.0, f64::max)
}

/// The squared-torsion 2-tensor H2(X, Y) = sum over a g-orthonormal frame of
/// H(X, ., .) H(Y, ., .), computed with inverse-metric contractions.
pub fn h_squared(model: &ReductiveModel, g: &DMatrix<f64>, h: &Tensor3) -> Result<DMatrix<f64>> {
    let m = model.m_dim();
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(CoreError::NotPositiveDefinite)?;
    let slice = |x: usize| -> DMatrix<f64> {
        let mut s = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                s[(a, b)] = h.get(x, a, b);
            }
        }
        s
    };
    let mut out = DMatrix::zeros(m, m);
    let tilde: Vec<DMatrix<f64>> = (0..m).map(|x| &g_inv * slice(x) * &g_inv).collect();
    for x in 0..m {
        for y in x..m {
            let hy = slice(y);
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..m {
                    acc += tilde[x][(a, b)] * hy[(a, b)];
                }
            }
            out[(x, y)] = acc;
            out[(y, x)] = acc;
        }
    }
    Ok(out)
}

/// Codifferential of a 3-form: (delta h)(X, Y) = -sum_j (D_{e_j} h)(e_j, X, Y)
/// over a g-orthonormal frame, with D the Levi-Civita derivative.
pub fn delta_h(
    model: &ReductiveModel,
    lc: &NomizuOperator,
    g: &DMatrix<f64>,
    h: &Tensor3,
) -> Result<DMatrix<f64>> {
    let m = model.m_dim();
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(CoreError::NotPositiveDefinite)?;
    let mut out = DMatrix::zeros(m, m);
    for a in 0..m {
        let da = covariant_h_direction(lc, h, a);
        for b in 0..m {
            let w = g_inv[(a, b)];
            if w == 0.0 {
                continue;
            }
            for x in 0..m {
                for y in 0..m {
                    out[(x, y)] -= w * da.get(b, x, y);
                }
            }
        }
    }
    Ok(out)
}

/// All pieces of the generic Ricci identity for a Bismut pair on one model.
#[derive(Debug)]
pub struct RicciIdentity {
    pub ric_lc: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub delta_h: DMatrix<f64>,
    pub ric_bismut: DMatrix<f64>,
    /// Ric_g - H2/4 - (delta H)/2 - Ric_Bismut.
    pub residual: DMatrix<f64>,
}

/// Assemble Ric_Bismut = Ric_g - H2/4 - (delta H)/2 and its residual against
/// the operator-route Bismut Ricci, for any invariant metric and closed
/// invariant 3-form.
pub fn ricci_identity(
    model: &ReductiveModel,
    g: &DMatrix<f64>,
    h: &Tensor3,
) -> Result<RicciIdentity> {
    let lc = levi_civita_nomizu(model, g)?;
    let bis = bismut_nomizu(model, g, h)?;
    let ric_lc = ricci_nomizu(model, &lc);
    let h2 = h_squared(model, g, h)?;
    let dh = delta_h(model, &lc, g, h)?;
    let ric_bismut = ricci_nomizu(model, &bis);
    let residual = &ric_lc - &h2 * 0.25 - &dh * 0.5 - &ric_bismut;
    Ok(RicciIdentity {
        ric_lc,
        h2,
        delta_h: dh,
        ric_bismut,
        residual,
    })
}

/// Max gap between the operator-route curvature and a caller-provided
/// covariant slice table.
pub fn curvature_gap<F>(
    model: &ReductiveModel,
    op: &NomizuOperator,
    g: &DMatrix<f64>,
    reference_slice: F,
) -> f64
where
    F: Fn(usize, usize) -> DMatrix<f64>,
{
    let m = model.m_dim();
    let engine = CurvatureEngine::new(model, op, g);
    let mut worst = 0.0_f64;
    for a in 0..m {
        for (b, slice) in engine.row(a).iter().enumerate() {
            worst = worst.max((slice - reference_slice(a, b)).amax());
        }
    }
    worst
}

/// Max |R| over all covariant entries.
pub fn curvature_max(model: &ReductiveModel, op: &NomizuOperator, g: &DMatrix<f64>) -> f64 {
    curvature_gap(model, op, g, |_, _| DMatrix::zeros(model.m_dim(), model.m_dim()))
}

/// First Bianchi identity with torsion: the cyclic curvature sum must equal
/// dH(X,Y,Z,U) + (D_U H)(X,Y,Z) - cyclic sum of g(T(X,Y), T(Z,U)).
/// Returns the max residual over all basis 4-tuples.
pub fn bianchi_residual(model: &ReductiveModel, g: &DMatrix<f64>, h: &Tensor3) -> Result<f64> {
    let m = model.m_dim();
    let op = bismut_nomizu(model, g, h)?;
    // full covariant curvature table
    let engine = CurvatureEngine::new(model, &op, g);
    let mut r_full = vec![0.0_f64; m * m * m * m];
    for a in 0..m {
        let row = engine.row(a);
        for (b, slice) in row.iter().enumerate() {
            for z in 0..m {
                for u in 0..m {
                    r_full[((a * m + b) * m + z) * m + u] = slice[(z, u)];
                }
            }
        }
    }
    let r = |x: usize, y: usize, z: usize, u: usize| r_full[((x * m + y) * m + z) * m + u];

    // torsion vectors T(e_a, e_b) in frame coordinates
    let tor = torsion_tensor(model, &op, g);
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(CoreError::NotPositiveDefinite)?;
    let mut t_vec = vec![DVector::zeros(m); m * m];
    for a in 0..m {
        for b in 0..m {
            let mut hv = DVector::zeros(m);
            for c in 0..m {
                hv[c] = tor.get(a, b, c);
            }
            t_vec[a * m + b] = &g_inv * hv;
        }
    }
    let tt = |x: usize, y: usize, z: usize, u: usize| -> f64 {
        let mut acc = 0.0;
        let tz = &t_vec[z * m + u];
        for c in 0..m {
            acc += tor.get(x, y, c) * tz[c];
        }
        acc
    };

    // covariant derivatives per direction
    let grads: Vec<Tensor3> = (0..m).map(|u| covariant_h_direction(&op, h, u)).collect();

    // exterior derivative values via the Chevalley formula
    let dh = |x: usize, y: usize, z: usize, u: usize| -> f64 {
        let c = |w: &DVector<f64>, p: usize, q: usize| -> f64 {
            let mut acc = 0.0;
            for r in 0..m {
                if w[r] != 0.0 {
                    acc += w[r] * h.get(r, p, q);
                }
            }
            acc
        };
        -c(model.bracket_m(x, y), z, u) + c(model.bracket_m(x, z), y, u)
            - c(model.bracket_m(x, u), y, z)
            - c(model.bracket_m(y, z), x, u)
            + c(model.bracket_m(y, u), x, z)
            - c(model.bracket_m(z, u), x, y)
    };

    let mut worst = 0.0_f64;
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                for (u, grad) in grads.iter().enumerate() {
                    let cyc_r = r(x, y, z, u) + r(y, z, x, u) + r(z, x, y, u);
                    let cyc_t = tt(x, y, z, u) + tt(y, z, x, u) + tt(z, x, y, u);
                    let rhs = dh(x, y, z, u) + grad.get(x, y, z) - cyc_t;
                    worst = worst.max((cyc_r - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}
