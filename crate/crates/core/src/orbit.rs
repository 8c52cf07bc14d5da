//! Tangent-space model at the base point of M = (G x G) / C_diag.
//!
//! Vectors of the tangent space are parametrized by the blocks
//! p = {(u,-u)}, m1 = {(v,0)}, m2 = {(0,v)} with u in c and v in q. At the
//! base point a tangent vector lifts to the pair of algebra elements
//!
//!   a = 2u + v1 - v2,     b = 2u - v1 - v2,
//!
//! after translating the second slot back to the identity. The induced
//! metric, the restricted 3-form, the normal frame and the second
//! fundamental form are all evaluated through these lifts, which makes every
//! curvature quantity a closed-form contraction of Killing forms and
//! brackets of frame vectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::lie::AlgVector;
use crate::linalg::Tensor3;
use crate::symmetric::SymmetricPairModel;

/// Tangent vector in block coordinates: `p` over the kappa frame of c,
/// `m1`/`m2` over the E frame of q.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub p: DVector<f64>,
    pub m1: DVector<f64>,
    pub m2: DVector<f64>,
}

impl TangentVector {
    pub fn zero(k: usize, q: usize) -> Self {
        Self {
            p: DVector::zeros(k),
            m1: DVector::zeros(q),
            m2: DVector::zeros(q),
        }
    }

    pub fn from_p(k: usize, q: usize, i: usize) -> Self {
        let mut v = Self::zero(k, q);
        v.p[i] = 1.0;
        v
    }

    pub fn from_m1(k: usize, q: usize, s: usize) -> Self {
        let mut v = Self::zero(k, q);
        v.m1[s] = 1.0;
        v
    }

    pub fn from_m2(k: usize, q: usize, s: usize) -> Self {
        let mut v = Self::zero(k, q);
        v.m2[s] = 1.0;
        v
    }
}

/// The normal directions xi_i at the base point, as ambient lift pairs
/// (kappa_i, -kappa_i). Orthonormality is inherited from the frame
/// normalization B(kappa_i, kappa_j) = -1/2 delta_ij.
#[derive(Debug)]
pub struct NormalFrame {
    pub lift_a: Vec<DVector<f64>>,
    pub lift_b: Vec<DVector<f64>>,
    pub gram_residual: f64,
}

/// Non-flatness witness: the curvature value on the 4-tuple
/// ((E_s,0), (E_t,0), (0,E_s), (0,E_t)).
#[derive(Debug, Clone)]
pub struct Witness {
    pub s: usize,
    pub t: usize,
    pub value: f64,
    /// Sum of squared xi-frame coefficients of [E_s, E_t].
    pub frame_norm_sq: f64,
    /// -B([E_s, E_t], [E_s, E_t]) for comparison across norm conventions.
    pub killing_norm_sq: f64,
    pub x: TangentVector,
    pub y: TangentVector,
    pub z: TangentVector,
    pub u: TangentVector,
}

#[derive(Debug)]
pub struct TangentModel {
    pair: Arc<SymmetricPairModel>,
    k: usize,
    q: usize,
    m: usize,
    kappa_g: Vec<DVector<f64>>,
    e_g: Vec<DVector<f64>>,
    basis: Vec<TangentVector>,
    basis_inv: DMatrix<f64>,
    metric: DMatrix<f64>,
    h_tensor: Tensor3,
    h_table: Vec<DMatrix<f64>>,
    xi_table: Vec<DMatrix<f64>>,
    ric_matrix: DMatrix<f64>,
    /// [e_i, e_j] in g + g, projected: coordinates over the model basis.
    bracket_m: Vec<DVector<f64>>,
    /// c_diag coefficients of [e_i, e_j].
    bracket_iso: Vec<DVector<f64>>,
    bracket_reconstruction_residual: f64,
}

impl TangentModel {
    /// Canonical orthonormal basis: (kappa_j/2, -kappa_j/2) for p, then
    /// (E_s, 0), then (0, E_s).
    pub fn new(pair: Arc<SymmetricPairModel>) -> Result<Self> {
        let k = pair.k_dim();
        let q = pair.q_dim();
        let mut basis = Vec::with_capacity(k + 2 * q);
        for i in 0..k {
            let mut v = TangentVector::zero(k, q);
            v.p[i] = 0.5;
            basis.push(v);
        }
        for s in 0..q {
            basis.push(TangentVector::from_m1(k, q, s));
        }
        for s in 0..q {
            basis.push(TangentVector::from_m2(k, q, s));
        }
        Self::with_basis(pair, basis)
    }

    /// Build over a caller-provided orthonormal basis; rejected when the
    /// induced Gram matrix deviates from the identity by more than 1e-8.
    pub fn with_basis(pair: Arc<SymmetricPairModel>, basis: Vec<TangentVector>) -> Result<Self> {
        let k = pair.k_dim();
        let q = pair.q_dim();
        let m = k + 2 * q;
        if basis.len() != m {
            return Err(CoreError::InvalidParameter(format!(
                "basis has {} vectors, expected {m}",
                basis.len()
            )));
        }
        for v in &basis {
            check_parts(v, k, q)?;
        }
        let alg = pair.algebra();
        let killing = alg.killing_matrix().clone();
        let kappa_g: Vec<DVector<f64>> =
            pair.c_frame().iter().map(|v| v.coeffs.clone()).collect();
        let e_g: Vec<DVector<f64>> = pair.q_frame().iter().map(|v| v.coeffs.clone()).collect();

        // Dual maps: coefficients over the frames via -2 B(., frame vector).
        let d = alg.dim();
        let kappa_mat = frame_matrix(&kappa_g, d);
        let e_mat = frame_matrix(&e_g, d);
        let kappa_dual = (&killing * &kappa_mat).transpose() * -2.0;
        let e_dual = (&killing * &e_mat).transpose() * -2.0;
        let proj_c = pair.involution().projector_c();

        // Ambient lifts of the basis vectors and their Killing duals.
        let mut lift_a = Vec::with_capacity(m);
        let mut lift_b = Vec::with_capacity(m);
        for v in &basis {
            let u = &kappa_mat * &v.p;
            let v1 = &e_mat * &v.m1;
            let v2 = &e_mat * &v.m2;
            lift_a.push(&u * 2.0 + &v1 - &v2);
            lift_b.push(&u * 2.0 - &v1 - &v2);
        }
        let k_lift_a: Vec<DVector<f64>> = lift_a.iter().map(|v| &killing * v).collect();
        let k_lift_b: Vec<DVector<f64>> = lift_b.iter().map(|v| &killing * v).collect();

        let mut metric = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let g = -lift_a[a].dot(&k_lift_a[b]) - lift_b[a].dot(&k_lift_b[b]);
                metric[(a, b)] = g;
                metric[(b, a)] = g;
            }
        }
        let gram_defect = (&metric - DMatrix::<f64>::identity(m, m)).amax();
        if gram_defect > 1e-8 {
            return Err(CoreError::InvalidParameter(format!(
                "basis is not orthonormal for the induced metric: residual {gram_defect:.3e}"
            )));
        }

        // Brackets of the lifts, reused by every trilinear table.
        let mut br_a = vec![DVector::zeros(d); m * m];
        let mut br_b = vec![DVector::zeros(d); m * m];
        for a in 0..m {
            let ad_a = alg.ad_matrix(&lift_a[a]);
            let ad_b = alg.ad_matrix(&lift_b[a]);
            for b in (a + 1)..m {
                let va = &ad_a * &lift_a[b];
                let vb = &ad_b * &lift_b[b];
                br_a[b * m + a] = -&va;
                br_b[b * m + a] = -&vb;
                br_a[a * m + b] = va;
                br_b[a * m + b] = vb;
            }
        }

        // Ambient 3-form on basis triples, antisymmetric by construction.
        let mut h_tensor = Tensor3::zeros(m);
        for a in 0..m {
            for b in (a + 1)..m {
                let ka = &killing * &br_a[a * m + b];
                let kb = &killing * &br_b[a * m + b];
                for c in (b + 1)..m {
                    let v = -lift_a[c].dot(&ka) - lift_b[c].dot(&kb);
                    h_tensor.set(a, b, c, v);
                    h_tensor.set(b, c, a, v);
                    h_tensor.set(c, a, b, v);
                    h_tensor.set(b, a, c, -v);
                    h_tensor.set(a, c, b, -v);
                    h_tensor.set(c, b, a, -v);
                }
            }
        }

        // Contractions of the 3-form with the normal frame.
        let k_kappa: Vec<DVector<f64>> = kappa_g.iter().map(|v| &killing * v).collect();
        let mut xi_table = vec![DMatrix::zeros(m, m); k];
        for i in 0..k {
            for a in 0..m {
                for b in (a + 1)..m {
                    let v = -br_a[a * m + b].dot(&k_kappa[i]) + br_b[a * m + b].dot(&k_kappa[i]);
                    xi_table[i][(a, b)] = v;
                    xi_table[i][(b, a)] = -v;
                }
            }
        }

        // Second fundamental form tables h_i(e_a, e_b).
        let m1_parts: Vec<DVector<f64>> = basis.iter().map(|v| &e_mat * &v.m1).collect();
        let m2_parts: Vec<DVector<f64>> = basis.iter().map(|v| &e_mat * &v.m2).collect();
        let mut h_table = vec![DMatrix::zeros(m, m); k];
        for a in 0..m {
            let ad_m1 = alg.ad_matrix(&m1_parts[a]);
            for b in 0..m {
                let br = &ad_m1 * &m2_parts[b];
                for i in 0..k {
                    h_table[i][(a, b)] += br.dot(&k_kappa[i]);
                }
            }
        }
        for h in h_table.iter_mut() {
            let sym = &*h + h.transpose();
            *h = sym;
        }

        // Bismut Ricci matrix over basis pairs: the four-term sum over the
        // orthonormal basis and the normal frame.
        let mut ric_matrix: DMatrix<f64> = DMatrix::zeros(m, m);
        for i in 0..k {
            let h = &h_table[i];
            let xi = &xi_table[i];
            ric_matrix -= h * h.transpose();
            ric_matrix += (xi * xi.transpose()) * 0.25;
            ric_matrix += (h * xi.transpose()) * 0.5;
            ric_matrix -= (xi * h.transpose()) * 0.5;
        }

        // Brackets inside g + g with the reductive projection.
        let elem_f: Vec<DVector<f64>> = basis
            .iter()
            .map(|v| &kappa_mat * &v.p + &e_mat * &v.m1)
            .collect();
        let elem_s: Vec<DVector<f64>> = basis
            .iter()
            .map(|v| -(&kappa_mat * &v.p) + &e_mat * &v.m2)
            .collect();

        let mut ccoords_cols = DMatrix::zeros(m, m);
        for (j, v) in basis.iter().enumerate() {
            ccoords_cols.set_column(j, &canonical_coords(v));
        }
        let basis_inv = ccoords_cols.clone().try_inverse().ok_or_else(|| {
            CoreError::InvalidParameter("basis does not span the tangent space".into())
        })?;

        let mut bracket_m = vec![DVector::zeros(m); m * m];
        let mut bracket_iso = vec![DVector::zeros(k); m * m];
        let mut reconstruction = 0.0_f64;
        for a in 0..m {
            let ad_f = alg.ad_matrix(&elem_f[a]);
            let ad_s = alg.ad_matrix(&elem_s[a]);
            for b in 0..m {
                if a == b {
                    continue;
                }
                let x = &ad_f * &elem_f[b];
                let y = &ad_s * &elem_s[b];
                let x_c = &proj_c * &x;
                let y_c = &proj_c * &y;
                let x_q = &x - &x_c;
                let y_q = &y - &y_c;
                let iso = &kappa_dual * ((&x_c + &y_c) * 0.5);
                let p_coeff = &kappa_dual * (&x_c - &y_c);
                let m1_coeff = &e_dual * x_q;
                let m2_coeff = &e_dual * y_q;
                let mut cc = DVector::zeros(m);
                for i in 0..k {
                    cc[i] = p_coeff[i];
                }
                for s in 0..q {
                    cc[k + s] = m1_coeff[s];
                    cc[k + q + s] = m2_coeff[s];
                }
                // reconstruction check in g + g
                let mut rx = DVector::zeros(d);
                let mut ry = DVector::zeros(d);
                for i in 0..k {
                    rx += &kappa_g[i] * (iso[i] + p_coeff[i] * 0.5);
                    ry += &kappa_g[i] * (iso[i] - p_coeff[i] * 0.5);
                }
                for s in 0..q {
                    rx += &e_g[s] * m1_coeff[s];
                    ry += &e_g[s] * m2_coeff[s];
                }
                reconstruction = reconstruction.max((rx - x).amax()).max((ry - y).amax());
                bracket_m[a * m + b] = &basis_inv * cc;
                bracket_iso[a * m + b] = iso;
            }
        }
        if reconstruction > 1e-12 {
            return Err(CoreError::Structural(format!(
                "reductive projection does not reproduce the double bracket: residual {reconstruction:.3e}"
            )));
        }

        Ok(Self {
            pair,
            k,
            q,
            m,
            kappa_g,
            e_g,
            basis,
            basis_inv,
            metric,
            h_tensor,
            h_table,
            xi_table,
            ric_matrix,
            bracket_m,
            bracket_iso,
            bracket_reconstruction_residual: reconstruction,
        })
    }

    pub fn pair(&self) -> &Arc<SymmetricPairModel> {
        &self.pair
    }

    pub fn k_dim(&self) -> usize {
        self.k
    }

    pub fn q_dim(&self) -> usize {
        self.q
    }

    pub fn m_dim(&self) -> usize {
        self.m
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis
    }

    pub fn metric_matrix(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn h_tensor(&self) -> &Tensor3 {
        &self.h_tensor
    }

    pub fn bracket_reconstruction_residual(&self) -> f64 {
        self.bracket_reconstruction_residual
    }

    /// Coordinates of [e_a, e_b] over the model basis.
    pub fn bracket_m_coords(&self, a: usize, b: usize) -> &DVector<f64> {
        &self.bracket_m[a * self.m + b]
    }

    /// c_diag coefficients of [e_a, e_b].
    pub fn bracket_iso_coords(&self, a: usize, b: usize) -> &DVector<f64> {
        &self.bracket_iso[a * self.m + b]
    }

    fn check_vector(&self, v: &TangentVector) -> Result<()> {
        check_parts(v, self.k, self.q)
    }

    /// First slot of the ambient lift: 2u + v1 - v2.
    pub fn hat_first(&self, v: &TangentVector) -> Result<AlgVector> {
        self.check_vector(v)?;
        let (a, _) = self.lift(v);
        AlgVector::new(self.pair.algebra(), a)
    }

    /// Second slot of the ambient lift (translated to the identity): 2u - v1 - v2.
    pub fn hat_second(&self, v: &TangentVector) -> Result<AlgVector> {
        self.check_vector(v)?;
        let (_, b) = self.lift(v);
        AlgVector::new(self.pair.algebra(), b)
    }

    fn lift(&self, v: &TangentVector) -> (DVector<f64>, DVector<f64>) {
        let d = self.pair.algebra().dim();
        let mut u = DVector::zeros(d);
        for i in 0..self.k {
            u += &self.kappa_g[i] * v.p[i];
        }
        let mut v1 = DVector::zeros(d);
        let mut v2 = DVector::zeros(d);
        for s in 0..self.q {
            v1 += &self.e_g[s] * v.m1[s];
            v2 += &self.e_g[s] * v.m2[s];
        }
        (&u * 2.0 + &v1 - &v2, &u * 2.0 - &v1 - &v2)
    }

    /// Induced metric: -B(a_V, a_W) - B(b_V, b_W).
    pub fn induced_metric(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        self.check_vector(v)?;
        self.check_vector(w)?;
        let alg = self.pair.algebra();
        let (av, bv) = self.lift(v);
        let (aw, bw) = self.lift(w);
        Ok(-alg.killing_coeffs(&av, &aw) - alg.killing_coeffs(&bv, &bw))
    }

    /// Ambient 3-form at the base point:
    /// -B([a_V, a_W], a_U) - B([b_V, b_W], b_U).
    pub fn ambient_h(
        &self,
        v: &TangentVector,
        w: &TangentVector,
        u: &TangentVector,
    ) -> Result<f64> {
        self.check_vector(v)?;
        self.check_vector(w)?;
        self.check_vector(u)?;
        let alg = self.pair.algebra();
        let (av, bv) = self.lift(v);
        let (aw, bw) = self.lift(w);
        let (au, bu) = self.lift(u);
        let bra = alg.bracket_coeffs(&av, &aw);
        let brb = alg.bracket_coeffs(&bv, &bw);
        Ok(-alg.killing_coeffs(&bra, &au) - alg.killing_coeffs(&brb, &bu))
    }

    /// Second fundamental form components h_i(V, W) over the normal frame.
    pub fn second_fundamental(
        &self,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<DVector<f64>> {
        self.check_vector(v)?;
        self.check_vector(w)?;
        let alg = self.pair.algebra();
        let d = alg.dim();
        let part = |tv: &TangentVector, first: bool| -> DVector<f64> {
            let mut out = DVector::zeros(d);
            for s in 0..self.q {
                out += &self.e_g[s] * if first { tv.m1[s] } else { tv.m2[s] };
            }
            out
        };
        let br = alg.bracket_coeffs(&part(v, true), &part(w, false))
            + alg.bracket_coeffs(&part(w, true), &part(v, false));
        let mut h = DVector::zeros(self.k);
        for i in 0..self.k {
            h[i] = alg.killing_coeffs(&br, &self.kappa_g[i]);
        }
        Ok(h)
    }

    /// Mean curvature vector: the trace of h over the orthonormal basis.
    pub fn mean_curvature(&self) -> DVector<f64> {
        let mut mu = DVector::zeros(self.k);
        for i in 0..self.k {
            mu[i] = self.h_table[i].trace();
        }
        mu
    }

    /// Contraction of the ambient 3-form with the normal direction xi_i.
    pub fn contraction_xi_h(
        &self,
        v: &TangentVector,
        w: &TangentVector,
        i: usize,
    ) -> Result<f64> {
        if i >= self.k {
            return Err(CoreError::IndexOutOfRange(format!(
                "normal index {i} out of range 0..{}",
                self.k
            )));
        }
        self.check_vector(v)?;
        self.check_vector(w)?;
        let alg = self.pair.algebra();
        let (av, bv) = self.lift(v);
        let (aw, bw) = self.lift(w);
        let bra = alg.bracket_coeffs(&av, &aw);
        let brb = alg.bracket_coeffs(&bv, &bw);
        Ok(-alg.killing_coeffs(&bra, &self.kappa_g[i])
            + alg.killing_coeffs(&brb, &self.kappa_g[i]))
    }

    /// The normal frame xi_i = (kappa_i, -kappa_i) in lifted coordinates.
    pub fn normal_frame(&self) -> NormalFrame {
        let alg = self.pair.algebra();
        let mut gram_residual = 0.0_f64;
        for i in 0..self.k {
            for j in 0..self.k {
                let g = -2.0 * alg.killing_coeffs(&self.kappa_g[i], &self.kappa_g[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                gram_residual = gram_residual.max((g - want).abs());
            }
        }
        NormalFrame {
            lift_a: self.kappa_g.clone(),
            lift_b: self.kappa_g.iter().map(|v| -v).collect(),
            gram_residual,
        }
    }

    /// Coordinates over the model basis.
    pub fn coords(&self, v: &TangentVector) -> Result<DVector<f64>> {
        self.check_vector(v)?;
        Ok(&self.basis_inv * canonical_coords(v))
    }

    /// Bismut Ricci tensor evaluated on two tangent vectors; identically
    /// zero on the models built here.
    pub fn bismut_ricci(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        let x = self.coords(v)?;
        let y = self.coords(w)?;
        Ok(x.dot(&(&self.ric_matrix * y)))
    }

    /// Max |Ric| over all basis pairs.
    pub fn bismut_ricci_max(&self) -> f64 {
        self.ric_matrix.amax()
    }

    /// Bismut curvature via the two-product difference of
    /// (h_i + H(.,.,xi_i)/2) factors, summed over the normal frame.
    pub fn bismut_curvature(
        &self,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
        u: &TangentVector,
    ) -> Result<f64> {
        let cx = self.coords(x)?;
        let cy = self.coords(y)?;
        let cz = self.coords(z)?;
        let cu = self.coords(u)?;
        let mut total = 0.0;
        for i in 0..self.k {
            let f = &self.h_table[i] + &self.xi_table[i] * 0.5;
            let f_yz = cy.dot(&(&f * &cz));
            let f_xu = cx.dot(&(&f * &cu));
            let f_xz = cx.dot(&(&f * &cz));
            let f_yu = cy.dot(&(&f * &cu));
            total += f_yz * f_xu - f_xz * f_yu;
        }
        Ok(total)
    }

    /// Curvature slice R(e_a, e_b, ., .) over basis indices.
    pub fn curvature_slice(&self, a: usize, b: usize) -> DMatrix<f64> {
        let mut slice = DMatrix::zeros(self.m, self.m);
        for i in 0..self.k {
            let f = &self.h_table[i] + &self.xi_table[i] * 0.5;
            let row_a = f.row(a).transpose();
            let row_b = f.row(b).transpose();
            slice += &row_b * row_a.transpose() - &row_a * row_b.transpose();
        }
        slice
    }

    /// First basis pair (E_s, E_t) maximizing the squared xi-frame
    /// coefficients of [E_s, E_t], with the curvature value on the induced
    /// 4-tuple.
    pub fn nonflat_witness(&self) -> Result<Witness> {
        if self.q < 2 {
            return Err(CoreError::CatalogViolation(
                "q is too small to carry a non-flat witness".into(),
            ));
        }
        let mut best = (0usize, 1usize);
        let mut best_val = -1.0_f64;
        for s in 0..self.q {
            for t in (s + 1)..self.q {
                let mut sum = 0.0;
                for i in 0..self.k {
                    let c = self.h_table[i][(self.k + s, self.k + self.q + t)];
                    sum += c * c;
                }
                if sum > best_val {
                    best_val = sum;
                    best = (s, t);
                }
            }
        }
        if best_val <= 1e-14 {
            return Err(CoreError::CatalogViolation(
                "all brackets [q, q] project to zero in c".into(),
            ));
        }
        let (s, t) = best;
        let x = TangentVector::from_m1(self.k, self.q, s);
        let y = TangentVector::from_m1(self.k, self.q, t);
        let z = TangentVector::from_m2(self.k, self.q, s);
        let u = TangentVector::from_m2(self.k, self.q, t);
        let value = self.bismut_curvature(&x, &y, &z, &u)?;
        let alg = self.pair.algebra();
        let br = alg.bracket_coeffs(&self.e_g[s], &self.e_g[t]);
        let killing_norm_sq = -alg.killing_coeffs(&br, &br);
        Ok(Witness {
            s,
            t,
            value,
            frame_norm_sq: best_val,
            killing_norm_sq,
            x,
            y,
            z,
            u,
        })
    }

    /// Cyclic sum R(X,Y,Z,U) + R(Y,Z,X,U) + R(Z,X,Y,U); nonzero values
    /// certify that the torsion is not parallel.
    pub fn cyclic_curvature_defect(
        &self,
        x: &TangentVector,
        y: &TangentVector,
        z: &TangentVector,
        u: &TangentVector,
    ) -> Result<f64> {
        Ok(self.bismut_curvature(x, y, z, u)?
            + self.bismut_curvature(y, z, x, u)?
            + self.bismut_curvature(z, x, y, u)?)
    }

    /// Max |H| entry over basis triples.
    pub fn h_max(&self) -> f64 {
        self.h_tensor.amax()
    }

    /// Exterior differential of the restricted 3-form, evaluated with
    /// m-projected brackets over basis 4-tuples; the isotropy contributions
    /// vanish on invariant forms. Returns the max residual.
    pub fn closedness_check(&self) -> f64 {
        exterior_derivative_max(self.m, &self.h_tensor, |a, b| &self.bracket_m[a * self.m + b])
    }

    /// Combined residual for the metric contracts: Gram identity of the
    /// orthonormal basis, block orthogonality, and the -8B / -2B scale
    /// identities on the spanning sets.
    pub fn metric_blocks_residual(&self) -> f64 {
        let alg = self.pair.algebra();
        let mut worst = (self.metric.clone() - DMatrix::<f64>::identity(self.m, self.m)).amax();
        let k = self.k;
        let q = self.q;
        let gp = |i: usize| TangentVector::from_p(k, q, i);
        let g1 = |s: usize| TangentVector::from_m1(k, q, s);
        let g2 = |s: usize| TangentVector::from_m2(k, q, s);
        for i in 0..k {
            for j in 0..k {
                let got = self.induced_metric(&gp(i), &gp(j)).expect("valid");
                let want = -8.0 * alg.killing_coeffs(&self.kappa_g[i], &self.kappa_g[j]);
                worst = worst.max((got - want).abs());
            }
            for s in 0..q {
                worst = worst.max(self.induced_metric(&gp(i), &g1(s)).expect("valid").abs());
                worst = worst.max(self.induced_metric(&gp(i), &g2(s)).expect("valid").abs());
            }
        }
        for s in 0..q {
            for t in 0..q {
                let want = -2.0 * alg.killing_coeffs(&self.e_g[s], &self.e_g[t]);
                let got1 = self.induced_metric(&g1(s), &g1(t)).expect("valid");
                let got2 = self.induced_metric(&g2(s), &g2(t)).expect("valid");
                worst = worst.max((got1 - want).abs()).max((got2 - want).abs());
                worst = worst.max(self.induced_metric(&g1(s), &g2(t)).expect("valid").abs());
            }
        }
        worst
    }

    #[cfg(test)]
    pub(crate) fn h_table(&self) -> &[DMatrix<f64>] {
        &self.h_table
    }

    #[cfg(test)]
    pub(crate) fn xi_table(&self) -> &[DMatrix<f64>] {
        &self.xi_table
    }

    /// Bismut Ricci values over all basis pairs.
    pub fn ricci_matrix(&self) -> &DMatrix<f64> {
        &self.ric_matrix
    }

    /// Action of the isotropy frame (kappa_i, kappa_i) on the model basis,
    /// together with the largest leak of a bracket [h_i, e_j] into c_diag
    /// (zero for a reductive decomposition).
    pub(crate) fn isotropy_action(&self) -> (Vec<DMatrix<f64>>, f64) {
        let alg = self.pair.algebra();
        let d = alg.dim();
        let kappa_mat = frame_matrix(&self.kappa_g, d);
        let e_mat = frame_matrix(&self.e_g, d);
        let killing = alg.killing_matrix();
        let kappa_dual = (killing * &kappa_mat).transpose() * -2.0;
        let e_dual = (killing * &e_mat).transpose() * -2.0;
        let proj_c = self.pair.involution().projector_c();

        let elem_f: Vec<DVector<f64>> = self
            .basis
            .iter()
            .map(|v| &kappa_mat * &v.p + &e_mat * &v.m1)
            .collect();
        let elem_s: Vec<DVector<f64>> = self
            .basis
            .iter()
            .map(|v| -(&kappa_mat * &v.p) + &e_mat * &v.m2)
            .collect();

        let mut action = Vec::with_capacity(self.k);
        let mut iso_leak = 0.0_f64;
        for i in 0..self.k {
            let ad_kappa = alg.ad_matrix(&self.kappa_g[i]);
            let mut mat = DMatrix::zeros(self.m, self.m);
            for (j, (f, s)) in elem_f.iter().zip(&elem_s).enumerate() {
                let x = &ad_kappa * f;
                let y = &ad_kappa * s;
                let x_c = &proj_c * &x;
                let y_c = &proj_c * &y;
                let x_q = &x - &x_c;
                let y_q = &y - &y_c;
                iso_leak = iso_leak.max((&kappa_dual * ((&x_c + &y_c) * 0.5)).amax());
                let p_coeff = &kappa_dual * (&x_c - &y_c);
                let m1_coeff = &e_dual * x_q;
                let m2_coeff = &e_dual * y_q;
                let mut cc = DVector::zeros(self.m);
                for r in 0..self.k {
                    cc[r] = p_coeff[r];
                }
                for s_idx in 0..self.q {
                    cc[self.k + s_idx] = m1_coeff[s_idx];
                    cc[self.k + self.q + s_idx] = m2_coeff[s_idx];
                }
                mat.set_column(j, &(&self.basis_inv * cc));
            }
            action.push(mat);
        }
        (action, iso_leak)
    }
}

fn check_parts(v: &TangentVector, k: usize, q: usize) -> Result<()> {
    if v.p.len() != k || v.m1.len() != q || v.m2.len() != q {
        return Err(CoreError::InvalidParameter(format!(
            "tangent vector parts ({}, {}, {}) do not match dims ({k}, {q}, {q})",
            v.p.len(),
            v.m1.len(),
            v.m2.len()
        )));
    }
    Ok(())
}

fn frame_matrix(frame: &[DVector<f64>], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, frame.len());
    for (j, v) in frame.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Coordinates over the canonical basis (kappa_i/2, -kappa_i/2), (E_s, 0), (0, E_s).
fn canonical_coords(v: &TangentVector) -> DVector<f64> {
    let k = v.p.len();
    let q = v.m1.len();
    let mut out = DVector::zeros(k + 2 * q);
    for i in 0..k {
        out[i] = 2.0 * v.p[i];
    }
    for s in 0..q {
        out[k + s] = v.m1[s];
        out[k + q + s] = v.m2[s];
    }
    out
}

/// Max over sorted basis 4-tuples of the Chevalley-style exterior derivative
/// of a 3-form given the projected bracket table.
pub(crate) fn exterior_derivative_max<'a, F>(m: usize, h: &Tensor3, bracket: F) -> f64
where
    F: Fn(usize, usize) -> &'a DVector<f64>,
{
    let contract = |w: &DVector<f64>, x: usize, y: usize| -> f64 {
        let mut acc = 0.0;
        for r in 0..m {
            let c = w[r];
            if c != 0.0 {
                acc += c * h.get(r, x, y);
            }
        }
        acc
    };
    let mut worst = 0.0_f64;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                for e in (c + 1)..m {
                    let v = -contract(bracket(a, b), c, e)
                        + contract(bracket(a, c), b, e)
                        - contract(bracket(a, e), b, c)
                        - contract(bracket(b, c), a, e)
                        + contract(bracket(b, e), a, c)
                        - contract(bracket(c, e), a, b);
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    worst
}
