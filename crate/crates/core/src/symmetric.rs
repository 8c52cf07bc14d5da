//! Inner symmetric pairs: involutions theta = Ad(z), the eigenspace split
//! g = c + q, and normalized frames with B-norm -1/2.
//!
//! The catalog covers the classical families of inner symmetric pairs of
//! compact type. Each row fixes one documented representative z; only the
//! induced map on basis coefficients is consumed downstream.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::lie::{build_so, build_sp, build_su, rank_of_with_seed, AlgVector, LieAlgebra};
use crate::linalg::{gram_schmidt, independent_columns, CMatrix};

/// An inner involution theta = Ad(z) represented on basis coefficients.
#[derive(Debug)]
pub struct InnerInvolution {
    algebra: Arc<LieAlgebra>,
    z: CMatrix,
    theta: DMatrix<f64>,
    involution_residual: f64,
    automorphism_residual: f64,
    isometry_residual: f64,
}

impl InnerInvolution {
    /// Build Ad(z) by conjugating each basis matrix and re-expanding.
    pub fn from_element(algebra: &Arc<LieAlgebra>, z: CMatrix) -> Result<Self> {
        let d = algebra.dim();
        let r = algebra.rep_dim();
        if z.nrows() != r || z.ncols() != r {
            return Err(CoreError::InvalidParameter(format!(
                "z must be {r} x {r} in the defining representation"
            )));
        }
        let z_inv = z.clone().try_inverse().ok_or_else(|| {
            CoreError::InvalidParameter("z is not invertible".into())
        })?;

        let mut theta = DMatrix::zeros(d, d);
        let mut expansion_residual = 0.0_f64;
        for a in 0..d {
            let conj = &z * algebra.basis_matrix(a) * &z_inv;
            let (coeffs, res) = algebra.expand(&conj);
            expansion_residual = expansion_residual.max(res);
            theta.set_column(a, &coeffs);
        }
        if expansion_residual > 1e-10 {
            return Err(CoreError::NotNormalizing(expansion_residual));
        }

        let involution_residual =
            (&theta * &theta - DMatrix::<f64>::identity(d, d)).amax();
        if involution_residual > 1e-12 {
            return Err(CoreError::NotInvolutive(format!(
                "Ad(z)^2 deviates from the identity by {involution_residual:.3e}"
            )));
        }
        let z2 = &z * &z;
        let c0 = z2[(0, 0)];
        let central = z2 - CMatrix::identity(r, r) * c0;
        if central.iter().map(|v| v.norm()).fold(0.0, f64::max) > 1e-10 {
            return Err(CoreError::NotInvolutive("z^2 is not central".into()));
        }

        // Automorphism property in operator form: ad(theta e_a) = theta ad_a theta.
        let mut automorphism_residual = 0.0_f64;
        for a in 0..d {
            let lhs = algebra.ad_matrix(&DVector::from_column_slice(theta.column(a).as_slice()));
            let rhs = &theta * algebra.ad_matrix(&basis_vec(d, a)) * &theta;
            automorphism_residual = automorphism_residual.max((lhs - rhs).amax());
        }

        let k = algebra.killing_matrix();
        let isometry_residual = (theta.transpose() * k * &theta - k).amax();

        let inv = Self {
            algebra: Arc::clone(algebra),
            z,
            theta,
            involution_residual,
            automorphism_residual,
            isometry_residual,
        };
        if inv.automorphism_residual > 1e-10 {
            return Err(CoreError::Structural(format!(
                "Ad(z) is not an automorphism: residual {:.3e}",
                inv.automorphism_residual
            )));
        }
        if inv.isometry_residual > 1e-10 {
            return Err(CoreError::Structural(format!(
                "Ad(z) is not a Killing isometry: residual {:.3e}",
                inv.isometry_residual
            )));
        }
        Ok(inv)
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn z_matrix(&self) -> &CMatrix {
        &self.z
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn involution_residual(&self) -> f64 {
        self.involution_residual
    }

    pub fn automorphism_residual(&self) -> f64 {
        self.automorphism_residual
    }

    pub fn isometry_residual(&self) -> f64 {
        self.isometry_residual
    }

    /// Projector onto the +1 eigenspace c.
    pub fn projector_c(&self) -> DMatrix<f64> {
        let d = self.algebra.dim();
        (DMatrix::identity(d, d) + &self.theta) * 0.5
    }

    /// Projector onto the -1 eigenspace q.
    pub fn projector_q(&self) -> DMatrix<f64> {
        let d = self.algebra.dim();
        (DMatrix::identity(d, d) - &self.theta) * 0.5
    }
}

fn basis_vec(d: usize, a: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[a] = 1.0;
    v
}

/// Bases of the +1/-1 eigenspaces of theta, chosen by deterministic pivoted
/// reduction of the projector columns in basis order.
pub fn split_eigenspaces(inv: &InnerInvolution) -> Result<(Vec<AlgVector>, Vec<AlgVector>)> {
    let d = inv.algebra.dim();
    let trace = inv.theta.trace();
    let expected_k = ((d as f64 + trace) / 2.0).round() as usize;
    let expected_q = d - expected_k;

    let c_cols = independent_columns(&inv.projector_c(), 1e-6);
    let q_cols = independent_columns(&inv.projector_q(), 1e-6);
    if c_cols.len() != expected_k || q_cols.len() != expected_q {
        return Err(CoreError::Degenerate(format!(
            "projector ranks ({}, {}) inconsistent with trace {trace:.3} (expected ({expected_k}, {expected_q}))",
            c_cols.len(),
            q_cols.len()
        )));
    }
    let to_vecs = |cols: Vec<DVector<f64>>| -> Result<Vec<AlgVector>> {
        cols.into_iter()
            .map(|c| AlgVector::new(&inv.algebra, c))
            .collect()
    };
    Ok((to_vecs(c_cols)?, to_vecs(q_cols)?))
}

/// Normalized model of an inner symmetric pair: frames of c and q with
/// B(v, v) = -1/2, plus the residuals of every structural identity.
#[derive(Debug)]
pub struct SymmetricPairModel {
    involution: InnerInvolution,
    c_frame: Vec<AlgVector>,
    q_frame: Vec<AlgVector>,
    theta_restriction_residual: f64,
    gram_residual: f64,
    relation_residual: f64,
    qq_into_c_max: f64,
    rank_c: usize,
}

impl SymmetricPairModel {
    /// Split the eigenspaces of the involution and normalize the frames.
    pub fn from_involution(inv: InnerInvolution) -> Result<Arc<Self>> {
        let (c_basis, q_basis) = split_eigenspaces(&inv)?;
        normalize_bases(inv, &c_basis, &q_basis)
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        self.involution.algebra()
    }

    pub fn involution(&self) -> &InnerInvolution {
        &self.involution
    }

    /// Frame of c with B(kappa_i, kappa_j) = -1/2 delta_ij.
    pub fn c_frame(&self) -> &[AlgVector] {
        &self.c_frame
    }

    /// Frame of q with B(E_s, E_t) = -1/2 delta_st.
    pub fn q_frame(&self) -> &[AlgVector] {
        &self.q_frame
    }

    pub fn k_dim(&self) -> usize {
        self.c_frame.len()
    }

    pub fn q_dim(&self) -> usize {
        self.q_frame.len()
    }

    /// Dimension of the homogeneous space built on this pair: k + 2q.
    pub fn m_dim(&self) -> usize {
        self.k_dim() + 2 * self.q_dim()
    }

    pub fn rank_c(&self) -> usize {
        self.rank_c
    }

    pub fn theta_restriction_residual(&self) -> f64 {
        self.theta_restriction_residual
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// Worst residual of [c,c] in c, [c,q] in q, [q,q] in c.
    pub fn relation_residual(&self) -> f64 {
        self.relation_residual
    }

    /// Largest norm of the c-projection of a bracket [E_s, E_t]; positive
    /// exactly when [q, q] is nonzero.
    pub fn qq_into_c_max(&self) -> f64 {
        self.qq_into_c_max
    }
}

/// Gram-Schmidt the eigenspace bases against -2B so every frame vector has
/// B-norm -1/2, then validate the symmetric-pair identities.
pub fn normalize_bases(
    inv: InnerInvolution,
    c_basis: &[AlgVector],
    q_basis: &[AlgVector],
) -> Result<Arc<SymmetricPairModel>> {
    let alg = Arc::clone(inv.algebra());
    let form = inv.algebra().killing_matrix() * -2.0;
    let raw_c: Vec<DVector<f64>> = c_basis.iter().map(|v| v.coeffs.clone()).collect();
    let raw_q: Vec<DVector<f64>> = q_basis.iter().map(|v| v.coeffs.clone()).collect();
    let c_frame: Vec<AlgVector> = gram_schmidt(&raw_c, &form)?
        .into_iter()
        .map(|v| AlgVector::new(&alg, v))
        .collect::<Result<_>>()?;
    let q_frame: Vec<AlgVector> = gram_schmidt(&raw_q, &form)?
        .into_iter()
        .map(|v| AlgVector::new(&alg, v))
        .collect::<Result<_>>()?;

    let theta = inv.theta();
    let mut theta_res = 0.0_f64;
    for v in &c_frame {
        theta_res = theta_res.max((theta * &v.coeffs - &v.coeffs).amax());
    }
    for v in &q_frame {
        theta_res = theta_res.max((theta * &v.coeffs + &v.coeffs).amax());
    }

    let mut gram_res = 0.0_f64;
    for frame in [&c_frame, &q_frame] {
        for (i, x) in frame.iter().enumerate() {
            for (j, y) in frame.iter().enumerate() {
                let b = alg.killing_coeffs(&x.coeffs, &y.coeffs);
                let want = if i == j { -0.5 } else { 0.0 };
                gram_res = gram_res.max((b - want).abs());
            }
        }
    }
    if gram_res > 1e-10 {
        return Err(CoreError::Structural(format!(
            "frame Gram matrix deviates from -1/2 identity by {gram_res:.3e}"
        )));
    }

    let p_c = inv.projector_c();
    let p_q = inv.projector_q();
    let mut relation_res = 0.0_f64;
    let mut qq_into_c: f64 = 0.0;
    for (i, x) in c_frame.iter().enumerate() {
        for y in c_frame.iter().skip(i + 1) {
            let br = alg.bracket_coeffs(&x.coeffs, &y.coeffs);
            relation_res = relation_res.max((&p_q * &br).amax());
        }
        for y in &q_frame {
            let br = alg.bracket_coeffs(&x.coeffs, &y.coeffs);
            relation_res = relation_res.max((&p_c * &br).amax());
        }
    }
    for (s, x) in q_frame.iter().enumerate() {
        for y in q_frame.iter().skip(s + 1) {
            let br = alg.bracket_coeffs(&x.coeffs, &y.coeffs);
            relation_res = relation_res.max((&p_q * &br).amax());
            qq_into_c = qq_into_c.max((&p_c * &br).norm());
        }
    }
    if relation_res > 1e-10 {
        return Err(CoreError::Structural(format!(
            "symmetric-pair bracket relations violated: residual {relation_res:.3e}"
        )));
    }

    let rank_c = rank_of_with_seed(&alg, &c_frame, 0)?;
    if rank_c != alg.rank() {
        return Err(CoreError::Structural(format!(
            "rank(c) = {rank_c} differs from rank(g) = {}; the involution is not inner",
            alg.rank()
        )));
    }

    Ok(Arc::new(SymmetricPairModel {
        involution: inv,
        c_frame,
        q_frame,
        theta_restriction_residual: theta_res,
        gram_residual: gram_res,
        relation_residual: relation_res,
        qq_into_c_max: qq_into_c,
        rank_c,
    }))
}

/// Catalog row identifier, e.g. `AIII:n=3,p=1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairId {
    Aiii { n: u32, p: u32 },
    BdiEven { n: u32, p: u32 },
    BdiOdd { n: u32, p: u32 },
    Diii { n: u32 },
    Ci { n: u32 },
    Cii { p: u32, q: u32 },
}

impl PairId {
    pub fn class_name(&self) -> &'static str {
        match self {
            PairId::Aiii { .. } => "AIII",
            PairId::BdiEven { .. } => "BDI_even",
            PairId::BdiOdd { .. } => "BDI_odd",
            PairId::Diii { .. } => "DIII",
            PairId::Ci { .. } => "CI",
            PairId::Cii { .. } => "CII",
        }
    }

    /// Validate the parameter ranges of this row.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PairId::Aiii { n, p } => n >= 2 && p >= 1 && p < n,
            PairId::BdiEven { n, p } => n >= 4 && p >= 1 && p < n,
            PairId::BdiOdd { n, p } => n >= 2 && p >= 1 && p <= n,
            PairId::Diii { n } => n >= 3,
            PairId::Ci { n } => n >= 3,
            PairId::Cii { p, q } => p >= 1 && q >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(CoreError::InvalidParameter(format!(
                "parameters of {self} out of range"
            )))
        }
    }

    /// (dim g, dim c, dim q, dim M) without building anything.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let (d, k) = match *self {
            PairId::Aiii { n, p } => {
                let (n, p) = (n as usize, p as usize);
                (n * n - 1, p * p + (n - p) * (n - p) - 1)
            }
            PairId::BdiEven { n, p } => {
                let (n, p) = (n as usize, p as usize);
                (n * (2 * n - 1), p * (2 * p - 1) + (n - p) * (2 * (n - p) - 1))
            }
            PairId::BdiOdd { n, p } => {
                let (n, p) = (n as usize, p as usize);
                (n * (2 * n + 1), p * (2 * p - 1) + (n - p) * (2 * (n - p) + 1))
            }
            PairId::Diii { n } => {
                let n = n as usize;
                (n * (2 * n - 1), n * n)
            }
            PairId::Ci { n } => {
                let n = n as usize;
                (n * (2 * n + 1), n * n)
            }
            PairId::Cii { p, q } => {
                let (p, q) = (p as usize, q as usize);
                let n = p + q;
                (n * (2 * n + 1), p * (2 * p + 1) + q * (2 * q + 1))
            }
        };
        let qd = d - k;
        (d, k, qd, k + 2 * qd)
    }

    /// Construct the algebra, the standard z of the row, and the normalized model.
    pub fn build(&self) -> Result<Arc<SymmetricPairModel>> {
        self.validate()?;
        let (alg, z) = match *self {
            PairId::Aiii { n, p } => {
                let alg = build_su(n as usize)?;
                (alg, block_sign_matrix(n as usize, p as usize))
            }
            PairId::BdiEven { n, p } => {
                let alg = build_so(2 * n as usize)?;
                (alg, block_sign_matrix(2 * n as usize, 2 * p as usize))
            }
            PairId::BdiOdd { n, p } => {
                let alg = build_so(2 * n as usize + 1)?;
                (alg, block_sign_matrix(2 * n as usize + 1, 2 * p as usize))
            }
            PairId::Diii { n } => {
                let alg = build_so(2 * n as usize)?;
                (alg, rotation_block_matrix(n as usize))
            }
            PairId::Ci { n } => {
                let alg = build_sp(n as usize)?;
                (alg, quaternion_i_matrix(n as usize))
            }
            PairId::Cii { p, q } => {
                let alg = build_sp((p + q) as usize)?;
                (alg, quaternion_sign_matrix(p as usize, q as usize))
            }
        };
        let inv = InnerInvolution::from_element(&alg, z)?;
        let model = SymmetricPairModel::from_involution(inv)?;
        let (d, k, qd, _) = self.dims();
        if model.algebra().dim() != d || model.k_dim() != k || model.q_dim() != qd {
            return Err(CoreError::Degenerate(format!(
                "{self}: built dims ({}, {}, {}) disagree with the row dims ({d}, {k}, {qd})",
                model.algebra().dim(),
                model.k_dim(),
                model.q_dim()
            )));
        }
        Ok(model)
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PairId::Aiii { n, p } => write!(f, "AIII:n={n},p={p}"),
            PairId::BdiEven { n, p } => write!(f, "BDI_even:n={n},p={p}"),
            PairId::BdiOdd { n, p } => write!(f, "BDI_odd:n={n},p={p}"),
            PairId::Diii { n } => write!(f, "DIII:n={n}"),
            PairId::Ci { n } => write!(f, "CI:n={n}"),
            PairId::Cii { p, q } => write!(f, "CII:p={p},q={q}"),
        }
    }
}

impl FromStr for PairId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let (class, rest) = s
            .split_once(':')
            .ok_or_else(|| CoreError::PairParse(format!("missing ':' in '{s}'")))?;
        let mut n: Option<u32> = None;
        let mut p: Option<u32> = None;
        let mut q: Option<u32> = None;
        for item in rest.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CoreError::PairParse(format!("expected key=value, got '{item}'")))?;
            let value: u32 = value
                .trim()
                .parse()
                .map_err(|_| CoreError::PairParse(format!("bad integer '{value}'")))?;
            let slot = match key.trim() {
                "n" => &mut n,
                "p" => &mut p,
                "q" => &mut q,
                other => {
                    return Err(CoreError::PairParse(format!("unknown key '{other}'")));
                }
            };
            if slot.replace(value).is_some() {
                return Err(CoreError::PairParse(format!("duplicate key '{key}'")));
            }
        }
        let take = |opt: Option<u32>, key: &str| {
            opt.ok_or_else(|| CoreError::PairParse(format!("{class} requires key '{key}'")))
        };
        let forbid = |opt: Option<u32>, key: &str| {
            if opt.is_some() {
                Err(CoreError::PairParse(format!(
                    "{class} does not take key '{key}'"
                )))
            } else {
                Ok(())
            }
        };
        let id = match class {
            "AIII" => {
                forbid(q, "q")?;
                PairId::Aiii {
                    n: take(n, "n")?,
                    p: take(p, "p")?,
                }
            }
            "BDI_even" => {
                forbid(q, "q")?;
                PairId::BdiEven {
                    n: take(n, "n")?,
                    p: take(p, "p")?,
                }
            }
            "BDI_odd" => {
                forbid(q, "q")?;
                PairId::BdiOdd {
                    n: take(n, "n")?,
                    p: take(p, "p")?,
                }
            }
            "DIII" => {
                forbid(p, "p")?;
                forbid(q, "q")?;
                PairId::Diii { n: take(n, "n")? }
            }
            "CI" => {
                forbid(p, "p")?;
                forbid(q, "q")?;
                PairId::Ci { n: take(n, "n")? }
            }
            "CII" => {
                forbid(n, "n")?;
                PairId::Cii {
                    p: take(p, "p")?,
                    q: take(q, "q")?,
                }
            }
            other => {
                return Err(CoreError::PairParse(format!("unknown class '{other}'")));
            }
        };
        Ok(id)
    }
}

/// diag(-1 x p, 1 x (n-p)).
fn block_sign_matrix(n: usize, p: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| {
        if r != c {
            Complex::new(0.0, 0.0)
        } else if r < p {
            Complex::new(-1.0, 0.0)
        } else {
            Complex::new(1.0, 0.0)
        }
    })
}

/// Orthogonal complex structure: the 2x2 rotation [[0,-1],[1,0]] repeated n times.
fn rotation_block_matrix(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(2 * j, 2 * j + 1)] = Complex::new(-1.0, 0.0);
        m[(2 * j + 1, 2 * j)] = Complex::new(1.0, 0.0);
    }
    m
}

/// The quaternion unit i inside the 2n x 2n realification: diag(i I_n, -i I_n).
fn quaternion_i_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r != c {
            Complex::new(0.0, 0.0)
        } else if r < n {
            Complex::new(0.0, 1.0)
        } else {
            Complex::new(0.0, -1.0)
        }
    })
}

/// Quaternionic diag(-I_p, I_q) realified: diag(-I_p, I_q, -I_p, I_q).
fn quaternion_sign_matrix(p: usize, q: usize) -> CMatrix {
    let n = p + q;
    CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r != c {
            Complex::new(0.0, 0.0)
        } else if r % n < p {
            Complex::new(-1.0, 0.0)
        } else {
            Complex::new(1.0, 0.0)
        }
    })
}

/// All catalog rows whose homogeneous-space dimension is at most `max_dim`,
/// in deterministic class-then-parameter order.
pub fn catalog_entries(max_dim: usize) -> Vec<PairId> {
    let mut out = Vec::new();
    // AIII: m = n^2 - 1 + 2p(n-p), minimized over p at p = 1.
    let mut n = 2;
    while (n * n - 1 + 2 * (n - 1)) <= max_dim {
        for p in 1..n {
            let id = PairId::Aiii {
                n: n as u32,
                p: p as u32,
            };
            if id.dims().3 <= max_dim {
                out.push(id);
            }
        }
        n += 1;
    }
    // BDI_even: m minimized over p at the endpoints.
    let mut n = 4;
    while (PairId::BdiEven { n: n as u32, p: 1 }).dims().3 <= max_dim {
        for p in 1..n {
            let id = PairId::BdiEven {
                n: n as u32,
                p: p as u32,
            };
            if id.dims().3 <= max_dim {
                out.push(id);
            }
        }
        n += 1;
    }
    // BDI_odd: m minimized over p at p = n.
    let mut n = 2;
    while (PairId::BdiOdd {
        n: n as u32,
        p: n as u32,
    })
    .dims()
    .3 <= max_dim
    {
        for p in 1..=n {
            let id = PairId::BdiOdd {
                n: n as u32,
                p: p as u32,
            };
            if id.dims().3 <= max_dim {
                out.push(id);
            }
        }
        n += 1;
    }
    // DIII: m = 3n^2 - 2n.
    let mut n = 3;
    while (PairId::Diii { n: n as u32 }).dims().3 <= max_dim {
        out.push(PairId::Diii { n: n as u32 });
        n += 1;
    }
    // CI: m = 3n^2 + 2n.
    let mut n = 3;
    while (PairId::Ci { n: n as u32 }).dims().3 <= max_dim {
        out.push(PairId::Ci { n: n as u32 });
        n += 1;
    }
    // CII: canonical representatives with p <= q.
    let mut p = 1;
    while (PairId::Cii {
        p: p as u32,
        q: p as u32,
    })
    .dims()
    .3 <= max_dim
    {
        let mut q = p;
        loop {
            let id = PairId::Cii {
                p: p as u32,
                q: q as u32,
            };
            if id.dims().3 > max_dim {
                break;
            }
            out.push(id);
            q += 1;
        }
        p += 1;
    }
    out
}
