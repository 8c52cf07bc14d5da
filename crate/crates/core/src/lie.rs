//! Compact matrix Lie algebras: structure constants, brackets, Killing forms.
//!
//! Algebras are built once from a deterministic matrix basis in the defining
//! representation. Structure constants are computed from matrix commutators
//! and frozen; every downstream computation works on basis coefficients only.
//! Each constructor self-validates (Jacobi identity, negative definite Killing
//! form, ad-invariance) and records the residuals instead of bare booleans.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::linalg::{kernel_dim, realify, CMatrix, SpanExpander};

/// Residual above which a spanning set is rejected as not bracket-closed.
pub const SUBALGEBRA_CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    rank: usize,
    rep_dim: usize,
    basis: Vec<CMatrix>,
    /// ad[a] has entry (k, b) = c^k_{ab}, so that [e_a, e_b] = ad[a] * e_b.
    ad: Vec<DMatrix<f64>>,
    killing: DMatrix<f64>,
    expander: SpanExpander,
    jacobi_residual: f64,
    ad_invariance_residual: f64,
    expansion_residual: f64,
}

impl LieAlgebra {
    /// Build from a matrix basis; computes and validates all invariants.
    fn from_basis(name: &str, basis: Vec<CMatrix>) -> Result<Arc<Self>> {
        let dim = basis.len();
        if dim == 0 {
            return Err(CoreError::InvalidParameter("empty basis".into()));
        }
        let rep_dim = basis[0].nrows();
        for m in &basis {
            if m.nrows() != rep_dim || m.ncols() != rep_dim {
                return Err(CoreError::InvalidParameter(
                    "basis matrices must share one square shape".into(),
                ));
            }
        }

        let columns = DMatrix::from_columns(
            &basis.iter().map(realify).collect::<Vec<_>>(),
        );
        let expander = SpanExpander::new(columns)?;

        // Structure constants from commutators; antisymmetry holds by
        // construction since only a < b is computed.
        let mut ad = vec![DMatrix::zeros(dim, dim); dim];
        let mut expansion_residual = 0.0_f64;
        for a in 0..dim {
            for b in (a + 1)..dim {
                let comm = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                let (coeffs, res) = expander.expand(&realify(&comm));
                expansion_residual = expansion_residual.max(res);
                for k in 0..dim {
                    ad[a][(k, b)] = coeffs[k];
                    ad[b][(k, a)] = -coeffs[k];
                }
            }
        }
        if expansion_residual > 1e-10 {
            return Err(CoreError::Structural(format!(
                "basis not closed under commutator: residual {expansion_residual:.3e}"
            )));
        }

        // Jacobi identity in operator form: ad([x, y]) = [ad x, ad y].
        let mut jacobi_residual = 0.0_f64;
        for a in 0..dim {
            for b in (a + 1)..dim {
                let lhs: DMatrix<f64> = (0..dim)
                    .map(|k| &ad[k] * ad[a][(k, b)])
                    .fold(DMatrix::zeros(dim, dim), |acc, m| acc + m);
                let rhs = &ad[a] * &ad[b] - &ad[b] * &ad[a];
                jacobi_residual = jacobi_residual.max((lhs - rhs).amax());
            }
        }

        let mut killing = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let v = (&ad[a] * &ad[b]).trace();
                killing[(a, b)] = v;
                killing[(b, a)] = v;
            }
        }
        let eigs = killing.clone().symmetric_eigen().eigenvalues;
        if eigs.iter().any(|&l| l >= 0.0) {
            return Err(CoreError::Structural(format!(
                "Killing form not negative definite for {name}: max eigenvalue {:.3e}",
                eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            )));
        }

        // ad-invariance of B: K * ad_a is antisymmetric for every a.
        let mut ad_invariance_residual = 0.0_f64;
        for ada in &ad {
            let s = &killing * ada;
            ad_invariance_residual = ad_invariance_residual.max((&s + s.transpose()).amax());
        }

        if jacobi_residual > 1e-12 {
            return Err(CoreError::Structural(format!(
                "Jacobi residual {jacobi_residual:.3e} too large for {name}"
            )));
        }
        if ad_invariance_residual > 1e-10 {
            return Err(CoreError::Structural(format!(
                "ad-invariance residual {ad_invariance_residual:.3e} too large for {name}"
            )));
        }

        // Rank of the full algebra: kernel dimension of ad(x) for a seeded
        // generic x, minimized over three draws.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut rank = dim;
        for _ in 0..3 {
            let mut adx = DMatrix::zeros(dim, dim);
            for ada in &ad {
                let c: f64 = rng.gen_range(-1.0..1.0);
                adx += ada * c;
            }
            rank = rank.min(kernel_dim(&adx, 1e-8));
        }

        Ok(Arc::new(LieAlgebra {
            name: name.to_string(),
            dim,
            rank,
            rep_dim,
            basis,
            ad,
            killing,
            expander,
            jacobi_residual,
            ad_invariance_residual,
            expansion_residual,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    pub fn basis_matrix(&self, a: usize) -> &CMatrix {
        &self.basis[a]
    }

    pub fn killing_matrix(&self) -> &DMatrix<f64> {
        &self.killing
    }

    /// Structure constant c^k_{ab}.
    pub fn struct_const(&self, a: usize, b: usize, k: usize) -> f64 {
        self.ad[a][(k, b)]
    }

    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi_residual
    }

    pub fn ad_invariance_residual(&self) -> f64 {
        self.ad_invariance_residual
    }

    pub fn expansion_residual(&self) -> f64 {
        self.expansion_residual
    }

    /// The matrix of ad(x) on basis coefficients.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            if x[a] != 0.0 {
                m += &self.ad[a] * x[a];
            }
        }
        m
    }

    /// Bracket on raw coefficient vectors.
    pub fn bracket_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for a in 0..self.dim {
            if x[a] != 0.0 {
                out += &self.ad[a] * y * x[a];
            }
        }
        out
    }

    /// Killing form on raw coefficient vectors.
    pub fn killing_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.killing * y))
    }

    /// Expand a defining-representation matrix over the basis.
    pub fn expand(&self, m: &CMatrix) -> (DVector<f64>, f64) {
        self.expander.expand(&realify(m))
    }

    /// Realize a coefficient vector as a matrix in the defining representation.
    pub fn to_matrix(&self, x: &DVector<f64>) -> CMatrix {
        let mut m = CMatrix::zeros(self.rep_dim, self.rep_dim);
        for a in 0..self.dim {
            if x[a] != 0.0 {
                m += &self.basis[a] * Complex::new(x[a], 0.0);
            }
        }
        m
    }

    fn compatible(&self, other: &LieAlgebra) -> bool {
        std::ptr::eq(self, other) || (self.name == other.name && self.dim == other.dim)
    }
}

/// Element of a Lie algebra, stored as coefficients over the frozen basis.
#[derive(Debug, Clone)]
pub struct AlgVector {
    pub algebra: Arc<LieAlgebra>,
    pub coeffs: DVector<f64>,
}

impl AlgVector {
    pub fn new(algebra: &Arc<LieAlgebra>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != algebra.dim() {
            return Err(CoreError::InvalidParameter(format!(
                "coefficient length {} does not match dim {}",
                coeffs.len(),
                algebra.dim()
            )));
        }
        Ok(Self {
            algebra: Arc::clone(algebra),
            coeffs,
        })
    }

    pub fn zero(algebra: &Arc<LieAlgebra>) -> Self {
        Self {
            algebra: Arc::clone(algebra),
            coeffs: DVector::zeros(algebra.dim()),
        }
    }

    pub fn basis(algebra: &Arc<LieAlgebra>, a: usize) -> Self {
        let mut coeffs = DVector::zeros(algebra.dim());
        coeffs[a] = 1.0;
        Self {
            algebra: Arc::clone(algebra),
            coeffs,
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        self.algebra.to_matrix(&self.coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            coeffs: &self.coeffs * s,
        }
    }
}

/// Lie bracket [x, y] via the frozen structure constants.
pub fn bracket(x: &AlgVector, y: &AlgVector) -> Result<AlgVector> {
    if !x.algebra.compatible(&y.algebra) {
        return Err(CoreError::AlgebraMismatch(format!(
            "{} vs {}",
            x.algebra.name(),
            y.algebra.name()
        )));
    }
    Ok(AlgVector {
        algebra: Arc::clone(&x.algebra),
        coeffs: x.algebra.bracket_coeffs(&x.coeffs, &y.coeffs),
    })
}

/// Cartan-Killing form B(x, y).
pub fn killing(x: &AlgVector, y: &AlgVector) -> Result<f64> {
    if !x.algebra.compatible(&y.algebra) {
        return Err(CoreError::AlgebraMismatch(format!(
            "{} vs {}",
            x.algebra.name(),
            y.algebra.name()
        )));
    }
    Ok(x.algebra.killing_coeffs(&x.coeffs, &y.coeffs))
}

/// Rank of a bracket-closed subspace.
///
/// Draws a seeded generic element x of the subspace, computes the kernel
/// dimension of ad(x) restricted to the subspace, repeats three times and
/// takes the minimum. Rejects spanning sets that are not bracket-closed.
pub fn rank_of(algebra: &Arc<LieAlgebra>, subspace: &[AlgVector]) -> Result<usize> {
    rank_of_with_seed(algebra, subspace, 0)
}

pub fn rank_of_with_seed(
    algebra: &Arc<LieAlgebra>,
    subspace: &[AlgVector],
    seed: u64,
) -> Result<usize> {
    if subspace.is_empty() {
        return Err(CoreError::InvalidParameter("empty subspace".into()));
    }
    for v in subspace {
        if !v.algebra.compatible(algebra) {
            return Err(CoreError::AlgebraMismatch("subspace vector".into()));
        }
    }
    let d = algebra.dim();
    let r = subspace.len();
    let span = DMatrix::from_columns(
        &subspace.iter().map(|v| v.coeffs.clone()).collect::<Vec<_>>(),
    );
    let span_svd = SpanExpander::new(span)?;

    // Closure check: every [s_i, s_j] must re-expand over the subspace.
    let mut closure_residual = 0.0_f64;
    for i in 0..r {
        for j in (i + 1)..r {
            let br = algebra.bracket_coeffs(&subspace[i].coeffs, &subspace[j].coeffs);
            let (_, res) = span_svd.expand(&br);
            let scale = br.amax().max(1.0);
            closure_residual = closure_residual.max(res / scale);
        }
    }
    if closure_residual > SUBALGEBRA_CLOSURE_TOL {
        return Err(CoreError::Structural(format!(
            "subspace not bracket-closed: residual {closure_residual:.3e}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = r;
    for _ in 0..3 {
        let mut x = DVector::zeros(d);
        for v in subspace {
            let c: f64 = rng.gen_range(-1.0..1.0);
            x += &v.coeffs * c;
        }
        let adx = algebra.ad_matrix(&x);
        // ad(x) restricted to the subspace, in subspace coordinates.
        let mut restricted = DMatrix::zeros(r, r);
        for (j, v) in subspace.iter().enumerate() {
            let image = &adx * &v.coeffs;
            let (coeffs, _) = span_svd.expand(&image);
            restricted.set_column(j, &coeffs);
        }
        best = best.min(kernel_dim(&restricted, 1e-8));
    }
    Ok(best)
}

fn cplx(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn e_matrix(n: usize, a: usize, b: usize, v: Complex<f64>) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(a, b)] = v;
    m
}

/// su(n): traceless anti-Hermitian n x n complex matrices.
///
/// Basis order: for each a < b (row major) the real pair E_ab - E_ba then the
/// imaginary pair i(E_ab + E_ba); afterwards the traceless imaginary
/// diagonals i(E_jj - E_{j+1,j+1}), j = 1..n-1.
pub fn build_su(n: usize) -> Result<Arc<LieAlgebra>> {
    if n < 2 {
        return Err(CoreError::InvalidParameter(format!("su({n}) needs n >= 2")));
    }
    let mut basis = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in (a + 1)..n {
            basis.push(e_matrix(n, a, b, cplx(1.0, 0.0)) + e_matrix(n, b, a, cplx(-1.0, 0.0)));
            basis.push(e_matrix(n, a, b, cplx(0.0, 1.0)) + e_matrix(n, b, a, cplx(0.0, 1.0)));
        }
    }
    for j in 0..(n - 1) {
        basis.push(e_matrix(n, j, j, cplx(0.0, 1.0)) + e_matrix(n, j + 1, j + 1, cplx(0.0, -1.0)));
    }
    debug_assert_eq!(basis.len(), n * n - 1);
    LieAlgebra::from_basis(&format!("su({n})"), basis)
}

/// so(n): antisymmetric real n x n matrices, basis E_ab - E_ba for a < b.
pub fn build_so(n: usize) -> Result<Arc<LieAlgebra>> {
    if n < 5 {
        return Err(CoreError::InvalidParameter(format!("so({n}) needs n >= 5")));
    }
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            basis.push(e_matrix(n, a, b, cplx(1.0, 0.0)) + e_matrix(n, b, a, cplx(-1.0, 0.0)));
        }
    }
    LieAlgebra::from_basis(&format!("so({n})"), basis)
}

/// sp(n): quaternionic n x n matrices realified as 2n x 2n complex blocks
/// [[A, B], [-conj(B), conj(A)]] with A anti-Hermitian and B symmetric.
///
/// Basis order: the A part (u(n): off-diagonal real/imaginary pairs for
/// a < b, then the diagonals i E_aa), followed by the B part (symmetric:
/// real/imaginary pairs for a < b, then E_aa and i E_aa per diagonal).
pub fn build_sp(n: usize) -> Result<Arc<LieAlgebra>> {
    if n < 1 {
        return Err(CoreError::InvalidParameter(format!("sp({n}) needs n >= 1")));
    }
    let m = 2 * n;
    let embed_a = |a_mat: &CMatrix| -> CMatrix {
        let mut out = CMatrix::zeros(m, m);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = a_mat[(r, c)];
                out[(n + r, n + c)] = a_mat[(r, c)].conj();
            }
        }
        out
    };
    let embed_b = |b_mat: &CMatrix| -> CMatrix {
        let mut out = CMatrix::zeros(m, m);
        for r in 0..n {
            for c in 0..n {
                out[(r, n + c)] = b_mat[(r, c)];
                out[(n + r, c)] = -b_mat[(r, c)].conj();
            }
        }
        out
    };

    let mut basis = Vec::with_capacity(n * (2 * n + 1));
    for a in 0..n {
        for b in (a + 1)..n {
            basis.push(embed_a(
                &(e_matrix(n, a, b, cplx(1.0, 0.0)) + e_matrix(n, b, a, cplx(-1.0, 0.0))),
            ));
            basis.push(embed_a(
                &(e_matrix(n, a, b, cplx(0.0, 1.0)) + e_matrix(n, b, a, cplx(0.0, 1.0))),
            ));
        }
    }
    for a in 0..n {
        basis.push(embed_a(&e_matrix(n, a, a, cplx(0.0, 1.0))));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            basis.push(embed_b(
                &(e_matrix(n, a, b, cplx(1.0, 0.0)) + e_matrix(n, b, a, cplx(1.0, 0.0))),
            ));
            basis.push(embed_b(
                &(e_matrix(n, a, b, cplx(0.0, 1.0)) + e_matrix(n, b, a, cplx(0.0, 1.0))),
            ));
        }
    }
    for a in 0..n {
        basis.push(embed_b(&e_matrix(n, a, a, cplx(1.0, 0.0))));
        basis.push(embed_b(&e_matrix(n, a, a, cplx(0.0, 1.0))));
    }
    debug_assert_eq!(basis.len(), n * (2 * n + 1));
    LieAlgebra::from_basis(&format!("sp({n})"), basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn random_vector(alg: &Arc<LieAlgebra>, rng: &mut ChaCha8Rng) -> AlgVector {
        let coeffs = DVector::from_iterator(
            alg.dim(),
            (0..alg.dim()).map(|_| rng.gen_range(-1.0..1.0)),
        );
        AlgVector::new(alg, coeffs).unwrap()
    }

    #[test]
    fn su2_dimensions() {
        let su2 = build_su(2).unwrap();
        assert_eq!(su2.dim(), 3);
        assert_eq!(su2.rank(), 1);
    }

    #[test]
    fn su2_killing_of_diagonal_element() {
        let su2 = build_su(2).unwrap();
        // diag(i, -i) is the last basis element in the documented order.
        let x = AlgVector::basis(&su2, 2);
        assert!((killing(&x, &x).unwrap() - (-8.0)).abs() < 1e-12);
    }

    #[test]
    fn su3_killing_matches_defining_trace() {
        // Killing form of su(n) is 2n * Re tr(XY) on the defining rep;
        // the ad-trace is the independently computed side.
        let su3 = build_su(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x = random_vector(&su3, &mut rng);
            let y = random_vector(&su3, &mut rng);
            let ad_side = killing(&x, &y).unwrap();
            let rep_side = 6.0 * (x.to_matrix() * y.to_matrix()).trace().re;
            assert!(
                (ad_side - rep_side).abs() <= 1e-10 * ad_side.abs().max(1.0),
                "ad {ad_side} vs rep {rep_side}"
            );
        }
    }

    #[test]
    fn so5_dimensions() {
        let so5 = build_so(5).unwrap();
        assert_eq!(so5.dim(), 10);
        assert_eq!(so5.rank(), 2);
    }

    #[test]
    fn so6_killing_matches_defining_trace() {
        let so6 = build_so(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = random_vector(&so6, &mut rng);
            let y = random_vector(&so6, &mut rng);
            let ad_side = killing(&x, &y).unwrap();
            let rep_side = 4.0 * (x.to_matrix() * y.to_matrix()).trace().re;
            assert!((ad_side - rep_side).abs() <= 1e-10 * ad_side.abs().max(1.0));
        }
    }

    #[test]
    fn so8_jacobi_residual() {
        let so8 = build_so(8).unwrap();
        assert!(so8.jacobi_residual() <= 1e-12);
    }

    #[test]
    fn sp1_matches_su2_killing_spectrum() {
        let sp1 = build_sp(1).unwrap();
        let su2 = build_su(2).unwrap();
        assert_eq!(sp1.dim(), 3);
        let mut e1: Vec<f64> = sp1
            .killing_matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        let mut e2: Vec<f64> = su2
            .killing_matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        e1.sort_by(f64::total_cmp);
        e2.sort_by(f64::total_cmp);
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sp2_dimensions_and_killing() {
        let sp2 = build_sp(2).unwrap();
        assert_eq!(sp2.dim(), 10);
        assert_eq!(sp2.rank(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = random_vector(&sp2, &mut rng);
            let y = random_vector(&sp2, &mut rng);
            let ad_side = killing(&x, &y).unwrap();
            let rep_side = 6.0 * (x.to_matrix() * y.to_matrix()).trace().re;
            assert!((ad_side - rep_side).abs() <= 1e-10 * ad_side.abs().max(1.0));
        }
    }

    #[test]
    fn bracket_matches_matrix_commutator() {
        let su3 = build_su(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = random_vector(&su3, &mut rng);
            let y = random_vector(&su3, &mut rng);
            let br = bracket(&x, &y).unwrap();
            let comm = x.to_matrix() * y.to_matrix() - y.to_matrix() * x.to_matrix();
            let (coeffs, res) = su3.expand(&comm);
            assert!(res <= 1e-12);
            assert!((br.coeffs - coeffs).amax() <= 1e-12);
        }
    }

    #[test]
    fn killing_of_zero_vanishes() {
        let su2 = build_su(2).unwrap();
        let x = AlgVector::basis(&su2, 0);
        let zero = AlgVector::zero(&su2);
        assert_eq!(killing(&x, &zero).unwrap(), 0.0);
    }

    #[test]
    fn killing_ad_invariance_on_random_triples() {
        let so5 = build_so(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = random_vector(&so5, &mut rng);
            let y = random_vector(&so5, &mut rng);
            let z = random_vector(&so5, &mut rng);
            let lhs = killing(&bracket(&x, &y).unwrap(), &z).unwrap();
            let rhs = killing(&y, &bracket(&x, &z).unwrap()).unwrap();
            assert!((lhs + rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn rank_of_full_su3() {
        let su3 = build_su(3).unwrap();
        let basis: Vec<_> = (0..su3.dim()).map(|a| AlgVector::basis(&su3, a)).collect();
        assert_eq!(rank_of(&su3, &basis).unwrap(), 2);
    }

    #[test]
    fn rank_of_rejects_open_subspace() {
        // span{E_12 - E_21 (real), i(E_12 + E_21)} in su(2) is not closed.
        let su2 = build_su(2).unwrap();
        let s = vec![AlgVector::basis(&su2, 0), AlgVector::basis(&su2, 1)];
        assert!(matches!(
            rank_of(&su2, &s),
            Err(CoreError::Structural(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(matches!(build_su(1), Err(CoreError::InvalidParameter(_))));
        assert!(matches!(build_so(4), Err(CoreError::InvalidParameter(_))));
        assert!(matches!(build_sp(0), Err(CoreError::InvalidParameter(_))));
    }

    #[test]
    fn bracket_rejects_algebra_mismatch() {
        let su2 = build_su(2).unwrap();
        let su3 = build_su(3).unwrap();
        let x = AlgVector::basis(&su2, 0);
        let y = AlgVector::basis(&su3, 0);
        assert!(matches!(
            bracket(&x, &y),
            Err(CoreError::AlgebraMismatch(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_is_antisymmetric(seed in 0u64..1000) {
            let su2 = build_su(2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_vector(&su2, &mut rng);
            let y = random_vector(&su2, &mut rng);
            let xy = bracket(&x, &y).unwrap();
            let yx = bracket(&y, &x).unwrap();
            prop_assert!((xy.coeffs.clone() + yx.coeffs).amax() <= 1e-13);
            let xx = bracket(&x, &x).unwrap();
            prop_assert!(xx.coeffs.amax() <= 1e-13);
        }
    }
}
