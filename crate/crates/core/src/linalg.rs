//! Dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{CoreError, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Flatten a complex matrix into a real vector (re/im interleaved, column major).
pub fn realify(m: &CMatrix) -> DVector<f64> {
    let mut v = DVector::zeros(2 * m.len());
    for (i, z) in m.iter().enumerate() {
        v[2 * i] = z.re;
        v[2 * i + 1] = z.im;
    }
    v
}

/// Least-squares expansion of vectors in a fixed spanning set via the
/// normal equations; one refinement step keeps the solve near machine
/// precision for the well-conditioned frame matrices used here.
#[derive(Debug)]
pub struct SpanExpander {
    columns: DMatrix<f64>,
    gram_chol: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
}

impl SpanExpander {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let gram = columns.transpose() * &columns;
        let gram_chol = nalgebra::linalg::Cholesky::new(gram).ok_or_else(|| {
            CoreError::InvalidParameter("spanning set is linearly dependent".into())
        })?;
        Ok(Self { columns, gram_chol })
    }

    /// Coefficients of `target` over the spanning columns plus the max-norm residual.
    pub fn expand(&self, target: &DVector<f64>) -> (DVector<f64>, f64) {
        let rhs = self.columns.transpose() * target;
        let mut coeffs = self.gram_chol.solve(&rhs);
        // one step of iterative refinement
        let resid = target - &self.columns * &coeffs;
        coeffs += self.gram_chol.solve(&(self.columns.transpose() * &resid));
        let residual = (&self.columns * &coeffs - target).amax();
        (coeffs, residual)
    }
}

/// Gram-Schmidt with respect to a positive definite bilinear form.
///
/// Returns vectors v_i with form(v_i, v_j) = delta_ij. Fails if the input
/// loses rank during orthogonalization.
pub fn gram_schmidt(vectors: &[DVector<f64>], form: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for (idx, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        // two passes of re-orthogonalization for stability
        for _ in 0..2 {
            for u in &out {
                let c = u.dot(&(form * &w));
                w -= u * c;
            }
        }
        let norm2 = w.dot(&(form * &w));
        if norm2 <= 1e-18 {
            return Err(CoreError::RankLoss(idx));
        }
        out.push(w / norm2.sqrt());
    }
    Ok(out)
}

/// Deterministic selection of a spanning subset of matrix columns.
///
/// Columns are visited in order; a column is kept when its residual after
/// Euclidean projection onto the already-kept span exceeds `tol`.
pub fn independent_columns(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let mut kept: Vec<DVector<f64>> = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let col = DVector::from_column_slice(m.column(j).as_slice());
        let mut w = col.clone();
        for _ in 0..2 {
            for u in &ortho {
                let c = u.dot(&w);
                w -= u * c;
            }
        }
        let n = w.norm();
        if n > tol {
            ortho.push(w / n);
            kept.push(col);
        }
    }
    kept
}

/// Kernel dimension of a square matrix via singular values.
pub fn kernel_dim(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let scale = sv.iter().cloned().fold(1.0_f64, f64::max);
    sv.iter().filter(|&&s| s <= tol * scale).count()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Dense cubic tensor with flat storage.
#[derive(Debug, Clone)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }

    pub fn amax(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Tensor3) -> Tensor3 {
        assert_eq!(self.n, other.n);
        Tensor3 {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Max deviation from total antisymmetry over all index triples.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.get(a, b, c);
                    worst = worst.max((v + self.get(b, a, c)).abs());
                    worst = worst.max((v + self.get(a, c, b)).abs());
                }
            }
        }
        worst
    }
}
