//! Dense complex matrix arithmetic and the decompositions every other
//! module consumes: SVD-backed smallest singular values, Hermitian
//! functional calculus, polar decomposition and general eigenvalues.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eig;
use crate::error::{Error, Result};
use crate::scalar::ScalarFunction;

/// Base relative tolerance used by the kernel's own integrity checks.
pub const BASE_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major at the serialization boundary.
///
/// Internally backed by a column-major `nalgebra` matrix; all arithmetic
/// and decompositions delegate to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

/// Result of a polar decomposition `M = unitary * positive`.
///
/// For singular `M` the unitary factor is completed to a full unitary by
/// pairing the left and right singular vectors of the null spaces in SVD
/// order, so the `unitary * adjoint(unitary) = I` contract holds uniformly.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub unitary: ComplexMatrix,
    pub positive: ComplexMatrix,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must be nonempty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_iterator(rows, cols, entries),
        })
    }

    /// Builds a matrix from a generator on (row, col).
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    /// Square matrix with `values` on the diagonal.
    pub fn diagonal(values: &[Complex64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_row_slice(values)),
        }
    }

    pub(crate) fn from_na(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub(crate) fn as_na(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn entries_row_major(&self) -> Vec<Complex64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape("matrix addition shape mismatch".into()));
        }
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape("matrix subtraction shape mismatch".into()));
        }
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Shape(format!(
                "matrix product shape mismatch: {}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            inner: self.inner.map(|v| v * c),
        }
    }

    /// `self - z * I`; only defined for square matrices.
    pub fn shift(&self, z: Complex64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("diagonal shift requires a square matrix".into()));
        }
        let mut m = self.inner.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= z;
        }
        Ok(Self { inner: m })
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    /// Operator norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        let sv = self.inner.clone().singular_values();
        sv.iter().cloned().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Max absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows(), other.rows());
        assert_eq!(self.cols(), other.cols());
        let mut worst = 0.0f64;
        for (a, b) in self.inner.iter().zip(other.inner.iter()) {
            worst = worst.max((a - b).norm());
        }
        worst
    }

    /// Hermitian deviation `||M - M*||` in operator norm (square only).
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        ComplexMatrix::from_na(&self.inner - self.inner.adjoint()).operator_norm()
    }

    /// Determinant (square only); used by tests as an independent route.
    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant requires a square matrix".into()));
        }
        Ok(self.inner.determinant())
    }

    /// Stacks blocks vertically. All blocks must share a column count.
    pub fn vstack(blocks: &[&ComplexMatrix]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Dimension("vstack of zero blocks".into()));
        }
        let cols = blocks[0].cols();
        if blocks.iter().any(|b| b.cols() != cols) {
            return Err(Error::Shape("vstack column mismatch".into()));
        }
        let total: usize = blocks.iter().map(|b| b.rows()).sum();
        let mut out = DMatrix::zeros(total, cols);
        let mut at = 0;
        for b in blocks {
            out.view_mut((at, 0), (b.rows(), cols)).copy_from(&b.inner);
            at += b.rows();
        }
        Ok(Self { inner: out })
    }

    /// Assembles a block matrix from an `rows x cols` grid of optional
    /// uniform `d x d` blocks; `None` stands for a zero block.
    pub fn from_block_grid(
        grid_rows: usize,
        grid_cols: usize,
        d: usize,
        block: impl Fn(usize, usize) -> Option<ComplexMatrix>,
    ) -> Self {
        let mut out = DMatrix::zeros(grid_rows * d, grid_cols * d);
        for bi in 0..grid_rows {
            for bj in 0..grid_cols {
                if let Some(b) = block(bi, bj) {
                    debug_assert_eq!(b.rows(), d);
                    debug_assert_eq!(b.cols(), d);
                    out.view_mut((bi * d, bj * d), (d, d)).copy_from(&b.inner);
                }
            }
        }
        Self { inner: out }
    }

    /// Extracts the `d x d` block at block coordinates (bi, bj).
    pub fn block(&self, bi: usize, bj: usize, d: usize) -> ComplexMatrix {
        ComplexMatrix::from_na(self.inner.view((bi * d, bj * d), (d, d)).into_owned())
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "vector of length {} against a {}x{} matrix",
                x.len(),
                self.rows(),
                self.cols()
            )));
        }
        let v = DVector::from_row_slice(x);
        Ok((&self.inner * v).iter().cloned().collect())
    }
}

/// Euclidean norm of a complex vector.
pub fn vector_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest singular value of a nonempty matrix.
///
/// Zero exactly when the matrix is rank-deficient (in exact arithmetic);
/// numerically accurate to machine precision times the largest singular
/// value, which is what the spectrum residuals rely on.
pub fn min_singular_value(m: &ComplexMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Dimension("min_singular_value of empty matrix".into()));
    }
    let sv = m.inner.clone().singular_values();
    Ok(sv.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending with the
/// matching orthonormal eigenvector columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::Shape("hermitian_eigen requires a square matrix".into()));
    }
    let defect = h.hermitian_defect();
    let scale = 1.0 + h.operator_norm();
    if defect > 1e-8 * scale {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian: defect {defect:.3e}"
        )));
    }
    // Symmetrize so roundoff-level skew parts cannot leak into the result.
    let sym = (&h.inner + h.inner.adjoint()).map(|v| v * Complex64::new(0.5, 0.0));
    let se = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let d = h.rows();
    let vecs = DMatrix::from_fn(d, d, |i, j| se.eigenvectors[(i, order[j])]);
    Ok((vals, ComplexMatrix::from_na(vecs)))
}

/// Applies a scalar function to a Hermitian matrix through its
/// eigendecomposition: `V diag(f(lambda)) V*`.
///
/// Eigenvalues within roundoff below an admissible-domain boundary at zero
/// are clamped to zero before `f` is applied; a genuinely out-of-domain
/// eigenvalue is a domain error.
pub fn hermitian_function(h: &ComplexMatrix, f: &ScalarFunction) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let clamp = BASE_TOL * (1.0 + h.operator_norm());
    let mut mapped = Vec::with_capacity(vals.len());
    for &lambda in &vals {
        let lam = if lambda < 0.0 && lambda >= -clamp { 0.0 } else { lambda };
        mapped.push(f.apply(lam)?);
    }
    let d = h.rows();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(mapped[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let out = vecs.as_na() * diag * vecs.as_na().adjoint();
    // Exactly Hermitian output: fold the roundoff skew part away.
    let herm = (&out + out.adjoint()).map(|v| v * Complex64::new(0.5, 0.0));
    Ok(ComplexMatrix::from_na(herm))
}

/// Polar decomposition `M = U |M|` of a square matrix via SVD.
///
/// `|M| = (M*M)^{1/2}` and `U = W V*` where `M = W S V*`; pairing all left
/// and right singular vectors (null directions included) makes `U` a full
/// unitary even for singular `M`.
pub fn polar_decompose(m: &ComplexMatrix) -> Result<PolarFactors> {
    if !m.is_square() {
        return Err(Error::Shape("polar decomposition requires a square matrix".into()));
    }
    let svd = m.inner.clone().svd(true, true);
    let w = svd.u.as_ref().expect("svd with vectors");
    let vt = svd.v_t.as_ref().expect("svd with vectors");
    let unitary = w * vt;
    let d = m.rows();
    let sigma = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(svd.singular_values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let positive = vt.adjoint() * sigma * vt;
    let positive = (&positive + positive.adjoint()).map(|v| v * Complex64::new(0.5, 0.0));
    Ok(PolarFactors {
        unitary: ComplexMatrix::from_na(unitary),
        positive: ComplexMatrix::from_na(positive),
    })
}

/// Eigenvalues of a square complex matrix, with multiplicity, sorted by
/// (real, imaginary) part for reproducibility.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Shape("eigenvalues require a square matrix".into()));
    }
    let mut vals = eig::general_eigenvalues(&m.inner)?;
    vals.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(vals)
}

// ---------------------------------------------------------------------------
// Serialization: {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            data: self
                .entries_row_major()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let entries: Vec<Complex64> = repr
            .data
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        ComplexMatrix::from_rows(repr.rows, repr.cols, entries).map_err(D::Error::custom)
    }
}
