//! Dense complex matrices and the handful of decompositions every other
//! module leans on.
//!
//! [`ComplexMatrix`] wraps a `nalgebra::DMatrix<Complex64>`. The wrapper exists
//! to pin down the invariants (positive dimensions, finite entries) and the
//! JSON file format `{"rows": r, "cols": c, "data": [[re, im], ...]}` with the
//! entries in row-major order.
//!
//! Tensor-product index convention: an operator on `C^k ⊗ C^n` is a
//! `(k·n)×(k·n)` matrix whose row/column `(a, i)` sits at position `a·n + i`,
//! i.e. the first factor is the slow index. [`kron`] and [`partial_trace`]
//! both follow it.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur, SymmetricEigen, QR, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Seed for every randomized routine. Generators are ChaCha20 keyed through
/// `SeedableRng::seed_from_u64`, so a seed reproduces the same stream on any
/// platform.
pub type Seed = u64;

/// The crate-wide random generator.
pub type Rng64 = ChaCha20Rng;

pub fn rng_from_seed(seed: Seed) -> Rng64 {
    ChaCha20Rng::seed_from_u64(seed)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix with positive dimensions and finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

/// On-disk layout of a [`ComplexMatrix`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        let data = file.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(file.rows, file.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixFile {
    fn from(m: ComplexMatrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: m.to_row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    /// Builds a matrix from real rows; convenient for literals.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.as_ref().len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend(row.as_ref().iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(r, c, data)
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.as_ref().len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend_from_slice(row.as_ref());
        }
        Self::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Wraps a nalgebra matrix. Panics on empty or non-finite input; this is
    /// an internal constructor for values produced by our own arithmetic.
    pub(crate) fn from_na(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Self { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn scalar(n: usize, alpha: C64) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { alpha } else { ZERO })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Matrix unit `E_ij` of size `rows`×`cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    /// Column matrix from a vector.
    pub fn column_vector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
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

    pub fn as_na(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_na(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub(crate) fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_na(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_na(self.inner.transpose())
    }

    pub fn conj(&self) -> Self {
        Self::from_na(self.inner.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.inner.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self::from_na(&self.inner * alpha)
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        Self::from_na(self.inner.map(|z| z * alpha))
    }

    /// Real inner product `Re Tr(A* B)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_na((&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Frobenius norm of `M − M*`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.inner - self.inner.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Frobenius norm of the commutator `MM* − M*M`.
    pub fn normality_deviation(&self) -> f64 {
        let a = self.adjoint();
        (&(self * &a) - &(&a * self)).frobenius_norm()
    }

    /// `⟨Mx, x⟩ = x* M x`.
    pub fn quadratic_form(&self, x: &[C64]) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.rows() {
            let mut row = ZERO;
            for j in 0..self.cols() {
                row += self.inner[(i, j)] * x[j];
            }
            acc += x[i].conj() * row;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = (self.rows(), self.cols());
        Self::from_fn(r1 + other.rows(), c1 + other.cols(), |i, j| {
            if i < r1 && j < c1 {
                self.inner[(i, j)]
            } else if i >= r1 && j >= c1 {
                other.inner[(i - r1, j - c1)]
            } else {
                ZERO
            }
        })
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_na(&self.inner + &rhs.inner)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_na(&self.inner - &rhs.inner)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_na(&self.inner * &rhs.inner)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_na(-&self.inner)
    }
}

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// `H_θ(T) = (e^{iθ}T + e^{−iθ}T*)/2`. Its top eigenvalue is the support
/// function of the numerical range in direction `e^{−iθ}`.
pub fn rotated_hermitian_part(t: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let n = t.ensure_square()?;
    let phase = C64::from_polar(0.5, theta);
    let m = &t.inner;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        phase * m[(i, j)] + (phase * m[(j, i)]).conj()
    }))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `j` belongs to `values[j]`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn max_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn top_vector(&self) -> Vec<C64> {
        self.vectors.column(self.values.len() - 1)
    }

    /// `V f(Λ) V*`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.vectors.as_na();
        let n = v.nrows();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (idx, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let col = v.column(idx);
            for j in 0..n {
                let cj = col[j].conj() * w;
                for i in 0..n {
                    out[(i, j)] += col[i] * cj;
                }
            }
        }
        ComplexMatrix::from_na(out)
    }
}

/// Eigendecomposition of a Hermitian matrix; values ascending.
pub fn eig_hermitian(h: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    let n = h.ensure_square()?;
    let dev = h.hermitian_deviation();
    if dev.is_nan() {
        return Err(Error::NaN("eig_hermitian"));
    }
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    // Symmetrize so the solver only ever sees the lower triangle we mean.
    let sym = h.hermitian_part().into_na();
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence("Hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition {
        values,
        vectors: ComplexMatrix::from_na(vectors),
    })
}

/// All eigenvalues of a square matrix, with multiplicity, from the complex
/// Schur form.
pub fn spectrum(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.ensure_square()?;
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.inner.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence("Schur decomposition"))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = SVD::new(m.inner.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Thin SVD `M = U diag(s) V*` with descending singular values.
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let mut svd = SVD::new(m.inner.clone(), true, true);
    svd.sort_by_singular_values();
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    Svd {
        u: ComplexMatrix::from_na(u),
        singular_values: svd.singular_values.iter().copied().collect(),
        v: ComplexMatrix::from_na(v_t.adjoint()),
    }
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m)[0]
}

/// Schatten `p`-norm; `p = f64::INFINITY` is the operator norm.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent {p} < 1")));
    }
    let s = singular_values(m);
    if p.is_infinite() {
        return Ok(s[0]);
    }
    if p == 1.0 {
        return Ok(s.iter().sum());
    }
    // Scale by the largest value so large p cannot overflow.
    let top = s[0];
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_na(a.inner.kronecker(&b.inner))
}

/// Which tensor factor [`partial_trace`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// The first (`k`-dimensional) factor; the result is `n×n`.
    Input,
    /// The second (`n`-dimensional) factor; the result is `k×k`.
    Output,
}

/// Partial trace of an operator on `C^k ⊗ C^n`.
pub fn partial_trace(m: &ComplexMatrix, k: usize, n: usize, which: Subsystem) -> Result<ComplexMatrix> {
    if k == 0 || n == 0 || m.rows() != k * n || m.cols() != k * n {
        return Err(Error::Dimension(format!(
            "partial trace of {}x{} over C^{k} ⊗ C^{n}",
            m.rows(),
            m.cols()
        )));
    }
    let x = &m.inner;
    Ok(match which {
        Subsystem::Input => ComplexMatrix::from_fn(n, n, |i, j| (0..k).map(|a| x[(a * n + i, a * n + j)]).sum()),
        Subsystem::Output => ComplexMatrix::from_fn(k, k, |a, b| (0..n).map(|i| x[(a * n + i, b * n + i)]).sum()),
    })
}

/// Standard complex Gaussian (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians, drawn row-major.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

/// Haar-distributed isometry (`V*V = I_cols`) drawn from a seeded generator.
pub fn haar_isometry(rows: usize, cols: usize, seed: Seed) -> Result<ComplexMatrix> {
    haar_isometry_with(rows, cols, &mut rng_from_seed(seed))
}

/// Ginibre matrix, Householder QR, then the phases of `diag(R)` are moved
/// into `Q` so the distribution is exactly Haar.
pub fn haar_isometry_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if cols == 0 || cols > rows {
        return Err(Error::InvalidArgument(format!(
            "isometry needs 0 < cols <= rows, got {rows}x{cols}"
        )));
    }
    let g = ginibre(rows, cols, rng).into_na();
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(ComplexMatrix::from_na(q))
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry_with(n, n, rng).expect("square isometry")
}

/// Ginibre matrix scaled by `1/√n`, so its spectrum roughly fills the unit disk.
pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(n, n, rng).scale_real(1.0 / (n as f64).sqrt())
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    normalize(&v)
}

pub fn vector_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &[C64]) -> Vec<C64> {
    let n = vector_norm(x);
    x.iter().map(|z| z / n).collect()
}

/// Positive square root of a PSD matrix; small negative eigenvalues from
/// roundoff are clipped.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h, 1e-8 * (1.0 + h.max_abs()))?;
    Ok(eig.map_values(|x| x.max(0.0).sqrt()))
}

/// `|M| = (M*M)^{1/2}`.
pub fn abs(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt(&(&m.adjoint() * m))
}

/// Unitary factor `U` of a polar decomposition `M = U|M|` of a square matrix.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.ensure_square()?;
    let s = svd(m);
    Ok(&s.u * &s.v.adjoint())
}
